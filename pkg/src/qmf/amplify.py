"""Closed-form model of Grover amplification and quantum counting.

Everything here is exact arithmetic on the two-dimensional rotation
picture of amplitude amplification, so it stays valid for template-bank
sizes far beyond what a state vector can hold.  The measurement
statistics of the counting register are evaluated from the analytic
outcome distribution; :mod:`qmf.qsim` reproduces the same distribution
gate-by-gate for small registers, which is how the two modules
cross-validate each other.

All functions are pure.  ``CountingDistribution`` instances are
immutable after construction; sampling takes a caller-supplied
``numpy.random.Generator`` so reproducibility is owned by the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceededError, ValidationError

# Probability that the counting outcome lands within one unit of the
# ideal (non-integer) outcome; classic phase-estimation bound.
EIGHT_OVER_PI_SQ = 8.0 / math.pi**2

# Below this distance from an aligned outcome the geometric sum is
# evaluated by its limit (removable singularity).
_ALIGNED_TOL = 1e-12

_DEFAULT_DIST_BYTES = 1 << 30


def round_half_away(x: float) -> int:
    """Round to the nearest integer, halves away from zero."""
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def _round_half_away_arr(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def theta_of(n: float, r: float) -> float:
    """Rotation half-angle arcsin(sqrt(r/n)) of one Grover iteration."""
    if n < 1:
        raise ValidationError(f"need at least one entry, got n={n}")
    if r < 0 or r > n:
        raise ValidationError(f"match count r={r} outside [0, {n}]")
    return math.asin(math.sqrt(r / n))


@dataclass(frozen=True)
class GroverGeometry:
    """Two-dimensional rotation model: bank size, match count, half-angle."""

    n_total: int
    r_match: int
    theta: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", theta_of(self.n_total, self.r_match))


def amplitude_after(geom: GroverGeometry, k: int) -> tuple[float, float]:
    """Matched and unmatched amplitudes after k Grover iterations.

    Returns ``(sin((2k+1)theta), cos((2k+1)theta))``.
    """
    if k < 0:
        raise ValidationError(f"iteration count k={k} must be >= 0")
    phase = (2 * k + 1) * geom.theta
    return math.sin(phase), math.cos(phase)


def optimal_k(n: float, r: float) -> int:
    """Iteration count that maximises the matched amplitude, (pi/4)sqrt(n/r) - 1/2.

    Rounded half-away-from-zero and floored at 0 (the formula goes
    negative once r is no longer small against n).
    """
    if r <= 0:
        raise ValidationError("optimal_k needs at least one match (r >= 1)")
    if r > n:
        raise ValidationError(f"match count r={r} exceeds bank size n={n}")
    return max(0, round_half_away(math.pi / 4.0 * math.sqrt(n / r) - 0.5))


def choose_p(n: float) -> int:
    """Smallest counting-register width p with 2**p > pi*sqrt(n)."""
    if n < 2:
        raise ValidationError(f"bank size n={n} must be >= 2")
    bound = math.pi * math.sqrt(n)
    p = max(1, math.floor(math.log2(bound)))
    while 2.0**p <= bound:
        p += 1
    return p


@dataclass(frozen=True)
class CountingConfig:
    """Counting-register width p for a bank of n entries, with c = 2**p / sqrt(n)."""

    p: int
    n_total: int
    c: float = field(init=False)

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValidationError(f"counting register needs p >= 1, got {self.p}")
        object.__setattr__(self, "c", 2.0**self.p / math.sqrt(self.n_total))

    @classmethod
    def auto(cls, n: int) -> "CountingConfig":
        return cls(p=choose_p(n), n_total=n)


class CountingDistribution:
    """Exact outcome distribution of the counting register.

    ``probs[b]`` is the probability of reading integer ``b`` from a
    p-qubit counting register after phase estimation of the Grover
    operator with rotation half-angle ``theta``.  The distribution is
    the equal mixture of the two conjugate eigenvalue branches, so it is
    symmetric under ``b <-> (2**p - b) mod 2**p`` and sums to one.
    """

    __slots__ = ("p", "theta", "probs", "_cdf")

    def __init__(self, p: int, theta: float, probs: np.ndarray):
        self.p = p
        self.theta = theta
        self.probs = probs
        self.probs.flags.writeable = False
        self._cdf: np.ndarray | None = None

    @property
    def cdf(self) -> np.ndarray:
        if self._cdf is None:
            self._cdf = np.cumsum(self.probs)
        return self._cdf


def _branch_probs(theta: float, p: int) -> np.ndarray:
    """Outcome distribution of a single eigenvalue branch, P+(b)."""
    d = 1 << p
    b = np.arange(d)
    delta = theta - np.pi * b / d
    num = math.sin(d * theta) ** 2
    aligned = np.abs(delta) < _ALIGNED_TOL
    safe = np.where(aligned, 1.0, delta)
    out = num / (d * d * np.sin(safe) ** 2)
    out[aligned] = 1.0
    return out


def counting_distribution(
    n: int, r: int, p: int, max_bytes: int = _DEFAULT_DIST_BYTES
) -> CountingDistribution:
    """Exact counting-register distribution for r matches among n entries."""
    if p < 1:
        raise ValidationError(f"counting register needs p >= 1, got {p}")
    if (1 << p) * 8 > max_bytes:
        raise CapExceededError(
            f"2**{p} outcome probabilities exceed the {max_bytes}-byte budget"
        )
    theta = theta_of(n, r)
    plus = _branch_probs(theta, p)
    mirror = np.roll(plus[::-1], 1)  # index b -> (2**p - b) mod 2**p
    probs = 0.5 * (plus + mirror)
    return CountingDistribution(p=p, theta=theta, probs=probs)


def sample_b(dist: CountingDistribution, rng: np.random.Generator) -> int:
    """Draw one counting outcome by inverse CDF on the supplied stream."""
    u = rng.random()
    b = int(np.searchsorted(dist.cdf, u, side="right"))
    return min(b, len(dist.probs) - 1)


@dataclass(frozen=True)
class CountEstimate:
    """Estimates decoded from a counting outcome b.

    ``b = 0`` is the distinguished no-match outcome: ``r_star`` is 0 and
    ``k_star`` is None (no retrieval is attempted).
    """

    b: int
    theta_star: float
    r_star: int
    k_star: int | None


def estimate_from_b(b: int, p: int, n: float) -> CountEstimate:
    """Decode an outcome b into (theta*, r*, k*).

    theta* folds the two eigenvalue branches onto [0, pi/2]; r* rounds
    n*sin^2(theta*) and is clamped to at least 1 for any non-zero
    outcome, since b != 0 cannot occur when there are no matches.
    """
    d = 1 << p
    if b < 0 or b >= d:
        raise ValidationError(f"outcome b={b} outside [0, 2**{p})")
    if b == 0:
        return CountEstimate(b=0, theta_star=0.0, r_star=0, k_star=None)
    theta_star = math.pi * b / d if b <= d // 2 else math.pi - math.pi * b / d
    r_star = round_half_away(n * math.sin(theta_star) ** 2)
    if r_star == 0:
        r_star = 1
    return CountEstimate(b=b, theta_star=theta_star, r_star=r_star, k_star=optimal_k(n, r_star))


def false_negative_prob(n: int, r: int, p: int) -> float:
    """Probability of reading b = 0 although r >= 1 matches exist."""
    if r < 1:
        raise ValidationError("false negatives are defined for r >= 1")
    theta = theta_of(n, r)
    d = 1 << p
    return math.sin(d * theta) ** 2 / (d * d * math.sin(theta) ** 2)


def repetitions_for(delta_target: float) -> int:
    """Detection repetitions needed to push the false-negative rate to target.

    Each repetition multiplies the per-run bound 1/pi^2, so the count is
    log(1/target) / (2 log pi), rounded to the nearest integer (the
    quoted targets are order-of-magnitude figures) and at least 1.
    """
    if not 0.0 < delta_target < 1.0:
        raise ValidationError(f"target must be in (0, 1), got {delta_target}")
    ell = round_half_away(math.log(1.0 / delta_target) / (2.0 * math.log(math.pi)))
    return max(1, ell)


def p_match(theta: float, k: int) -> float:
    """Probability of measuring a matched entry after k iterations."""
    if not 0.0 <= theta <= math.pi / 2:
        raise ValidationError(f"theta={theta} outside [0, pi/2]")
    if k < 0:
        raise ValidationError(f"iteration count k={k} must be >= 0")
    return math.sin((2 * k + 1) * theta) ** 2


def p_fail_total(n: int, r: int, p: int) -> float:
    """Total probability that one count-then-retrieve cycle returns nothing.

    Averages the retrieval failure cos^2((2 k_b + 1) theta) over the
    counting outcomes b, where k_b is the iteration count decoded from
    b.  The b = 0 outcome aborts retrieval and therefore fails outright.
    """
    if r < 1:
        raise ValidationError("retrieval failure is defined for r >= 1")
    dist = counting_distribution(n, r, p)
    theta = dist.theta
    d = 1 << p
    b = np.arange(d)
    theta_star = np.where(b <= d // 2, np.pi * b / d, np.pi - np.pi * b / d)
    r_star = _round_half_away_arr(n * np.sin(theta_star) ** 2)
    r_star = np.maximum(r_star, 1.0)
    k_star = np.maximum(
        0.0, _round_half_away_arr(np.pi / 4.0 * np.sqrt(n / r_star) - 0.5)
    )
    fail = np.cos((2.0 * k_star + 1.0) * theta) ** 2
    fail[0] = 1.0
    return float(np.dot(dist.probs, fail))


def fail_bound(r: int, eps_p: float) -> float:
    """Two-term upper bound on the count-then-retrieve failure probability.

    ``eps_p`` in (0, 1) is the fractional excess of the register width
    over its lower bound; the ideal outcome is then 2**eps_p * sqrt(r),
    and only its two neighbouring integers are credited with success.
    The O(sqrt(r/n)) correction is dropped.
    """
    if r < 1:
        raise ValidationError("bound is defined for r >= 1")
    if not 0.0 < eps_p < 1.0:
        raise ValidationError(f"eps_p must be in (0, 1), got {eps_p}")
    b_ideal = 2.0**eps_p * math.sqrt(r)
    b_hi = math.ceil(b_ideal)
    eps = b_hi - b_ideal
    if eps == 0.0:  # ideal outcome is an exact integer: retrieval is certain
        return 0.0
    b_lo = b_hi - 1
    term_hi = np.sinc(eps) ** 2 * math.cos(eps / b_hi * math.pi / 2.0) ** 2
    term_lo = np.sinc(1.0 - eps) ** 2 * math.cos((1.0 - eps) / b_lo * math.pi / 2.0) ** 2
    return float(1.0 - term_hi - term_lo)


def _golden_max(f, lo: float, hi: float, tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section maximisation of f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def max_fail_bound(r: int, grid_points: int = 20001) -> float:
    """Worst-case failure bound over all register-width excesses eps_p."""
    return max_fail_bound_argmax(r, grid_points)[1]


def max_fail_bound_argmax(r: int, grid_points: int = 20001) -> tuple[float, float]:
    """Return (argmax eps_p, sup fail_bound(r, eps_p)) over eps_p in (0, 1).

    Dense grid scan followed by golden-section refinement around the
    grid maximum.  The bound is piecewise smooth (jumps where the ideal
    outcome crosses an integer), so the grid locates the right piece and
    the refinement polishes within it.
    """
    if grid_points < 3:
        raise ValidationError("grid needs at least 3 points")
    lo_edge, hi_edge = 1e-9, 1.0 - 1e-9
    grid = np.linspace(lo_edge, hi_edge, grid_points)
    vals = np.array([fail_bound(r, e) for e in grid])
    i = int(np.argmax(vals))
    lo = grid[max(0, i - 1)]
    hi = grid[min(grid_points - 1, i + 1)]
    x, fx = _golden_max(lambda e: fail_bound(r, e), lo, hi)
    if fx >= vals[i]:
        return float(x), float(fx)
    return float(grid[i]), float(vals[i])
