"""Detection and retrieval orchestration with oracle-call accounting.

Runs the count-then-retrieve procedure at realistic bank sizes by
combining the classical match oracle (:mod:`qmf.dsp` + :mod:`qmf.bank`)
with the analytic counting model (:mod:`qmf.amplify`).  The quantum
measurement is emulated by sampling the exact outcome distribution,
with the true match count established classically during scenario
setup; this reproduces the algorithm's statistics without claiming
quantum execution.

Charge model: one detection costs ``2**p - 1`` oracle queries (the
controlled-iteration ladder), one retrieval attempt costs ``k* + 1``
(the Grover ladder plus one classical verification of the returned
candidate).

Trials are independent; each owns an RNG substream derived from
``(seed, trial_index)`` so results do not depend on execution order.
"""

from __future__ import annotations

import enum
import statistics
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import amplify, dsp
from .bank import BankSpec, bank_size, index_to_params, waveform
from .errors import ValidationError

DEFAULT_MAX_ATTEMPTS = 10_000


@dataclass
class OracleCounter:
    """Running tally of match-predicate evaluations charged."""

    evaluations: int = 0

    def add(self, k: int) -> None:
        if k < 0:
            raise ValidationError("cannot charge a negative evaluation count")
        self.evaluations += k


@dataclass(frozen=True)
class DetectionOutcome:
    """Decoded result of one counting run; detected iff b != 0."""

    b: int
    r_star: int
    k_star: int | None

    @property
    def detected(self) -> bool:
        return self.b != 0


class RetrievalStrategy(enum.Enum):
    """How to schedule recounts between retrieval attempts."""

    REUSE_K = "reuse_k"
    RECOUNT_EACH_TRY = "recount_each_try"

    @classmethod
    def parse(cls, name: str) -> "RetrievalStrategy":
        try:
            return cls(name.strip().lower().replace("-", "_"))
        except ValueError:
            raise ValidationError(
                f"unknown strategy {name!r}; use 'reuse_k' or 'recount_each_try'"
            ) from None


@dataclass(frozen=True)
class TrialRecord:
    """Per-trial ledger of one retrieve-until-success run."""

    oracle_evals: int
    attempts: int
    succeeded: bool
    returned_index: int | None


# Counting distributions are immutable, so sharing across trials is safe.
_dist_cache: dict[tuple[int, int, int], amplify.CountingDistribution] = {}


def _cached_distribution(n: int, r: int, p: int) -> amplify.CountingDistribution:
    key = (n, r, p)
    if key not in _dist_cache:
        _dist_cache[key] = amplify.counting_distribution(n, r, p)
    return _dist_cache[key]


# ---------------------------------------------------------------------------
# classical oracle

def oracle_eval(spec: BankSpec, data: dsp.FrequencySeries, psd: dsp.Psd, i: int,
                rho_thr: float, counter: OracleCounter,
                band: np.ndarray | None = None) -> int:
    """Evaluate the match predicate f(i): template, SNR series, threshold."""
    params = index_to_params(spec, i)
    qc = dsp.complex_template(params, spec.fs, spec.m_samples, psd, band)
    rho_max, _ = dsp.max_snr(dsp.snr_series(data, qc, psd, band))
    counter.add(1)
    return dsp.match_predicate(rho_max, rho_thr)


def classical_search(spec: BankSpec, data: dsp.FrequencySeries, psd: dsp.Psd,
                     rho_thr: float, counter: OracleCounter,
                     band: np.ndarray | None = None) -> list[int]:
    """Exhaustive baseline: evaluate f(i) for every template, charge N."""
    return [
        i for i in range(bank_size(spec))
        if oracle_eval(spec, data, psd, i, rho_thr, counter, band)
    ]


# ---------------------------------------------------------------------------
# distribution-level quantum procedures

def signal_detection(n: int, r_true: int, p: int, rng: np.random.Generator,
                     counter: OracleCounter) -> DetectionOutcome:
    """One counting run: sample an outcome b and decode it.

    Charges the full controlled ladder of ``2**p - 1`` oracle queries.
    With ``r_true = 0`` the outcome is 0 with certainty, so the
    procedure can never raise a false alarm.
    """
    if p < 1:
        raise ValidationError(f"counting register needs p >= 1, got {p}")
    dist = _cached_distribution(n, r_true, p)
    counter.add((1 << p) - 1)
    b = amplify.sample_b(dist, rng)
    est = amplify.estimate_from_b(b, p, n)
    return DetectionOutcome(b=b, r_star=est.r_star, k_star=est.k_star)


def count_detections(n: int, r_true: int, p: int, trials: int, seed: int) -> int:
    """Number of detected (b != 0) outcomes over many independent runs."""
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    dist = _cached_distribution(n, r_true, p)
    rng = np.random.default_rng(seed)
    u = rng.random(trials)
    b = np.searchsorted(dist.cdf, u, side="right")
    return int(np.count_nonzero(np.minimum(b, len(dist.probs) - 1)))


def template_retrieval(n: int, r_true: int, k_star: int, match_set: list[int],
                       rng: np.random.Generator,
                       counter: OracleCounter) -> int | None:
    """One amplification run: succeed with probability sin^2((2k*+1) theta).

    On success returns a uniformly random element of the match set.
    Charges ``k*`` ladder queries plus one verification query.
    """
    if k_star < 0:
        raise ValidationError(f"iteration count k*={k_star} must be >= 0")
    if r_true < 1 or not match_set:
        raise ValidationError("retrieval needs at least one true match")
    counter.add(k_star + 1)
    success = amplify.p_match(amplify.theta_of(n, r_true), k_star)
    if rng.random() < success:
        return match_set[int(rng.integers(len(match_set)))]
    return None


def retrieve_until_success(strategy: RetrievalStrategy, n: int, r_true: int,
                           p: int, match_set: list[int],
                           rng: np.random.Generator, counter: OracleCounter,
                           max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> TrialRecord:
    """Repeat detection/retrieval until a match comes back.

    REUSE_K keeps the first decoded k* across retries and only recounts
    after a b = 0 outcome (which decodes to "no match", leaving no k*
    to reuse).  RECOUNT_EACH_TRY pays for a fresh detection before
    every retrieval attempt.
    """
    if r_true < 1:
        raise ValidationError("retrieval needs at least one true match")
    start = counter.evaluations
    attempts = 0
    rounds = 0
    k_star: int | None = None
    while rounds < max_attempts:
        rounds += 1
        if k_star is None or strategy is RetrievalStrategy.RECOUNT_EACH_TRY:
            outcome = signal_detection(n, r_true, p, rng, counter)
            if not outcome.detected:
                k_star = None
                continue
            k_star = outcome.k_star
        attempts += 1
        found = template_retrieval(n, r_true, k_star, match_set, rng, counter)
        if found is not None:
            return TrialRecord(
                oracle_evals=counter.evaluations - start, attempts=attempts,
                succeeded=True, returned_index=found,
            )
    return TrialRecord(
        oracle_evals=counter.evaluations - start, attempts=attempts,
        succeeded=False, returned_index=None,
    )


@dataclass(frozen=True)
class CollectResult:
    """Distinct matches recovered and whether the target count was met."""

    indices: frozenset[int]
    complete: bool


def collect_all_matches(n: int, r_true: int, p: int, match_set: list[int],
                        rng: np.random.Generator, counter: OracleCounter,
                        budget: int,
                        strategy: RetrievalStrategy = RetrievalStrategy.REUSE_K,
                        target: int | None = None) -> CollectResult:
    """Sample with replacement until r* distinct matches are held.

    Collecting all matches is a coupon-collector process; the target
    count defaults to the r* decoded from an initial detection and the
    search stops once the oracle-evaluation budget is spent.
    """
    if r_true < 1:
        raise ValidationError("collection needs at least one true match")
    start = counter.evaluations
    if target is None:
        outcome = signal_detection(n, r_true, p, rng, counter)
        while not outcome.detected and counter.evaluations - start < budget:
            outcome = signal_detection(n, r_true, p, rng, counter)
        if not outcome.detected:
            return CollectResult(indices=frozenset(), complete=False)
        target = outcome.r_star
    found: set[int] = set()
    while len(found) < target and counter.evaluations - start < budget:
        record = retrieve_until_success(
            strategy, n, r_true, p, match_set, rng, counter
        )
        if record.succeeded:
            found.add(record.returned_index)
    return CollectResult(indices=frozenset(found), complete=len(found) >= target)


# ---------------------------------------------------------------------------
# scenarios and Monte Carlo benchmarking

@dataclass(frozen=True)
class Scenario:
    """A fully specified detection/retrieval experiment.

    Either synthetic (n, r given directly; match set is 0..r-1) or
    derived from a template bank plus an injected chirp, in which case
    the match set comes from an exhaustive classical search during
    setup.
    """

    n: int
    p: int
    strategy: RetrievalStrategy
    match_set: tuple[int, ...]
    rho_thr: float | None = None
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    setup_evals: int = 0

    @property
    def r_true(self) -> int:
        return len(self.match_set)


def scenario_from_config(cfg: dict) -> Scenario:
    """Build a scenario from the JSON block accepted by the CLI.

    Synthetic form: keys n, r, optional p (auto-selected if missing),
    strategy.  Injection form: keys bank (a bank config block),
    inject_index, amplitude, noise_sigma, noise_seed, rho_thr, optional
    p and strategy; the match set is computed classically.
    """
    strategy = RetrievalStrategy.parse(cfg.get("strategy", "reuse_k"))
    max_attempts = int(cfg.get("max_attempts", DEFAULT_MAX_ATTEMPTS))
    if "bank" in cfg:
        spec = BankSpec.from_config(cfg["bank"])
        n = bank_size(spec)
        missing = [k for k in ("inject_index", "rho_thr") if k not in cfg]
        if missing:
            raise ValidationError(f"injection scenario missing keys: {missing}")
        amplitude = float(cfg.get("amplitude", 1.0))
        sigma = float(cfg.get("noise_sigma", 0.0))
        params = index_to_params(spec, int(cfg["inject_index"]))
        strain = amplitude * waveform(params, spec.fs, spec.m_samples).samples
        if sigma > 0.0:
            noise_rng = np.random.default_rng(int(cfg.get("noise_seed", 0)))
            strain = strain + noise_rng.normal(scale=sigma, size=strain.size)
        data = dsp.forward_fft(dsp.TimeSeries(strain, dt=1.0 / spec.fs))
        psd = dsp.white_psd(spec.m_samples, 1.0 / spec.fs, sigma=max(sigma, 1.0))
        rho_thr = float(cfg["rho_thr"])
        counter = OracleCounter()
        match_set = classical_search(spec, data, psd, rho_thr, counter)
        p = int(cfg["p"]) if "p" in cfg else amplify.choose_p(n)
        return Scenario(
            n=n, p=p, strategy=strategy, match_set=tuple(match_set),
            rho_thr=rho_thr, max_attempts=max_attempts,
            setup_evals=counter.evaluations,
        )
    missing = [k for k in ("n", "r") if k not in cfg]
    if missing:
        raise ValidationError(f"synthetic scenario missing keys: {missing}")
    n, r = int(cfg["n"]), int(cfg["r"])
    if r < 0 or r > n:
        raise ValidationError(f"match count r={r} outside [0, {n}]")
    p = int(cfg["p"]) if "p" in cfg else amplify.choose_p(n)
    return Scenario(
        n=n, p=p, strategy=strategy, match_set=tuple(range(r)),
        max_attempts=max_attempts,
    )


@dataclass(frozen=True)
class MonteCarloSummary:
    """Aggregate of per-trial oracle-evaluation counts."""

    trials: int
    mean: float
    median: float
    stddev: float
    histogram: tuple[tuple[int, int], ...]
    n_failed: int
    classical_evals: int

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "mean": self.mean,
            "median": self.median,
            "stddev": self.stddev,
            "n_failed": self.n_failed,
            "classical_evals": self.classical_evals,
            "histogram": [{"evals": e, "count": c} for e, c in self.histogram],
        }


def run_trial(scenario: Scenario, rng: np.random.Generator) -> TrialRecord:
    """One retrieve-until-success trial with its own counter."""
    counter = OracleCounter()
    return retrieve_until_success(
        scenario.strategy, scenario.n, scenario.r_true, scenario.p,
        list(scenario.match_set), rng, counter, scenario.max_attempts,
    )


def monte_carlo(scenario: Scenario, trials: int, seed: int) -> tuple[MonteCarloSummary, list[TrialRecord]]:
    """Independent trials of the retrieval procedure, fixed substreams."""
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if scenario.r_true < 1:
        raise ValidationError("Monte Carlo benchmark needs at least one match")
    records = [
        run_trial(scenario, np.random.default_rng((seed, t)))
        for t in range(trials)
    ]
    evals = [rec.oracle_evals for rec in records]
    hist = tuple(sorted(Counter(evals).items()))
    summary = MonteCarloSummary(
        trials=trials,
        mean=statistics.fmean(evals),
        median=float(statistics.median(evals)),
        stddev=statistics.pstdev(evals) if trials > 1 else 0.0,
        histogram=hist,
        n_failed=sum(1 for rec in records if not rec.succeeded),
        classical_evals=scenario.n,
    )
    return summary, records
