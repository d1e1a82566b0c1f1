"""Exact state-vector simulator for the string-matching search circuits.

Amplitudes are a dense complex array indexed so that qubit ``t`` is bit
``t`` of the basis-state integer (little endian).  Gate kernels act in
place through bit-stride reshapes of the contiguous amplitude buffer,
so every kernel is a handful of vectorized passes; multi-controlled
gates enumerate only the addressed indices.  The index partition of a
kernel is a static function of its target qubit, which is what makes
the kernels safe to parallelize internally over disjoint ranges.

Register layout used by the search/counting circuits: the template
register occupies the low qubits, the ancilla sits just above it, and
the counting register occupies the top.  Counting qubit ``t`` controls
the ``2**t``-th Grover power and contributes bit ``t`` of the outcome
integer ``b``; the inverse Fourier transform includes the final qubit
reversal so that measured bitstrings read directly as ``b``.

The data register of the matching oracle is elided: the data bits are
classical here, so the data-conditioned CNOT layer collapses to a
classically chosen X layer on the template register.  The oracle
unitary on template + ancilla is identical to the full circuit's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceededError, ValidationError

# 2**26 amplitudes = 1 GiB of complex128; override per call if needed.
DEFAULT_QUBIT_CAP = 26

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(eq=False)
class StateVector:
    """Dense amplitude vector over ``2**num_qubits`` basis states."""

    num_qubits: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if self.amps.shape != (1 << self.num_qubits,):
            raise ValidationError(
                f"amplitude array shape {self.amps.shape} does not match "
                f"{self.num_qubits} qubits"
            )

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit index map: template low, ancilla above it, counting on top."""

    template: range
    ancilla: int
    counting: range = field(default_factory=lambda: range(0))

    def __post_init__(self) -> None:
        claimed = list(self.template) + [self.ancilla] + list(self.counting)
        if len(set(claimed)) != len(claimed):
            raise ValidationError("register ranges overlap")
        if sorted(claimed) != list(range(len(claimed))):
            raise ValidationError("registers must cover qubits 0..Q-1 exactly")

    @classmethod
    def standard(cls, n: int, p: int = 0) -> "RegisterLayout":
        return cls(template=range(0, n), ancilla=n, counting=range(n + 1, n + 1 + p))

    @property
    def num_qubits(self) -> int:
        return len(self.template) + 1 + len(self.counting)


@dataclass(frozen=True)
class StringOracleSpec:
    """Digital matching condition: agree with the data on the high bits.

    ``data_bits`` is an n-character 0/1 string whose rightmost character
    is bit 0; the ``q_ignored`` lowest-order bits are exempt from the
    comparison, so ``2**q_ignored`` basis states match.
    """

    data_bits: str
    q_ignored: int

    def __post_init__(self) -> None:
        if not self.data_bits or set(self.data_bits) - {"0", "1"}:
            raise ValidationError(f"data_bits must be a 0/1 string, got {self.data_bits!r}")
        if not 0 <= self.q_ignored <= len(self.data_bits):
            raise ValidationError(
                f"q_ignored={self.q_ignored} outside [0, {len(self.data_bits)}]"
            )

    @property
    def n(self) -> int:
        return len(self.data_bits)

    @property
    def data_int(self) -> int:
        return int(self.data_bits, 2)

    def matching_states(self) -> np.ndarray:
        """All template integers satisfying the predicate."""
        base = (self.data_int >> self.q_ignored) << self.q_ignored
        return base + np.arange(1 << self.q_ignored)


@dataclass(eq=False)
class ShotResult:
    """Histogram of measured bitstrings."""

    counts: dict[str, int]
    shots: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.shots:
            raise ValidationError("shot counts do not sum to the shot total")


# ---------------------------------------------------------------------------
# gate kernels

def _pair_view(amps: np.ndarray, q: int) -> np.ndarray:
    """View of shape (blocks, 2, 2**q) splitting on bit q."""
    return amps.reshape(-1, 2, 1 << q)


def _apply_h(amps: np.ndarray, q: int) -> None:
    v = _pair_view(amps, q)
    lo = v[:, 0].copy()
    v[:, 0] = (lo + v[:, 1]) * _INV_SQRT2
    v[:, 1] = (lo - v[:, 1]) * _INV_SQRT2


def _apply_x(amps: np.ndarray, q: int) -> None:
    v = _pair_view(amps, q)
    lo = v[:, 0].copy()
    v[:, 0] = v[:, 1]
    v[:, 1] = lo


def _apply_z(amps: np.ndarray, q: int) -> None:
    _pair_view(amps, q)[:, 1] *= -1.0


def _apply_cphase(amps: np.ndarray, control: int, target: int, phi: float) -> None:
    """diag(1, 1, 1, e^{i phi}) on the (control, target) pair."""
    hi, lo = max(control, target), min(control, target)
    v = amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    v[:, 1, :, 1] *= complex(math.cos(phi), math.sin(phi))


def _controlled_indices(num_qubits: int, ones: list[int]) -> np.ndarray:
    """Indices of all basis states whose bits in ``ones`` are all 1."""
    free = [q for q in range(num_qubits) if q not in ones]
    idx = np.array([sum(1 << q for q in ones)], dtype=np.int64)
    for f in free:
        idx = np.concatenate([idx, idx + (1 << f)])
    return idx


def _apply_mcx(amps: np.ndarray, num_qubits: int, controls: list[int], target: int) -> None:
    idx1 = _controlled_indices(num_qubits, sorted(controls) + [target])
    idx0 = idx1 - (1 << target)
    tmp = amps[idx0].copy()
    amps[idx0] = amps[idx1]
    amps[idx1] = tmp


def _apply_mcz(amps: np.ndarray, num_qubits: int, qubits: list[int]) -> None:
    amps[_controlled_indices(num_qubits, sorted(qubits))] *= -1.0


_SINGLE_QUBIT = {"H": _apply_h, "X": _apply_x, "Z": _apply_z}


def apply_gate(state: StateVector, gate: str, targets: int | list[int],
               controls: list[int] | None = None) -> StateVector:
    """Apply a named gate in place and return the state.

    ``gate`` is one of H, X, Z (single target, no controls), CNOT (one
    control, one target), MCX (any controls, one target) or MCZ (all
    listed qubits act as controls of the phase flip).
    """
    targets = [targets] if isinstance(targets, int) else list(targets)
    controls = list(controls) if controls else []
    touched = targets + controls
    if len(set(touched)) != len(touched):
        raise ValidationError(f"duplicate qubit in gate operands {touched}")
    for q in touched:
        if not 0 <= q < state.num_qubits:
            raise ValidationError(f"qubit {q} outside register of {state.num_qubits}")
    if gate in _SINGLE_QUBIT:
        if controls or len(targets) != 1:
            raise ValidationError(f"{gate} takes exactly one target and no controls")
        _SINGLE_QUBIT[gate](state.amps, targets[0])
    elif gate == "CNOT":
        if len(controls) != 1 or len(targets) != 1:
            raise ValidationError("CNOT takes one control and one target")
        _apply_mcx(state.amps, state.num_qubits, controls, targets[0])
    elif gate == "MCX":
        if len(targets) != 1:
            raise ValidationError("MCX takes exactly one target")
        _apply_mcx(state.amps, state.num_qubits, controls, targets[0])
    elif gate == "MCZ":
        qubits = targets + controls
        if not qubits:
            raise ValidationError("MCZ needs at least one qubit")
        _apply_mcz(state.amps, state.num_qubits, qubits)
    else:
        raise ValidationError(f"unknown gate {gate!r}")
    return state


# ---------------------------------------------------------------------------
# circuit blocks

def init_state(layout: RegisterLayout, cap: int = DEFAULT_QUBIT_CAP) -> StateVector:
    """Uniform superposition on counting+template, ancilla in |->."""
    nq = layout.num_qubits
    if nq > cap:
        raise CapExceededError(f"{nq} qubits exceed the cap of {cap}")
    amps = np.zeros(1 << nq, dtype=np.complex128)
    amps[0] = 1.0
    state = StateVector(num_qubits=nq, amps=amps)
    for q in list(layout.template) + list(layout.counting):
        _apply_h(state.amps, q)
    _apply_x(state.amps, layout.ancilla)
    _apply_h(state.amps, layout.ancilla)
    return state


def string_oracle(state: StateVector, layout: RegisterLayout, spec: StringOracleSpec,
                  control: int | None = None) -> StateVector:
    """Phase-flip template states matching the data on the unignored bits.

    X gates fold the classical data bits onto the template register,
    an X sandwich turns the matching pattern into all-ones, and a
    multi-controlled X kicks a phase back off the |-> ancilla.  Both
    layers are then uncomputed.  Only the MCX needs the extra control
    qubit: with the control off, the X layers cancel on their own.
    """
    n = len(layout.template)
    if spec.n != n:
        raise ValidationError(f"oracle is {spec.n} bits but template register is {n}")
    unignored = [layout.template[j] for j in range(spec.q_ignored, n)]
    data = spec.data_int
    fold = [layout.template[j] for j in range(spec.q_ignored, n) if (data >> j) & 1]
    controls = unignored if control is None else unignored + [control]
    for q in fold:
        _apply_x(state.amps, q)
    for q in unignored:
        _apply_x(state.amps, q)
    _apply_mcx(state.amps, state.num_qubits, controls, layout.ancilla)
    for q in unignored:
        _apply_x(state.amps, q)
    for q in fold:
        _apply_x(state.amps, q)
    return state


def diffusion(state: StateVector, layout: RegisterLayout,
              control: int | None = None) -> StateVector:
    """Reflect the template register about its uniform superposition."""
    n = len(layout.template)
    if layout.template.start != 0:
        raise ValidationError("template register must start at qubit 0")
    if control is None:
        v = state.amps.reshape(-1, 1 << n)
        mean = v.mean(axis=1, keepdims=True)
        v *= -1.0
        v += 2.0 * mean
    else:
        v = state.amps.reshape(-1, 2, 1 << (control - n), 1 << n)
        block = v[:, 1]
        mean = block.mean(axis=2, keepdims=True)
        block *= -1.0
        block += 2.0 * mean
    return state


def grover_iteration(state: StateVector, layout: RegisterLayout,
                     spec: StringOracleSpec, control: int | None = None) -> StateVector:
    """One Grover step: matching oracle, then diffusion."""
    string_oracle(state, layout, spec, control)
    diffusion(state, layout, control)
    return state


def controlled_grover_powers(state: StateVector, layout: RegisterLayout,
                             spec: StringOracleSpec) -> StateVector:
    """Ladder of controlled powers: counting qubit t drives 2**t iterations."""
    for t, q in enumerate(layout.counting):
        for _ in range(1 << t):
            grover_iteration(state, layout, spec, control=q)
    return state


def qft(state: StateVector, qubits: range | list[int]) -> StateVector:
    """Fourier transform on the register: |j> -> sum_l w^{jl} |l> / sqrt(D)."""
    qs = list(qubits)
    for i in reversed(range(len(qs))):
        _apply_h(state.amps, qs[i])
        for j in range(i):
            _apply_cphase(state.amps, qs[j], qs[i], math.pi / (1 << (i - j)))
    _reverse_register(state, qs)
    return state


def inverse_qft(state: StateVector, qubits: range | list[int]) -> StateVector:
    """Inverse Fourier transform, including the qubit-order reversal.

    After this block a computational-basis readout of the register is
    the phase-estimation integer b with qubit order already fixed.
    """
    qs = list(qubits)
    _reverse_register(state, qs)
    for i in range(len(qs)):
        for j in range(i):
            _apply_cphase(state.amps, qs[j], qs[i], -math.pi / (1 << (i - j)))
        _apply_h(state.amps, qs[i])
    return state


def _reverse_register(state: StateVector, qs: list[int]) -> None:
    for a in range(len(qs) // 2):
        b = len(qs) - 1 - a
        _swap(state.amps, state.num_qubits, qs[a], qs[b])


def _swap(amps: np.ndarray, num_qubits: int, a: int, b: int) -> None:
    # states with bit a set and bit b clear exchange with their mirror
    idx01 = _controlled_indices(num_qubits, [a])
    idx01 = idx01[(idx01 >> b) & 1 == 0]
    idx10 = idx01 - (1 << a) + (1 << b)
    tmp = amps[idx01].copy()
    amps[idx01] = amps[idx10]
    amps[idx10] = tmp


def marginal_probs(state: StateVector, qubits: range) -> np.ndarray:
    """Exact outcome distribution of a contiguous qubit range."""
    lo, hi = qubits.start, qubits.stop
    if not (0 <= lo < hi <= state.num_qubits):
        raise ValidationError(f"range {qubits} outside register")
    width = hi - lo
    p = np.abs(state.amps) ** 2
    return p.reshape(-1, 1 << width, 1 << lo).sum(axis=(0, 2))


def measure(state: StateVector, qubits: range, shots: int,
            rng: np.random.Generator) -> ShotResult:
    """Sample the exact marginal of the range with a multinomial draw."""
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    probs = marginal_probs(state, qubits)
    probs = probs / probs.sum()
    draws = rng.multinomial(shots, probs)
    width = len(qubits)
    counts = {
        format(outcome, f"0{width}b"): int(c)
        for outcome, c in enumerate(draws) if c > 0
    }
    return ShotResult(counts=counts, shots=shots)


# ---------------------------------------------------------------------------
# end-to-end circuits

def counting_state(n: int, q: int, data_bits: str, p: int,
                   cap: int = DEFAULT_QUBIT_CAP) -> tuple[StateVector, RegisterLayout]:
    """Run the full counting circuit and return the pre-measurement state."""
    if n + p + 1 > cap:
        raise CapExceededError(f"{n + p + 1} qubits exceed the cap of {cap}")
    spec = StringOracleSpec(data_bits=data_bits, q_ignored=q)
    if spec.n != n:
        raise ValidationError(f"data_bits has {spec.n} bits, expected {n}")
    layout = RegisterLayout.standard(n, p)
    state = init_state(layout, cap)
    controlled_grover_powers(state, layout, spec)
    inverse_qft(state, layout.counting)
    return state, layout


def run_counting_circuit(n: int, q: int, data_bits: str, p: int, shots: int,
                         rng: np.random.Generator,
                         cap: int = DEFAULT_QUBIT_CAP) -> ShotResult:
    """Counting circuit plus a measurement of the counting register."""
    state, layout = counting_state(n, q, data_bits, p, cap)
    return measure(state, layout.counting, shots, rng)


def search_state(n: int, q: int, data_bits: str, k: int,
                 cap: int = DEFAULT_QUBIT_CAP) -> tuple[StateVector, RegisterLayout]:
    """Run k plain Grover iterations and return the pre-measurement state."""
    if n + 1 > cap:
        raise CapExceededError(f"{n + 1} qubits exceed the cap of {cap}")
    if k < 0:
        raise ValidationError(f"iteration count k={k} must be >= 0")
    spec = StringOracleSpec(data_bits=data_bits, q_ignored=q)
    if spec.n != n:
        raise ValidationError(f"data_bits has {spec.n} bits, expected {n}")
    layout = RegisterLayout.standard(n, p=0)
    state = init_state(layout, cap)
    for _ in range(k):
        grover_iteration(state, layout, spec)
    return state, layout


def run_search_circuit(n: int, q: int, data_bits: str, k: int, shots: int,
                       rng: np.random.Generator,
                       cap: int = DEFAULT_QUBIT_CAP) -> ShotResult:
    """Search circuit plus a measurement of the template register."""
    state, layout = search_state(n, q, data_bits, k, cap)
    return measure(state, layout.template, shots, rng)
