"""Grover-accelerated matched filtering toolkit.

Subpackages cover the classical matched-filter engine (:mod:`qmf.dsp`),
synthetic chirp template banks (:mod:`qmf.bank`), the closed-form
amplitude-amplification / quantum-counting model (:mod:`qmf.amplify`),
an exact state-vector circuit simulator (:mod:`qmf.qsim`), the
detection/retrieval orchestration and query-cost benchmarks
(:mod:`qmf.pipeline`), and a continuous-wave search cost estimator
(:mod:`qmf.cw`).
"""

__version__ = "0.1.0"

from .errors import CapExceededError, InputError, ValidationError

__all__ = ["CapExceededError", "InputError", "ValidationError", "__version__"]
