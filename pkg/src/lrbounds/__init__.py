"""Lieb-Robinson bounds for finite-range spin networks with exact chain checks."""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    BoundCurve,
    BoundInputs,
    BoundKind,
    TrivialRegimeError,
    build_curves,
    correction_factor,
    z_opt,
)
from .counting import CountingProblem, count_bound, count_exact, is_admissible  # noqa: E402
from .dynamics import NetworkHamiltonian, build_xy_chain, commutator_norm_series  # noqa: E402
from .graph import SpinGraph  # noqa: E402
from .operators import DenseOperator, LocalTerm, gamma_d  # noqa: E402

__all__ = [
    "BoundCurve", "BoundInputs", "BoundKind", "CountingProblem", "DenseOperator", "LocalTerm",
    "NetworkHamiltonian", "SpinGraph", "TrivialRegimeError", "build_curves", "build_xy_chain",
    "commutator_norm_series", "correction_factor", "count_bound", "count_exact", "gamma_d",
    "is_admissible", "z_opt",
]
