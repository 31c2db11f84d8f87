"""Scalar Lieb-Robinson bound formulas.

Every evaluator depends on time only through ``|t|`` and broadcasts over
numpy arrays of times. Units: hbar = 1, times in inverse energy.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np

from .graph import SpinGraph, max_local_dim, set_diameter
from .operators import DenseOperator, LocalTerm, operator_norm


class TrivialRegimeError(ValueError):
    """Raised when ``|t|`` is past ``dist / (2 zeta Dbar)``.

    There the exponential form never beats the trivial bound ``2||A|| ||B||``.
    """


@dataclass(frozen=True)
class BoundInputs:
    dist: float
    d_bar: float
    zeta: float
    h_norm: float
    size_a: int = 1
    size_b: int = 1
    norm_a: float = 1.0
    norm_b: float = 1.0
    gamma_d: float | None = None
    # |A||B| can be dropped for one-dimensional models
    support_prefactor: bool = True

    def __post_init__(self):
        for name in ("dist", "d_bar", "zeta", "h_norm", "size_a", "size_b", "norm_a", "norm_b"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a finite positive number, got {v!r}")
        if self.gamma_d is not None and not 0 <= self.gamma_d:
            raise ValueError("gamma_d must be non-negative")

    @property
    def x(self) -> float:
        return self.dist / self.d_bar

    @property
    def prefactor(self) -> float:
        sizes = self.size_a * self.size_b if self.support_prefactor else 1
        return 2.0 * sizes * self.norm_a * self.norm_b


# -- interaction functionals ------------------------------------------------

def _terms_of(H) -> list[LocalTerm]:
    return list(H.terms) if hasattr(H, "terms") else list(H)


def h_lambda_norm(H, g: SpinGraph, lam: float) -> float:
    """``sup_x sum_{X containing x} |X| M_X^(2|X|) e^(lam D(X)) ||H_X||``.

    Terms sharing a support are summed first, so ``H_X`` is the full
    interaction on ``X``.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    by_support: dict[tuple[int, ...], np.ndarray] = {}
    for term in _terms_of(H):
        m = term.matrix.matrix
        if term.support in by_support:
            by_support[term.support] = by_support[term.support] + m
        else:
            by_support[term.support] = m
    per_site = dict.fromkeys(g.vertices, 0.0)
    for support, m in by_support.items():
        size = len(support)
        weight = (size * max_local_dim(g, support) ** (2 * size)
                  * math.exp(lam * set_diameter(g, support)) * operator_norm(DenseOperator(m, hermitian=True)))
        for x in support:
            per_site[x] += weight
    return max(per_site.values())


def zeta_first_neighbour(C: int, M: int, h_norm: float) -> float:
    """``2 C M^4 ||h||`` for nearest-neighbour couplings."""
    if C < 1 or M < 2 or not h_norm > 0:
        raise ValueError("need C >= 1, M >= 2 and h_norm > 0")
    return 2.0 * C * M**4 * h_norm


def zeta_cap(C: int, M: int, h_norm: float, d_bar: int) -> float:
    """``C^Dbar M^(C^Dbar) ||h||``, the general ceiling quoted for finite-C graphs."""
    reach = C**d_bar
    return float(reach * M**reach * h_norm)


# -- original and lambda-optimised bounds -------------------------------------

def lr_original(t, lam: float, inp: BoundInputs, h_lambda: float):
    """``2|A||B| ||A|| ||B|| (e^(2|t| h_lambda) - 1) e^(-lam dist)``."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    with np.errstate(over="ignore"):
        return inp.prefactor * np.expm1(2 * np.abs(t) * h_lambda) * np.exp(-lam * inp.dist)


def lr_surrogate(t, lam: float, inp: BoundInputs):
    """:func:`lr_original` with ``||H||_lam`` replaced by ``zeta e^(lam Dbar)``."""
    return lr_original(t, lam, inp, inp.zeta * math.exp(lam * inp.d_bar))


def lr_exponent_form(t, lam: float, inp: BoundInputs):
    """Looser single-exponential form ``e^(2|t| zeta e^(lam Dbar) - lam dist)``."""
    with np.errstate(over="ignore"):
        return inp.prefactor * np.exp(2 * np.abs(t) * inp.zeta * math.exp(lam * inp.d_bar)
                                      - lam * inp.dist)


def lambda_opt(t: float, inp: BoundInputs) -> float:
    """Stationary point of the single-exponential form."""
    t = abs(t)
    if t == 0:
        raise ZeroDivisionError("lambda_opt diverges at t = 0")
    threshold = inp.dist / (2 * inp.zeta * inp.d_bar)
    if t > threshold:
        raise TrivialRegimeError(f"|t| = {t} exceeds {threshold}; only the trivial bound is informative")
    return math.log(threshold / t) / inp.d_bar


def _w_equation(w: float) -> float:
    # x as a function of w = -ln(1 - z):  x = w / z,  z = 1 - e^-w
    if w == 0.0:
        return 1.0
    return w / -math.expm1(-w)


def _w_opt(x: float) -> float:
    if not x >= 1 or not math.isfinite(x):
        raise ValueError(f"x = {x} must be a finite number >= 1")
    if x == 1.0:
        return 0.0
    # x - 1 <= w <= x on the root
    lo, hi = max(x - 1.0, 0.0), x
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _w_equation(mid) < x:
            lo = mid
        else:
            hi = mid
    return lo if abs(_w_equation(lo) - x) <= abs(_w_equation(hi) - x) else hi


def z_opt(x: float) -> float:
    """Root in (0, 1) of ``-ln(1 - z) / z = x``; ``0`` at ``x = 1``.

    Solved by bisection on ``w = -ln(1 - z)``. For ``x`` beyond ~37 the root
    is within an ulp of 1 and comes back as ``1.0``.
    """
    return -math.expm1(-_w_opt(x))


def z_opt_residual(x: float) -> float:
    """``|-ln(1 - z)/z - x|`` at the computed root (evaluated in ``w``)."""
    return abs(_w_equation(_w_opt(x)) - x)


def _log_correction(x: float) -> float:
    w = _w_opt(x)
    if w == 0.0:
        return -1.0
    u = math.exp(-w)  # 1 - z
    log_z = math.log1p(-u) if u < 0.5 else math.log(-math.expm1(-w))
    # on the root x z = w, so w - x = -x (1 - z); avoids cancelling two O(x) numbers
    return -x * u + (1.0 - x) * log_z


def correction_factor(x: float) -> float:
    """``z/(1-z) * (1/(e z))^x`` at ``z = z_opt(x)``; increases from 1/e to 1."""
    return math.exp(_log_correction(x))


def correction_deficit(x: float) -> float:
    """``1 - F(x)``, accurate where ``F`` itself rounds to 1."""
    return -math.expm1(_log_correction(x))


def poly_bound_plain(t, inp: BoundInputs):
    """``2|A||B| ||A|| ||B|| (2 e zeta Dbar |t| / dist)^(dist/Dbar)``."""
    x = inp.x
    if x < 1:
        raise ValueError(f"dist/d_bar = {x} < 1")
    base = 2 * math.e * inp.zeta * inp.d_bar * np.abs(t) / inp.dist
    with np.errstate(over="ignore"):
        return inp.prefactor * base**x


def poly_bound_with_F(t, inp: BoundInputs):
    return poly_bound_plain(t, inp) * correction_factor(inp.x)


def t_star(R_star: float, inp: BoundInputs) -> float:
    """Earliest time at which the ratio to ``2|A||B| ||A|| ||B||`` can reach ``R_star``."""
    if not 0 < R_star < 1:
        raise ValueError("R_star must lie in (0, 1)")
    return inp.dist * R_star ** (inp.d_bar / inp.dist) / v_max(inp)


def v_max(inp: BoundInputs) -> float:
    return 2 * math.e * inp.zeta * inp.d_bar


def trivial_bound(norm_a: float = 1.0, norm_b: float = 1.0) -> float:
    return 2.0 * norm_a * norm_b


# -- perturbative chain bounds ---------------------------------------------

def _check_order(d: int) -> None:
    if d < 1 or int(d) != d:
        raise ValueError(f"order d must be an integer >= 1, got {d!r}")


def _poly_core(t, d: int, strength: float, norm_a: float, norm_b: float):
    _check_order(d)
    return (2 * norm_a * norm_b / math.sqrt(2 * math.pi * d)
            * (2 * math.e * strength * np.abs(t) / d) ** d)


def pert_upper(t, d: int, h_norm: float, norm_a: float = 1.0, norm_b: float = 1.0):
    """Path-counting upper bound; independent of the chain length."""
    with np.errstate(over="ignore"):
        return _poly_core(t, d, h_norm, norm_a, norm_b) * np.exp(2 * np.abs(t) * h_norm * d)


def pert_upper_naive(t, d: int, H_norm: float, norm_a: float = 1.0, norm_b: float = 1.0):
    """Leading-order estimate using the full ``||H||``. Small-t heuristic only."""
    return _poly_core(t, d, H_norm, norm_a, norm_b)


def pert_lower(t, d: int, h_norm: float, norm_a: float, norm_b: float, gamma_d: float):
    """Lower bound; negative values carry no information and are left unclamped."""
    with np.errstate(over="ignore"):
        return (_poly_core(t, d, h_norm, norm_a, norm_b)
                * (gamma_d - np.expm1(2 * np.abs(t) * h_norm * d)))


def pert_lower_simplified(t, d: int, h_norm: float, norm_a: float, norm_b: float, gamma_d: float):
    """Short-time ``t^d`` growth of :func:`pert_lower`, dropping the correction."""
    return _poly_core(t, d, h_norm, norm_a, norm_b) * gamma_d


def lower_bound_horizon(d: int, h_norm: float, gamma_d: float) -> float:
    """Time at which :func:`pert_lower` turns non-positive: ``ln(1+Gamma)/(2||h||d)``."""
    _check_order(d)
    return math.log1p(gamma_d) / (2 * h_norm * d)


def stirling_bounds(d: int) -> tuple[float, float]:
    """``(d/e)^d sqrt(2 pi d) <= d! <= (d/e)^d sqrt(e^2 d)``."""
    base = (d / math.e) ** d
    return base * math.sqrt(2 * math.pi * d), base * math.sqrt(math.e**2 * d)


# -- curves ----------------------------------------------------------------

class BoundKind(str, enum.Enum):
    ORIGINAL_LAMBDA = "original_lambda"
    TRIVIAL = "trivial"
    POLY_WITH_F = "poly_with_F"
    POLY_PLAIN = "poly_plain"
    PERT_UPPER = "pert_upper"
    PERT_UPPER_NAIVE = "pert_upper_naive"
    PERT_LOWER = "pert_lower"
    PERT_LOWER_SIMPLIFIED = "pert_lower_simplified"

    @property
    def is_lower(self) -> bool:
        return self in (BoundKind.PERT_LOWER, BoundKind.PERT_LOWER_SIMPLIFIED)


@dataclass(frozen=True)
class BoundCurve:
    kind: BoundKind
    evaluator: Callable[[np.ndarray], np.ndarray]

    @property
    def is_lower(self) -> bool:
        return self.kind.is_lower

    def __call__(self, t):
        return np.asarray(self.evaluator(np.asarray(t, dtype=float)), dtype=float)


def build_curves(kinds: Iterable[BoundKind | str], inp: BoundInputs, *, d: int,
                 H_norm: float | None = None, lam: float = 0.0,
                 h_lambda: float | None = None) -> list[BoundCurve]:
    """Bound curves for a fixed configuration.

    ``d`` is the integer order used by the perturbative bounds, ``H_norm``
    the full Hamiltonian norm (naive bound only) and ``h_lambda`` the value
    of ``||H||_lam`` for the original bound (defaults to ``zeta e^(lam Dbar)``).
    """
    if h_lambda is None:
        h_lambda = inp.zeta * math.exp(lam * inp.d_bar)
    gamma = inp.gamma_d if inp.gamma_d is not None else 0.0
    na, nb, h = inp.norm_a, inp.norm_b, inp.h_norm
    makers = {
        BoundKind.ORIGINAL_LAMBDA: lambda t: lr_original(t, lam, inp, h_lambda),
        BoundKind.TRIVIAL: lambda t: np.full_like(t, trivial_bound(na, nb)),
        BoundKind.POLY_WITH_F: lambda t: poly_bound_with_F(t, inp),
        BoundKind.POLY_PLAIN: lambda t: poly_bound_plain(t, inp),
        BoundKind.PERT_UPPER: lambda t: pert_upper(t, d, h, na, nb),
        BoundKind.PERT_LOWER: lambda t: pert_lower(t, d, h, na, nb, gamma),
        BoundKind.PERT_LOWER_SIMPLIFIED: lambda t: pert_lower_simplified(t, d, h, na, nb, gamma),
    }
    if H_norm is not None:
        makers[BoundKind.PERT_UPPER_NAIVE] = lambda t: pert_upper_naive(t, d, H_norm, na, nb)
    curves = []
    for k in kinds:
        kind = BoundKind(k)
        if kind not in makers:
            raise ValueError(f"curve {kind.value} needs H_norm")
        curves.append(BoundCurve(kind, makers[kind]))
    return curves
