"""Exact time evolution of small spin networks.

``A(t) = U(t)^dagger A U(t)`` with ``U(t) = exp(-i H t)`` is evaluated from a
single Hermitian eigendecomposition of ``H``. The commutator-norm series
works sector by sector whenever ``H``, ``A`` and ``B`` share a block
structure (e.g. fixed magnetisation for the XY chain), which keeps 10-12
site chains cheap.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bounds import BoundCurve
from .graph import SpinGraph, set_diameter
from .operators import (
    DenseOperator,
    LocalTerm,
    ZERO_RTOL,
    block_partition,
    hamiltonian_from_terms,
    is_hermitian,
    nested_commutator_norm,
    operator_norm,
    term_norm,
)

# slack used when deciding whether a bound holds at a grid point
VALIDITY_RTOL = 1e-9
VALIDITY_ATOL = 1e-12


class NumericError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class NetworkHamiltonian:
    """Sum of local Hermitian terms on ``n_sites`` spins.

    ``graph`` fixes the metric used for term diameters; by default it is the
    open chain ``1 - 2 - ... - n_sites``.
    """

    n_sites: int
    terms: tuple[LocalTerm, ...]
    site_dims: tuple[int, ...] = ()
    graph: SpinGraph | None = None

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("need at least two sites")
        if not self.terms:
            raise ValueError("Hamiltonian has no terms")
        dims = tuple(self.site_dims) or (2,) * self.n_sites
        if len(dims) != self.n_sites:
            raise ValueError("site_dims length must equal n_sites")
        for t in self.terms:
            if t.support[-1] > self.n_sites:
                raise ValueError(f"term support {t.support} outside 1..{self.n_sites}")
        g = self.graph or SpinGraph.path(self.n_sites)
        if g.vertex_count != self.n_sites:
            raise ValueError("graph size does not match n_sites")
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "graph", g)

    @cached_property
    def d_bar(self) -> float:
        return max(set_diameter(self.graph, t.support) for t in self.terms)

    @cached_property
    def h_norm(self) -> float:
        return max(term_norm(t) for t in self.terms)

    @cached_property
    def operator(self) -> DenseOperator:
        return hamiltonian_from_terms(self.terms, self.site_dims)

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.matrix

    @cached_property
    def norm(self) -> float:
        return operator_norm(self.operator)

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        try:
            return np.linalg.eigh(self.matrix)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"eigendecomposition failed: {exc}") from exc

    def is_nearest_neighbour_chain(self) -> bool:
        return all(t.support == (t.support[0], t.support[0] + 1) for t in self.terms)


def build_xy_chain(L: int, J: float = 1.0) -> NetworkHamiltonian:
    """Open XY chain ``J sum_i (X_i X_{i+1} + Y_i Y_{i+1})`` with ``L - 1`` bonds."""
    if L < 2:
        raise ValueError("XY chain needs L >= 2")
    if J == 0:
        raise ValueError("coupling J must be non-zero")
    xx_yy = (LocalTerm.from_paulis((1, 2), "xx").matrix.matrix
             + LocalTerm.from_paulis((1, 2), "yy").matrix.matrix)
    bond = DenseOperator(J * xx_yy, (2, 2), hermitian=True)
    terms = tuple(LocalTerm((i, i + 1), bond) for i in range(1, L))
    return NetworkHamiltonian(L, terms)


def _operator(H) -> DenseOperator:
    if isinstance(H, NetworkHamiltonian):
        return H.operator
    if isinstance(H, DenseOperator):
        return H
    return DenseOperator(H)


def evolve_observable(H, A, t: float) -> DenseOperator:
    """Heisenberg-picture ``A(t)``."""
    A = A if isinstance(A, DenseOperator) else DenseOperator(A)
    if not isinstance(H, NetworkHamiltonian):
        op = _operator(H)
        if op.dim != A.dim:
            raise ValueError("H and A act on different spaces")
        w, V = np.linalg.eigh(op.matrix)
    else:
        if H.operator.dim != A.dim:
            raise ValueError("H and A act on different spaces")
        w, V = H.eigensystem
    if t == 0:
        return A
    phase = np.exp(1j * w * t)
    at = V.conj().T @ A.matrix @ V
    at = phase[:, None] * at * phase.conj()[None, :]
    return DenseOperator(V @ at @ V.conj().T, A.site_dims, A.hermitian)


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-D and of equal length")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.times)


class _SectorEvolver:
    """``||[A(t), B]||`` from per-block eigendecompositions.

    When ``2 s |t| <= SERIES_RADIUS`` (``s`` half the block's eigenvalue
    spread) the block is summed as the commutator series
    ``sum_k (it)^k/k! [[H,A]_k, B]`` instead. The spectral route loses all
    relative accuracy once the result drops below ~1e-15, which happens
    near ``t = 0`` whenever ``A`` and ``B`` are far apart.
    """

    SERIES_RADIUS = 4.0
    MAX_ORDER = 200

    def __init__(self, H: DenseOperator, A: DenseOperator, B: DenseOperator):
        if not H.dim == A.dim == B.dim:
            raise ValueError("H, A and B must act on the same space")
        h, a, b = H.matrix, A.matrix, B.matrix
        self.hermitian = is_hermitian(a) and is_hermitian(b)
        self.norm_ab = operator_norm(A) * operator_norm(B)
        self.blocks = []
        for idx in block_partition(h, a, b):
            sub = np.ix_(idx, idx)
            hb = h[sub]
            try:
                w, V = np.linalg.eigh(hb)
            except np.linalg.LinAlgError as exc:
                raise NumericError(f"eigendecomposition failed on a {len(idx)}-state block") from exc
            Vh = V.conj().T
            # commutators only see H up to a shift, so use the half spread
            spread = 0.5 * float(w[-1] - w[0])
            self.blocks.append((w, Vh @ a[sub] @ V, Vh @ b[sub] @ V, hb, a[sub], b[sub], spread))

    def _norm(self, c: np.ndarray) -> float:
        if c.size == 0:
            return 0.0
        if self.hermitian:
            # [A(t), B] is anti-Hermitian here
            return float(np.max(np.abs(np.linalg.eigvalsh(1j * c))))
        return float(np.linalg.norm(c, 2))

    def _series(self, t: float, hb, a0, b0, spread: float) -> np.ndarray:
        x = 2 * spread * abs(t)
        total = a0 @ b0 - b0 @ a0
        total = total.astype(np.result_type(total, 1j))
        term = a0
        coeff = 1.0 + 0j
        # ||[[H,A]_k, B]|| <= 2 ||A|| ||B|| (2 spread)^k bounds every order
        tail = 2 * self.norm_ab * math.exp(x) * x
        for k in range(1, self.MAX_ORDER + 1):
            term = hb @ term - term @ hb
            coeff *= 1j * t / k
            total += coeff * (term @ b0 - b0 @ term)
            tail *= x / (k + 1)
            if tail <= 1e-17 * np.max(np.abs(total)) or tail < 1e-300:
                break
        return total

    def norm_at(self, t: float) -> float:
        best = 0.0
        for w, at, bt, hb, a0, b0, spread in self.blocks:
            if t == 0:
                c = a0 @ b0 - b0 @ a0
            elif 2 * spread * abs(t) <= self.SERIES_RADIUS:
                c = self._series(t, hb, a0, b0, spread)
            else:
                p = np.exp(1j * w * t)
                x = p[:, None] * at * p.conj()[None, :]
                c = x @ bt - bt @ x
            best = max(best, self._norm(c))
        return best


def commutator_norm_series(H, A, B, times: Sequence[float]) -> TimeSeries:
    """``||[A(t), B]||`` on a strictly increasing grid of non-negative times."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("need a non-empty 1-D time grid")
    if np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValueError("times must be non-negative and strictly increasing")
    A = A if isinstance(A, DenseOperator) else DenseOperator(A)
    B = B if isinstance(B, DenseOperator) else DenseOperator(B)
    ev = _SectorEvolver(_operator(H), A, B)
    values = np.empty_like(t)
    for k, tk in enumerate(t):
        v = ev.norm_at(float(tk))
        if not math.isfinite(v):
            raise NumericError(f"non-finite commutator norm at t = {tk!r}")
        values[k] = v
    return TimeSeries(t, values)


def default_time_grid(d: int, h_norm: float, n_points: int = 400) -> np.ndarray:
    """Uniform grid on ``[0, 5 d / (2 e ||h||)]``."""
    return np.linspace(0.0, 5.0 * d / (2 * math.e * h_norm), n_points)


def leading_order_check(H: NetworkHamiltonian, A, B, d: int, times: Sequence[float]) -> list[float]:
    """Ratio of ``||[A(t), B]||`` to its leading term ``t^d/d! ||[[H,A]_d, B]||``."""
    t = np.asarray(times, dtype=float)
    if np.any(2 * np.abs(t) * H.h_norm * d >= 0.1):
        raise ValueError("leading-order check needs 2 |t| ||h|| d < 0.1")
    A = A if isinstance(A, DenseOperator) else DenseOperator(A)
    B = B if isinstance(B, DenseOperator) else DenseOperator(B)
    Hop = H.operator
    blocks = block_partition(Hop, A, B)
    base = operator_norm(A) * operator_norm(B)
    coeff = nested_commutator_norm(Hop, A, B, d, blocks)
    if coeff < ZERO_RTOL * base * (2 * H.h_norm) ** d:
        raise ValueError(f"[[H,A]_{d}, B] vanishes; order {d} is not the first contributing one")
    for k in range(d):
        if nested_commutator_norm(Hop, A, B, k, blocks) >= ZERO_RTOL * base * (2 * H.h_norm) ** k:
            warnings.warn(f"order {k} < d = {d} already contributes", RuntimeWarning, stacklevel=2)
            break
    ev = _SectorEvolver(Hop, A, B)
    return [ev.norm_at(float(tk)) / (abs(tk) ** d / math.factorial(d) * coeff) for tk in t]


def _holds(curve: BoundCurve, values: np.ndarray, sim: np.ndarray) -> np.ndarray:
    if curve.is_lower:
        return values <= sim * (1 + VALIDITY_RTOL) + VALIDITY_ATOL
    return values >= sim * (1 - VALIDITY_RTOL) - VALIDITY_ATOL


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    runs = []
    start = None
    for i, ok in enumerate(mask):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def validity_windows(sim: TimeSeries, curves: Sequence[BoundCurve]) -> dict[str, list[tuple[int, int]]]:
    """Maximal index ranges (inclusive) on which each curve bounds ``sim``.

    Upper bounds must sit above the simulation and lower bounds below it,
    up to a ``1e-9`` relative and ``1e-12`` absolute slack.
    """
    if len(sim) == 0:
        raise ValueError("empty time grid")
    out = {}
    for curve in curves:
        vals = curve(sim.times)
        out[curve.kind.value] = _runs(_holds(curve, vals, sim.values))
    return out


def windows_as_times(sim: TimeSeries, windows: dict[str, list[tuple[int, int]]]) -> dict[str, list[list[float]]]:
    return {name: [[float(sim.times[i]), float(sim.times[j])] for i, j in runs]
            for name, runs in windows.items()}
