"""Dense operator algebra on tensor products of local spin spaces.

Sites are numbered from 1, and site 1 is the leftmost kron factor. Operators
are plain numpy arrays wrapped in :class:`DenseOperator`, which records the
local dimensions so terms can be embedded into the full space.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

# "numerically zero" threshold, relative to the largest input norm
ZERO_RTOL = 1e-12
HERMITIAN_RTOL = 1e-12

#: sqrt(2*pi/e^2), the ceiling on Gamma_d
GAMMA_CEILING = math.sqrt(2 * math.pi / math.e**2)

PAULI = {
    "i": np.eye(2),
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


def _clean(matrix) -> np.ndarray:
    m = np.asarray(matrix)
    if np.iscomplexobj(m):
        if not np.any(m.imag):
            m = m.real
        else:
            return np.array(m, dtype=np.complex128)
    return np.array(m, dtype=np.float64)


def _scale(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def is_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    return _scale(m - m.conj().T) <= rtol * max(_scale(m), 1.0)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Square matrix on ``prod(site_dims)``-dimensional space.

    Passing ``hermitian=True`` is checked against the entries; the flag then
    lets :func:`operator_norm` use the Hermitian eigensolver.
    """

    matrix: np.ndarray
    site_dims: tuple[int, ...] = ()
    hermitian: bool = False

    def __post_init__(self):
        m = _clean(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
        dims = tuple(int(d) for d in self.site_dims)
        if not dims:
            dims = (m.shape[0],)
        if math.prod(dims) != m.shape[0]:
            raise ValueError(f"site_dims {dims} do not multiply to matrix side {m.shape[0]}")
        if self.hermitian and not is_hermitian(m):
            raise ValueError("operator flagged Hermitian but max |M - M^dagger| exceeds tolerance")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "site_dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    @classmethod
    def identity(cls, site_dims: Sequence[int]) -> DenseOperator:
        return cls(np.eye(math.prod(site_dims)), tuple(site_dims), hermitian=True)

    def __add__(self, other: DenseOperator) -> DenseOperator:
        _check_same_space(self, other)
        return DenseOperator(self.matrix + other.matrix, self.site_dims,
                             self.hermitian and other.hermitian)

    def __sub__(self, other: DenseOperator) -> DenseOperator:
        _check_same_space(self, other)
        return DenseOperator(self.matrix - other.matrix, self.site_dims,
                             self.hermitian and other.hermitian)

    def __mul__(self, c) -> DenseOperator:
        herm = self.hermitian and np.isreal(c)
        return DenseOperator(c * self.matrix, self.site_dims, bool(herm))

    __rmul__ = __mul__

    def dagger(self) -> DenseOperator:
        return DenseOperator(self.matrix.conj().T, self.site_dims, self.hermitian)


def _as_operator(op) -> DenseOperator:
    if isinstance(op, DenseOperator):
        return op
    return DenseOperator(op)


def _check_same_space(a: DenseOperator, b: DenseOperator) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


@dataclass(frozen=True, eq=False)
class LocalTerm:
    """Hermitian operator acting on the sites in ``support`` only."""

    support: tuple[int, ...]
    matrix: DenseOperator

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        if not support:
            raise ValueError("support must be non-empty")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise ValueError(f"support {support} must be strictly increasing")
        if support[0] < 1:
            raise ValueError("sites are numbered from 1")
        op = self.matrix
        if not isinstance(op, DenseOperator):
            m = _clean(op)
            # assume qubits unless the side says otherwise
            dims = (2,) * len(support) if m.shape[0] == 2 ** len(support) else (m.shape[0],)
            op = DenseOperator(m, dims)
        if op.n_sites != len(support):
            if op.dim == 2 ** len(support):
                op = DenseOperator(op.matrix, (2,) * len(support), op.hermitian)
            else:
                raise ValueError(f"term on {len(support)} sites carries site_dims {op.site_dims}")
        if not is_hermitian(op.matrix):
            raise ValueError(f"local term on {support} is not Hermitian")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "matrix", DenseOperator(op.matrix, op.site_dims, hermitian=True))

    @classmethod
    def from_paulis(cls, support: Sequence[int], labels: str, coeff: float = 1.0) -> LocalTerm:
        """``coeff`` times the tensor product of Pauli matrices named in ``labels``."""
        if len(labels) != len(support):
            raise ValueError("need one Pauli label per supported site")
        m = np.eye(1)
        for ch in labels.lower():
            m = np.kron(m, PAULI[ch])
        return cls(tuple(support), DenseOperator(coeff * m, (2,) * len(support)))


def embed(term: LocalTerm, n_sites: int, site_dims: Sequence[int] | None = None) -> DenseOperator:
    """Full-space operator equal to ``term`` on its support and identity elsewhere."""
    dims = tuple(site_dims) if site_dims is not None else (2,) * n_sites
    if len(dims) != n_sites:
        raise ValueError(f"got {len(dims)} site dimensions for {n_sites} sites")
    if term.support[-1] > n_sites:
        raise ValueError(f"support {term.support} exceeds the {n_sites}-site system")
    sup = [s - 1 for s in term.support]
    sup_dims = tuple(dims[s] for s in sup)
    if sup_dims != term.matrix.site_dims:
        raise ValueError(f"term dims {term.matrix.site_dims} do not match sites {sup_dims}")

    rest = [s for s in range(n_sites) if s not in sup]
    rest_dim = math.prod(dims[s] for s in rest)
    full = np.kron(term.matrix.matrix, np.eye(rest_dim))
    # full currently has its kron factors ordered as (support..., rest...)
    order = sup + rest
    k = n_sites
    t = full.reshape([dims[s] for s in order] * 2)
    perm = [order.index(s) for s in range(n_sites)]
    t = t.transpose(perm + [k + p for p in perm])
    side = math.prod(dims)
    return DenseOperator(t.reshape(side, side), dims, hermitian=True)


def local_operator(op, site: int, n_sites: int, site_dims: Sequence[int] | None = None) -> DenseOperator:
    """Single-site operator ``op`` placed on ``site``."""
    return embed(LocalTerm((site,), op), n_sites, site_dims)


def operator_norm(op) -> float:
    """Spectral norm (largest singular value)."""
    op = _as_operator(op)
    m = op.matrix
    if not np.all(np.isfinite(m)):
        raise ValueError("operator has non-finite entries")
    if m.size == 0:
        return 0.0
    if op.hermitian:
        return float(np.max(np.abs(np.linalg.eigvalsh(m))))
    return float(np.linalg.norm(m, 2))


def commutator(a, b) -> DenseOperator:
    a = _as_operator(a)
    b = _as_operator(b)
    _check_same_space(a, b)
    return DenseOperator(a.matrix @ b.matrix - b.matrix @ a.matrix, a.site_dims)


def nested_commutator_full(H, A, k: int) -> DenseOperator:
    """``[H, [H, ... [H, A]]]`` with ``k`` copies of ``H``; ``k = 0`` gives ``A``."""
    if k < 0:
        raise ValueError("nesting order k must be non-negative")
    H = _as_operator(H)
    A = _as_operator(A)
    _check_same_space(H, A)
    h = H.matrix
    x = A.matrix
    for _ in range(k):
        x = h @ x - x @ h
    return DenseOperator(x, A.site_dims)


def embed_terms(terms: Sequence, site_dims: tuple[int, ...]) -> list[DenseOperator]:
    out = []
    for t in terms:
        if isinstance(t, LocalTerm):
            out.append(embed(t, len(site_dims), site_dims))
        else:
            out.append(_as_operator(t))
    return out


def nested_commutator_indexed(terms: Sequence, seq: Sequence[int], A) -> DenseOperator:
    """Commutator chain ``[h_{i_k}, ... [h_{i_2}, [h_{i_1}, A]]]``.

    ``terms`` are the local pieces ``h_1, h_2, ...`` (1-based in ``seq``),
    given either as :class:`LocalTerm` or already embedded.
    """
    A = _as_operator(A)
    seq = tuple(seq)
    if not seq:
        raise ValueError("index sequence must be non-empty")
    for i in seq:
        if not 1 <= i <= len(terms):
            raise ValueError(f"term index {i} outside 1..{len(terms)}")
    full = embed_terms(terms, A.site_dims)
    x = A.matrix
    for i in seq:
        h = full[i - 1].matrix
        x = h @ x - x @ h
    return DenseOperator(x, A.site_dims)


def hamiltonian_from_terms(terms: Sequence, site_dims: Sequence[int]) -> DenseOperator:
    dims = tuple(site_dims)
    total = None
    # embed one term at a time; at 12 sites each embedded copy is ~130 MB
    for t in terms:
        m = embed_terms([t], dims)[0].matrix
        total = m.copy() if total is None else total + m
    if total is None:
        raise ValueError("need at least one term")
    return DenseOperator(total, dims, hermitian=True)


def term_norm(term) -> float:
    if isinstance(term, LocalTerm):
        return operator_norm(term.matrix)
    term = _as_operator(term)
    return operator_norm(DenseOperator(term.matrix, term.site_dims, hermitian=is_hermitian(term.matrix)))


def is_numerically_zero(op, scale: float = 1.0, rtol: float = ZERO_RTOL) -> bool:
    m = op.matrix if isinstance(op, DenseOperator) else np.asarray(op)
    return _scale(m) < rtol * scale


# -- block structure -------------------------------------------------------
#
# If the joint sparsity pattern of H, A, B splits the basis into disconnected
# groups, every nested commutator and every A(t) is block diagonal on those
# groups. Norms then reduce to a max over blocks.

def block_partition(*ops) -> list[np.ndarray]:
    """Basis index groups left invariant by all of ``ops`` (exact zero pattern)."""
    mats = [o.matrix if isinstance(o, DenseOperator) else np.asarray(o) for o in ops]
    pattern = np.zeros(mats[0].shape, dtype=bool)
    for m in mats:
        pattern |= m != 0
    pattern |= pattern.T
    n, labels = connected_components(csr_matrix(pattern), directed=False)
    return [np.flatnonzero(labels == c) for c in range(n)]


def _block_norm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def nested_commutator_norm(H, A, B, k: int, blocks: list[np.ndarray] | None = None) -> float:
    """``||[[H, A]_k, B]||`` evaluated block by block."""
    if k < 0:
        raise ValueError("nesting order k must be non-negative")
    h, a, b = (_as_operator(o).matrix for o in (H, A, B))
    if blocks is None:
        blocks = block_partition(h, a, b)
    best = 0.0
    for idx in blocks:
        sub = np.ix_(idx, idx)
        hb, x, bb = h[sub], a[sub], b[sub]
        for _ in range(k):
            x = hb @ x - x @ hb
        best = max(best, _block_norm(x @ bb - bb @ x))
    return best


def gamma_d(terms: Sequence, A, B, d: int) -> float:
    """Dimensionless strength of the first contributing order ``d``.

    ``sqrt(pi/(2e^2)) * ||[[H,A]_d, B]|| / (||A|| ||B|| (2||h||)^d)`` with
    ``||h||`` the largest local term norm. Returns 0 with a warning when the
    order-``d`` commutator vanishes; see :func:`smallest_nonzero_order`.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    A = _as_operator(A)
    B = _as_operator(B)
    h_norm = max(term_norm(t) for t in terms)
    norm_a, norm_b = operator_norm(A), operator_norm(B)
    if min(h_norm, norm_a, norm_b) == 0.0:
        raise ValueError("gamma_d needs non-zero ||A||, ||B|| and ||h||")
    H = hamiltonian_from_terms(terms, A.site_dims)
    top = nested_commutator_norm(H, A, B, d)
    scale = norm_a * norm_b * (2 * h_norm) ** d
    if top < ZERO_RTOL * scale:
        warnings.warn(f"[[H,A]_{d}, B] vanishes; gamma_d reported as 0", RuntimeWarning, stacklevel=2)
        return 0.0
    return math.sqrt(math.pi / (2 * math.e**2)) * top / scale


def smallest_nonzero_order(H, A, B, start: int = 1, k_max: int = 64) -> int | None:
    """First ``k >= start`` with ``[[H,A]_k, B] != 0``, or None up to ``k_max``."""
    h, a, b = (_as_operator(o) for o in (H, A, B))
    blocks = block_partition(h, a, b)
    h_norm = operator_norm(DenseOperator(h.matrix, h.site_dims, hermitian=is_hermitian(h.matrix)))
    base = operator_norm(a) * operator_norm(b)
    for k in range(start, k_max + 1):
        scale = base * max(2 * h_norm, 1e-300) ** k
        if nested_commutator_norm(h, a, b, k, blocks) >= ZERO_RTOL * scale:
            return k
    return None
