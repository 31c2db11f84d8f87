"""Counting index sequences whose nested commutators can reach ``B``.

On a chain with ``A`` on site 1 and ``B`` on site ``d + 1``, the chain of
commutators ``[h_{i_k}, ... [h_{i_1}, A]]`` can be non-zero against ``B`` only
if the sequence starts at bond 1, never jumps more than one bond past the
furthest bond reached so far, and eventually touches every bond up to ``d``.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .operators import (
    DenseOperator,
    ZERO_RTOL,
    embed_terms,
    operator_norm,
    term_norm,
)

DEFAULT_CAP = 10**7


class BudgetExceeded(RuntimeError):
    """Enumeration would visit more nodes than allowed; ``bound`` is the fallback."""

    def __init__(self, message: str, bound: int):
        super().__init__(message)
        self.bound = bound


@dataclass(frozen=True)
class CountingProblem:
    d: int
    k: int
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.k < self.d:
            raise ValueError("k must be >= d")
        if self.cap <= 0:
            raise ValueError("cap must be positive")


def grows_by_at_most_one(seq: Sequence[int]) -> bool:
    """Starts at 1 and never exceeds the running maximum by more than one."""
    if not seq or seq[0] != 1:
        return False
    top = 1
    for i in seq[1:]:
        if i > top + 1:
            return False
        top = max(top, i)
    return True


def first_appearances_ordered(seq: Sequence[int], d: int) -> bool:
    """Each of ``1..d`` appears, and ``i`` first appears after ``i - 1`` does."""
    first = {}
    for pos, i in enumerate(seq):
        first.setdefault(i, pos)
    if any(i not in first for i in range(1, d + 1)):
        return False
    return all(first[i - 1] < first[i] for i in range(2, d + 1))


def is_admissible(seq: Sequence[int], d: int, alphabet: int | None = None) -> bool:
    """Whether ``[C^(k)_seq(A), B]`` is allowed to be non-zero.

    ``alphabet`` widens the allowed bond indices beyond ``d`` for chains that
    extend past ``B``.
    """
    top = alphabet if alphabet is not None else d
    seq = tuple(seq)
    if any(not 1 <= i <= top for i in seq):
        return False
    if not grows_by_at_most_one(seq):
        return False
    covers = max(seq) >= d
    if covers:
        assert first_appearances_ordered(seq, d), seq
    return covers


def count_bound(k: int, d: int) -> int:
    """``C(k, d) d^(k - d)``, exact."""
    if d < 1 or k < d:
        raise ValueError("need k >= d >= 1")
    return math.comb(k, d) * d ** (k - d)


def count_exact(p: CountingProblem) -> int:
    """Number of admissible sequences of length ``k``, by pruned depth-first search."""
    bound = count_bound(p.k, p.d)
    d, k = p.d, p.k
    visited = 0
    count = 0
    # stack of (length so far, running max)
    stack = [(1, 1)]
    while stack:
        length, top = stack.pop()
        visited += 1
        if visited > p.cap:
            raise BudgetExceeded(f"visited more than {p.cap} nodes", bound)
        if length == k:
            count += top == d
            continue
        remaining = k - length
        for nxt in range(1, min(top + 1, d) + 1):
            new_top = max(top, nxt)
            # must still be able to climb to d
            if d - new_top <= remaining - 1:
                stack.append((length + 1, new_top))
    return count


def enumerate_admissible(d: int, k: int) -> list[tuple[int, ...]]:
    out = []

    def walk(prefix: list[int], top: int) -> None:
        if len(prefix) == k:
            if top == d:
                out.append(tuple(prefix))
            return
        remaining = k - len(prefix)
        for nxt in range(1, min(top + 1, d) + 1):
            new_top = max(top, nxt)
            if d - new_top <= remaining - 1:
                prefix.append(nxt)
                walk(prefix, new_top)
                prefix.pop()

    if k >= d >= 1:
        walk([1], 1)
    return out


def literature_counts(L: int, delta: int, C: int) -> tuple[int, int]:
    """``N1 = (2(2 delta - 1))^L`` and ``N2 = (2C - 1)^L`` path counts."""
    if L < 1 or delta < 1 or C < 1:
        raise ValueError("L, delta and C must be >= 1")
    return (2 * (2 * delta - 1)) ** L, (2 * C - 1) ** L


def repetition_beats_literature(d: int, L: int, delta: int = 1, C: int = 2) -> bool:
    """Whether ``d^(L - d)`` extensions of the shortest path exceed both ``N1(L)`` and ``N2(L)``."""
    n1, n2 = literature_counts(L, delta, C)
    return d ** (L - d) > max(n1, n2)


@dataclass
class ZeroStructureReport:
    k: int
    d: int
    sequences: int = 0
    admissible: set[tuple[int, ...]] = field(default_factory=set)
    nonzero: set[tuple[int, ...]] = field(default_factory=set)
    # sequences whose C^(k)(A) itself is non-zero, before commuting with B
    nonzero_before_b: set[tuple[int, ...]] = field(default_factory=set)

    @property
    def violations(self) -> set[tuple[int, ...]]:
        """Inadmissible sequences that nonetheless gave a non-zero commutator."""
        return self.nonzero - self.admissible

    @property
    def admissible_but_zero(self) -> set[tuple[int, ...]]:
        return self.admissible - self.nonzero

    @property
    def ok(self) -> bool:
        return not self.violations


def cross_check_zero_structure(terms: Sequence, A, B, k: int, d: int | None = None,
                               cap: int = 200_000) -> ZeroStructureReport:
    """Compare numerically non-zero ``[C^(k)_seq(A), B]`` with the admissibility rules.

    Every length-``k`` sequence over ``1..len(terms)`` is evaluated; prefixes
    are shared so each partial commutator is computed once.
    """
    n_terms = len(terms)
    d = n_terms if d is None else d
    if n_terms**k > cap:
        raise BudgetExceeded(f"{n_terms}^{k} sequences exceed cap {cap}", count_bound(k, d))
    A = A if isinstance(A, DenseOperator) else DenseOperator(A)
    B = B if isinstance(B, DenseOperator) else DenseOperator(B)
    full = [t.matrix for t in embed_terms(terms, A.site_dims)]
    h_norm = max(term_norm(t) for t in terms)
    base = operator_norm(A) * operator_norm(B)
    b = B.matrix
    report = ZeroStructureReport(k=k, d=d)

    def walk(prefix: tuple[int, ...], x: np.ndarray) -> None:
        if len(prefix) == k:
            report.sequences += 1
            scale = 2 * base * (2 * h_norm) ** k
            if is_admissible(prefix, d, alphabet=n_terms):
                report.admissible.add(prefix)
            if np.max(np.abs(x)) >= ZERO_RTOL * scale:
                report.nonzero_before_b.add(prefix)
            c = x @ b - b @ x
            if np.max(np.abs(c)) >= ZERO_RTOL * scale:
                report.nonzero.add(prefix)
            return
        for i in range(1, n_terms + 1):
            h = full[i - 1]
            walk(prefix + (i,), h @ x - x @ h)

    walk((), A.matrix)
    return report


def all_sequences(n_terms: int, k: int):
    return itertools.product(range(1, n_terms + 1), repeat=k)
