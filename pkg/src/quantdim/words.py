"""Admissible words and the stopping cuts Lambda_j.

``Lambda_j`` is the set of words whose path probability has just dropped
below ``p_lo**j``: ``p(sigma^-) >= p_lo**j > p(sigma)``.  It is an antichain
that cuts every infinite path exactly once, so the masses of its words sum
to one.

Two routes produce it.  :func:`lambda_visit` is a plain depth-first walk in
lexicographic order that hands each :class:`Word` to a callback.
:func:`iter_cut` expands the tree level by level on numpy arrays and is what
the aggregate functions use; all aggregates are accumulated with
``math.fsum`` (correctly rounded), so they do not depend on visiting order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .errors import BudgetExceeded, InadmissibleWord
from .model import MarkovSystem, derived_constants, require_valid

DEFAULT_BUDGET = 10_000_000


@dataclass(frozen=True, slots=True)
class Word:
    symbols: tuple
    log_p: float
    log_c: float
    log_m: float

    def __len__(self):
        return len(self.symbols)

    @property
    def last(self) -> int:
        return self.symbols[-1]

    @property
    def parent(self) -> tuple:
        return self.symbols[:-1]

    def is_prefix_of(self, other: "Word") -> bool:
        return len(self) <= len(other) and other.symbols[: len(self)] == self.symbols


def make_word(system: MarkovSystem, symbols) -> Word:
    """Build a :class:`Word` from 1-based symbols, checking admissibility."""
    symbols = tuple(int(s) for s in symbols)
    if not symbols:
        raise InadmissibleWord("the empty word has no cylinder")
    n = system.N
    for s in symbols:
        if not 1 <= s <= n:
            raise InadmissibleWord(f"symbol {s} outside 1..{n}")
    log_p = log_c = 0.0
    for a, b in zip(symbols, symbols[1:]):
        p = system.P[a - 1, b - 1]
        if p <= 0:
            raise InadmissibleWord(f"transition ({a}, {b}) is not an edge")
        log_p += math.log(p)
        log_c += math.log(system.C[a - 1, b - 1])
    return Word(symbols, log_p, log_c, math.log(system.q[symbols[0] - 1]) + log_p)


@dataclass(frozen=True)
class EdgeArrays:
    """Edges sorted by (source, target); ``ptr`` is the CSR row pointer (0-based states)."""

    ptr: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    log_p: np.ndarray
    log_c: np.ndarray

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.ptr)


def edge_arrays(system: MarkovSystem) -> EdgeArrays:
    src, dst = np.nonzero(system.P > 0)
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    ptr = np.searchsorted(src, np.arange(system.N + 1))
    return EdgeArrays(ptr, src, dst, np.log(system.P[src, dst]), np.log(system.C[src, dst]))


def cut_threshold(p_lo: float, j: int) -> tuple[float, float]:
    """Log threshold ``j log p_lo`` shifted by the tie tolerance ``1e-12 j``."""
    return j * math.log(p_lo) - 1e-12 * j, 1e-12 * j


def psi_bounds(system: MarkovSystem, j: int, state: int | None = None) -> tuple[float, float]:
    """Lower and upper bounds on the size of ``Lambda_j`` (or ``Lambda_j(i)``)."""
    dc = derived_constants(system)
    if state is None:
        return dc.p_lo ** (-j) / dc.q_hi, dc.p_lo ** (-(j + 1)) / dc.q_lo
    return dc.p_lo ** (-j), dc.p_lo ** (-(j + 1))


def _check_budget(system, j, state, budget):
    lo, _ = psi_bounds(system, j, state)
    if lo > budget:
        raise BudgetExceeded(
            f"Lambda_{j} has at least {lo:.3g} words, over the budget of {budget}",
            estimate=lo, budget=budget)


def lambda_visit(system: MarkovSystem, j: int, visitor: Callable[[Word], None],
                 state: int | None = None, budget: int = DEFAULT_BUDGET) -> int:
    """Call ``visitor`` on every word of ``Lambda_j`` in lexicographic DFS order.

    With ``state`` given, only words starting at that state are visited
    (the set ``Lambda_j(i)``).  Returns the number of words visited.
    """
    if j < 1:
        raise ValueError("j must be at least 1")
    dc = derived_constants(system)
    _check_budget(system, j, state, budget)
    thr, _ = cut_threshold(dc.p_lo, j)
    logP = np.log(np.where(system.P > 0, system.P, 1.0))
    logC = np.log(np.where(system.C > 0, system.C, 1.0))
    logq = np.log(system.q)
    kids = [system.children(s) for s in range(1, system.N + 1)]
    roots = [state] if state is not None else list(range(1, system.N + 1))
    count = 0
    for root in roots:
        base = logq[root - 1]
        # entries: (symbols, log_p, log_c, is_leaf); children pushed in reverse
        stack = [((root,), 0.0, 0.0, False)]
        while stack:
            symbols, lp, lc, is_leaf = stack.pop()
            if is_leaf:
                count += 1
                if count > budget:
                    raise BudgetExceeded(f"Lambda_{j} exceeded the budget of {budget}",
                                         budget=budget)
                visitor(Word(symbols, lp, lc, base + lp))
                continue
            a = symbols[-1]
            for b in reversed(kids[a - 1]):
                clp = lp + logP[a - 1, b - 1]
                stack.append((symbols + (b,), clp, lc + logC[a - 1, b - 1], clp < thr))
    return count


@dataclass
class LeafBatch:
    """Words of the cut discovered at one tree level (0-based state arrays)."""

    length: int
    first: np.ndarray
    last: np.ndarray
    log_p: np.ndarray
    log_c: np.ndarray
    carry: dict = field(default_factory=dict)


CarryStep = Callable[[dict, np.ndarray, np.ndarray], dict]


def iter_cut(system: MarkovSystem, j: int, state: int | None = None,
             budget: int = DEFAULT_BUDGET, carry: dict | None = None,
             carry_step: CarryStep | None = None,
             log_threshold: float | None = None) -> Iterator[LeafBatch]:
    """Expand the word tree breadth-first, yielding the cut words level by level.

    ``carry`` maps names to per-root arrays (indexed by 0-based state) that
    are propagated to children through ``carry_step(parent_carry, edge_ids,
    parent_log_c)``; the geometry module uses this to track interval
    positions.  ``log_threshold`` overrides ``j log p_lo`` (minus the tie
    tolerance) as the stopping level.
    """
    if j < 1:
        raise ValueError("j must be at least 1")
    dc = derived_constants(system)
    _check_budget(system, j, state, budget)
    thr = cut_threshold(dc.p_lo, j)[0] if log_threshold is None else log_threshold
    E = edge_arrays(system)
    deg = E.degree
    roots = np.arange(system.N) if state is None else np.array([state - 1])
    first = roots.copy()
    last = roots.copy()
    log_p = np.zeros(roots.size)
    log_c = np.zeros(roots.size)
    cur = {k: np.asarray(v)[roots] for k, v in (carry or {}).items()}
    length = 1
    emitted = 0
    while first.size:
        counts = deg[last]
        total = int(counts.sum())
        parent = np.repeat(np.arange(first.size), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        edge = E.ptr[last][parent] + (np.arange(total) - starts)
        c_first = first[parent]
        c_last = E.dst[edge]
        c_lp = log_p[parent] + E.log_p[edge]
        c_lc = log_c[parent] + E.log_c[edge]
        c_carry = {}
        if cur and carry_step is not None:
            c_carry = carry_step({k: v[parent] for k, v in cur.items()}, edge, log_c[parent])
        length += 1
        leaf = c_lp < thr
        emitted += int(leaf.sum())
        if emitted + int((~leaf).sum()) > budget:
            raise BudgetExceeded(f"Lambda_{j} exceeded the budget of {budget}", budget=budget)
        if leaf.any():
            yield LeafBatch(length, c_first[leaf], c_last[leaf], c_lp[leaf], c_lc[leaf],
                            {k: v[leaf] for k, v in c_carry.items()})
        keep = ~leaf
        first, last, log_p, log_c = c_first[keep], c_last[keep], c_lp[keep], c_lc[keep]
        cur = {k: v[keep] for k, v in c_carry.items()}


@dataclass(frozen=True)
class StoppingSetSummary:
    j: int
    psi: int
    k1: int
    k2: int
    sum_m_log_m: float
    sum_m_log_c: float
    sum_m: float
    state: int | None = None

    @property
    def t_j(self) -> float:
        return self.sum_m_log_m / self.sum_m_log_c


def _summarize(system, j, state, budget) -> StoppingSetSummary:
    logq = np.log(system.q)
    parts_mlm, parts_mlc, parts_m = [], [], []
    psi = 0
    k1, k2 = math.inf, 0
    for batch in iter_cut(system, j, state=state, budget=budget):
        log_m = batch.log_p if state is not None else logq[batch.first] + batch.log_p
        m = np.exp(log_m)
        parts_m.append(m)
        parts_mlm.append(m * log_m)
        parts_mlc.append(m * batch.log_c)
        psi += batch.first.size
        k1 = min(k1, batch.length)
        k2 = max(k2, batch.length)

    def total(parts):
        return math.fsum(np.concatenate(parts)) if parts else 0.0

    return StoppingSetSummary(j=j, psi=psi, k1=int(k1), k2=int(k2),
                              sum_m_log_m=total(parts_mlm), sum_m_log_c=total(parts_mlc),
                              sum_m=total(parts_m), state=state)


def lambda_summary(system: MarkovSystem, j: int, budget: int = DEFAULT_BUDGET) -> StoppingSetSummary:
    """Size, length range and mass-weighted log sums over ``Lambda_j``."""
    return _summarize(system, j, None, budget)


def lambda_summary_conditional(system: MarkovSystem, i: int, j: int,
                               budget: int = DEFAULT_BUDGET) -> StoppingSetSummary:
    """Same as :func:`lambda_summary` over ``Lambda_j(i)``, weighting by ``p_sigma``."""
    if not 1 <= i <= system.N:
        raise ValueError(f"state {i} outside 1..{system.N}")
    return _summarize(system, j, i, budget)


def lambda_table(system: MarkovSystem, j_max: int, state: int | None = None,
                 budget: int = DEFAULT_BUDGET) -> list[StoppingSetSummary]:
    require_valid(system)
    return [_summarize(system, j, state, budget) for j in range(1, j_max + 1)]
