"""Markov systems: the input model of a graph-directed construction.

A system is given by a row-stochastic transition matrix ``P``, a matrix of
contraction ratios ``C`` supported on the same edges, and an initial
probability vector ``q``.  States are numbered ``1..N`` in words and in
every public function taking a state argument; the arrays themselves are
ordinary zero-based numpy arrays.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InvalidSystem

STOCHASTIC_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    kind: str
    row: int | None = None
    col: int | None = None
    message: str = ""

    def __str__(self):
        where = ""
        if self.row is not None:
            where = f" at row {self.row}" if self.col is None else f" at ({self.row}, {self.col})"
        return f"{self.kind}{where}: {self.message}" if self.message else f"{self.kind}{where}"


@dataclass(frozen=True, eq=False)
class MarkovSystem:
    """Transition probabilities, contraction ratios and initial vector.

    Arrays are copied and frozen on construction.  Nothing is validated
    here; call :func:`validate` (or any operation that requires a valid
    system) to check the standing assumptions.
    """

    P: np.ndarray
    C: np.ndarray
    q: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for attr in ("P", "C", "q"):
            arr = np.array(getattr(self, attr), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)

    @property
    def N(self) -> int:
        return int(self.q.shape[0])

    @property
    def edges(self) -> frozenset:
        """The edge set ``{(i, j) : p_ij > 0}`` with 1-based states."""
        rows, cols = np.nonzero(self.P > 0)
        return frozenset((int(i) + 1, int(j) + 1) for i, j in zip(rows, cols))

    @property
    def support(self) -> np.ndarray:
        return self.P > 0

    def children(self, state: int) -> list[int]:
        """1-based successor states of ``state`` in increasing order."""
        return [int(j) + 1 for j in np.nonzero(self.P[state - 1] > 0)[0]]

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.P, self.C, self.q):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        return h.hexdigest()[:16]

    def permuted(self, perm) -> "MarkovSystem":
        """Relabel states: new state ``k`` is old state ``perm[k]`` (0-based)."""
        perm = np.asarray(perm)
        return MarkovSystem(self.P[np.ix_(perm, perm)], self.C[np.ix_(perm, perm)],
                            self.q[perm], name=self.name)


@dataclass(frozen=True)
class DerivedConstants:
    p_lo: float
    p_hi: float
    c_lo: float
    c_hi: float
    q_lo: float
    q_hi: float
    N1: int


def validate(system: MarkovSystem) -> list[Violation]:
    """Return every violated standing assumption; empty if the system is valid."""
    P, C, q = system.P, system.C, system.q
    out: list[Violation] = []
    if q.ndim != 1 or P.shape != (q.size, q.size) or C.shape != P.shape:
        out.append(Violation("ShapeMismatch", message=f"P{P.shape}, C{C.shape}, q{q.shape}"))
        return out
    n = q.size
    if n < 2:
        out.append(Violation("TooFewStates", message=f"N={n}"))
    for name, arr in (("P", P), ("C", C), ("q", q)):
        if not np.all(np.isfinite(arr)):
            out.append(Violation("NonFinite", message=f"{name} has NaN or Inf entries"))
    if out:
        return out
    for i in range(n):
        for j in range(n):
            p, c = P[i, j], C[i, j]
            if p < 0 or p > 1:
                out.append(Violation("ProbabilityOutOfRange", i + 1, j + 1, f"p={p!r}"))
            if (p > 0) != (c > 0):
                out.append(Violation("SupportMismatch", i + 1, j + 1, f"p={p!r}, c={c!r}"))
            if c < 0 or c >= 1:
                out.append(Violation("ContractionOutOfRange", i + 1, j + 1, f"c={c!r}"))
        row_sum = math.fsum(P[i])
        if abs(row_sum - 1.0) > STOCHASTIC_TOL:
            out.append(Violation("RowNotStochastic", i + 1, message=f"row sums to {row_sum!r}"))
        if np.count_nonzero(P[i] > 0) < 2:
            out.append(Violation("CardinalityCondition", i + 1,
                                 message="fewer than two positive transitions"))
        if q[i] <= 0:
            out.append(Violation("InitialNotPositive", i + 1, message=f"q={q[i]!r}"))
    q_sum = math.fsum(q)
    if abs(q_sum - 1.0) > STOCHASTIC_TOL:
        out.append(Violation("InitialNotNormalized", message=f"q sums to {q_sum!r}"))
    return out


def require_valid(system: MarkovSystem) -> None:
    violations = validate(system)
    if violations:
        raise InvalidSystem(violations)


def derived_constants(system: MarkovSystem) -> DerivedConstants:
    require_valid(system)
    mask = system.support
    p_edges = system.P[mask]
    c_edges = system.C[mask]
    p_lo, p_hi = float(p_edges.min()), float(p_edges.max())
    # strict inequality p_hi**h < p_lo, evaluated in log space to avoid underflow
    n1 = 1
    while n1 * math.log(p_hi) >= math.log(p_lo):
        n1 += 1
    return DerivedConstants(
        p_lo=p_lo, p_hi=p_hi,
        c_lo=float(c_edges.min()), c_hi=float(c_edges.max()),
        q_lo=float(system.q.min()), q_hi=float(system.q.max()),
        N1=n1,
    )


def is_irreducible(system: MarkovSystem) -> bool:
    """True iff the support graph of ``P`` is strongly connected."""
    graph = csr_matrix(system.support.astype(np.int8))
    ncomp, _ = connected_components(graph, directed=True, connection="strong")
    return ncomp == 1


def renormalized(system: MarkovSystem) -> MarkovSystem:
    """Divide each row of ``P`` and the vector ``q`` by their sums."""
    P = system.P / system.P.sum(axis=1, keepdims=True)
    return MarkovSystem(P, system.C, system.q / system.q.sum(), name=system.name)


def closed_classes(system: MarkovSystem) -> list[list[int]]:
    """Strongly connected components with no outgoing edges, as sorted 1-based states."""
    graph = csr_matrix(system.support.astype(np.int8))
    _, labels = connected_components(graph, directed=True, connection="strong")
    out = []
    for lab in np.unique(labels):
        members = np.nonzero(labels == lab)[0]
        others = np.nonzero(labels != lab)[0]
        if not system.P[np.ix_(members, others)].any():
            out.append([int(m) + 1 for m in members])
    return sorted(out)


def restrict(system: MarkovSystem, states) -> MarkovSystem:
    """The system on a closed set of 1-based ``states`` with ``q`` renormalized."""
    idx = np.asarray(sorted(states)) - 1
    rest = np.setdiff1d(np.arange(system.N), idx)
    if system.P[np.ix_(idx, rest)].any():
        raise InvalidSystem([Violation("RowNotStochastic",
                                       message="the chosen states are not a closed class")])
    q = system.q[idx]
    return MarkovSystem(system.P[np.ix_(idx, idx)], system.C[np.ix_(idx, idx)],
                        q / math.fsum(q), name=f"{system.name}|{','.join(map(str, idx + 1))}")


# -- named systems used throughout the test-suite and demos -------------------

def cantor2() -> MarkovSystem:
    """Two states, all transitions 1/2, all ratios 1/3."""
    return MarkovSystem(np.full((2, 2), 0.5), np.full((2, 2), 1 / 3), [0.5, 0.5], name="cantor2")


def ring3() -> MarkovSystem:
    """Three states, p=1/2 off the diagonal, ratios 1/4, uniform start."""
    P = np.full((3, 3), 0.5) - 0.5 * np.eye(3)
    C = np.where(P > 0, 0.25, 0.0)
    return MarkovSystem(P, C, np.full(3, 1 / 3), name="ring3")


def skew2() -> MarkovSystem:
    return MarkovSystem([[0.75, 0.25], [0.5, 0.5]], np.full((2, 2), 0.5), [0.5, 0.5], name="skew2")


def identical_rows(q, s) -> MarkovSystem:
    """Self-similar case: every row of ``P`` equals ``q`` and ``c_ij = s_j``."""
    q = np.asarray(q, dtype=float)
    s = np.asarray(s, dtype=float)
    n = q.size
    return MarkovSystem(np.tile(q, (n, 1)), np.tile(s, (n, 1)), q, name="identical-rows")


def block_diagonal(Q1, Q2, C, q) -> MarkovSystem:
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    n1, n2 = Q1.shape[0], Q2.shape[0]
    P = np.zeros((n1 + n2, n1 + n2))
    P[:n1, :n1] = Q1
    P[n1:, n1:] = Q2
    return MarkovSystem(P, C, q, name="block-diagonal")


def random_system(rng: np.random.Generator, n: int | None = None, p_floor: float = 0.3,
                  max_degree: int = 3) -> MarkovSystem:
    """Draw a valid irreducible system with ``p_lo >= p_floor``.

    Each row gets 2..``max_degree`` successors (at least one of them the next
    state on a cycle, which makes the chain irreducible), probabilities are a
    Dirichlet draw squeezed above ``p_floor``, and ratios leave room for
    positive gaps in a 1-D layout.
    """
    if n is None:
        n = int(rng.integers(2, 5))
    P = np.zeros((n, n))
    C = np.zeros((n, n))
    for i in range(n):
        deg = int(rng.integers(2, min(n, max_degree) + 1))
        if deg * p_floor > 1:
            deg = int(1 // p_floor)
        others = [j for j in range(n) if j != (i + 1) % n]
        cols = [(i + 1) % n] + list(rng.choice(others, size=deg - 1, replace=False))
        w = rng.dirichlet(np.ones(deg))
        P[i, cols] = p_floor + (1 - deg * p_floor) * w
        P[i, cols] /= P[i, cols].sum()
        C[i, cols] = rng.uniform(0.1, 0.8 / deg, size=deg)
    q = 0.5 / n + 0.5 * rng.dirichlet(np.ones(n))
    q /= q.sum()
    return MarkovSystem(P, C, q, name="random")
