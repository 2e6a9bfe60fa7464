"""One-dimensional realization of the cylinder construction.

Each state ``i`` owns a root interval ``J_i`` of length one.  Inside any
cylinder whose last symbol is ``i``, the child of type ``j`` sits at the
relative offset ``offsets[i, j]`` and has relative length ``c_ij``, so a
word's interval is a nested affine composition and ``|J_sigma| = c_sigma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, InvalidGeometry, InvalidFrostman
from .model import MarkovSystem, derived_constants, require_valid
from .words import DEFAULT_BUDGET, edge_arrays, iter_cut, make_word


@dataclass(frozen=True, eq=False)
class Realization1D:
    """Root positions and child offsets; ``offsets[i, j]`` is NaN off the edge set."""

    roots_lo: np.ndarray
    offsets: np.ndarray
    ratios: np.ndarray
    layout: str = "equal-gap"

    def __post_init__(self):
        for attr in ("roots_lo", "offsets", "ratios"):
            arr = np.array(getattr(self, attr), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)

    @property
    def N(self) -> int:
        return int(self.roots_lo.size)

    def order(self, state: int) -> list[int]:
        """1-based child types of ``state`` from left to right."""
        row = self.offsets[state - 1]
        cols = np.nonzero(~np.isnan(row))[0]
        return [int(j) + 1 for j in cols[np.argsort(row[cols], kind="stable")]]

    def gaps(self, state: int) -> list[float]:
        i = state - 1
        kids = [j - 1 for j in self.order(state)]
        return [self.offsets[i, b] - (self.offsets[i, a] + self.ratios[i, a])
                for a, b in zip(kids, kids[1:])]

    @property
    def separation(self) -> float:
        """Closed-form separation constant: min over adjacent siblings of gap / larger length."""
        best = math.inf
        for s in range(1, self.N + 1):
            kids = [j - 1 for j in self.order(s)]
            for (a, b), gap in zip(zip(kids, kids[1:]), self.gaps(s)):
                best = min(best, gap / max(self.ratios[s - 1, a], self.ratios[s - 1, b]))
        return best

    def hull(self, state: int | None = None) -> tuple[float, float]:
        if state is not None:
            lo = float(self.roots_lo[state - 1])
            return lo, lo + 1.0
        return float(self.roots_lo.min()), float(self.roots_lo.max() + 1.0)


def _default_roots(n):
    return 3.0 * np.arange(n)


def _check_roots(roots):
    r = np.sort(np.asarray(roots, dtype=float))
    if r.size > 1 and np.min(np.diff(r)) < 2.0:
        raise InvalidGeometry("root intervals must be separated by gaps of at least 1")


def equal_gap(system: MarkovSystem, roots_lo=None, allow_touching: bool = False) -> Realization1D:
    """Children in increasing type order, separated by equal gaps.

    A state whose children have total length exactly 1 is rejected unless
    ``allow_touching`` is set, in which case they are packed with zero gaps.
    Such a layout has separation 0: upper bounds built on it stay valid but
    the separation assumption itself does not hold.
    """
    require_valid(system)
    n = system.N
    roots = _default_roots(n) if roots_lo is None else np.asarray(roots_lo, dtype=float)
    _check_roots(roots)
    offsets = np.full((n, n), np.nan)
    for i in range(n):
        cols = np.nonzero(system.P[i] > 0)[0]
        widths = system.C[i, cols]
        total = math.fsum(widths)
        if total > 1.0 or (total == 1.0 and not allow_touching):
            raise InvalidGeometry(
                f"children of state {i + 1} have total length {total!r} >= 1; no gap fits")
        gap = (1.0 - total) / (cols.size - 1)
        pos = 0.0
        for jj, w in zip(cols, widths):
            offsets[i, jj] = pos
            pos += w + gap
    return Realization1D(roots, offsets, system.C,
                         layout="touching" if allow_touching else "equal-gap")


def from_offsets(system: MarkovSystem, offsets, roots_lo=None) -> Realization1D:
    """Explicit layout: ``offsets[i][j]`` is the relative left end of child ``j`` in type ``i``.

    Keys are 1-based states (ints or numeric strings).
    """
    require_valid(system)
    n = system.N
    roots = _default_roots(n) if roots_lo is None else np.asarray(roots_lo, dtype=float)
    _check_roots(roots)
    table = np.full((n, n), np.nan)
    for i_key, row in offsets.items():
        i = int(i_key) - 1
        for j_key, off in row.items():
            j = int(j_key) - 1
            if not (0 <= i < n and 0 <= j < n) or system.P[i, j] <= 0:
                raise InvalidGeometry(f"offset given for non-edge ({i + 1}, {j + 1})")
            table[i, j] = float(off)
    for i in range(n):
        cols = np.nonzero(system.P[i] > 0)[0]
        if np.any(np.isnan(table[i, cols])):
            raise InvalidGeometry(f"state {i + 1} is missing offsets for some children")
        order = cols[np.argsort(table[i, cols], kind="stable")]
        lo = table[i, order]
        hi = lo + system.C[i, order]
        if lo[0] < 0 or hi[-1] > 1:
            raise InvalidGeometry(f"children of state {i + 1} do not fit in the parent")
        if np.any(lo[1:] - hi[:-1] <= 0):
            raise InvalidGeometry(f"children of state {i + 1} overlap or touch")
    return Realization1D(roots, table, system.C, layout="offsets")


def restrict_realization(realization: Realization1D, states) -> Realization1D:
    """The layout of the sub-system on 1-based ``states`` (see :func:`quantdim.model.restrict`)."""
    idx = np.asarray(sorted(states)) - 1
    sub = np.ix_(idx, idx)
    return Realization1D(realization.roots_lo[idx], realization.offsets[sub],
                         realization.ratios[sub], realization.layout)


def realization_from_config(system: MarkovSystem, block: dict | None) -> Realization1D:
    if not block:
        return equal_gap(system)
    roots = block.get("roots")
    if "offsets" in block:
        return from_offsets(system, block["offsets"], roots)
    layout = block.get("layout", "equal-gap")
    if layout not in ("equal-gap", "touching"):
        raise InvalidGeometry(f"unknown layout {layout!r}")
    return equal_gap(system, roots, allow_touching=layout == "touching")


@dataclass(frozen=True)
class CylinderInterval:
    lo: float
    hi: float
    word: tuple

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


def cylinder_interval(realization: Realization1D, system: MarkovSystem, word) -> CylinderInterval:
    w = make_word(system, word)
    s = w.symbols
    lo = float(realization.roots_lo[s[0] - 1])
    scale = 1.0
    for a, b in zip(s, s[1:]):
        lo += scale * realization.offsets[a - 1, b - 1]
        scale *= realization.ratios[a - 1, b - 1]
    return CylinderInterval(lo, lo + scale, s)


def _edge_offsets(realization, system):
    E = edge_arrays(system)
    return E, realization.offsets[E.src, E.dst]


def lo_carry(realization: Realization1D, system: MarkovSystem):
    """Carry arguments for :func:`quantdim.words.iter_cut` tracking left endpoints."""
    _, offs = _edge_offsets(realization, system)

    def step(parent, edge, parent_log_c):
        return {"lo": parent["lo"] + np.exp(parent_log_c) * offs[edge]}

    return {"lo": realization.roots_lo}, step


@dataclass(frozen=True)
class CutIntervals:
    """Intervals of a stopping cut, as parallel arrays (0-based states)."""

    lo: np.ndarray
    hi: np.ndarray
    log_m: np.ndarray
    log_c: np.ndarray
    first: np.ndarray
    last: np.ndarray
    length: np.ndarray

    @property
    def size(self) -> int:
        return int(self.lo.size)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)


def cut_intervals(realization: Realization1D, system: MarkovSystem, j: int,
                  state: int | None = None, budget: int = DEFAULT_BUDGET) -> CutIntervals:
    """Intervals of ``Lambda_j`` (or ``Lambda_j(i)`` with masses ``p_sigma``), sorted by position."""
    carry, step = lo_carry(realization, system)
    logq = np.log(system.q)
    parts = {k: [] for k in ("lo", "log_c", "log_m", "first", "last", "length")}
    for b in iter_cut(system, j, state=state, budget=budget, carry=carry, carry_step=step):
        parts["lo"].append(b.carry["lo"])
        parts["log_c"].append(b.log_c)
        parts["log_m"].append(b.log_p if state is not None else logq[b.first] + b.log_p)
        parts["first"].append(b.first)
        parts["last"].append(b.last)
        parts["length"].append(np.full(b.first.size, b.length))
    arr = {k: np.concatenate(v) for k, v in parts.items()}
    order = np.argsort(arr["lo"], kind="stable")
    arr = {k: v[order] for k, v in arr.items()}
    return CutIntervals(arr["lo"], arr["lo"] + np.exp(arr["log_c"]), arr["log_m"], arr["log_c"],
                        arr["first"], arr["last"], arr["length"])


def level_intervals(realization: Realization1D, system: MarkovSystem, depth: int,
                    state: int | None = None, budget: int = DEFAULT_BUDGET) -> CutIntervals:
    """All cylinders of word length ``depth``."""
    E, offs = _edge_offsets(realization, system)
    deg = E.degree
    roots = np.arange(system.N) if state is None else np.array([state - 1])
    lo = realization.roots_lo[roots].copy()
    log_c = np.zeros(roots.size)
    log_p = np.zeros(roots.size)
    first = roots.copy()
    last = roots.copy()
    for _ in range(depth - 1):
        counts = deg[last]
        total = int(counts.sum())
        if total > budget:
            raise BudgetExceeded(f"{total} cylinders at depth {depth} exceed the budget",
                                 estimate=total, budget=budget)
        parent = np.repeat(np.arange(last.size), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        edge = E.ptr[last][parent] + (np.arange(total) - starts)
        lo = lo[parent] + np.exp(log_c[parent]) * offs[edge]
        log_c = log_c[parent] + E.log_c[edge]
        log_p = log_p[parent] + E.log_p[edge]
        first = first[parent]
        last = E.dst[edge]
    log_m = log_p if state is not None else np.log(system.q)[first] + log_p
    order = np.argsort(lo, kind="stable")
    return CutIntervals(lo[order], lo[order] + np.exp(log_c[order]), log_m[order],
                        log_c[order], first[order], last[order], np.full(lo.size, depth))


@dataclass(frozen=True)
class SeparationReport:
    t_observed: float
    t_layout: float
    depth: int
    pairs_checked: int

    @property
    def clamped(self) -> float:
        """``t_observed`` capped at 1; any larger separation also satisfies ``t < 1``."""
        return min(self.t_observed, 1.0)


def verify_separation(realization: Realization1D, system: MarkovSystem, depth: int,
                      budget: int = DEFAULT_BUDGET) -> SeparationReport:
    """Minimum over sibling pairs up to ``depth`` of distance / larger diameter."""
    if depth < 2:
        raise ValueError("depth must be at least 2")
    best = math.inf
    pairs = 0
    for d in range(1, depth):
        parents = level_intervals(realization, system, d, budget=budget)
        width = np.exp(parents.log_c)
        for a in range(1, system.N + 1):
            sel = parents.last == a - 1
            if not sel.any():
                continue
            kids = [b - 1 for b in realization.order(a)]
            los = [parents.lo[sel] + width[sel] * realization.offsets[a - 1, b] for b in kids]
            lens = [width[sel] * realization.ratios[a - 1, b] for b in kids]
            for x in range(len(kids)):
                for y in range(x + 1, len(kids)):
                    dist = los[y] - (los[x] + lens[x])
                    ratio = dist / np.maximum(lens[x], lens[y])
                    best = min(best, float(ratio.min()))
                    pairs += int(ratio.size)
    return SeparationReport(best, realization.separation, depth, pairs)


def sample_points(realization: Realization1D, system: MarkovSystem, count: int, depth: int,
                  seed: int, state: int | None = None) -> np.ndarray:
    """Midpoints of ``J_{sigma|depth}`` for ``count`` random paths of the chain."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rng = np.random.default_rng(seed)
    n = system.N
    if state is None:
        cur = rng.choice(n, size=count, p=system.q)
    else:
        cur = np.full(count, state - 1)
    cdf = np.cumsum(system.P, axis=1)
    cdf[:, -1] = 1.0
    offs = np.nan_to_num(realization.offsets)
    lo = realization.roots_lo[cur].copy()
    scale = np.ones(count)
    for _ in range(depth - 1):
        u = rng.random(count)
        nxt = (u[:, None] >= cdf[cur]).sum(axis=1)
        # guard against zero-probability columns at the top of the cdf
        nxt = np.minimum(nxt, n - 1)
        while True:
            bad = system.P[cur, nxt] <= 0
            if not bad.any():
                break
            nxt[bad] -= 1
        lo = lo + scale * offs[cur, nxt]
        scale = scale * realization.ratios[cur, nxt]
        cur = nxt
    return lo + 0.5 * scale


@dataclass(frozen=True)
class FrostmanConstants:
    """``mu_sigma(B(x, eps)) <= A3 * eps**A4`` for all cylinders, points and radii."""

    A3: float
    A4: float
    source: str = "analytic"

    def __post_init__(self):
        if not (self.A3 > 0 and self.A4 > 0 and math.isfinite(self.A3) and math.isfinite(self.A4)):
            raise InvalidFrostman(f"need positive finite constants, got A3={self.A3}, A4={self.A4}")

    @property
    def tail_constant(self) -> float:
        """Bound on ``-int min(0, log(|x - a| / c_sigma)) d mu_sigma`` for one center.

        Integrating the ball-mass bound ``min(1, A3 r**A4)`` against ``dr / r``
        gives ``(1 + log A3) / A4`` when ``A3 >= 1`` and ``A3 / A4`` otherwise.
        """
        if self.A3 >= 1.0:
            return (1.0 + math.log(self.A3)) / self.A4
        return self.A3 / self.A4


def analytic_frostman(realization: Realization1D, system: MarkovSystem) -> FrostmanConstants:
    """A provable pair from ``(p_hi, c_lo, t)``.

    A ball of radius ``eps`` meets at most ``M`` of the pairwise disjoint
    descendant cylinders whose relative length first drops below ``eps``:
    they are at least ``c_lo eps`` long, so ``M <= floor(2 / c_lo) + 2``, and
    consecutive ones are at least ``t c_lo eps`` apart, so also
    ``M <= ceil(2 / (t c_lo)) + 1``.  Each carries relative mass at most
    ``eps**A4`` with ``A4 = log p_hi / log c_lo``.
    """
    dc = derived_constants(system)
    t = realization.separation
    M = math.floor(2.0 / dc.c_lo) + 2
    if t > 0:
        M = min(M, math.ceil(2.0 / (t * dc.c_lo)) + 1)
    return FrostmanConstants(float(M), math.log(dc.p_hi) / math.log(dc.c_lo), "analytic")


def ball_masses(samples: np.ndarray, centers: np.ndarray, eps: float) -> np.ndarray:
    """Empirical mass of ``[x - eps, x + eps]`` for each center ``x``."""
    s = np.sort(samples)
    hi = np.searchsorted(s, centers + eps, side="right")
    lo = np.searchsorted(s, centers - eps, side="left")
    return (hi - lo) / s.size


def calibrate_frostman(samples: np.ndarray, centers: np.ndarray, eps_grid, A4: float,
                       headroom: float = 1.5) -> FrostmanConstants:
    """Empirical ``A3``: ``headroom`` times the largest observed ``mu(B) / eps**A4``."""
    worst = max(float(ball_masses(samples, centers, e).max()) / e ** A4 for e in eps_grid)
    return FrostmanConstants(headroom * worst, A4, "calibrated")


def frostman_ratio(samples: np.ndarray, centers: np.ndarray, eps_grid,
                   constants: FrostmanConstants) -> float:
    """Largest ``mu(B(x, eps)) / (A3 eps**A4)`` over the grid; ``<= 1`` means the bound holds."""
    return max(float(ball_masses(samples, centers, e).max()) / (constants.A3 * e ** constants.A4)
               for e in eps_grid)
