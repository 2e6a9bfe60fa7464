"""Codebooks: the stopping-cut construction, local improvement and Q_n values.

All objectives are certified enclosures from :mod:`quantdim.quadrature`;
``ehat`` values reported here are upper bounds on the optimal geometric
mean error (in log form), never claims of optimality.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded
from .geometry import Realization1D, analytic_frostman, cut_intervals
from .model import MarkovSystem, is_irreducible
from .quadrature import (DEFAULT_MAX_DEPTH, Cells, Enclosure, _Splitter, cells_from_cut,
                         integral_log_dist, count_within, root_cells)
from .spectral import s0 as compute_s0
from .words import DEFAULT_BUDGET

log = logging.getLogger(__name__)

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Codebook:
    points: np.ndarray
    provenance: str = "user"

    def __post_init__(self):
        pts = np.unique(np.asarray(self.points, dtype=float).ravel())
        if pts.size == 0:
            raise ValueError("a codebook needs at least one point")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True)
class QuantizerResult:
    codebook: Codebook
    objective: Enclosure
    a: float | None = None
    extra: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.codebook.n

    @property
    def q_value(self) -> float | None:
        """``log(n) / a + ehat`` using the certified upper endpoint."""
        if self.a is None:
            return None
        return self.q(self.a)

    def q(self, a: float) -> float:
        return math.log(self.n) / a + self.objective.hi


def _default_a(system):
    return compute_s0(system).s0 if is_irreducible(system) else None


def gamma_upper(realization: Realization1D, system: MarkovSystem, j: int, tol: float = 1e-3,
                state: int | None = None, a: float | None = None, max_depth: int | None = None,
                budget: int = DEFAULT_BUDGET, **kwargs) -> QuantizerResult:
    """One center at the midpoint of every cylinder of ``Lambda_j``.

    The quadrature is seeded with the cut itself, and each cut cell is within
    ``c_tau / 2`` of its own center, so the certified upper endpoint never
    exceeds ``sum m_tau log c_tau``.
    """
    cut = cut_intervals(realization, system, j, state=state, budget=budget)
    book = Codebook(cut.midpoints, provenance=f"gamma({j})")
    if max_depth is None:
        max_depth = max(DEFAULT_MAX_DEPTH, int(cut.length.max()) + 20)
    enc = integral_log_dist(realization, system, book.points, tol=tol, max_depth=max_depth,
                            state=state, cells=cells_from_cut(cut, state), **kwargs)
    ceiling = math.fsum(np.exp(cut.log_m) * cut.log_c)
    if a is None:
        a = _default_a(system)
    return QuantizerResult(book, enc, a, extra={"j": j, "psi": cut.size,
                                                "sum_m_log_c": ceiling,
                                                "max_depth": max_depth})


def codebook_for_n(realization: Realization1D, system: MarkovSystem, n: int,
                   state: int | None = None) -> Codebook:
    """Midpoints of a cylinder partition with at most ``n`` cells, splitting heaviest first."""
    if n < 1:
        raise ValueError("n must be at least 1")
    split = _Splitter(realization, system)
    cells = root_cells(realization, system, state)
    if cells.size > n:
        heavy = np.argsort(-cells.log_m, kind="stable")[:n]
        return Codebook(cells.mid[np.sort(heavy)], provenance="greedy")
    while True:
        order = np.lexsort((cells.lo, -cells.log_m))
        top = order[0]
        extra = int(split.E.degree[cells.last[top]]) - 1
        if cells.size + extra > n:
            break
        pick = np.zeros(cells.size, dtype=bool)
        pick[top] = True
        cells = Cells.concat([cells.take(~pick), split(cells.take(pick))])
    return Codebook(cells.mid, provenance="greedy")


def _working_cells(cells: Cells, split, target: int) -> Cells:
    """Split the heaviest cells until there are at least ``target`` of them (or nothing moves)."""
    for _ in range(64):
        if cells.size >= target:
            break
        pick = cells.log_m >= np.median(cells.log_m)
        cells = Cells.concat([cells.take(~pick), split(cells.take(pick))])
    return cells


class _Surrogate:
    """Per-center midpoint of the cell-level enclosure, one moving center per group."""

    def __init__(self, cells: Cells, assign: np.ndarray, n: int, K: float):
        self.lo = cells.lo
        self.length = cells.length
        self.hi = self.lo + self.length
        self.mid = self.lo + 0.5 * self.length
        self.half = 0.5 * self.length
        self.m2 = 0.5 * np.exp(cells.log_m)
        self.floor = cells.log_c - K
        self.assign = assign
        self.n = n

    def __call__(self, cand: np.ndarray) -> np.ndarray:
        b = cand[self.assign]
        dmin = np.maximum(np.maximum(self.lo - b, b - self.hi), 0.0)
        with np.errstate(divide="ignore"):
            low = np.maximum(np.log(dmin), self.floor)
        val = self.m2 * (low + np.log(np.abs(self.mid - b) + self.half))
        return np.bincount(self.assign, weights=val, minlength=self.n)


def _refine_near(cells: Cells, centers: np.ndarray, split, levels: int,
                 min_length: np.ndarray | float = 0.0) -> Cells:
    """Split cells within one own length of a center, at most ``levels`` times.

    Cells already shorter than ``min_length`` (per center, or a scalar; the
    nearest center's value applies) are left alone.
    """
    centers = np.asarray(centers, dtype=float)
    order = np.argsort(centers)
    centers = centers[order]
    min_length = np.broadcast_to(np.asarray(min_length, dtype=float), centers.shape)[order]
    for _ in range(levels):
        lo = np.searchsorted(centers, cells.lo - cells.length, side="left")
        hi = np.searchsorted(centers, cells.hi + cells.length, side="right")
        near = hi > lo
        if near.any():
            # the nearest center's resolution demand decides
            near &= cells.length > min_length[_nearest_index(centers, cells.mid)]
        if not near.any():
            break
        cells = Cells.concat([cells.take(~near), split(cells.take(near))])
    return cells


def _nearest_index(centers: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = centers.size
    k = np.searchsorted(centers, x)
    left = np.clip(k - 1, 0, n - 1)
    right = np.clip(k, 0, n - 1)
    return np.where(np.abs(x - centers[left]) <= np.abs(centers[right] - x), left, right)


def _sweep(base: Cells, centers: np.ndarray, split, K: float, gap_frac: float,
           rng: np.random.Generator, refine_levels: int, scan: int = 16, beam: int = 4,
           shrink: int = 4, min_width: float = 1e-7, golden_steps: int = 30) -> np.ndarray:
    """One simultaneous update of every center.

    Each center owns the cells nearest to it; its search bracket is the hull
    of those cells widened by ``gap_frac`` times the largest owned cell.  The
    objective is rough (cusps at many scales), so a small beam of zooming
    grid scans (random phase, partition refined around every beam point)
    locates a basin, and golden-section search polishes it.
    """
    n = centers.size
    cells = _refine_near(base, centers, split, refine_levels)
    assign = _nearest_index(centers, cells.mid)
    owned = np.bincount(assign, minlength=n) > 0
    lo = np.full(n, np.inf)
    hi = np.full(n, -np.inf)
    big = np.zeros(n)
    np.minimum.at(lo, assign, cells.lo)
    np.maximum.at(hi, assign, cells.hi)
    np.maximum.at(big, assign, cells.length)
    lo = np.where(owned, lo - gap_frac * big, centers)
    hi = np.where(owned, hi + gap_frac * big, centers)
    cols = np.arange(n)

    f = _Surrogate(cells, assign, n, K)
    beams = centers[None, :].copy()
    width = hi - lo
    starts = lo[None, :]
    while True:
        xs = list(beams)
        grid = (np.arange(scan) + rng.random()) / scan
        for s0 in starts:
            xs.extend(s0 + g * width for g in grid)
        X = np.stack(xs)
        V = np.stack([f(x) for x in X])
        # stable sort keeps the earliest (current, then smaller) point on ties
        top = np.argsort(V, axis=0, kind="stable")[:beam]
        beams = X[top, cols]
        if np.max(width) <= min_width:
            break
        width = width * (shrink / scan)
        starts = np.clip(beams - 0.5 * width, lo, np.maximum(lo, hi - width))
        target = np.broadcast_to(width / (8 * scan), beams.shape)
        cells = _refine_near(cells, beams.ravel(), split, refine_levels, target.ravel())
        assign = _nearest_index(centers, cells.mid)
        f = _Surrogate(cells, assign, n, K)
    best_x = beams[0]
    best_val = f(best_x)

    a = np.maximum(lo, best_x - width)
    b = np.minimum(hi, best_x + width)
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(golden_steps):
        # ties move toward the smaller coordinate
        go_left = f1 <= f2
        b = np.where(go_left, x2, b)
        a = np.where(go_left, a, x1)
        x2n = np.where(go_left, x1, a + _INVPHI * (b - a))
        x1n = np.where(go_left, b - _INVPHI * (b - a), x2)
        x1, x2 = x1n, x2n
        f1, f2 = f(x1), f(x2)
    gx = np.where(f1 <= f2, x1, x2)
    better = np.minimum(f1, f2) < best_val
    best_x = np.where(better, gx, best_x)
    return np.where(owned, best_x, centers)


def improve(realization: Realization1D, system: MarkovSystem, codebook, iterations: int = 20,
            seed: int = 0, tol: float = 1e-3, state: int | None = None,
            start: QuantizerResult | None = None, a: float | None = None,
            max_depth: int = DEFAULT_MAX_DEPTH, cells_per_center: int = 16,
            refine_levels: int = 8, patience: int = 3,
            **kwargs) -> QuantizerResult:
    """Alternate nearest-center assignment and per-center line search.

    A sweep is kept only if it strictly lowers the certified upper endpoint,
    so the output is never worse than the input.  Rejected sweeps are not
    fatal: the next sweep scans with a fresh random grid phase, and the
    search stops after ``patience`` consecutive sweeps without progress.
    """
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    if not isinstance(codebook, Codebook):
        codebook = Codebook(codebook)
    if a is None:
        a = start.a if start is not None else _default_a(system)
    frostman = kwargs.pop("frostman", None) or analytic_frostman(realization, system)
    if start is not None and start.objective.cells is not None:
        seed_cells = start.objective.cells
        if start.extra.get("max_depth"):
            max_depth = start.extra["max_depth"]
    else:
        seed_cells = None
    cur = integral_log_dist(realization, system, codebook.points, tol=tol, max_depth=max_depth,
                            state=state, frostman=frostman, cells=seed_cells, **kwargs)
    book = codebook
    K = frostman.tail_constant
    gaps = [g for s in range(1, system.N + 1) for g in realization.gaps(s)]
    gap_frac = max(min(gaps), 0.0) if gaps else 0.0
    gap_frac = gap_frac if gap_frac > 0 else 0.05
    split = _Splitter(realization, system)
    rng = np.random.default_rng(seed)
    # the surrogate works on a fixed partition at a working depth, not on the
    # (much finer, center-dependent) quadrature partition
    work = _working_cells(root_cells(realization, system, state), split,
                          cells_per_center * book.n)
    accepted = 0
    stalled = 0
    for it in range(iterations):
        if stalled >= patience:
            break
        moved = _sweep(work, book.points, split, K, gap_frac, rng, refine_levels)
        if np.array_equal(moved, book.points):
            stalled += 1
            continue
        trial_book = Codebook(moved, provenance="improved")
        trial = integral_log_dist(realization, system, trial_book.points, tol=tol,
                                  max_depth=max_depth, state=state, frostman=frostman,
                                  cells=seed_cells, **kwargs)
        log.debug("improve sweep %d: hi %.12g -> %.12g", it, cur.hi, trial.hi)
        if not trial.hi < cur.hi:
            stalled += 1
            continue
        cur, book = trial, trial_book
        stalled = 0
        accepted += 1
    if accepted:
        book = Codebook(book.points, provenance="improved")
    return QuantizerResult(book, cur, a, extra={"sweeps_accepted": accepted,
                                                "max_depth": max_depth})


@dataclass(frozen=True)
class QRow:
    j: int
    psi: int
    ehat_hi: float
    ehat_bestfound: float
    Q: float


def q_sequence(realization: Realization1D, system: MarkovSystem, a: float, j_max: int,
               iterations: int = 20, tol: float = 1e-3, seed: int = 0, j_min: int = 1,
               budget: int = DEFAULT_BUDGET) -> list[QRow]:
    """``Q_{psi_j}(mu, a)`` along the stopping cuts, from improved gamma codebooks.

    On a budget failure the exception carries the completed rows in
    ``partial``.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    rows: list[QRow] = []
    for j in range(j_min, j_max + 1):
        try:
            g = gamma_upper(realization, system, j, tol=tol, a=a, budget=budget)
        except BudgetExceeded as exc:
            exc.partial = rows
            raise
        res = improve(realization, system, g.codebook, iterations=iterations, seed=seed + j,
                      tol=tol, start=g, a=a)
        rows.append(QRow(j, g.n, res.objective.hi, res.objective.mid, res.q(a)))
    return rows
