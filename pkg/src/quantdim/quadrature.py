"""Certified enclosures of ``int log d(x, alpha) dmu(x)``.

The measure is never discretized.  The integral is split over a partition
of the support into cylinder cells; a cell ``J`` of mass ``m`` contributes
at least ``m log dmin`` and at most ``m log dmax``, where ``dmin`` is the
distance from the interval to the codebook and ``dmax`` bounds the distance
from any point of the interval to its nearest center.  Cells are refined,
largest enclosure width first, until the total width meets the tolerance.

A center lying in (or touching) a cell makes ``dmin = 0``.  Such cells are
refined down to ``max_depth``; there the singular part is controlled by the
Frostman bound ``mu_sigma(B(x, eps)) <= A3 eps**A4``, which gives

    int_J log d(x, alpha) dmu >= m (log c_J - K L),

with ``L`` the number of centers within ``c_J`` of the cell and ``K`` the
tail constant of the Frostman pair.

Interval endpoints are plain floats; every cell bound is pushed outward by
four ulps, which approximates but does not replace directed rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidFrostman
from .geometry import FrostmanConstants, Realization1D, analytic_frostman
from .model import MarkovSystem, require_valid
from .words import edge_arrays

DEFAULT_MAX_DEPTH = 40
DEFAULT_MAX_CELLS = 2_000_000
_ULPS = 4


@dataclass(frozen=True)
class Cells:
    """A partition of the support into cylinder cells (parallel arrays, 0-based states)."""

    lo: np.ndarray
    log_c: np.ndarray
    log_m: np.ndarray
    last: np.ndarray
    first: np.ndarray
    depth: np.ndarray
    state: int | None = None

    @property
    def size(self) -> int:
        return int(self.lo.size)

    @property
    def hi(self) -> np.ndarray:
        return self.lo + np.exp(self.log_c)

    @property
    def length(self) -> np.ndarray:
        return np.exp(self.log_c)

    @property
    def mid(self) -> np.ndarray:
        return self.lo + 0.5 * np.exp(self.log_c)

    def take(self, idx) -> "Cells":
        return Cells(self.lo[idx], self.log_c[idx], self.log_m[idx], self.last[idx],
                     self.first[idx], self.depth[idx], self.state)

    @staticmethod
    def concat(parts: list["Cells"]) -> "Cells":
        return Cells(*(np.concatenate([getattr(p, a) for p in parts])
                       for a in ("lo", "log_c", "log_m", "last", "first", "depth")),
                     state=parts[0].state)


def root_cells(realization: Realization1D, system: MarkovSystem, state: int | None = None) -> Cells:
    roots = np.arange(system.N) if state is None else np.array([state - 1])
    log_m = np.log(system.q[roots]) if state is None else np.zeros(1)
    return Cells(realization.roots_lo[roots].astype(float), np.zeros(roots.size), log_m,
                 roots.copy(), roots.copy(), np.ones(roots.size, dtype=int), state)


def cells_from_cut(cut, state: int | None = None) -> Cells:
    """Turn :class:`quantdim.geometry.CutIntervals` into a partition."""
    return Cells(cut.lo.copy(), cut.log_c.copy(), cut.log_m.copy(), cut.last.copy(),
                 cut.first.copy(), cut.length.astype(int).copy(), state)


class _Splitter:
    def __init__(self, realization, system):
        self.E = edge_arrays(system)
        self.offs = realization.offsets[self.E.src, self.E.dst]

    def __call__(self, cells: Cells) -> Cells:
        E = self.E
        counts = E.degree[cells.last]
        total = int(counts.sum())
        parent = np.repeat(np.arange(cells.size), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        edge = E.ptr[cells.last][parent] + (np.arange(total) - starts)
        lo = cells.lo[parent] + cells.length[parent] * self.offs[edge]
        return Cells(lo, cells.log_c[parent] + E.log_c[edge], cells.log_m[parent] + E.log_p[edge],
                     E.dst[edge], cells.first[parent], cells.depth[parent] + 1, cells.state)


def nearest_distance(centers: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Distance from each ``x`` to the sorted array ``centers``."""
    k = np.searchsorted(centers, x)
    left = np.where(k > 0, x - centers[np.maximum(k - 1, 0)], np.inf)
    right = np.where(k < centers.size, centers[np.minimum(k, centers.size - 1)] - x, np.inf)
    return np.minimum(left, right)


def interval_distance(centers: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Distance from each closed interval ``[lo, hi]`` to the sorted centers (0 if one is inside)."""
    n = centers.size
    k = np.searchsorted(centers, lo, side="left")
    inside = (k < n) & (centers[np.minimum(k, n - 1)] <= hi)
    left = np.where(k > 0, lo - centers[np.maximum(k - 1, 0)], np.inf)
    right = np.where(k < n, centers[np.minimum(k, n - 1)] - hi, np.inf)
    return np.where(inside, 0.0, np.minimum(left, right))


def count_within(centers: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return (np.searchsorted(centers, hi, side="right")
            - np.searchsorted(centers, lo, side="left"))


def cell_bounds(cells: Cells, centers: np.ndarray, tail_constant: float, max_depth: int):
    """Per-cell lower and upper bounds on ``int_J log d(x, alpha) dmu``."""
    length = cells.length
    lo, hi = cells.lo, cells.lo + length
    m = np.exp(cells.log_m)
    dmin = interval_distance(centers, lo, hi)
    dmax = nearest_distance(centers, lo + 0.5 * length) + 0.5 * length
    upper = m * np.log(dmax)
    with np.errstate(divide="ignore"):
        lower = np.where(dmin > 0, m * np.log(dmin), -np.inf)
    deep = cells.depth >= max_depth
    if deep.any():
        near = count_within(centers, lo[deep] - length[deep], hi[deep] + length[deep])
        tail = m[deep] * (cells.log_c[deep] - tail_constant * near)
        lower[deep] = np.maximum(lower[deep], tail)
    lower = np.minimum(lower, upper)
    finite = np.isfinite(lower)
    lower[finite] -= _ULPS * np.spacing(np.abs(lower[finite]))
    upper = upper + _ULPS * np.spacing(np.abs(upper))
    return lower, upper


@dataclass(frozen=True)
class Enclosure:
    lo: float
    hi: float
    cells_expanded: int
    max_depth_hit: bool
    tol: float
    cells: Cells | None = field(default=None, repr=False)
    by_root: dict = field(default_factory=dict, repr=False)
    depth_histogram: dict = field(default_factory=dict, repr=False)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack


def _fsum(x):
    if np.any(np.isneginf(x)):
        return -math.inf
    return math.fsum(x)


def integral_log_dist(realization: Realization1D, system: MarkovSystem, alpha, tol: float = 1e-3,
                      max_depth: int = DEFAULT_MAX_DEPTH, state: int | None = None,
                      frostman: FrostmanConstants | None = None, cells: Cells | None = None,
                      max_cells: int = DEFAULT_MAX_CELLS) -> Enclosure:
    """Enclose ``int log d(x, alpha) dmu(x)``.

    With ``state`` set the measure is the conditional ``mu(. | J_state)``.
    ``cells`` seeds the refinement with an existing partition (for example
    the cells of a previous enclosure); refining a partition never loosens
    any cell bound, so a seeded run is at least as tight as its seed.

    ``max_depth_hit`` is set when the tolerance could not be reached within
    ``max_depth`` and ``max_cells``.
    """
    require_valid(system)
    if tol <= 0:
        raise ValueError("tol must be positive")
    centers = np.unique(np.asarray(alpha, dtype=float).ravel())
    if centers.size == 0:
        raise ValueError("alpha must contain at least one point")
    if not np.all(np.isfinite(centers)):
        raise ValueError("alpha must be finite")
    if frostman is None:
        frostman = analytic_frostman(realization, system)
    elif not isinstance(frostman, FrostmanConstants):
        raise InvalidFrostman("frostman must be a FrostmanConstants instance")
    K = frostman.tail_constant
    if cells is None:
        cells = root_cells(realization, system, state)
    elif cells.state != state:
        raise ValueError("seed partition was built for a different measure")
    split = _Splitter(realization, system)

    lower, upper = cell_bounds(cells, centers, K, max_depth)
    expanded = 0
    hit = False
    while True:
        width = upper - lower
        if np.sum(width) <= tol:
            break
        can = cells.depth < max_depth
        inf_w = np.isinf(width) & can
        if inf_w.any():
            pick = inf_w
        else:
            cand = can & (width > 0)
            if not cand.any():
                hit = True
                break
            # capped at the max: the mean of equal widths can round above them
            pick = cand & (width >= min(width[cand].mean(), width[cand].max()))
        if cells.size + int(split.E.degree[cells.last[pick]].sum()) > max_cells:
            hit = True
            break
        kids = split(cells.take(pick))
        k_lo, k_hi = cell_bounds(kids, centers, K, max_depth)
        keep = ~pick
        cells = Cells.concat([cells.take(keep), kids])
        lower = np.concatenate([lower[keep], k_lo])
        upper = np.concatenate([upper[keep], k_hi])
        expanded += int(pick.sum())

    by_root = {}
    for r in np.unique(cells.first):
        sel = cells.first == r
        by_root[int(r) + 1] = (_fsum(lower[sel]), math.fsum(upper[sel]))
    depths, counts = np.unique(cells.depth, return_counts=True)
    return Enclosure(lo=_fsum(lower), hi=math.fsum(upper), cells_expanded=expanded,
                     max_depth_hit=hit, tol=tol, cells=cells, by_root=by_root,
                     depth_histogram=dict(zip(depths.tolist(), counts.tolist())))


def eval_quantizer(realization: Realization1D, system: MarkovSystem, alpha, tol: float = 1e-3,
                   **kwargs) -> Enclosure:
    """Certified objective of a codebook on the full measure (all root components)."""
    return integral_log_dist(realization, system, alpha, tol=tol, **kwargs)
