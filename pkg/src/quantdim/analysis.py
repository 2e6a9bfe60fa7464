"""Convergence reports, mixture dimensions and the reducible two-block example.

The constants bounding ``k |s_k - s0|`` and ``j |t_j - s0|`` are only known to
exist; the reports give them as observed suprema (``empirical=True``) and
never back out the theoretical values.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, DimensionNonPositive, LengthMismatch, Reducible
from .geometry import Realization1D, restrict_realization
from .model import (MarkovSystem, block_diagonal, closed_classes, is_irreducible,
                    require_valid, restrict)
from .quantizer import QuantizerResult, codebook_for_n, improve, q_sequence
from .spectral import s0 as compute_s0
from .spectral import sequence_table
from .words import DEFAULT_BUDGET, lambda_summary, lambda_summary_conditional

log = logging.getLogger(__name__)


def stabilizes(values, factor: float = 2.0, split: int | None = None, atol: float = 1e-9) -> bool:
    """Whether ``max |upper half| <= factor * max |lower half| + atol``.

    ``split`` is the number of leading entries forming the lower half
    (default: half the length, rounded down).
    """
    v = np.abs(np.asarray(values, dtype=float))
    if v.size < 2:
        return True
    split = v.size // 2 if split is None else split
    return bool(v[split:].max() <= factor * v[:split].max() + atol)


@dataclass(frozen=True)
class JRow:
    j: int
    psi: int
    t_j: float
    s0: float
    scaled_error: float
    sum_m_log_c: float
    ehat_hi: float | None
    Q: float | None


@dataclass(frozen=True)
class KRow:
    k: int
    s_k: float
    scaled_error: float
    x_k: float
    y_k: float


@dataclass(frozen=True)
class ConvergenceReport:
    j_rows: list
    k_rows: list
    metadata: dict = field(default_factory=dict)
    complete: bool = True

    @property
    def empirical_C_t(self) -> float:
        """Observed ``sup_j j |t_j - s0|``."""
        return max((r.scaled_error for r in self.j_rows), default=math.nan)

    @property
    def empirical_C_s(self) -> float:
        """Observed ``sup_k k |s_k - s0|``."""
        return max((r.scaled_error for r in self.k_rows), default=math.nan)

    def column(self, name: str, rows: str = "j") -> np.ndarray:
        src = self.j_rows if rows == "j" else self.k_rows
        return np.array([getattr(r, name) for r in src], dtype=float)


def convergence_report(system: MarkovSystem, realization: Realization1D | None, j_max: int,
                       k_max: int, quantize: bool = True, iterations: int = 20,
                       tol: float = 1e-3, seed: int = 0,
                       budget: int = DEFAULT_BUDGET) -> ConvergenceReport:
    """Rows ``(j, psi_j, t_j, s0, j|t_j - s0|, sum m log c, ehat_hi, Q)`` and
    ``(k, s_k, k|s_k - s0|, x_k, y_k)``.

    With ``quantize`` false (or no realization) the quantizer columns are
    ``None``.  A budget failure returns the rows computed so far with
    ``complete=False``.
    """
    require_valid(system)
    if not is_irreducible(system):
        raise Reducible("convergence reports need an irreducible system")
    table = sequence_table(system, k_max)
    s0 = table.s0
    k_rows = [KRow(int(k), float(s), float(k * abs(s - s0)), float(x), float(y))
              for k, s, x, y in zip(table.k, table.s, table.x, table.y)]
    meta = {"system": system.digest(), "budget": budget, "seed": seed, "tol": tol,
            "iterations": iterations, "empirical": True}
    j_rows: list[JRow] = []
    complete = True
    q_rows = {}
    try:
        if quantize and realization is not None:
            q_rows = {r.j: r for r in q_sequence(realization, system, s0, j_max,
                                                 iterations=iterations, tol=tol, seed=seed,
                                                 budget=budget)}
        for j in range(1, j_max + 1):
            summ = lambda_summary(system, j, budget=budget)
            qr = q_rows.get(j)
            j_rows.append(JRow(j, summ.psi, summ.t_j, s0, j * abs(summ.t_j - s0),
                               summ.sum_m_log_c, qr.ehat_hi if qr else None,
                               qr.Q if qr else None))
    except BudgetExceeded as exc:
        log.warning("report truncated: %s", exc)
        complete = False
        partial = getattr(exc, "partial", None) or []
        known = {r.j: r for r in partial}
        for j in range(len(j_rows) + 1, j_max + 1):
            if j not in known:
                break
            try:
                summ = lambda_summary(system, j, budget=budget)
            except BudgetExceeded:
                break
            qr = known[j]
            j_rows.append(JRow(j, summ.psi, summ.t_j, s0, j * abs(summ.t_j - s0),
                               summ.sum_m_log_c, qr.ehat_hi, qr.Q))
    return ConvergenceReport(j_rows, k_rows, meta, complete)


@dataclass(frozen=True)
class ConditionalRow:
    j: int
    t_j: float
    scaled_error: float
    sum_p_log_c: float


def conditional_report(system: MarkovSystem, realization: Realization1D | None, i: int,
                       j_max: int, budget: int = DEFAULT_BUDGET) -> list[ConditionalRow]:
    """Rows ``(j, t_j(i), j|t_j(i) - s0|, sum p log c)`` over ``Lambda_j(i)``."""
    require_valid(system)
    if not is_irreducible(system):
        raise Reducible("conditional reports need an irreducible system")
    s0 = compute_s0(system).s0
    rows = []
    for j in range(1, j_max + 1):
        summ = lambda_summary_conditional(system, i, j, budget=budget)
        rows.append(ConditionalRow(j, summ.t_j, j * abs(summ.t_j - s0), summ.sum_m_log_c))
    return rows


def mixture_dimension(dims, weights) -> float:
    """Dimension of ``sum q_i nu_i``: the weighted harmonic mean ``1 / sum(q_i / t_i)``."""
    t = np.asarray(dims, dtype=float).ravel()
    q = np.asarray(weights, dtype=float).ravel()
    if t.size != q.size:
        raise LengthMismatch(f"{t.size} dimensions but {q.size} weights")
    if t.size == 0:
        raise LengthMismatch("at least one component is needed")
    if not np.all(np.isfinite(t)) or np.any(t <= 0):
        raise DimensionNonPositive("every component dimension must be positive and finite")
    if np.any(q < 0) or abs(math.fsum(q) - 1.0) > 1e-12:
        raise ValueError("weights must be a probability vector")
    return 1.0 / math.fsum(q / t)


def reducible_example(Q1, Q2, C, q) -> tuple[float, float, float]:
    """``(t1, t2, t0)`` for the block-diagonal system built from two square blocks."""
    system = block_diagonal(Q1, Q2, C, q)
    require_valid(system)
    n1 = np.asarray(Q1).shape[0]
    blocks = [list(range(1, n1 + 1)), list(range(n1 + 1, system.N + 1))]
    ts = [compute_s0(restrict(system, b)).s0 for b in blocks]
    w = [math.fsum(system.q[:n1]), math.fsum(system.q[n1:])]
    return ts[0], ts[1], mixture_dimension(ts, w)


@dataclass(frozen=True)
class BracketCheck:
    """Outcome of the mixture bracket at one codebook size (a heuristic check)."""

    n: int
    passed: bool
    lower_ok: bool
    upper_ok: bool | None
    lower_margin: float
    upper_margin: float | None
    values: dict = field(default_factory=dict, repr=False)
    heuristic: bool = True


def bracket_check(mixture_n: QuantizerResult, components_n, components_half, weights, n: int,
                  slack: float = 0.05) -> BracketCheck:
    """Compare a mixture's n-point error with its components' errors.

    Lower side: the mixture's best-found value at ``n`` against
    ``sum q_i * hi_i(n)``.  Upper side: the mixture's certified ``hi`` at
    ``n`` against ``sum q_i * bestfound_i(floor(n / N))``; skipped (``None``)
    when ``components_half`` is ``None``.  Slack is ``slack * |value|`` of
    the right-hand side.
    """
    w = np.asarray(weights, dtype=float)
    rhs_lo = math.fsum(w * np.array([r.objective.hi for r in components_n]))
    lhs_lo = mixture_n.objective.mid
    lower_margin = lhs_lo - (rhs_lo - slack * abs(rhs_lo))
    values = {"mixture_bestfound": lhs_lo, "components_hi": rhs_lo,
              "mixture_hi": mixture_n.objective.hi}
    upper_ok = upper_margin = None
    if components_half is not None:
        rhs_hi = math.fsum(w * np.array([r.objective.mid for r in components_half]))
        upper_margin = rhs_hi + slack * abs(rhs_hi) - mixture_n.objective.hi
        upper_ok = upper_margin >= 0
        values["components_half_bestfound"] = rhs_hi
    lower_ok = lower_margin >= 0
    return BracketCheck(n, bool(lower_ok and upper_ok is not False), bool(lower_ok), upper_ok,
                        lower_margin, upper_margin, values)


def _quantize_n(realization, system, n, seed, tol, iterations):
    book = codebook_for_n(realization, system, n)
    return improve(realization, system, book, iterations=iterations, seed=seed, tol=tol)


def mixture_bracket_check(realization: Realization1D, system: MarkovSystem, n: int,
                          components: list[list[int]] | None = None, seed: int = 0,
                          tol: float = 1e-3, iterations: int = 10,
                          slack: float = 0.05) -> BracketCheck:
    """Bracket check for a system whose closed classes are the mixture components.

    Every component (default: the closed classes of ``system``, which must
    cover all states) is quantized on its own with ``n`` and ``floor(n/N)``
    points, and the full system with ``n``; codebooks start from the
    heaviest-cell partition and are improved with the same seed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    components = components if components is not None else closed_classes(system)
    if sorted(s for c in components for s in c) != list(range(1, system.N + 1)):
        raise ValueError("components must partition the states")
    weights = [math.fsum(system.q[np.asarray(c) - 1]) for c in components]
    half = n // len(components)
    mix = _quantize_n(realization, system, n, seed, tol, iterations)
    at_n, at_half = [], []
    for comp in components:
        sub = restrict(system, comp)
        sub_r = restrict_realization(realization, comp)
        at_n.append(_quantize_n(sub_r, sub, n, seed, tol, iterations))
        if half:
            at_half.append(_quantize_n(sub_r, sub, half, seed, tol, iterations))
    return bracket_check(mix, at_n, at_half if half else None, weights, n, slack)
