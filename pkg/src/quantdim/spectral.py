"""Perron vector, the order-zero dimension s0 and the entropy-type sequences.

Everything here is driven by two per-state vectors

    h_l = sum_j p_lj log p_lj,      g_l = sum_j p_lj log c_lj

(with ``0 log 0 = 0``) and the matrix powers ``P^m`` applied to them.  The
word sums over all descendants of a state,

    xi(i, n)  = sum_{|tau| = n+1, tau_1 = i} p_tau log p_tau = sum_{m<n} (P^m h)_i,
    lam(i, n) = sum_{|tau| = n+1, tau_1 = i} p_tau log c_tau = sum_{m<n} (P^m g)_i,

are then obtained in O(N^2) per step without enumerating any words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, Reducible
from .model import MarkovSystem, is_irreducible, require_valid


def _xlogy(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast(x, y).shape)
    mask = x > 0
    np.multiply(x, np.log(np.where(mask, y, 1.0)), out=out, where=mask)
    return out


def _row_fsum(mat):
    return np.array([math.fsum(row) for row in mat])


def entropy_vectors(system: MarkovSystem):
    """Return ``(h, g)``: per-state sums of ``p log p`` and ``p log c``."""
    h = _row_fsum(_xlogy(system.P, system.P))
    g = _row_fsum(_xlogy(system.P, system.C))
    return h, g


@dataclass(frozen=True)
class StationaryVector:
    v: np.ndarray
    residual: float
    iterations: int


def stationary_vector(system: MarkovSystem, tol: float = 1e-12,
                      max_iter: int = 1_000_000) -> StationaryVector:
    """Normalized positive left eigenvector of ``P`` for the eigenvalue 1.

    Power iteration on ``v -> (v + vP) / 2``: averaging each iterate with its
    successor removes the oscillation of periodic chains while keeping the
    same fixed point.
    """
    require_valid(system)
    if not is_irreducible(system):
        raise Reducible("stationary vector requires an irreducible transition matrix")
    P = system.P
    v = np.full(system.N, 1.0 / system.N)
    residual = math.inf
    for it in range(1, max_iter + 1):
        v = 0.5 * (v + v @ P)
        v /= math.fsum(v)
        residual = float(np.max(np.abs(v @ P - v)))
        if residual <= tol:
            v.setflags(write=False)
            return StationaryVector(v=v, residual=residual, iterations=it)
    raise NonConvergence(f"power iteration stalled at residual {residual:.3e} after {max_iter} steps")


@dataclass(frozen=True)
class DimensionValue:
    s0: float
    u0: float
    l0: float
    v: np.ndarray


def s0(system: MarkovSystem) -> DimensionValue:
    """The ratio u0 / l0 of stationary-averaged ``p log p`` and ``p log c``."""
    v = stationary_vector(system).v
    h, g = entropy_vectors(system)
    u0 = math.fsum(v * h)
    l0 = math.fsum(v * g)
    return DimensionValue(s0=u0 / l0, u0=u0, l0=l0, v=v)


@dataclass(frozen=True)
class SequenceTable:
    """Columns indexed by ``k = 2..k_max`` (``k[0] == 2``).

    ``xi[i, n]`` and ``lam[i, n]`` hold xi(i+1, n) and lam(i+1, n) for
    ``n = 0..k_max-1``.  ``x`` and ``y`` are ``None`` for reducible systems.
    """

    k_max: int
    k: np.ndarray
    u: np.ndarray
    l: np.ndarray
    s: np.ndarray
    x: np.ndarray | None
    y: np.ndarray | None
    u1: float
    xi: np.ndarray
    lam: np.ndarray
    u0: float | None = None
    l0: float | None = None
    s0: float | None = None

    @property
    def residuals_available(self) -> bool:
        return self.x is not None

    def at(self, k: int) -> int:
        return k - 2


def _descendant_sums(system: MarkovSystem, n_max: int):
    """``xi`` and ``lam`` of shape (N, n_max + 1) via ``a_{m+1} = P a_m``."""
    h, g = entropy_vectors(system)
    P = system.P
    N = system.N
    xi = np.zeros((N, n_max + 1))
    lam = np.zeros((N, n_max + 1))
    a, b = h.copy(), g.copy()
    for n in range(1, n_max + 1):
        xi[:, n] = xi[:, n - 1] + a
        lam[:, n] = lam[:, n - 1] + b
        a = P @ a
        b = P @ b
    return xi, lam


def sequence_table(system: MarkovSystem, k_max: int) -> SequenceTable:
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    require_valid(system)
    q = system.q
    xi, lam = _descendant_sums(system, k_max - 1)
    u1 = math.fsum(_xlogy(q, q))
    ks = np.arange(2, k_max + 1)
    u = np.array([u1 + math.fsum(q * xi[:, k - 1]) for k in ks])
    l = np.array([math.fsum(q * lam[:, k - 1]) for k in ks])
    s = u / l

    if not is_irreducible(system):
        return SequenceTable(k_max, ks, u, l, s, None, None, u1, xi, lam)

    dim = s0(system)
    v = dim.v
    h, g = entropy_vectors(system)
    # x_k = sum_{m=1}^{k-2} (q P^m - v) . h, accumulated from the deviation
    # vector directly so the O(k) drift terms never cancel against each other
    x = np.zeros(ks.size)
    y = np.zeros(ks.size)
    dev = q.copy()
    acc_x = acc_y = 0.0
    for idx in range(1, ks.size):
        dev = dev @ system.P
        d = dev - v
        acc_x += math.fsum(d * h)
        acc_y += math.fsum(d * g)
        x[idx] = acc_x
        y[idx] = acc_y
    return SequenceTable(k_max, ks, u, l, s, x, y, u1, xi, lam, dim.u0, dim.l0, dim.s0)


@dataclass(frozen=True)
class DeltaTable:
    n: np.ndarray
    max_delta: np.ndarray
    max_delta_tilde: np.ndarray

    @property
    def running_sup(self) -> np.ndarray:
        """Empirical bound on both spreads up to each n (not a proven constant)."""
        return np.maximum.accumulate(np.maximum(self.max_delta, self.max_delta_tilde))


def delta_table(system: MarkovSystem, n_max: int) -> DeltaTable:
    """Spread across states of xi(., n) and lam(., n) for ``n = 1..n_max``."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    require_valid(system)
    xi, lam = _descendant_sums(system, n_max)
    spread_xi = xi[:, 1:].max(axis=0) - xi[:, 1:].min(axis=0)
    spread_lam = lam[:, 1:].max(axis=0) - lam[:, 1:].min(axis=0)
    return DeltaTable(np.arange(1, n_max + 1), spread_xi, spread_lam)


def conditional_s(system: MarkovSystem, i: int, k_max: int) -> np.ndarray:
    """``s_k(i) = xi(i, k-1) / lam(i, k-1)`` for ``k = 2..k_max``."""
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    if not 1 <= i <= system.N:
        raise ValueError(f"state {i} outside 1..{system.N}")
    require_valid(system)
    xi, lam = _descendant_sums(system, k_max - 1)
    return xi[i - 1, 1:] / lam[i - 1, 1:]
