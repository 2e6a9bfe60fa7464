"""Independent brute-force reference implementations used only by the tests.

None of these share code with the package: words are enumerated with
itertools, stopping-cut membership is decided in exact rational arithmetic,
and linear algebra goes through dense numpy/scipy routines.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import scipy.linalg


def words_of_length(P, k):
    """All admissible words of length ``k`` (1-based tuples)."""
    n = P.shape[0]
    for w in itertools.product(range(n), repeat=k):
        if all(P[a, b] > 0 for a, b in zip(w, w[1:])):
            yield tuple(s + 1 for s in w)


def word_logs(P, C, q, w):
    lp = sum(math.log(P[a - 1, b - 1]) for a, b in zip(w, w[1:]))
    lc = sum(math.log(C[a - 1, b - 1]) for a, b in zip(w, w[1:]))
    return lp, lc, math.log(q[w[0] - 1]) + lp


def s_k_bruteforce(system, k):
    """``sum m log m / sum m log c`` over all words of length ``k``."""
    num, den = [], []
    for w in words_of_length(system.P, k):
        _, lc, lm = word_logs(system.P, system.C, system.q, w)
        m = math.exp(lm)
        num.append(m * lm)
        den.append(m * lc)
    return math.fsum(num) / math.fsum(den), math.fsum(num), math.fsum(den)


def stopping_cut_exact(P_frac, j, first=None):
    """Words with ``p(sigma^-) >= p_lo**j > p(sigma)``, decided exactly.

    ``P_frac`` is a nested list of ``Fraction``; returns a sorted list of
    (word, p_sigma) with 1-based words.
    """
    n = len(P_frac)
    p_lo = min(p for row in P_frac for p in row if p > 0)
    thr = p_lo ** j
    out = []
    roots = [first] if first is not None else range(1, n + 1)
    stack = [((r,), Fraction(1)) for r in roots]
    while stack:
        w, p = stack.pop()
        for b in range(1, n + 1):
            pb = P_frac[w[-1] - 1][b - 1]
            if pb == 0:
                continue
            child = (w + (b,), p * pb)
            # p >= thr holds for every expanded node
            if child[1] < thr:
                out.append(child)
            else:
                stack.append(child)
    return sorted(out)


def irreducible_by_powers(P):
    """Positivity of ``(I + A)^(N-1)`` for the support matrix ``A``."""
    n = P.shape[0]
    A = (P > 0).astype(float)
    M = np.linalg.matrix_power(np.eye(n) + A, max(n - 1, 1))
    return bool(np.all(M > 0))


def stationary_by_eig(P):
    """Left Perron vector from a dense eigen-decomposition."""
    w, vl = scipy.linalg.eig(P, left=True, right=False)
    k = int(np.argmin(np.abs(w - 1.0)))
    v = np.real(vl[:, k])
    return v / v.sum()


def s0_by_formula(system):
    v = stationary_by_eig(system.P)
    P, C = system.P, system.C
    num = den = 0.0
    for i in range(system.N):
        for j in range(system.N):
            if P[i, j] > 0:
                num += v[i] * P[i, j] * math.log(P[i, j])
                den += v[i] * P[i, j] * math.log(C[i, j])
    return num / den


def interval_of(realization, word):
    """Left endpoint and length of a cylinder by direct affine composition."""
    lo = realization.roots_lo[word[0] - 1]
    scale = 1.0
    for a, b in zip(word, word[1:]):
        lo = lo + scale * realization.offsets[a - 1, b - 1]
        scale = scale * realization.ratios[a - 1, b - 1]
    return lo, scale
