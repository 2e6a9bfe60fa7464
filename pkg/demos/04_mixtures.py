"""
A reducible chain is a mixture, and mixtures average dimensions harmonically.

The block-diagonal system below runs a Cantor-type chain (ratio 1/3) on
states 1-2 and another with ratio 1/4 on states 3-4.  No stationary vector
ties the blocks together, so s0 is undefined; the measure is instead the
mixture of its two closed classes, and its dimension is

    t0 = 1 / (q_A / t_A + q_B / t_B).

The bracket check compares codebook errors of the mixture with those of its
components (a heuristic check: best-found values are not certified optima).

Run:  python demos/04_mixtures.py
"""

from pathlib import Path

import numpy as np

from quantdim import analysis, geometry, io, model, spectral

here = Path(__file__).parent
pair = io.load_system(here / "systems" / "cantor_ring_pair.json").system
print(f"irreducible: {model.is_irreducible(pair)}")
classes = model.closed_classes(pair)
print(f"closed classes: {classes}")

dims = [spectral.s0(model.restrict(pair, c)).s0 for c in classes]
weights = [float(pair.q[np.asarray(c) - 1].sum()) for c in classes]
print(f"component dimensions {np.round(dims, 6)}, weights {weights}")
print(f"mixture dimension t0 = {analysis.mixture_dimension(dims, weights):.12f}")

U = np.full((2, 2), 0.5)
t1, t2, t0 = analysis.reducible_example(U, U, pair.C, pair.q)
print(f"block example: t1 = {t1:.6f}, t2 = {t2:.6f}, t0 = {t0:.6f}")

real = geometry.equal_gap(pair)
print("\n n   passed  lower margin  upper margin")
for n in (1, 4, 8, 16):
    chk = analysis.mixture_bracket_check(real, pair, n)
    upper = "   (n/2 = 0)" if chk.upper_margin is None else f"{chk.upper_margin:+.4f}"
    print(f"{n:2d}  {chk.passed!s:6s}  {chk.lower_margin:+.4f}       {upper}")
