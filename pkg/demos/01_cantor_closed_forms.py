"""
The middle-thirds Cantor measure as a two-state Markov system.

Every transition has probability 1/2 and ratio 1/3, so each quantity has a
closed form we can hold the numerics against:

    s0      = log 2 / log 3
    s_k     = k / (k - 1) * s0              (all words of length k)
    psi_j   = 2^(j+2)                       (stopping cut at p_lo^j)
    t_j     = (j + 2) / (j + 1) * s0
    sum m log c over the cut = -(j + 1) log 3

Run:  python demos/01_cantor_closed_forms.py
"""

import math

import numpy as np

from quantdim import geometry, model, quantizer, spectral, words

np.set_printoptions(precision=6, suppress=True)

cantor = model.cantor2()
s0 = spectral.s0(cantor).s0
print(f"s0 = {s0:.15f}   (log2/log3 = {math.log(2) / math.log(3):.15f})")

# ── word-length sequence s_k ──────────────────────────────────────────────────
table = spectral.sequence_table(cantor, 12)
print("\n k    s_k              k/(k-1) s0")
for k, s in zip(table.k, table.s):
    print(f"{k:2d}  {s:.15f}  {k / (k - 1) * s0:.15f}")

# ── stopping cuts ─────────────────────────────────────────────────────────────
print("\n j   psi_j   t_j              sum m log c     -(j+1) log 3")
for j in range(1, 9):
    s = words.lambda_summary(cantor, j)
    print(f"{j:2d}  {s.psi:6d}  {s.t_j:.15f}  {s.sum_m_log_c:+.10f}  {-(j + 1) * math.log(3):+.10f}")

# ── one codebook point per cut cylinder ───────────────────────────────────────
# d(x, midpoint) <= |J_tau| on each cylinder, so the certified objective can
# never exceed sum m log c; Q = log(psi)/s0 + ehat therefore stays below log 3.
real = geometry.equal_gap(cantor)
print("\n j   psi_j   ehat_hi (certified)   ceiling         Q")
for j in range(1, 7):
    g = quantizer.gamma_upper(real, cantor, j)
    print(f"{j:2d}  {g.n:6d}  {g.objective.hi:+.8f}          {g.extra['sum_m_log_c']:+.8f}  "
          f"{g.q_value:+.6f}")
print(f"\nlog 3 = {math.log(3):.6f}")
