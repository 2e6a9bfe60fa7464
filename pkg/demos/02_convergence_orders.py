"""
How fast do s_k and t_j approach s0 for a non-uniform chain?

SKEW2 has P = [[3/4, 1/4], [1/2, 1/2]] and all ratios 1/2.  Its rows differ,
so the residuals x_k, y_k are non-zero, yet they stay bounded and the scaled
errors k |s_k - s0| and j |t_j - s0| settle to a constant.  The reports give
these constants as observed suprema only.

Run:  python demos/02_convergence_orders.py
"""

import numpy as np

from quantdim import analysis, model, spectral

skew = model.skew2()
sv = spectral.stationary_vector(skew)
print(f"stationary v = {sv.v}  (residual {sv.residual:.1e})")
print(f"s0 = {spectral.s0(skew).s0:.12f}")

rep = analysis.convergence_report(skew, None, j_max=10, k_max=40, quantize=False)

print("\n k   s_k            k|s_k - s0|   x_k           y_k")
for r in rep.k_rows[::4]:
    print(f"{r.k:2d}  {r.s_k:.10f}  {r.scaled_error:.6f}      {r.x_k:+.8f}  {r.y_k:+.8f}")

print("\n j   psi_j    t_j            j|t_j - s0|")
for r in rep.j_rows:
    print(f"{r.j:2d}  {r.psi:7d}  {r.t_j:.10f}  {r.scaled_error:.6f}")

print(f"\nobserved sup k|s_k - s0| = {rep.empirical_C_s:.6f}")
print(f"observed sup j|t_j - s0| = {rep.empirical_C_t:.6f}")
for name, rows, factor in (("scaled_error", "k", 2.0), ("scaled_error", "j", 2.0),
                           ("x_k", "k", 1.1), ("y_k", "k", 1.1)):
    ok = analysis.stabilizes(rep.column(name, rows), factor=factor)
    print(f"{name:>12s} ({rows}) stabilizes with factor {factor}: {ok}")

# rows of different states approach the same limit
a, b = spectral.conditional_s(skew, 1, 40), spectral.conditional_s(skew, 2, 40)
print(f"\nmax_k k |s_k(1) - s_k(2)| = {np.max(np.arange(2, 41) * np.abs(a - b)):.6f}")
