"""
Reading the quantization dimension off certified codebook errors.

For the stopping-cut codebooks the certified error ehat_hi decreases
linearly in log psi_j; the slope is -1/s0.  A few rounds of local search
lower every error by about the same amount, which leaves the slope intact.

Run:  python demos/03_dimension_from_codebooks.py      (about a minute)
"""

import math

import numpy as np

from quantdim import geometry, model, quantizer, spectral

for name in ("cantor2", "ring3"):
    system = getattr(model, name)()
    real = geometry.equal_gap(system)
    s0 = spectral.s0(system).s0
    rows = quantizer.q_sequence(real, system, s0, j_max=10, iterations=3, j_min=4)
    x = np.array([math.log(r.psi) for r in rows])
    y = np.array([r.ehat_hi for r in rows])
    slope = np.polyfit(x, y, 1)[0]
    print(f"\n{name}: s0 = {s0:.6f}, expected slope {-1 / s0:.4f}")
    print(" j    psi_j   ehat_hi      best-found    Q")
    for r in rows:
        print(f"{r.j:2d}  {r.psi:7d}  {r.ehat_hi:+.6f}   {r.ehat_bestfound:+.6f}    {r.Q:+.4f}")
    print(f"least-squares slope {slope:.4f}  ->  dimension estimate {-1 / slope:.4f}")
