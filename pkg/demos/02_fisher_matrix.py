"""
Closed-form Fisher matrix of the sine signal, its time scaling, the
invertibility check, and the empirical version along one path.

    python demos/02_fisher_matrix.py
"""

import sys

import numpy as np

from periodic_lan import fisher, sde, signals

spec = signals.sine_signal()
fm = fisher.fisher_matrix(spec, [1.0], T=1.0, t=1.0)
print("F(1) =")
print(fm.F)
print(f"corner 2 pi^2 / 3 = {2 * np.pi**2 / 3:.6f}")
print(f"invertibility of F'(1): {fisher.check_S7(fm)}")

# shape block grows like t, cross terms like t^2, the period corner like t^3
F2 = fisher.fisher_matrix(spec, [1.0], 1.0, t=2.0).F
print("\nF(2) / F(1) ratios:", (F2[0, 0] / fm.F[0, 0], F2[1, 1] / fm.F[1, 1]))

# Zero amplitude removes all information about the period.
print("theta = 0 passes the check:", fisher.check_S7(fisher.fisher_matrix(spec, [0.0], 1.0)))

# A sine and a cosine at the same frequency: S' is a multiple of the second basis direction.
sincos = signals.SignalSpec.linear_basis([{1: (np.sqrt(2), 0.0)}, {1: (0.0, np.sqrt(2))}])
print("sin/cos basis at theta = (1, 0) passes:", fisher.check_S7(fisher.fisher_matrix(sincos, [1.0, 0.0], 1.0)))

path = sde.simulate_path(sde.white_noise_model(), spec, [1.0], 1.0, 1000.0, 1e-3, seed=0)
est = fisher.fisher_path_estimate(path, spec, [1.0], 1.0, t=1.0, n=1000)
print("\nempirical F_n(1) at n = 1000:")
print(est.F)

print("\nas CSV:")
fisher.write_csv(fm, sys.stdout)
