"""
Joint estimation of amplitude and period, and the two convergence rates.

The amplitude error shrinks like n^-1/2 while the period error shrinks like
n^-3/2. This takes a couple of minutes with the default settings.

    python demos/04_joint_mle_rates.py [replications]
"""

import sys

import numpy as np

from periodic_lan import estimator, sde, signals

spec = signals.sine_signal()
model = sde.ou_model(1.0, 1.0, 0.0)

path = sde.simulate_path(model, spec, [1.0], 1.0, 200.0, 1e-2, seed=3)
est = estimator.profile_mle(path, model, spec, T_bracket=(0.95, 1.05))
print(f"one path, n = 200: theta_hat = {est.theta_hat[0]:.4f}, T_hat = {est.T_hat:.6f}")
print(f"Fisher standard errors: {est.stderr}")
best = np.argmax(est.profile_curve[:, 1])
print(f"profile evaluated on {len(est.profile_curve)} grid points, best grid T = {est.profile_curve[best, 0]:.5f}")

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 100
table = estimator.rate_experiment(model, spec, [1.0], 1.0, [50, 100, 200, 400], reps, seed=7)
print(f"\n{reps} replications per n")
print("    n     sd(theta)       sd(T)")
for n, row in zip(table.n_list, table.sd):
    print(f"{n:5.0f}   {row[0]:.3e}   {row[1]:.3e}")
print(f"log-log slopes: theta {table.slopes['theta1']:.3f} (expect -0.5), T {table.slopes['T']:.3f} (expect -1.5)")
