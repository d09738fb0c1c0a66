"""
Known period, orthonormal sine basis, Ornstein-Uhlenbeck noise: the rescaled
estimation error sqrt(n)(theta_hat - theta) coincides with the score.

    python demos/05_ou_central_statistic.py
"""

import numpy as np

from periodic_lan import estimator, fisher, lan, sde, signals

d, n = 3, 400.0
spec = signals.orthonormal_sine_basis(d)
model = sde.ou_model(1.0, 1.0, 0.0)
theta = np.array([1.0, 0.5, -0.25])

# the shape block of the Fisher matrix is the identity for an orthonormal basis
print("F_theta,theta =", np.diag(fisher.fisher_matrix(spec, theta, 1.0).F[:d, :d]))

for r in range(5):
    path = sde.simulate_path(model, spec, theta, 1.0, n, 1e-3, seed=31, replication=r)
    est = estimator.profile_mle(path, model, spec, T_bracket=(1.0, 1.0))
    z = np.sqrt(n) * (est.theta_hat - theta)
    delta = lan.score(path, spec, n)[:d]
    print(f"path {r}: sqrt(n)(theta_hat - theta) = {np.round(z, 6)}   Delta = {np.round(delta, 6)}")
