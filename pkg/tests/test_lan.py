import io
import json

import numpy as np
import pytest

from periodic_lan import fisher, lan, sde
from periodic_lan.errors import InvalidParameter, S7Violation

F_SINE = np.array([[0.5, 0.0], [0.0, 2 * np.pi**2 / 3]])


def models():
    return {
        "white_noise": sde.white_noise_model(),
        "ou": sde.ou_model(1.0, 0.8, 0.3),
        "wobbly": sde.DiffusionSpec(sde.MeanReverting(0.5), sde.BoundedPerturbation(1.0, -0.4), 1.0),
        "piecewise": sde.DiffusionSpec(
            sde.PiecewiseAffine([0.0], [-1.0, -2.0], [0.5, 0.5]), sde.ConstantSigma(1.3), -0.5
        ),
    }


def test_local_scale():
    scale = lan.LocalScale(100, 2)
    np.testing.assert_array_equal(scale.diag, [0.1, 0.1, 1e-3])
    theta_n, T_n = scale.localize([1.0, 2.0], 1.5, [1.0, -2.0, 3.0])
    np.testing.assert_allclose(theta_n, [1.1, 1.8])
    assert T_n == pytest.approx(1.503)
    with pytest.raises(InvalidParameter):
        lan.LocalScale(0, 1)
    with pytest.raises(InvalidParameter):
        scale.localize([1.0, 2.0], 1.5, [1.0, 2.0])


def test_truth_has_zero_likelihood_ratio(sine, ou):
    path = sde.simulate_path(ou, sine, [1.0], 1.0, 20.0, 1e-3, seed=0)
    assert lan.log_likelihood_ratio_sim(path, sine, ([1.0], 1.0)) == 0.0
    assert lan.log_likelihood_ratio_obs(path, ou, sine, ([1.0], 1.0), ([1.0], 1.0)) == 0.0
    assert lan.log_likelihood_ratio_obs(path, ou, sine, ([1.3], 0.9), ([1.3], 0.9)) == 0.0


def test_rejects_bad_candidate(sine, ou):
    path = sde.simulate_path(ou, sine, [1.0], 1.0, 2.0, 1e-2, seed=0)
    with pytest.raises(InvalidParameter):
        lan.log_likelihood_ratio_sim(path, sine, ([1.0], 0.0))
    with pytest.raises(InvalidParameter):
        lan.log_likelihood_ratio_obs(path, ou, sine, ([1.0], 1.0), ([1.0], -1.0))


def test_mean_likelihood_ratio_matches_lan(sine, white_noise):
    n, reps = 100, 500
    candidate = ([1.0 + n**-0.5], 1.0)
    lam = np.array(
        [
            lan.log_likelihood_ratio_sim(sde.simulate_path(white_noise, sine, [1.0], 1.0, n, 1e-3, seed=3, replication=r), sine, candidate)
            for r in range(reps)
        ]
    )
    se = lam.std(ddof=1) / np.sqrt(reps)
    assert abs(lam.mean() + 0.25) <= 3 * se


def test_antisymmetry(sine, wobbly_sigma_ou):
    path = sde.simulate_path(wobbly_sigma_ou, sine, [1.0], 1.0, 30.0, 1e-3, seed=1)
    up = lan.log_likelihood_ratio_sim(path, sine, ([1.3], 1.0))
    down = lan.log_likelihood_ratio_sim(path, sine, ([0.7], 1.0))
    s = np.arange(path.n_steps) * path.dt
    z = 0.3 * np.sin(2 * np.pi * s) / wobbly_sigma_ou.sigma(path.xi[:-1])
    assert up + down == pytest.approx(-np.dot(z, z) * path.dt, rel=1e-12)


def test_likelihood_ratio_cocycle(sine, ou):
    path = sde.simulate_path(ou, sine, [1.0], 1.0, 30.0, 1e-3, seed=2)
    a, b, c = ([1.0], 1.0), ([1.2], 1.01), ([0.9], 0.98)
    ab = lan.log_likelihood_ratio_obs(path, ou, sine, a, b)
    bc = lan.log_likelihood_ratio_obs(path, ou, sine, b, c)
    ac = lan.log_likelihood_ratio_obs(path, ou, sine, a, c)
    ba = lan.log_likelihood_ratio_obs(path, ou, sine, b, a)
    assert ab + bc == pytest.approx(ac, abs=1e-9)
    assert ab + ba == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("name", list(models()))
def test_observed_matches_simulated(name, family):
    model = models()[name]
    spec, theta = family
    path = sde.simulate_path(model, spec, theta, 1.1, 40.0, 1e-3, seed=5)
    for candidate in ((theta * 1.05, 1.1), (theta, 1.102), (theta - 0.1, 1.09)):
        sim = lan.log_likelihood_ratio_sim(path, spec, candidate)
        obs = lan.log_likelihood_ratio_obs(path, model, spec, (theta, 1.1), candidate)
        assert abs(obs - sim) <= 1e-10 * (1 + abs(sim))


def test_score_vanishes_without_noise(sine, ou):
    path = sde.simulate_path(ou, sine, [1.0], 1.0, 50.0, 1e-2, dW=np.zeros(5000))
    np.testing.assert_array_equal(lan.score(path, sine, 50.0), [0.0, 0.0])


def test_score_needs_horizon(sine, ou):
    path = sde.simulate_path(ou, sine, [1.0], 1.0, 5.0, 1e-2, seed=0)
    with pytest.raises(InvalidParameter):
        lan.score(path, sine, 6.0)


def test_score_distribution(sine, white_noise):
    report = lan.lan_report(white_noise, sine, [1.0], 1.0, [1.0, 1.0], 200, 1000, dt=1e-2, seed=8)
    assert report.F_ref.provenance == "closed_form"
    np.testing.assert_allclose(report.F_ref.F, F_SINE, atol=1e-12)
    assert report.tests["covariance_rel_error"] < 0.15
    assert all(abs(z) < 3 for z in report.tests["score_mean_z"])
    # the report's scores match the standalone score function path by path
    path = sde.simulate_path(white_noise, sine, [1.0], 1.0, 200, 1e-2, seed=8, replication=17)
    np.testing.assert_allclose(report.scores[17], lan.score(path, sine, 200), rtol=1e-10, atol=1e-12)


def test_lan_report_requires_S7(sine, ou):
    with pytest.raises(S7Violation):
        lan.lan_report(ou, sine, [0.0], 1.0, [1.0, 1.0], 10, 5, dt=1e-2)


def test_zero_direction_gives_zero_everything(sine, wobbly_sigma_ou):
    report = lan.lan_report(wobbly_sigma_ou, sine, [1.0], 1.0, 0.0, 20, 10, dt=1e-2, seed=1, reference_n=200)
    assert np.all(report.lam == 0) and np.all(report.quad == 0) and np.all(report.residual == 0)
    assert np.all(report.remainders == 0)


def test_remainder_shrinks_with_n(sine, ou):
    medians = [
        lan.lan_report(ou, sine, [1.0], 1.0, [1.0, 1.0], n, 300, dt=1e-2, seed=4).tests["residual_quantiles"]["0.5"]
        for n in (100, 400)
    ]
    assert medians[1] < medians[0]


@pytest.mark.parametrize("name", list(models()))
def test_decomposition_identity(name, family):
    model = models()[name]
    spec, theta = family
    h = np.linspace(1.0, -1.0, spec.d + 1) + 0.5
    path = sde.simulate_path(model, spec, theta, 1.2, 60.0, 1e-3, seed=6)
    t = lan.lan_terms(path, spec, h, 60.0)
    assert abs(t.lam - t.expansion(h)) <= 1e-8 * (1 + abs(t.lam))
    assert t.R == pytest.approx(t.R_integral, abs=1e-8 * (1 + abs(t.lam)))
    theta_n, T_n = lan.LocalScale(60.0, spec.d).localize(theta, 1.2, h)
    assert t.lam == pytest.approx(lan.log_likelihood_ratio_sim(path, spec, (theta_n, T_n)), abs=1e-10 * (1 + abs(t.lam)))
    np.testing.assert_allclose(t.delta, lan.score(path, spec, 60.0), rtol=1e-10, atol=1e-12)
    F_path = fisher.fisher_path_estimate(path, spec, theta, 1.2, 1.0, 60.0).F
    np.testing.assert_allclose(t.F_n, F_path, rtol=1e-10, atol=1e-12 * np.abs(F_path).max())


def test_remainder_inequalities(sine, wobbly_sigma_ou):
    h = np.array([2.0, -3.0])
    for r in range(20):
        path = sde.simulate_path(wobbly_sigma_ou, sine, [1.0], 1.0, 50.0, 1e-2, seed=9, replication=r)
        t = lan.lan_terms(path, sine, h, 50.0)
        assert t.U >= 0
        assert abs(t.V) <= np.sqrt(t.U * (h @ t.F_n @ h)) * (1 + 1e-12)


def test_mean_U_decreases_with_n(sine, wobbly_sigma_ou):
    means = [
        lan.lan_report(wobbly_sigma_ou, sine, [1.0], 1.0, [1.0, 1.0], n, 40, dt=1e-2, seed=2, reference_n=400).tests["mean_U"]
        for n in (100, 200, 400)
    ]
    assert means[0] > means[1] > means[2]


def test_workers_do_not_change_results(sine, ou):
    a = lan.lan_report(ou, sine, [1.0], 1.0, [1.0, 1.0], 20, 12, dt=1e-2, seed=3, workers=1)
    b = lan.lan_report(ou, sine, [1.0], 1.0, [1.0, 1.0], 20, 12, dt=1e-2, seed=3, workers=4)
    np.testing.assert_array_equal(a.scores, b.scores)
    np.testing.assert_array_equal(a.lam, b.lam)


def test_normality_across_seeds(sine, ou):
    """KS at level 0.01 over 5 seeds, and covariance error smaller at n = 400 than at n = 100."""
    ks_failures, cov = 0, {100: [], 400: []}
    for seed in range(5):
        for n in (100, 400):
            report = lan.lan_report(ou, sine, [1.0], 1.0, [1.0, 1.0], n, 1000, dt=1e-2, seed=seed)
            cov[n].append(report.tests["covariance_rel_error"])
            if n == 400:
                ks_failures += sum(not c["passed"] for c in report.tests["ks"])
    assert ks_failures <= 2
    assert np.mean(cov[400]) < np.mean(cov[100])


def test_report_outputs(sine, ou):
    report = lan.lan_report(ou, sine, [1.0], 1.0, [1.0, 0.5], 10, 4, dt=1e-2, seed=0)
    buf = io.StringIO()
    report.write_csv(buf)
    rows = buf.getvalue().strip().splitlines()
    assert rows[0] == "replication,score_theta1,score_T,lambda,quad,residual,R,R_integral,U,V"
    assert len(rows) == 5
    out = io.StringIO()
    report.write_json(out, metadata={"generated_at": "x"})
    payload = json.loads(out.getvalue())
    assert payload["replications"] == 4 and payload["metadata"] == {"generated_at": "x"}
    assert set(payload["tests"]["residual_quantiles"]) == {"0.5", "0.9", "0.99"}
