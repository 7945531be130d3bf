import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from adar.diagnostics import hill, information_criteria, portmanteau, simulate_portmanteau_null
from adar.errors import ADARError, ParameterError
from adar.fitting import fit
from adar.inference import estimate
from adar.likelihood import QuasiLikelihood
from adar.model import ModelSpec, ParamVector, SeriesFrame, simulate
from adar.weights import WeightScheme, compute_weights


def fitted(spec, frame, scheme="hv", scale=1.0):
    w = compute_weights(WeightScheme(scheme), frame, m=spec.m) * scale
    return estimate(QuasiLikelihood(frame, spec, w))


@pytest.fixture(scope="module")
def interior():
    spec = ModelSpec(1, 1)
    frame = simulate(spec, ParamVector(0.0, [0.5], 1.0, [0.6]), n=3000, seed=8)
    return fitted(spec, frame)


def test_report_invariants(interior):
    rep = portmanteau(interior, M=6)
    d = len(interior.free)
    assert rep.V.shape == (12, 12 + d)
    assert_allclose(rep.V[:, :12], np.eye(12))
    assert np.all(np.abs(rep.rho) <= 1) and np.all(np.abs(rep.r) <= 1)
    assert rep.QM >= 0 and rep.dof == 12
    assert rep.method == "chi-square"
    assert 0 <= rep.pvalue <= 1
    assert set(rep.to_dict()) >= {"M", "rho", "r", "QM", "dof", "pvalue", "method"}


def test_weight_scale_invariance(interior):
    lik = interior.lik
    lik2 = QuasiLikelihood(lik.frame, lik.spec, 3.7 * lik.w)
    est2 = estimate(lik2, fit_result=interior.fit)
    a = portmanteau(interior, M=6).QM
    b = portmanteau(est2, M=6).QM
    assert_allclose(b, a, rtol=1e-8)


def test_free_cone_null_is_chi_square(interior):
    rep = portmanteau(interior, M=3)
    sample, thr = simulate_portmanteau_null(rep.V, rep.G, rep.J, rep.halfline, N=20_000, seed=2)
    assert not rep.halfline.any()
    assert stats.kstest(sample, stats.chi2(6).cdf).pvalue > 0.01
    assert abs(thr[0.05] - stats.chi2.ppf(0.95, 6)) < 0.35


def test_boundary_null_threshold_not_below_chi_square():
    # projecting the estimator block removes part of the variance-reducing estimation effect
    spec = ModelSpec(1, 2)
    frame = simulate(spec, ParamVector(0.0, [0.5], 1.0, [0.1, 0.0]), n=3000, seed=9)
    est = fitted(spec, frame)
    rep = portmanteau(est, M=6, N=20_000, seed=1)
    assert rep.method == "simulated-boundary"
    assert rep.halfline.any()
    assert rep.thresholds[0.05] >= stats.chi2.ppf(0.95, 12) - 0.35
    again = portmanteau(est, M=6, N=20_000, seed=1)
    assert again.pvalue == rep.pvalue and again.thresholds == rep.thresholds


def test_estimation_effect_sign():
    # Var(sqrt(n) rho_1) across replications must match diag(V G V'); the
    # opposite sign on the estimator block predicts a value several times larger
    spec = ModelSpec(1, 1)
    theta = ParamVector(0.0, [0.5], 1.0, [0.6])
    x, pred = [], []
    for r in range(150):
        est = fitted(spec, simulate(spec, theta, n=2000, seed=9000 + r))
        rep = portmanteau(est, M=1, simulate_null=False)
        x.append(np.sqrt(est.n) * rep.rho[0])
        pred.append((rep.V @ rep.G @ rep.V.T)[0, 0])
    emp, pred = np.var(x), np.mean(pred)
    assert pred < 0.4
    assert abs(emp - pred) < 0.35 * pred


def test_forced_simulation(interior):
    rep = portmanteau(interior, M=6, simulate_null=True, N=5000, seed=3)
    assert rep.method == "simulated-boundary" and rep.N == 5000


def test_misspecified_fit_rejects():
    frame = simulate(ModelSpec(2, 3), ParamVector(0.0, [0.5, -0.3], 1.0, [0.1, 0.0, 0.0]), n=2000, seed=4)
    spec = ModelSpec(1, 1)
    est = fitted(spec, SeriesFrame.from_series(frame.full, 1))
    assert portmanteau(est, M=6, simulate_null=False).pvalue < 0.01


def test_white_noise_bartlett():
    rng = np.random.default_rng(0)
    reps, n = 400, 500
    spec = ModelSpec(0, 0)
    rho1 = []
    for r in range(reps):
        frame = SeriesFrame.from_series(rng.standard_normal(n + 1), 1)
        lik = QuasiLikelihood(frame, spec)
        est = estimate(lik, fit_result=fit(lik, n_starts=1))
        rho1.append(portmanteau(est, M=1).rho[0])
    rho1 = np.array(rho1)
    assert abs(rho1.mean()) < 4 / np.sqrt(n * reps)
    assert 0.8 / n < rho1.var() < 1.2 / n


def test_bad_lag_count(interior):
    with pytest.raises(ParameterError):
        portmanteau(interior, M=0)


def test_hill_pareto():
    rng = np.random.default_rng(1)
    x = rng.pareto(1.5, 100_000) + 1.0
    assert abs(hill(x, 1000)["H2k"] - 1.5) < 0.15
    assert abs(hill(-x, 1000)["H1k"] - 1.5) < 0.15


def test_hill_sign_flip(rng):
    x = rng.standard_t(3, 5000)
    a, b = hill(x, 200), hill(-x, 200)
    assert_allclose(a["H1k"], b["H2k"])
    assert_allclose(a["H2k"], b["H1k"])


def test_hill_errors():
    with pytest.raises(ADARError, match="diverges"):
        hill(np.full(100, 2.0), 10)
    with pytest.raises(ADARError, match="not positive"):
        hill(np.r_[np.zeros(20), np.arange(1.0, 81.0)], 10)
    with pytest.raises(ParameterError):
        hill([1.0, 2.0], 2)


def test_information_criteria_pinning():
    spec_big, spec_small = ModelSpec(1, 2), ModelSpec(1, 1)
    frame = simulate(spec_big, ParamVector(0.0, [0.5], 1.0, [0.3, 0.0]), n=1500, seed=3)
    w = compute_weights(WeightScheme("hv"), frame)
    small = fit(QuasiLikelihood(frame, spec_small, w))
    pinned = fit(QuasiLikelihood(frame, spec_big, w), fixed_zero=(4,))
    big = fit(QuasiLikelihood(frame, spec_big, w))
    a, b = information_criteria(small), information_criteria(pinned)
    assert_allclose([a["aic"], a["bic"]], [b["aic"], b["bic"]], rtol=1e-9)
    assert 2 * big.n * big.F_value <= 2 * small.n * small.F_value + 1e-8
    c = information_criteria(big)
    assert c["k"] == a["k"] + 1
    assert_allclose(c["bic"] - c["aic"], c["k"] * (np.log(big.n) - 2))


def test_aic_prefers_true_order():
    true, over = ModelSpec(1, 1), ModelSpec(2, 3)
    theta = ParamVector(0.0, [0.5], 1.0, [0.3])
    wins = 0
    reps = 200
    for r in range(reps):
        data = simulate(true, theta, n=2003, seed=500 + r).full
        frame = SeriesFrame.from_series(data, 3)
        w = compute_weights(WeightScheme("hv", m=3), frame)
        a = information_criteria(fit(QuasiLikelihood(frame, true, w), n_starts=2))["aic"]
        b = information_criteria(fit(QuasiLikelihood(frame, over, w), n_starts=2))["aic"]
        wins += a < b
    assert wins >= 0.8 * reps
