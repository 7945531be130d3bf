import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from adar import kernels
from adar._fallback import simulate_recursion as py_recursion
from adar.errors import ExplosionError, ParameterError
from adar.model import (
    InnovationLaw,
    ModelSpec,
    ParamVector,
    SeriesFrame,
    law_moment,
    make_rng,
    moment_region_dar11,
    sample_innovation,
    simulate,
)


def test_spec_dimensions():
    s = ModelSpec(2, 3)
    assert (s.m, s.d) == (3, 7)
    assert s.names() == ["u", "phi1", "phi2", "omega", "a1", "a2", "a3"]
    assert s.alpha_index(1) == 4
    assert s.phi_index(2) == 2
    with pytest.raises(ParameterError):
        ModelSpec(-1, 0)


def test_param_vector_validation():
    with pytest.raises(ParameterError):
        ParamVector(0.0, [0.5], 0.0, [0.1])
    with pytest.raises(ParameterError):
        ParamVector(0.0, [0.5], 1.0, [-0.1])
    th = ParamVector(0.1, [0.5, -0.3], 2.0, [0.1, 0.0])
    assert_array_equal(th.to_array(), [0.1, 0.5, -0.3, 2.0, 0.1, 0.0])
    assert ParamVector.from_array(th.to_array(), th.spec) == th


def test_json_round_trips():
    spec = ModelSpec(2, 7)
    th = ParamVector(0.0, [0.5, -0.3], 1.0, [0.1, 0.2])
    law = InnovationLaw.skewed_t(10, 2)
    assert ModelSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
    assert ParamVector.from_dict(json.loads(json.dumps(th.to_dict()))) == th
    assert InnovationLaw.from_dict(json.loads(json.dumps(law.to_dict()))) == law
    assert set(th.to_dict()) >= {"u", "phi", "omega", "alpha"}


@pytest.mark.parametrize("text,kind", [("normal", "standard-normal"), ("st10", "standardized-student-t"),
                                       ("t7", "standardized-student-t"), ("sst10,2", "standardized-skewed-student-t")])
def test_law_parse(text, kind):
    law = InnovationLaw.parse(text)
    assert law.kind == kind
    assert InnovationLaw.parse(law.label) == law


def test_law_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        InnovationLaw.student_t(4)
    with pytest.raises(ParameterError):
        InnovationLaw.skewed_t(10, 0)
    with pytest.raises(ParameterError):
        InnovationLaw.parse("cauchy")


@pytest.mark.parametrize("law", [InnovationLaw.normal(), InnovationLaw.student_t(10), InnovationLaw.skewed_t(10, 2)])
def test_innovations_standardized(law):
    x = sample_innovation(law, 1_000_000, seed=5)
    # 5 standard errors of the mean and the variance
    se_mean = 1 / math.sqrt(x.size)
    se_var = math.sqrt((law_moment(law, 4) - 1) / x.size)
    assert abs(x.mean()) < 5 * se_mean
    assert abs(x.var() - 1) < 5 * se_var


def test_student_t_variance_band():
    x = sample_innovation(InnovationLaw.student_t(10), 1_000_000, seed=1)
    assert 0.99 <= x.var() <= 1.01


def test_normal_fourth_moment():
    x = sample_innovation(InnovationLaw.normal(), 1_000_000, seed=2)
    assert abs(np.mean(x**4) - 3) < 0.05


def test_skewed_t_with_unit_xi_is_symmetric_t():
    law = InnovationLaw.skewed_t(10, 1.0)
    ob, rho = law.skew_constants()
    assert ob == 0.0 and rho == 1.0
    x = sample_innovation(law, 50_000, seed=3)
    scale = math.sqrt(8 / 10)
    assert stats.kstest(x / scale, stats.t(10).cdf).pvalue > 0.01


def test_skewed_t_moments_match_formula():
    law = InnovationLaw.skewed_t(10, 2)
    x = sample_innovation(law, 2_000_000, seed=4)
    assert_allclose(np.mean(x**3), law_moment(law, 3), atol=0.05)
    assert law_moment(law, 3) > 0


def test_skewed_t_density_integrates_to_sampler():
    # density with the location shift on both branches at -omega_bar/rho
    law = InnovationLaw.skewed_t(10, 2)
    ob, rho = law.skew_constants()
    g = stats.t(10, scale=math.sqrt(8 / 10)).pdf
    xi = law.xi

    def f(x):
        z = rho * x + ob
        return 2 * rho / (xi + 1 / xi) * np.where(z < 0, g(xi * z), g(z / xi))

    grid = np.linspace(-80, 80, 1_600_001)
    dens = f(grid)
    assert_allclose(np.trapezoid(dens, grid), 1.0, atol=1e-6)
    assert_allclose(np.trapezoid(grid * dens, grid), 0.0, atol=1e-6)
    assert_allclose(np.trapezoid(grid**2 * dens, grid), 1.0, atol=1e-5)
    x = sample_innovation(law, 20_000, seed=9)
    cdf = np.cumsum(dens) * (grid[1] - grid[0])
    assert stats.kstest(x, lambda v: np.interp(v, grid, cdf)).pvalue > 0.01


def test_degenerate_model_returns_innovations():
    spec = ModelSpec(0, 0)
    th = ParamVector(0.0, [], 1.0, [])
    fr = simulate(spec, th, n=500, burn_in=100, seed=8)
    eta = sample_innovation(InnovationLaw.normal(), 600, seed=8)
    assert_array_equal(fr.data, eta[100:])


def test_degenerate_model_moments():
    fr = simulate(ModelSpec(0, 0), ParamVector(0.0, [], 1.0, []), n=200_000, seed=1)
    assert abs(fr.data.mean()) < 0.01
    assert abs(fr.data.var() - 1) < 0.02


def test_simulate_reproducible_and_shaped():
    spec = ModelSpec(2, 3)
    th = ParamVector(0.0, [0.5, -0.3], 1.0, [0.1, 0.05, 0.0])
    a = simulate(spec, th, InnovationLaw.student_t(10), n=300, seed=17)
    b = simulate(spec, th, InnovationLaw.student_t(10), n=300, seed=17)
    assert a == b
    assert a.n == 300 and a.m == 3
    c = simulate(spec, th, InnovationLaw.student_t(10), n=300, seed=18)
    assert not a == c


def test_simulate_explosion_names_index():
    spec = ModelSpec(1, 0)
    with pytest.raises(ExplosionError) as info:
        simulate(spec, ParamVector(0.0, [3.0], 1.0, []), n=1000, seed=0)
    assert info.value.index is not None and info.value.index > 0
    assert "index" in str(info.value)


def test_simulate_rejects_mismatched_spec():
    with pytest.raises(ParameterError):
        simulate(ModelSpec(2, 1), ParamVector(0.0, [0.5], 1.0, [0.1]))


def test_recursion_backends_agree():
    eta = make_rng(3).standard_normal(5000)
    args = (0.2, np.array([0.5, -0.3]), 1.0, np.array([0.1, 0.2, 0.05]), 1e150)
    y1, b1 = kernels.simulate_recursion(eta, *args)
    y2, b2 = py_recursion(eta, *args)
    assert b1 == b2 == -1
    assert_allclose(y1, y2, rtol=1e-13, atol=1e-13)


def test_residuals_invert_simulation():
    from adar.likelihood import QuasiLikelihood

    spec = ModelSpec(2, 2)
    th = ParamVector(0.1, [0.5, -0.3], 1.0, [0.2, 0.1])
    fr = simulate(spec, th, n=400, burn_in=50, seed=12)
    eta = sample_innovation(InnovationLaw.normal(), 50 + 2 + 400, seed=12)
    got, _ = QuasiLikelihood(fr, spec).residuals(th)
    assert_allclose(got, eta[52:], rtol=1e-10, atol=1e-12)


def test_frame_regressors():
    fr = SeriesFrame.from_series([1.0, 2.0, 3.0, 4.0, 5.0], 2)
    Y, X = fr.regressors(ModelSpec(2, 1))
    assert_array_equal(Y, [[1, 2, 1], [1, 3, 2], [1, 4, 3]])
    assert_array_equal(X, [[1, 4], [1, 9], [1, 16]])
    with pytest.raises(ParameterError):
        fr.regressors(ModelSpec(3, 0))
    with pytest.raises(ParameterError):
        SeriesFrame([1.0, np.nan])


def table_one_polys(phi, a):
    return (phi**2 + a, phi**4 + 6 * phi**2 * a + 3 * a**2,
            phi**6 + 15 * phi**4 * a + 45 * phi**2 * a**2 + 15 * a**3)


@pytest.mark.parametrize("phi,a", [(0.5, 0.1), (0.5, 0.6), (-0.9, 0.05), (0.0, 0.3)])
def test_gaussian_moments_match_table_one(phi, a):
    rep = moment_region_dar11(phi, a, mc_draws=1000)
    assert_allclose([rep.moments[k] for k in (2, 4, 6)], table_one_polys(phi, a), rtol=1e-12)


def test_table_one_sixth_moment_arithmetic():
    rep = moment_region_dar11(0.5, 0.1, mc_draws=100_000)
    assert_allclose(rep.moments[6], 0.236875, rtol=1e-12)
    assert (rep.strict_stationary, rep.m2, rep.m4, rep.m6) == (True, True, True, True)


def test_table_one_second_and_fourth():
    rep = moment_region_dar11(0.5, 0.6, mc_draws=100_000)
    assert_allclose(rep.moments[2], 0.85)
    assert_allclose(rep.moments[4], 2.0425)
    assert (rep.strict_stationary, rep.m2, rep.m4, rep.m6) == (True, True, False, False)


@pytest.mark.parametrize("law", [InnovationLaw.normal(), InnovationLaw.student_t(10)])
def test_region_origin_all_true(law):
    rep = moment_region_dar11(0.0, 0.0, law, mc_draws=10_000)
    assert rep.strict_stationary and rep.m2 and rep.m4 and rep.m6


def test_region_student_t_sixth_moment_needs_nu():
    rep = moment_region_dar11(0.1, 0.01, InnovationLaw.student_t(5), mc_draws=10_000)
    assert rep.m4 and not rep.m6


def test_lyapunov_inconclusive_flag():
    # phi=1, alpha=0 gives log|1| = 0 exactly
    rep = moment_region_dar11(1.0, 0.0, mc_draws=10_000)
    assert rep.lyapunov == 0.0


@settings(max_examples=40, deadline=None)
@given(phi=st.floats(-1.5, 1.5), a1=st.floats(0, 2), a2=st.floats(0, 2))
def test_region_monotone_in_alpha(phi, a1, a2):
    lo, hi = sorted((a1, a2))
    if moment_region_dar11(phi, hi, mc_draws=1000).m6:
        assert moment_region_dar11(phi, lo, mc_draws=1000).m6
