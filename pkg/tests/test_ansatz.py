import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from egoe.ansatz import (
    PORTER_THOMAS_ENTROPY,
    AnsatzParams,
    FitError,
    StrengthFunctionFitter,
    ansatz_form,
    ansatz_variance,
    bw_form,
    fit_ansatz,
    gauss_form,
    gaussian_sinfo,
    gaussian_xi2,
    predict_sinfo,
    predict_xi2,
)
from egoe.observables import StrengthHistogram

EDGES = np.linspace(-3.0, 3.0, 52)


def histogram_from_samples(x) -> StrengthHistogram:
    counts, _ = np.histogram(x, EDGES)
    w = np.diff(EDGES)
    dens = counts / (counts.sum() * w)
    return StrengthHistogram(EDGES, dens, np.zeros_like(dens), (-0.1, 0.1), x.size, 1, counts.sum() / x.size)


def quad_total(f):
    return integrate.quad(f, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=500)[0]


def test_bw_values():
    assert bw_form(0.3, 0.3, 0.5) == pytest.approx(2 / (np.pi * 0.5))
    assert bw_form(1.0, 0.0, 2.0) == pytest.approx(1 / (2 * np.pi), rel=1e-12)
    assert bw_form(1.0, 0.0, 2.0) == pytest.approx(0.15915, abs=1e-5)
    x = np.linspace(0, 5, 11)
    np.testing.assert_allclose(bw_form(0.2 + x, 0.2, 0.7), bw_form(0.2 - x, 0.2, 0.7))
    # half width at half maximum
    assert bw_form(0.35, 0.0, 0.7) == pytest.approx(0.5 * bw_form(0.0, 0.0, 0.7))


def test_gauss_values():
    assert gauss_form(0.0, 0.0, 1.0) == pytest.approx(0.39894, abs=1e-5)
    assert gauss_form(1.0, 1.0, 2.5) == pytest.approx(1 / (2.5 * np.sqrt(2 * np.pi)))
    var = integrate.quad(lambda e: e * e * gauss_form(e, 0.0, 1.3), -np.inf, np.inf, epsabs=1e-12)[0]
    assert var == pytest.approx(1.3**2, abs=1e-6)
    flat = gauss_form(np.linspace(-0.1, 0.1, 5), 0.0, 1e4)
    assert np.ptp(flat) / flat.max() < 1e-9


@pytest.mark.parametrize(
    "f",
    [
        lambda e: bw_form(e, 0.3, 0.2),
        lambda e: bw_form(e, 0.0, 3.0),
        lambda e: gauss_form(e, -0.5, 0.4),
        lambda e: ansatz_form(e, center=0.1, scale=0.6, shape=1.0),
        lambda e: ansatz_form(e, center=0.1, scale=0.6, shape=2.5),
        lambda e: ansatz_form(e, center=0.0, scale=1.0, shape=40.0),
        lambda e: ansatz_form(e, center=0.0, scale=0.05, shape=1e4),
    ],
)
def test_forms_unit_normalized(f):
    assert quad_total(f) == pytest.approx(1.0, abs=1e-9)


def test_ansatz_shape_one_is_breit_wigner():
    e = np.linspace(-10, 10, 2001)
    a = ansatz_form(e, center=0.4, scale=0.3, shape=1.0)
    np.testing.assert_allclose(a, bw_form(e, 0.4, 0.6), rtol=0, atol=1e-12)
    # and through the general (non-special-cased) branch
    near = ansatz_form(e, center=0.4, scale=0.3, shape=1.0 + 1e-13)
    assert np.max(np.abs(near - a)) < 1e-11


def test_ansatz_large_shape_is_gaussian():
    e = np.linspace(-4, 4, 8001)
    diff = ansatz_form(e, center=0.0, scale=1.0, shape=500.0) - gauss_form(e, 0.0, 1.0)
    assert np.max(np.abs(diff)) < 1e-3


def test_ansatz_variance_shape_three():
    p = AnsatzParams(0.0, 1.0, 3.0)
    var = integrate.quad(lambda e: e * e * ansatz_form(e, p), -np.inf, np.inf, epsabs=1e-10, limit=500)[0]
    assert var == pytest.approx(3.0, rel=1e-6)
    assert ansatz_variance(p) == 3.0


def test_ansatz_continuous_in_shape():
    e = np.linspace(-3, 3, 61)
    base = ansatz_form(e, center=0, scale=0.5, shape=7.0)
    assert np.max(np.abs(ansatz_form(e, center=0, scale=0.5, shape=7.0 + 1e-7) - base)) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 1e4), st.floats(0.01, 5.0), st.floats(-1.0, 1.0))
def test_ansatz_unimodal(shape, scale, center):
    x = np.linspace(0, 20 * scale, 400)
    right = ansatz_form(center + x, center=center, scale=scale, shape=shape)
    left = ansatz_form(center - x, center=center, scale=scale, shape=shape)
    assert np.all(np.diff(right) <= 1e-15 * right.max())
    np.testing.assert_allclose(left, right, rtol=1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        AnsatzParams(0.0, -1.0, 2.0)
    with pytest.raises(ValueError):
        AnsatzParams(0.0, 1.0, 0.5)
    assert AnsatzParams(0.0, 0.3, 1.0).bw_width == 0.6


def test_fit_recovers_student_t():
    rng = np.random.default_rng(7)
    x = 0.6 * rng.standard_t(4.0, size=100_000)
    p = fit_ansatz(histogram_from_samples(x))
    assert p.shape == pytest.approx(4.0, rel=0.25)
    assert p.scale == pytest.approx(0.6, rel=0.05)
    assert abs(p.center) < 0.02
    assert p.converged


def test_fit_breit_wigner_data():
    rng = np.random.default_rng(8)
    x = 0.25 * rng.standard_cauchy(size=100_000)
    p = fit_ansatz(histogram_from_samples(x))
    assert p.shape < 1.5
    assert p.bw_width == pytest.approx(0.5, rel=0.05)


def test_fit_gaussian_data_and_likelihood_loss():
    rng = np.random.default_rng(9)
    x = rng.normal(0.1, 0.7, size=100_000)
    h = histogram_from_samples(x)
    for loss in ("lsq", "likelihood"):
        p = fit_ansatz(h, loss=loss)
        assert p.shape > 30
        assert p.scale == pytest.approx(0.7, rel=0.03)
        assert p.center == pytest.approx(0.1, abs=0.02)


def test_fit_fixed_shape():
    rng = np.random.default_rng(10)
    h = histogram_from_samples(0.3 * rng.standard_cauchy(size=50_000))
    p = fit_ansatz(h, fixed_shape=1.0)
    assert p.shape == 1.0
    assert p.scale == pytest.approx(0.3, rel=0.05)
    assert 0 < p.scale_err < 0.05


def test_fit_degenerate_histogram():
    dens = np.zeros(51)
    dens[25] = 1 / np.diff(EDGES)[0]
    h = StrengthHistogram(EDGES, dens, np.zeros(51), (-0.1, 0.1), 1, 1, 1.0)
    with pytest.raises(FitError, match="degenerate"):
        fit_ansatz(h)
    dens = np.zeros(51)
    dens[20:30] = 1.0
    with pytest.raises(FitError, match="20 non-empty"):
        fit_ansatz(StrengthHistogram(EDGES, dens, np.zeros(51), (-0.1, 0.1), 1, 1, 1.0))


def test_fitter_estimator_api():
    rng = np.random.default_rng(11)
    h = histogram_from_samples(rng.normal(size=20_000))
    est = StrengthFunctionFitter(fixed_shape=None)
    with pytest.raises(NotFittedError):
        est.predict([0.0])
    est.fit(h.centers, h.density)
    assert est.predict([0.0])[0] == pytest.approx(0.3989, rel=0.05)
    assert est.score(h.centers, h.density) > 0.95
    assert clone(est).get_params()["loss"] == "lsq"


def test_porter_thomas_constant():
    # psi(3/2) + ln 2 = 2 - Euler gamma - ln 2
    assert PORTER_THOMAS_ENTROPY == pytest.approx(2 - np.euler_gamma - np.log(2), abs=1e-12)
    assert PORTER_THOMAS_ENTROPY == pytest.approx(0.72961, abs=5e-5)
    assert np.exp(-PORTER_THOMAS_ENTROPY) == pytest.approx(0.4821, abs=1e-4)


def test_structureless_limit():
    d = 924
    p = AnsatzParams(0.0, 1.0, 1e4)
    xi = predict_xi2(p, 1e-4, d, grid=[-0.1, 0.0, 0.1]).values
    np.testing.assert_allclose(xi, d / 3, rtol=0.01)
    s = predict_sinfo(p, 1e-4, d, grid=[0.0]).values[0]
    assert np.exp(s) == pytest.approx(np.exp(-PORTER_THOMAS_ENTROPY) * d, rel=0.01)
    assert np.exp(s) / d == pytest.approx(0.4822, abs=0.001)


@pytest.mark.parametrize("zeta_sq", [0.1, 0.3, 0.6])
def test_quadrature_matches_gaussian_closed_forms(zeta_sq):
    d = 924
    p = AnsatzParams(0.0, np.sqrt(1 - zeta_sq), 1e4)
    grid = np.array([-1.0, 0.0, 0.5, 1.5])
    np.testing.assert_allclose(predict_xi2(p, zeta_sq, d, grid=grid).values, gaussian_xi2(grid, zeta_sq, d), rtol=1e-3)
    np.testing.assert_allclose(predict_sinfo(p, zeta_sq, d, grid=grid).values, gaussian_sinfo(grid, zeta_sq, d), atol=1e-3)


def test_breit_wigner_prediction_narrow_limit():
    # narrow Lorentzian on Gaussian centroids: xi2 -> d * rho_c(e) * pi * Gamma / 3
    d, zeta_sq, gamma = 924, 0.95, 0.01
    p = AnsatzParams(0.0, gamma / 2, 1.0)
    rho_c = 1 / np.sqrt(2 * np.pi * zeta_sq)
    xi = predict_xi2(p, zeta_sq, d, grid=[0.0]).values[0]
    assert xi == pytest.approx(d * rho_c * np.pi * gamma / 3, rel=0.02)


def test_prediction_requires_valid_zeta():
    with pytest.raises(ValueError):
        predict_xi2(AnsatzParams(0.0, 1.0, 4.0), 1.0, 100)


def test_unrenormalized_density_option():
    p = AnsatzParams(0.0, np.sqrt(0.7), 1e4)
    a = predict_xi2(p, 0.3, 500, grid=[0.0]).values[0]
    b = predict_xi2(p, 0.3, 500, grid=[0.0], renormalize=False).values[0]
    # the model strength convolves to exactly the standard Gaussian density
    assert a == pytest.approx(b, rel=1e-4)
