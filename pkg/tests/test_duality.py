import numpy as np
import pytest

from egoe.duality import (
    CrossingError,
    DualityScan,
    PowerLawScaling,
    crossing_from_curves,
    find_crossing,
    m_scan_space,
    merge_scans,
    run_scan,
    scaling_fit,
    sign_changes,
)
from egoe.fock import SpaceSpec

GRID = np.geomspace(0.05, 1.0, 12)


def synthetic_scan(lambdas, weak, strong, err=0.0):
    z = np.zeros_like(lambdas)
    means = {"xi2_weak": weak, "xi2_strong": strong, "s_weak": weak, "s_strong": strong}
    stderr = {k: z + err for k in means}
    return DualityScan(lambdas, means, stderr, {"xi2": z + err, "s": z + err}, (0, 0), 1)


def test_synthetic_log_linear_crossing():
    lam = np.geomspace(0.1, 2.0, 15)
    scan = synthetic_scan(lam, np.log(lam) + 1.0, -np.log(lam))
    c = find_crossing(scan)
    assert c.lambda_d == pytest.approx(np.exp(-0.5), rel=1e-12)
    assert c.lambda_d == pytest.approx(0.6065, abs=1e-4)
    assert c.err == 0.0
    assert crossing_from_curves(lam, np.log(lam) + 1.0, -np.log(lam)).lambda_d == pytest.approx(0.60653066)


def test_crossing_uncertainty_propagation():
    lam = np.array([0.1, 0.2])
    scan = synthetic_scan(lam, np.array([-1.0, 1.0]), np.zeros(2), err=0.1)
    c = find_crossing(scan)
    # midpoint in ln(lambda); d x / d f_i = 0.5 * ln 2 / 2 for both points
    dx = np.hypot(0.25 * np.log(2) * 0.1, 0.25 * np.log(2) * 0.1)
    assert c.lambda_d == pytest.approx(np.sqrt(0.02))
    assert c.err == pytest.approx(c.lambda_d * dx)


def test_no_and_multiple_crossings():
    lam = np.geomspace(0.1, 1.0, 6)
    with pytest.raises(CrossingError, match="no sign change"):
        find_crossing(synthetic_scan(lam, np.ones(6), np.zeros(6)))
    wiggle = np.array([-1.0, 1.0, -1.0, 1.0, 1.0, 1.0])
    with pytest.raises(CrossingError, match="sign changes"):
        find_crossing(synthetic_scan(lam, wiggle, np.zeros(6)))


def test_noise_does_not_split_crossing():
    f = np.array([-1.0, -0.5, 0.01, -0.01, 0.5, 1.0])
    assert sign_changes(f, np.full(6, 0.05)).size == 1
    assert sign_changes(f).size == 3


def test_scaling_fit_synthetic():
    m = np.array([4.0, 5.0, 6.0, 7.0])
    fit = scaling_fit(m, m**-0.5)
    assert fit.exponent == pytest.approx(-0.5, abs=1e-12)
    assert fit.prefactor == pytest.approx(1.0)
    assert scaling_fit(m, np.full(4, 0.3)).exponent == pytest.approx(0.0, abs=1e-12)
    weighted = scaling_fit(m, 2 * m**-0.5, err=0.01 * m**-0.5)
    assert weighted.exponent == pytest.approx(-0.5, abs=1e-12)


def test_scaling_fit_errors():
    with pytest.raises(ValueError, match="at least 3"):
        scaling_fit([4, 5], [0.3, 0.2])
    with pytest.raises(ValueError, match="degenerate"):
        scaling_fit([4, 4, 4], [0.3, 0.2, 0.25])
    est = PowerLawScaling().fit([2, 3, 4, 5], [1.0, 0.8, 0.7, 0.62])
    assert est.predict([2])[0] == pytest.approx(1.0, rel=0.05)


def test_m_scan_space():
    assert m_scan_space(5) == SpaceSpec(10, 5)
    assert m_scan_space(5, "fixed-N", 14) == SpaceSpec(14, 5)
    with pytest.raises(ValueError):
        m_scan_space(5, "other")


@pytest.fixture(scope="module")
def scan_d70():
    return run_scan(SpaceSpec(8, 4), GRID, members=16, master_seed=3)


def test_scan_endpoints(scan_d70):
    d = 70
    means = scan_d70.means
    assert means["xi2_weak"][0] < 0.3 * d / 3
    assert means["xi2_strong"][0] > 0.8 * d / 3
    assert means["xi2_weak"][-1] > 0.8 * d / 3
    assert means["xi2_strong"][-1] < means["xi2_weak"][-1]
    assert all(v.shape == GRID.shape for v in scan_d70.stderr.values())
    assert all(np.all(v >= 0) for v in scan_d70.stderr.values())


def test_scan_single_sign_change(scan_d70):
    assert sign_changes(scan_d70.difference("xi2"), scan_d70.diff_stderr["xi2"]).size == 1
    assert sign_changes(scan_d70.difference("s"), scan_d70.diff_stderr["s"]).size == 1


def test_xi2_and_entropy_crossings_concordant(scan_d70):
    cx = find_crossing(scan_d70, "xi2")
    cs = find_crossing(scan_d70, "s")
    assert cx.contains(cs)
    assert 0.1 < cx.lambda_d < 0.6


def test_value_at_crossing_within_uncertainty(scan_d70):
    c = find_crossing(scan_d70)
    at = run_scan(SpaceSpec(8, 4), [c.lambda_d], members=16, master_seed=3)
    assert abs(at.difference("xi2")[0]) <= at.diff_stderr["xi2"][0]


def test_grid_refinement_stable(scan_d70):
    c = find_crossing(scan_d70)
    fine = run_scan(SpaceSpec(8, 4), np.geomspace(0.05, 1.0, 23), members=16, master_seed=3)
    assert abs(find_crossing(fine).lambda_d - c.lambda_d) < c.err


def test_ensemble_doubling_and_merge(scan_d70):
    more = run_scan(SpaceSpec(8, 4), GRID, members=16, master_seed=3, member_offset=16)
    merged = merge_scans([scan_d70, more])
    assert merged.members == 32
    a, b = find_crossing(scan_d70), find_crossing(merged)
    assert a.contains(b, k=2.0)


def test_scaling_reproducible_across_seeds():
    fits = []
    for seed in (1, 2):
        pts = []
        for m in (3, 4, 5):
            scan = run_scan(m_scan_space(m), np.geomspace(0.1, 0.8, 8), members=8, master_seed=seed)
            c = find_crossing(scan)
            pts.append((m, c.lambda_d, c.err))
        fits.append(scaling_fit(*(np.array(x) for x in zip(*pts))))
    a, b = fits
    assert abs(a.exponent - b.exponent) <= 2 * np.hypot(a.exponent_err, b.exponent_err)


def test_scan_validation():
    with pytest.raises(ValueError):
        run_scan(SpaceSpec(6, 3), [0.2, 0.1], members=1)
    with pytest.raises(ValueError):
        run_scan(SpaceSpec(6, 3), [0.0, 0.1], members=1)
