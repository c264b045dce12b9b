import numpy as np
import pytest

import kakint
from kakint import (
    CalibrationError,
    ConfigurationError,
    DirectConfig,
    ReducedConfig,
    TestFunction,
    VerifyConfig,
    calibrate,
    chamber_quadrature,
    corrupted_log_jacobian,
    default_suite,
    haar_sample_compact,
    orbit_average,
    reduced_integral,
    verify,
)
from kakint.reduction import CLASS_LIKE, GENERIC

from conftest import lie_data


def make_quad(system, truncation=1.5, order=8):
    return chamber_quadrature(system, truncation, order)


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

def test_test_function_validation():
    with pytest.raises(ConfigurationError):
        TestFunction("bad", "weird-kind", lambda g: np.ones(len(g)), 1.0, 1.0)
    with pytest.raises(ConfigurationError):
        TestFunction("bad", GENERIC, lambda g: np.ones(len(g)), 0.0, 1.0)


def test_default_suite_shapes_and_kinds():
    suite = default_suite()
    assert [f.kind for f in suite] == [CLASS_LIKE, GENERIC, GENERIC]
    g = np.stack([np.eye(2), 2 * np.eye(2)])
    for f in suite:
        vals = f(g)
        assert vals.shape == (2,)
        assert np.all(np.isfinite(vals))


def test_calibrator_is_class_like(rng):
    # invariant under two-sided compact translations
    family, frame, system = lie_data("GL-real", 3)
    f0 = default_suite()[0]
    for _ in range(20):
        g = kakint.random_group_element(family, rng, 1.0)
        k1 = haar_sample_compact(family, rng)
        k2 = haar_sample_compact(family, rng)
        moved = k1 @ g @ np.linalg.inv(k2)
        assert abs(f0(moved[None])[0] - f0(g[None])[0]) < 1e-10


def test_suite_decay_bounds_hold_empirically(rng):
    for tag, n in [("SL-real", 2), ("GL-complex-as-real", 2), ("LorentzSO0", 3)]:
        family, _, _ = lie_data(tag, n)
        for f in default_suite():
            for _ in range(50):
                g = kakint.random_group_element(family, rng, 1.0)
                bound = f.decay_coeff * np.exp(
                    -f.decay_alpha * (np.sum(g * g)
                                      + np.sum(np.linalg.inv(g) ** 2)))
                assert f(g[None])[0] <= bound * (1 + 1e-9)


# ---------------------------------------------------------------------------
# orbit averages
# ---------------------------------------------------------------------------

def test_orbit_average_class_like_is_exact(rng):
    family, frame, system = lie_data("SL-real", 2)
    f0 = default_suite()[0]
    h = np.array([0.6])
    mean, se = orbit_average(family, frame, f0, h, 100, rng)
    a = kakint.exp_a(frame, h)
    assert mean == pytest.approx(float(f0(a[None])[0]), abs=1e-15)
    assert se == 0.0


def test_orbit_average_of_one(rng):
    family, frame, _ = lie_data("GL-real", 2)
    one = TestFunction("one", GENERIC, lambda g: np.ones(len(g)), 1.0, 10.0)
    mean, se = orbit_average(family, frame, one, np.array([0.3, -0.1]), 200, rng)
    assert mean == 1.0
    assert se == 0.0


def test_orbit_average_seed_consistency():
    family, frame, _ = lie_data("SL-real", 2)
    f1 = default_suite()[1]
    h = np.array([0.5])
    m1, s1 = orbit_average(family, frame, f1, h, 10_000, np.random.default_rng(1))
    m2, s2 = orbit_average(family, frame, f1, h, 10_000, np.random.default_rng(2))
    assert abs(m1 - m2) < 3 * np.hypot(s1, s2)


def test_orbit_average_requires_samples(rng):
    family, frame, _ = lie_data("SL-real", 2)
    f1 = default_suite()[1]
    with pytest.raises(ConfigurationError):
        orbit_average(family, frame, f1, np.array([0.5]), 10, rng)


# ---------------------------------------------------------------------------
# reduced integral
# ---------------------------------------------------------------------------

def test_reduced_integral_of_zero():
    family, frame, system = lie_data("SL-real", 2)
    zero = TestFunction("zero", GENERIC, lambda g: np.zeros(len(g)), 1.0, 1.0)
    value, se = reduced_integral(family, frame, system, zero,
                                 make_quad(system), 200, 0)
    assert value == 0.0 and se == 0.0


def test_reduced_integral_vanishing_outside_box():
    # supported beyond the truncation box -> quadrature sees exactly zero
    family, frame, system = lie_data("SL-real", 2)

    def far_bump(g):
        size = np.sum(g * g, axis=(1, 2))
        return (size > 1e8).astype(float)

    f = TestFunction("far", GENERIC, far_bump, 1.0, 1e9)
    value, _ = reduced_integral(family, frame, system, f, make_quad(system), 200, 0)
    assert value == 0.0


def test_reduced_integral_monotone_in_truncation():
    family, frame, system = lie_data("SL-real", 2)
    f0 = default_suite()[0]
    values = []
    for t in (1.0, 1.5, 2.5):
        quad = make_quad(system, truncation=t, order=16)
        value, _ = reduced_integral(family, frame, system, f0, quad, 200, 0)
        values.append(value)
    assert values[0] <= values[1] <= values[2]


def test_reduced_integral_linearity_with_shared_seed():
    family, frame, system = lie_data("SL-real", 2)
    suite = default_suite()
    f1, f2 = suite[1], suite[2]
    alpha, beta = 0.7, -0.4
    combo = TestFunction(
        "combo", GENERIC,
        lambda g: alpha * f1.evaluator(g) + beta * f2.evaluator(g), 0.5, 3.0)
    quad = make_quad(system)
    v1, _ = reduced_integral(family, frame, system, f1, quad, 500, 123)
    v2, _ = reduced_integral(family, frame, system, f2, quad, 500, 123)
    vc, _ = reduced_integral(family, frame, system, combo, quad, 500, 123)
    assert vc == pytest.approx(alpha * v1 + beta * v2, rel=1e-12)


def test_reduced_integral_accepts_generator():
    family, frame, system = lie_data("SL-real", 2)
    f1 = default_suite()[1]
    quad = make_quad(system)
    v1, _ = reduced_integral(family, frame, system, f1, quad, 500,
                             np.random.default_rng(5))
    assert np.isfinite(v1) and v1 > 0


# ---------------------------------------------------------------------------
# calibration
# ---------------------------------------------------------------------------

def test_calibrate_basic_and_f_independence():
    family, frame, system = lie_data("SL-real", 2)
    f0 = default_suite()[0]
    narrow = TestFunction(
        "narrow", CLASS_LIKE,
        lambda g: np.exp(-2.0 * (np.sum(g * g, axis=(1, 2))
                                 + np.sum(np.linalg.inv(g) ** 2, axis=(1, 2)))),
        2.0, 1.0)
    direct_cfg = DirectConfig(n_samples=100_000, proposal_scale=0.7, seed=3)
    reduced_cfg = ReducedConfig(order=24, orbit_samples=200, seed=4)
    res_a = calibrate(family, frame, system, f0, direct_cfg, reduced_cfg)
    assert res_a.constant > 0 and res_a.sigma > 0
    direct_cfg_b = DirectConfig(n_samples=100_000, proposal_scale=0.6, seed=13)
    res_b = calibrate(family, frame, system, narrow, direct_cfg_b, reduced_cfg)
    # one constant for the family: independent reference functions agree
    sigma = np.hypot(res_a.sigma, res_b.sigma)
    assert abs(res_a.constant - res_b.constant) < 3 * sigma


def test_calibrate_degenerate_reference():
    family, frame, system = lie_data("SL-real", 2)
    zero = TestFunction("zero", CLASS_LIKE, lambda g: np.zeros(len(g)), 1.0, 1.0)
    with pytest.raises(CalibrationError):
        calibrate(family, frame, system, zero,
                  DirectConfig(n_samples=2000), ReducedConfig(order=6, orbit_samples=200))


# ---------------------------------------------------------------------------
# verification reports
# ---------------------------------------------------------------------------

SMALL_CFG = VerifyConfig(n_samples=40_000, orbit_samples=1000, order=12, seed=8)


def test_verify_report_structure_and_pass():
    family, frame, system = lie_data("SL-real", 2)
    report = verify(family, frame, system, default_suite(), SMALL_CFG)
    assert report.passed
    assert not report.degraded
    assert report.calibration.function == "f0_gauss"
    names = [r.name for r in report.functions]
    assert names == ["f0_gauss", "f1_entry", "f2_trace"]
    assert report.functions[0].z == 0.0
    doc = report.to_dict()
    assert doc["schema"] == 1
    assert doc["config"]["family"] == "SL-real"
    assert "probability" in doc["dmu_convention"]
    assert {i["name"] for i in doc["invariants"]} >= {
        "structure.decomposition", "psi_det.ratio_error"}


def test_verify_class_like_only_suite():
    # both sides reduce to chamber quadrature: the z-score is zero by
    # construction for the calibrator and the report stays consistent
    family, frame, system = lie_data("SL-real", 2)
    suite = [default_suite()[0]]
    report = verify(family, frame, system, suite, SMALL_CFG)
    assert report.functions[0].z == 0.0
    assert report.passed


def test_verify_requires_class_like():
    family, frame, system = lie_data("SL-real", 2)
    with pytest.raises(ConfigurationError):
        verify(family, frame, system, [default_suite()[1]], SMALL_CFG)


def test_verify_negative_control_drop_root():
    family, frame, system = lie_data("SL-real", 2)
    cfg = VerifyConfig(n_samples=100_000, orbit_samples=2000, order=16, seed=7,
                       corruption="drop-root")
    report = verify(family, frame, system, default_suite(), cfg)
    assert max(abs(r.z) for r in report.functions) > 5.0
    assert not report.passed


def test_verify_translated_integrand_consistency():
    # two-sided compact translates of a generic integrand still satisfy the
    # calibrated identity
    family, frame, system = lie_data("SL-real", 2)
    rng = np.random.default_rng(31)
    k0 = haar_sample_compact(family, rng)
    suite = default_suite()
    f1 = suite[1]
    translated = TestFunction(
        "f1_translated", GENERIC, lambda g: f1.evaluator(k0 @ g),
        f1.decay_alpha, f1.decay_coeff)
    report = verify(family, frame, system,
                    [suite[0], f1, translated],
                    VerifyConfig(n_samples=60_000, orbit_samples=1500, order=12, seed=8))
    assert report.passed


def test_corrupted_log_jacobian_modes():
    _, _, system = lie_data("GL-real", 3)
    h = np.array([0.9, 0.4, -0.2])
    true = kakint.log_jacobian(system, h)
    assert corrupted_log_jacobian("drop-root")(system, h) != pytest.approx(true)
    assert corrupted_log_jacobian("linear-sinh")(system, h) != pytest.approx(true)
    with pytest.raises(ConfigurationError):
        corrupted_log_jacobian("nonsense")


def test_verify_degraded_flag():
    family, frame, system = lie_data("SL-real", 2)
    cfg = VerifyConfig(n_samples=30_000, orbit_samples=400, order=10, seed=7,
                       proposal_scale=10.0)
    report = verify(family, frame, system, default_suite(), cfg)
    assert report.degraded
