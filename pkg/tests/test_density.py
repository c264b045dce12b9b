import math

import numpy as np
import pytest

import kakint
from kakint import (
    SingularityError,
    ad_action_coefficients,
    exp_a,
    jacobian,
    log_jacobian,
    psi_det_check,
    psi_matrix,
    regularity,
    transversality_condition,
)

from conftest import SMALL_FAMILIES, lie_data


# ---------------------------------------------------------------------------
# log-Jacobian values
# ---------------------------------------------------------------------------

def test_log_jacobian_sl2_unit_root_value():
    _, _, system = lie_data("SL-real", 2)
    # coordinate where the single root evaluates to exactly 1
    h = np.array([1.0 / np.sqrt(2)])
    assert system.positive_values(h)[0] == pytest.approx(1.0)
    assert log_jacobian(system, h) == pytest.approx(math.log(math.sinh(1.0)), abs=1e-12)
    assert log_jacobian(system, h) == pytest.approx(0.161439, abs=1e-6)


def test_log_jacobian_singular_marker():
    for tag, n in [("SL-real", 2), ("GL-real", 3), ("LorentzSO0", 3)]:
        _, _, system = lie_data(tag, n)
        assert log_jacobian(system, np.zeros(system.rank)) == -np.inf
        assert jacobian(system, np.zeros(system.rank)) == 0.0


def test_log_jacobian_lorentz_multiplicity_two():
    _, _, system = lie_data("LorentzSO0", 3)
    t = 0.8
    h = np.array([t * np.sqrt(2)])  # boost parameter t
    assert system.positive_values(h)[0] == pytest.approx(t)
    assert log_jacobian(system, h) == pytest.approx(2 * math.log(math.sinh(t)), abs=1e-12)


def test_log_jacobian_empty_root_system():
    # the rank-one abelian family has no roots: empty product, J = 1
    _, _, system = lie_data("LorentzSO0", 1)
    assert system.num_positive == 0
    assert log_jacobian(system, np.array([0.3])) == 0.0
    assert jacobian(system, np.array([0.3])) == 1.0

    _, _, system = lie_data("LorentzSO0", 2)
    h = np.array([0.3])
    val = system.positive_values(h)[0]
    assert log_jacobian(system, h) == pytest.approx(math.log(abs(math.sinh(val))))


def test_jacobian_examples():
    _, _, system = lie_data("GL-real", 2)
    assert jacobian(system, np.array([1.0, 0.0])) == pytest.approx(math.sinh(1.0), abs=1e-12)

    _, _, system = lie_data("GL-real", 3)
    got = jacobian(system, np.array([2.0, 1.0, 0.0]))
    assert got == pytest.approx(math.sinh(1.0) ** 2 * math.sinh(2.0), rel=1e-12)
    assert got == pytest.approx(5.00904, abs=1e-5)


def test_jacobian_weyl_invariance_and_evenness(rng):
    for tag, n in SMALL_FAMILIES:
        _, _, system = lie_data(tag, n)
        for _ in range(100):
            h = rng.standard_normal(system.rank)
            ref = log_jacobian(system, h)
            assert abs(log_jacobian(system, -h) - ref) < 1e-12
            for w in system.weyl_elements:
                assert abs(log_jacobian(system, w @ h) - ref) < 1e-12


def test_log_jacobian_batch_shape():
    _, _, system = lie_data("GL-real", 2)
    hs = np.array([[1.0, 0.0], [0.5, -0.5], [0.0, 0.0]])
    out = log_jacobian(system, hs)
    assert out.shape == (3,)
    assert out[2] == -np.inf


def test_degeneration_slope_matches_multiplicity_sum(rng):
    # log J(eps H) / log(eps) -> sum of multiplicities for generic H
    for tag, n in SMALL_FAMILIES:
        _, _, system = lie_data(tag, n)
        if system.num_positive == 0:
            continue
        h = rng.uniform(0.5, 1.5, size=system.rank)
        if not regularity(system, h)[0]:
            continue
        eps1, eps2 = 1e-2, 1e-3
        slope = (log_jacobian(system, eps1 * h) - log_jacobian(system, eps2 * h)) \
            / (math.log(eps1) - math.log(eps2))
        total = system.sum_multiplicity
        assert abs(slope / total - 1.0) < 0.01, (tag, n, slope, total)


# ---------------------------------------------------------------------------
# linearized action matrix
# ---------------------------------------------------------------------------

def test_psi_matrix_column_pattern(rng):
    for tag, n in [("GL-real", 2), ("GL-complex-as-real", 2), ("LorentzSO0", 3)]:
        family, frame, system = lie_data(tag, n)
        h = rng.uniform(0.2, 0.9, size=frame.rank)
        psi = psi_matrix(family, frame, h)
        n_m = len(frame.basis_m)
        n_l = len(frame.basis_l)
        dim = n_m + 2 * n_l
        assert psi.entries.shape == (dim, dim)

        vals = []
        offset = 0
        for p in range(system.num_positive):
            beta = len(frame.root_vectors[p])
            vals.extend([system.positive_values(h)[p]] * beta)
            offset += beta

        expected = np.zeros((dim, dim))
        expected[:n_m, :n_m] = np.eye(n_m)  # centralizer columns: unit vectors
        for j, lam_h in enumerate(vals):
            col = n_m + j
            expected[n_m + j, col] = np.cosh(lam_h)        # + direction row
            expected[n_m + n_l + j, col] = -np.sinh(lam_h)  # - direction row
            expected[n_m + j, n_m + n_l + j] = -1.0         # right-factor column
        np.testing.assert_allclose(psi.entries, expected, atol=1e-10)


def test_psi_matrix_labels():
    family, frame, _ = lie_data("LorentzSO0", 3)
    psi = psi_matrix(family, frame, np.array([0.4]))
    assert psi.codomain_labels[0] == "m0"
    assert any(lbl.startswith("(l") for lbl in psi.domain_labels)
    assert any(lbl.startswith("(0,l") for lbl in psi.domain_labels)


def test_psi_det_check_ratio_one(rng):
    for tag, n in SMALL_FAMILIES:
        family, frame, system = lie_data(tag, n)
        ratios = []
        while len(ratios) < 50:
            h = rng.uniform(-1.0, 1.0, size=frame.rank)
            if system.num_positive and not regularity(system, h)[0]:
                continue
            det_abs, jac, ratio = psi_det_check(family, frame, system, h)
            assert det_abs == pytest.approx(jac, rel=1e-8)
            ratios.append(ratio)
        ratios = np.array(ratios)
        assert np.abs(ratios - 1.0).max() < 1e-8, (tag, n)
        assert ratios.max() - ratios.min() < 1e-8, (tag, n)


def test_psi_det_multiplicity_two_square():
    family, frame, system = lie_data("GL-complex-as-real", 2)
    h = np.array([0.7, -0.2])
    lam = system.positive_values(h)[0]
    det_abs, _, _ = psi_det_check(family, frame, system, h)
    assert det_abs == pytest.approx(np.sinh(lam) ** 2, rel=1e-8)


def test_psi_det_check_rejects_singular():
    family, frame, system = lie_data("SL-real", 2)
    with pytest.raises(SingularityError):
        psi_det_check(family, frame, system, np.zeros(1))


# ---------------------------------------------------------------------------
# conjugation coefficients
# ---------------------------------------------------------------------------

def test_ad_action_coefficients_match_cosh_sinh(rng):
    for tag, n in SMALL_FAMILIES:
        family, frame, system = lie_data(tag, n)
        for _ in range(100):
            h = rng.uniform(-1.2, 1.2, size=frame.rank)
            p = int(rng.integers(system.num_positive)) if system.num_positive else None
            if p is None:
                continue
            j = int(rng.integers(len(frame.root_vectors[p])))
            lam_h = float(system.positive_values(h)[p])
            c_plus, c_minus = ad_action_coefficients(family, frame, h, p, j)
            assert c_plus == pytest.approx(np.cosh(lam_h), abs=1e-10)
            assert c_minus == pytest.approx(-np.sinh(lam_h), abs=1e-10)


def test_ad_action_zero_gives_identity_coefficients():
    family, frame, system = lie_data("GL-real", 3)
    c_plus, c_minus = ad_action_coefficients(family, frame, np.zeros(3), 0, 0)
    assert c_plus == pytest.approx(1.0, abs=1e-14)
    assert c_minus == pytest.approx(0.0, abs=1e-14)


def test_ad_action_leak_is_small(rng):
    # everything outside the two matched directions vanishes
    for tag, n in [("GL-real", 3), ("GL-complex-as-real", 2), ("LorentzSO0", 3)]:
        family, frame, system = lie_data(tag, n)
        h = rng.uniform(-1.0, 1.0, size=frame.rank)
        a = exp_a(frame, h)
        a_inv = exp_a(frame, -h)
        offset = 0
        for p in range(system.num_positive):
            for j in range(len(frame.root_vectors[p])):
                xi_plus = frame.basis_l[offset + j]
                xi_minus = frame.basis_b[offset + j]
                w = a_inv @ xi_plus @ a
                c_plus, c_minus = ad_action_coefficients(family, frame, h, p, j)
                leak = w - c_plus * xi_plus - c_minus * xi_minus
                assert np.linalg.norm(leak) < 1e-10
            offset += len(frame.root_vectors[p])


def test_ad_action_fixes_centralizer(rng):
    family, frame, system = lie_data("LorentzSO0", 3)
    h = rng.uniform(-1.0, 1.0, size=1)
    a = exp_a(frame, h)
    a_inv = exp_a(frame, -h)
    for eta in frame.basis_m:
        np.testing.assert_allclose(a_inv @ eta @ a, eta, atol=1e-12)


# ---------------------------------------------------------------------------
# transversality witness
# ---------------------------------------------------------------------------

def test_transversality_condition_number(rng):
    for tag, n in SMALL_FAMILIES:
        family, frame, system = lie_data(tag, n)
        for _ in range(10):
            h = rng.uniform(-1.0, 1.0, size=frame.rank)
            cond = transversality_condition(family, frame, h)
            assert np.isfinite(cond)
            assert cond < 1e3, (tag, n, cond)
