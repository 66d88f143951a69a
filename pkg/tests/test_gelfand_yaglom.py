"""ODE route: propagation, determinant ratios, degenerate case, zeta transfer."""

import numpy as np
import pytest

from geodet import (
    ConstantCurvature,
    DomainError,
    GeodesicData,
    IntegrationError,
    JacobiSystem,
    NonpositiveOperatorError,
    WrongRouteError,
    fredholm_det_deflated,
    gy_degenerate_ratio,
    gy_ratio,
    jacobi_endomorphism,
    solve_jacobi_ode,
    zeta_det_dirichlet_laplacian,
    zeta_det_jacobi,
)
from geodet.gelfand_yaglom import _rk4_run

PI = np.pi
SINH1 = 1.1752011936438014  # sinh(1)


def scalar_system(c, t=1.0):
    return JacobiSystem.constant([[c]], t)


def free_system(n, t=1.0):
    return JacobiSystem.constant(np.zeros((n, n)), t)


def truncated_product_oracle(shift, K=10**5):
    """prod_k (1 + shift/(pi^2 k^2)) with its analytic log tail."""
    k = np.arange(1, K + 1, dtype=float)
    log_partial = float(np.sum(np.log1p(shift / (PI**2 * k**2))))
    log_tail = 0.0
    c = shift / PI**2
    ext = np.arange(K + 1, 10 * K, dtype=float)
    for m in range(1, 5):
        sign = (-1.0) ** (m + 1) / m
        tail_sum = float(np.sum(1.0 / ext ** (2 * m))) + 1.0 / (
            (2 * m - 1) * (10.0 * K - 1.0) ** (2 * m - 1)
        )
        log_tail += sign * c**m * tail_sum
    return float(np.exp(log_partial + log_tail))


# ---------------------------------------------------------------------------
# propagation


def test_free_propagation_is_linear():
    prop = solve_jacobi_ode(free_system(2), 64)
    assert np.allclose(prop.J[-1], np.eye(2), atol=1e-13)
    assert np.allclose(prop.Jprime[-1], np.eye(2), atol=1e-13)


def test_constant_positive_potential_matches_sinh():
    prop = solve_jacobi_ode(scalar_system(1.0), 2048)
    assert abs(prop.J[-1][0, 0] - SINH1) < 1e-10
    # cross-check against the truncated eigenvalue product
    assert abs(truncated_product_oracle(1.0) - SINH1) < 1e-9


def test_zero_mode_potential_hits_zero():
    prop = solve_jacobi_ode(scalar_system(-(PI**2)), 2048)
    assert abs(prop.J[-1][0, 0]) < 1e-8
    assert prop.Jprime[-1][0, 0] == pytest.approx(-1.0, abs=1e-8)


def test_step_count_validation():
    with pytest.raises(DomainError):
        solve_jacobi_ode(scalar_system(1.0), 8)


def test_non_finite_potential_raises():
    sys = JacobiSystem(1, 1.0, lambda s: np.array([[0.0 if s < 0.5 else np.nan]]))
    with pytest.raises(IntegrationError):
        solve_jacobi_ode(sys, 64)


def test_wronskian_conserved_along_propagation():
    pot = lambda s: np.array([[np.sin(2 * s), 0.4 * s], [0.4 * s, 1.0 - s]])
    prop = solve_jacobi_ode(JacobiSystem(2, 1.0, pot), 512)
    assert prop.wronskian_drift() < 1e-9


def test_rk4_is_fourth_order():
    sys = JacobiSystem(1, 1.0, lambda s: np.array([[5.0 + 4.0 * np.sin(2 * PI * s)]]))
    ref = solve_jacobi_ode(sys, 16384).J[-1][0, 0]
    e1 = abs(solve_jacobi_ode(sys, 512).J[-1][0, 0] - ref)
    e2 = abs(solve_jacobi_ode(sys, 1024).J[-1][0, 0] - ref)
    assert 12.0 <= e1 / e2 <= 20.0


def test_error_estimate_tracks_actual_error():
    sys = JacobiSystem(1, 1.0, lambda s: np.array([[5.0 + 4.0 * np.sin(2 * PI * s)]]))
    prop = solve_jacobi_ode(sys, 256)
    ref = solve_jacobi_ode(sys, 16384).J[-1][0, 0]
    actual = abs(prop.J[-1][0, 0] - ref)
    assert prop.error_estimate > 0.2 * actual


def test_interval_splitting_composition():
    # propagate [0, t] at once, or through the midpoint with (J, J') transfer
    pot = lambda s: np.array([[0.7 * np.cos(3 * s), 0.1], [0.1, -0.4 + s]])
    t = 1.3
    sys = JacobiSystem(2, t, pot)
    full = solve_jacobi_ode(sys, 4096)
    half1 = JacobiSystem(2, t / 2, pot)
    J1, Jp1 = _rk4_run(half1, 2048, np.zeros((2, 2)), np.eye(2))
    K1, Kp1 = _rk4_run(half1, 2048, np.eye(2), np.zeros((2, 2)))
    half2 = JacobiSystem(2, t / 2, lambda s: pot(s + t / 2))
    J2, Jp2 = _rk4_run(half2, 2048, np.zeros((2, 2)), np.eye(2))
    K2, Kp2 = _rk4_run(half2, 2048, np.eye(2), np.zeros((2, 2)))
    # second-half fundamental system applied to first-half boundary data
    J_comp = K2[-1] @ J1[-1] + J2[-1] @ Jp1[-1]
    Jp_comp = Kp2[-1] @ J1[-1] + Jp2[-1] @ Jp1[-1]
    assert np.max(np.abs(J_comp - full.J[-1])) < 1e-9
    assert np.max(np.abs(Jp_comp - full.Jprime[-1])) < 1e-9


def test_propagation_csv_export():
    prop = solve_jacobi_ode(free_system(2), 32)
    rows = prop.csv_rows()
    assert rows[0][0] == "s"
    assert len(rows) == 34  # header + 33 grid points
    assert len(rows[1]) == 1 + 2 * 4


# ---------------------------------------------------------------------------
# determinant ratios


def test_gy_ratio_of_identical_systems_is_one():
    sys = scalar_system(0.7)
    assert gy_ratio(sys, sys) == pytest.approx(1.0, abs=1e-14)


def test_gy_ratio_constant_shift_two_components():
    oracle = truncated_product_oracle(1.0) ** 2  # sinh(1)^2
    ratio = gy_ratio(free_system(2), JacobiSystem.constant(np.eye(2), 1.0))
    assert ratio == pytest.approx(1.3810978455418157, abs=1e-9)
    assert ratio == pytest.approx(oracle, abs=1e-8)


def test_gy_ratio_sphere_jacobian():
    sys = jacobi_endomorphism(GeodesicData(ConstantCurvature(3, 1.0), PI / 2))
    ratio = gy_ratio(free_system(3), sys)
    assert ratio == pytest.approx((2.0 / PI) ** 2, abs=1e-10)


def test_gy_ratio_shape_mismatch():
    with pytest.raises(DomainError):
        gy_ratio(free_system(2), free_system(3))


def test_gy_ratio_rejects_nonpositive_operator():
    # V = -(1.5 pi)^2 has det J vanishing at s = 2/3
    with pytest.raises(NonpositiveOperatorError):
        gy_ratio(free_system(1), scalar_system(-((1.5 * PI) ** 2)))


# ---------------------------------------------------------------------------
# degenerate ratios


def test_degenerate_scalar_value():
    ratio = gy_degenerate_ratio(scalar_system(-(PI**2)), free_system(1))
    assert ratio == pytest.approx(1.0 / (2.0 * PI**2), abs=1e-8)
    assert ratio == pytest.approx(0.0506606, abs=1e-7)


def test_degenerate_block_diagonal_factorization():
    # oracle: blocks multiply and the regular block contributes its own
    # nondegenerate factor (here 1 for the zero potential)
    mixed = JacobiSystem.constant(np.diag([0.0, -(PI**2)]), 1.0)
    ratio = gy_degenerate_ratio(mixed, free_system(2))
    scalar = gy_degenerate_ratio(scalar_system(-(PI**2)), free_system(1))
    assert ratio == pytest.approx(scalar, rel=1e-10)
    assert ratio == pytest.approx(1.0 / (2.0 * PI**2), abs=1e-8)


def test_degenerate_antipodal_direction_bookkeeping():
    # per orthogonal direction of the antipodal sphere the ratio is 1/(2 pi^2);
    # multiplying back the excluded Dirichlet eigenvalue pi^2 gives the
    # deflated Fredholm factor 1/2
    ratio = gy_degenerate_ratio(scalar_system(-(PI**2)), free_system(1))
    assert ratio * PI**2 == pytest.approx(0.5, abs=1e-8)
    sysA = jacobi_endomorphism(GeodesicData(ConstantCurvature(2, 1.0), PI))
    deflated = fredholm_det_deflated(sysA, schedule=(64, 128)).estimate.extrapolated
    assert deflated == pytest.approx(ratio * PI**2, abs=1e-4)


def test_degenerate_route_rejects_regular_operator():
    with pytest.raises(WrongRouteError):
        gy_degenerate_ratio(scalar_system(1.0), free_system(1))


def test_degenerate_full_matrix_matches_displayed_formula():
    # with every direction degenerate the boundary matrix reduces to
    # det(int J^T J)/|det J'(t)|
    sys = JacobiSystem.constant(np.diag([-(PI**2), -(PI**2)]), 1.0)
    ratio = gy_degenerate_ratio(sys, free_system(2))
    assert ratio == pytest.approx((1.0 / (2.0 * PI**2)) ** 2, rel=1e-8)


# ---------------------------------------------------------------------------
# zeta determinants


def test_zeta_laplacian_values():
    assert zeta_det_dirichlet_laplacian(1.0, 3).value == 8.0
    assert zeta_det_dirichlet_laplacian(0.5, 1).value == 1.0
    with pytest.raises(DomainError):
        zeta_det_dirichlet_laplacian(0.0, 1)


def test_zeta_laplacian_against_zeta_function_oracle():
    # independent derivation: -zeta'_P(0) with zeta_P(z) = n (t/pi)^(2z) zeta(2z)
    import mpmath as mp

    for t, n in ((1.0, 3), (0.5, 1), (2.0, 2)):
        f = lambda z: n * (mp.mpf(t) / mp.pi) ** (2 * z) * mp.zeta(2 * z)
        det = float(mp.e ** (-mp.diff(f, 0)))
        assert zeta_det_dirichlet_laplacian(t, n).value == pytest.approx(det, rel=1e-12)


def test_zeta_power_rule():
    # zeta_{P^m}(z) = zeta_P(mz) implies det(P^m) = det(P)^m
    import mpmath as mp

    t, n, m = 1.0, 2, 2
    f = lambda z: n * (mp.mpf(t) / mp.pi) ** (2 * m * z) * mp.zeta(2 * m * z)
    det_power = float(mp.e ** (-mp.diff(f, 0)))
    base = zeta_det_dirichlet_laplacian(t, n).value
    assert det_power == pytest.approx(base**m, rel=1e-10)


def test_zeta_jacobi_free_case():
    z = zeta_det_jacobi(free_system(2))
    assert z.value == pytest.approx(4.0, abs=1e-12)
    assert z.route == "gy_ratio"
    assert z.excluded_zero_modes == 0


def test_zeta_jacobi_sphere():
    sys = jacobi_endomorphism(GeodesicData(ConstantCurvature(3, 1.0), PI / 2))
    z = zeta_det_jacobi(sys)
    assert z.value == pytest.approx(8.0 * (2.0 / PI) ** 2, rel=1e-10)


def test_zeta_jacobi_constant_shift():
    # oracle: det = det_zeta(P) * Fredholm product = 2 sinh(1)
    z = zeta_det_jacobi(scalar_system(1.0))
    assert z.value == pytest.approx(2.0 * SINH1, rel=1e-10)
    assert z.value == pytest.approx(2.0 * truncated_product_oracle(1.0), rel=1e-8)


def test_zeta_jacobi_degenerate_route():
    sys = jacobi_endomorphism(GeodesicData(ConstantCurvature(2, 1.0), PI))
    z = zeta_det_jacobi(sys)
    assert z.route == "deflated"
    assert z.excluded_zero_modes == 1
    # det_zeta(tangent) * det'_zeta(orthogonal) = 2 * 1/pi^2
    assert z.value == pytest.approx(2.0 / PI**2, rel=1e-8)


def test_zeta_jacobi_interval_scaling():
    # on [0, t] the free value is (2t)^n through the same transfer
    z = zeta_det_jacobi(free_system(2, t=1.7))
    assert z.value == pytest.approx((2.0 * 1.7) ** 2, rel=1e-12)


def test_identity_chain_full():
    # Fredholm = ODE ratio = closed form = 2^-n zeta, within 1e-5
    from geodet import exp_jacobian_closed_form, fredholm_det

    for kappa, r, n in ((1.0, 1.0, 2), (-1.0, 1.0, 3), (0.3, 0.5, 2), (-0.3, 0.1, 3)):
        sys = jacobi_endomorphism(GeodesicData(ConstantCurvature(n, kappa), r))
        galerkin_val = fredholm_det(sys, (64, 128, 256, 512)).extrapolated
        ode_val = gy_ratio(free_system(n), sys)
        closed = exp_jacobian_closed_form(ConstantCurvature(n, kappa), r)
        zeta_val = 2.0**-n * zeta_det_jacobi(sys).value
        for other in (ode_val, closed, zeta_val):
            assert abs(galerkin_val - other) < 1e-5
