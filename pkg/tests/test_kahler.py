"""Target-space geometry: closed-form metric vs finite-difference oracle,
rank-one prefactor resolution, and the integrated potential bounds."""

import numpy as np
import pytest

from mkg.errors import DegenerateMetric, HypothesisViolated, RadiusExceeded
from mkg.kahler import (KahlerFamily, KahlerKind, fit_bound_constants,
                        flat_family, hessian_oracle, kahler_metric,
                        kahler_metric_holomorphic_derivative,
                        kahler_metric_inverse, radial_bound_check,
                        quartic_family, resolve_q_normalization,
                        sextic_family, upper_bound_rhs)

FAMILIES = [flat_family(), quartic_family(), sextic_family()]


def random_points(n_points, n_comp, seed=0, scale=0.5):
    rng = np.random.default_rng(seed)
    return [rng.normal(scale=scale, size=n_comp)
            + 1j * rng.normal(scale=scale, size=n_comp)
            for _ in range(n_points)]


def test_frozen_metric_values():
    # flat target at phi = 1: identity metric
    g_flat = kahler_metric(flat_family(), [1.0 + 0.0j]).entries
    assert g_flat == pytest.approx(np.array([[1.0]]))
    # flat target independent of phi
    g2 = kahler_metric(flat_family(), [0.3 + 0.4j, 0.0j]).entries
    assert g2 == pytest.approx(np.eye(2))
    # quartic correction r^2 + r^4/4 at phi = 1: frozen Hessian-oracle values
    fam = quartic_family()
    v = [1.0 + 0.0j]
    assert kahler_metric(fam, v).entries == pytest.approx(np.array([[2.0]]))
    assert kahler_metric_inverse(fam, v).entries == pytest.approx(
        np.array([[0.5]]))


def test_quartic_metric_derivative_frozen_value():
    # g_11 = 1 + |phi|^2 for the quartic correction, so the holomorphic
    # Wirtinger derivative at phi = 1 is conj(phi) = 1 (finite-difference
    # oracle value; disagrees with a naive half-strength guess)
    d = kahler_metric_holomorphic_derivative(quartic_family(), [1.0 + 0.0j])
    assert d[0, 0, 0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("fam", FAMILIES, ids=["flat", "quartic", "sextic"])
def test_metric_matches_hessian_oracle(fam):
    worst = 0.0
    for n_comp in (1, 2, 3):
        for v in random_points(12, n_comp, seed=n_comp):
            g = kahler_metric(fam, v).entries
            h = hessian_oracle(fam, v)
            scale = max(1.0, float(np.max(np.abs(h))))
            worst = max(worst, float(np.max(np.abs(g - h))) / scale)
    assert worst < 1e-6


@pytest.mark.parametrize("fam", FAMILIES, ids=["flat", "quartic", "sextic"])
def test_metric_inverse_roundtrip(fam):
    for v in random_points(10, 3, seed=5):
        g = kahler_metric(fam, v).entries
        ginv = kahler_metric_inverse(fam, v).entries
        assert g @ ginv == pytest.approx(np.eye(3), abs=1e-10)


def test_metric_derivative_matches_finite_difference():
    fam = quartic_family()
    h = 1e-3
    for v in random_points(5, 2, seed=9):
        d = kahler_metric_holomorphic_derivative(fam, v)
        for c in range(2):
            e = np.zeros(2, dtype=complex)
            e[c] = 1.0
            # Wirtinger holomorphic derivative via complex central differences
            gp = kahler_metric(fam, v + h * e).entries
            gm = kahler_metric(fam, v - h * e).entries
            gip = kahler_metric(fam, v + 1j * h * e).entries
            gim = kahler_metric(fam, v - 1j * h * e).entries
            fd = ((gp - gm) - 1j * (gip - gim)) / (4 * h)
            assert d[c] == pytest.approx(fd, abs=5e-6)


def test_q_normalization_resolution():
    fam = quartic_family()
    winner, errs = resolve_q_normalization(fam, random_points(8, 2, seed=3))
    assert winner == "1/(4r^2)"
    assert errs["1/(4r^2)"] < 1e-8
    assert errs["1/(4r)"] > 1e-3


def test_metric_positive_definite():
    fam = quartic_family()
    for v in random_points(10, 2, seed=11):
        eig = kahler_metric(fam, v).eigenvalues()
        assert np.all(eig > 0)


def test_radius_guard():
    fam = quartic_family(r_max=1.0)
    with pytest.raises(RadiusExceeded):
        kahler_metric(fam, [2.0 + 0.0j])


def test_degenerate_metric_raises():
    # a family whose alpha vanishes at finite radius is rejected at solve time
    fam = KahlerFamily(kind=KahlerKind.POLYNOMIAL_RADIAL,
                       coefficients=(0.0, 0.0, 1.0, 0.0, -0.5))
    with pytest.raises(DegenerateMetric):
        kahler_metric_inverse(fam, [1.0 + 0.0j])


def test_flat_family_bound_equality():
    # flat target: Phi = r^2, Q' = 0, so b = (0,) and the fitted C2 closes
    # the bound with equality: |Phi| = C2 r^2 / 2 at the largest radius
    fam = flat_family()
    radii = np.linspace(0.002, 2.0, 1000)
    report = radial_bound_check(fam, radii, fit=True)
    assert report.all_hold
    assert report.c2 == pytest.approx(2.0, rel=1e-9)
    assert report.b == (0.0,)


@pytest.mark.parametrize("fam", FAMILIES, ids=["flat", "quartic", "sextic"])
def test_radial_bound_holds_with_fitted_constants(fam):
    radii = np.linspace(0.002, 2.0, 1000)
    report = radial_bound_check(fam, radii, fit=True)
    assert report.all_hold


def test_lower_bound_checked():
    fam = quartic_family()
    assert fam.lower_c1 is not None
    report = radial_bound_check(fam, np.linspace(0.01, 2.0, 200), fit=True)
    assert report.lower_holds is not None
    assert np.all(report.lower_holds)


def test_hypothesis_violation_detected():
    # configured b_n too small for the sextic family's curvature
    fam = sextic_family(bound_b=(1e-8,), bound_c1=1.0, bound_c2=1.0,
                        bound_c3=1.0)
    with pytest.raises(HypothesisViolated):
        radial_bound_check(fam, np.linspace(0.5, 2.0, 50))


def test_upper_bound_rhs_monotone():
    r = np.linspace(0.01, 2.0, 100)
    vals = upper_bound_rhs(r, (1.0, 0.5), 0.1, 0.2, 0.3)
    assert np.all(np.diff(vals) > 0)


def test_fit_bound_constants_flat():
    fam = flat_family()
    b, c1, c2, c3 = fit_bound_constants(fam, np.linspace(0.01, 2.0, 500))
    assert b == (0.0,)
    assert c1 == 0.0
    assert c2 == pytest.approx(2.0, rel=1e-9)
    assert c3 == 0.0
