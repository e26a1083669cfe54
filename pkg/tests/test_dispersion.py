import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, strategies as st
from scipy import integrate

from anisofit.dispersion import (
    BinghamDistribution, BivariateVonMises, PlanarGaussian, SphereQuadrature, VonMisesPlanar,
    b_from_kappa, bessel_i0, erfi, goh_structure_tensor, hnors_structure_tensor, integrate_sphere,
    kappa_from_b, kappas_from_concentrations, vonmises_normalization,
)
from anisofit.errors import DomainError

E1, E3 = np.array([1.0, 0, 0]), np.array([0, 0, 1.0])
FINE = SphereQuadrature.product(64, hemisphere=True)


def second_moment(rho_at_nodes, quad=FINE):
    r = quad.nodes
    return np.einsum("m,m,mi,mj->ij", quad.weights, rho_at_nodes, r, r) / (4 * np.pi)


# special functions, checked against scipy's independent implementations

@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 2.7, 5.0])
def test_erfi(x):
    assert erfi(x) == pytest.approx(sp.erfi(x), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("b", [0.0, 0.5, 3.67, 20.0])
def test_bessel_i0(b):
    assert bessel_i0(b) == pytest.approx(sp.i0(b), rel=1e-12)


# von Mises

def test_isotropic_kappa_is_one_third():
    assert abs(kappa_from_b(0.0) - 1 / 3) < 1e-8
    assert abs(VonMisesPlanar(1e-12).kappa - 1 / 3) < 1e-8


def test_kappa_strictly_decreasing():
    k = [kappa_from_b(b) for b in np.linspace(0, 50, 60)]
    assert np.all(np.diff(k) < 0)


@pytest.mark.parametrize("b", [0.1, 1.0, 3.67, 30.0, 300.0])
def test_density_normalized(b):
    assert abs(vonmises_normalization(b) - 1.0) < 1e-8


@pytest.mark.parametrize("b", [0.2, 1.0, 3.67, 12.0])
def test_density_matches_erfi_closed_form(b):
    # rho = 4 sqrt(b / 2 pi) exp(b (cos 2T + 1)) / erfi(sqrt(2 b)), normalized by independent erfi
    theta = np.linspace(0, np.pi, 7)
    closed = 4 * np.sqrt(b / (2 * np.pi)) * np.exp(b * (np.cos(2 * theta) - 1)) / (sp.erfi(np.sqrt(2 * b)) * np.exp(-2 * b))
    assert np.allclose(VonMisesPlanar(b).density(theta), closed, rtol=1e-10)


@pytest.mark.parametrize("b", [0.2, 3.67, 12.0])
def test_kappa_by_independent_theta_quadrature(b):
    rho = lambda t: 4 * np.sqrt(b / (2 * np.pi)) * np.exp(b * (np.cos(2 * t) + 1) - 2 * b) / (sp.erfi(np.sqrt(2 * b)) * np.exp(-2 * b))
    k, _ = integrate.quad(lambda t: rho(t) * np.sin(t) ** 3, 0, np.pi, epsabs=1e-13)
    assert kappa_from_b(b) == pytest.approx(k / 4, rel=1e-9)


def test_kappa_asymptote_for_concentrated_fibers():
    assert kappa_from_b(1e4) == pytest.approx(1 / (4 * 1e4), rel=1e-3)


@given(st.floats(1e-3, 0.333))
def test_b_from_kappa_round_trip(kappa):
    assert kappa_from_b(b_from_kappa(kappa)) == pytest.approx(kappa, rel=1e-8)


def test_negative_concentration_rejected():
    with pytest.raises(DomainError):
        VonMisesPlanar(-1.0)
    with pytest.raises(DomainError):
        b_from_kappa(0.5)


# structure tensors

kappa_goh = st.floats(0.0, 1 / 3)
angle = st.floats(0, np.pi)


@given(kappa_goh, angle)
def test_goh_tensor_has_unit_trace(kappa, a):
    M = np.array([np.cos(a), np.sin(a), 0])
    assert abs(np.trace(goh_structure_tensor(kappa, M)) - 1) < 1e-12


@given(st.floats(0, 1), st.floats(0, 0.5), angle)
def test_hnors_tensor_has_unit_trace(k_ip, k_op, a):
    M = np.array([np.cos(a), np.sin(a), 0])
    assert abs(np.trace(hnors_structure_tensor(k_ip, k_op, M, E3)) - 1) < 1e-12


def test_goh_limits():
    M = np.array([np.cos(0.4), np.sin(0.4), 0])
    assert np.allclose(goh_structure_tensor(1 / 3, M), np.eye(3) / 3)
    assert np.allclose(goh_structure_tensor(0.0, M), np.outer(M, M))


def test_hnors_isotropic_and_fiber_component():
    assert np.allclose(hnors_structure_tensor(0.5, 1 / 3, E1, E3), np.eye(3) / 3)
    H = hnors_structure_tensor(0.2, 0.45, E1, E3)
    assert H[0, 0] == pytest.approx(2 * 0.45 * (1 - 0.2))


def test_structure_tensor_domains():
    with pytest.raises(DomainError):
        goh_structure_tensor(0.4, E1)
    with pytest.raises(DomainError):
        hnors_structure_tensor(0.5, 0.6, E1, E3)


@pytest.mark.parametrize("b", [0.5, 3.67, 10.0])
def test_goh_tensor_is_second_moment_of_von_mises(b):
    # the pre-integrated tensor and the direct sphere average are two routes to H
    M = np.array([np.cos(0.3), np.sin(0.3), 0])
    vm = VonMisesPlanar(b)
    H = second_moment(vm.on_sphere(FINE.nodes, M))
    assert np.allclose(H, goh_structure_tensor(vm.kappa, M), atol=1e-10)


@pytest.mark.parametrize("a,b", [(0.0, 0.0), (2.0, 3.0), (0.5, 10.0)])
def test_hnors_tensor_is_second_moment_of_bivariate(a, b):
    d = BivariateVonMises(a, b)
    H = second_moment(d.on_sphere(FINE.nodes, E1, E3))
    assert np.allclose(H, hnors_structure_tensor(*d.kappas, E1, E3), atol=1e-10)


def test_bivariate_kappa_limits():
    assert kappas_from_concentrations(0.0, 0.0) == pytest.approx((0.5, 1 / 3))
    k_ip, k_op = kappas_from_concentrations(1e4, 1e4)
    assert k_ip < 1e-4 and k_op == pytest.approx(0.5, abs=1e-4)


@pytest.mark.parametrize("a,b", [(0.0, 0.0), (1.0, 2.0), (8.0, 0.5)])
def test_bivariate_density_normalized(a, b):
    d = BivariateVonMises(a, b)
    assert abs(integrate_sphere(lambda r: d.on_sphere(r, E1, E3), FINE) - 1) < 1e-8


# sphere quadrature

def test_weights_sum_to_four_pi():
    for q in (SphereQuadrature.product(8), SphereQuadrature.product(12, hemisphere=True),
              SphereQuadrature.product(10, axis=0, breaks=(0.3,), hemisphere=True)):
        assert q.weights.sum() == pytest.approx(4 * np.pi, rel=1e-13)


@pytest.mark.parametrize("axis", [0, 1, 2])
def test_polynomial_moments_exact(axis):
    q = SphereQuadrature.product(8, axis=axis)
    r = q.nodes
    assert integrate_sphere(lambda r: r[:, 0] ** 2, q) == pytest.approx(1 / 3, abs=1e-14)
    assert integrate_sphere(lambda r: r[:, 1] ** 4, q) == pytest.approx(1 / 5, abs=1e-14)
    assert integrate_sphere(lambda r: r[:, 0] ** 2 * r[:, 2] ** 2, q) == pytest.approx(1 / 15, abs=1e-14)
    assert np.allclose(np.linalg.norm(r, axis=1), 1.0)


def test_breaks_resolve_a_kink():
    f = lambda r: np.maximum(r[:, 2] ** 2 - 0.3, 0.0)
    exact = 0.5 * integrate.quad(lambda t: max(t * t - 0.3, 0.0), -1, 1, points=[-np.sqrt(0.3), np.sqrt(0.3)])[0]
    plain = integrate_sphere(f, SphereQuadrature.product(16, hemisphere=True))
    split = integrate_sphere(f, SphereQuadrature.product(16, breaks=(np.sqrt(0.3),), hemisphere=True))
    assert abs(split - exact) < 1e-14
    assert abs(plain - exact) > 1e-8


def test_refined_doubles_orders():
    q = SphereQuadrature.product(6, axis=1, breaks=(0.5,), hemisphere=True).refined()
    assert q.meta["n_theta"] == 12 and q.meta["axis"] == 1 and q.meta["breaks"] == (0.5,)


def test_empty_or_invalid_rules_rejected():
    with pytest.raises(DomainError):
        SphereQuadrature(np.zeros((0, 3)), np.zeros(0))
    with pytest.raises(DomainError):
        SphereQuadrature(np.array([[0, 0, 1.0]]), np.array([-1.0]))
    with pytest.raises(DomainError):
        SphereQuadrature.product(0)


# Bingham

def test_bingham_equal_eigenvalues_is_uniform():
    d = BinghamDistribution(2.0, 2.0, 2.0)
    assert d.normalizer == pytest.approx(np.exp(2.0), rel=1e-12)
    assert np.allclose(d.density(FINE.nodes[:5]), 1.0)


def test_bingham_normalizer_against_dblquad():
    k = (0.0, 0.9, 3.0)
    f = lambda t, p: np.exp(k[0] * (np.sin(t) * np.cos(p)) ** 2 + k[1] * (np.sin(t) * np.sin(p)) ** 2
                            + k[2] * np.cos(t) ** 2) * np.sin(t)
    ref = integrate.dblquad(f, 0, 2 * np.pi, 0, np.pi, epsabs=1e-12)[0] / (4 * np.pi)
    assert BinghamDistribution(*k).normalizer == pytest.approx(ref, rel=1e-10)


def test_bingham_density_normalized_and_rotation_checked():
    c, s = np.cos(0.7), np.sin(0.7)
    Q = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    d = BinghamDistribution(0.0, 5.0, 1.0, Q)
    assert abs(integrate_sphere(d.density, FINE) - 1) < 1e-8
    with pytest.raises(DomainError):
        BinghamDistribution(0, 1, 2, 2 * np.eye(3))


def test_bingham_sharp_density_still_normalized():
    # the normalizer rule grows with the eigenvalue spread
    d = BinghamDistribution(0.0, 80.0, 0.0, norm_order=4)
    assert abs(integrate_sphere(d.density, SphereQuadrature.product(160, hemisphere=True)) - 1) < 1e-8


# planar Gaussian fiber fraction

@pytest.mark.parametrize("sigma,theta,sym", [(0.26, 0.45, True), (0.5, 0.0, False), (2.0, 1.0, True)])
def test_gaussian_fraction_averages_to_total(sigma, theta, sym):
    g = PlanarGaussian(sigma, theta, 0.7, sym)
    assert integrate_sphere(g.on_sphere, FINE) == pytest.approx(0.7, rel=1e-8)


def test_gaussian_symmetric_peaks():
    g = PlanarGaussian(0.2, 0.45, 1.0, symmetric=True)
    assert g.vbar(0.45) == pytest.approx(g.vbar(-0.45))
    assert g.vbar(0.45) > g.vbar(0.0)
    assert g.vbar(0.3) == pytest.approx(g.vbar(0.3 + np.pi))


def test_gaussian_domain():
    with pytest.raises(DomainError):
        PlanarGaussian(0.0)
    with pytest.raises(DomainError):
        PlanarGaussian(0.3, v_tot=1.5)
