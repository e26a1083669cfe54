"""Fiber orientation densities, dispersion measures and sphere quadrature.

Conventions
-----------
All densities are normalized against the sphere average
``<f> = 1/(4 pi) * integral over S^2 of f dA``, i.e. ``<rho> = 1``.
Every density used here is antipodally symmetric, so a hemisphere rule with
doubled weights integrates stress and energy integrands exactly as the full
sphere does.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import pi, sqrt

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, QuadratureError

FOUR_PI = 4.0 * pi
_QUAD_KW = dict(epsabs=1e-14, epsrel=1e-13, limit=200)


# ---------------------------------------------------------------------------
# special functions by adaptive quadrature of their integral definitions


def erfi(x: float) -> float:
    """Imaginary error function ``2/sqrt(pi) * int_0^x exp(t^2) dt``."""
    val, _ = integrate.quad(lambda t: np.exp(t * t), 0.0, x, **_QUAD_KW)
    return 2.0 / sqrt(pi) * val


def bessel_i0(b: float) -> float:
    """Modified Bessel function ``I0(b) = 1/pi * int_0^pi exp(b cos t) dt``."""
    val, _ = integrate.quad(lambda t: np.exp(b * np.cos(t)), 0.0, pi, **_QUAD_KW)
    return val / pi


def _bessel_i0_scaled(b: float) -> float:
    # exp(-b) * I0(b), safe for large b
    val, _ = integrate.quad(lambda t: np.exp(b * (np.cos(t) - 1.0)), 0.0, pi, **_QUAD_KW)
    return val / pi


def _check_concentration(b, name="b"):
    if not b >= 0 or not np.isfinite(b):
        raise DomainError(f"concentration {name} must be finite and >= 0, got {b!r}")


# ---------------------------------------------------------------------------
# rotationally symmetric pi-periodic von Mises density


@lru_cache(maxsize=256)
def _vonmises_scale(b: float) -> float:
    # int_0^1 exp(2b(x^2 - 1)) dx ; equals exp(-2b) sqrt(pi) erfi(sqrt(2b)) / (2 sqrt(2b))
    if b == 0.0:
        return 1.0
    return _peaked_quad(lambda x: np.exp(2.0 * b * (x * x - 1.0)), b)


def _peaked_quad(f, b):
    # integrand concentrates within ~1/(4b) of x = 1; split there so quad sees the peak
    c = 1.0 - min(1.0, 40.0 / (4.0 * b)) if b > 0 else 0.0
    val = integrate.quad(f, c, 1.0, **_QUAD_KW)[0]
    if c > 0.0:
        val += integrate.quad(f, 0.0, c, **_QUAD_KW)[0]
    return val


@dataclass(frozen=True)
class VonMisesPlanar:
    """Normalized pi-periodic von Mises density about a mean direction.

    ``rho(Theta) = exp(b (cos 2 Theta + 1)) / Z(b)`` with Theta the angle to the
    mean direction, normalized so that ``1/2 int_0^pi rho sin(Theta) dTheta = 1``.
    """

    b: float

    def __post_init__(self):
        _check_concentration(self.b)

    def density_cos(self, x):
        """Density as a function of ``x = cos(Theta)``."""
        x = np.asarray(x, dtype=float)
        return np.exp(2.0 * self.b * (x * x - 1.0)) / _vonmises_scale(float(self.b))

    def density(self, theta):
        return self.density_cos(np.cos(theta))

    def on_sphere(self, r, M):
        """Density at unit directions ``r`` (..., 3) for mean direction ``M``."""
        return self.density_cos(np.asarray(r) @ np.asarray(M, dtype=float))

    @property
    def kappa(self) -> float:
        return kappa_from_b(self.b)


def vonmises_density(dist: VonMisesPlanar, theta):
    return dist.density(theta)


def vonmises_normalization(b: float) -> float:
    """``1/2 int_0^pi rho(Theta) sin(Theta) dTheta``; equal to one by construction."""
    dist = VonMisesPlanar(b)
    val, _ = integrate.quad(lambda t: dist.density(t) * np.sin(t), 0.0, pi, **_QUAD_KW)
    return 0.5 * val


@lru_cache(maxsize=1024)
def kappa_from_b(b: float) -> float:
    """Dispersion parameter ``kappa = 1/4 int_0^pi rho sin^3`` of the von Mises density."""
    _check_concentration(b)
    b = float(b)
    if b == 0.0:
        return 1.0 / 3.0
    dist = VonMisesPlanar(b)
    # sin^3 dTheta = (1 - x^2) dx, density even in x
    return 0.5 * _peaked_quad(lambda x: dist.density_cos(x) * (1.0 - x * x), b)


def b_from_kappa(kappa: float, b_max: float = 1e4) -> float:
    """Invert :func:`kappa_from_b` (the relation is one-to-one and decreasing)."""
    if not 0.0 < kappa <= 1.0 / 3.0:
        raise DomainError(f"kappa must lie in (0, 1/3], got {kappa!r}")
    if kappa >= 1.0 / 3.0 - 1e-15:
        return 0.0
    if kappa <= kappa_from_b(b_max):
        return b_max
    return optimize.brentq(lambda b: kappa_from_b(b) - kappa, 0.0, b_max, xtol=1e-12)


def goh_structure_tensor(kappa: float, M) -> np.ndarray:
    """``H = kappa 1 + (1 - 3 kappa) M (x) M``."""
    if not 0.0 <= kappa <= 1.0 / 3.0:
        raise DomainError(f"kappa must lie in [0, 1/3], got {kappa!r}")
    M = np.asarray(M, dtype=float)
    return kappa * np.eye(3) + (1.0 - 3.0 * kappa) * np.outer(M, M)


# ---------------------------------------------------------------------------
# bivariate (in-plane x out-of-plane) von Mises


def hnors_structure_tensor(kappa_ip: float, kappa_op: float, Mi, Mn) -> np.ndarray:
    if not 0.0 <= kappa_ip <= 1.0:
        raise DomainError(f"kappa_ip must lie in [0, 1], got {kappa_ip!r}")
    if not 0.0 <= kappa_op <= 0.5:
        raise DomainError(f"kappa_op must lie in [0, 1/2], got {kappa_op!r}")
    Mi = np.asarray(Mi, dtype=float)
    Mn = np.asarray(Mn, dtype=float)
    return (
        2.0 * kappa_ip * kappa_op * np.eye(3)
        + 2.0 * kappa_op * (1.0 - 2.0 * kappa_ip) * np.outer(Mi, Mi)
        + (1.0 - 2.0 * kappa_op - 2.0 * kappa_ip * kappa_op) * np.outer(Mn, Mn)
    )


@lru_cache(maxsize=256)
def _op_scale(b: float) -> float:
    # int_0^{pi/2} exp(b(cos 2T - 1)) cos T dT = int_0^1 exp(-2 b s^2) ds
    if b == 0.0:
        return 1.0
    val, _ = integrate.quad(lambda s: np.exp(-2.0 * b * s * s), 0.0, 1.0, **_QUAD_KW)
    return val


@dataclass(frozen=True)
class BivariateVonMises:
    """Product density ``rho_ip(Phi) * rho_op(Theta)``.

    Phi is the in-plane angle measured from the mean in-plane direction and
    Theta the elevation out of the plane. ``rho_ip`` averages to one over a
    period, ``rho_op`` satisfies ``int_0^{pi/2} rho_op cos(Theta) dTheta = 1``.
    """

    a: float
    b: float

    def __post_init__(self):
        _check_concentration(self.a, "a")
        _check_concentration(self.b, "b")

    def rho_ip(self, Phi):
        Phi = np.asarray(Phi, dtype=float)
        return np.exp(self.a * (np.cos(2.0 * Phi) - 1.0)) / _bessel_i0_scaled(float(self.a))

    def rho_op(self, Theta):
        Theta = np.asarray(Theta, dtype=float)
        return np.exp(self.b * (np.cos(2.0 * Theta) - 1.0)) / _op_scale(float(self.b))

    def on_sphere(self, r, Mi, Mn):
        r = np.asarray(r, dtype=float)
        s_n = r @ np.asarray(Mn, dtype=float)
        c_i = r @ np.asarray(Mi, dtype=float)
        cos2_plane = np.clip(1.0 - s_n * s_n, 0.0, None)
        with np.errstate(invalid="ignore", divide="ignore"):
            cos2_phi = np.where(cos2_plane > 0.0, c_i * c_i / cos2_plane, 1.0)
        rho_ip = np.exp(self.a * (2.0 * cos2_phi - 2.0)) / _bessel_i0_scaled(float(self.a))
        rho_op = np.exp(-2.0 * self.b * s_n * s_n) / _op_scale(float(self.b))
        return rho_ip * rho_op

    @property
    def kappas(self) -> tuple[float, float]:
        return kappas_from_concentrations(self.a, self.b)


@lru_cache(maxsize=1024)
def kappas_from_concentrations(a: float, b: float) -> tuple[float, float]:
    """In-plane and out-of-plane dispersion measures ``(kappa_ip, kappa_op)``.

    ``kappa_ip = 1/pi int_0^pi rho_ip sin^2 Phi dPhi`` and
    ``kappa_op = 1/2 int_0^{pi/2} rho_op cos^3 Theta dTheta`` (Theta the elevation).
    """
    dist = BivariateVonMises(a, b)
    k_ip, _ = integrate.quad(lambda p: dist.rho_ip(p) * np.sin(p) ** 2, 0.0, pi, **_QUAD_KW)
    k_op, _ = integrate.quad(lambda t: dist.rho_op(t) * np.cos(t) ** 3, 0.0, pi / 2, **_QUAD_KW)
    return k_ip / pi, 0.5 * k_op


# ---------------------------------------------------------------------------
# sphere quadrature


@dataclass(frozen=True)
class SphereQuadrature:
    """Discrete rule ``<f> ~ 1/(4 pi) sum_i w_i f(r_i)``.

    ``weights`` are area weights; they sum to ``4 pi`` (full sphere) or to
    ``4 pi`` after the doubling applied to hemisphere rules.
    """

    nodes: np.ndarray
    weights: np.ndarray
    hemisphere: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.weights) == 0:
            raise DomainError("empty quadrature rule")
        if np.any(self.weights <= 0):
            raise DomainError("quadrature weights must be positive")

    @classmethod
    def product(cls, n_theta: int = 24, n_phi: int | None = None, axis: int = 2,
                breaks=(), hemisphere: bool = False) -> "SphereQuadrature":
        """Gauss-Legendre in ``t = r[axis]`` times the trapezoid rule in azimuth.

        ``breaks`` are values of ``t`` in (-1, 1) where the integrand is known
        to have a kink; the Gauss-Legendre rule is applied panel by panel
        between them so the kink never falls inside a panel. With
        ``hemisphere=True`` only ``t >= 0`` is sampled and weights are doubled,
        which is exact for antipodally symmetric integrands.
        """
        if n_theta < 1:
            raise DomainError("n_theta must be >= 1")
        n_phi = 2 * n_theta if n_phi is None else n_phi
        lo = 0.0 if hemisphere else -1.0
        edges = sorted({lo, 1.0, *[float(b) for b in breaks if lo < b < 1.0]})
        x, w = np.polynomial.legendre.leggauss(n_theta)
        ts, wts = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            ts.append(0.5 * (b - a) * x + 0.5 * (a + b))
            wts.append(0.5 * (b - a) * w)
        t = np.concatenate(ts)
        wt = np.concatenate(wts)
        if hemisphere:
            wt = 2.0 * wt
        az = 2.0 * pi * (np.arange(n_phi) + 0.5) / n_phi
        s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
        T, A = np.meshgrid(t, az, indexing="ij")
        S = np.broadcast_to(s[:, None], T.shape)
        u, v = S * np.cos(A), S * np.sin(A)
        comps = [None, None, None]
        comps[axis] = T
        comps[(axis + 1) % 3] = u
        comps[(axis + 2) % 3] = v
        nodes = np.stack([c.ravel() for c in comps], axis=1)
        weights = (wt[:, None] * np.full(n_phi, 2.0 * pi / n_phi)[None, :]).ravel()
        meta = dict(n_theta=n_theta, n_phi=n_phi, axis=axis,
                    breaks=tuple(edges[1:-1]), hemisphere=hemisphere)
        return cls(nodes, weights, hemisphere, meta)

    def refined(self) -> "SphereQuadrature":
        """Same construction at doubled order, used for convergence checks."""
        m = self.meta
        if not m:
            raise DomainError("rule was not built by SphereQuadrature.product")
        return SphereQuadrature.product(2 * m["n_theta"], 2 * m["n_phi"], m["axis"],
                                        m["breaks"], m["hemisphere"])

    def __len__(self):
        return len(self.weights)


def integrate_sphere(f, quad: SphereQuadrature):
    """Sphere average ``1/(4 pi) sum_i w_i f(r_i)``.

    ``f`` maps an (m, 3) array of unit vectors to an array whose leading
    axis has length m. For hemisphere rules ``f`` must be even in ``r``.
    """
    if len(quad.weights) == 0:
        raise DomainError("empty quadrature rule")
    vals = np.asarray(f(quad.nodes), dtype=float)
    return np.tensordot(quad.weights, vals, axes=(0, 0)) / FOUR_PI


# ---------------------------------------------------------------------------
# Bingham


@dataclass(frozen=True)
class BinghamDistribution:
    """``rho(r) = exp(tr(Z Q^T r r^T Q)) / F0000(Z)``, ``Z = diag(kappa1..3)``."""

    kappa1: float
    kappa2: float
    kappa3: float
    Q: np.ndarray = field(default_factory=lambda: np.eye(3))
    norm_order: int = 48

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if Q.shape != (3, 3) or not np.allclose(Q.T @ Q, np.eye(3), atol=1e-12, rtol=0):
            raise DomainError("Q must be a 3x3 orthogonal matrix")
        object.__setattr__(self, "Q", Q)

    @property
    def Z(self) -> np.ndarray:
        return np.diag([self.kappa1, self.kappa2, self.kappa3])

    @property
    def _shift(self) -> float:
        return max(self.kappa1, self.kappa2, self.kappa3)

    def _unnormalized(self, r):
        y = np.asarray(r, dtype=float) @ self.Q
        k = np.array([self.kappa1, self.kappa2, self.kappa3])
        return np.exp((y * y) @ k - self._shift)

    @property
    def normalizer(self) -> float:
        """``F0000(Z)`` (the sphere average of ``etr(Z : r r^T)``)."""
        return _bingham_scaled_normalizer(self.kappa1, self.kappa2, self.kappa3,
                                          tuple(self.Q.ravel()), self.norm_order) * np.exp(self._shift)

    def density(self, r):
        scaled = _bingham_scaled_normalizer(self.kappa1, self.kappa2, self.kappa3,
                                            tuple(self.Q.ravel()), self.norm_order)
        return self._unnormalized(r) / scaled


@lru_cache(maxsize=256)
def _bingham_scaled_normalizer(k1, k2, k3, Qflat, order):
    # sharper densities need more nodes; the floor keeps mild cases cheap
    order = max(order, int(8 * np.ceil(np.sqrt(max(k1, k2, k3) - min(k1, k2, k3)))))
    dist = BinghamDistribution(k1, k2, k3, np.array(Qflat).reshape(3, 3), order)
    coarse = integrate_sphere(dist._unnormalized, SphereQuadrature.product(order, axis=2))
    fine = integrate_sphere(dist._unnormalized, SphereQuadrature.product(2 * order, axis=2))
    if abs(fine - coarse) > 1e-10 * abs(fine):
        raise QuadratureError(
            f"Bingham normalizer not converged at order {order}: "
            f"{coarse!r} vs {fine!r} at doubled order (kappas={k1}, {k2}, {k3})"
        )
    return float(fine)


def bingham_density(dist: BinghamDistribution, r):
    return dist.density(r)


# ---------------------------------------------------------------------------
# planar Gaussian volume fraction


def _wrapped_gaussian(d, sigma, n_images=4):
    # pi-periodic image sum; fibers r and -r are the same fiber
    d = np.asarray(d, dtype=float)
    d = (d + pi / 2) % pi - pi / 2
    out = np.zeros_like(d)
    for k in range(-n_images, n_images + 1):
        out += np.exp(-((d + k * pi) ** 2) / (2.0 * sigma * sigma))
    return out


@dataclass(frozen=True)
class PlanarGaussian:
    """Fiber volume fraction ``v_f(phi) = A * vbar(phi)`` over the in-plane azimuth.

    ``vbar`` is a Gaussian of standard deviation ``sigma`` about ``vartheta``
    wrapped with period pi. With ``symmetric=True`` it is the equal mixture of
    Gaussians about ``+vartheta`` and ``-vartheta`` (two fiber families).
    ``A`` is fixed so that the sphere average of ``v_f`` equals ``v_tot``.
    """

    sigma: float
    vartheta: float = 0.0
    v_tot: float = 1.0
    symmetric: bool = False

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")
        if not 0.0 < self.v_tot <= 1.0:
            raise DomainError(f"v_tot must lie in (0, 1], got {self.v_tot!r}")

    def vbar(self, phi):
        g = _wrapped_gaussian(np.asarray(phi) - self.vartheta, self.sigma)
        if self.symmetric:
            g = 0.5 * (g + _wrapped_gaussian(np.asarray(phi) + self.vartheta, self.sigma))
        return g

    @property
    def A(self) -> float:
        return _gaussian_amplitude(self.sigma, self.vartheta, self.v_tot, self.symmetric)

    def volume_fraction(self, phi):
        return self.A * self.vbar(phi)

    def on_sphere(self, r):
        r = np.asarray(r, dtype=float)
        return self.volume_fraction(np.arctan2(r[..., 1], r[..., 0]))


@lru_cache(maxsize=256)
def _gaussian_amplitude(sigma, vartheta, v_tot, symmetric):
    g = PlanarGaussian(sigma, vartheta, 1.0, symmetric)
    # vbar depends on the azimuth only, so the sphere average is the azimuthal mean
    mean, _ = integrate.quad(g.vbar, 0.0, 2.0 * pi, **_QUAD_KW)
    return v_tot / (mean / (2.0 * pi))
