"""Free-energy functions of the model catalog and their first derivatives.

Invariant-based models return ``(energy, PsiDerivatives)`` where the
derivatives are taken with respect to I1..I7. GST models work with the
per-family fiber strain ``E_i = H_i : C - 1`` and AI models with the affine
fiber stretch ``lambda_f``. All functions accept numpy arrays and broadcast.

Stress-like parameters (mu, k0, k1) are in MPa; everything else is
dimensionless.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from math import pi
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import DomainError, InfeasibleStateError
from .kinematics import FiberGeometry, InvariantSet


def macaulay(x):
    return np.maximum(x, 0.0)


@dataclass(frozen=True)
class PsiDerivatives:
    psi1: np.ndarray | float = 0.0
    psi2: np.ndarray | float = 0.0
    psi3: np.ndarray | float = 0.0
    psi4: np.ndarray | float = 0.0
    psi5: np.ndarray | float = 0.0
    psi6: np.ndarray | float = 0.0
    psi7: np.ndarray | float = 0.0

    def __add__(self, other: "PsiDerivatives") -> "PsiDerivatives":
        return PsiDerivatives(*(np.add(a, b) for a, b in zip(self.as_tuple(), other.as_tuple())))

    def as_tuple(self):
        return (self.psi1, self.psi2, self.psi3, self.psi4, self.psi5, self.psi6, self.psi7)


def _inv(invariants):
    if isinstance(invariants, InvariantSet):
        return invariants
    return InvariantSet(*invariants)


# ---------------------------------------------------------------------------
# invariant-based models


def neo_hookean(mu, invariants):
    """``Psi = mu/2 (I1 - 3)``; the only nonzero derivative is ``psi1 = mu/2``."""
    inv = _inv(invariants)
    I1 = np.asarray(inv.I1, dtype=float)
    return 0.5 * mu * (I1 - 3.0), PsiDerivatives(psi1=np.full_like(I1, 0.5 * mu))


def ny_model(k0, k1, k2, invariants):
    """Newman-Yin exponential energy extended to two fiber families.

    ``Psi = k0 (exp(Q) - 1)``,
    ``Q = k1 (I1-3)^2 + k2 (sqrt(I4)-1)^4 + k2 (sqrt(I6)-1)^4``.
    """
    inv = _inv(invariants)
    I1, I4, I6 = (np.asarray(x, dtype=float) for x in (inv.I1, inv.I4, inv.I6))
    if np.any(I4 <= 0) or np.any(I6 <= 0):
        raise DomainError("NY model needs I4 > 0 and I6 > 0")
    s4, s6 = np.sqrt(I4), np.sqrt(I6)
    with np.errstate(over="ignore"):
        eQ = np.exp(k1 * (I1 - 3.0) ** 2 + k2 * (s4 - 1.0) ** 4 + k2 * (s6 - 1.0) ** 4)
        energy = k0 * (eQ - 1.0)
        psi1 = 2.0 * k0 * k1 * (I1 - 3.0) * eQ
        psi4 = 2.0 * k0 * k2 * eQ * (s4 - 1.0) ** 3 / s4
        psi6 = 2.0 * k0 * k2 * eQ * (s6 - 1.0) ** 3 / s6
    return energy, PsiDerivatives(psi1=psi1, psi4=psi4, psi6=psi6)


def hgo_fibers(k1, k2, invariants):
    """Anisotropic HGO part ``k1/(2 k2) sum_{4,6} (exp(k2 <I-1>^2) - 1)``."""
    inv = _inv(invariants)
    m4 = macaulay(np.asarray(inv.I4, dtype=float) - 1.0)
    m6 = macaulay(np.asarray(inv.I6, dtype=float) - 1.0)
    with np.errstate(over="ignore"):
        energy = k1 / (2.0 * k2) * (np.expm1(k2 * m4**2) + np.expm1(k2 * m6**2))
        psi4 = k1 * m4 * np.exp(k2 * m4**2)
        psi6 = k1 * m6 * np.exp(k2 * m6**2)
    return energy, PsiDerivatives(psi4=psi4, psi6=psi6)


def hgo_model(mu, k1, k2, invariants):
    """Holzapfel-Gasser-Ogden: neo-Hookean matrix plus two exponential fiber families.

    ``psi4 = k1 <I4-1> exp(k2 <I4-1>^2)``, which is the exact derivative of the
    energy; it vanishes for ``I4 <= 1``.
    """
    e_iso, d_iso = neo_hookean(mu, invariants)
    e_ani, d_ani = hgo_fibers(k1, k2, invariants)
    return e_iso + e_ani, d_iso + d_ani


def hsgr_fibers(k1, k2, p, invariants):
    inv = _inv(invariants)
    I1 = np.asarray(inv.I1, dtype=float)
    energy = 0.0
    psi1 = 0.0
    psi_fam = []
    for I in (inv.I4, inv.I6):
        I = np.asarray(I, dtype=float)
        on = I > 1.0
        m = macaulay(I - 1.0)
        with np.errstate(over="ignore", invalid="ignore"):
            Q = np.where(on, k2 * ((1.0 - p) * (I1 - 3.0) ** 2 + p * m**2), 0.0)
            eQ = np.exp(Q)
            energy = energy + np.where(on, k1 / (2.0 * k2) * np.expm1(Q), 0.0)
            psi1 = psi1 + np.where(on, k1 * (1.0 - p) * (I1 - 3.0) * eQ, 0.0)
            psi_fam.append(np.where(on, k1 * p * m * eQ, 0.0))
    return energy, PsiDerivatives(psi1=psi1, psi4=psi_fam[0], psi6=psi_fam[1])


def hsgr_model(mu, k1, k2, p, invariants):
    """Holzapfel-Sommer-Gasser-Regitnig mixed I1/I4 exponential model.

    Each family contributes ``sgn<I-1> k1/(2 k2) (exp(k2[(1-p)(I1-3)^2 + p<I-1>^2]) - 1)``;
    on the symmetric principal-axis paths (I4 = I6) this equals the
    single-family form with prefactor ``k1/k2``. ``p = 1`` gives HGO exactly.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"HSGR p must lie in [0, 1], got {p!r}")
    e_iso, d_iso = neo_hookean(mu, invariants)
    e_ani, d_ani = hsgr_fibers(k1, k2, p, invariants)
    return e_iso + e_ani, d_iso + d_ani


def gent_matrix(mu, Jm, invariants):
    inv = _inv(invariants)
    x = np.asarray(inv.I1, dtype=float) - 3.0
    if np.any(x >= Jm):
        raise InfeasibleStateError(
            f"matrix extensibility limit reached: I1 - 3 = {np.max(x):.6g} >= Jm = {Jm:.6g}",
            bound="I1 < 3 + Jm", value=float(np.max(x)),
        )
    energy = -0.5 * mu * Jm * np.log1p(-x / Jm)
    return energy, PsiDerivatives(psi1=0.5 * mu * Jm / (Jm - x))


def os_fibers(k1, Jf, invariants):
    inv = _inv(invariants)
    energy = 0.0
    psis = []
    for I in (inv.I4, inv.I6):
        m = macaulay(np.asarray(I, dtype=float) - 1.0)
        if np.any(m * m >= Jf):
            raise InfeasibleStateError(
                f"fiber extensibility limit reached: <I-1>^2 = {np.max(m * m):.6g} >= Jf = {Jf:.6g}",
                bound="<I_alpha - 1>^2 < Jf", value=float(np.max(m * m)),
            )
        energy = energy - 0.5 * k1 * Jf * np.log1p(-(m * m) / Jf)
        psis.append(k1 * Jf * m / (Jf - m * m))
    return energy, PsiDerivatives(psi4=psis[0], psi6=psis[1])


def os_model(mu, Jm, k1, Jf, invariants):
    """Ogden-Saccomandi: Gent matrix with limited-extensibility fibers.

    Raises :class:`InfeasibleStateError` when ``I1 >= 3 + Jm`` or
    ``<I_alpha - 1>^2 >= Jf``.
    """
    e_iso, d_iso = gent_matrix(mu, Jm, invariants)
    e_ani, d_ani = os_fibers(k1, Jf, invariants)
    return e_iso + e_ani, d_iso + d_ani


# ---------------------------------------------------------------------------
# generalized structure tensor models


def gst_fibers(k1, k2, E, active=None):
    """Per-family ``k1/(2 k2) (exp(k2 E^2) - 1)`` and ``psi_f = k1 E exp(k2 E^2)``.

    ``E`` has the family on its leading axis. ``active`` masks families that
    are switched off by the tension-only condition.
    """
    E = np.asarray(E, dtype=float)
    on = np.ones(E.shape, bool) if active is None else np.asarray(active, dtype=bool)
    E = np.where(on, E, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        energy = np.sum(k1 / (2.0 * k2) * np.expm1(k2 * E * E), axis=0)
        psi_f = k1 * E * np.exp(k2 * E * E)
    return energy, psi_f


def goh_model(mu, k1, k2, kappa, E, I1=3.0, active=None):
    """Gasser-Ogden-Holzapfel energy; returns ``(energy, psi1, psi_f)``.

    ``psi1 = mu/2`` so that the matrix is the same neo-Hookean solid as in
    the other models.
    """
    if not 0.0 <= kappa <= 1.0 / 3.0:
        raise DomainError(f"GOH kappa must lie in [0, 1/3], got {kappa!r}")
    e_iso, d_iso = neo_hookean(mu, (I1, 0, 1, 1, 1, 1, 1))
    e_ani, psi_f = gst_fibers(k1, k2, E, active)
    return e_iso + e_ani, d_iso.psi1, psi_f


def hnors_model(mu, k1, k2, kappa_ip, kappa_op, E, I1=3.0, active=None):
    """Holzapfel-Niestrawska-Ogden-Reinisch-Schriefl: GOH energy with the bivariate H."""
    if not 0.0 <= kappa_ip <= 1.0 or not 0.0 <= kappa_op <= 0.5:
        raise DomainError(f"HNORS needs kappa_ip in [0,1], kappa_op in [0,1/2]; got {kappa_ip!r}, {kappa_op!r}")
    e_iso, d_iso = neo_hookean(mu, (I1, 0, 1, 1, 1, 1, 1))
    e_ani, psi_f = gst_fibers(k1, k2, E, active)
    return e_iso + e_ani, d_iso.psi1, psi_f


# ---------------------------------------------------------------------------
# angular-integration fiber laws


def amdm_fiber(k1, k2, lambda_f):
    """Exponential fiber energy and its stretch derivative; zero for ``lambda_f < 1``."""
    lf = np.asarray(lambda_f, dtype=float)
    x = lf * lf - 1.0
    on = lf >= 1.0
    with np.errstate(over="ignore"):
        psi_fib = np.where(on, k1 / (2.0 * k2) * np.expm1(k2 * x * x), 0.0)
        psi_f = np.where(on, 2.0 * k1 * lf * x * np.exp(k2 * x * x), 0.0)
    return psi_fib, psi_f


def dbb_fiber(k1, k2, lambda_f, cutoff=False):
    """Fiber Kirchhoff stress ``k1 lambda_f^2 (k2 exp(lambda_f^2 - 1) - 1)``.

    Evaluated exactly as written: at ``lambda_f = 1`` the value is
    ``k1 (k2 - 1)``, nonzero unless ``k2 = 1``. ``cutoff=True`` zeroes
    compressed fibers.
    """
    lf = np.asarray(lambda_f, dtype=float)
    with np.errstate(over="ignore"):
        tau = k1 * lf * lf * (k2 * np.exp(lf * lf - 1.0) - 1.0)
    if cutoff:
        tau = np.where(lf >= 1.0, tau, 0.0)
    return tau


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class ParamInfo:
    name: str
    lower: float
    upper: float
    unit: str = "-"
    log: bool = False  # search on a log scale
    strict_lower: bool = False  # lower bound excluded from the admissible set
    search: tuple | None = None  # default fitting interval when narrower than the admissible one

    @property
    def search_bounds(self) -> tuple[float, float]:
        return self.search if self.search is not None else (self.lower, self.upper)

    def admissible(self, value: float) -> bool:
        if not np.isfinite(value):
            return False
        lo_ok = value > self.lower if self.strict_lower else value >= self.lower
        return lo_ok and value <= self.upper


def _pos(name, lo, hi, unit="-"):
    return ParamInfo(name, lo, hi, unit, log=True, strict_lower=True)


MU = _pos("mu", 1e-5, 20.0, "MPa")
K1 = _pos("k1", 1e-4, 500.0, "MPa")
K2 = _pos("k2", 1e-3, 2000.0)


@dataclass(frozen=True)
class ModelInfo:
    kind: str
    name: str
    formulation: str  # "I1" | "I1-I4" | "GST" | "AI"
    params: tuple[ParamInfo, ...]
    uses_phi: bool = True

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    @property
    def nop(self) -> int:
        return len(self.params) + int(self.uses_phi)

    def param(self, name: str) -> ParamInfo:
        for p in self.params:
            if p.name == name:
                return p
        if name == "phi" and self.uses_phi:
            return PHI
        raise KeyError(f"{self.kind} has no parameter {name!r}")


PHI = ParamInfo("phi", 0.0, pi / 2, "rad")

MODEL_CATALOG: dict[str, ModelInfo] = {
    m.kind: m
    for m in [
        ModelInfo("NeoHooke", "neo-Hookean", "I1", (MU,), uses_phi=False),
        ModelInfo("NY", "Newman-Yin", "I1-I4",
                  (_pos("k0", 1e-4, 5000.0, "MPa"), ParamInfo("k1", 0.0, 500.0, log=False), K2)),
        ModelInfo("HGO", "Holzapfel-Gasser-Ogden", "I1-I4", (MU, K1, K2)),
        ModelInfo("HSGR", "Holzapfel-Sommer-Gasser-Regitnig", "I1-I4",
                  (MU, K1, K2, ParamInfo("p", 0.0, 1.0))),
        ModelInfo("OS", "Ogden-Saccomandi", "I1-I4",
                  (MU, K1, _pos("Jf", 1e-3, 100.0), ParamInfo("Jm", 1e-3, 1e9, log=True, strict_lower=True, search=(1e-3, 1e3)))),
        ModelInfo("GOH", "Gasser-Ogden-Holzapfel", "GST",
                  (MU, K1, K2, ParamInfo("kappa", 0.0, 1.0 / 3.0))),
        ModelInfo("HNORS", "Holzapfel-Niestrawska-Ogden-Reinisch-Schriefl", "GST",
                  (MU, K1, K2, ParamInfo("kappa_ip", 0.0, 1.0), ParamInfo("kappa_op", 0.0, 0.5))),
        ModelInfo("AMDM", "Alastrue-Martinez-Doblare-Menzel", "AI",
                  (MU, K1, K2, ParamInfo("b", 0.0, 1e4, search=(0.0, 30.0)))),
        ModelInfo("ASMD", "Alastrue-Saez-Martinez-Doblare", "AI",
                  (MU, K1, K2, ParamInfo("kappa1", 0.0, 100.0, search=(0.0, 10.0)), ParamInfo("kappa2", 0.0, 100.0, search=(0.0, 10.0)),
                   ParamInfo("kappa3", 0.0, 100.0, search=(0.0, 10.0))), uses_phi=False),
        ModelInfo("DBB", "Driessen-Bouten-Baaijens", "AI",
                  (MU, K1, K2, _pos("sigma", 0.02, 3.0), ParamInfo("v_tot", 0.0, 1.0, strict_lower=True))),
    ]
}

ANISOTROPIC_KINDS = tuple(k for k in MODEL_CATALOG if k != "NeoHooke")

DEFAULT_AI_ORDER = 24


@dataclass(frozen=True)
class ModelSpec:
    """A model of the catalog with concrete parameter values.

    ``phi`` is the fiber angle to e1 in radians. For ASMD it rotates the
    Bingham frame about e3 instead. ``quad_order`` is the Gauss-Legendre
    order per panel of the sphere rule used by AI models.
    """

    kind: str
    params: Mapping[str, float]
    phi: float = 0.0
    quad_order: int = DEFAULT_AI_ORDER
    dbb_cutoff: bool = False

    def __post_init__(self):
        if self.kind not in MODEL_CATALOG:
            raise DomainError(f"unknown model kind {self.kind!r}; choose from {sorted(MODEL_CATALOG)}")
        info = MODEL_CATALOG[self.kind]
        params = {k: float(v) for k, v in dict(self.params).items()}
        missing = set(info.param_names) - set(params)
        extra = set(params) - set(info.param_names)
        if missing or extra:
            raise DomainError(f"{self.kind}: missing {sorted(missing)}, unexpected {sorted(extra)}")
        for p in info.params:
            if not p.admissible(params[p.name]):
                raise DomainError(f"{self.kind}: {p.name} = {params[p.name]!r} outside admissible domain")
        object.__setattr__(self, "params", MappingProxyType(params))

    @property
    def info(self) -> ModelInfo:
        return MODEL_CATALOG[self.kind]

    @property
    def fibers(self) -> FiberGeometry:
        return FiberGeometry(self.phi)

    def __getitem__(self, name: str) -> float:
        return self.params[name]

    def with_params(self, **updates) -> "ModelSpec":
        phi = updates.pop("phi", self.phi)
        return replace(self, params={**self.params, **updates}, phi=phi)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "phi_deg": float(np.rad2deg(self.phi)),
                "quad_order": self.quad_order, "dbb_cutoff": self.dbb_cutoff}


def invariant_response(spec: ModelSpec, invariants, part: str = "total"):
    """Energy and derivatives of an invariant-based model (``part`` in total/iso/ani)."""
    p = spec.params
    kind = spec.kind
    if kind == "NeoHooke":
        iso = lambda: neo_hookean(p["mu"], invariants)
        ani = None
    elif kind == "NY":
        # no isotropic/anisotropic split: the whole energy counts as anisotropic
        iso = None
        ani = lambda: ny_model(p["k0"], p["k1"], p["k2"], invariants)
    elif kind == "HGO":
        iso = lambda: neo_hookean(p["mu"], invariants)
        ani = lambda: hgo_fibers(p["k1"], p["k2"], invariants)
    elif kind == "HSGR":
        iso = lambda: neo_hookean(p["mu"], invariants)
        ani = lambda: hsgr_fibers(p["k1"], p["k2"], p["p"], invariants)
    elif kind == "OS":
        iso = lambda: gent_matrix(p["mu"], p["Jm"], invariants)
        ani = lambda: os_fibers(p["k1"], p["Jf"], invariants)
    else:
        raise DomainError(f"{kind} is not an invariant-based model")
    parts = {"total": (iso, ani), "iso": (iso,), "ani": (ani,)}[part]
    energy, derivs = 0.0, PsiDerivatives()
    for fn in parts:
        if fn is None:
            continue
        e, d = fn()
        energy, derivs = energy + e, derivs + d
    return energy, derivs
