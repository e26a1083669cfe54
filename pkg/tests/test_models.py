import numpy as np
import pytest
import sympy as sy
from hypothesis import given, strategies as st

from anisofit.errors import DomainError, InfeasibleStateError
from anisofit.kinematics import InvariantSet
from anisofit.models import (
    MODEL_CATALOG, ModelSpec, amdm_fiber, dbb_fiber, gent_matrix, goh_model, gst_fibers, hgo_fibers,
    hgo_model, hnors_model, hsgr_fibers, hsgr_model, invariant_response, macaulay, neo_hookean, ny_model,
    os_fibers, os_model,
)

from conftest import AAA, PHI_AAA

I1s, I4s, I6s = sy.symbols("I1 I4 I6", positive=True)


def _sym_energy(kind, p):
    """Energies written out independently in sympy (tension branch of every family)."""
    if kind == "HGO":
        return p["mu"] / 2 * (I1s - 3) + sum(p["k1"] / (2 * p["k2"]) * (sy.exp(p["k2"] * (I - 1) ** 2) - 1) for I in (I4s, I6s))
    if kind == "HSGR":
        q = lambda I: p["k2"] * ((1 - p["p"]) * (I1s - 3) ** 2 + p["p"] * (I - 1) ** 2)
        return p["mu"] / 2 * (I1s - 3) + sum(p["k1"] / (2 * p["k2"]) * (sy.exp(q(I)) - 1) for I in (I4s, I6s))
    if kind == "NY":
        Q = p["k1"] * (I1s - 3) ** 2 + p["k2"] * (sy.sqrt(I4s) - 1) ** 4 + p["k2"] * (sy.sqrt(I6s) - 1) ** 4
        return p["k0"] * (sy.exp(Q) - 1)
    if kind == "OS":
        return (-p["mu"] * p["Jm"] / 2 * sy.log(1 - (I1s - 3) / p["Jm"])
                - sum(p["k1"] * p["Jf"] / 2 * sy.log(1 - (I - 1) ** 2 / p["Jf"]) for I in (I4s, I6s)))
    raise KeyError(kind)


def _inv(I1, I4, I6):
    return InvariantSet(I1, 3.0, 1.0, I4, 1.0, I6, 1.0)


@pytest.mark.parametrize("kind", ["HGO", "HSGR", "NY", "OS"])
@pytest.mark.parametrize("point", [(3.05, 1.04, 1.02), (3.1, 1.08, 1.01), (3.02, 1.003, 1.06)])
def test_derivatives_match_symbolic_oracle(kind, point):
    p = AAA[kind]
    W = _sym_energy(kind, p)
    subs = dict(zip((I1s, I4s, I6s), point))
    spec = ModelSpec(kind, p)
    e, d = invariant_response(spec, _inv(*point))
    assert float(e) == pytest.approx(float(W.subs(subs)), rel=1e-10)
    for sym, got in ((I1s, d.psi1), (I4s, d.psi4), (I6s, d.psi6)):
        assert float(got) == pytest.approx(float(sy.diff(W, sym).subs(subs)), rel=1e-9, abs=1e-12)
    assert d.psi2 == 0 and d.psi5 == 0 and d.psi7 == 0


invariant_kinds = ["NeoHooke", "NY", "HGO", "HSGR", "OS"]


def _random_params(kind, rng):
    info = MODEL_CATALOG[kind]
    vals = {}
    for prm in info.params:
        lo, hi = prm.search_bounds
        if prm.log:
            lo = max(lo, 1e-3)
            vals[prm.name] = float(np.exp(rng.uniform(np.log(lo), np.log(min(hi, 50.0)))))
        else:
            vals[prm.name] = float(rng.uniform(lo, hi))
    if kind == "OS":
        vals["Jm"] = max(vals["Jm"], 0.5)
        vals["Jf"] = max(vals["Jf"], 0.5)
    return vals


@pytest.mark.parametrize("kind", invariant_kinds)
def test_derivatives_match_finite_differences(kind):
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 100:
        p = _random_params(kind, rng)
        spec = ModelSpec(kind, p)
        x = np.array([3 + rng.uniform(0, 0.15), 3.0, 1.0, rng.uniform(0.9, 1.12), 1.0, rng.uniform(0.9, 1.12), 1.0])
        if min(abs(x[3] - 1), abs(x[5] - 1)) < 1e-3:
            continue
        e0, d = invariant_response(spec, InvariantSet(*x))
        if not np.isfinite(e0) or abs(e0) > 1e8:
            continue
        for i, got in enumerate(d.as_tuple()):
            h = 1e-6 * max(1.0, abs(x[i]))
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            fd = (invariant_response(spec, InvariantSet(*xp))[0] - invariant_response(spec, InvariantSet(*xm))[0]) / (2 * h)
            assert float(got) == pytest.approx(fd, rel=1e-5, abs=1e-7 * max(1.0, abs(e0))), (kind, p, x, i)
        checked += 1


@pytest.mark.parametrize("kind", sorted(AAA))
def test_rest_state_is_stress_free_in_energy(kind):
    spec = ModelSpec(kind, AAA[kind])
    if kind in invariant_kinds:
        e, d = invariant_response(spec, _inv(3.0, 1.0, 1.0), "ani")
        assert e == 0.0
        if kind != "NY":
            assert all(np.all(np.asarray(x) == 0) for x in d.as_tuple())
    elif kind in ("GOH", "HNORS"):
        e, psi_f = gst_fibers(spec["k1"], spec["k2"], np.zeros(2))
        assert e == 0.0 and np.all(psi_f == 0)
    elif kind in ("AMDM", "ASMD"):
        assert amdm_fiber(spec["k1"], spec["k2"], 1.0) == (0.0, 0.0)


def test_neo_hookean():
    e, d = neo_hookean(2.0, _inv(3.5, 1, 1))
    assert e == pytest.approx(0.5) and d.psi1 == pytest.approx(1.0)


def test_hgo_macaulay_switch():
    _, d = hgo_fibers(1.0, 2.0, _inv(3.1, 0.95, 1.05))
    assert d.psi4 == 0.0 and d.psi6 > 0


def test_hgo_model_sum():
    e, d = hgo_model(1.0, 0.5, 3.0, _inv(3.1, 1.05, 1.05))
    e_f, _ = hgo_fibers(0.5, 3.0, _inv(3.1, 1.05, 1.05))
    assert e == pytest.approx(0.05 + e_f)


def test_hsgr_unit_p_recovers_hgo():
    grid = [_inv(3 + t, 1 + 0.7 * t, 1 + 0.4 * t) for t in np.linspace(0, 0.2, 21)]
    for inv in grid:
        e1, d1 = hsgr_fibers(0.27, 47.0, 1.0, inv)
        e2, d2 = hgo_fibers(0.27, 47.0, inv)
        assert e1 == pytest.approx(e2, rel=1e-12, abs=1e-15)
        assert np.allclose(d1.as_tuple(), d2.as_tuple(), rtol=1e-12)


def test_hsgr_inactive_families_do_not_overflow():
    e, d = hsgr_fibers(1.0, 2000.0, 0.5, _inv(50.0, 0.5, 0.5))
    assert e == 0.0 and d.psi1 == 0.0


def test_hsgr_p_domain():
    with pytest.raises(DomainError):
        hsgr_model(1, 1, 1, 1.5, _inv(3, 1, 1))


def test_goh_unaligned_zero_dispersion_is_hgo_family():
    E = np.array([0.04, 0.02])
    e, psi1, psi_f = goh_model(2.0, 0.5, 10.0, 0.0, E)
    e_hgo, d = hgo_fibers(0.5, 10.0, _inv(3.0, 1.04, 1.02))
    assert e == pytest.approx(e_hgo)
    assert np.allclose(psi_f, [d.psi4, d.psi6])
    assert psi1 == pytest.approx(1.0)


def test_gst_tension_mask():
    e, psi_f = gst_fibers(1.0, 1.0, np.array([0.1, 0.1]), active=np.array([True, False]))
    assert psi_f[1] == 0 and psi_f[0] > 0
    e_inf, psi_inf = gst_fibers(1.0, 1e4, np.array([5.0]), active=np.array([False]))
    assert e_inf == 0.0 and psi_inf[0] == 0.0


def test_gst_domains():
    with pytest.raises(DomainError):
        goh_model(1, 1, 1, 0.5, np.zeros(2))
    with pytest.raises(DomainError):
        hnors_model(1, 1, 1, 0.5, 0.7, np.zeros(2))


def test_os_limits_raise():
    with pytest.raises(InfeasibleStateError) as exc:
        gent_matrix(1.0, 0.2, _inv(3.3, 1, 1))
    assert exc.value.bound == "I1 < 3 + Jm"
    with pytest.raises(InfeasibleStateError):
        os_fibers(1.0, 0.01, _inv(3.0, 1.2, 1.0))
    # compressed fibers never reach the limit
    os_model(1.0, 0.5, 1.0, 0.01, _inv(3.0, 0.5, 0.5))


def test_os_large_jm_is_neo_hookean():
    for I1 in np.linspace(3.0, 3.2, 21):
        e, d = gent_matrix(2.0, 1e8, _inv(I1, 1, 1))
        e_nh, d_nh = neo_hookean(2.0, _inv(I1, 1, 1))
        assert e == pytest.approx(e_nh, rel=1e-6, abs=1e-14)
        assert d.psi1 == pytest.approx(d_nh.psi1, rel=1e-6)


def test_ny_requires_positive_fiber_invariants():
    with pytest.raises(DomainError):
        ny_model(1, 1, 1, _inv(3, 0, 1))


# angular-integration fiber laws

def test_amdm_fiber_compressed_and_continuous():
    assert amdm_fiber(1.0, 1.0, 0.95) == (0.0, 0.0)
    assert amdm_fiber(1.0, 1.0, 1.0)[1] == 0.0


def test_amdm_fiber_derivative():
    k1, k2, lf, h = 0.9118, 46.8474, 1.05, 1e-6
    fd = (amdm_fiber(k1, k2, lf + h)[0] - amdm_fiber(k1, k2, lf - h)[0]) / (2 * h)
    assert amdm_fiber(k1, k2, lf)[1] == pytest.approx(fd, rel=1e-6)


def test_dbb_fiber_values():
    assert dbb_fiber(3.0, 1.0, 1.0) == pytest.approx(0.0)
    assert dbb_fiber(3.0, 2.5, 1.0) == pytest.approx(3.0 * 1.5)
    assert dbb_fiber(3.0, 2.5, 0.9, cutoff=True) == 0.0


def test_dbb_fiber_linea_alba():
    k1, k2, lf = 56.0009, 0.7921, 1.1
    assert dbb_fiber(k1, k2, lf) == pytest.approx(k1 * lf**2 * (k2 * np.exp(lf**2 - 1) - 1), rel=1e-14)


@given(st.floats(-3, 3))
def test_macaulay(x):
    assert macaulay(x) == (x + abs(x)) / 2


# catalog and specs

def test_catalog_parameter_counts():
    expected = {"HNORS": 6, "HSGR": 5, "AMDM": 5, "GOH": 5, "ASMD": 6, "DBB": 6, "NY": 4, "HGO": 4, "OS": 5}
    assert {k: MODEL_CATALOG[k].nop for k in expected} == expected


def test_catalog_formulations():
    tags = {k: m.formulation for k, m in MODEL_CATALOG.items()}
    assert tags["GOH"] == tags["HNORS"] == "GST"
    assert {tags[k] for k in ("AMDM", "ASMD", "DBB")} == {"AI"}
    assert {tags[k] for k in ("NY", "HGO", "HSGR", "OS")} == {"I1-I4"}


def test_spec_validation():
    with pytest.raises(DomainError):
        ModelSpec("XYZ", {})
    with pytest.raises(DomainError):
        ModelSpec("HGO", dict(mu=1.0, k1=1.0))
    with pytest.raises(DomainError):
        ModelSpec("HGO", dict(mu=1.0, k1=1.0, k2=1.0, extra=2.0))
    with pytest.raises(DomainError):
        ModelSpec("HGO", dict(mu=-1.0, k1=1.0, k2=1.0))
    with pytest.raises(DomainError):
        ModelSpec("DBB", dict(AAA["DBB"], v_tot=0.0))


def test_spec_is_immutable_and_updatable():
    spec = ModelSpec("GOH", AAA["GOH"], phi=PHI_AAA)
    with pytest.raises(TypeError):
        spec.params["mu"] = 3.0
    other = spec.with_params(kappa=0.1, phi=0.0)
    assert other["kappa"] == 0.1 and other.phi == 0.0 and spec["kappa"] == 0.2256
    assert spec.to_dict()["phi_deg"] == pytest.approx(26.0)


@given(st.floats(0.01, 5), st.floats(0.1, 200), st.floats(-0.2, 0.3))
def test_gst_family_derivative(k1, k2, E):
    h = 1e-7
    e_p, _ = gst_fibers(k1, k2, np.array([E + h]))
    e_m, _ = gst_fibers(k1, k2, np.array([E - h]))
    _, psi = gst_fibers(k1, k2, np.array([E]))
    assert psi[0] == pytest.approx((e_p - e_m) / (2 * h), rel=1e-5, abs=1e-9)
