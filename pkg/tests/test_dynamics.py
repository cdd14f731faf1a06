import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optorot.dynamics import (
    ConvergenceError,
    assess_stability,
    build_linear_model,
    effective_response,
    linear_model,
    random_linear_model,
    thermal_occupancy,
)
from optorot.params import CONSTANTS, ParameterSet, derive_quantities
from optorot.steadystate import steady_state

# Every entry of the drift-matrix pattern that is identically zero.
STRUCTURAL_ZEROS = {(0, 0), (0, 2), (0, 3), (1, 3), (2, 0), (2, 1), (3, 1)}


def test_drift_matrix_pattern():
    m = linear_model(1, 2, 3, 4, 5)
    expected = [[0, 1, 0, 0], [-1, -2, 3, 0], [0, 0, -2.5, 4], [3, 0, -4, -2.5]]
    np.testing.assert_array_equal(m.B, expected)
    assert m.ordering == ("dphi", "dL_z", "dX", "dY")


def test_vacuum_diffusion():
    m = linear_model(1.0, 0.3, 0.7, 1.1, 2.0, nbar=0.0)
    np.testing.assert_array_equal(m.D, np.diag([0, 0.3, 1.0, 1.0]))


def test_uncoupled_model_is_block_diagonal():
    m = linear_model(1.0, 0.1, 0.0, 1.0, 2.0, nbar=3.0)
    assert not m.B[:2, 2:].any() and not m.B[2:, :2].any()


def test_matrices_are_read_only():
    m = linear_model(1.0, 0.1, 0.5, 1.0, 2.0)
    with pytest.raises(ValueError):
        m.B[0, 0] = 1.0


def test_build_from_steady_state():
    p = ParameterSet()
    d = derive_quantities(p)
    ss = steady_state(p, d)
    m = build_linear_model(ss, p, d, 2.0)
    assert m.B[1, 2] == m.B[3, 0] == ss.G
    assert m.B[1, 1] == -d.gamma_phi
    assert m.D[1, 1] == d.gamma_phi * 5.0


rates = st.floats(min_value=1e-3, max_value=1e3)


@settings(max_examples=200)
@given(w=rates, gp=rates, G=rates, De=rates, gm=rates,
       n=st.floats(0, 1e6), sign=st.sampled_from([-1, 1]))
def test_structure_for_all_inputs(w, gp, G, De, gm, n, sign):
    m = linear_model(w, gp, G, sign * De, gm, n)
    zeros = {(i, j) for i in range(4) for j in range(4) if m.B[i, j] == 0}
    assert zeros == STRUCTURAL_ZEROS
    assert np.count_nonzero(m.D) == 3
    assert m.D[1, 1] == gp * (2 * n + 1)


def test_uncoupled_is_stable():
    v = assess_stability(linear_model(1.0, 0.01, 0.0, 0.7, 2.0))
    assert v.routh_hurwitz_pass and v.consistent and v.stable
    assert all(x > 0 for x in v.inequality_values)


def test_strong_red_coupling_breaks_second_inequality():
    w, gm, De = 1.0, 2.0, 0.8
    G_crit = math.sqrt(w * (gm**2 + 4 * De**2) / (4 * De))
    v = assess_stability(linear_model(w, 0.01, 1.05 * G_crit, De, gm))
    assert v.inequality_values[1] < 0
    assert not v.routh_hurwitz_pass and not v.stable and v.consistent
    v = assess_stability(linear_model(w, 0.01, 0.95 * G_crit, De, gm))
    assert v.inequality_values[1] > 0


def test_reference_point_stable():
    p = ParameterSet()
    d = derive_quantities(p)
    v = assess_stability(build_linear_model(steady_state(p, d), p, d, 0.0))
    assert v.routh_hurwitz_pass and v.spectral_abscissa < 0 and v.consistent


@settings(max_examples=300)
@given(seed=st.integers(0, 2**32 - 1))
def test_routh_hurwitz_matches_spectrum(seed):
    m = random_linear_model(np.random.default_rng(seed), stable=None)
    assert assess_stability(m).consistent


def test_thermal_occupancy_values():
    w = 2 * math.pi * 1e7
    k = CONSTANTS
    assert thermal_occupancy(w, 0.0) == 0.0
    assert thermal_occupancy(w, k.hbar * w / (4 * k.kB)) == pytest.approx(1 / (math.e**4 - 1), rel=1e-13)
    assert thermal_occupancy(w, k.hbar * w / (math.log(2) * k.kB)) == pytest.approx(1.0, rel=1e-13)
    assert thermal_occupancy(w, 1e-9) == 0.0  # exponent overflow


@given(T1=st.floats(1e-4, 1e4), T2=st.floats(1e-4, 1e4))
def test_thermal_occupancy_monotone(T1, T2):
    w = 6e7
    if T1 < T2:
        assert thermal_occupancy(w, T1) < thermal_occupancy(w, T2)
        assert thermal_occupancy(w, T1) > thermal_occupancy(2 * w, T1)


def _response(**kw):
    p = ParameterSet(**kw)
    d = derive_quantities(p)
    ss = steady_state(p, d)
    return p, d, ss, effective_response(ss, p, d)


def test_no_radiation_leaves_mirror_unchanged():
    p, d, _, r = _response(P_in=0.0, T=3.0)
    assert r.omega_eff == p.omega_phi
    assert r.D_eff == d.D_phi
    assert r.T_eff == p.T


def test_response_identities():
    p, d, ss, r = _response(T=50.0)
    k = CONSTANTS
    assert r.T_eff == (d.D_phi / r.D_eff) * p.T
    assert r.T_c == k.hbar * r.omega_eff / (4 * k.kB)
    assert r.nbar == thermal_occupancy(r.omega_eff, p.T)
    assert r.n_m == pytest.approx(k.kB * r.T_eff / (k.hbar * r.omega_eff), rel=1e-15)


def test_fixed_point_residual():
    from optorot.dynamics import optical_spring

    for kw in ({}, {"Delta": 0.5 * 2 * math.pi * 1e7}, {"L": 1e-4, "R": 250e-6, "finesse": 1e4}):
        p, d, ss, r = _response(**kw)
        w2, _ = optical_spring(r.omega_eff, ss.G, p.Delta, d.gamma, p.omega_phi)
        assert abs(r.omega_eff - math.sqrt(w2)) / p.omega_phi <= 1e-9


def test_weak_drive_matches_mechanical_eigenvalue():
    # Independent route: in weak coupling the mechanical pole of B sits at
    # -gamma_eff/2 + i*omega_eff.
    p, d, ss, r = _response(P_in=1e-3)
    m = build_linear_model(ss, p, d, 0.0)
    ev = np.linalg.eigvals(m.B)
    mech = ev[np.argmin(np.abs(ev.imag - p.omega_phi) + np.abs(ev.real))]
    assert mech.imag == pytest.approx(r.omega_eff, rel=1e-3)
    assert -2 * mech.real == pytest.approx(r.D_eff / d.I, rel=1e-2)


@settings(max_examples=100, deadline=None)
@given(P=st.just(0.0) | st.floats(1e-9, 0.1), x=st.floats(0.05, 3.0), l=st.integers(0, 200))
def test_red_detuning_adds_damping(P, x, l):
    p = ParameterSet(P_in=P, Delta=x * 2 * math.pi * 1e7, l=l)
    d = derive_quantities(p)
    ss = steady_state(p, d)
    if not assess_stability(build_linear_model(ss, p, d, 0.0)).stable:
        return
    try:
        r = effective_response(ss, p, d)
    except ConvergenceError:
        return
    assert r.D_eff >= d.D_phi
    if P * l == 0:
        assert r.D_eff == d.D_phi
    else:
        assert r.D_eff > d.D_phi


def test_non_real_effective_frequency_reports_last_iterate():
    # Red-detuned drive strong enough to soften the spring past zero.
    p = ParameterSet(P_in=5.0)
    d = derive_quantities(p)
    ss = steady_state(p, d)
    with pytest.raises(ConvergenceError) as err:
        effective_response(ss, p, d)
    assert err.value.last is not None
