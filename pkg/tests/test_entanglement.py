import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optorot.dynamics import linear_model, random_linear_model
from optorot.entanglement import (
    UnphysicalCovarianceError,
    check_physicality,
    fit_low_temperature,
    log_negativity,
    partial_transpose_eta,
    symplectic_eigenvalues,
)
from optorot.lyapunov import solve_lyapunov_direct

SWAP = np.eye(4)[[2, 3, 0, 1]]


def two_mode_squeezed(r):
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    return 0.5 * np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])


@pytest.mark.parametrize("nbar", [0.0, 0.5, 10.0, 1e4])
def test_thermal_times_vacuum(nbar):
    C = np.diag([nbar + 0.5, nbar + 0.5, 0.5, 0.5])
    rep = log_negativity(C)
    assert rep.sigma == pytest.approx((nbar + 0.5) ** 2 + 0.25)
    assert rep.detC == pytest.approx((nbar + 0.5) ** 2 / 4)
    assert rep.eta_minus == pytest.approx(0.5, rel=1e-12)
    assert rep.E_N == 0.0
    nu = symplectic_eigenvalues(C)
    np.testing.assert_allclose(nu, [0.5, nbar + 0.5], rtol=1e-12)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0])
def test_two_mode_squeezed(r):
    C = two_mode_squeezed(r)
    rep = log_negativity(C)
    assert rep.E_N == pytest.approx(2 * r, abs=1e-10)
    assert rep.eta_minus == pytest.approx(math.exp(-2 * r) / 2, rel=1e-9)
    assert abs(rep.eta_minus - partial_transpose_eta(C)) <= 1e-10
    assert rep.nu_min == pytest.approx(0.5, rel=1e-9)


def test_physicality():
    assert check_physicality(np.eye(4) / 2) == (pytest.approx(0.5), True)
    nu, ok = check_physicality(np.diag([3.5, 3.5, 0.5, 0.5]))
    assert ok and nu == pytest.approx(0.5)
    nu, ok = check_physicality(np.eye(4) / 4)
    assert not ok and nu == pytest.approx(0.25)


def test_unphysical_matrix_rejected():
    # Symmetric but not a covariance: sigma^2 - 4|C| is far below zero.
    C = np.array([
        [0.33, 0.19, 1.29, 0.33],
        [0.19, -2.2, -0.28, 0.81],
        [1.29, -0.28, 1.82, -0.64],
        [0.33, 0.81, -0.64, 2.0],
    ])
    with pytest.raises(UnphysicalCovarianceError):
        log_negativity(C)


def test_solver_output_at_zero_coupling_is_separable():
    for n in (0.0, 3.0, 1e3):
        rep = log_negativity(solve_lyapunov_direct(linear_model(1.0, 0.05, 0.0, 1.2, 2.0, n)))
        assert rep.E_N == 0.0


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_solver_outputs_cross_checks(seed):
    m = random_linear_model(np.random.default_rng(seed), stable=True)
    C = solve_lyapunov_direct(m).C
    rep = log_negativity(C)
    assert abs(rep.eta_minus - partial_transpose_eta(C)) <= 1e-10 * max(1.0, rep.eta_minus)
    assert log_negativity(SWAP @ C @ SWAP.T).E_N == pytest.approx(rep.E_N, abs=1e-12)
    assert (rep.E_N > 0) == (rep.eta_minus < 0.5)


@settings(max_examples=100, deadline=None)
@given(
    logQ=st.floats(5, 7),
    T=st.floats(0, 300),
    x=st.floats(0.2, 3.0),
    l=st.integers(1, 200),
    P=st.floats(1e-4, 0.1),
)
def test_solver_states_are_physical_at_high_q(logQ, T, x, l, P):
    from optorot.params import ParameterSet
    from optorot.sweeps import evaluate_point

    p = ParameterSet(Q_phi=10**logQ, T=T, Delta=x * ParameterSet().omega_phi, l=l, P_in=P)
    ev = evaluate_point(p)
    if ev.report is not None:
        assert ev.report.nu_min >= 0.5 - 1e-9


def test_low_q_breaks_uncertainty_bound():
    # The delta-correlated Brownian noise model is only valid for Q >> 1.
    m = linear_model(1.0, 0.5, 0.4, 1.0, 2.0, 0.0)
    assert log_negativity(solve_lyapunov_direct(m)).nu_min < 0.5


def test_continuity_at_reference_point():
    from optorot.sweeps import evaluate_point
    from optorot.params import ParameterSet

    C = evaluate_point(ParameterSet()).covariance.C
    base = log_negativity(C).E_N
    rng = np.random.default_rng(0)
    for _ in range(20):
        P = rng.normal(size=(4, 4))
        P = 1e-9 * (P + P.T) / 2
        assert abs(log_negativity(C + P).E_N - base) <= 1e-6


def test_fit_exact_line():
    n = np.linspace(0, 500, 11)
    fit = fit_low_temperature(zip(n, 0.5 - 3.1e-6 * n))
    assert fit.E0 == pytest.approx(0.5, abs=1e-12)
    assert fit.kappa == pytest.approx(3.1e-6, abs=1e-12)
    assert fit.residual < 1e-12


def test_fit_constant_and_filters():
    fit = fit_low_temperature([(0.0, 0.2), (1.0, 0.2), (2.0, 0.2), (5e3, 0.1), (3.0, 0.0)], nbar_cutoff=100)
    assert fit.kappa == pytest.approx(0.0, abs=1e-14)
    assert fit.n_points == 3


def test_fit_degenerate():
    with pytest.raises(ValueError):
        fit_low_temperature([(1.0, 0.3), (1.0, 0.2), (1.0, 0.1)])
