"""Linearized fluctuation dynamics, stability and the radiation-modified mirror response.

Fluctuation vector ordering is (dphi, dL_z, dX, dY): mirror angle, mirror
angular momentum, field amplitude and phase quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import CONSTANTS, DerivedQuantities, ParameterSet, PhysicalConstants
from .steadystate import SteadyState

ORDERING = ("dphi", "dL_z", "dX", "dY")


class ConvergenceError(RuntimeError):
    """An iterative solve did not converge; ``last`` holds the final iterate."""

    def __init__(self, message: str, last: float | None = None):
        super().__init__(message)
        self.last = last


class EigenvalueError(RuntimeError):
    """The eigenvalue solver failed; distinct from an unstable verdict."""


@dataclass(frozen=True)
class LinearModel:
    B: np.ndarray
    D: np.ndarray
    Delta: float
    G: float
    gamma: float
    gamma_phi: float
    omega_phi: float
    nbar: float
    ordering: tuple = ORDERING


def linear_model(
    omega_phi: float,
    gamma_phi: float,
    G: float,
    Delta: float,
    gamma: float,
    nbar: float = 0.0,
) -> LinearModel:
    """Drift and diffusion matrices from the five rates and the thermal occupancy."""
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    B = np.array(
        [
            [0.0, omega_phi, 0.0, 0.0],
            [-omega_phi, -gamma_phi, G, 0.0],
            [0.0, 0.0, -gamma / 2, Delta],
            [G, 0.0, -Delta, -gamma / 2],
        ]
    )
    D = np.diag([0.0, gamma_phi * (2 * nbar + 1), gamma / 2, gamma / 2])
    B.flags.writeable = False
    D.flags.writeable = False
    return LinearModel(
        B=B,
        D=D,
        Delta=float(Delta),
        G=float(G),
        gamma=float(gamma),
        gamma_phi=float(gamma_phi),
        omega_phi=float(omega_phi),
        nbar=float(nbar),
    )


def build_linear_model(
    ss: SteadyState, p: ParameterSet, d: DerivedQuantities, nbar: float
) -> LinearModel:
    return linear_model(p.omega_phi, d.gamma_phi, ss.G, p.Delta, d.gamma, nbar)


@dataclass(frozen=True)
class StabilityVerdict:
    routh_hurwitz_pass: bool
    inequality_values: tuple[float, float]
    spectral_abscissa: float
    consistent: bool

    @property
    def stable(self) -> bool:
        # Eigenvalues are authoritative for gating.
        return self.spectral_abscissa < 0


def routh_hurwitz_values(m: LinearModel) -> tuple[float, float]:
    """Left-hand sides of the two Routh-Hurwitz inequalities, with D_phi/I = gamma_phi.

    The first inequality is divided through by I**3; signs are unaffected.
    """
    w, gp, G, De, gm = m.omega_phi, m.gamma_phi, m.G, m.Delta, m.gamma
    G2 = G * G
    first = (
        gp
        * gm
        * (
            16 * w**4
            + 32 * G2 * w * De
            + 8 * w**2 * (gm**2 - 4 * De**2)
            + (gm**2 + 4 * De**2) ** 2
        )
        + 16 * G2 * w * gm**2 * De
        + 4 * gp**3 * (gm**3 + 4 * gm * De**2)
        + 4 * gp**2 * (4 * w**2 * gm**2 + gm**4 + 4 * G2 * w * De + 4 * gm**2 * De**2)
    )
    second = w * (gm**2 + 4 * De**2) - 4 * G2 * De
    return float(first), float(second)


def assess_stability(m: LinearModel) -> StabilityVerdict:
    first, second = routh_hurwitz_values(m)
    rh = first > 0 and second > 0
    try:
        eig = np.linalg.eigvals(np.asarray(m.B))
    except np.linalg.LinAlgError as exc:
        raise EigenvalueError(f"eigenvalue solver failed: {exc}") from exc
    if not np.all(np.isfinite(eig)):
        raise EigenvalueError("eigenvalue solver returned non-finite values")
    abscissa = float(eig.real.max())
    return StabilityVerdict(
        routh_hurwitz_pass=rh,
        inequality_values=(first, second),
        spectral_abscissa=abscissa,
        consistent=rh == (abscissa < 0),
    )


def thermal_occupancy(omega: float, T: float, k: PhysicalConstants = CONSTANTS) -> float:
    """Bose-Einstein occupancy of a mode at angular frequency ``omega``."""
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if T < 0:
        raise ValueError(f"T must be >= 0, got {T}")
    if T == 0:
        return 0.0
    x = (k.hbar * omega / k.kB) / T
    try:
        return 1.0 / math.expm1(x)
    except OverflowError:
        return 0.0


@dataclass(frozen=True)
class EffectiveResponse:
    omega_eff: float
    D_eff: float
    T_eff: float
    T_c: float
    nbar: float
    n_m: float
    iterations: int = 0


def optical_spring(
    omega: float, G: float, Delta: float, gamma: float, omega_phi: float
) -> tuple[float, float]:
    """Radiation corrections at response frequency ``omega``.

    Returns ``(omega_eff**2, extra damping rate)``; the damping correction is a
    rate, multiply by the moment of inertia for a damping constant.
    """
    h2 = (gamma / 2) ** 2
    lorentz = (h2 + (omega - Delta) ** 2) * (h2 + (omega + Delta) ** 2)
    strength = omega_phi * G * G * Delta / lorentz
    omega2 = omega_phi**2 - strength * (h2 - omega**2 + Delta**2)
    return omega2, strength * gamma


def _fixed_point(f, x0: float, tol: float, max_iter: int, damping: float):
    x = x0
    for it in range(1, max_iter + 1):
        fx = f(x)
        new = (1 - damping) * x + damping * fx if damping < 1 else fx
        if abs(new - x) <= tol * abs(x):
            return new, it, True
        x = new
    return x, max_iter, False


def effective_response(
    ss: SteadyState,
    p: ParameterSet,
    d: DerivedQuantities,
    k: PhysicalConstants = CONSTANTS,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> EffectiveResponse:
    """Self-consistent effective frequency, damping and temperature of the mirror.

    The response frequency in the optical-spring expression is itself
    ``omega_eff``; the pair is solved by fixed-point iteration from
    ``omega_phi``, retried with 0.5 damping if the plain iteration stalls.
    """

    def f(w: float) -> float:
        w2, _ = optical_spring(w, ss.G, p.Delta, d.gamma, p.omega_phi)
        if not w2 > 0:
            raise ConvergenceError(
                f"effective frequency squared is non-positive ({w2:.6g}) at omega={w:.6g}",
                last=w,
            )
        return math.sqrt(w2)

    if ss.G == 0:
        w, its = p.omega_phi, 0
    else:
        w, its, ok = _fixed_point(f, p.omega_phi, tol, max_iter, 1.0)
        if not ok:
            w, its, ok = _fixed_point(f, p.omega_phi, tol, max_iter, 0.5)
        if not ok:
            raise ConvergenceError(
                f"effective frequency did not converge in {max_iter} iterations", last=w
            )
        if abs(w - f(w)) > 1e-9 * p.omega_phi:
            raise ConvergenceError("fixed-point residual above 1e-9", last=w)

    _, extra = optical_spring(w, ss.G, p.Delta, d.gamma, p.omega_phi)
    D_eff = d.D_phi + d.I * extra
    T_eff = (d.D_phi / D_eff) * p.T
    return EffectiveResponse(
        omega_eff=w,
        D_eff=D_eff,
        T_eff=T_eff,
        T_c=k.hbar * w / (4 * k.kB),
        nbar=thermal_occupancy(w, p.T, k),
        n_m=k.kB * T_eff / (k.hbar * w),
        iterations=its,
    )


def random_linear_model(rng: np.random.Generator, stable: bool | None = True) -> LinearModel:
    """Draw a model in units where the mirror frequency is of order one.

    ``stable=True`` rejects draws failing the eigenvalue test, ``False`` keeps
    only unstable ones and ``None`` keeps everything. Detuning and coupling
    are never zero.
    """
    while True:
        w = 10 ** rng.uniform(-0.5, 0.5)
        gp = 10 ** rng.uniform(-3, 0)
        gm = 10 ** rng.uniform(-1, 1)
        De = rng.choice([-1.0, 1.0]) * 10 ** rng.uniform(-1, 0.7)
        G = 10 ** rng.uniform(-1.5, 0.7)
        nbar = 10 ** rng.uniform(-2, 2)
        m = linear_model(w, gp, G, De, gm, nbar)
        if stable is None:
            return m
        if (np.linalg.eigvals(m.B).real.max() < 0) == stable:
            return m
