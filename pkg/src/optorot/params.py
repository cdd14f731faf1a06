"""Physical inputs of the rotating-mirror cavity and the quantities derived from them.

All values are SI; angular frequencies are in rad/s. Defaults reproduce the
reference operating point (1 mm cavity, 810 nm laser, 100 ng mirror spun at
2pi x 10 MHz, l = 100, 50 mW, detuning equal to the mirror frequency).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from scipy import constants as _sc


class ParameterError(ValueError):
    """A physical input violates its domain; ``field`` names the offending input."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = _sc.c
    hbar: float = _sc.hbar
    kB: float = _sc.k


CONSTANTS = PhysicalConstants()

OMEGA_PHI_REF = 2 * math.pi * 1e7


@dataclass(frozen=True)
class ParameterSet:
    L: float = 1e-3
    lambda_: float = 810e-9
    omega_phi: float = OMEGA_PHI_REF
    M: float = 100e-12
    R: float = 10e-6
    Q_phi: float = 2e6
    finesse: float = 5e3
    l: int = 100
    P_in: float = 50e-3
    Delta: float = OMEGA_PHI_REF
    T: float = 10.0
    # Cavity frequency override; None means 2*pi*c/lambda.
    omega_c: float | None = None

    def replace(self, **changes) -> "ParameterSet":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# Positive-definite fields, checked in declaration order.
_POSITIVE = ("L", "lambda_", "omega_phi", "M", "R", "Q_phi", "finesse")


def validate_parameters(p: ParameterSet) -> ParameterSet:
    """Return ``p`` unchanged if every input is in its physical domain.

    Raises :class:`ParameterError` naming the first offending field.
    """
    for name in _POSITIVE:
        v = getattr(p, name)
        if not _is_real(v) or not math.isfinite(v) or v <= 0:
            raise ParameterError(name, f"must be a finite positive number, got {v!r}")
    if isinstance(p.l, bool) or not isinstance(p.l, int):
        raise ParameterError("l", f"must be an integer, got {p.l!r}")
    if p.l < 0:
        raise ParameterError("l", f"must be >= 0, got {p.l}")
    if not _is_real(p.P_in) or not math.isfinite(p.P_in) or p.P_in < 0:
        raise ParameterError("P_in", f"must be >= 0, got {p.P_in!r}")
    if not _is_real(p.Delta) or not math.isfinite(p.Delta):
        raise ParameterError("Delta", f"must be a finite real, got {p.Delta!r}")
    if not _is_real(p.T) or not math.isfinite(p.T) or p.T < 0:
        raise ParameterError("T", f"must be >= 0, got {p.T!r}")
    if p.omega_c is not None:
        if not _is_real(p.omega_c) or not math.isfinite(p.omega_c) or p.omega_c <= 0:
            raise ParameterError("omega_c", f"must be positive, got {p.omega_c!r}")
    return p


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


@dataclass(frozen=True)
class DerivedQuantities:
    I: float
    g: float
    gamma: float
    gamma_phi: float
    D_phi: float
    xi_phi: float
    omega_c: float
    photon_flux: float


def derive_quantities(p: ParameterSet, k: PhysicalConstants = CONSTANTS) -> DerivedQuantities:
    """Moment of inertia, couplings and rates implied by ``p``.

    The cavity decay rate is the full linewidth of a linear cavity,
    ``pi*c/(L*finesse)``, and the drive is converted to a photon flux at the
    cavity frequency.
    """
    I = p.M * p.R**2 / 2
    g = (k.c * p.l / p.L) * math.sqrt(k.hbar / (I * p.omega_phi))
    xi_phi = k.c * p.l * k.hbar / p.L
    gamma_phi = p.omega_phi / p.Q_phi
    omega_c = p.omega_c if p.omega_c is not None else 2 * math.pi * k.c / p.lambda_
    gamma = math.pi * k.c / (p.L * p.finesse)
    return DerivedQuantities(
        I=I,
        g=g,
        gamma=gamma,
        gamma_phi=gamma_phi,
        D_phi=gamma_phi * I,
        xi_phi=xi_phi,
        omega_c=omega_c,
        photon_flux=p.P_in / (k.hbar * omega_c),
    )
