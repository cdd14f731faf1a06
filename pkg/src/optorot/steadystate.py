"""Semiclassical steady state of the driven cavity and the static mirror deflection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import DerivedQuantities, ParameterSet


@dataclass(frozen=True)
class SteadyState:
    a_s: float
    phi_s: float
    L_z_s: float
    G: float
    delta_bare: float


def steady_state(p: ParameterSet, d: DerivedQuantities) -> SteadyState:
    """Steady state at fixed effective detuning ``p.Delta``.

    The field phase is chosen so that ``a_s`` is real and non-negative.
    """
    half = d.gamma / 2
    a_s = math.sqrt(d.gamma * d.photon_flux) / math.sqrt(half**2 + p.Delta**2)
    phi_s = d.g * a_s**2 / p.omega_phi
    return SteadyState(
        a_s=a_s,
        phi_s=phi_s,
        L_z_s=0.0,
        G=d.g * a_s * math.sqrt(2),
        delta_bare=p.Delta + d.g * phi_s,
    )


def _real_cubic_roots(b: float, c: float, e: float) -> list[float]:
    """Real roots of x**3 + b x**2 + c x + e, ascending, Newton-polished."""
    shift = b / 3
    p = c - b * b / 3
    q = 2 * b**3 / 27 - b * c / 3 + e
    disc = (q / 2) ** 2 + (p / 3) ** 3
    if disc < 0:
        r = 2 * math.sqrt(-p / 3)
        arg = max(-1.0, min(1.0, 3 * q / (p * r)))
        theta = math.acos(arg) / 3
        ts = [r * math.cos(theta - 2 * math.pi * k / 3) for k in range(3)]
    else:
        s = math.sqrt(disc)
        ts = [np.cbrt(-q / 2 + s) + np.cbrt(-q / 2 - s)]
    roots = []
    for t in ts:
        x = t - shift
        for _ in range(4):
            f = ((x + b) * x + c) * x + e
            df = (3 * x + 2 * b) * x + c
            if df == 0:
                break
            step = f / df
            x -= step
            if abs(step) <= 1e-16 * max(abs(x), 1.0):
                break
        roots.append(float(x))
    roots.sort()
    out: list[float] = []
    scale = max(abs(b), abs(c) ** 0.5, abs(e) ** (1 / 3), 1e-300)
    for x in roots:
        if not out or abs(x - out[-1]) > 1e-9 * scale:
            out.append(x)
    return out


def bistability_roots(p: ParameterSet, d: DerivedQuantities, delta_bare: float) -> list[float]:
    """All real equilibrium deflections for a fixed bare detuning.

    Solved in the frequency shift ``x = g*phi`` where the equilibrium condition
    reads ``x*((gamma/2)**2 + (delta - x)**2) = g**2*gamma*flux/omega_phi``.
    """
    if d.g == 0:
        return [0.0]
    K = d.g**2 * d.gamma * d.photon_flux / p.omega_phi
    xs = _real_cubic_roots(-2 * delta_bare, (d.gamma / 2) ** 2 + delta_bare**2, -K)
    return [x / d.g for x in xs]
