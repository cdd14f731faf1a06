"""Logarithmic negativity and physicality of the two-mode Gaussian state.

Vacuum quadrature variances are 1/2, so the modes are entangled iff the
smallest partially transposed symplectic eigenvalue is below 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .lyapunov import CovarianceMatrix

OMEGA = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)

# Momentum-sign flip on the field mode.
PARTIAL_TRANSPOSE = np.diag([1.0, 1.0, 1.0, -1.0])


class UnphysicalCovarianceError(ValueError):
    pass


@dataclass(frozen=True)
class EntanglementReport:
    sigma: float
    detC: float
    eta_minus: float
    E_N: float
    nu_min: float

    @property
    def entangled(self) -> bool:
        return self.E_N > 0


def _as_array(C) -> np.ndarray:
    return C.C if isinstance(C, CovarianceMatrix) else np.asarray(C, dtype=float)


def symplectic_eigenvalues(C) -> np.ndarray:
    """The two symplectic eigenvalues, ascending (moduli of the eigenvalues of i*Omega*C)."""
    ev = np.abs(np.linalg.eigvals(1j * OMEGA @ _as_array(C)))
    return np.sort(ev)[::2]


def partial_transpose_eta(C) -> float:
    """Smallest symplectic eigenvalue of the partially transposed covariance."""
    Ct = PARTIAL_TRANSPOSE @ _as_array(C) @ PARTIAL_TRANSPOSE
    return float(symplectic_eigenvalues(Ct)[0])


def _det2(A) -> float:
    return float(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])


def _block_det(C: np.ndarray) -> float:
    """det C through the Schur complement of the mirror block; exact for F = 0."""
    R, S, F = C[:2, :2], C[2:, 2:], C[:2, 2:]
    dR = _det2(R)
    if dR == 0:
        return float(np.linalg.det(C))
    return dR * _det2(S - F.T @ np.linalg.solve(R, F))


def log_negativity(C) -> EntanglementReport:
    Cm = _as_array(C)
    R, S, F = Cm[:2, :2], Cm[2:, 2:], Cm[:2, 2:]
    sigma = _det2(R) + _det2(S) - 2 * _det2(F)
    detC = _block_det(Cm)
    disc = sigma**2 - 4 * detC
    if disc < 0:
        # Near-degenerate branch: tolerate rounding, reject genuinely complex roots.
        if disc < -1e-12 * max(1.0, sigma**2):
            raise UnphysicalCovarianceError(
                f"sigma^2 - 4|C| = {disc:.3e} < 0; matrix is not a valid covariance"
            )
        disc = 0.0
    root = math.sqrt(disc)
    # sigma - root, rationalized against cancellation when sigma is large
    inner = 4 * detC / (sigma + root) if sigma > 0 else sigma - root
    if inner < 0:
        raise UnphysicalCovarianceError(f"sigma - sqrt(sigma^2 - 4|C|) = {inner:.3e} < 0")
    eta = math.sqrt(inner / 2)
    E_N = max(0.0, -math.log(2 * eta)) if eta > 0 else math.inf
    return EntanglementReport(
        sigma=float(sigma),
        detC=float(detC),
        eta_minus=eta,
        E_N=E_N,
        nu_min=float(symplectic_eigenvalues(Cm)[0]),
    )


def check_physicality(C, tol: float = 1e-9) -> tuple[float, bool]:
    """Minimum symplectic eigenvalue and whether it respects the uncertainty bound."""
    nu = float(symplectic_eigenvalues(C)[0])
    return nu, nu >= 0.5 - tol


@dataclass(frozen=True)
class LowTemperatureFit:
    E0: float
    kappa: float
    residual: float
    n_points: int


def fit_low_temperature(
    points: Iterable[tuple[float, float]], nbar_cutoff: float = math.inf
) -> LowTemperatureFit:
    """Least-squares line ``E_N = E0 - kappa * nbar``.

    Only points with positive ``E_N`` and ``nbar`` below ``nbar_cutoff`` are used.
    """
    pts = [(n, e) for n, e in points if e is not None and e > 0 and n < nbar_cutoff]
    n = np.array([q[0] for q in pts], dtype=float)
    e = np.array([q[1] for q in pts], dtype=float)
    if len(pts) < 3 or len(np.unique(n)) < 3:
        raise ValueError("need at least 3 points with distinct nbar and positive E_N")
    A = np.column_stack([np.ones_like(n), -n])
    (E0, kappa), *_ = np.linalg.lstsq(A, e, rcond=None)
    res = float(np.sqrt(np.mean((A @ [E0, kappa] - e) ** 2)))
    return LowTemperatureFit(E0=float(E0), kappa=float(kappa), residual=res, n_points=len(pts))
