"""Stationary covariance of the linearized fluctuations.

Three routes to the solution of ``B C + C B^T = -D``:

* :func:`solve_lyapunov_direct` - the symmetric 10-unknown linear system;
* :func:`solve_lyapunov_elimination` - pivot-by-pivot elimination of the
  off-diagonal unknowns, leaving a 4x4 system in the diagonal entries;
* :func:`covariance_quadrature_oracle` - the defining integral
  ``int_0^inf e^{Bs} D e^{B^T s} ds`` by composite Gauss-Legendre quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dynamics import LinearModel


class LyapunovError(RuntimeError):
    pass


class EliminationError(LyapunovError):
    pass


class QuadratureConvergenceError(LyapunovError):
    pass


@dataclass(frozen=True)
class CovarianceMatrix:
    C: np.ndarray

    def __post_init__(self):
        C = np.array(self.C, dtype=float)
        if C.shape != (4, 4):
            raise ValueError(f"covariance must be 4x4, got shape {C.shape}")
        if np.max(np.abs(C - C.T)) > 1e-12 * max(1.0, np.max(np.abs(C))):
            raise ValueError("covariance matrix is not symmetric")
        C = (C + C.T) / 2
        C.flags.writeable = False
        object.__setattr__(self, "C", C)

    @property
    def R(self) -> np.ndarray:
        """Mirror block."""
        return self.C[:2, :2]

    @property
    def S(self) -> np.ndarray:
        """Field block."""
        return self.C[2:, 2:]

    @property
    def F(self) -> np.ndarray:
        """Mirror-field cross block."""
        return self.C[:2, 2:]


# Upper-triangle index pairs in row-major order; diagonals are 0, 4, 7, 9.
_PAIRS = [(i, j) for i in range(4) for j in range(i, 4)]
_DIAG = [k for k, (i, j) in enumerate(_PAIRS) if i == j]
_OFF = [k for k, (i, j) in enumerate(_PAIRS) if i != j]


def _lyapunov_operator(B: np.ndarray) -> np.ndarray:
    """Matrix of C -> upper triangle of (B C + C B^T), acting on upper-triangle unknowns."""
    A = np.empty((10, 10))
    for col, (k, l) in enumerate(_PAIRS):
        E = np.zeros((4, 4))
        E[k, l] = E[l, k] = 1.0
        out = B @ E + E @ B.T
        A[:, col] = [out[i, j] for i, j in _PAIRS]
    return A


def _assemble(x: np.ndarray) -> np.ndarray:
    C = np.empty((4, 4))
    for v, (i, j) in zip(x, _PAIRS):
        C[i, j] = C[j, i] = v
    return C


def _scaled(m: LinearModel) -> tuple[np.ndarray, np.ndarray]:
    # The equation is homogeneous in (B, D); unit-scale rates improve conditioning.
    B = np.asarray(m.B, dtype=float)
    s = np.max(np.abs(B))
    if s == 0:
        raise LyapunovError("drift matrix is identically zero")
    return B / s, np.asarray(m.D, dtype=float) / s


def solve_lyapunov_direct(m: LinearModel) -> CovarianceMatrix:
    B, D = _scaled(m)
    A = _lyapunov_operator(B)
    rhs = -np.array([D[i, j] for i, j in _PAIRS])
    if np.linalg.cond(A) > 1e14:
        raise LyapunovError("Lyapunov system is singular (marginal stability)")
    x = np.linalg.solve(A, rhs)
    return CovarianceMatrix(_assemble(x))


def solve_lyapunov_elimination(m: LinearModel) -> CovarianceMatrix:
    """Solve by eliminating off-diagonal unknowns one equation at a time.

    Each entry of ``C' = B C + C B^T + D`` is scanned in row-major order; the
    first one containing exactly one unsolved off-diagonal unknown is solved
    for it and the scan restarts. Every unknown is carried as an affine
    function of the four diagonal entries. The leftover four equations then
    fix the diagonal.
    """
    if m.G == 0 or m.Delta == 0:
        raise EliminationError(
            "elimination needs nonzero coupling and detuning; use solve_lyapunov_direct"
        )
    B, D = _scaled(m)
    A = _lyapunov_operator(B)
    const = np.array([D[i, j] for i, j in _PAIRS])
    x = _eliminate(A, const)
    # One round of refinement through the same route; the affine expressions
    # lose digits when coupling and detuning are small against the decay rates.
    x = x + _eliminate(A, A @ x + const)
    return CovarianceMatrix(_assemble(x))


def _eliminate(A: np.ndarray, const: np.ndarray) -> np.ndarray:
    """Solve ``A x + const = 0`` by the pivot sequence described above."""
    # expr[u] = coefficients on (lambda_1..lambda_4, 1)
    expr: dict[int, np.ndarray] = {}
    for n, k in enumerate(_DIAG):
        e = np.zeros(5)
        e[n] = 1.0
        expr[k] = e
    used: set[int] = set()

    while len(expr) < 10:
        for eq in range(10):
            if eq in used:
                continue
            unsolved = [u for u in _OFF if u not in expr and A[eq, u] != 0.0]
            if len(unsolved) != 1:
                continue
            u = unsolved[0]
            acc = np.zeros(5)
            acc[4] = const[eq]
            for v, e in expr.items():
                acc += A[eq, v] * e
            expr[u] = -acc / A[eq, u]
            used.add(eq)
            break
        else:
            missing = [_PAIRS[u] for u in _OFF if u not in expr]
            raise EliminationError(
                f"no equation isolates a single off-diagonal unknown; unsolved {missing}"
            )

    rest = [eq for eq in range(10) if eq not in used]
    if len(rest) != 4:
        raise EliminationError(f"expected 4 residual equations, found {len(rest)}")
    M = np.zeros((4, 5))
    for r, eq in enumerate(rest):
        M[r, 4] = const[eq]
        for v, e in expr.items():
            M[r] += A[eq, v] * e
    if np.linalg.cond(M[:, :4]) > 1e14:
        raise EliminationError("diagonal system is singular")
    lam = np.linalg.solve(M[:, :4], -M[:, 4])
    return np.array([expr[k][:4] @ lam + expr[k][4] for k in range(10)])


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def covariance_quadrature_oracle(
    m: LinearModel,
    horizon: float | None = None,
    steps: int = 2**14,
    tol: float = 1e-9,
    max_doublings: int = 60,
) -> CovarianceMatrix:
    """Evaluate the stationary covariance integral directly.

    ``[0, horizon]`` is split into ``steps`` equal panels (rounded up to a
    power of two, and refined until each panel spans at most half an e-fold
    of the fastest mode). Every panel uses 8-point Gauss-Legendre; since panel
    ``k`` is the first panel propagated by ``e^{B k h}``, the composite sum is
    accumulated by repeated squaring. The horizon is then doubled until the
    added tail changes no entry by more than ``tol`` relative to the largest.
    """
    B = np.asarray(m.B, dtype=float)
    D = np.asarray(m.D, dtype=float)
    eig = np.linalg.eigvals(B)
    abscissa = eig.real.max()
    if not abscissa < 0:
        raise LyapunovError(f"drift matrix is not stable (spectral abscissa {abscissa:.3g})")
    min_horizon = 20 / abs(abscissa)
    if horizon is None:
        horizon = min_horizon
    elif horizon < min_horizon:
        raise ValueError(f"horizon must be >= 20/|abscissa| = {min_horizon:.6g}")
    if steps < 10**4:
        raise ValueError("steps must be >= 1e4")

    n_sq = int(np.ceil(np.log2(steps)))
    rho = np.max(np.abs(eig))
    while horizon / 2**n_sq * rho > 0.5:
        n_sq += 1
    h = horizon / 2**n_sq

    S = np.zeros((4, 4))
    for x, w in zip(_GL_NODES, _GL_WEIGHTS):
        E = expm(B * (h * (x + 1) / 2))
        S += (h / 2) * w * (E @ D @ E.T)
    P = expm(B * h)
    for _ in range(n_sq):
        S = S + P @ S @ P.T
        P = P @ P

    for _ in range(max_doublings):
        tail = P @ S @ P.T
        S_new = S + tail
        if np.max(np.abs(tail)) <= tol * np.max(np.abs(S_new)):
            return CovarianceMatrix((S_new + S_new.T) / 2)
        S = S_new
        P = P @ P
    raise QuadratureConvergenceError(
        f"covariance integral not converged after {max_doublings} horizon doublings"
    )


def lyapunov_residual(m: LinearModel, C: CovarianceMatrix | np.ndarray) -> float:
    """``max|B C + C B^T + D| / max|D|``."""
    Cm = C.C if isinstance(C, CovarianceMatrix) else np.asarray(C, dtype=float)
    B = np.asarray(m.B, dtype=float)
    D = np.asarray(m.D, dtype=float)
    return float(np.max(np.abs(B @ Cm + Cm @ B.T + D)) / np.max(np.abs(D)))
