"""Continuous algebraic Riccati equation for observer gain design.

Solves the filter-form equation

    A P + P A^T - P C^T R^{-1} C P + Q = 0

by Newton-Kleinman iteration; every Newton step is a Lyapunov equation solved
with the Bartels-Stewart method of ``scipy.linalg.solve_continuous_lyapunov``.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from pyresgen.core.lti import is_hurwitz, spectral_abscissa
from pyresgen.exceptions import DesignError

logger = logging.getLogger(__name__)

MAX_NEWTON_STEPS = 200
PBH_TOL = 1e-9
RESIDUAL_TOL = 1e-8


def is_detectable(A: np.ndarray, C: np.ndarray, tol: float = PBH_TOL) -> bool:
    """PBH test: rank [A - lambda I; C] = n for every eigenvalue with Re >= 0."""
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float).reshape(-1, A.shape[0])
    n = A.shape[0]
    for lam in np.linalg.eigvals(A) if n else []:
        if lam.real < 0:
            continue
        pencil = np.vstack([A - lam * np.eye(n), C.astype(complex)])
        sv = np.linalg.svd(pencil, compute_uv=False)
        if sv[-1] <= tol * max(1.0, sv[0]):
            return False
    return True


@dataclass(frozen=True, eq=False)
class CareProblem:
    """Observer-form Riccati problem data.

    Attributes:
        A: State matrix (n x n)
        C: Output matrix (p x n)
        Q: Symmetric positive semidefinite state weight (n x n)
        R: Symmetric positive definite output weight (p x p)
    """

    A: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        C = np.asarray(self.C, dtype=float).reshape(-1, n)
        p = C.shape[0]
        Q = np.asarray(self.Q, dtype=float).reshape(n, n)
        R = np.asarray(self.R, dtype=float).reshape(p, p)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)

    @classmethod
    def from_weights(cls, A: np.ndarray, C: np.ndarray, q: float, r: float) -> "CareProblem":
        """Build the problem with Q = q I and R = r I."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        C = np.asarray(C, dtype=float).reshape(-1, A.shape[0])
        return cls(A=A, C=C, Q=q * np.eye(A.shape[0]), R=r * np.eye(C.shape[0]))

    def validate(self) -> None:
        """Check symmetry, definiteness and detectability.

        Raises:
            ValueError: If a weight is not symmetric or has the wrong sign
            DesignError: If (A, C) is not detectable
        """
        if self.A.shape[0] != self.A.shape[1]:
            raise ValueError(f"Matrix 'A' must be square, got shape {self.A.shape}")
        if not np.allclose(self.Q, self.Q.T, atol=1e-12):
            raise ValueError("Weight 'Q' must be symmetric")
        if not np.allclose(self.R, self.R.T, atol=1e-12):
            raise ValueError("Weight 'R' must be symmetric")
        if self.Q.size and np.min(np.linalg.eigvalsh(self.Q)) < -1e-12:
            raise ValueError("Weight 'Q' must be positive semidefinite")
        if self.R.size and np.min(np.linalg.eigvalsh(self.R)) <= 0:
            raise ValueError("Weight 'R' must be positive definite")
        if not is_detectable(self.A, self.C):
            raise DesignError("Pair (A, C) is not detectable")

    def residual(self, P: np.ndarray) -> np.ndarray:
        """Riccati residual A P + P A^T - P C^T R^{-1} C P + Q."""
        gain = P @ self.C.T @ np.linalg.solve(self.R, self.C @ P)
        return self.A @ P + P @ self.A.T - gain + self.Q


def _initial_gain(prob: CareProblem) -> np.ndarray:
    """Stabilizing output injection for the first Newton step.

    Zero when A is already Hurwitz; otherwise Bass' construction on the
    shifted matrix A + beta I with beta beyond the spectral abscissa.
    """
    A, C = prob.A, prob.C
    n, p = A.shape[0], C.shape[0]
    if is_hurwitz(A):
        return np.zeros((n, p))
    beta = abs(spectral_abscissa(A)) + 1.0
    shifted = A + beta * np.eye(n)
    # (A + beta I)^T Z + Z (A + beta I) = 2 C^T C; shifted is anti-stable so Z >= 0
    Z = la.solve_continuous_lyapunov(-shifted.T, -2.0 * C.T @ C)
    Z = 0.5 * (Z + Z.T)
    return la.pinvh(Z) @ C.T


def solve_care(prob: CareProblem) -> np.ndarray:
    """Stabilizing solution P of the observer-form Riccati equation.

    Args:
        prob: Problem data

    Returns:
        Symmetric positive semidefinite P with A - P C^T R^{-1} C Hurwitz

    Raises:
        DesignError: Undetectable pair, non-convergence or residual check failure
    """
    prob.validate()
    A, C, Q, R = prob.A, prob.C, prob.Q, prob.R
    n = A.shape[0]
    R_inv = np.linalg.inv(R)

    L = _initial_gain(prob)
    if not is_hurwitz(A - L @ C):
        raise DesignError("Could not find a stabilizing initial gain")

    P = np.zeros((n, n))
    previous = np.inf
    for step in range(1, MAX_NEWTON_STEPS + 1):
        closed = A - L @ C
        P_next = la.solve_continuous_lyapunov(closed, -(Q + L @ R @ L.T))
        P_next = 0.5 * (P_next + P_next.T)
        change = np.linalg.norm(P_next - P, "fro")
        P = P_next
        L = P @ C.T @ R_inv
        logger.debug(f"Newton step {step}: |dP| = {change:.3e}")
        scale = 1.0 + np.linalg.norm(P, "fro")
        if change <= 1e-12 * scale:
            break
        # roundoff floor reached: the iterates stopped contracting
        if step > 3 and change >= previous and change <= 1e-8 * scale:
            break
        previous = change
    else:
        raise DesignError(f"Newton iteration did not converge in {MAX_NEWTON_STEPS} steps")

    res = np.linalg.norm(prob.residual(P), "fro")
    if res > RESIDUAL_TOL * (1.0 + np.linalg.norm(P, "fro")):
        raise DesignError(f"Riccati residual {res:.3e} exceeds tolerance")
    if not is_hurwitz(A - L @ C):
        raise DesignError("Riccati solution is not stabilizing")
    return P


def design_observer_gain(
    A: np.ndarray, C: np.ndarray, q: float = 1.0, r: float = 1.0
) -> np.ndarray:
    """Observer gain H = P C^T / r from the Riccati solution with Q = qI, R = rI.

    Args:
        A: State matrix
        C: Output matrix
        q: State weight (q >= 0)
        r: Output weight (r > 0)

    Returns:
        Gain H with A - H C Hurwitz
    """
    if q < 0:
        raise ValueError(f"Weight 'q' must be non-negative, got {q}")
    if not r > 0:
        raise ValueError(f"Weight 'r' must be positive, got {r}")
    prob = CareProblem.from_weights(A, C, q, r)
    P = solve_care(prob)
    H = P @ prob.C.T / r
    logger.debug(f"Designed observer gain with q={q}, r={r}: |H| = {np.linalg.norm(H):.4g}")
    return H
