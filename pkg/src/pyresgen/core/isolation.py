"""Isolation filters built from unknown input observers, and Bessel noise filters."""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.signal import bessel, tf2ss

from pyresgen.core.lti import (
    append,
    freq_response,
    is_hurwitz,
    left_invertible,
    normal_rank,
    right_invertible,
    sample_frequencies,
    series,
    static_gain,
)
from pyresgen.core.netsys import assemble, input_channels, output_channels, port_slices
from pyresgen.core.resgen import realize_Mi
from pyresgen.core.riccati import design_observer_gain, is_detectable
from pyresgen.exceptions import DesignError
from pyresgen.models.network import Interconnection, Subsystem
from pyresgen.models.statespace import StateSpace

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
DECOUPLING_TOL = 1e-8
CHECK_FREQUENCIES = 10


@dataclass(frozen=True, eq=False)
class UioDesign:
    """Unknown input observer for z' = A z + U v, y = C z with v unknown.

    The observer is zeta' = F zeta + K y (+ K_fb (y - C z_hat)), z_hat = zeta + H y.

    Attributes:
        A_tilde: State matrix of the observed system
        U_tilde: Unknown-input matrix (column-compressed)
        C_tilde: Output matrix
        H_tilde: U (C U)^+ ; satisfies H C U = U
        F_tilde: A - H C A
        K_tilde: F H
        feedback_gain: Extra output injection when F_tilde is not Hurwitz, else None
    """

    A_tilde: np.ndarray
    U_tilde: np.ndarray
    C_tilde: np.ndarray
    H_tilde: np.ndarray
    F_tilde: np.ndarray
    K_tilde: np.ndarray
    feedback_gain: Optional[np.ndarray] = None

    @property
    def error_dynamics(self) -> np.ndarray:
        """Matrix governing z - z_hat."""
        if self.feedback_gain is None:
            return self.F_tilde
        return self.F_tilde - self.feedback_gain @ self.C_tilde

    def observer(self) -> StateSpace:
        """Realization y -> z_hat."""
        K_fb = self.feedback_gain
        n, p = self.H_tilde.shape
        residual_gain = np.eye(p) - self.C_tilde @ self.H_tilde
        B = self.K_tilde if K_fb is None else self.K_tilde + K_fb @ residual_gain
        return StateSpace(A=self.error_dynamics, B=B, C=np.eye(n), D=self.H_tilde)

    def filter(self) -> StateSpace:
        """S = I - C G_UIO, i.e. y -> y - C z_hat."""
        obs = self.observer()
        p = self.C_tilde.shape[0]
        return StateSpace(
            A=obs.A, B=obs.B, C=-self.C_tilde @ obs.C, D=np.eye(p) - self.C_tilde @ obs.D
        )


def compress_columns(U: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of range(U) from the SVD."""
    U = np.asarray(U, dtype=float)
    if U.size == 0:
        return np.zeros((U.shape[0], 0))
    left, sv, _ = np.linalg.svd(U, full_matrices=False)
    rank = int(np.sum(sv > tol * max(1.0, sv[0])))
    return left[:, :rank]


def build_uio(A_t: np.ndarray, U_t: np.ndarray, C_t: np.ndarray) -> UioDesign:
    """Unknown input observer for (A_t, U_t, C_t).

    Raises:
        DesignError: If C U is not left invertible or (F, C) is not detectable
    """
    A_t = np.atleast_2d(np.asarray(A_t, dtype=float))
    n = A_t.shape[0]
    C_t = np.asarray(C_t, dtype=float).reshape(-1, n)
    U_raw = np.asarray(U_t, dtype=float).reshape(n, -1)
    U_c = compress_columns(U_raw)
    if U_c.shape[1] < U_raw.shape[1]:
        logger.debug(f"Compressed unknown-input matrix from {U_raw.shape[1]} to {U_c.shape[1]}")

    CU = C_t @ U_c
    if np.linalg.matrix_rank(CU, tol=RANK_TOL * max(1.0, np.linalg.norm(CU))) < U_c.shape[1]:
        raise DesignError("UIO rank condition violated: C U is not left invertible")
    H = U_c @ np.linalg.pinv(CU)
    F = A_t - H @ C_t @ A_t
    K = F @ H

    K_fb = None
    if not is_hurwitz(F):
        if not is_detectable(F, C_t):
            raise DesignError("UIO detectability condition violated: (F, C) is not detectable")
        K_fb = design_observer_gain(F, C_t, 1.0, 1.0)
        logger.debug("UIO matrix F is not Hurwitz; added estimation error feedback")
    return UioDesign(
        A_tilde=A_t, U_tilde=U_c, C_tilde=C_t, H_tilde=H, F_tilde=F, K_tilde=K, feedback_gain=K_fb
    )


def check_isolation_existence(sub: Subsystem) -> bool:
    """rank [G_ya G_yv] = dim(a) + rank G_yv in the normal-rank sense."""
    if sub.dim_a == 0:
        return True
    joint = normal_rank(sub.transfer("y", "av"))
    own = normal_rank(sub.transfer("y", "v")) if sub.dim_v else 0
    return joint == sub.dim_a + own


def interaction_path(sub: Subsystem, H: np.ndarray) -> StateSpace:
    """M_i G_{y v} as (A - HC, U, C); requires V = 0."""
    if np.any(sub.V != 0):
        raise DesignError(f"Isolation filter requires V = 0 (subsystem '{sub.name}')")
    H = np.asarray(H, dtype=float).reshape(sub.n, sub.dim_y)
    return StateSpace(A=sub.A - H @ sub.C, B=sub.U, C=sub.C, D=np.zeros((sub.dim_y, sub.dim_v)))


def attack_path(sub: Subsystem, H: np.ndarray) -> StateSpace:
    """M_i G_{y a}."""
    G_ya = StateSpace(A=sub.A, B=sub.X, C=sub.C, D=sub.Y)
    return series(G_ya, realize_Mi(sub, H))


def build_isolation_filter(sub: Subsystem, H: np.ndarray) -> StateSpace:
    """Filter S_i with S_i M_i G_{y v} = 0 and S_i M_i G_{y a} left invertible.

    Raises:
        DesignError: If the existence condition fails, the UIO cannot be built
            or the decoupling post-check fails
    """
    if not check_isolation_existence(sub):
        raise DesignError(f"Isolation existence condition fails for subsystem '{sub.name}'")
    if sub.dim_v == 0:
        return static_gain(np.eye(sub.dim_y))

    path = interaction_path(sub, H)
    S = build_uio(path.A, path.B, path.C).filter()

    worst = 0.0
    for s in sample_frequencies(series(path, S), CHECK_FREQUENCIES):
        value = np.max(np.abs(freq_response(S, s) @ freq_response(path, s)))
        worst = max(worst, float(value / (1.0 + np.max(np.abs(freq_response(path, s))))))
    logger.debug(f"Isolation decoupling residual for '{sub.name}': {worst:.3e}")
    if worst > DECOUPLING_TOL:
        raise DesignError(f"Isolation filter for '{sub.name}' does not decouple: {worst:.3e}")
    if sub.dim_a and not left_invertible(series(attack_path(sub, H), S)):
        raise DesignError(f"Isolation filter for '{sub.name}' blocks the attack channel")
    return S


def design_bessel2(cutoff_hz: float) -> StateSpace:
    """Second-order Bessel low-pass with unit DC gain and -3 dB at cutoff_hz.

    Raises:
        ValueError: If the cutoff is not positive
    """
    if not cutoff_hz > 0:
        raise ValueError(f"Field 'bessel_cutoff_hz' must be positive, got {cutoff_hz}")
    b, a = bessel(2, 2.0 * np.pi * cutoff_hz, btype="low", analog=True, norm="mag")
    A, B, C, D = tf2ss(b, a)
    return StateSpace(A=A, B=B, C=C, D=D)


def bessel_bank(cutoff_hz: float, channels: int) -> StateSpace:
    """diag(Psi, ..., Psi) acting on each residual channel."""
    if channels == 0:
        return static_gain(np.zeros((0, 0)))
    psi = design_bessel2(cutoff_hz)
    return append([psi] * channels)


def cascade_filters(S_iso: StateSpace, S_noise: StateSpace) -> StateSpace:
    """Isolation filter followed by a noise filter; SISO noise filters act per channel.

    Raises:
        ValueError: On dimension mismatch
    """
    if S_noise.ninputs == 1 and S_noise.noutputs == 1 and S_iso.noutputs > 1:
        S_noise = append([S_noise] * S_iso.noutputs)
    if S_noise.ninputs != S_iso.noutputs:
        raise ValueError(
            f"Noise filter takes {S_noise.ninputs} inputs, isolation filter gives {S_iso.noutputs}"
        )
    return series(S_iso, S_noise)


def check_isolation_necessity(subs: Sequence[Subsystem], L: Interconnection, i: int) -> bool:
    """Right invertibility of the map from the other subsystems' attacks to v_i.

    When it holds, the existence condition is also necessary for isolation.
    """
    ids = list(L.ids)
    if i not in ids:
        raise ValueError(f"Unknown subsystem {i}")
    plant = assemble(subs, L, ids)
    v_rows = output_channels(subs, ids, "v")
    a_cols = input_channels(subs, ids, "a")
    v_slice = port_slices(subs, ids, "v")[i]
    a_slices = port_slices(subs, ids, "a")
    rows = v_rows[v_slice]
    cols = [c for j in ids if j != i for c in a_cols[a_slices[j]]]
    if not rows:
        return True
    if not cols:
        return False
    return right_invertible(plant.select(outputs=rows, inputs=cols))
