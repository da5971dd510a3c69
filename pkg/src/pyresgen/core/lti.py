"""Dense continuous-time LTI algebra.

Composition, exact zero-order-hold simulation, frequency-domain evaluation and
structural analysis (Hurwitz test, normal rank, invariant zeros) for
:class:`~pyresgen.models.statespace.StateSpace` realizations.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from pyresgen.models.enums import ComposeKind
from pyresgen.models.statespace import SignalTrace, StateSpace

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-3
ILL_POSED_CONDITION = 1e12
ZERO_MATCH_TOL = 1e-6
SQUARING_SEEDS = (11, 23, 37)


def mat_exp(M: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Matrix exponential e^{Mt} by scaling and squaring with a Pade approximant.

    Args:
        M: Square matrix
        t: Time scaling

    Returns:
        The matrix exponential

    Raises:
        ValueError: If M is not square or not finite
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"mat_exp requires a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("mat_exp requires finite entries")
    if M.shape[0] == 0:
        return np.zeros((0, 0))
    return la.expm(M * t)


def discretize_zoh(sys: StateSpace, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Exact zero-order-hold discretization.

    Uses the augmented exponential exp([[A, B], [0, 0]] h) = [[Ad, Bd], [0, I]].

    Args:
        sys: Continuous-time system
        h: Sampling period in seconds

    Returns:
        Tuple of (Ad, Bd)
    """
    if not h > 0:
        raise ValueError(f"Sampling period must be positive, got {h}")
    n, m = sys.nstates, sys.ninputs
    if n == 0:
        return np.zeros((0, 0)), np.zeros((0, m))
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = sys.A
    aug[:n, n:] = sys.B
    phi = mat_exp(aug, h)
    return phi[:n, :n], phi[:n, n:]


def simulate(
    sys: StateSpace, input: SignalTrace, x0: Optional[np.ndarray] = None
) -> Tuple[SignalTrace, np.ndarray]:
    """Simulate a system on the grid of a piecewise-constant input.

    The recursion x[k+1] = Ad x[k] + Bd u[k], y[k] = C x[k] + D u[k] is exact
    for inputs held constant between samples.

    Args:
        sys: System to simulate
        input: Input trace with sys.ninputs channels
        x0: Initial state (zeros if omitted)

    Returns:
        Tuple of (output trace on the input grid, state after the last sample)

    Raises:
        ValueError: On dimension mismatch
    """
    n = sys.nstates
    u = input.samples
    if u.shape[1] != sys.ninputs:
        raise ValueError(f"Input trace has {u.shape[1]} channels, system expects {sys.ninputs}")
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).reshape(-1)
    if x.shape[0] != n:
        raise ValueError(f"Initial state has dimension {x.shape[0]}, system has {n} states")

    Ad, Bd = discretize_zoh(sys, input.step)
    states = np.empty((u.shape[0], n))
    for k in range(u.shape[0]):
        states[k] = x
        x = Ad @ x + Bd @ u[k]
    y = states @ sys.C.T + u @ sys.D.T
    return SignalTrace(step=input.step, samples=y, start=input.start, labels=sys.output_labels), x


def freq_response(sys: StateSpace, s: complex) -> np.ndarray:
    """Evaluate G(s) = C (sI - A)^{-1} B + D by a linear solve.

    Raises:
        ValueError: If s is an eigenvalue of A
    """
    n = sys.nstates
    if n == 0:
        return sys.D.astype(complex)
    try:
        X = np.linalg.solve(s * np.eye(n) - sys.A, sys.B.astype(complex))
    except np.linalg.LinAlgError as e:
        raise ValueError(f"sI - A is singular at s = {s}") from e
    return sys.C @ X + sys.D


def dc_gain(sys: StateSpace) -> np.ndarray:
    """Steady-state gain -C A^{-1} B + D of a Hurwitz system.

    Raises:
        ValueError: If A is not Hurwitz
    """
    if sys.nstates == 0:
        return sys.D.copy()
    if not is_hurwitz(sys.A):
        raise ValueError("DC gain requires a Hurwitz state matrix")
    return sys.D - sys.C @ np.linalg.solve(sys.A, sys.B)


def spectral_abscissa(A: np.ndarray) -> float:
    """Largest real part among the eigenvalues of A (-inf for an empty matrix)."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 0:
        return -np.inf
    return float(np.max(np.linalg.eigvals(A).real))


def is_hurwitz(A: np.ndarray, margin: float = 0.0) -> bool:
    """True iff every eigenvalue of A has real part below -margin."""
    if margin < 0:
        raise ValueError(f"Stability margin must be non-negative, got {margin}")
    return spectral_abscissa(A) < -margin


def _numerical_rank(G: np.ndarray, tol: float) -> int:
    if G.size == 0:
        return 0
    sv = np.linalg.svd(G, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


def sample_frequencies(sys: StateSpace, count: int, seed: int = 0) -> np.ndarray:
    """Random complex frequencies on |s| = 1 + spectral radius of A, away from its eigenvalues."""
    rng = np.random.default_rng(seed)
    eigs = np.linalg.eigvals(sys.A) if sys.nstates else np.zeros(0)
    radius = 1.0 + (float(np.max(np.abs(eigs))) if eigs.size else 0.0)
    points: List[complex] = []
    while len(points) < count:
        s = radius * np.exp(1j * rng.uniform(0.05, np.pi - 0.05))
        if eigs.size == 0 or np.min(np.abs(eigs - s)) > 1e-6 * radius:
            points.append(complex(s))
    return np.asarray(points)


def normal_rank(sys: StateSpace, trials: int = 5, tol: float = 1e-9, seed: int = 0) -> int:
    """Normal rank of the transfer matrix, as the max numerical rank over random frequencies."""
    if trials < 3:
        raise ValueError(f"normal_rank needs at least 3 trials, got {trials}")
    if sys.noutputs == 0 or sys.ninputs == 0:
        return 0
    return max(
        _numerical_rank(freq_response(sys, s), tol) for s in sample_frequencies(sys, trials, seed)
    )


def left_invertible(sys: StateSpace) -> bool:
    """True iff the normal rank equals the number of inputs."""
    return normal_rank(sys) == sys.ninputs


def right_invertible(sys: StateSpace) -> bool:
    """True iff the normal rank equals the number of outputs."""
    return normal_rank(sys) == sys.noutputs


def _square_zeros(sys: StateSpace) -> np.ndarray:
    n, m = sys.nstates, sys.ninputs
    if normal_rank(sys) < m:
        raise ValueError("System pencil is singular: transfer matrix is rank deficient")
    L = np.block([[sys.A, sys.B], [sys.C, sys.D]])
    M = np.zeros_like(L)
    M[:n, :n] = np.eye(n)
    if L.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        eigs = la.eigvals(L, M)
    return eigs[np.isfinite(eigs) & (np.abs(eigs) < 1e10)]


def invariant_zeros(sys: StateSpace) -> List[complex]:
    """Finite invariant zeros from the Rosenbrock pencil.

    Non-square systems are squared down with random static matrices on the
    wide side; the computation is repeated for several seeds and only zeros
    found for every seed are kept.

    Raises:
        ValueError: If the (squared) pencil is singular
    """
    p, m = sys.noutputs, sys.ninputs
    if p == m:
        return sorted(_square_zeros(sys).tolist(), key=lambda z: (z.real, z.imag))

    candidates = []
    for seed in SQUARING_SEEDS:
        K = np.random.default_rng(seed).standard_normal((m, p))
        if p > m:
            squared = StateSpace(A=sys.A, B=sys.B, C=K @ sys.C, D=K @ sys.D)
        else:
            squared = StateSpace(A=sys.A, B=sys.B @ K, C=sys.C, D=sys.D @ K)
        candidates.append(_square_zeros(squared))

    common = []
    for z in candidates[0]:
        tol = ZERO_MATCH_TOL * (1 + abs(z))
        if all(c.size and np.min(np.abs(c - z)) < tol for c in candidates[1:]):
            common.append(complex(z))
    logger.debug(f"Squared-down zeros kept {len(common)} of {len(candidates[0])} candidates")
    return sorted(common, key=lambda z: (z.real, z.imag))


def static_gain(D: np.ndarray) -> StateSpace:
    """Memoryless system y = D u."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    return StateSpace(
        A=np.zeros((0, 0)), B=np.zeros((0, D.shape[1])), C=np.zeros((D.shape[0], 0)), D=D
    )


def append(systems: Sequence[StateSpace]) -> StateSpace:
    """Block-diagonal stacking of inputs, outputs and states."""
    if not systems:
        raise ValueError("append requires at least one system")
    in_labels = None
    out_labels = None
    if all(s.input_labels is not None for s in systems):
        in_labels = tuple(label for s in systems for label in s.input_labels)
    if all(s.output_labels is not None for s in systems):
        out_labels = tuple(label for s in systems for label in s.output_labels)
    return StateSpace(
        A=la.block_diag(*[s.A for s in systems]),
        B=la.block_diag(*[s.B for s in systems]),
        C=la.block_diag(*[s.C for s in systems]),
        D=la.block_diag(*[s.D for s in systems]),
        input_labels=in_labels,
        output_labels=out_labels,
    )


def series(first: StateSpace, second: StateSpace) -> StateSpace:
    """Cascade where the output of first drives second; transfer is G2 G1."""
    if first.noutputs != second.ninputs:
        raise ValueError(
            f"Series connection needs {first.noutputs} inputs on the second system, "
            f"got {second.ninputs}"
        )
    n1, n2 = first.nstates, second.nstates
    A = np.block([[first.A, np.zeros((n1, n2))], [second.B @ first.C, second.A]])
    B = np.vstack([first.B, second.B @ first.D])
    C = np.hstack([second.D @ first.C, second.C])
    D = second.D @ first.D
    return StateSpace(
        A=A, B=B, C=C, D=D, input_labels=first.input_labels, output_labels=second.output_labels
    )


def parallel(first: StateSpace, second: StateSpace) -> StateSpace:
    """Shared input, summed outputs."""
    if first.ninputs != second.ninputs or first.noutputs != second.noutputs:
        raise ValueError("Parallel connection requires identical port dimensions")
    return StateSpace(
        A=la.block_diag(first.A, second.A),
        B=np.vstack([first.B, second.B]),
        C=np.hstack([first.C, second.C]),
        D=first.D + second.D,
        input_labels=first.input_labels,
        output_labels=first.output_labels,
    )


def feedback(plant: StateSpace, controller: StateSpace, sign: float = -1.0) -> StateSpace:
    """Close u = r + sign * controller(plant output); returns the map r -> plant output.

    Raises:
        ValueError: On dimension mismatch or an ill-posed algebraic loop
    """
    if controller.ninputs != plant.noutputs or controller.noutputs != plant.ninputs:
        raise ValueError("Feedback connection requires matching port dimensions")
    A1, B1, C1, D1 = plant.A, plant.B, plant.C, plant.D
    A2, B2, C2, D2 = controller.A, controller.B, controller.C, controller.D

    F = np.eye(plant.ninputs) - sign * D2 @ D1
    if np.linalg.cond(F) > ILL_POSED_CONDITION:
        raise ValueError("Ill-posed feedback interconnection")
    E = np.linalg.inv(F)
    T1 = E
    T2 = D1 @ E

    A = np.block(
        [
            [A1 + sign * B1 @ T1 @ D2 @ C1, sign * B1 @ T1 @ C2],
            [B2 @ (C1 + sign * T2 @ D2 @ C1), A2 + sign * B2 @ T2 @ C2],
        ]
    )
    B = np.vstack([B1 @ T1, B2 @ T2])
    C = np.hstack([C1 + sign * T2 @ D2 @ C1, sign * T2 @ C2])
    D = T2
    return StateSpace(
        A=A, B=B, C=C, D=D, input_labels=plant.input_labels, output_labels=plant.output_labels
    )


def compose(kind: ComposeKind, systems: Sequence[StateSpace]) -> StateSpace:
    """Combine systems; series lists are in signal-flow order.

    Args:
        kind: Kind of composition
        systems: Systems to combine (feedback takes exactly plant and controller)

    Returns:
        The composed realization with state dimension equal to the sum of the parts
    """
    if not systems:
        raise ValueError("compose requires at least one system")
    kind = ComposeKind(kind)
    if kind == ComposeKind.BLOCK_DIAG:
        return append(systems)
    if kind == ComposeKind.FEEDBACK:
        if len(systems) != 2:
            raise ValueError("Feedback composition takes exactly two systems")
        return feedback(systems[0], systems[1])
    result = systems[0]
    for sys in systems[1:]:
        result = series(result, sys) if kind == ComposeKind.SERIES else parallel(result, sys)
    return result


def interconnect_static(
    sys: StateSpace,
    L: np.ndarray,
    loop_inputs: Sequence[int],
    loop_outputs: Sequence[int],
    append_loop_signal: bool = False,
) -> StateSpace:
    """Close the static loop u_loop = L y_loop.

    The remaining inputs keep their order; all outputs of sys are kept and the
    loop signal u_loop can be appended as extra outputs.

    Raises:
        ValueError: If I - L D_loop is ill-conditioned (condition number >= 1e12)
    """
    loop_in = np.asarray(loop_inputs, dtype=int)
    loop_out = np.asarray(loop_outputs, dtype=int)
    ext_in = np.setdiff1d(np.arange(sys.ninputs), loop_in)
    L = np.asarray(L, dtype=float).reshape(len(loop_in), len(loop_out))

    Bl, Be = sys.B[:, loop_in], sys.B[:, ext_in]
    Dl, De = sys.D[:, loop_in], sys.D[:, ext_in]
    Cf = sys.C[loop_out, :]
    Dfl = sys.D[np.ix_(loop_out, loop_in)]
    Dfe = sys.D[np.ix_(loop_out, ext_in)]

    k = len(loop_in)
    if k:
        F = np.eye(k) - L @ Dfl
        cond = np.linalg.cond(F)
        if not cond < ILL_POSED_CONDITION:
            raise ValueError(f"Ill-posed interconnection: cond(I - L W) = {cond:.3e}")
        Gx = np.linalg.solve(F, L @ Cf)
        Ge = np.linalg.solve(F, L @ Dfe)
    else:
        Gx = np.zeros((0, sys.nstates))
        Ge = np.zeros((0, len(ext_in)))

    A = sys.A + Bl @ Gx
    B = Be + Bl @ Ge
    C = sys.C + Dl @ Gx
    D = De + Dl @ Ge
    in_labels = None
    out_labels = sys.output_labels
    if sys.input_labels is not None:
        in_labels = tuple(sys.input_labels[i] for i in ext_in)
    if append_loop_signal:
        C = np.vstack([C, Gx])
        D = np.vstack([D, Ge])
        if out_labels is not None and sys.input_labels is not None:
            out_labels = out_labels + tuple(sys.input_labels[i] for i in loop_in)
        else:
            out_labels = None
    return StateSpace(A=A, B=B, C=C, D=D, input_labels=in_labels, output_labels=out_labels)
