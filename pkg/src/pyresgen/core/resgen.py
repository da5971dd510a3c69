"""Distributed residual generators.

Each local generator consumes the measured output y_i, the known reference r_i
and the communicated interaction estimate v_hat_i, and returns the residual
eps_i together with the interaction estimate w_hat_i it communicates. Three
architectures are available:

* naive: an exact copy of the subsystem model, no error feedback;
* luenberger: error feedback mu_i = H_i (y_i - y_hat_i) on the model state,
  which also perturbs the communicated w_hat_i;
* retrofit: the same error feedback, with an auxiliary state chi_i
  (chi' = A chi + mu) whose output nu_i = -E_i chi_i rectifies w_hat_i so the
  communicated estimate equals the naive one.

Local state order is [x_hat, chi, filter]; the bank stacks local states in
ascending subsystem id.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from pyresgen.core.lti import (
    append,
    interconnect_static,
    invariant_zeros,
    is_hurwitz,
    left_invertible,
    series,
    spectral_abscissa,
    static_gain,
)
from pyresgen.core.netsys import (
    AssumptionReport,
    SetCheck,
    assemble,
    input_channels,
    output_channels,
    restrict,
)
from pyresgen.exceptions import DesignError
from pyresgen.models.enums import GeneratorKind
from pyresgen.models.generator import GeneratorBank, LocalResidualGenerator
from pyresgen.models.network import DisconnectionFamily, Interconnection, Subsystem
from pyresgen.models.statespace import StateSpace

logger = logging.getLogger(__name__)


def _gain(sub: Subsystem, H: Optional[np.ndarray]) -> np.ndarray:
    if H is None:
        return np.zeros((sub.n, sub.dim_y))
    H = np.asarray(H, dtype=float)
    if H.size != sub.n * sub.dim_y:
        raise ValueError(f"Gain 'H' must have shape {(sub.n, sub.dim_y)}, got {H.shape}")
    return H.reshape(sub.n, sub.dim_y)


def build_naive(sub: Subsystem, filter: Optional[StateSpace] = None) -> LocalResidualGenerator:
    """Open-loop model copy; residual y - y_hat."""
    return LocalResidualGenerator(
        kind=GeneratorKind.NAIVE, base=sub, H=np.zeros((sub.n, sub.dim_y)), filter=filter
    )


def build_luenberger(
    sub: Subsystem, H: np.ndarray, filter: Optional[StateSpace] = None
) -> LocalResidualGenerator:
    """Decentralized Luenberger observer with error dynamics A - H C.

    The gain enters with the sign that makes A - H C the error dynamics matrix.
    """
    H = _gain(sub, H)
    if not is_hurwitz(sub.A - H @ sub.C):
        logger.warning(f"Luenberger gain leaves A - HC unstable for subsystem '{sub.name}'")
    return LocalResidualGenerator(kind=GeneratorKind.LUENBERGER, base=sub, H=H, filter=filter)


def build_retrofit(
    sub: Subsystem, H: np.ndarray, filter: Optional[StateSpace] = None
) -> LocalResidualGenerator:
    """Retrofit observer whose communicated estimate is independent of the error feedback.

    Raises:
        DesignError: If A - H C is not Hurwitz
    """
    H = _gain(sub, H)
    if not is_hurwitz(sub.A - H @ sub.C):
        raise DesignError(f"Retrofit gain must make A - HC Hurwitz (subsystem '{sub.name}')")
    return LocalResidualGenerator(kind=GeneratorKind.RETROFIT, base=sub, H=H, filter=filter)


def build_local(
    kind: GeneratorKind,
    sub: Subsystem,
    H: Optional[np.ndarray] = None,
    filter: Optional[StateSpace] = None,
) -> LocalResidualGenerator:
    """Dispatch on the architecture."""
    kind = GeneratorKind(kind)
    if kind == GeneratorKind.NAIVE:
        return build_naive(sub, filter)
    if kind == GeneratorKind.LUENBERGER:
        return build_luenberger(sub, H, filter)
    return build_retrofit(sub, H, filter)


def local_realization(gen: LocalResidualGenerator) -> StateSpace:
    """Realization with inputs (y, r, v_hat) and outputs (eps, w_hat)."""
    s, H = gen.base, gen.H
    n, p, q = s.n, s.dim_y, s.dim_w
    A, C, E = s.A, s.C, s.E
    # x_hat' = (A - HC) x_hat + H y + (B - HD) r + (U - HV) v_hat
    B_hat = np.hstack([H, s.B - H @ s.D, s.U - H @ s.V])
    D_raw = np.hstack([np.eye(p), -s.D, -s.V])
    D_w = np.hstack([np.zeros((q, p)), s.F, s.W])

    if gen.kind == GeneratorKind.RETROFIT:
        # chi' = A chi + mu, nu = -E chi
        A_loc = np.block([[A - H @ C, np.zeros((n, n))], [-H @ C, A]])
        B_loc = np.vstack([B_hat, np.hstack([H, -H @ s.D, -H @ s.V])])
        C_raw = np.hstack([-C, np.zeros((p, n))])
        C_w = np.hstack([E, -E])
    else:
        A_loc = A - H @ C
        B_loc = B_hat
        C_raw = -C
        C_w = E

    raw = StateSpace(A=A_loc, B=B_loc, C=np.vstack([C_raw, C_w]), D=np.vstack([D_raw, D_w]))
    if gen.filter is None:
        return raw
    post = append([gen.filter, static_gain(np.eye(q))])
    return series(raw, post)


def realize_Mi(sub: Subsystem, H: np.ndarray) -> StateSpace:
    """M_i = (I + G_{y mu} H)^{-1} realized as (A - HC, H, -C, I)."""
    H = _gain(sub, H)
    return StateSpace(A=sub.A - H @ sub.C, B=H, C=-sub.C, D=np.eye(sub.dim_y))


def build_bank(
    subs: Sequence[Subsystem],
    L: Interconnection,
    kind: GeneratorKind,
    gains: Optional[Dict[int, np.ndarray]] = None,
    filters: Optional[Dict[int, StateSpace]] = None,
) -> GeneratorBank:
    """Bank with one generator per subsystem and communication L_hat = L.

    Args:
        subs: Subsystems numbered 1..N
        L: Physical interconnection, reused as the communication matrix
        kind: Architecture used for every local generator
        gains: Error feedback gain per subsystem id (ignored for naive)
        filters: Optional post-filter per subsystem id
    """
    gains = gains or {}
    filters = filters or {}
    kind = GeneratorKind(kind)
    locals_ = {}
    for k, sub in enumerate(subs):
        i = k + 1
        H = None if kind == GeneratorKind.NAIVE else gains.get(i)
        if H is None and kind != GeneratorKind.NAIVE:
            raise ValueError(f"Missing gain for subsystem {i}")
        locals_[i] = build_local(kind, sub, H, filters.get(i))
    logger.info(f"Built {kind.value} bank with {len(locals_)} local generators")
    return GeneratorBank(locals=locals_, L_hat=L, active=frozenset(locals_))


def bank_state_layout(
    bank: GeneratorBank, index_set: Optional[Iterable[int]] = None
) -> Dict[int, slice]:
    """State range of each local generator in the assembled bank."""
    ids = bank.ordered_ids() if index_set is None else sorted(index_set)
    layout = {}
    start = 0
    for i in ids:
        size = local_realization(bank.locals[i]).nstates
        layout[i] = slice(start, start + size)
        start += size
    return layout


def assemble_bank(
    bank: GeneratorBank,
    index_set: Optional[Iterable[int]] = None,
    include_interaction: bool = False,
) -> StateSpace:
    """Reconfigured bank with inputs (y_I, r_I) and outputs eps_I.

    Args:
        bank: Generator bank
        index_set: Ids to assemble (defaults to the active set)
        include_interaction: Also output w_hat_I after eps_I

    Raises:
        ValueError: If an id is not active or the communication loop is ill-posed
    """
    ids = bank.ordered_ids() if index_set is None else sorted({int(i) for i in index_set})
    if not ids:
        raise ValueError("Index set must not be empty")
    inactive = set(ids) - set(bank.active)
    if inactive:
        raise ValueError(f"Generators {sorted(inactive)} are not active")
    L_I = restrict(bank.L_hat, ids)

    gens = [bank.locals[i] for i in ids]
    locs = [local_realization(g) for g in gens]
    stacked = append(locs)

    y_idx, r_idx, v_idx, e_idx, w_idx = [], [], [], [], []
    in_start, out_start = 0, 0
    for g, loc in zip(gens, locs):
        p, nr, nv = g.base.dim_y, g.base.dim_r, g.base.dim_v
        y_idx.extend(range(in_start, in_start + p))
        r_idx.extend(range(in_start + p, in_start + p + nr))
        v_idx.extend(range(in_start + p + nr, in_start + p + nr + nv))
        ne = g.residual_dim
        e_idx.extend(range(out_start, out_start + ne))
        w_idx.extend(range(out_start + ne, out_start + ne + g.base.dim_w))
        in_start += loc.ninputs
        out_start += loc.noutputs

    ordered = stacked.select(outputs=e_idx + w_idx, inputs=y_idx + r_idx + v_idx)
    ny, nr = len(y_idx), len(r_idx)
    ne = len(e_idx)
    closed = interconnect_static(
        ordered,
        L_I.L,
        loop_inputs=list(range(ny + nr, ny + nr + len(v_idx))),
        loop_outputs=list(range(ne, ne + len(w_idx))),
    )
    if include_interaction:
        return closed
    return closed.select(outputs=list(range(ne)))


def residual_slices(
    bank: GeneratorBank, index_set: Optional[Iterable[int]] = None
) -> Dict[int, slice]:
    """Residual channel range of each generator in assemble_bank's output."""
    ids = bank.ordered_ids() if index_set is None else sorted(index_set)
    slices = {}
    start = 0
    for i in ids:
        size = bank.locals[i].residual_dim
        slices[i] = slice(start, start + size)
        start += size
    return slices


def separate(bank: GeneratorBank, removed: Iterable[int]) -> GeneratorBank:
    """Switch off the removed generators and their communication links.

    Remaining generators are kept as they are; the caller carries their states
    over using bank_state_layout.

    Raises:
        ValueError: If the removal would leave no generator or names inactive ids
    """
    removed = frozenset(int(i) for i in removed)
    if not removed:
        return bank
    if not removed <= bank.active:
        raise ValueError(f"Cannot separate inactive generators {sorted(removed - bank.active)}")
    remaining = bank.active - removed
    if not remaining:
        raise ValueError("Separation would remove every generator")
    logger.info(f"Separated generators {sorted(removed)}; remaining {sorted(remaining)}")
    return GeneratorBank(
        locals=dict(bank.locals), L_hat=restrict(bank.L_hat, remaining), active=remaining
    )


def check_bank_stability(bank: GeneratorBank, family: DisconnectionFamily) -> AssumptionReport:
    """Hurwitz test of the reconfigured bank on every index set of the family."""
    report = AssumptionReport(name="bank stability")
    for index_set in family.sets:
        ids = sorted(index_set)
        try:
            sys = assemble_bank(bank, ids)
        except ValueError as e:
            report.entries.append(SetCheck(index_set=ids, passed=False, detail=str(e)))
            continue
        abscissa = spectral_abscissa(sys.A)
        ok = is_hurwitz(sys.A)
        report.entries.append(
            SetCheck(
                index_set=ids,
                passed=ok,
                detail="Hurwitz" if ok else "not Hurwitz",
                value=float(abscissa),
            )
        )
    if not report.passed:
        logger.warning(
            f"{bank.kind.value} bank unstable on {[e.index_set for e in report.failures]}"
        )
    return report


@dataclass
class AttackResponse:
    """Attack-to-residual map of the reconfigured closed loop with r = 0.

    Attributes:
        index_set: Remaining ids
        system: Realization a_I -> eps_I
        stable: Whether the map is Hurwitz
        left_invertible: Whether every nonzero attack produces a nonzero residual
        zeros: Invariant zeros (empty when not computable)
        zeros_stable: Whether every invariant zero lies in the open left half plane
    """

    index_set: List[int]
    system: StateSpace
    stable: bool
    left_invertible: bool
    zeros: List[complex] = field(default_factory=list)
    zeros_stable: bool = True

    def to_dict(self) -> dict:
        return {
            "index_set": list(self.index_set),
            "stable": self.stable,
            "left_invertible": self.left_invertible,
            "zeros": [[z.real, z.imag] for z in self.zeros],
            "zeros_stable": self.zeros_stable,
        }


def attack_to_residual(
    subs: Sequence[Subsystem],
    L: Interconnection,
    bank: GeneratorBank,
    index_set: Optional[Iterable[int]] = None,
) -> StateSpace:
    """Series connection of the plant a_I -> y_I with the bank y_I -> eps_I."""
    ids = bank.ordered_ids() if index_set is None else sorted(index_set)
    plant = assemble(subs, L, ids)
    T_ya = plant.select(
        outputs=output_channels(subs, ids, "y"), inputs=input_channels(subs, ids, "a")
    )
    bank_sys = assemble_bank(bank, ids)
    n_y = T_ya.noutputs
    R_ey = bank_sys.select(inputs=list(range(n_y)))
    return series(T_ya, R_ey)


def analyze_attack_to_residual(
    subs: Sequence[Subsystem],
    L: Interconnection,
    bank: GeneratorBank,
    index_set: Optional[Iterable[int]] = None,
) -> AttackResponse:
    """Stability, left invertibility and invariant zeros of the a_I -> eps_I map."""
    ids = bank.ordered_ids() if index_set is None else sorted(index_set)
    sys = attack_to_residual(subs, L, bank, ids)
    inv = left_invertible(sys)
    zeros: List[complex] = []
    if inv and sys.ninputs:
        try:
            zeros = invariant_zeros(sys)
        except ValueError as e:
            logger.debug(f"Invariant zeros not computable on {ids}: {e}")
    zeros_stable = all(z.real < 0 for z in zeros)
    return AttackResponse(
        index_set=ids,
        system=sys,
        stable=is_hurwitz(sys.A),
        left_invertible=inv,
        zeros=zeros,
        zeros_stable=zeros_stable,
    )


def luenberger_counterexample() -> Tuple[List[Subsystem], Interconnection, Dict[int, np.ndarray]]:
    """Two scalar subsystems where a decentralized Luenberger bank loses stability.

    The plant is stable on {1, 2}, {1} and {2}. With the returned gains the
    Luenberger bank is Hurwitz on {1, 2} but not on {1}; the retrofit bank with
    the same gains is Hurwitz on every set.
    """
    sub1 = Subsystem.from_blocks(name="sigma1", A=[[-3.0]], U=[[1.0]], C=[[1.0]], E=[[1.0]])
    sub2 = Subsystem.from_blocks(name="sigma2", A=[[-2.0]], U=[[1.0]], C=[[1.0]], E=[[1.0]])
    subs = [sub1, sub2]
    L = Interconnection.for_subsystems(subs, np.array([[2.0, 1.0], [-2.0, 0.0]]))
    gains = {1: np.array([[-1.5]]), 2: np.array([[1.0]])}
    return subs, L, gains
