"""Networked-system operations: disconnection, assembly and assumption checks."""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np
import scipy.linalg as la

from pyresgen.core.lti import (
    ILL_POSED_CONDITION,
    append,
    interconnect_static,
    is_hurwitz,
    left_invertible,
    spectral_abscissa,
)
from pyresgen.models.network import DisconnectionFamily, Interconnection, Subsystem
from pyresgen.models.statespace import StateSpace

logger = logging.getLogger(__name__)


@dataclass
class SetCheck:
    """Outcome of one check on one remaining index set.

    Attributes:
        index_set: Remaining subsystem ids
        passed: Whether the check passed
        detail: Short human-readable explanation
        value: Optional numeric figure (e.g. spectral abscissa)
    """

    index_set: List[int]
    passed: bool
    detail: str = ""
    value: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "index_set": list(self.index_set),
            "passed": self.passed,
            "detail": self.detail,
            "value": self.value,
        }


@dataclass
class AssumptionReport:
    """Per-index-set results of a check run over a disconnection family.

    Attributes:
        name: Name of the check
        entries: One SetCheck per index set, in family order
    """

    name: str
    entries: List[SetCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """True if every index set passed."""
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> List[SetCheck]:
        """Entries that failed."""
        return [e for e in self.entries if not e.passed]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "entries": [e.to_dict() for e in self.entries],
        }


def _sorted_ids(index_set: Iterable[int]) -> List[int]:
    ids = sorted({int(i) for i in index_set})
    if not ids:
        raise ValueError("Index set must not be empty")
    return ids


def restrict(L: Interconnection, index_set: Iterable[int]) -> Interconnection:
    """Keep the (i, j) blocks of L with i, j in the index set.

    Subsystems keep their original ids.

    Raises:
        ValueError: If the index set is empty or names unknown ids
    """
    ids = _sorted_ids(index_set)
    unknown = set(ids) - set(L.ids)
    if unknown:
        raise ValueError(f"Index set refers to unknown subsystems {sorted(unknown)}")
    rows, cols = L.row_slices(), L.col_slices()
    row_idx = np.concatenate([np.arange(L.L.shape[0])[rows[i]] for i in ids]).astype(int)
    col_idx = np.concatenate([np.arange(L.L.shape[1])[cols[j]] for j in ids]).astype(int)
    pos = {i: k for k, i in enumerate(L.ids)}
    return Interconnection(
        L=L.L[np.ix_(row_idx, col_idx)],
        ids=tuple(ids),
        v_dims=tuple(L.v_dims[pos[i]] for i in ids),
        w_dims=tuple(L.w_dims[pos[i]] for i in ids),
    )


def _subsystem_map(subs: Sequence[Subsystem]) -> dict:
    return {k + 1: s for k, s in enumerate(subs)}


def _check_dims(subs: Sequence[Subsystem], L: Interconnection) -> None:
    by_id = _subsystem_map(subs)
    for i, dv, dw in zip(L.ids, L.v_dims, L.w_dims):
        if i not in by_id:
            raise ValueError(f"Interconnection refers to unknown subsystem {i}")
        if by_id[i].dim_v != dv or by_id[i].dim_w != dw:
            raise ValueError(
                f"Interconnection block sizes for subsystem {i} do not match its ports"
            )


def loop_matrix(subs: Sequence[Subsystem], L_I: Interconnection) -> np.ndarray:
    """I - L_I diag(W_i) over the subsystems covered by L_I."""
    _check_dims(subs, L_I)
    by_id = _subsystem_map(subs)
    W = la.block_diag(*[by_id[i].W for i in L_I.ids])
    W = W.reshape(sum(L_I.w_dims), sum(L_I.v_dims))
    return np.eye(L_I.L.shape[0]) - L_I.L @ W


def check_well_posed(subs: Sequence[Subsystem], L_I: Interconnection) -> bool:
    """True iff I - L_I diag(W_i) has condition number below the ill-posedness limit.

    Args:
        subs: Subsystems numbered 1..N
        L_I: Interconnection over the remaining ids
    """
    F = loop_matrix(subs, L_I)
    if F.size == 0:
        return True
    cond = np.linalg.cond(F)
    logger.debug(f"Loop condition number on {list(L_I.ids)}: {cond:.3e}")
    return bool(cond < ILL_POSED_CONDITION)


def _labels(prefix: str, i: int, names: Optional[Sequence[str]], size: int) -> List[str]:
    if names is not None:
        return [f"{prefix}{i}:{name}" for name in names]
    return [f"{prefix}{i}[{k}]" for k in range(size)]


def port_labels(sub: Subsystem, i: int) -> dict:
    """Channel labels of subsystem i keyed by port letter."""
    return {
        "r": _labels("r", i, sub.reference_labels, sub.dim_r),
        "v": _labels("v", i, sub.interaction_in_labels, sub.dim_v),
        "a": _labels("a", i, sub.attack_labels, sub.dim_a),
        "y": _labels("y", i, sub.output_labels, sub.dim_y),
        "w": _labels("w", i, sub.interaction_out_labels, sub.dim_w),
    }


def assemble(
    subs: Sequence[Subsystem], L: Interconnection, index_set: Optional[Iterable[int]] = None
) -> StateSpace:
    """Closed realization Sigma_I with inputs (r_I, a_I) and outputs (y_I, w_I, v_I).

    The state is the stack of the remaining subsystem states in ascending id order.

    Args:
        subs: Subsystems numbered 1..N
        L: Interconnection over (a superset of) the index set
        index_set: Remaining ids (defaults to L.ids)

    Returns:
        The assembled StateSpace

    Raises:
        ValueError: If the index set is invalid or the loop is ill-posed
    """
    ids = list(L.ids) if index_set is None else _sorted_ids(index_set)
    L_I = L if list(L.ids) == ids else restrict(L, ids)
    _check_dims(subs, L_I)
    by_id = _subsystem_map(subs)
    parts = [by_id[i] for i in ids]

    stacked = append([s.realization() for s in parts])
    # per-subsystem input blocks are [r, v, a]; output blocks are [y, w]
    in_off = np.cumsum([0] + [s.dim_r + s.dim_v + s.dim_a for s in parts])
    out_off = np.cumsum([0] + [s.dim_y + s.dim_w for s in parts])
    r_idx, v_idx, a_idx, y_idx, w_idx = [], [], [], [], []
    labels = {"r": [], "v": [], "a": [], "y": [], "w": []}
    for k, (i, s) in enumerate(zip(ids, parts)):
        base = in_off[k]
        r_idx.extend(range(base, base + s.dim_r))
        v_idx.extend(range(base + s.dim_r, base + s.dim_r + s.dim_v))
        a_idx.extend(range(base + s.dim_r + s.dim_v, base + s.dim_r + s.dim_v + s.dim_a))
        base = out_off[k]
        y_idx.extend(range(base, base + s.dim_y))
        w_idx.extend(range(base + s.dim_y, base + s.dim_y + s.dim_w))
        for key, names in port_labels(s, i).items():
            labels[key].extend(names)

    ordered = stacked.select(outputs=y_idx + w_idx, inputs=r_idx + v_idx + a_idx).with_labels(
        input_labels=labels["r"] + labels["v"] + labels["a"],
        output_labels=labels["y"] + labels["w"],
    )
    nr, nv = len(r_idx), len(v_idx)
    ny, nw = len(y_idx), len(w_idx)
    return interconnect_static(
        ordered,
        L_I.L,
        loop_inputs=list(range(nr, nr + nv)),
        loop_outputs=list(range(ny, ny + nw)),
        append_loop_signal=True,
    )


def output_channels(subs: Sequence[Subsystem], ids: Sequence[int], port: str) -> List[int]:
    """Output indices of the given port ('y', 'w' or 'v') in an assembled system."""
    by_id = _subsystem_map(subs)
    parts = [by_id[i] for i in ids]
    ny = sum(s.dim_y for s in parts)
    nw = sum(s.dim_w for s in parts)
    if port == "y":
        return list(range(ny))
    if port == "w":
        return list(range(ny, ny + nw))
    if port == "v":
        return list(range(ny + nw, ny + nw + sum(s.dim_v for s in parts)))
    raise ValueError(f"Unknown output port '{port}'")


def input_channels(subs: Sequence[Subsystem], ids: Sequence[int], port: str) -> List[int]:
    """Input indices of the given port ('r' or 'a') in an assembled system."""
    by_id = _subsystem_map(subs)
    parts = [by_id[i] for i in ids]
    nr = sum(s.dim_r for s in parts)
    if port == "r":
        return list(range(nr))
    if port == "a":
        return list(range(nr, nr + sum(s.dim_a for s in parts)))
    raise ValueError(f"Unknown input port '{port}'")


def port_slices(subs: Sequence[Subsystem], ids: Sequence[int], port: str) -> dict:
    """Per-subsystem index ranges of one port inside its stacked block."""
    by_id = _subsystem_map(subs)
    sizes = {
        "r": lambda s: s.dim_r,
        "a": lambda s: s.dim_a,
        "y": lambda s: s.dim_y,
        "w": lambda s: s.dim_w,
        "v": lambda s: s.dim_v,
        "x": lambda s: s.n,
    }[port]
    slices = {}
    start = 0
    for i in ids:
        size = sizes(by_id[i])
        slices[i] = slice(start, start + size)
        start += size
    return slices


def check_assumption1(
    subs: Sequence[Subsystem], L: Interconnection, family: DisconnectionFamily
) -> AssumptionReport:
    """Internal stability of the plant for every remaining index set."""
    report = AssumptionReport(name="internal stability")
    for index_set in family.sets:
        ids = sorted(index_set)
        try:
            sys = assemble(subs, L, ids)
        except ValueError as e:
            report.entries.append(SetCheck(index_set=ids, passed=False, detail=str(e)))
            continue
        abscissa = spectral_abscissa(sys.A)
        ok = is_hurwitz(sys.A)
        detail = "Hurwitz" if ok else "not Hurwitz"
        report.entries.append(
            SetCheck(index_set=ids, passed=ok, detail=detail, value=float(abscissa))
        )
    if not report.passed:
        logger.warning(f"Internal stability fails on {[e.index_set for e in report.failures]}")
    return report


def check_assumption2(
    subs: Sequence[Subsystem], L: Interconnection, family: DisconnectionFamily
) -> AssumptionReport:
    """Left invertibility of the attack-to-output map for every remaining index set."""
    report = AssumptionReport(name="attack detectability")
    for index_set in family.sets:
        ids = sorted(index_set)
        try:
            sys = assemble(subs, L, ids)
        except ValueError as e:
            report.entries.append(SetCheck(index_set=ids, passed=False, detail=str(e)))
            continue
        T_ya = sys.select(
            outputs=output_channels(subs, ids, "y"), inputs=input_channels(subs, ids, "a")
        )
        ok = left_invertible(T_ya)
        detail = "left invertible" if ok else "rank deficient: undetectable attacks exist"
        report.entries.append(SetCheck(index_set=ids, passed=ok, detail=detail))
    if not report.passed:
        logger.warning(f"Attack detectability fails on {[e.index_set for e in report.failures]}")
    return report
