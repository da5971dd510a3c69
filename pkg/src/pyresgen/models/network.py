"""Networked-system dataclasses: Subsystem, Interconnection, DisconnectionFamily."""

import itertools
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from pyresgen.models.statespace import StateSpace

_MATRIX_FIELDS = ("A", "B", "U", "X", "C", "D", "V", "Y", "E", "F", "W", "Z")


@dataclass(frozen=True, eq=False)
class Subsystem:
    """One subsystem with reference r, interaction input v and attack a.

        x' = A x + B r + U v + X a
        y  = C x + D r + V v + Y a
        w  = E x + F r + W v + Z a

    Attributes:
        A, B, U, X: State equation blocks
        C, D, V, Y: Measured output blocks
        E, F, W, Z: Outgoing interaction blocks
        name: Human-readable name
        state_labels: Optional names of the states
        reference_labels: Optional names of the reference channels
        output_labels: Optional names of the measured outputs
        interaction_in_labels: Optional names of the v channels
        interaction_out_labels: Optional names of the w channels
        attack_labels: Optional names of the attack channels
    """

    A: np.ndarray
    B: np.ndarray
    U: np.ndarray
    X: np.ndarray
    C: np.ndarray
    D: np.ndarray
    V: np.ndarray
    Y: np.ndarray
    E: np.ndarray
    F: np.ndarray
    W: np.ndarray
    Z: np.ndarray
    name: str = ""
    state_labels: Optional[Tuple[str, ...]] = None
    reference_labels: Optional[Tuple[str, ...]] = None
    output_labels: Optional[Tuple[str, ...]] = None
    interaction_in_labels: Optional[Tuple[str, ...]] = None
    interaction_out_labels: Optional[Tuple[str, ...]] = None
    attack_labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        mats = {}
        for key in _MATRIX_FIELDS:
            arr = np.asarray(getattr(self, key), dtype=float)
            if arr.ndim != 2:
                raise ValueError(f"Subsystem matrix '{key}' must be two-dimensional")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"Subsystem matrix '{key}' contains non-finite entries")
            mats[key] = arr

        n = mats["A"].shape[0]
        dims = {
            "r": mats["B"].shape[1],
            "v": mats["U"].shape[1],
            "a": mats["X"].shape[1],
            "y": mats["C"].shape[0],
            "w": mats["E"].shape[0],
        }
        expected = {
            "A": (n, n),
            "B": (n, dims["r"]),
            "U": (n, dims["v"]),
            "X": (n, dims["a"]),
            "C": (dims["y"], n),
            "D": (dims["y"], dims["r"]),
            "V": (dims["y"], dims["v"]),
            "Y": (dims["y"], dims["a"]),
            "E": (dims["w"], n),
            "F": (dims["w"], dims["r"]),
            "W": (dims["w"], dims["v"]),
            "Z": (dims["w"], dims["a"]),
        }
        for key, shape in expected.items():
            if mats[key].shape != shape:
                raise ValueError(
                    f"Subsystem matrix '{key}' must have shape {shape}, got {mats[key].shape}"
                )
        for key, arr in mats.items():
            arr.setflags(write=False)
            object.__setattr__(self, key, arr)

        label_dims = {
            "state_labels": n,
            "reference_labels": dims["r"],
            "output_labels": dims["y"],
            "interaction_in_labels": dims["v"],
            "interaction_out_labels": dims["w"],
            "attack_labels": dims["a"],
        }
        for key, size in label_dims.items():
            value = getattr(self, key)
            if value is not None:
                if len(value) != size:
                    raise ValueError(f"Field '{key}' must have {size} entries")
                object.__setattr__(self, key, tuple(value))

    @property
    def n(self) -> int:
        """State dimension."""
        return self.A.shape[0]

    @property
    def dim_r(self) -> int:
        return self.B.shape[1]

    @property
    def dim_v(self) -> int:
        return self.U.shape[1]

    @property
    def dim_a(self) -> int:
        return self.X.shape[1]

    @property
    def dim_y(self) -> int:
        return self.C.shape[0]

    @property
    def dim_w(self) -> int:
        return self.E.shape[0]

    def realization(self) -> StateSpace:
        """Realization with inputs (r, v, a) and outputs (y, w)."""
        return StateSpace(
            A=self.A,
            B=np.hstack([self.B, self.U, self.X]),
            C=np.vstack([self.C, self.E]),
            D=np.block([[self.D, self.V, self.Y], [self.F, self.W, self.Z]]),
        )

    def transfer(self, outputs: str, inputs: str) -> StateSpace:
        """Realization of a single channel pair such as G_{y v}.

        Args:
            outputs: "y" or "w"
            inputs: Any combination of "r", "v", "a" (e.g. "av" stacks [a, v])

        Returns:
            The selected StateSpace
        """
        offsets = {"r": 0, "v": self.dim_r, "a": self.dim_r + self.dim_v}
        sizes = {"r": self.dim_r, "v": self.dim_v, "a": self.dim_a}
        cols: List[int] = []
        for key in inputs:
            if key not in offsets:
                raise ValueError(f"Unknown input channel '{key}'")
            cols.extend(range(offsets[key], offsets[key] + sizes[key]))
        if outputs == "y":
            rows = list(range(self.dim_y))
        elif outputs == "w":
            rows = list(range(self.dim_y, self.dim_y + self.dim_w))
        else:
            raise ValueError(f"Unknown output channel '{outputs}'")
        return self.realization().select(outputs=rows, inputs=cols)

    @classmethod
    def from_blocks(cls, name: str = "", **blocks) -> "Subsystem":
        """Build a subsystem filling omitted blocks with zeros of the right shape.

        A, C and E fix n, dim_y and dim_w; B, U and X fix dim_r, dim_v and dim_a.
        """
        A = np.atleast_2d(np.asarray(blocks.get("A"), dtype=float))
        n = A.shape[0]

        def cols(key: str) -> int:
            value = blocks.get(key)
            return 0 if value is None else np.asarray(value, dtype=float).reshape(n, -1).shape[1]

        def rows(key: str) -> int:
            value = blocks.get(key)
            return 0 if value is None else np.asarray(value, dtype=float).reshape(-1, n).shape[0]

        dr, dv, da = cols("B"), cols("U"), cols("X")
        dy, dw = rows("C"), rows("E")
        shapes = {
            "A": (n, n),
            "B": (n, dr),
            "U": (n, dv),
            "X": (n, da),
            "C": (dy, n),
            "D": (dy, dr),
            "V": (dy, dv),
            "Y": (dy, da),
            "E": (dw, n),
            "F": (dw, dr),
            "W": (dw, dv),
            "Z": (dw, da),
        }
        mats = {}
        for key, shape in shapes.items():
            value = blocks.get(key)
            mats[key] = (
                np.zeros(shape) if value is None else np.asarray(value, dtype=float).reshape(shape)
            )
        labels = {k: v for k, v in blocks.items() if k.endswith("_labels")}
        return cls(name=name, **mats, **labels)


@dataclass(frozen=True, eq=False)
class Interconnection:
    """Constant interaction matrix v = L w over a set of subsystem ids.

    Attributes:
        L: Matrix with row blocks sized by dim_v and column blocks sized by dim_w
        ids: Subsystem ids (1-based, ascending) covered by the matrix
        v_dims: dim_v per subsystem, in ids order
        w_dims: dim_w per subsystem, in ids order
    """

    L: np.ndarray
    ids: Tuple[int, ...]
    v_dims: Tuple[int, ...]
    w_dims: Tuple[int, ...]

    def __post_init__(self):
        ids = tuple(int(i) for i in self.ids)
        if list(ids) != sorted(set(ids)):
            raise ValueError("Field 'ids' must be strictly ascending")
        v_dims = tuple(int(d) for d in self.v_dims)
        w_dims = tuple(int(d) for d in self.w_dims)
        if len(v_dims) != len(ids) or len(w_dims) != len(ids):
            raise ValueError("Fields 'v_dims' and 'w_dims' must have one entry per id")
        L = np.asarray(self.L, dtype=float).reshape(sum(v_dims), sum(w_dims))
        if not np.all(np.isfinite(L)):
            raise ValueError("Interconnection matrix 'L' contains non-finite entries")
        L.setflags(write=False)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "v_dims", v_dims)
        object.__setattr__(self, "w_dims", w_dims)

    @classmethod
    def for_subsystems(cls, subs: Sequence[Subsystem], L: np.ndarray) -> "Interconnection":
        """Interconnection over subsystems numbered 1..N."""
        return cls(
            L=L,
            ids=tuple(range(1, len(subs) + 1)),
            v_dims=tuple(s.dim_v for s in subs),
            w_dims=tuple(s.dim_w for s in subs),
        )

    def _offsets(self, dims: Tuple[int, ...]) -> Dict[int, slice]:
        starts = np.concatenate([[0], np.cumsum(dims)]).astype(int)
        return {i: slice(starts[k], starts[k + 1]) for k, i in enumerate(self.ids)}

    def row_slices(self) -> Dict[int, slice]:
        """Row range of each subsystem's v block."""
        return self._offsets(self.v_dims)

    def col_slices(self) -> Dict[int, slice]:
        """Column range of each subsystem's w block."""
        return self._offsets(self.w_dims)

    def block(self, i: int, j: int) -> np.ndarray:
        """The (i, j) block mapping w_j into v_i."""
        return self.L[self.row_slices()[i], self.col_slices()[j]]

    @property
    def pattern(self) -> np.ndarray:
        """Boolean block sparsity pattern (N x N) in ids order."""
        rows, cols = self.row_slices(), self.col_slices()
        return np.array(
            [[bool(np.any(self.L[rows[i], cols[j]] != 0)) for j in self.ids] for i in self.ids],
            dtype=bool,
        )


def all_index_sets(ids: Iterable[int]) -> List[FrozenSet[int]]:
    """Every nonempty subset of ids, largest first."""
    ids = sorted(ids)
    sets = []
    for size in range(len(ids), 0, -1):
        sets.extend(frozenset(c) for c in itertools.combinations(ids, size))
    return sets


@dataclass(frozen=True)
class DisconnectionFamily:
    """Index sets that may remain after disconnection, and the alarm response.

    Attributes:
        sets: Possible remaining index sets (each nonempty)
        alarm_map: Subsystem id -> ids removed when that subsystem raises an alarm
    """

    sets: Tuple[FrozenSet[int], ...]
    alarm_map: Dict[int, FrozenSet[int]] = field(default_factory=dict)

    def __post_init__(self):
        sets = tuple(frozenset(int(i) for i in s) for s in self.sets)
        alarm_map = {int(k): frozenset(int(i) for i in v) for k, v in self.alarm_map.items()}
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "alarm_map", alarm_map)
        self.validate()

    @property
    def universe(self) -> FrozenSet[int]:
        """Union of all index sets."""
        return frozenset().union(*self.sets) if self.sets else frozenset()

    def validate(self) -> None:
        """Check that sets are nonempty and the alarm map stays within the family.

        Raises:
            ValueError: If an index set is empty or an alarm leads outside the family
        """
        if not self.sets:
            raise ValueError("Field 'sets' must contain at least one index set")
        for s in self.sets:
            if not s:
                raise ValueError("Field 'sets' must not contain the empty set")
        full = self.universe
        for i, removed in self.alarm_map.items():
            if i not in full:
                raise ValueError(f"Field 'alarm_map' refers to unknown subsystem {i}")
            if not removed <= full:
                raise ValueError(f"Field 'alarm_map' for {i} removes unknown subsystems")
            remaining = full - removed
            if remaining and remaining not in self.sets:
                raise ValueError(
                    f"Field 'alarm_map' for {i} leaves {sorted(remaining)}, which is not in 'sets'"
                )

    def removed_on_alarm(self, i: int) -> FrozenSet[int]:
        """Ids to remove when subsystem i raises its alarm (defaults to {i})."""
        return self.alarm_map.get(i, frozenset({i}))

    @classmethod
    def default(cls, n: int) -> "DisconnectionFamily":
        """All nonempty subsets of 1..n with alarm map {i: {i}}."""
        ids = range(1, n + 1)
        return cls(sets=tuple(all_index_sets(ids)), alarm_map={i: frozenset({i}) for i in ids})
