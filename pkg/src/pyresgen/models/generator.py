"""Residual generator dataclasses: LocalResidualGenerator and GeneratorBank."""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional

import numpy as np

from pyresgen.models.enums import GeneratorKind
from pyresgen.models.network import Interconnection, Subsystem
from pyresgen.models.statespace import StateSpace


@dataclass(frozen=True, eq=False)
class LocalResidualGenerator:
    """Local detector subunit attached to one subsystem.

    Attributes:
        kind: Generator architecture
        base: Subsystem model the generator copies
        H: Error feedback gain (n_i x dim_y); zero for the naive architecture
        filter: Post-filter S_i on the raw residual (None means identity)
    """

    kind: GeneratorKind
    base: Subsystem
    H: np.ndarray
    filter: Optional[StateSpace] = None

    def __post_init__(self):
        kind = GeneratorKind(self.kind)
        H = np.asarray(self.H, dtype=float).reshape(self.base.n, self.base.dim_y)
        if kind == GeneratorKind.NAIVE and np.any(H != 0):
            raise ValueError("Field 'H' must be zero for a naive generator")
        if self.filter is not None:
            if self.filter.ninputs != self.base.dim_y:
                raise ValueError(
                    f"Field 'filter' must take {self.base.dim_y} inputs, got {self.filter.ninputs}"
                )
        H.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "H", H)

    @property
    def residual_dim(self) -> int:
        """Number of residual channels after filtering."""
        return self.base.dim_y if self.filter is None else self.filter.noutputs

    @property
    def error_dynamics(self) -> np.ndarray:
        """A_i - H_i C_i."""
        return self.base.A - self.H @ self.base.C


@dataclass(frozen=True, eq=False)
class GeneratorBank:
    """Distributed bank of local generators with communication v_hat = L_hat w_hat.

    Attributes:
        locals: Local generators keyed by subsystem id
        L_hat: Communication matrix over the active ids
        active: Ids of the generators still in operation
    """

    locals: Dict[int, LocalResidualGenerator]
    L_hat: Interconnection
    active: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self):
        active = frozenset(int(i) for i in self.active) or frozenset(self.locals)
        if not active:
            raise ValueError("Field 'active' must not be empty")
        if not active <= set(self.locals):
            raise ValueError(f"Field 'active' refers to unknown generators {sorted(active)}")
        if not active <= set(self.L_hat.ids):
            raise ValueError("Field 'L_hat' must cover every active generator")
        object.__setattr__(self, "active", active)

    @property
    def kind(self) -> GeneratorKind:
        """Architecture shared by the active generators."""
        kinds = {self.locals[i].kind for i in self.active}
        if len(kinds) != 1:
            raise ValueError("Bank mixes generator architectures")
        return kinds.pop()

    def ordered_ids(self) -> list:
        """Active ids in ascending order."""
        return sorted(self.active)
