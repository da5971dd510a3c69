"""Radial distribution grid dataclasses: Branch, DgUnit, Load, RadialGrid, Partition.

External data is in SI units (V, W, VAr, Ohm); :meth:`RadialGrid.to_per_unit`
converts to the per-unit system used internally (voltage base v0, power base
max |p_g|, impedance base v0^2 / S_base).
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple


@dataclass(frozen=True)
class Branch:
    """Line from a parent bus to a child bus.

    Attributes:
        from_bus: Parent bus (closer to the substation)
        to_bus: Child bus
        r_ohm: Series resistance
        x_ohm: Series reactance
    """

    from_bus: str
    to_bus: str
    r_ohm: float
    x_ohm: float

    def __post_init__(self):
        if not self.r_ohm > 0:
            raise ValueError(f"Branch {self.from_bus}-{self.to_bus}: 'r_ohm' must be positive")
        if not self.x_ohm > 0:
            raise ValueError(f"Branch {self.from_bus}-{self.to_bus}: 'x_ohm' must be positive")
        if self.from_bus == self.to_bus:
            raise ValueError(f"Branch at {self.from_bus}: 'from' and 'to' must differ")


@dataclass(frozen=True)
class DgUnit:
    """Inverter-interfaced generator with first-order reactive power droop.

    q' = -(1/T) q + (K/T) (vref^2 - v^2)

    Attributes:
        bus: Bus the unit is connected to
        t_s: Inverter time constant T in seconds
        k: Droop gain K (per unit)
        p_g_w: Generated active power
        p_c_w: Active power consumed by the customer
        q_c_var: Reactive power consumed by the customer
    """

    bus: str
    t_s: float
    k: float
    p_g_w: float
    p_c_w: float
    q_c_var: float

    def __post_init__(self):
        if not self.t_s > 0:
            raise ValueError(f"DG at {self.bus}: 't_s' must be positive, got {self.t_s}")
        if not self.k >= 0:
            raise ValueError(f"DG at {self.bus}: 'k' must be non-negative, got {self.k}")


@dataclass(frozen=True)
class Load:
    """Constant power withdrawal at a bus."""

    bus: str
    p_w: float
    q_var: float


@dataclass(frozen=True)
class PerUnitBase:
    """Bases of the per-unit system.

    Attributes:
        v_volts: Voltage base (substation voltage)
        s_va: Power base
    """

    v_volts: float
    s_va: float

    @property
    def z_ohm(self) -> float:
        """Impedance base v^2 / S."""
        return self.v_volts**2 / self.s_va


@dataclass(frozen=True)
class RadialGrid:
    """Radial feeder with inverter-based distributed generation.

    Attributes:
        buses: Bus names; the root (substation) is one of them
        branches: Lines of the feeder
        dg: Distributed generation units (at most one per bus)
        v0_volts: Substation voltage magnitude
        root: Substation bus (defaults to the first bus)
        loads: Constant loads at buses
        name: Grid name
        notes: Free-form provenance notes
    """

    buses: Tuple[str, ...]
    branches: Tuple[Branch, ...]
    dg: Tuple[DgUnit, ...]
    v0_volts: float
    root: Optional[str] = None
    loads: Tuple[Load, ...] = ()
    name: str = ""
    notes: str = ""

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "dg", tuple(self.dg))
        object.__setattr__(self, "loads", tuple(self.loads))
        if self.root is None and self.buses:
            object.__setattr__(self, "root", self.buses[0])
        self.validate()

    def validate(self) -> None:
        """Field-level checks; tree structure is checked by the distflow compiler.

        Raises:
            ValueError: On duplicate or unknown buses, or a non-positive voltage
        """
        if not self.v0_volts > 0:
            raise ValueError(f"Field 'v0_volts' must be positive, got {self.v0_volts}")
        if len(set(self.buses)) != len(self.buses):
            raise ValueError("Field 'buses' contains duplicates")
        if self.root not in self.buses:
            raise ValueError(f"Field 'root' refers to unknown bus '{self.root}'")
        known = set(self.buses)
        for b in self.branches:
            for bus in (b.from_bus, b.to_bus):
                if bus not in known:
                    raise ValueError(f"Field 'branches' refers to unknown bus '{bus}'")
        dg_buses = [u.bus for u in self.dg]
        if len(set(dg_buses)) != len(dg_buses):
            raise ValueError("Field 'dg' has more than one unit at a bus")
        for bus in dg_buses + [ld.bus for ld in self.loads]:
            if bus not in known:
                raise ValueError(f"Field 'dg'/'loads' refers to unknown bus '{bus}'")
            if bus == self.root:
                raise ValueError(f"Field 'dg'/'loads' may not use the root bus '{bus}'")

    @property
    def dg_buses(self) -> List[str]:
        """DG buses in bus order."""
        at = {u.bus for u in self.dg}
        return [b for b in self.buses if b in at]

    @property
    def non_root_buses(self) -> List[str]:
        return [b for b in self.buses if b != self.root]

    def dg_at(self) -> Dict[str, DgUnit]:
        return {u.bus: u for u in self.dg}

    def power_base(self) -> float:
        """max |p_g| over the DG units (1 W if there is no generation)."""
        peak = max((abs(u.p_g_w) for u in self.dg), default=0.0)
        return peak if peak > 0 else 1.0

    def to_per_unit(self, s_base: Optional[float] = None) -> Tuple["RadialGrid", PerUnitBase]:
        """Grid expressed in per unit, with its bases."""
        base = PerUnitBase(v_volts=self.v0_volts, s_va=s_base or self.power_base())
        return self._scaled(1.0 / base.v_volts, 1.0 / base.s_va, 1.0 / base.z_ohm), base

    def from_per_unit(self, base: PerUnitBase) -> "RadialGrid":
        """Inverse of to_per_unit."""
        return self._scaled(base.v_volts, base.s_va, base.z_ohm)

    def _scaled(self, kv: float, ks: float, kz: float) -> "RadialGrid":
        return replace(
            self,
            v0_volts=self.v0_volts * kv,
            branches=tuple(
                replace(b, r_ohm=b.r_ohm * kz, x_ohm=b.x_ohm * kz) for b in self.branches
            ),
            dg=tuple(
                replace(u, p_g_w=u.p_g_w * ks, p_c_w=u.p_c_w * ks, q_c_var=u.q_c_var * ks)
                for u in self.dg
            ),
            loads=tuple(replace(ld, p_w=ld.p_w * ks, q_var=ld.q_var * ks) for ld in self.loads),
        )


@dataclass(frozen=True)
class Partition:
    """Grouping of buses into subnetworks.

    Attributes:
        groups: Bus names of each group, in subsystem order (ids 1..N)
        attack_buses: Per group, the DG buses carrying an attack port
            (None: every DG bus of the group)
        names: Optional group names
    """

    groups: Tuple[Tuple[str, ...], ...]
    attack_buses: Optional[Tuple[Tuple[str, ...], ...]] = None
    names: Optional[Tuple[str, ...]] = field(default=None)

    def __post_init__(self):
        groups = tuple(tuple(g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if self.attack_buses is not None:
            attack = tuple(tuple(a) for a in self.attack_buses)
            if len(attack) != len(groups):
                raise ValueError("Field 'attack_buses' must have one entry per group")
            for g, a in zip(groups, attack):
                if not set(a) <= set(g):
                    raise ValueError(f"Field 'attack_buses' lists buses outside group {list(g)}")
            object.__setattr__(self, "attack_buses", attack)
        if self.names is not None:
            if len(self.names) != len(groups):
                raise ValueError("Field 'names' must have one entry per group")
            object.__setattr__(self, "names", tuple(self.names))
        seen: Dict[str, int] = {}
        for k, g in enumerate(groups):
            if not g:
                raise ValueError(f"Field 'groups' entry {k + 1} is empty")
            for bus in g:
                if bus in seen:
                    raise ValueError(f"Field 'groups': bus '{bus}' appears in more than one group")
                seen[bus] = k + 1

    def group_of(self) -> Dict[str, int]:
        """Bus name -> subsystem id (1-based)."""
        return {bus: k + 1 for k, g in enumerate(self.groups) for bus in g}

    def name(self, i: int) -> str:
        return self.names[i - 1] if self.names else f"sigma{i}"

    def ports(self, i: int, grid: RadialGrid) -> List[str]:
        """Attack buses of group i in bus order."""
        group = set(self.groups[i - 1])
        dg = [b for b in grid.dg_buses if b in group]
        if self.attack_buses is None:
            return dg
        chosen = set(self.attack_buses[i - 1])
        return [b for b in dg if b in chosen]
