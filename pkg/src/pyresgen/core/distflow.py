"""LinDistFlow model of radial feeders with droop-controlled inverters.

Branches are oriented away from the root and indexed by their child bus. With
the reduced incidence matrix M (rows: non-root buses, columns: branches; +1 at
the parent, -1 at the child) and m (1 where the parent is the root):

    -M P + M_DG (p_g - p_c) - p_load = 0
    -M Q + M_DG (q - q_c) - q_load = 0
    M^T v^2 + m v0^2 = 2 D_R P + 2 D_X Q

Each partition group becomes one subsystem with state and measured output
q (the DG reactive powers of the group), reference
r = [v0^2; vref^2; p_g; p_c; q_c; p_load; q_load], incoming interaction
v = [v^2 of upstream buses; P, Q into downstream buses] and outgoing interaction
w = [v^2, P, Q of the group's own buses].
"""

import json
import logging
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from pyresgen.core.netsys import AssumptionReport, check_assumption1
from pyresgen.exceptions import ValidationError
from pyresgen.models.grid import Branch, DgUnit, Load, Partition, PerUnitBase, RadialGrid
from pyresgen.models.network import DisconnectionFamily, Interconnection, Subsystem

logger = logging.getLogger(__name__)

CIGRE_RESOURCE = "cigre_residential.json"


def orient(grid: RadialGrid) -> Dict[str, str]:
    """Parent of every non-root bus.

    Raises:
        ValidationError: If the branches do not form a spanning tree
    """
    g = nx.Graph()
    g.add_nodes_from(grid.buses)
    g.add_edges_from((b.from_bus, b.to_bus) for b in grid.branches)
    if not nx.is_tree(g):
        raise ValidationError(f"Grid '{grid.name}' branches do not form a spanning tree")
    return {child: parent for parent, child in nx.dfs_edges(g, source=grid.root)}


def _branch_data(grid: RadialGrid, parent: Dict[str, str]) -> Dict[str, Branch]:
    """Branch feeding each non-root bus."""
    data = {}
    for b in grid.branches:
        child = b.to_bus if parent.get(b.to_bus) == b.from_bus else b.from_bus
        data[child] = b
    return data


@dataclass
class LinDistFlowMatrices:
    """Matrix form of the LinDistFlow equations.

    Attributes:
        buses: Non-root buses (row order of M, column order of branches)
        M: Reduced incidence matrix
        m: Root incidence row
        D_R: Branch resistances (diagonal)
        D_X: Branch reactances (diagonal)
        M_DG: Selection of DG buses (non-root buses x DG buses)
        dg_buses: DG buses (column order of M_DG)
        parent: Parent of every non-root bus
    """

    buses: List[str]
    M: np.ndarray
    m: np.ndarray
    D_R: np.ndarray
    D_X: np.ndarray
    M_DG: np.ndarray
    dg_buses: List[str]
    parent: Dict[str, str]

    def index(self) -> Dict[str, int]:
        return {b: k for k, b in enumerate(self.buses)}


def lindistflow_matrices(grid: RadialGrid) -> LinDistFlowMatrices:
    """Incidence and impedance matrices of a radial grid.

    Raises:
        ValidationError: If the grid is not a tree
    """
    parent = orient(grid)
    buses = grid.non_root_buses
    idx = {b: k for k, b in enumerate(buses)}
    n = len(buses)
    M = np.zeros((n, n))
    m = np.zeros(n)
    branch = _branch_data(grid, parent)
    R = np.zeros(n)
    X = np.zeros(n)
    for k, child in enumerate(buses):
        M[k, k] = -1.0
        p = parent[child]
        if p == grid.root:
            m[k] = 1.0
        else:
            M[idx[p], k] = 1.0
        R[k] = branch[child].r_ohm
        X[k] = branch[child].x_ohm
    dg_buses = grid.dg_buses
    M_DG = np.zeros((n, len(dg_buses)))
    for j, bus in enumerate(dg_buses):
        M_DG[idx[bus], j] = 1.0
    return LinDistFlowMatrices(
        buses=buses,
        M=M,
        m=m,
        D_R=np.diag(R),
        D_X=np.diag(X),
        M_DG=M_DG,
        dg_buses=dg_buses,
        parent=parent,
    )


def _load_vectors(grid: RadialGrid, buses: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
    idx = {b: k for k, b in enumerate(buses)}
    p = np.zeros(len(buses))
    q = np.zeros(len(buses))
    for ld in grid.loads:
        p[idx[ld.bus]] += ld.p_w
        q[idx[ld.bus]] += ld.q_var
    return p, q


@dataclass
class PowerFlow:
    """Monolithic LinDistFlow solution, in the grid's units.

    Attributes:
        buses: Non-root buses
        P: Active power into each bus from its parent
        Q: Reactive power into each bus from its parent
        v_sq: Squared voltage magnitude at each bus
    """

    buses: List[str]
    P: np.ndarray
    Q: np.ndarray
    v_sq: np.ndarray

    def voltage(self, bus: str) -> float:
        return float(np.sqrt(self.v_sq[self.buses.index(bus)]))


def solve_power_flow(grid: RadialGrid, q_dg: Optional[Sequence[float]] = None) -> PowerFlow:
    """Flows and squared voltages for given DG reactive powers (zeros if omitted)."""
    mats = lindistflow_matrices(grid)
    dg = grid.dg_at()
    q_dg = np.zeros(len(mats.dg_buses)) if q_dg is None else np.asarray(q_dg, dtype=float)
    p_inj = np.array([dg[b].p_g_w - dg[b].p_c_w for b in mats.dg_buses])
    q_inj = q_dg - np.array([dg[b].q_c_var for b in mats.dg_buses])
    p_load, q_load = _load_vectors(grid, mats.buses)
    P = np.linalg.solve(mats.M, mats.M_DG @ p_inj.reshape(-1) - p_load)
    Q = np.linalg.solve(mats.M, mats.M_DG @ q_inj.reshape(-1) - q_load)
    rhs = 2 * mats.D_R @ P + 2 * mats.D_X @ Q - mats.m * grid.v0_volts**2
    v_sq = np.linalg.solve(mats.M.T, rhs)
    return PowerFlow(buses=mats.buses, P=P, Q=Q, v_sq=v_sq)


def x_matrix(grid: RadialGrid) -> np.ndarray:
    """Sensitivity X of DG squared voltages to DG reactive injections (v^2 = X q)."""
    mats = lindistflow_matrices(grid)
    Minv_DG = np.linalg.solve(mats.M, mats.M_DG)
    X = 2.0 * Minv_DG.T @ mats.D_X @ Minv_DG
    return 0.5 * (X + X.T)


@dataclass
class SubnetworkMatrices:
    """Rows of the LinDistFlow equations belonging to one group.

    Attributes:
        buses: N_i in bus order
        upstream: U_i, parents of N_i outside the group (root excluded)
        downstream: D_i, children of N_i outside the group
        M_N: Incidence block (N_i x branches into N_i)
        M_ND: Incidence block (N_i x branches into D_i)
        M_UN: Incidence block (U_i x branches into N_i)
        m_N: Root incidence restricted to branches into N_i
        M_DG: DG selection (N_i x DG buses of the group)
        dg_buses: DG buses of the group
        D_R: Resistances of branches into N_i
        D_X: Reactances of branches into N_i
    """

    buses: List[str]
    upstream: List[str]
    downstream: List[str]
    M_N: np.ndarray
    M_ND: np.ndarray
    M_UN: np.ndarray
    m_N: np.ndarray
    M_DG: np.ndarray
    dg_buses: List[str]
    D_R: np.ndarray
    D_X: np.ndarray


def subnetwork_matrices(
    grid: RadialGrid, group: Sequence[str], mats: Optional[LinDistFlowMatrices] = None
) -> SubnetworkMatrices:
    """Sub-blocks of the LinDistFlow matrices for one group of buses.

    Raises:
        ValidationError: On unknown buses, the root inside the group or singular M_N
    """
    mats = mats or lindistflow_matrices(grid)
    idx = mats.index()
    group_set = set(group)
    if grid.root in group_set:
        raise ValidationError(f"Partition group may not contain the root bus '{grid.root}'")
    unknown = group_set - set(idx)
    if unknown:
        raise ValidationError(f"Partition group refers to unknown buses {sorted(unknown)}")
    buses = [b for b in mats.buses if b in group_set]
    upstream = sorted(
        {mats.parent[b] for b in buses if mats.parent[b] not in group_set}
        - {grid.root},
        key=lambda b: idx[b],
    )
    downstream = [b for b in mats.buses if b not in group_set and mats.parent[b] in group_set]
    rows = [idx[b] for b in buses]
    M_N = mats.M[np.ix_(rows, rows)]
    if abs(np.linalg.det(M_N)) < 1e-12:
        raise ValidationError(f"Incidence block of group {buses} is singular")
    dg_buses = [b for b in mats.dg_buses if b in group_set]
    M_DG = np.zeros((len(buses), len(dg_buses)))
    for j, b in enumerate(dg_buses):
        M_DG[buses.index(b), j] = 1.0
    return SubnetworkMatrices(
        buses=buses,
        upstream=upstream,
        downstream=downstream,
        M_N=M_N,
        M_ND=mats.M[np.ix_(rows, [idx[b] for b in downstream])],
        M_UN=mats.M[np.ix_([idx[b] for b in upstream], rows)],
        m_N=mats.m[rows],
        M_DG=M_DG,
        dg_buses=dg_buses,
        D_R=mats.D_R[np.ix_(rows, rows)],
        D_X=mats.D_X[np.ix_(rows, rows)],
    )


@dataclass
class CompiledNetwork:
    """Networked-system form of a partitioned grid, in per unit.

    Attributes:
        subs: One subsystem per group (ids 1..N)
        L: 0/1 interaction matrix
        references: Reference vector r_i per subsystem id
        blocks: Subnetwork matrices per subsystem id
        attack_buses: Attack-port buses per subsystem id
        grid: Per-unit grid
        base: Per-unit bases
        partition: Source partition
    """

    subs: List[Subsystem]
    L: Interconnection
    references: Dict[int, np.ndarray]
    blocks: Dict[int, SubnetworkMatrices]
    attack_buses: Dict[int, List[str]]
    grid: RadialGrid
    base: PerUnitBase
    partition: Partition
    bus_group: Dict[str, int] = field(default_factory=dict)

    @property
    def ids(self) -> List[int]:
        return list(range(1, len(self.subs) + 1))

    def group_of_bus(self, bus: str) -> int:
        """Subsystem id containing a bus."""
        if bus not in self.bus_group:
            raise ValueError(f"Bus '{bus}' is not in any group")
        return self.bus_group[bus]

    def attack_port(self, bus: str) -> Tuple[int, int]:
        """(subsystem id, local attack index) of an attack bus."""
        i = self.group_of_bus(bus)
        if bus not in self.attack_buses[i]:
            raise ValueError(f"Bus '{bus}' does not carry an attack port")
        return i, self.attack_buses[i].index(bus)


def _group_subsystem(
    grid: RadialGrid, blk: SubnetworkMatrices, ports: List[str], name: str
) -> Tuple[Subsystem, np.ndarray]:
    """Subsystem of one group and its reference vector (grid in per unit)."""
    dg = grid.dg_at()
    nN, nU, nD = len(blk.buses), len(blk.upstream), len(blk.downstream)
    n = len(blk.dg_buses)
    load_buses = sorted({ld.bus for ld in grid.loads if ld.bus in blk.buses}, key=blk.buses.index)
    nl = len(load_buses)
    if n == 0:
        raise ValidationError(f"Partition group '{name}' has no DG bus")

    # r = [v0^2; vref^2 (n); p_g (n); p_c (n); q_c (n); p_load (nl); q_load (nl)]
    nr = 1 + 4 * n + 2 * nl
    r_v0, r_vref = 0, slice(1, 1 + n)
    r_pg, r_pc = slice(1 + n, 1 + 2 * n), slice(1 + 2 * n, 1 + 3 * n)
    r_qc = slice(1 + 3 * n, 1 + 4 * n)
    r_pl, r_ql = slice(1 + 4 * n, 1 + 4 * n + nl), slice(1 + 4 * n + nl, nr)
    # v = [v^2_U (nU); P_D (nD); Q_D (nD)]
    nv = nU + 2 * nD
    v_u, v_p, v_q = slice(0, nU), slice(nU, nU + nD), slice(nU + nD, nv)

    S_load = np.zeros((nN, nl))
    for j, b in enumerate(load_buses):
        S_load[blk.buses.index(b), j] = 1.0

    Minv = np.linalg.inv(blk.M_N)
    MinvT = Minv.T
    # P_N, Q_N and v^2_N as linear maps of the stacked signal z = [x; r; v]
    nz = n + nr + nv
    xs = slice(0, n)

    def shift(s: slice) -> slice:
        return slice(n + s.start, n + s.stop)

    def rv(s: slice) -> slice:
        return slice(n + nr + s.start, n + nr + s.stop)

    P_map = np.zeros((nN, nz))
    P_map[:, shift(r_pg)] = Minv @ blk.M_DG
    P_map[:, shift(r_pc)] = -Minv @ blk.M_DG
    P_map[:, shift(r_pl)] = -Minv @ S_load
    P_map[:, rv(v_p)] = -Minv @ blk.M_ND

    Q_map = np.zeros((nN, nz))
    Q_map[:, xs] = Minv @ blk.M_DG
    Q_map[:, shift(r_qc)] = -Minv @ blk.M_DG
    Q_map[:, shift(r_ql)] = -Minv @ S_load
    Q_map[:, rv(v_q)] = -Minv @ blk.M_ND

    V_map = MinvT @ (2 * blk.D_R @ P_map + 2 * blk.D_X @ Q_map)
    V_map[:, rv(v_u)] -= MinvT @ blk.M_UN.T
    V_map[:, n + r_v0] -= MinvT @ blk.m_N

    T = np.array([dg[b].t_s for b in blk.dg_buses])
    K = np.array([dg[b].k for b in blk.dg_buses])
    S_dg = blk.M_DG.T  # picks DG rows out of N_i
    P_ports = np.zeros((n, len(ports)))
    for j, b in enumerate(ports):
        P_ports[blk.dg_buses.index(b), j] = 1.0

    # q' = -q/T + (K/T) (vref^2 + a - v^2_DG)
    gain = np.diag(K / T)
    dyn = -gain @ S_dg @ V_map
    dyn[:, xs] += -np.diag(1.0 / T)
    dyn[:, shift(r_vref)] += gain

    w_map = np.vstack([V_map, P_map, Q_map])
    sub = Subsystem(
        A=dyn[:, xs],
        B=dyn[:, n : n + nr],
        U=dyn[:, n + nr :],
        X=gain @ P_ports,
        C=np.eye(n),
        D=np.zeros((n, nr)),
        V=np.zeros((n, nv)),
        Y=np.zeros((n, len(ports))),
        E=w_map[:, xs],
        F=w_map[:, n : n + nr],
        W=w_map[:, n + nr :],
        Z=np.zeros((3 * nN, len(ports))),
        name=name,
        state_labels=tuple(f"q_{b}" for b in blk.dg_buses),
        output_labels=tuple(f"q_{b}" for b in blk.dg_buses),
        reference_labels=tuple(
            ["v0_sq"]
            + [f"vref_sq_{b}" for b in blk.dg_buses]
            + [f"p_g_{b}" for b in blk.dg_buses]
            + [f"p_c_{b}" for b in blk.dg_buses]
            + [f"q_c_{b}" for b in blk.dg_buses]
            + [f"p_load_{b}" for b in load_buses]
            + [f"q_load_{b}" for b in load_buses]
        ),
        interaction_in_labels=tuple(
            [f"v_sq_{b}" for b in blk.upstream]
            + [f"P_{b}" for b in blk.downstream]
            + [f"Q_{b}" for b in blk.downstream]
        ),
        interaction_out_labels=tuple(
            [f"v_sq_{b}" for b in blk.buses]
            + [f"P_{b}" for b in blk.buses]
            + [f"Q_{b}" for b in blk.buses]
        ),
        attack_labels=tuple(f"a_{b}" for b in ports),
    )

    loads = {b: (0.0, 0.0) for b in load_buses}
    for ld in grid.loads:
        if ld.bus in loads:
            p, q = loads[ld.bus]
            loads[ld.bus] = (p + ld.p_w, q + ld.q_var)
    r = np.concatenate(
        [
            [grid.v0_volts**2],
            np.full(n, grid.v0_volts**2),
            [dg[b].p_g_w for b in blk.dg_buses],
            [dg[b].p_c_w for b in blk.dg_buses],
            [dg[b].q_c_var for b in blk.dg_buses],
            [loads[b][0] for b in load_buses],
            [loads[b][1] for b in load_buses],
        ]
    )
    return sub, r


def compile_network(grid: RadialGrid, partition: Partition) -> CompiledNetwork:
    """Per-unit networked-system form of a partitioned grid.

    Raises:
        ValidationError: If the partition does not cover the non-root buses,
            a group has no DG bus or an attack bus is not a DG bus of its group
    """
    covered = set(partition.group_of())
    missing = set(grid.non_root_buses) - covered
    if missing:
        raise ValidationError(f"Partition does not cover buses {sorted(missing)}")
    for i in range(1, len(partition.groups) + 1):
        if partition.attack_buses is not None:
            dg_in_group = set(grid.dg_buses) & set(partition.groups[i - 1])
            bad = set(partition.attack_buses[i - 1]) - dg_in_group
            if bad:
                raise ValidationError(
                    f"Partition 'attack_buses' of group {i} lists non-DG buses {sorted(bad)}"
                )

    pu, base = grid.to_per_unit()
    mats = lindistflow_matrices(pu)
    subs, refs, blocks, ports = [], {}, {}, {}
    for i, group in enumerate(partition.groups, start=1):
        blk = subnetwork_matrices(pu, group, mats)
        ports[i] = partition.ports(i, pu)
        sub, r = _group_subsystem(pu, blk, ports[i], partition.name(i))
        subs.append(sub)
        refs[i] = r
        blocks[i] = blk

    bus_group = partition.group_of()
    w_offset: Dict[Tuple[int, str], int] = {}
    col = 0
    for i, sub in enumerate(subs, start=1):
        for k, label in enumerate(sub.interaction_out_labels):
            w_offset[(i, label)] = col + k
        col += sub.dim_w
    L = np.zeros((sum(s.dim_v for s in subs), col))
    row = 0
    for i in range(1, len(subs) + 1):
        blk = blocks[i]
        wanted = (
            [(bus, f"v_sq_{bus}") for bus in blk.upstream]
            + [(bus, f"P_{bus}") for bus in blk.downstream]
            + [(bus, f"Q_{bus}") for bus in blk.downstream]
        )
        for bus, label in wanted:
            L[row, w_offset[(bus_group[bus], label)]] = 1.0
            row += 1
    inter = Interconnection.for_subsystems(subs, L)
    logger.info(
        f"Compiled grid '{grid.name}' into {len(subs)} subsystems "
        f"with state dimensions {[s.n for s in subs]}"
    )
    return CompiledNetwork(
        subs=subs,
        L=inter,
        references=refs,
        blocks=blocks,
        attack_buses=ports,
        grid=pu,
        base=base,
        partition=partition,
        bus_group=bus_group,
    )


def build_subsystems(
    grid: RadialGrid, partition: Partition
) -> Tuple[List[Subsystem], Interconnection]:
    """Subsystems and 0/1 interaction matrix of a partitioned grid."""
    net = compile_network(grid, partition)
    return net.subs, net.L


@dataclass
class PassivityReport:
    """Grid stability certificate.

    Attributes:
        x_min_eigenvalue: Smallest eigenvalue of X
        x_symmetric: Whether X is symmetric to 1e-10
        stability: Internal stability per index set
    """

    x_min_eigenvalue: float
    x_symmetric: bool
    stability: AssumptionReport

    @property
    def x_positive_definite(self) -> bool:
        return self.x_min_eigenvalue > 0

    @property
    def passed(self) -> bool:
        return self.x_positive_definite and self.x_symmetric and self.stability.passed

    def to_dict(self) -> dict:
        return {
            "x_min_eigenvalue": self.x_min_eigenvalue,
            "x_symmetric": self.x_symmetric,
            "x_positive_definite": self.x_positive_definite,
            "stability": self.stability.to_dict(),
            "passed": self.passed,
        }


def check_passivity_stability(
    grid: RadialGrid, partition: Partition, family: Optional[DisconnectionFamily] = None
) -> PassivityReport:
    """X positive definite and every disconnected plant Hurwitz."""
    pu, _ = grid.to_per_unit()
    mats = lindistflow_matrices(pu)
    Minv_DG = np.linalg.solve(mats.M, mats.M_DG)
    X_raw = 2.0 * Minv_DG.T @ mats.D_X @ Minv_DG
    symmetric = bool(np.allclose(X_raw, X_raw.T, atol=1e-10))
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (X_raw + X_raw.T)))) if X_raw.size else 0.0
    net = compile_network(grid, partition)
    family = family or DisconnectionFamily.default(len(net.subs))
    report = PassivityReport(
        x_min_eigenvalue=min_eig,
        x_symmetric=symmetric,
        stability=check_assumption1(net.subs, net.L, family),
    )
    logger.info(f"Passivity check: min eig(X) = {min_eig:.4g}, passed={report.passed}")
    return report


def grid_from_dict(data: dict) -> Tuple[RadialGrid, Partition]:
    """Parse the grid file schema.

    Raises:
        ValidationError: On missing or unknown keys and invalid values
    """
    allowed = {"name", "notes", "v0_volts", "root", "buses", "branches", "dg", "loads", "partition"}
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"Unknown grid keys {sorted(unknown)}")
    for key in ("v0_volts", "buses", "branches", "dg", "partition"):
        if key not in data:
            raise ValidationError(f"Grid field '{key}' is required")
    try:
        grid = RadialGrid(
            buses=tuple(data["buses"]),
            branches=tuple(
                Branch(b["from"], b["to"], float(b["r_ohm"]), float(b["x_ohm"]))
                for b in data["branches"]
            ),
            dg=tuple(
                DgUnit(
                    bus=u["bus"],
                    t_s=float(u["t_s"]),
                    k=float(u["k"]),
                    p_g_w=float(u["p_g_w"]),
                    p_c_w=float(u["p_c_w"]),
                    q_c_var=float(u["q_c_var"]),
                )
                for u in data["dg"]
            ),
            v0_volts=float(data["v0_volts"]),
            root=data.get("root"),
            loads=tuple(
                Load(ld["bus"], float(ld["p_w"]), float(ld["q_var"]))
                for ld in data.get("loads", [])
            ),
            name=data.get("name", ""),
            notes=data.get("notes", ""),
        )
        groups = data["partition"]["groups"]
        has_ports = any("attack_buses" in g for g in groups)
        partition = Partition(
            groups=tuple(tuple(g["buses"]) for g in groups),
            attack_buses=(
                tuple(tuple(g.get("attack_buses", [])) for g in groups) if has_ports else None
            ),
            names=tuple(g.get("name", f"sigma{k + 1}") for k, g in enumerate(groups)),
        )
    except KeyError as e:
        raise ValidationError(f"Grid field {e} is required") from e
    except (TypeError, ValueError) as e:
        raise ValidationError(str(e)) from e
    orient(grid)
    return grid, partition


def grid_to_dict(grid: RadialGrid, partition: Partition) -> dict:
    """Inverse of grid_from_dict."""
    groups = []
    for i, g in enumerate(partition.groups, start=1):
        entry = {"name": partition.name(i), "buses": list(g)}
        if partition.attack_buses is not None:
            entry["attack_buses"] = list(partition.attack_buses[i - 1])
        groups.append(entry)
    return {
        "name": grid.name,
        "notes": grid.notes,
        "v0_volts": grid.v0_volts,
        "root": grid.root,
        "buses": list(grid.buses),
        "branches": [
            {"from": b.from_bus, "to": b.to_bus, "r_ohm": b.r_ohm, "x_ohm": b.x_ohm}
            for b in grid.branches
        ],
        "dg": [
            {
                "bus": u.bus,
                "t_s": u.t_s,
                "k": u.k,
                "p_g_w": u.p_g_w,
                "p_c_w": u.p_c_w,
                "q_c_var": u.q_c_var,
            }
            for u in grid.dg
        ],
        "loads": [{"bus": ld.bus, "p_w": ld.p_w, "q_var": ld.q_var} for ld in grid.loads],
        "partition": {"groups": groups},
    }


def apply_overrides(grid: RadialGrid, overrides: Optional[dict]) -> RadialGrid:
    """Replace grid parameters.

    Supported keys: ``v0_volts``; ``t_s`` and ``k`` (applied to every DG unit);
    ``dg`` (bus -> {field: value}); ``branches`` (child bus -> {r_ohm, x_ohm}).

    Raises:
        ValidationError: On unknown keys or buses
    """
    if not overrides:
        return grid
    allowed = {"v0_volts", "t_s", "k", "dg", "branches"}
    unknown = set(overrides) - allowed
    if unknown:
        raise ValidationError(f"Unknown grid override keys {sorted(unknown)}")
    try:
        dg = list(grid.dg)
        if "t_s" in overrides or "k" in overrides:
            common = {k: float(overrides[k]) for k in ("t_s", "k") if k in overrides}
            dg = [replace(u, **common) for u in dg]
        per_bus = overrides.get("dg", {})
        by_bus = {u.bus: u for u in dg}
        for bus, fields in per_bus.items():
            if bus not in by_bus:
                raise ValidationError(f"Grid override 'dg' refers to unknown DG bus '{bus}'")
            bad = set(fields) - {"t_s", "k", "p_g_w", "p_c_w", "q_c_var"}
            if bad:
                raise ValidationError(f"Unknown DG override fields {sorted(bad)}")
            by_bus[bus] = replace(by_bus[bus], **{k: float(v) for k, v in fields.items()})
        dg = [by_bus[u.bus] for u in dg]

        branches = list(grid.branches)
        parents = orient(grid)
        for bus, fields in overrides.get("branches", {}).items():
            ends = {bus, parents.get(bus)}
            hits = [k for k, b in enumerate(branches) if {b.from_bus, b.to_bus} == ends]
            if not hits:
                raise ValidationError(f"Grid override 'branches' refers to unknown bus '{bus}'")
            bad = set(fields) - {"r_ohm", "x_ohm"}
            if bad:
                raise ValidationError(f"Unknown branch override fields {sorted(bad)}")
            branches[hits[0]] = replace(
                branches[hits[0]], **{k: float(v) for k, v in fields.items()}
            )
        result = replace(
            grid,
            dg=tuple(dg),
            branches=tuple(branches),
            v0_volts=float(overrides.get("v0_volts", grid.v0_volts)),
        )
    except (TypeError, AttributeError) as e:
        raise ValidationError(f"Malformed grid overrides: {e}") from e
    except ValueError as e:
        if isinstance(e, ValidationError):
            raise
        raise ValidationError(str(e)) from e
    if result == grid:
        logger.warning("Grid overrides changed nothing")
    return result


def load_grid(path: Path) -> Tuple[RadialGrid, Partition]:
    """Load a grid file.

    Raises:
        FileNotFoundError: If the file does not exist
        ValidationError: On JSON syntax errors or schema violations
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Grid file not found: {path}")
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(
            f"Invalid JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e
    grid, partition = grid_from_dict(data)
    logger.info(f"Loaded grid '{grid.name}' from {path}")
    return grid, partition


def cigre_residential(overrides: Optional[dict] = None) -> Tuple[RadialGrid, Partition]:
    """Bundled CIGRE LV residential feeder (approximate impedances) and its partition."""
    text = resources.files("pyresgen.data").joinpath(CIGRE_RESOURCE).read_text()
    grid, partition = grid_from_dict(json.loads(text))
    return apply_overrides(grid, overrides), partition
