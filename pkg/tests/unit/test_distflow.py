"""Unit tests for the LinDistFlow grid model."""

import json
from dataclasses import replace

import numpy as np
import pytest

from pyresgen.core.distflow import (
    apply_overrides,
    check_passivity_stability,
    compile_network,
    grid_from_dict,
    grid_to_dict,
    lindistflow_matrices,
    load_grid,
    orient,
    solve_power_flow,
    subnetwork_matrices,
    x_matrix,
)
from pyresgen.core.lti import is_hurwitz
from pyresgen.core.netsys import assemble, input_channels, output_channels
from pyresgen.exceptions import ValidationError
from pyresgen.models.grid import Branch, DgUnit, Load, Partition, RadialGrid


def network_outputs(net, q_by_bus):
    """Interaction outputs of the assembled plant for given DG reactive powers."""
    sys = assemble(net.subs, net.L)
    x = np.concatenate([[q_by_bus[label[2:]] for label in s.state_labels] for s in net.subs])
    refs = np.concatenate([net.references[i] for i in net.ids])
    u = np.concatenate([refs, np.zeros(len(input_channels(net.subs, net.ids, "a")))])
    out = sys.C @ x + sys.D @ u
    rows = output_channels(net.subs, net.ids, "w")
    return {sys.output_labels[k].split(":", 1)[1]: out[k] for k in rows}


class TestTopology:
    """Tests for orientation and incidence matrices."""

    def test_orient_random_tree(self, random_grid):
        """Every non-root bus gets exactly one parent."""
        grid, _ = random_grid(8, seed=3)
        parent = orient(grid)
        assert set(parent) == set(grid.non_root_buses)

    def test_cycle_rejected(self, random_grid):
        """A meshed grid is not radial."""
        grid, _ = random_grid(5, seed=1)
        edges = {frozenset((b.from_bus, b.to_bus)) for b in grid.branches}
        a, b = next(
            (a, b) for a in grid.buses for b in grid.buses
            if a != b and frozenset((a, b)) not in edges
        )
        meshed = replace(grid, branches=grid.branches + (Branch(a, b, 0.1, 0.1),))
        with pytest.raises(ValidationError, match="spanning tree"):
            orient(meshed)

    def test_incidence_is_invertible(self, cigre):
        """M has -1 on the diagonal and one +1 per non-root-fed branch."""
        grid, _ = cigre
        mats = lindistflow_matrices(grid)
        assert np.allclose(np.diag(mats.M), -1.0)
        assert mats.m.sum() == 1.0
        assert abs(np.linalg.det(mats.M)) == pytest.approx(1.0)


class TestPowerFlow:
    """Tests for the monolithic LinDistFlow solution."""

    def test_balanced_grid_is_flat(self, random_grid):
        """No net injection gives flat voltages and zero flows."""
        grid, _ = random_grid(6, seed=2)
        flat = replace(
            grid, dg=tuple(replace(u, p_c_w=u.p_g_w, q_c_var=0.0) for u in grid.dg)
        )
        pf = solve_power_flow(flat)
        assert np.allclose(pf.P, 0.0)
        assert np.allclose(pf.v_sq, grid.v0_volts**2)

    def test_x_matrix_matches_finite_differences(self, random_grid):
        """dv^2 / dq at the DG buses equals X."""
        grid, _ = random_grid(9, seed=5)
        pu, _ = grid.to_per_unit()
        X = x_matrix(pu)
        mats = lindistflow_matrices(pu)
        rows = [mats.buses.index(b) for b in mats.dg_buses]
        q0 = np.zeros(len(mats.dg_buses))
        base = solve_power_flow(pu, q0).v_sq[rows]
        for j in range(len(q0)):
            dq = q0.copy()
            dq[j] = 1e-3
            diff = (solve_power_flow(pu, dq).v_sq[rows] - base) / 1e-3
            assert np.allclose(diff, X[:, j], rtol=1e-6, atol=1e-12)

    @pytest.mark.parametrize("seed", range(20))
    def test_x_symmetric_positive_definite(self, random_grid, seed):
        """X is symmetric positive definite on random radial grids."""
        grid, _ = random_grid(7, seed=seed)
        X = x_matrix(grid)
        assert np.allclose(X, X.T)
        assert np.min(np.linalg.eigvalsh(X)) > 0

    def test_voltage_lookup(self, cigre):
        """voltage() returns the magnitude at a bus."""
        grid, _ = cigre
        pf = solve_power_flow(grid)
        assert pf.voltage("R18") == pytest.approx(np.sqrt(pf.v_sq[pf.buses.index("R18")]))


class TestSubnetworkMatrices:
    """Tests for the per-group blocks of the LinDistFlow equations."""

    @pytest.fixture
    def six_bus(self):
        """Feeder 0-1-2-3-4-5 with a lateral 2-6 and an inverter at bus 3."""
        buses = ("0", "1", "2", "3", "4", "5", "6")
        edges = [("0", "1"), ("1", "2"), ("2", "3"), ("3", "4"), ("4", "5"), ("2", "6")]
        return RadialGrid(
            buses=buses,
            branches=tuple(Branch(a, b, 0.05, 0.03) for a, b in edges),
            dg=(DgUnit("3", t_s=1.0, k=1.0, p_g_w=1000.0, p_c_w=500.0, q_c_var=100.0),),
            v0_volts=400.0,
        )

    def test_group_sets(self, six_bus):
        """Upstream and downstream buses of the middle group."""
        sub = subnetwork_matrices(six_bus, ["2", "3", "4"])
        assert sub.buses == ["2", "3", "4"]
        assert sub.upstream == ["1"]
        assert sub.downstream == ["5", "6"]
        assert sub.dg_buses == ["3"]

    def test_incidence_patterns(self, six_bus):
        """Signs and sparsity of the flow and voltage-drop blocks."""
        sub = subnetwork_matrices(six_bus, ["2", "3", "4"])
        assert np.array_equal(-sub.M_N, [[1, -1, 0], [0, 1, -1], [0, 0, 1]])
        assert np.array_equal(-sub.M_ND, [[0, -1], [0, 0], [-1, 0]])
        assert np.array_equal(sub.M_UN, [[1, 0, 0]])
        assert np.array_equal(sub.M_DG, [[0], [1], [0]])
        assert np.array_equal(sub.m_N, [0, 0, 0])

    def test_group_at_root(self, six_bus):
        """A group fed by the root has no upstream bus and a root incidence entry."""
        sub = subnetwork_matrices(six_bus, ["1"])
        assert sub.upstream == []
        assert sub.downstream == ["2"]
        assert np.array_equal(sub.m_N, [1])

    def test_root_rejected(self, six_bus):
        """The root may not be part of a group."""
        with pytest.raises(ValidationError, match="root"):
            subnetwork_matrices(six_bus, ["0", "1"])


class TestCompileNetwork:
    """Tests for the partitioned networked-system form."""

    def test_cigre_structure(self, cigre_network):
        """Two subsystems: R17/R18 in the first, R11/R15/R16 in the second."""
        net = cigre_network
        assert [s.n for s in net.subs] == [2, 3]
        assert net.subs[0].state_labels == ("q_R17", "q_R18")
        assert net.blocks[1].upstream == ["R8"]
        assert net.blocks[2].downstream == ["R9"]
        assert net.subs[0].dim_v == 1 and net.subs[1].dim_v == 2
        assert net.attack_buses == {1: ["R18"], 2: ["R15"]}

    def test_cigre_dynamics(self, cigre_network):
        """Weak electrical coupling: A is close to -I / T with T = 2 s."""
        net = cigre_network
        for sub in net.subs:
            assert np.allclose(sub.A, -0.5 * np.eye(sub.n), atol=0.05)
        assert is_hurwitz(assemble(net.subs, net.L).A)
        assert net.base.s_va == 5500.0

    def test_attack_ports(self, cigre_network):
        """Attack ports are addressed by bus."""
        net = cigre_network
        assert net.attack_port("R18") == (1, 0)
        assert net.attack_port("R15") == (2, 0)
        with pytest.raises(ValueError, match="attack port"):
            net.attack_port("R17")
        with pytest.raises(ValueError, match="not in any group"):
            net.group_of_bus("R1")

    def test_partitioned_outputs_match_power_flow(self, random_grid):
        """The interconnected subsystems reproduce the monolithic solution."""
        grid, _ = random_grid(10, seed=7)
        grid = replace(grid, loads=(Load("B4", 800.0, 200.0),))
        buses = grid.non_root_buses
        partition = Partition(groups=(tuple(buses[:5]), tuple(buses[5:])))
        net = compile_network(grid, partition)
        rng = np.random.default_rng(11)
        q = {b: float(rng.uniform(-0.2, 0.2)) for b in net.grid.dg_buses}
        outputs = network_outputs(net, q)
        pf = solve_power_flow(net.grid, [q[b] for b in net.grid.dg_buses])
        for k, bus in enumerate(pf.buses):
            assert outputs[f"v_sq_{bus}"] == pytest.approx(pf.v_sq[k], abs=1e-10)
            assert outputs[f"P_{bus}"] == pytest.approx(pf.P[k], abs=1e-10)
            assert outputs[f"Q_{bus}"] == pytest.approx(pf.Q[k], abs=1e-10)

    def test_cigre_outputs_match_power_flow(self, cigre_network):
        """Same consistency on the bundled feeder."""
        net = cigre_network
        q = {b: 0.01 * k for k, b in enumerate(net.grid.dg_buses)}
        outputs = network_outputs(net, q)
        pf = solve_power_flow(net.grid, [q[b] for b in net.grid.dg_buses])
        for k, bus in enumerate(pf.buses):
            assert outputs[f"v_sq_{bus}"] == pytest.approx(pf.v_sq[k], abs=1e-10)

    def test_partition_must_cover_grid(self, cigre):
        """Uncovered buses are rejected."""
        grid, _ = cigre
        with pytest.raises(ValidationError, match="does not cover"):
            compile_network(grid, Partition(groups=(("R17", "R18"),)))

    def test_group_needs_generation(self, cigre):
        """Each group must contain a DG bus."""
        grid, _ = cigre
        others = tuple(b for b in grid.non_root_buses if b not in ("R9", "R10"))
        with pytest.raises(ValidationError, match="no DG bus"):
            compile_network(grid, Partition(groups=(("R9", "R10"), others)))

    def test_attack_bus_must_be_dg(self, cigre):
        """Attack ports must sit on DG buses."""
        grid, partition = cigre
        bad = Partition(groups=partition.groups, attack_buses=(("R10",), ("R15",)))
        with pytest.raises(ValidationError, match="non-DG"):
            compile_network(grid, bad)

    def test_root_not_allowed_in_group(self, cigre):
        """The substation bus belongs to no group."""
        grid, _ = cigre
        with pytest.raises(ValidationError, match="root"):
            subnetwork_matrices(grid, ["R1", "R2"])

    def test_passivity_certificate(self, cigre):
        """X is positive definite and every disconnected plant is stable."""
        grid, partition = cigre
        report = check_passivity_stability(grid, partition)
        assert report.passed
        assert report.to_dict()["x_positive_definite"] is True
        assert len(report.stability.entries) == 3


class TestGridFiles:
    """Tests for the grid file schema and overrides."""

    def test_dict_round_trip(self, cigre):
        """grid_to_dict / grid_from_dict reproduce the grid."""
        grid, partition = cigre
        grid2, partition2 = grid_from_dict(grid_to_dict(grid, partition))
        assert grid2 == grid
        assert partition2 == partition

    def test_unknown_and_missing_keys(self, cigre):
        """Schema violations raise ValidationError."""
        data = grid_to_dict(*cigre)
        with pytest.raises(ValidationError, match="Unknown grid keys"):
            grid_from_dict({**data, "frequency": 50})
        del data["dg"]
        with pytest.raises(ValidationError, match="'dg'"):
            grid_from_dict(data)

    def test_invalid_values(self, cigre):
        """Dataclass validation errors surface as ValidationError."""
        data = grid_to_dict(*cigre)
        data["branches"][0]["r_ohm"] = -1.0
        with pytest.raises(ValidationError, match="r_ohm"):
            grid_from_dict(data)

    def test_load_grid_errors(self, tmp_path):
        """Missing files and broken JSON are reported."""
        with pytest.raises(FileNotFoundError):
            load_grid(tmp_path / "missing.json")
        path = tmp_path / "broken.json"
        path.write_text('{"buses": [')
        with pytest.raises(ValidationError, match="line"):
            load_grid(path)

    def test_load_grid_file(self, cigre, tmp_path):
        """A written grid file loads back."""
        path = tmp_path / "grid.json"
        path.write_text(json.dumps(grid_to_dict(*cigre)))
        grid, _ = load_grid(path)
        assert grid.name == "cigre_lv_residential"

    def test_overrides(self, cigre):
        """Common, per-DG and per-branch overrides."""
        grid, _ = cigre
        changed = apply_overrides(
            grid,
            {"t_s": 1.0, "dg": {"R18": {"k": 4.0}}, "branches": {"R18": {"x_ohm": 0.01}}},
        )
        dg = changed.dg_at()
        assert all(u.t_s == 1.0 for u in changed.dg)
        assert dg["R18"].k == 4.0 and dg["R17"].k == 2.0
        branch = next(b for b in changed.branches if b.to_bus == "R18")
        assert branch.x_ohm == 0.01
        assert apply_overrides(grid, None) is grid

    def test_override_errors(self, cigre):
        """Unknown keys and buses are rejected."""
        grid, _ = cigre
        with pytest.raises(ValidationError, match="override keys"):
            apply_overrides(grid, {"tau": 1.0})
        with pytest.raises(ValidationError, match="unknown DG bus"):
            apply_overrides(grid, {"dg": {"R10": {"k": 1.0}}})
        with pytest.raises(ValidationError, match="DG override fields"):
            apply_overrides(grid, {"dg": {"R18": {"gain": 1.0}}})
        with pytest.raises(ValidationError, match="unknown bus"):
            apply_overrides(grid, {"branches": {"R99": {"x_ohm": 1.0}}})
        with pytest.raises(ValidationError):
            apply_overrides(grid, {"t_s": -1.0})

    def test_dg_units_keep_order(self, cigre):
        """DG buses are listed in bus order."""
        grid, _ = cigre
        assert grid.dg_buses == ["R11", "R15", "R16", "R17", "R18"]
        assert isinstance(grid.dg[0], DgUnit)
