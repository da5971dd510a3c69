"""Unit tests for the distributed residual generators."""

import numpy as np
import pytest
from scipy.linalg import block_diag

from pyresgen.core.lti import dc_gain, freq_response, is_hurwitz, simulate
from pyresgen.core.netsys import assemble, check_assumption1, input_channels, output_channels
from pyresgen.core.resgen import (
    analyze_attack_to_residual,
    assemble_bank,
    attack_to_residual,
    bank_state_layout,
    build_bank,
    build_local,
    build_retrofit,
    check_bank_stability,
    local_realization,
    luenberger_counterexample,
    realize_Mi,
    residual_slices,
    separate,
)
from pyresgen.core.riccati import design_observer_gain
from pyresgen.core.scenario import design_gains
from pyresgen.exceptions import DesignError
from pyresgen.models.enums import GeneratorKind
from pyresgen.models.network import DisconnectionFamily, Interconnection, Subsystem
from pyresgen.models.scenario import ScenarioConfig
from pyresgen.models.statespace import SignalTrace


def toy_gains(subs):
    return {k + 1: design_observer_gain(s.A, s.C) for k, s in enumerate(subs)}


def toy_bank(toy_network, kind):
    subs, L = toy_network
    return build_bank(subs, L, kind, gains=toy_gains(subs))


class TestLocalGenerators:
    """Tests for the local generator builders."""

    def test_state_sizes(self, toy_network):
        """The retrofit generator carries the auxiliary state."""
        subs, _ = toy_network
        H = np.array([[1.0]])
        assert local_realization(build_local("naive", subs[0])).nstates == 1
        assert local_realization(build_local("luenberger", subs[0], H)).nstates == 1
        assert local_realization(build_local("retrofit", subs[0], H)).nstates == 2

    def test_local_ports(self, toy_network):
        """Inputs (y, r, v_hat), outputs (eps, w_hat)."""
        subs, _ = toy_network
        loc = local_realization(build_local("retrofit", subs[0], [[1.0]]))
        assert (loc.ninputs, loc.noutputs) == (3, 2)

    def test_retrofit_requires_stable_error_dynamics(self, toy_network):
        """A - HC must be Hurwitz for the retrofit design."""
        subs, _ = toy_network
        with pytest.raises(DesignError, match="Hurwitz"):
            build_retrofit(subs[0], [[-5.0]])

    def test_gain_shape_checked(self, toy_network):
        """Gains of the wrong size are rejected."""
        subs, _ = toy_network
        with pytest.raises(ValueError, match="'H'"):
            build_local("luenberger", subs[0], np.ones((2, 2)))

    def test_mi_realization(self, toy_network):
        """M(s) = (s + 1) / (s + 3) for A = -1, H = 2, C = 1."""
        subs, _ = toy_network
        M = realize_Mi(subs[0], [[2.0]])
        assert np.isclose(dc_gain(M)[0, 0], 1.0 / 3.0)
        assert np.isclose(freq_response(M, 1j)[0, 0], (1j + 1.0) / (1j + 3.0))


class TestBank:
    """Tests for bank assembly and reconfiguration."""

    @pytest.mark.parametrize("kind", list(GeneratorKind))
    def test_residual_ignores_reference(self, toy_network, kind):
        """Without attacks the residual does not respond to the reference."""
        subs, L = toy_network
        ids = [1, 2]
        plant = assemble(subs, L)
        G_yr = plant.select(
            outputs=output_channels(subs, ids, "y"), inputs=input_channels(subs, ids, "r")
        )
        bank_sys = assemble_bank(toy_bank(toy_network, kind))
        ny = G_yr.noutputs
        for s in (0.0, 0.4j, 2.0 + 1.0j):
            R = freq_response(bank_sys, s)
            total = R[:, :ny] @ freq_response(G_yr, s) + R[:, ny:]
            assert np.allclose(total, 0.0, atol=1e-10)

    def test_retrofit_communicates_naive_estimate(self, toy_network):
        """The rectified w_hat does not depend on the error feedback."""
        naive = assemble_bank(toy_bank(toy_network, "naive"), include_interaction=True)
        retro = assemble_bank(toy_bank(toy_network, "retrofit"), include_interaction=True)
        w_rows = [2, 3]
        for s in (0.0, 1.0j, 0.5 + 3.0j):
            assert np.allclose(
                freq_response(retro, s)[w_rows], freq_response(naive, s)[w_rows], atol=1e-10
            )

    def test_naive_residual_is_plant_response(self, toy_network):
        """For the naive bank the attack-to-residual map equals a -> y."""
        subs, L = toy_network
        ids = [1, 2]
        T_ya = assemble(subs, L).select(
            outputs=output_channels(subs, ids, "y"), inputs=input_channels(subs, ids, "a")
        )
        bank = toy_bank(toy_network, "naive")
        assert np.allclose(dc_gain(attack_to_residual(subs, L, bank)), dc_gain(T_ya))

    def test_layouts(self, toy_network):
        """State and residual ranges follow ascending ids."""
        bank = toy_bank(toy_network, "retrofit")
        assert bank_state_layout(bank) == {1: slice(0, 2), 2: slice(2, 4)}
        assert residual_slices(bank) == {1: slice(0, 1), 2: slice(1, 2)}
        assert bank_state_layout(bank, [2]) == {2: slice(0, 2)}

    def test_missing_gain(self, toy_network):
        """Observer-based banks need a gain per subsystem."""
        subs, L = toy_network
        with pytest.raises(ValueError, match="Missing gain"):
            build_bank(subs, L, "retrofit", gains={1: np.array([[1.0]])})

    def test_separate(self, toy_network):
        """Separation deactivates generators and their links."""
        bank = toy_bank(toy_network, "retrofit")
        after = separate(bank, [1])
        assert after.active == frozenset({2})
        assert after.L_hat.ids == (2,)
        assert assemble_bank(after).nstates == 2
        assert separate(bank, []) is bank
        with pytest.raises(ValueError, match="every generator"):
            separate(bank, [1, 2])
        with pytest.raises(ValueError, match="inactive"):
            separate(after, [1])
        with pytest.raises(ValueError, match="not active"):
            assemble_bank(after, [1, 2])

    def test_empty_index_set(self, toy_network):
        """assemble_bank rejects an empty set."""
        with pytest.raises(ValueError, match="empty"):
            assemble_bank(toy_bank(toy_network, "naive"), [])


class TestStabilityUnderDisconnection:
    """Tests for check_bank_stability and the Luenberger counterexample."""

    def test_counterexample_plant_is_stable(self):
        """The plant itself is stable on every set."""
        subs, L, _ = luenberger_counterexample()
        for ids in ([1, 2], [1], [2]):
            assert is_hurwitz(assemble(subs, L, ids).A)

    def test_luenberger_bank_loses_stability(self):
        """Disconnecting subsystem 2 destabilizes the Luenberger bank on {1}."""
        subs, L, gains = luenberger_counterexample()
        bank = build_bank(subs, L, GeneratorKind.LUENBERGER, gains=gains)
        report = check_bank_stability(bank, DisconnectionFamily.default(2))
        assert [e.index_set for e in report.failures] == [[1]]

    def test_retrofit_bank_stays_stable(self):
        """The retrofit bank is stable on every remaining set."""
        subs, L, gains = luenberger_counterexample()
        bank = build_bank(subs, L, GeneratorKind.RETROFIT, gains=gains)
        report = check_bank_stability(bank, DisconnectionFamily.default(2))
        assert report.passed
        assert all(e.value < 0 for e in report.entries)

    def test_naive_bank_inherits_plant_stability(self, toy_network):
        """The naive bank has the plant dynamics."""
        bank = toy_bank(toy_network, "naive")
        assert check_bank_stability(bank, DisconnectionFamily.default(2)).passed


class TestAttackResponse:
    """Tests for analyze_attack_to_residual."""

    def test_retrofit_response(self, toy_network):
        """Stable and left invertible on the toy network."""
        subs, L = toy_network
        resp = analyze_attack_to_residual(subs, L, toy_bank(toy_network, "retrofit"))
        assert resp.stable
        assert resp.left_invertible
        assert resp.zeros_stable
        assert resp.to_dict()["index_set"] == [1, 2]

    def test_cigre_retrofit_is_minimum_phase(self, cigre_network):
        """The a -> eps map of the CIGRE retrofit bank has only left half-plane zeros."""
        net = cigre_network
        gains = design_gains(net, ScenarioConfig())
        bank = build_bank(net.subs, net.L, "retrofit", gains=gains)
        resp = analyze_attack_to_residual(net.subs, net.L, bank)
        assert resp.stable
        assert resp.left_invertible
        assert resp.zeros
        assert all(z.real < 0 for z in resp.zeros)
        assert resp.zeros_stable

    def test_single_remaining_subsystem(self, toy_network):
        """The analysis runs on a reconfigured set."""
        subs, L = toy_network
        bank = separate(toy_bank(toy_network, "retrofit"), [2])
        resp = analyze_attack_to_residual(subs, L, bank, [1])
        assert resp.system.ninputs == 1
        assert resp.stable


def random_network(rng):
    """Three two-state subsystems satisfying internal stability on every index set."""
    family = DisconnectionFamily.default(3)
    while True:
        subs = []
        for k in range(3):
            A = -np.diag(rng.uniform(0.5, 2.0, 2)) + 0.3 * rng.standard_normal((2, 2))
            subs.append(
                Subsystem.from_blocks(
                    name=f"rand{k + 1}",
                    A=A,
                    B=rng.standard_normal((2, 1)),
                    U=rng.standard_normal((2, 1)),
                    X=rng.standard_normal((2, 1)),
                    C=rng.standard_normal((1, 2)),
                    E=rng.standard_normal((1, 2)),
                )
            )
        coupling = 0.5 * rng.standard_normal((3, 3))
        np.fill_diagonal(coupling, 0.0)
        L = Interconnection.for_subsystems(subs, coupling)
        if check_assumption1(subs, L, family).passed:
            gains = {
                k + 1: design_observer_gain(s.A, s.C, q=rng.uniform(0.1, 10.0))
                for k, s in enumerate(subs)
            }
            return subs, L, gains, family


class TestRandomNetworks:
    """Properties of the retrofit bank on randomly drawn networks."""

    def test_retrofit_stable_under_every_disconnection(self):
        """Stability of the plant carries over to the bank on every set."""
        rng = np.random.default_rng(2024)
        for _ in range(20):
            subs, L, gains, family = random_network(rng)
            bank = build_bank(subs, L, GeneratorKind.RETROFIT, gains=gains)
            report = check_bank_stability(bank, family)
            assert report.passed, [e.index_set for e in report.failures]

    def test_interaction_estimate_matches_naive(self):
        """Retrofit and naive banks communicate the same w_hat trace."""
        rng = np.random.default_rng(7)
        subs, L, gains, _ = random_network(rng)
        naive = assemble_bank(build_bank(subs, L, "naive"), include_interaction=True)
        retro = assemble_bank(
            build_bank(subs, L, "retrofit", gains=gains), include_interaction=True
        )
        w_rows = list(range(3, 6))
        for _ in range(10):
            u = SignalTrace(step=0.01, samples=rng.standard_normal((400, naive.ninputs)))
            w_naive = simulate(naive, u)[0].samples[:, w_rows]
            w_retro = simulate(retro, u)[0].samples[:, w_rows]
            assert np.max(np.abs(w_retro - w_naive)) < 1e-8

    def test_residual_map_is_block_diagonal(self):
        """y -> eps of the retrofit bank equals block_diag(M_i) on every set."""
        rng = np.random.default_rng(11)
        subs, L, gains, family = random_network(rng)
        bank = build_bank(subs, L, "retrofit", gains=gains)
        freqs = 1j * 10.0 ** rng.uniform(-2, 2, 20)
        for index_set in family.sets:
            ids = sorted(index_set)
            sys = assemble_bank(bank, ids)
            ny = sum(subs[i - 1].dim_y for i in ids)
            for s in freqs:
                R = freq_response(sys, s)[:, :ny]
                M = block_diag(*[freq_response(realize_Mi(subs[i - 1], gains[i]), s) for i in ids])
                assert np.linalg.norm(R - M) <= 1e-8 * np.linalg.norm(M)
