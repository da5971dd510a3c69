"""Unit tests for the LTI algebra module."""

import numpy as np
import pytest

from pyresgen.core.lti import (
    append,
    compose,
    dc_gain,
    discretize_zoh,
    feedback,
    freq_response,
    interconnect_static,
    invariant_zeros,
    is_hurwitz,
    left_invertible,
    mat_exp,
    normal_rank,
    parallel,
    right_invertible,
    series,
    simulate,
    spectral_abscissa,
    static_gain,
)
from pyresgen.models.enums import ComposeKind
from pyresgen.models.statespace import SignalTrace, StateSpace


def first_order(pole: float, gain: float = 1.0) -> StateSpace:
    return StateSpace(A=[[-pole]], B=[[1.0]], C=[[gain]], D=[[0.0]])


class TestMatExp:
    """Tests for mat_exp."""

    def test_diagonal_matrix(self):
        """Exponential of a diagonal matrix is elementwise."""
        M = np.diag([-1.0, 2.0])
        assert np.allclose(mat_exp(M, 0.5), np.diag(np.exp([-0.5, 1.0])))

    def test_nilpotent_matrix(self):
        """exp of a nilpotent Jordan block is I + N t."""
        N = np.array([[0.0, 1.0], [0.0, 0.0]])
        assert np.allclose(mat_exp(N, 3.0), [[1.0, 3.0], [0.0, 1.0]])

    def test_empty_matrix(self):
        """Empty input gives an empty result."""
        assert mat_exp(np.zeros((0, 0))).shape == (0, 0)

    def test_rejects_non_square(self):
        """Non-square input raises."""
        with pytest.raises(ValueError, match="square"):
            mat_exp(np.zeros((2, 3)))

    def test_rejects_non_finite(self):
        """NaN entries raise."""
        with pytest.raises(ValueError, match="finite"):
            mat_exp(np.array([[np.nan]]))

    @pytest.mark.parametrize("t", [0.1, 1.0, 1.5])
    def test_random_matrices_match_taylor_series(self, rng, t):
        """e^{Mt} agrees with a 60-term Taylor sum on random 3x3 matrices."""
        for _ in range(20):
            M = rng.standard_normal((3, 3))
            term = np.eye(3)
            expected = np.eye(3)
            for k in range(1, 61):
                term = term @ (M * t) / k
                expected = expected + term
            err = np.max(np.abs(mat_exp(M, t) - expected))
            assert err < 1e-9 * max(1.0, np.max(np.abs(expected)))


class TestSimulate:
    """Tests for ZOH discretization and simulation."""

    def test_scalar_zoh_matches_closed_form(self):
        """Ad = e^{-h}, Bd = 1 - e^{-h} for x' = -x + u."""
        Ad, Bd = discretize_zoh(first_order(1.0), 0.1)
        assert np.isclose(Ad[0, 0], np.exp(-0.1))
        assert np.isclose(Bd[0, 0], 1.0 - np.exp(-0.1))

    def test_step_response_is_exact(self):
        """Sampled step response equals 1 - e^{-t} at every sample."""
        sys = first_order(1.0)
        u = SignalTrace.constant([1.0], 200, 0.01)
        y, x_end = simulate(sys, u)
        t = u.times
        assert np.allclose(y.samples[:, 0], 1.0 - np.exp(-t), atol=1e-12)
        assert np.isclose(x_end[0], 1.0 - np.exp(-2.0))

    def test_initial_state(self):
        """Free response from x0 decays exponentially."""
        y, _ = simulate(first_order(2.0), SignalTrace.constant([0.0], 50, 0.02), x0=[3.0])
        assert np.allclose(y.samples[:, 0], 3.0 * np.exp(-2.0 * 0.02 * np.arange(50)))

    def test_feedthrough(self):
        """Static systems pass the input through D."""
        y, x = simulate(static_gain([[2.0]]), SignalTrace.constant([1.5], 3, 0.1))
        assert np.allclose(y.samples, 3.0)
        assert x.shape == (0,)

    def test_channel_mismatch(self):
        """Wrong number of input channels raises."""
        with pytest.raises(ValueError, match="channels"):
            simulate(first_order(1.0), SignalTrace.constant([1.0, 2.0], 3, 0.1))

    def test_split_simulation_matches_single_run(self):
        """Simulating in two segments with the handed-over state is seamless."""
        sys = StateSpace(A=[[-1.0, 0.5], [0.0, -2.0]], B=[[1.0], [1.0]], C=[[1.0, 1.0]], D=[[0.0]])
        u = SignalTrace(step=0.01, samples=np.sin(np.arange(100) * 0.1))
        y_full, _ = simulate(sys, u)
        first = SignalTrace(step=0.01, samples=u.samples[:40])
        second = SignalTrace(step=0.01, samples=u.samples[40:])
        y1, x_mid = simulate(sys, first)
        y2, _ = simulate(sys, second, x_mid)
        assert np.allclose(np.vstack([y1.samples, y2.samples]), y_full.samples)


class TestFrequencyDomain:
    """Tests for freq_response, dc_gain and stability helpers."""

    def test_freq_response_first_order(self):
        """G(s) = 1 / (s + 1)."""
        assert np.isclose(freq_response(first_order(1.0), 1j)[0, 0], 1.0 / (1j + 1.0))

    def test_freq_response_at_pole(self):
        """Evaluating at an eigenvalue raises."""
        with pytest.raises(ValueError, match="singular"):
            freq_response(first_order(1.0), -1.0)

    def test_dc_gain(self):
        """DC gain of gain / (s + pole)."""
        assert np.isclose(dc_gain(first_order(4.0, gain=2.0))[0, 0], 0.5)

    @pytest.mark.parametrize("shape", [(1, 1, 1), (3, 2, 2), (2, 4, 3)])
    def test_dc_gain_matches_low_frequency_response(self, rng, shape):
        """G(0) equals G(s) evaluated at s = 1e-12."""
        p, m, n = shape
        for _ in range(10):
            R = rng.standard_normal((n, n))
            A = R - (spectral_abscissa(R) + 0.5) * np.eye(n)
            sys = StateSpace(
                A=A,
                B=rng.standard_normal((n, m)),
                C=rng.standard_normal((p, n)),
                D=rng.standard_normal((p, m)),
            )
            low = freq_response(sys, 1e-12)
            assert np.allclose(dc_gain(sys), low.real, rtol=1e-6, atol=1e-6)
            assert np.max(np.abs(low.imag)) < 1e-6

    def test_dc_gain_requires_hurwitz(self):
        """Unstable systems have no DC gain."""
        with pytest.raises(ValueError, match="Hurwitz"):
            dc_gain(first_order(-1.0))

    def test_spectral_abscissa(self):
        """Largest real part of the spectrum."""
        assert np.isclose(spectral_abscissa(np.diag([-3.0, -0.5])), -0.5)
        assert spectral_abscissa(np.zeros((0, 0))) == -np.inf

    def test_is_hurwitz_with_margin(self):
        """Margin shifts the stability boundary."""
        A = np.diag([-1.0, -0.2])
        assert is_hurwitz(A)
        assert not is_hurwitz(A, margin=0.5)
        with pytest.raises(ValueError):
            is_hurwitz(A, margin=-1.0)


class TestRankAndZeros:
    """Tests for normal rank, invertibility and invariant zeros."""

    def test_normal_rank_of_rank_one_system(self):
        """Two identical outputs give normal rank one."""
        sys = StateSpace(A=[[-1.0]], B=[[1.0, 2.0]], C=[[1.0], [1.0]], D=np.zeros((2, 2)))
        assert normal_rank(sys) == 1
        assert not left_invertible(sys)
        assert not right_invertible(sys)

    @pytest.mark.parametrize("p, m, r", [(3, 2, 2), (3, 3, 2), (2, 3, 1), (4, 4, 3)])
    def test_normal_rank_invariant_under_static_transforms(self, rng, p, m, r):
        """Nonsingular output and input transformations keep the normal rank."""
        n = 4
        for _ in range(5):
            A = -2.0 * np.eye(n) + 0.3 * rng.standard_normal((n, n))
            B = rng.standard_normal((n, r)) @ rng.standard_normal((r, m))
            C = rng.standard_normal((p, n))
            sys = StateSpace(A=A, B=B, C=C, D=np.zeros((p, m)))
            T_out = rng.standard_normal((p, p)) + 3.0 * np.eye(p)
            T_in = rng.standard_normal((m, m)) + 3.0 * np.eye(m)
            moved = StateSpace(A=A, B=B @ T_in, C=T_out @ C, D=np.zeros((p, m)))
            assert normal_rank(sys) == r
            assert normal_rank(moved) == normal_rank(sys)

    def test_random_tall_system_is_left_invertible(self, rng):
        """A generic 4x2 realization has normal rank 2."""
        sys = StateSpace(
            A=-np.eye(3) + 0.1 * rng.standard_normal((3, 3)),
            B=rng.standard_normal((3, 2)),
            C=rng.standard_normal((4, 3)),
            D=np.zeros((4, 2)),
        )
        assert normal_rank(sys) == 2
        assert left_invertible(sys)
        assert not right_invertible(sys)

    def test_normal_rank_needs_trials(self):
        """Fewer than three trial frequencies is rejected."""
        with pytest.raises(ValueError):
            normal_rank(first_order(1.0), trials=2)

    def test_zero_of_siso_system(self):
        """(s + 2) / ((s + 1)(s + 3)) has its zero at -2."""
        sys = StateSpace(
            A=[[-1.0, 0.0], [0.0, -3.0]], B=[[1.0], [1.0]], C=[[0.5, 0.5]], D=[[0.0]]
        )
        zeros = invariant_zeros(sys)
        assert len(zeros) == 1
        assert np.isclose(zeros[0], -2.0)

    def test_zero_of_non_square_system(self):
        """Squaring down keeps only the true invariant zero."""
        # both outputs share the zero at -2: G = [1; 1] (s + 2) / ((s + 1)(s + 3))
        sys = StateSpace(
            A=[[-1.0, 0.0], [0.0, -3.0]],
            B=[[1.0], [1.0]],
            C=[[0.5, 0.5], [0.5, 0.5]],
            D=np.zeros((2, 1)),
        )
        zeros = invariant_zeros(sys)
        assert len(zeros) == 1
        assert np.isclose(zeros[0], -2.0, atol=1e-6)

    def test_zero_of_wide_system(self):
        """The dual of the tall case squares down on the input side."""
        sys = StateSpace(
            A=[[-1.0, 0.0], [0.0, -3.0]],
            B=[[0.5, 0.5], [0.5, 0.5]],
            C=[[1.0, 1.0]],
            D=np.zeros((1, 2)),
        )
        zeros = invariant_zeros(sys)
        assert len(zeros) == 1
        assert np.isclose(zeros[0], -2.0, atol=1e-6)

    def test_rank_deficient_pencil(self):
        """A zero transfer matrix has a singular pencil."""
        sys = StateSpace(A=[[-1.0]], B=[[0.0]], C=[[1.0]], D=[[0.0]])
        with pytest.raises(ValueError, match="singular"):
            invariant_zeros(sys)


class TestComposition:
    """Tests for series, parallel, feedback, append and compose."""

    def test_series_transfer(self):
        """Series connection multiplies transfer functions."""
        g1, g2 = first_order(1.0), first_order(2.0, gain=3.0)
        s = 0.7j
        expected = freq_response(g2, s) @ freq_response(g1, s)
        assert np.allclose(freq_response(series(g1, g2), s), expected)
        assert series(g1, g2).nstates == 2

    def test_series_dimension_mismatch(self):
        """Series connection checks port sizes."""
        with pytest.raises(ValueError, match="Series"):
            series(first_order(1.0), static_gain(np.eye(2)))

    def test_parallel_transfer(self):
        """Parallel connection adds transfer functions."""
        g1, g2 = first_order(1.0), first_order(5.0)
        s = 1.3j
        expected = freq_response(g1, s) + freq_response(g2, s)
        assert np.allclose(freq_response(parallel(g1, g2), s), expected)

    def test_negative_feedback(self):
        """Unit feedback of 1/(s+1) gives 1/(s+2)."""
        closed = feedback(first_order(1.0), static_gain([[1.0]]))
        assert np.allclose(freq_response(closed, 0.5j), 1.0 / (0.5j + 2.0))

    def test_ill_posed_feedback(self):
        """I - D2 D1 singular raises."""
        with pytest.raises(ValueError, match="Ill-posed"):
            feedback(static_gain([[1.0]]), static_gain([[1.0]]), sign=1.0)

    def test_append_labels(self):
        """Labels are concatenated when every part has them."""
        a = static_gain([[1.0]]).with_labels(["u1"], ["y1"])
        b = static_gain([[2.0]]).with_labels(["u2"], ["y2"])
        stacked = append([a, b])
        assert stacked.input_labels == ("u1", "u2")
        assert np.allclose(stacked.D, np.diag([1.0, 2.0]))

    def test_compose_dispatch(self):
        """compose matches the individual operations."""
        g1, g2 = first_order(1.0), first_order(2.0)
        s = 0.3j
        assert np.allclose(
            freq_response(compose(ComposeKind.SERIES, [g1, g2]), s),
            freq_response(series(g1, g2), s),
        )
        assert compose(ComposeKind.BLOCK_DIAG, [g1, g2]).ninputs == 2
        assert compose("parallel", [g1, g2]).nstates == 2
        with pytest.raises(ValueError):
            compose(ComposeKind.FEEDBACK, [g1])
        with pytest.raises(ValueError):
            compose(ComposeKind.SERIES, [])


class TestInterconnectStatic:
    """Tests for interconnect_static."""

    def test_closes_loop(self):
        """Feeding y back into the second input with gain -1 shifts the pole."""
        sys = StateSpace(A=[[-1.0]], B=[[1.0, 1.0]], C=[[1.0]], D=[[0.0, 0.0]])
        closed = interconnect_static(sys, [[-1.0]], loop_inputs=[1], loop_outputs=[0])
        assert np.allclose(closed.A, [[-2.0]])
        assert closed.ninputs == 1

    def test_appends_loop_signal(self):
        """The loop signal can be exposed as extra outputs."""
        sys = StateSpace(A=[[-1.0]], B=[[1.0, 1.0]], C=[[1.0]], D=[[0.0, 0.0]])
        closed = interconnect_static(
            sys, [[2.0]], loop_inputs=[1], loop_outputs=[0], append_loop_signal=True
        )
        assert closed.noutputs == 2
        assert np.allclose(closed.C[1], [2.0])

    def test_ill_posed_loop(self):
        """A singular algebraic loop raises."""
        sys = static_gain([[0.0, 1.0]])
        with pytest.raises(ValueError, match="Ill-posed"):
            interconnect_static(sys, [[1.0]], loop_inputs=[1], loop_outputs=[0])
