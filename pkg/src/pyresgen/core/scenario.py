"""Scenario engine: design pipeline, attack/detection/disconnection timeline, gain sweep."""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from pyresgen.core.detector import DetectorConfig, calibrate_threshold, first_alarm_index
from pyresgen.core.distflow import CompiledNetwork, apply_overrides, cigre_residential
from pyresgen.core.distflow import compile_network, load_grid
from pyresgen.core.isolation import (
    bessel_bank,
    build_isolation_filter,
    cascade_filters,
    design_bessel2,
)
from pyresgen.core.lti import is_hurwitz, simulate
from pyresgen.core.netsys import (
    AssumptionReport,
    assemble,
    check_assumption1,
    check_assumption2,
    input_channels,
    output_channels,
    port_slices,
)
from pyresgen.core.resgen import (
    assemble_bank,
    attack_to_residual,
    bank_state_layout,
    build_bank,
    check_bank_stability,
    residual_slices,
    separate,
)
from pyresgen.core.riccati import design_observer_gain
from pyresgen.exceptions import DesignError, ValidationError
from pyresgen.models.enums import EventKind, FilterKind, GeneratorKind
from pyresgen.models.generator import GeneratorBank
from pyresgen.models.network import DisconnectionFamily
from pyresgen.models.scenario import ScenarioConfig, SimEvent, SimResult
from pyresgen.models.statespace import SignalTrace, StateSpace

logger = logging.getLogger(__name__)

SWEEP_RUNS: Tuple[Tuple[str, GeneratorKind, float], ...] = (
    ("naive", GeneratorKind.NAIVE, 1.0),
    ("retrofit_q1", GeneratorKind.RETROFIT, 1.0),
    ("retrofit_q10", GeneratorKind.RETROFIT, 10.0),
)


@dataclass
class ScenarioDesign:
    """Everything designed from a configuration before simulation.

    Attributes:
        config: Source configuration
        network: Compiled per-unit networked system
        family: Disconnection family
        gains: Observer gain per subsystem id
        filters: Residual post-filter per subsystem id (None: identity)
        bank: Residual generator bank
        detector: Calibrated thresholds
        reports: Assumption and stability reports by name
    """

    config: ScenarioConfig
    network: CompiledNetwork
    family: DisconnectionFamily
    gains: Dict[int, np.ndarray]
    filters: Dict[int, Optional[StateSpace]]
    bank: GeneratorBank
    detector: DetectorConfig
    reports: Dict[str, AssumptionReport] = field(default_factory=dict)


def load_network(cfg: ScenarioConfig) -> CompiledNetwork:
    """Grid from the configuration (bundled CIGRE feeder by default), compiled."""
    if cfg.grid_path:
        grid, partition = load_grid(Path(cfg.grid_path))
        grid = apply_overrides(grid, cfg.grid_overrides)
    else:
        grid, partition = cigre_residential(cfg.grid_overrides)
    return compile_network(grid, partition)


def build_family(cfg: ScenarioConfig, n: int) -> DisconnectionFamily:
    """Disconnection family from the configuration.

    Raises:
        ValidationError: If the family or alarm map is inconsistent with n subsystems
    """
    try:
        if cfg.family is None and cfg.alarm_map is None:
            return DisconnectionFamily.default(n)
        base = DisconnectionFamily.default(n)
        sets = base.sets if cfg.family is None else tuple(frozenset(s) for s in cfg.family)
        alarm_map = (
            base.alarm_map
            if cfg.alarm_map is None
            else {k: frozenset(v) for k, v in cfg.alarm_map.items()}
        )
        family = DisconnectionFamily(sets=sets, alarm_map=alarm_map)
    except ValueError as e:
        raise ValidationError(str(e)) from e
    outside = family.universe - set(range(1, n + 1))
    if outside:
        raise ValidationError(f"Field 'family' refers to unknown subsystems {sorted(outside)}")
    return family


def design_gains(network: CompiledNetwork, cfg: ScenarioConfig) -> Dict[int, np.ndarray]:
    """Observer gain per subsystem (zero for the naive architecture)."""
    gains = {}
    for i, sub in enumerate(network.subs, start=1):
        if cfg.generator_kind == GeneratorKind.NAIVE:
            gains[i] = np.zeros((sub.n, sub.dim_y))
        else:
            gains[i] = design_observer_gain(sub.A, sub.C, cfg.gain_q, cfg.gain_r)
    logger.info(f"Designed {cfg.generator_kind.value} gains with q={cfg.gain_q}, r={cfg.gain_r}")
    return gains


def design_filters(
    network: CompiledNetwork, cfg: ScenarioConfig, gains: Dict[int, np.ndarray]
) -> Dict[int, Optional[StateSpace]]:
    """Residual post-filter per subsystem according to cfg.filters."""
    filters: Dict[int, Optional[StateSpace]] = {}
    for i, sub in enumerate(network.subs, start=1):
        if cfg.filters == FilterKind.NONE:
            filters[i] = None
        elif cfg.filters == FilterKind.BESSEL:
            filters[i] = bessel_bank(cfg.bessel_cutoff_hz, sub.dim_y)
        else:
            S = build_isolation_filter(sub, gains[i])
            if cfg.filters.uses_bessel:
                S = cascade_filters(S, design_bessel2(cfg.bessel_cutoff_hz))
            filters[i] = S
    if cfg.filters != FilterKind.NONE:
        logger.info(f"Built '{cfg.filters.value}' filters for {len(filters)} subsystems")
    return filters


def calibrate_detectors(
    network: CompiledNetwork, bank: GeneratorBank, a_bar: float
) -> DetectorConfig:
    """Threshold of each detector from its own attack ports on the full network.

    Raises:
        ValidationError: If a subsystem has no attack port
    """
    ids = network.ids
    a_to_eps = attack_to_residual(network.subs, network.L, bank, ids)
    a_slices = port_slices(network.subs, ids, "a")
    e_slices = residual_slices(bank, ids)
    gamma, alpha = {}, {}
    for i in ids:
        ports = range(a_slices[i].start, a_slices[i].stop)
        if not len(ports):
            raise ValidationError(f"Subsystem {i} has no attack port to calibrate its threshold")
        rows = list(range(e_slices[i].start, e_slices[i].stop))
        gamma[i] = max(calibrate_threshold(a_to_eps, p, a_bar, outputs=rows) for p in ports)
        alpha[i] = gamma[i] / a_bar
        if not gamma[i] > 0:
            raise ValidationError(f"Attack port of subsystem {i} does not reach its residual")
    logger.info(f"Calibrated thresholds {', '.join(f'{i}: {g:.4g}' for i, g in gamma.items())}")
    return DetectorConfig(gamma=gamma, a_bar=a_bar, alpha=alpha)


def check_design(network: CompiledNetwork, family: DisconnectionFamily) -> Dict[str, AssumptionReport]:
    """Internal stability and attack detectability reports over the family."""
    return {
        "assumption1": check_assumption1(network.subs, network.L, family),
        "assumption2": check_assumption2(network.subs, network.L, family),
    }


def design_scenario(cfg: ScenarioConfig) -> ScenarioDesign:
    """Compile the grid, check assumptions, design gains, filters, bank and thresholds.

    Raises:
        ValidationError: If the attack bus is invalid or an assumption fails
        DesignError: If a synthesis step fails or the bank is unstable after a disconnection
    """
    network = load_network(cfg)
    if cfg.attack.bus is not None:
        if cfg.attack.bus not in network.grid.dg_buses:
            raise ValidationError(f"Field 'attack.bus' must be a DG bus, got '{cfg.attack.bus}'")
        try:
            network.attack_port(cfg.attack.bus)
        except ValueError as e:
            raise ValidationError(f"Field 'attack.bus': {e}") from e
    family = build_family(cfg, len(network.subs))
    reports = check_design(network, family)
    for name, report in reports.items():
        if not report.passed:
            sets = [e.index_set for e in report.failures]
            raise ValidationError(f"Check '{report.name}' fails on index sets {sets}")

    gains = design_gains(network, cfg)
    filters = design_filters(network, cfg, gains)
    bank = build_bank(network.subs, network.L, cfg.generator_kind, gains, filters)
    reports["bank_stability"] = check_bank_stability(bank, family)
    if not reports["bank_stability"].passed:
        sets = [e.index_set for e in reports["bank_stability"].failures]
        raise DesignError(
            f"{cfg.generator_kind.value} generator bank is unstable on index sets {sets}"
        )
    detector = calibrate_detectors(network, bank, cfg.threshold_a_bar)
    return ScenarioDesign(
        config=cfg,
        network=network,
        family=family,
        gains=gains,
        filters=filters,
        bank=bank,
        detector=detector,
        reports=reports,
    )


def closed_loop(network: CompiledNetwork, bank: GeneratorBank, ids: Sequence[int]) -> StateSpace:
    """Plant and bank with inputs (r_I, a_I, noise_I) and outputs (eps_I, w_I).

    State order is [plant states; bank states].
    """
    subs = network.subs
    plant = assemble(subs, network.L, ids)
    y_rows = output_channels(subs, ids, "y")
    w_rows = output_channels(subs, ids, "w")
    r_cols = input_channels(subs, ids, "r")
    a_cols = input_channels(subs, ids, "a")
    gen = assemble_bank(bank, ids)
    ny = len(y_rows)
    Ap, Bp, Cp, Dp = plant.A, plant.B, plant.C, plant.D
    Ab, Bb, Cb, Db = gen.A, gen.B, gen.C, gen.D
    Bb_y, Bb_r = Bb[:, :ny], Bb[:, ny:]
    Db_y, Db_r = Db[:, :ny], Db[:, ny:]
    Cy, Cw = Cp[y_rows], Cp[w_rows]
    Dyr, Dya = Dp[np.ix_(y_rows, r_cols)], Dp[np.ix_(y_rows, a_cols)]
    Dwr, Dwa = Dp[np.ix_(w_rows, r_cols)], Dp[np.ix_(w_rows, a_cols)]
    npl, nb, nw = Ap.shape[0], Ab.shape[0], len(w_rows)

    A = np.block([[Ap, np.zeros((npl, nb))], [Bb_y @ Cy, Ab]])
    B = np.block(
        [
            [Bp[:, r_cols], Bp[:, a_cols], np.zeros((npl, ny))],
            [Bb_y @ Dyr + Bb_r, Bb_y @ Dya, Bb_y],
        ]
    )
    C = np.block([[Db_y @ Cy, Cb], [Cw, np.zeros((nw, nb))]])
    D = np.block(
        [
            [Db_y @ Dyr + Db_r, Db_y @ Dya, Db_y],
            [Dwr, Dwa, np.zeros((nw, ny))],
        ]
    )
    return StateSpace(A=A, B=B, C=C, D=D)


def _equilibrium(sys: StateSpace, u0: np.ndarray) -> np.ndarray:
    if sys.nstates == 0:
        return np.zeros(0)
    if not is_hurwitz(sys.A):
        logger.warning("Closed loop is not Hurwitz; starting from the zero state")
        return np.zeros(sys.nstates)
    return -np.linalg.solve(sys.A, sys.B @ u0)


def _inputs(
    design: ScenarioDesign, ids: Sequence[int], attack: np.ndarray, noise: np.ndarray
) -> np.ndarray:
    """Input samples (r_I, a_I, noise_I) for the given ids from full-network arrays."""
    net = design.network
    r = np.concatenate([net.references[i] for i in ids])
    a_full = port_slices(net.subs, net.ids, "a")
    y_full = port_slices(net.subs, net.ids, "y")
    a_cols = np.concatenate([np.arange(a_full[i].start, a_full[i].stop) for i in ids]).astype(int)
    y_cols = np.concatenate([np.arange(y_full[i].start, y_full[i].stop) for i in ids]).astype(int)
    count = attack.shape[0]
    return np.hstack([np.tile(r, (count, 1)), attack[:, a_cols], noise[:, y_cols]])


def run_scenario(cfg: ScenarioConfig, design: Optional[ScenarioDesign] = None) -> SimResult:
    """Simulate the attack, detection, disconnection and separation timeline.

    At the first alarm of detector i the subsystems in alarm_map[i] are
    disconnected from the plant and their generators separated from the bank;
    the simulation continues from the states reached at the alarm sample.

    Raises:
        ValidationError: If the configuration is invalid or an assumption fails
        DesignError: If a synthesis step fails
    """
    design = design or design_scenario(cfg)
    net = design.network
    subs = net.subs
    h = cfg.step_s
    K = cfg.num_steps
    times = h * np.arange(K)
    n_a = sum(s.dim_a for s in subs)
    n_y = sum(s.dim_y for s in subs)

    attack = np.zeros((K, n_a))
    events: List[SimEvent] = []
    if cfg.attack.bus is not None and cfg.attack.amplitude != 0:
        i, k = net.attack_port(cfg.attack.bus)
        col = port_slices(subs, net.ids, "a")[i].start + k
        attack[times >= cfg.attack.t0_s - 1e-12, col] = cfg.attack.amplitude
        events.append(
            SimEvent(
                time_s=float(times[np.argmax(times >= cfg.attack.t0_s - 1e-12)]),
                kind=EventKind.ATTACK,
                subsystem=i,
                detail=f"bus {cfg.attack.bus}, amplitude {cfg.attack.amplitude}",
            )
        )
        logger.info(f"Attack on {cfg.attack.bus} from t = {cfg.attack.t0_s} s")
    rng = np.random.default_rng(cfg.noise.seed)
    noise = (
        rng.normal(0.0, cfg.noise.std, size=(K, n_y)) if cfg.noise.std > 0 else np.zeros((K, n_y))
    )

    gamma = design.detector.gamma
    residual_norms = {i: np.full(K, np.nan) for i in net.ids}
    v_sq = {bus: np.full(K, np.nan) for bus in net.grid.non_root_buses}
    alarm_times: Dict[int, Optional[float]] = {i: None for i in net.ids}

    ids = list(net.ids)
    bank = design.bank
    sys = closed_loop(net, bank, ids)
    u0 = _inputs(design, ids, np.zeros((1, n_a)), np.zeros((1, n_y)))[0]
    z = _equilibrium(sys, u0)
    start = 0
    while start < K:
        u = _inputs(design, ids, attack[start:], noise[start:])
        trace, _ = simulate(sys, SignalTrace(step=h, samples=u, start=times[start]), z)
        out = trace.samples
        e_sl = residual_slices(bank, ids)
        ne = sum(bank.locals[i].residual_dim for i in ids)
        norms = {
            i: np.linalg.norm(out[:, e_sl[i]], axis=1) / gamma[i]
            if e_sl[i].stop > e_sl[i].start
            else np.zeros(out.shape[0])
            for i in ids
        }
        hits = {
            i: first_alarm_index(norms[i], 1.0) for i in ids if alarm_times[i] is None
        }
        hits = {i: k for i, k in hits.items() if k is not None}
        stop = min(hits.values()) + 1 if hits else out.shape[0]

        for i in ids:
            residual_norms[i][start : start + stop] = norms[i][:stop]
        w_offset = ne
        for i in ids:
            blk = net.blocks[i]
            for k, bus in enumerate(blk.buses):
                v_sq[bus][start : start + stop] = out[:stop, w_offset + k]
            w_offset += subs[i - 1].dim_w
        if not hits:
            break

        t_alarm = float(times[start + stop - 1])
        removed = set()
        for i in sorted(i for i, k in hits.items() if k == stop - 1):
            alarm_times[i] = t_alarm
            events.append(SimEvent(time_s=t_alarm, kind=EventKind.ALARM, subsystem=i))
            logger.info(f"Detector {i} raised an alarm at t = {t_alarm:.3f} s")
            removed |= set(design.family.removed_on_alarm(i)) & set(ids)
        remaining = [i for i in ids if i not in removed]
        if removed:
            events.append(
                SimEvent(
                    time_s=t_alarm,
                    kind=EventKind.DISCONNECT,
                    removed=sorted(removed),
                    detail=f"remaining {remaining}",
                )
            )
            logger.info(f"Disconnected subsystems {sorted(removed)} at t = {t_alarm:.3f} s")
        if start + stop >= K or not remaining:
            break

        # state reached after the alarm sample, then hand off the surviving slices
        _, z_next = simulate(sys, SignalTrace(step=h, samples=u[:stop], start=times[start]), z)
        if removed:
            plant_layout = port_slices(subs, ids, "x")
            bank_layout = bank_state_layout(bank, ids)
            n_plant = sum(subs[i - 1].n for i in ids)
            z_plant, z_bank = z_next[:n_plant], z_next[n_plant:]
            z_next = np.concatenate(
                [z_plant[plant_layout[i]] for i in remaining]
                + [z_bank[bank_layout[i]] for i in remaining]
            )
            bank = separate(bank, removed)
            ids = remaining
            sys = closed_loop(net, bank, ids)
        z = z_next
        start += stop

    voltages = {bus: np.sqrt(np.clip(v, 0.0, None)) - 1.0 for bus, v in v_sq.items()}
    events.sort(key=lambda e: e.time_s)
    label = f"{cfg.generator_kind.value}_q{cfg.gain_q:g}"
    return SimResult(
        times=times,
        residual_norms=residual_norms,
        voltages=voltages,
        thresholds=dict(gamma),
        alarm_times=alarm_times,
        events=events,
        label=label,
    )


def sweep_configs(cfg: ScenarioConfig) -> List[Tuple[str, ScenarioConfig]]:
    """Naive, retrofit q = 1 and retrofit q = 10 variants of a configuration."""
    return [
        (label, replace(cfg, generator_kind=kind, gain_q=q)) for label, kind, q in SWEEP_RUNS
    ]


def run_sweep(cfg: ScenarioConfig) -> List[Tuple[str, ScenarioDesign, SimResult]]:
    """Run the three-detector comparison with the same attack and noise."""
    results = []
    for label, variant in sweep_configs(cfg):
        design = design_scenario(variant)
        result = run_scenario(variant, design)
        result.label = label
        results.append((label, design, result))
        logger.info(f"Sweep run '{label}': detection at {result.detection_time}")
    return results
