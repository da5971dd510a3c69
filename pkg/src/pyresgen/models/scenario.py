"""Scenario configuration and result dataclasses."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from pyresgen.exceptions import ValidationError
from pyresgen.models.enums import EventKind, FilterKind, GeneratorKind

SEED_MAX = 2**64 - 1


def _reject_unknown(data: dict, allowed: set, where: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"Unknown key(s) {sorted(unknown)} in {where}")


@dataclass
class AttackConfig:
    """Step attack on the squared reference voltage of one DG bus.

    Attributes:
        bus: Attacked DG bus (None for an attack-free run)
        t0_s: Attack start time
        amplitude: Step height in per unit of v0^2
    """

    bus: Optional[str] = None
    t0_s: float = 1.0
    amplitude: float = 0.1

    def to_dict(self) -> dict:
        return {"bus": self.bus, "t0_s": self.t0_s, "amplitude": self.amplitude}

    @classmethod
    def from_dict(cls, data: dict) -> "AttackConfig":
        _reject_unknown(data, {"bus", "t0_s", "amplitude"}, "'attack'")
        return cls(
            bus=data.get("bus"),
            t0_s=_number(data, "t0_s", 1.0, "attack.t0_s"),
            amplitude=_number(data, "amplitude", 0.1, "attack.amplitude"),
        )


@dataclass
class NoiseConfig:
    """I.i.d. Gaussian measurement noise on every measured channel.

    Attributes:
        std: Standard deviation in per unit of the power base
        seed: Seed of the random generator (64-bit unsigned)
    """

    std: float = 0.005
    seed: int = 0

    def to_dict(self) -> dict:
        return {"std": self.std, "seed": self.seed}

    @classmethod
    def from_dict(cls, data: dict) -> "NoiseConfig":
        _reject_unknown(data, {"std", "seed"}, "'noise'")
        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ValidationError(f"Field 'noise.seed' must be an integer, got {seed!r}")
        return cls(std=_number(data, "std", 0.005, "noise.std"), seed=seed)


def _number(data: dict, key: str, default: float, name: str) -> float:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"Field '{name}' must be a number, got {value!r}")
    return float(value)


@dataclass
class ScenarioConfig:
    """Configuration of one attack/detection/disconnection run.

    Attributes:
        grid_path: Grid file (None: bundled CIGRE residential feeder)
        grid_overrides: Parameter overrides applied to the grid
        generator_kind: Residual generator architecture
        gain_q: State weight of the observer Riccati design
        gain_r: Output weight of the observer Riccati design
        filters: Post-filters on the local residuals
        bessel_cutoff_hz: Cutoff of the Bessel noise filter
        attack: Attack settings
        noise: Measurement noise settings
        horizon_s: Simulated time
        step_s: Sampling period
        threshold_a_bar: Attack amplitude used for threshold calibration
        family: Remaining index sets (None: every nonempty subset)
        alarm_map: Subsystem id -> ids removed on its alarm (None: {i: [i]})
    """

    grid_path: Optional[str] = None
    grid_overrides: Dict = field(default_factory=dict)
    generator_kind: GeneratorKind = GeneratorKind.RETROFIT
    gain_q: float = 1.0
    gain_r: float = 1.0
    filters: FilterKind = FilterKind.NONE
    bessel_cutoff_hz: float = 1.0
    attack: AttackConfig = field(default_factory=AttackConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    horizon_s: float = 10.0
    step_s: float = 1e-3
    threshold_a_bar: float = 0.09
    family: Optional[List[List[int]]] = None
    alarm_map: Optional[Dict[int, List[int]]] = None

    def __post_init__(self):
        try:
            self.generator_kind = GeneratorKind(self.generator_kind)
        except ValueError as e:
            raise ValidationError(
                f"Field 'generator_kind' must be one of "
                f"{[k.value for k in GeneratorKind]}, got {self.generator_kind!r}"
            ) from e
        try:
            self.filters = FilterKind(self.filters)
        except ValueError as e:
            raise ValidationError(
                f"Field 'filters' must be one of {[k.value for k in FilterKind]}, "
                f"got {self.filters!r}"
            ) from e
        if self.alarm_map is not None:
            try:
                self.alarm_map = {
                    int(k): [int(i) for i in v] for k, v in self.alarm_map.items()
                }
            except (AttributeError, TypeError, ValueError) as e:
                raise ValidationError(f"Field 'alarm_map' is malformed: {e}") from e
        self.validate()

    def validate(self) -> None:
        """Check ranges and cross-field invariants.

        Raises:
            ValidationError: Naming the offending field
        """
        if not self.step_s > 0:
            raise ValidationError(f"Field 'step_s' must be positive, got {self.step_s}")
        if not self.horizon_s >= self.step_s:
            raise ValidationError(
                f"Field 'horizon_s' must be at least 'step_s', got {self.horizon_s}"
            )
        if not self.attack.t0_s > 0:
            raise ValidationError(f"Field 'attack.t0_s' must be positive, got {self.attack.t0_s}")
        if self.attack.bus is not None and not self.horizon_s > self.attack.t0_s:
            raise ValidationError(
                f"Field 'horizon_s' must exceed 'attack.t0_s' ({self.attack.t0_s})"
            )
        if not self.gain_q >= 0:
            raise ValidationError(f"Field 'gain_q' must be non-negative, got {self.gain_q}")
        if not self.gain_r > 0:
            raise ValidationError(f"Field 'gain_r' must be positive, got {self.gain_r}")
        if not self.bessel_cutoff_hz > 0:
            raise ValidationError(
                f"Field 'bessel_cutoff_hz' must be positive, got {self.bessel_cutoff_hz}"
            )
        if not self.noise.std >= 0:
            raise ValidationError(f"Field 'noise.std' must be non-negative, got {self.noise.std}")
        if not 0 <= self.noise.seed <= SEED_MAX:
            raise ValidationError(
                f"Field 'noise.seed' must be a 64-bit unsigned integer, got {self.noise.seed}"
            )
        if not self.threshold_a_bar > 0:
            raise ValidationError(
                f"Field 'threshold_a_bar' must be positive, got {self.threshold_a_bar}"
            )
        if self.family is not None:
            if not self.family or any(not s for s in self.family):
                raise ValidationError("Field 'family' must be a list of nonempty index lists")

    @property
    def num_steps(self) -> int:
        """Number of samples on the simulation grid."""
        return max(1, int(round(self.horizon_s / self.step_s)))

    def to_dict(self) -> dict:
        return {
            "grid_path": self.grid_path,
            "grid_overrides": self.grid_overrides,
            "generator_kind": self.generator_kind.value,
            "gain_q": self.gain_q,
            "gain_r": self.gain_r,
            "filters": self.filters.value,
            "bessel_cutoff_hz": self.bessel_cutoff_hz,
            "attack": self.attack.to_dict(),
            "noise": self.noise.to_dict(),
            "horizon_s": self.horizon_s,
            "step_s": self.step_s,
            "threshold_a_bar": self.threshold_a_bar,
            "family": self.family,
            "alarm_map": (
                {str(k): v for k, v in sorted(self.alarm_map.items())}
                if self.alarm_map is not None
                else None
            ),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        """Parse a configuration document, rejecting unknown keys at every level.

        Raises:
            ValidationError: On unknown keys or invalid values
        """
        if not isinstance(data, dict):
            raise ValidationError("Configuration must be a JSON object")
        _reject_unknown(data, set(cls.__dataclass_fields__), "configuration")
        attack = data.get("attack") or {}
        noise = data.get("noise") or {}
        overrides = data.get("grid_overrides") or {}
        if not isinstance(attack, dict):
            raise ValidationError("Field 'attack' must be an object")
        if not isinstance(noise, dict):
            raise ValidationError("Field 'noise' must be an object")
        if not isinstance(overrides, dict):
            raise ValidationError("Field 'grid_overrides' must be an object")
        family = data.get("family")
        alarm_map = data.get("alarm_map")
        try:
            if family is not None:
                family = [[int(i) for i in s] for s in family]
            if alarm_map is not None:
                alarm_map = {int(k): [int(i) for i in v] for k, v in alarm_map.items()}
        except (TypeError, ValueError, AttributeError) as e:
            raise ValidationError(f"Fields 'family'/'alarm_map' are malformed: {e}") from e
        return cls(
            grid_path=data.get("grid_path"),
            grid_overrides=overrides,
            generator_kind=data.get("generator_kind", GeneratorKind.RETROFIT.value),
            gain_q=_number(data, "gain_q", 1.0, "gain_q"),
            gain_r=_number(data, "gain_r", 1.0, "gain_r"),
            filters=data.get("filters", FilterKind.NONE.value),
            bessel_cutoff_hz=_number(data, "bessel_cutoff_hz", 1.0, "bessel_cutoff_hz"),
            attack=AttackConfig.from_dict(attack),
            noise=NoiseConfig.from_dict(noise),
            horizon_s=_number(data, "horizon_s", 10.0, "horizon_s"),
            step_s=_number(data, "step_s", 1e-3, "step_s"),
            threshold_a_bar=_number(data, "threshold_a_bar", 0.09, "threshold_a_bar"),
            family=family,
            alarm_map=alarm_map,
        )


@dataclass
class SimEvent:
    """Timeline event.

    Attributes:
        time_s: Event time
        kind: Event kind
        subsystem: Subsystem raising the alarm (alarm events)
        removed: Ids removed (disconnect events)
        detail: Free text
    """

    time_s: float
    kind: EventKind
    subsystem: Optional[int] = None
    removed: List[int] = field(default_factory=list)
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "time_s": self.time_s,
            "kind": self.kind.value,
            "subsystem": self.subsystem,
            "removed": list(self.removed),
            "detail": self.detail,
        }


@dataclass
class SimResult:
    """Traces and events of a scenario run on a common time grid.

    Residuals are in per unit of each detector's threshold; voltage deviations
    are v_k - v0 in per unit of v0. Samples after a subsystem is separated are NaN.

    Attributes:
        times: Sample instants
        residual_norms: ||eps_i|| / gamma_i per subsystem id
        voltages: Voltage deviation per bus
        thresholds: gamma_i per subsystem id (residual units)
        alarm_times: First alarm per subsystem id (None if no alarm)
        events: Timeline events in time order
        label: Run label
    """

    times: np.ndarray
    residual_norms: Dict[int, np.ndarray]
    voltages: Dict[str, np.ndarray]
    thresholds: Dict[int, float]
    alarm_times: Dict[int, Optional[float]]
    events: List[SimEvent] = field(default_factory=list)
    label: str = ""

    @property
    def detection_time(self) -> Optional[float]:
        """Earliest alarm time of any detector."""
        times = [t for t in self.alarm_times.values() if t is not None]
        return min(times) if times else None

    @property
    def disconnection_time(self) -> Optional[float]:
        for e in self.events:
            if e.kind == EventKind.DISCONNECT:
                return e.time_s
        return None

    def max_voltage_deviation(
        self, start: Optional[float] = None, stop: Optional[float] = None
    ) -> float:
        """Largest |v_k - v0| (per unit) over a time window, ignoring separated buses."""
        mask = np.ones(self.times.shape, dtype=bool)
        if start is not None:
            mask &= self.times >= start
        if stop is not None:
            mask &= self.times < stop
        values = [np.abs(v[mask]) for v in self.voltages.values() if v[mask].size]
        stacked = np.concatenate(values) if values else np.zeros(0)
        stacked = stacked[np.isfinite(stacked)]
        return float(np.max(stacked)) if stacked.size else 0.0
