"""Threshold detectors on residual norms."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from pyresgen.core.lti import dc_gain
from pyresgen.models.statespace import SignalTrace, StateSpace

logger = logging.getLogger(__name__)


@dataclass
class DetectorConfig:
    """Thresholds of the local detectors.

    Attributes:
        gamma: Threshold per subsystem id, in residual units
        a_bar: Attack amplitude used for calibration
        alpha: DC-gain norm per subsystem id (gamma = a_bar * alpha)
    """

    gamma: Dict[int, float]
    a_bar: float = 0.0
    alpha: Dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        self.gamma = {int(k): float(v) for k, v in self.gamma.items()}
        self.alpha = {int(k): float(v) for k, v in self.alpha.items()}
        self.validate()

    def validate(self) -> None:
        """Raise ValueError unless every threshold is positive and finite."""
        for i, g in self.gamma.items():
            if not (np.isfinite(g) and g > 0):
                raise ValueError(f"Threshold 'gamma' for subsystem {i} must be positive, got {g}")

    def to_dict(self) -> dict:
        return {
            "a_bar": self.a_bar,
            "gamma": {str(k): v for k, v in sorted(self.gamma.items())},
            "alpha": {str(k): v for k, v in sorted(self.alpha.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DetectorConfig":
        return cls(
            gamma={int(k): v for k, v in data["gamma"].items()},
            a_bar=data.get("a_bar", 0.0),
            alpha={int(k): v for k, v in data.get("alpha", {}).items()},
        )


def calibrate_threshold(
    bank_map: StateSpace,
    attacked_port: int,
    a_bar: float,
    outputs: Optional[Sequence[int]] = None,
) -> float:
    """gamma = a_bar * ||DC gain from the attack port to the attacked residual||_2.

    Args:
        bank_map: Hurwitz map a -> eps
        attacked_port: Input index of the attack channel
        a_bar: Reference attack amplitude
        outputs: Residual channels of the attacked subsystem (all if omitted)

    Raises:
        ValueError: If the map is not Hurwitz
    """
    G0 = dc_gain(bank_map)
    rows = np.arange(G0.shape[0]) if outputs is None else np.asarray(outputs, dtype=int)
    block = G0[np.ix_(rows, [attacked_port])]
    alpha = float(np.linalg.norm(block, 2)) if block.size else 0.0
    gamma = abs(a_bar) * alpha
    logger.debug(f"Calibrated threshold: alpha={alpha:.6g}, gamma={gamma:.6g}")
    return gamma


def residual_norm(trace: SignalTrace, channels: Optional[Sequence[int]] = None) -> np.ndarray:
    """Euclidean norm over the selected channels at each sample."""
    samples = trace.samples if channels is None else trace.samples[:, list(channels)]
    if samples.shape[1] == 0:
        return np.zeros(samples.shape[0])
    return np.linalg.norm(samples, axis=1)


def first_alarm_index(norms: np.ndarray, gamma: float) -> Optional[int]:
    """Index of the first sample with norm strictly above gamma."""
    if not gamma > 0:
        raise ValueError(f"Threshold 'gamma' must be positive, got {gamma}")
    hits = np.flatnonzero(np.asarray(norms) > gamma)
    return int(hits[0]) if hits.size else None


def evaluate(eps: SignalTrace, gamma: float) -> Optional[float]:
    """Time of the first sample with ||eps(t)|| > gamma, or None."""
    k = first_alarm_index(residual_norm(eps), gamma)
    return None if k is None else float(eps.times[k])
