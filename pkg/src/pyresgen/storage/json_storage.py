"""JSON storage for scenario configurations, designs and run summaries."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from pyresgen.core.detector import DetectorConfig
from pyresgen.core.report import RunSummary
from pyresgen.exceptions import ValidationError
from pyresgen.models.scenario import ScenarioConfig
from pyresgen.models.statespace import StateSpace

logger = logging.getLogger(__name__)


def _write_json(data: Any, filepath: Path) -> None:
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def _read_json(filepath: Path, what: str) -> Any:
    path = Path(filepath)
    if not path.exists():
        raise FileNotFoundError(f"{what} file not found: {path}")
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError(
            f"Invalid JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e


def save_config(cfg: ScenarioConfig, filepath: str) -> None:
    """Save a scenario configuration to a JSON file.

    Args:
        cfg: Configuration to save
        filepath: Path to the output JSON file
    """
    _write_json(cfg.to_dict(), Path(filepath))
    logger.info(f"Saved configuration to {filepath}")


def load_config(filepath: str) -> ScenarioConfig:
    """Load and validate a scenario configuration.

    A relative grid_path is resolved against the configuration's directory.

    Raises:
        FileNotFoundError: If the file doesn't exist
        ValidationError: On JSON syntax errors, unknown keys or invalid values
    """
    data = _read_json(Path(filepath), "Configuration")
    cfg = ScenarioConfig.from_dict(data)
    if cfg.grid_path and not Path(cfg.grid_path).is_absolute():
        cfg.grid_path = str(Path(filepath).parent / cfg.grid_path)
    logger.info(f"Loaded configuration from {filepath}")
    return cfg


def save_gains(gains: Dict[int, np.ndarray], filepath: Path, names: List[str]) -> None:
    """Write the observer gains H_i, one entry per subsystem."""
    data = {
        "gains": [
            {"id": i, "name": names[i - 1], "H": np.asarray(H).tolist()}
            for i, H in sorted(gains.items())
        ]
    }
    _write_json(data, filepath)
    logger.info(f"Saved gains to {filepath}")


def load_gains(filepath: Path) -> Dict[int, np.ndarray]:
    data = _read_json(filepath, "Gains")
    return {int(e["id"]): np.asarray(e["H"], dtype=float) for e in data["gains"]}


def save_filters(filters: Dict[int, Optional[StateSpace]], filepath: Path, kind: str) -> None:
    """Write the residual filters S_i (null for identity)."""
    data = {
        "kind": kind,
        "filters": [
            {"id": i, "realization": None if S is None else S.to_dict()}
            for i, S in sorted(filters.items())
        ],
    }
    _write_json(data, filepath)
    logger.info(f"Saved filters to {filepath}")


def load_filters(filepath: Path) -> Dict[int, Optional[StateSpace]]:
    data = _read_json(filepath, "Filters")
    return {
        int(e["id"]): None if e["realization"] is None else StateSpace.from_dict(e["realization"])
        for e in data["filters"]
    }


def save_thresholds(detector: DetectorConfig, filepath: Path) -> None:
    _write_json(detector.to_dict(), filepath)
    logger.info(f"Saved thresholds to {filepath}")


def load_thresholds(filepath: Path) -> DetectorConfig:
    return DetectorConfig.from_dict(_read_json(filepath, "Thresholds"))


def save_summary(summary: RunSummary, filepath: Path) -> None:
    _write_json(summary.to_dict(), filepath)
    logger.info(f"Saved run summary to {filepath}")


def load_summary(filepath: Path) -> RunSummary:
    return RunSummary.from_dict(_read_json(filepath, "Summary"))


def save_sweep_index(runs: List[Tuple[str, str]], filepath: Path) -> None:
    """Write sweep.json listing (label, relative directory) of each run."""
    data = {"runs": [{"label": label, "dir": d} for label, d in runs]}
    _write_json(data, filepath)
    logger.info(f"Saved sweep index to {filepath}")


def load_sweep_index(filepath: Path) -> List[Tuple[str, Path]]:
    """Runs of a sweep index with directories resolved against the index location."""
    data = _read_json(filepath, "Sweep index")
    root = Path(filepath).parent
    return [(e["label"], root / e["dir"]) for e in data["runs"]]
