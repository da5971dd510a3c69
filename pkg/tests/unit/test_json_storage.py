"""Unit tests for JSON storage module."""

import json

import numpy as np
import pytest

from pyresgen.core.detector import DetectorConfig
from pyresgen.core.lti import static_gain
from pyresgen.core.report import RunSummary
from pyresgen.exceptions import ValidationError
from pyresgen.models.scenario import AttackConfig, ScenarioConfig
from pyresgen.models.statespace import StateSpace
from pyresgen.storage import (
    load_config,
    load_filters,
    load_gains,
    load_summary,
    load_sweep_index,
    load_thresholds,
    save_config,
    save_filters,
    save_gains,
    save_summary,
    save_sweep_index,
    save_thresholds,
)


class TestConfigStorage:
    """Tests for save_config / load_config."""

    def test_round_trip(self, tmp_path):
        """A saved configuration loads back unchanged."""
        cfg = ScenarioConfig(
            generator_kind="naive", attack=AttackConfig(bus="R18", t0_s=1.0, amplitude=0.1)
        )
        path = tmp_path / "nested" / "config.json"
        save_config(cfg, str(path))
        assert path.exists()
        assert load_config(str(path)).to_dict() == cfg.to_dict()

    def test_file_is_indented(self, tmp_path):
        """Files are pretty-printed with a trailing newline."""
        path = tmp_path / "config.json"
        save_config(ScenarioConfig(), str(path))
        text = path.read_text()
        assert text.startswith("{\n  ")
        assert text.endswith("}\n")

    def test_missing_file(self, tmp_path):
        """A missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError, match="Configuration"):
            load_config(str(tmp_path / "missing.json"))

    def test_invalid_json_reports_position(self, tmp_path):
        """Syntax errors name the line and column."""
        path = tmp_path / "bad.json"
        path.write_text('{\n  "horizon_s": ,\n}')
        with pytest.raises(ValidationError, match="line 2"):
            load_config(str(path))

    def test_unknown_key(self, tmp_path):
        """Unknown keys are rejected."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"horizon_s": 5.0, "solver": "rk45"}))
        with pytest.raises(ValidationError, match="solver"):
            load_config(str(path))

    def test_relative_grid_path(self, tmp_path):
        """grid_path is resolved against the configuration directory."""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"grid_path": "grids/feeder.json"}))
        cfg = load_config(str(path))
        assert cfg.grid_path == str(tmp_path / "grids" / "feeder.json")


class TestDesignStorage:
    """Tests for gains, filters and thresholds files."""

    def test_gains(self, tmp_path):
        """Gains keep their shape and subsystem id."""
        gains = {1: np.array([[0.5, 0.0], [0.0, 0.5]]), 2: np.array([[1.0]])}
        path = tmp_path / "gains.json"
        save_gains(gains, path, ["sigma1", "sigma2"])
        data = json.loads(path.read_text())
        assert data["gains"][0]["name"] == "sigma1"
        loaded = load_gains(path)
        assert np.array_equal(loaded[1], gains[1])
        assert loaded[2].shape == (1, 1)

    def test_filters(self, tmp_path):
        """Identity filters are stored as null."""
        S = StateSpace(A=[[-1.0]], B=[[1.0, 0.0]], C=[[1.0], [0.0]], D=np.eye(2))
        path = tmp_path / "filters.json"
        save_filters({1: S, 2: None, 3: static_gain(np.eye(2))}, path, "isolation")
        assert json.loads(path.read_text())["kind"] == "isolation"
        loaded = load_filters(path)
        assert loaded[2] is None
        assert np.array_equal(loaded[1].C, S.C)
        assert loaded[3].nstates == 0

    def test_thresholds(self, tmp_path):
        """Thresholds and calibration data round-trip."""
        det = DetectorConfig(gamma={1: 0.18, 2: 0.05}, a_bar=0.09, alpha={1: 2.0, 2: 0.5})
        path = tmp_path / "thresholds.json"
        save_thresholds(det, path)
        loaded = load_thresholds(path)
        assert loaded.gamma == det.gamma
        assert loaded.a_bar == 0.09


class TestRunStorage:
    """Tests for summaries and the sweep index."""

    def test_summary(self, tmp_path):
        """Summaries keep alarm times keyed by subsystem id."""
        summary = RunSummary(
            label="retrofit_q1",
            detection_time=3.06,
            disconnection_time=3.06,
            alarm_times={1: 3.06, 2: None},
            removed=[1],
            max_deviation_before=0.012,
            max_deviation_after=0.004,
            thresholds={1: 0.08, 2: 0.03},
            stability_margins={"1,2": -0.49},
        )
        path = tmp_path / "summary.json"
        save_summary(summary, path)
        loaded = load_summary(path)
        assert loaded == summary

    def test_sweep_index(self, tmp_path):
        """Run directories are resolved against the index."""
        path = tmp_path / "sweep" / "sweep.json"
        save_sweep_index([("naive", "naive"), ("retrofit_q1", "retrofit_q1")], path)
        runs = load_sweep_index(path)
        assert runs[1] == ("retrofit_q1", tmp_path / "sweep" / "retrofit_q1")

    def test_missing_summary(self, tmp_path):
        """Missing summaries raise FileNotFoundError."""
        with pytest.raises(FileNotFoundError, match="Summary"):
            load_summary(tmp_path / "summary.json")
