"""CSV tables of simulation results (residuals, voltages, events)."""

import logging
from pathlib import Path
from typing import Dict, List

import pandas as pd

from pyresgen.models.enums import EventKind
from pyresgen.models.scenario import SimEvent, SimResult

logger = logging.getLogger(__name__)

RESIDUALS_CSV = "residuals.csv"
VOLTAGES_CSV = "voltages.csv"
EVENTS_CSV = "events.csv"
FLOAT_FORMAT = "%.9g"
TIME_COLUMN = "time_s"


def _residual_column(i: int) -> str:
    return f"eps_{i}"


def _write(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\r\n", na_rep="")


def export_csv(result: SimResult, directory: str) -> List[Path]:
    """Write residuals.csv, voltages.csv and events.csv into a directory.

    Residual norms are in per unit of each detector threshold, voltages are
    v_k - v0 in per unit of v0. Samples of separated subsystems are left empty.

    Args:
        result: Simulation result
        directory: Output directory (created if missing)

    Returns:
        Paths of the written files
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)

    residuals = pd.DataFrame({TIME_COLUMN: result.times})
    for i, values in sorted(result.residual_norms.items()):
        residuals[_residual_column(i)] = values
    voltages = pd.DataFrame({TIME_COLUMN: result.times})
    for bus, values in result.voltages.items():
        voltages[bus] = values
    events = pd.DataFrame(
        [
            {
                TIME_COLUMN: e.time_s,
                "type": e.kind.value,
                "subsystem": "" if e.subsystem is None else str(e.subsystem),
                "removed": ";".join(str(i) for i in e.removed),
                "detail": e.detail,
            }
            for e in result.events
        ],
        columns=[TIME_COLUMN, "type", "subsystem", "removed", "detail"],
    )

    paths = [out / RESIDUALS_CSV, out / VOLTAGES_CSV, out / EVENTS_CSV]
    for df, path in zip((residuals, voltages, events), paths):
        _write(df, path)
    logger.info(f"Saved CSV tables to {out}")
    return paths


def load_csv_tables(directory: str) -> Dict[str, pd.DataFrame]:
    """Read the three CSV tables of a result directory.

    Raises:
        FileNotFoundError: If a table is missing
    """
    root = Path(directory)
    tables = {}
    for name in (RESIDUALS_CSV, VOLTAGES_CSV, EVENTS_CSV):
        path = root / name
        if not path.exists():
            raise FileNotFoundError(f"Result table not found: {path}")
        dtype = {"subsystem": str, "removed": str, "detail": str} if name == EVENTS_CSV else None
        tables[name] = pd.read_csv(path, dtype=dtype, keep_default_na=name != EVENTS_CSV)
    return tables


def result_from_csv(directory: str) -> SimResult:
    """Rebuild the traces and events of a result directory (thresholds are not stored)."""
    tables = load_csv_tables(directory)
    residuals = tables[RESIDUALS_CSV]
    voltages = tables[VOLTAGES_CSV]
    times = residuals[TIME_COLUMN].to_numpy(dtype=float)
    norms = {
        int(col.split("_", 1)[1]): residuals[col].to_numpy(dtype=float)
        for col in residuals.columns
        if col != TIME_COLUMN
    }
    volts = {
        str(col): voltages[col].to_numpy(dtype=float)
        for col in voltages.columns
        if col != TIME_COLUMN
    }
    events = []
    alarm_times: Dict[int, float] = {}
    for row in tables[EVENTS_CSV].itertuples(index=False):
        kind = EventKind(row.type)
        subsystem = int(row.subsystem) if row.subsystem else None
        removed = [int(i) for i in row.removed.split(";")] if row.removed else []
        events.append(
            SimEvent(
                time_s=float(getattr(row, TIME_COLUMN)),
                kind=kind,
                subsystem=subsystem,
                removed=removed,
                detail=row.detail,
            )
        )
        if kind == EventKind.ALARM and subsystem is not None:
            alarm_times.setdefault(subsystem, float(getattr(row, TIME_COLUMN)))
    return SimResult(
        times=times,
        residual_norms=norms,
        voltages=volts,
        thresholds={},
        alarm_times={i: alarm_times.get(i) for i in norms},
        events=events,
        label=Path(directory).name,
    )

