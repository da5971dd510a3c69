"""Static SVG figures of simulation results."""

import logging
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from pyresgen.models.scenario import SimResult  # noqa: E402

logger = logging.getLogger(__name__)

RESIDUALS_SVG = "residuals.svg"
VOLTAGES_SVG = "voltages.svg"
SVG_SALT = "pyresgen"


def _save(fig, path: Path) -> None:
    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _mark_disconnection(ax, result: SimResult) -> None:
    t_cut = result.disconnection_time
    if t_cut is not None:
        ax.axvline(t_cut, color="black", linestyle=":", linewidth=1.0, label="disconnection")


def render_svg(result: SimResult, directory: str) -> List[Path]:
    """Write residuals.svg and voltages.svg into a directory.

    The residual figure shows ||eps_i|| / gamma_i with the threshold at 1; both
    figures mark the disconnection instant.

    Returns:
        Paths of the written files
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(7.0, 3.5))
    for i, values in sorted(result.residual_norms.items()):
        ax.plot(result.times, values, linewidth=1.0, label=f"subsystem {i}")
    ax.axhline(1.0, color="red", linestyle="--", linewidth=1.0, label="threshold")
    _mark_disconnection(ax, result)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("residual norm [threshold]")
    ax.set_xlim(result.times[0], result.times[-1] if len(result.times) > 1 else 1.0)
    ax.legend(loc="upper left", fontsize="small")
    fig.tight_layout()
    residual_path = out / RESIDUALS_SVG
    _save(fig, residual_path)

    fig, ax = plt.subplots(figsize=(7.0, 3.5))
    for bus, values in result.voltages.items():
        ax.plot(result.times, values, linewidth=0.8, label=bus)
    _mark_disconnection(ax, result)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("voltage deviation [pu]")
    ax.set_xlim(result.times[0], result.times[-1] if len(result.times) > 1 else 1.0)
    ax.legend(loc="upper left", fontsize="x-small", ncol=3)
    fig.tight_layout()
    voltage_path = out / VOLTAGES_SVG
    _save(fig, voltage_path)

    logger.info(f"Saved figures to {out}")
    return [residual_path, voltage_path]
