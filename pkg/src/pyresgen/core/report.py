"""Report generation for design checks and simulation results."""

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, List, Optional

from pyresgen.core.isolation import check_isolation_existence, check_isolation_necessity
from pyresgen.core.netsys import AssumptionReport, SetCheck, check_well_posed, restrict
from pyresgen.core.resgen import analyze_attack_to_residual, build_bank, check_bank_stability
from pyresgen.core.scenario import build_family, check_design, design_gains, load_network
from pyresgen.models.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


@dataclass
class CheckReport:
    """All design-time checks of a scenario configuration.

    Attributes:
        grid: Grid name
        subsystems: Subsystem names in id order
        sections: One report per check
        generated_at: Creation time
    """

    grid: str
    subsystems: List[str]
    sections: List[AssumptionReport]
    generated_at: datetime = field(default_factory=datetime.now)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.sections)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid,
            "subsystems": list(self.subsystems),
            "passed": self.passed,
            "checks": [s.to_dict() for s in self.sections],
            "generated_at": self.generated_at.isoformat(),
        }


def build_check_report(cfg: ScenarioConfig) -> CheckReport:
    """Run well-posedness, plant stability, detectability, isolation and invariant-zero checks.

    Checks that need a generator bank are only run once the plant assumptions hold.

    Raises:
        ValidationError: If the configuration or grid is invalid
    """
    network = load_network(cfg)
    family = build_family(cfg, len(network.subs))
    subs, L = network.subs, network.L

    well_posed = AssumptionReport(name="well-posedness")
    for index_set in family.sets:
        ids = sorted(index_set)
        ok = check_well_posed(subs, restrict(L, ids))
        well_posed.entries.append(
            SetCheck(index_set=ids, passed=ok, detail="" if ok else "ill-posed loop")
        )
    sections = [well_posed] + list(check_design(network, family).values())

    isolation = AssumptionReport(name="isolation existence")
    for i, sub in enumerate(subs, start=1):
        ok = check_isolation_existence(sub)
        necessary = check_isolation_necessity(subs, L, i)
        isolation.entries.append(
            SetCheck(
                index_set=[i],
                passed=ok,
                detail=f"condition {'is' if necessary else 'is not'} necessary",
            )
        )
    sections.append(isolation)

    if all(s.passed for s in sections):
        gains = design_gains(network, cfg)
        bank = build_bank(subs, L, cfg.generator_kind, gains)
        stability = check_bank_stability(bank, family)
        zeros = AssumptionReport(name="invariant zeros")
        for index_set in family.sets:
            response = analyze_attack_to_residual(subs, L, bank, index_set)
            worst = max((z.real for z in response.zeros), default=None)
            zeros.entries.append(
                SetCheck(
                    index_set=response.index_set,
                    passed=response.stable and response.left_invertible and response.zeros_stable,
                    detail=f"{len(response.zeros)} zeros, left invertible: "
                    f"{response.left_invertible}",
                    value=worst,
                )
            )
        sections += [stability, zeros]
    else:
        logger.warning("Plant checks failed; bank checks skipped")

    return CheckReport(
        grid=network.grid.name,
        subsystems=[s.name for s in subs],
        sections=sections,
    )


def generate_check_text(report: CheckReport) -> str:
    """Human-readable check report."""
    lines = ["=" * 80, f"Design Checks: {report.grid}", "=" * 80]
    lines.append(
        "Subsystems: " + ", ".join(f"{i}={n}" for i, n in enumerate(report.subsystems, start=1))
    )
    for section in report.sections:
        status = "PASS" if section.passed else "FAIL"
        lines.append(f"\n[{status}] {section.name}")
        for e in section.entries:
            mark = "ok" if e.passed else "FAILED"
            extra = f" value={e.value:.6g}" if e.value is not None else ""
            detail = f" ({e.detail})" if e.detail else ""
            lines.append(f"  {e.index_set}: {mark}{extra}{detail}")
    lines.append("\n" + "=" * 80)
    lines.append(f"Overall: {'PASS' if report.passed else 'FAIL'}")
    lines.append("=" * 80)
    return "\n".join(lines)


def generate_check_json(report: CheckReport) -> str:
    return json.dumps(report.to_dict(), indent=2)


@dataclass
class RunSummary:
    """Headline figures of one simulation run (contents of summary.json).

    Attributes:
        label: Run label
        detection_time: First alarm of any detector (None: no alarm)
        disconnection_time: Time of the first disconnection event
        alarm_times: First alarm per subsystem id
        removed: Ids removed during the run
        max_deviation_before: Largest |v - v0| before the disconnection
        max_deviation_after: Largest |v - v0| after the disconnection
        thresholds: gamma per subsystem id
        stability_margins: Bank spectral abscissa per remaining index set
    """

    label: str
    detection_time: Optional[float]
    disconnection_time: Optional[float]
    alarm_times: Dict[int, Optional[float]]
    removed: List[int]
    max_deviation_before: float
    max_deviation_after: Optional[float]
    thresholds: Dict[int, float]
    stability_margins: Dict[str, Optional[float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "detection_time": self.detection_time,
            "disconnection_time": self.disconnection_time,
            "alarm_times": {str(k): v for k, v in sorted(self.alarm_times.items())},
            "removed": list(self.removed),
            "max_deviation_before": self.max_deviation_before,
            "max_deviation_after": self.max_deviation_after,
            "thresholds": {str(k): v for k, v in sorted(self.thresholds.items())},
            "stability_margins": dict(self.stability_margins),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunSummary":
        return cls(
            label=data.get("label", ""),
            detection_time=data.get("detection_time"),
            disconnection_time=data.get("disconnection_time"),
            alarm_times={int(k): v for k, v in data.get("alarm_times", {}).items()},
            removed=list(data.get("removed", [])),
            max_deviation_before=data.get("max_deviation_before", 0.0),
            max_deviation_after=data.get("max_deviation_after"),
            thresholds={int(k): v for k, v in data.get("thresholds", {}).items()},
            stability_margins=dict(data.get("stability_margins", {})),
        )


def summarize(result, stability: Optional[AssumptionReport] = None) -> RunSummary:
    """RunSummary of a SimResult, with bank margins from a stability report."""
    t_cut = result.disconnection_time
    removed = sorted({i for e in result.events for i in e.removed})
    margins = {}
    if stability is not None:
        margins = {",".join(str(i) for i in e.index_set): e.value for e in stability.entries}
    return RunSummary(
        label=result.label,
        detection_time=result.detection_time,
        disconnection_time=t_cut,
        alarm_times=dict(result.alarm_times),
        removed=removed,
        max_deviation_before=result.max_voltage_deviation(stop=t_cut),
        max_deviation_after=None if t_cut is None else result.max_voltage_deviation(start=t_cut),
        thresholds=dict(result.thresholds),
        stability_margins=margins,
    )


def _fmt_time(t: Optional[float]) -> str:
    return "none" if t is None else f"{t:.3f} s"


def generate_analysis_text(summaries: List[RunSummary]) -> str:
    """Alarm times, voltage deviations and stability margins of one or more runs."""
    lines = ["=" * 80, "Scenario Analysis", "=" * 80]
    for s in summaries:
        lines.append(f"\nRun: {s.label}")
        lines.append(f"  Detection time: {_fmt_time(s.detection_time)}")
        for i, t in sorted(s.alarm_times.items()):
            lines.append(f"    detector {i}: {_fmt_time(t)}")
        if s.removed:
            lines.append(f"  Disconnected {s.removed} at {_fmt_time(s.disconnection_time)}")
        lines.append(f"  Max voltage deviation before: {s.max_deviation_before:.6f} pu")
        if s.max_deviation_after is not None:
            lines.append(f"  Max voltage deviation after:  {s.max_deviation_after:.6f} pu")
        if s.stability_margins:
            lines.append("  Bank spectral abscissa:")
            for key, value in s.stability_margins.items():
                shown = "n/a" if value is None else f"{value:.6g}"
                lines.append(f"    {{{key}}}: {shown}")
    if len(summaries) > 1:
        times = [s.detection_time for s in summaries]
        ordered = all(
            a is not None and b is not None and a > b for a, b in zip(times, times[1:])
        )
        lines.append("\n" + "=" * 80)
        lines.append(f"Detection times strictly decreasing: {'yes' if ordered else 'no'}")
    lines.append("=" * 80)
    return "\n".join(lines)


def generate_analysis_json(summaries: List[RunSummary]) -> str:
    return json.dumps({"runs": [s.to_dict() for s in summaries]}, indent=2)
