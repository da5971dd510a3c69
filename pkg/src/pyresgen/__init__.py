"""pyresgen - Disconnection-aware attack detection for networked LTI systems.

Synthesizes local residual generators (naive, Luenberger and retrofit
observers), isolation and noise filters, and threshold detectors for
interconnected linear subsystems, and evaluates them on a LinDistFlow
distribution grid with mid-run disconnection of alarmed subsystems.
Provides a library interface and a CLI for design checks, simulation
and analysis.
"""

from pyresgen.core.detector import DetectorConfig, calibrate_threshold, evaluate
from pyresgen.core.distflow import (
    CompiledNetwork,
    check_passivity_stability,
    cigre_residential,
    compile_network,
    load_grid,
)
from pyresgen.core.isolation import build_isolation_filter, check_isolation_existence
from pyresgen.core.netsys import assemble, check_assumption1, check_assumption2, restrict
from pyresgen.core.report import (
    build_check_report,
    generate_analysis_text,
    generate_check_json,
    generate_check_text,
)
from pyresgen.core.resgen import assemble_bank, build_bank, build_local, separate
from pyresgen.core.riccati import design_observer_gain, solve_care
from pyresgen.core.scenario import design_scenario, run_scenario, run_sweep
from pyresgen.exceptions import DesignError, ValidationError
from pyresgen.models.enums import ComposeKind, EventKind, FilterKind, GeneratorKind
from pyresgen.models.generator import GeneratorBank, LocalResidualGenerator
from pyresgen.models.grid import Branch, DgUnit, Load, Partition, RadialGrid
from pyresgen.models.network import DisconnectionFamily, Interconnection, Subsystem
from pyresgen.models.scenario import AttackConfig, NoiseConfig, ScenarioConfig, SimResult
from pyresgen.models.statespace import SignalTrace, StateSpace
from pyresgen.storage import export_csv, load_config, render_svg, save_config

__version__ = "0.1.0"

__all__ = [
    # Models
    "StateSpace",
    "SignalTrace",
    "Subsystem",
    "Interconnection",
    "DisconnectionFamily",
    "LocalResidualGenerator",
    "GeneratorBank",
    "Branch",
    "DgUnit",
    "Load",
    "RadialGrid",
    "Partition",
    "AttackConfig",
    "NoiseConfig",
    "ScenarioConfig",
    "SimResult",
    # Enums
    "GeneratorKind",
    "FilterKind",
    "ComposeKind",
    "EventKind",
    # Errors
    "ValidationError",
    "DesignError",
    # Synthesis
    "solve_care",
    "design_observer_gain",
    "build_local",
    "build_bank",
    "assemble_bank",
    "separate",
    "build_isolation_filter",
    "check_isolation_existence",
    "DetectorConfig",
    "calibrate_threshold",
    "evaluate",
    # Networks
    "assemble",
    "restrict",
    "check_assumption1",
    "check_assumption2",
    "CompiledNetwork",
    "compile_network",
    "cigre_residential",
    "load_grid",
    "check_passivity_stability",
    # Scenarios
    "design_scenario",
    "run_scenario",
    "run_sweep",
    # Storage
    "load_config",
    "save_config",
    "export_csv",
    "render_svg",
    # Reports
    "build_check_report",
    "generate_check_text",
    "generate_check_json",
    "generate_analysis_text",
]
