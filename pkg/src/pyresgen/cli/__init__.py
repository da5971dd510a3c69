"""CLI interface for pyresgen."""

import argparse
import logging
import sys
from pathlib import Path

from pyresgen.core.report import (
    build_check_report,
    generate_analysis_json,
    generate_analysis_text,
    generate_check_json,
    generate_check_text,
    summarize,
)
from pyresgen.core.scenario import design_scenario, run_scenario, run_sweep
from pyresgen.models.scenario import SEED_MAX, ScenarioConfig
from pyresgen.storage import (
    export_csv,
    load_config,
    load_summary,
    load_sweep_index,
    render_svg,
    save_config,
    save_filters,
    save_gains,
    save_summary,
    save_sweep_index,
    save_thresholds,
)

EXIT_INVALID = 1
EXIT_FAILURE = 2

SUMMARY_JSON = "summary.json"
SWEEP_JSON = "sweep.json"


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits with the validation code on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"Error: {message}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from e
    if not 0 <= value <= SEED_MAX:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {value}")
    return value


def _config(args) -> ScenarioConfig:
    if args.config is None:
        return ScenarioConfig()
    return load_config(args.config)


def _fail(e: Exception) -> None:
    if isinstance(e, FileNotFoundError):
        print(f"Error: File not found: {e}", file=sys.stderr)
        sys.exit(EXIT_INVALID)
    if isinstance(e, ValueError):
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(EXIT_INVALID)
    print(f"Error: {e}", file=sys.stderr)
    sys.exit(EXIT_FAILURE)


def _write_run(design, result, out: Path) -> None:
    export_csv(result, out)
    render_svg(result, out)
    save_summary(summarize(result, design.reports.get("bank_stability")), out / SUMMARY_JSON)
    save_config(design.config, out / "config.json")


def cmd_check(args):
    """Run the design-time checks."""
    try:
        report = build_check_report(_config(args))
    except Exception as e:
        _fail(e)
    if args.format == "json":
        print(generate_check_json(report))
    else:
        print(generate_check_text(report))
    if not report.passed:
        sys.exit(EXIT_INVALID)


def cmd_design(args):
    """Design gains, filters and thresholds and write them as JSON files."""
    try:
        cfg = _config(args)
        design = design_scenario(cfg)
        out = Path(args.out)
        names = [s.name for s in design.network.subs]
        save_gains(design.gains, out / "gains.json", names)
        save_filters(design.filters, out / "filters.json", cfg.filters.value)
        save_thresholds(design.detector, out / "thresholds.json")
    except Exception as e:
        _fail(e)
    print(f"Design written to {args.out}")


def cmd_simulate(args):
    """Simulate one scenario and write its tables and figures."""
    try:
        cfg = _config(args)
        if args.seed is not None:
            cfg.noise.seed = args.seed
        design = design_scenario(cfg)
        result = run_scenario(cfg, design)
        _write_run(design, result, Path(args.out))
    except Exception as e:
        _fail(e)
    t = result.detection_time
    print(f"Detection time: {'none' if t is None else f'{t:.3f} s'}")
    print(f"Results written to {args.out}")


def cmd_sweep(args):
    """Run the naive / retrofit q=1 / retrofit q=10 comparison."""
    try:
        cfg = _config(args)
        if args.seed is not None:
            cfg.noise.seed = args.seed
        out = Path(args.out)
        runs = []
        for label, design, result in run_sweep(cfg):
            _write_run(design, result, out / label)
            runs.append((label, label))
        save_sweep_index(runs, out / SWEEP_JSON)
    except Exception as e:
        _fail(e)
    print(f"Sweep written to {args.out}")


def cmd_analyze(args):
    """Print alarm times, voltage deviations and stability margins of stored runs."""
    try:
        root = Path(args.result)
        if (root / SWEEP_JSON).exists():
            index = load_sweep_index(root / SWEEP_JSON)
            summaries = [load_summary(d / SUMMARY_JSON) for _, d in index]
        else:
            summaries = [load_summary(root / SUMMARY_JSON)]
    except Exception as e:
        _fail(e)
    if args.format == "json":
        print(generate_analysis_json(summaries))
    else:
        print(generate_analysis_text(summaries))


def main(argv=None):
    """Main CLI entry point."""
    parser = _Parser(
        description="pyresgen - disconnection-aware attack detection for networked LTI systems"
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Log progress to stderr")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    def add_config(p):
        p.add_argument(
            "--config", "-c", help="Scenario configuration (JSON, default: CIGRE scenario)"
        )

    check_parser = subparsers.add_parser("check", help="Run design-time checks")
    add_config(check_parser)
    check_parser.add_argument(
        "--format", "-f", choices=["text", "json"], default="text",
        help="Output format (default: text)",
    )
    check_parser.set_defaults(func=cmd_check)

    design_parser = subparsers.add_parser("design", help="Write gains, filters and thresholds")
    add_config(design_parser)
    design_parser.add_argument("--out", "-o", required=True, help="Output directory")
    design_parser.set_defaults(func=cmd_design)

    for name, func, text in (
        ("simulate", cmd_simulate, "Simulate one scenario"),
        ("sweep", cmd_sweep, "Compare naive and retrofit detectors"),
    ):
        sim_parser = subparsers.add_parser(name, help=text)
        add_config(sim_parser)
        sim_parser.add_argument("--out", "-o", required=True, help="Output directory")
        sim_parser.add_argument("--seed", type=_seed, help="Noise seed (overrides config)")
        sim_parser.set_defaults(func=func)

    analyze_parser = subparsers.add_parser("analyze", help="Summarize stored results")
    analyze_parser.add_argument("--result", "-r", required=True, help="Result or sweep directory")
    analyze_parser.add_argument(
        "--format", "-f", choices=["text", "json"], default="text",
        help="Output format (default: text)",
    )
    analyze_parser.set_defaults(func=cmd_analyze)

    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        sys.exit(EXIT_INVALID)

    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    args.func(args)


if __name__ == "__main__":
    main()
