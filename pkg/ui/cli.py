"""Command-line surface for web analysis.

Subcommands:
    analyze     classify a web at one point, or at every point of a file
    verify      run the residual battery and exit non-zero on a failure
    characters  print Cartan character tables of the existence scenarios

Reports go to stdout, either as deterministic JSON or as rich tables.
Errors go to stderr as ``error: [CODE] message``.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from rich.console import Console
from rich.table import Table

from models.geometry import BasePoint
from models.reports import CharacterTable, ClassificationReport, VerificationReport
from pipeline.workflow import run_analysis, run_batch
from ui.serialization import dumps
from webgeom.base.analysis_config import (
    AnalysisConfig,
    OutputFormat,
    get_default_config,
    load_config_from_yaml,
)
from webgeom.base.errors import UnknownScenarioError, UsageError, WebGeometryError
from webgeom.exprlang import WebDefinition, parse_point, parse_web
from webgeom.invariants import flagged_conditions
from webgeom.involution import CHARACTER_SCENARIOS, SCENARIOS, Scenario, character_table, partition

logger = logging.getLogger(__name__)

CONSOLE_WIDTH = 120


class _ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit 64 through UsageError."""

    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="webgeom", description="Four-dimensional three-web analysis")
    commands = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)
    commands.required = True

    analyze = commands.add_parser("analyze", help="Classify a web at a point")
    analyze.add_argument("--web", required=True, help="Web definition file")
    where = analyze.add_mutually_exclusive_group(required=True)
    where.add_argument("--point", help="Base point v1,v2,v3,v4 in (x1,x2,y1,y2) order")
    where.add_argument("--points", help="File with one point per line")
    analyze.add_argument("--json", action="store_true", help="Write the JSON report")
    analyze.add_argument("--dump-tensors", action="store_true",
                         help="Attach raw tensors of both frames (implies --json)")
    analyze.add_argument("--tol-classify", type=float, help="Override the classification tolerance")
    analyze.add_argument("--config", help="YAML analysis configuration")
    analyze.add_argument("--oracle", action="store_true", help="Use finite-difference jets")
    analyze.add_argument("--csv", help="Write the batch summary to a CSV file")

    verify = commands.add_parser("verify", help="Run the residual battery")
    verify.add_argument("--web", required=True, help="Web definition file")
    verify.add_argument("--point", required=True, help="Base point v1,v2,v3,v4")
    verify.add_argument("--seeds", type=int, default=5, help="Random frame changes (default 5)")
    verify.add_argument("--inject", action="append", default=[],
                        help="Corrupt a tensor component, e.g. b1112=+1 (repeatable)")
    verify.add_argument("--json", action="store_true", help="Write the JSON report")
    verify.add_argument("--config", help="YAML analysis configuration")
    verify.add_argument("--oracle", action="store_true", help="Use finite-difference jets")

    characters = commands.add_parser("characters", help="Cartan character tables")
    characters.add_argument("--scenario", default="all", help="thm3, thm7, thm8, s22 or all")
    characters.add_argument("--json", action="store_true", help="Write the JSON report")

    return parser


def _console() -> Console:
    return Console(file=sys.stdout, width=CONSOLE_WIDTH, color_system=None, highlight=False, markup=False, soft_wrap=True)


def _resolve_config(args: argparse.Namespace, config: Optional[AnalysisConfig]) -> AnalysisConfig:
    """YAML file, then explicit flags, on top of the given or default config."""
    resolved = config or get_default_config()
    if getattr(args, "config", None):
        resolved = load_config_from_yaml(args.config)
    if getattr(args, "tol_classify", None) is not None:
        resolved = dataclasses.replace(resolved, tol_classify=args.tol_classify)
    return resolved.validate()


def _wants_json(args: argparse.Namespace, config: AnalysisConfig) -> bool:
    return bool(getattr(args, "json", False) or getattr(args, "dump_tensors", False)
                or config.output == OutputFormat.JSON)


def read_web(path: str) -> WebDefinition:
    """Parse a web file; an unnamed web takes the file stem as its name."""
    file = Path(path)
    try:
        text = file.read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read web file {path}: {e.strerror}", {"path": path}) from e
    web = parse_web(text)
    if web.name is None:
        web = dataclasses.replace(web, name=file.stem)
    return web


def read_points(path: str) -> List[BasePoint]:
    """Points file: one point per line, blank lines and ``#`` comments ignored."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise UsageError(f"cannot read points file {path}: {e.strerror}", {"path": path}) from e
    points = [parse_point(line.split("#", 1)[0]) for line in lines if line.split("#", 1)[0].strip()]
    if not points:
        raise UsageError(f"points file {path} contains no points", {"path": path})
    return points


def _raise_if_failed(state: Dict[str, Any]) -> None:
    error = state.get("error")
    if error is not None:
        raise error


def _fmt(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.6g}"


def _verdict(flag: Optional[bool]) -> str:
    if flag is None:
        return "n/a"
    return "yes" if flag else "no"


# Analyze

def render_classification(console: Console, report: ClassificationReport) -> None:
    console.print(f"web: {report.web or '-'}  point: ({', '.join(_fmt(v) for v in report.point)})")
    console.print(f"a = ({_fmt(report.a[0])}, {_fmt(report.a[1])})  [{report.frame_tag} frame]")

    table = Table(title="Classification")
    table.add_column("Condition")
    table.add_column("Holds", justify="center")
    table.add_column("Residuals")

    table.add_row("isoclinicly geodesic (a = 0)", _verdict(report.isoclinicly_geodesic), "")
    integrable = report.delta_integrable
    table.add_row(
        "Δ integrable",
        _verdict(integrable.flag if integrable else None),
        f"p: {_fmt(integrable.residual_p)}  q: {_fmt(integrable.residual_q)}" if integrable else "",
    )
    table.add_row("Δ totally geodesic", _verdict(report.totally_geodesic), "")
    parallel = report.geodesicly_parallel
    table.add_row(
        "geodesicly parallel",
        _verdict(parallel.flag if parallel else None),
        "  ".join(_fmt(r) for r in parallel.residuals) if parallel else "",
    )
    hexagonal = report.subwebs_hexagonal
    table.add_row(
        "cut subwebs hexagonal",
        _verdict(hexagonal.flag if hexagonal else None),
        f"b¹: {_fmt(hexagonal.b1)}  b²: {_fmt(hexagonal.b2)}  K: {_fmt(hexagonal.subweb_curvature)}"
        if hexagonal else "",
    )
    principal = report.principal_bivector
    table.add_row(
        "Δ principal",
        _verdict(principal.flag if principal else None),
        f"b: {_fmt(principal.invariant_b)}  relation: {_fmt(principal.relation_residual)}"
        if principal else "",
    )
    console.print(table)

    console.print(f"C(t) coefficients: {', '.join(_fmt(c) for c in report.C_coeffs)}")
    console.print(f"C(t) consistent:   {', '.join(_fmt(c) for c in report.C_coeffs_consistent)}")
    if report.frame_change is not None:
        rows = "; ".join(", ".join(_fmt(v) for v in row) for row in report.frame_change.A)
        console.print(f"specializing frame: A = [{rows}], D = {_fmt(report.frame_change.D)}")
    held = flagged_conditions(report)
    console.print(f"conditions holding: {', '.join(held) if held else 'none'}")


def batch_summary(points: Sequence[BasePoint], states: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    """One row per point with the verdicts, or the error that stopped it."""
    rows = []
    for point, state in zip(points, states):
        row: Dict[str, Any] = {"point": str(point)}
        report: Optional[ClassificationReport] = state.get("report")
        error = state.get("error")
        if report is not None:
            row.update({
                "a1": report.a[0],
                "a2": report.a[1],
                "isoclinic": report.isoclinicly_geodesic,
                "integrable": report.delta_integrable.flag if report.delta_integrable else None,
                "totally_geodesic": report.totally_geodesic,
                "parallel": report.geodesicly_parallel.flag if report.geodesicly_parallel else None,
                "hexagonal": report.subwebs_hexagonal.flag if report.subwebs_hexagonal else None,
                "principal": report.principal_bivector.flag if report.principal_bivector else None,
                "error": None,
            })
        else:
            row["error"] = str(error) if error is not None else "no report"
        rows.append(row)
    return pd.DataFrame(rows)


def cmd_analyze(args: argparse.Namespace, config: AnalysisConfig, console: Console) -> int:
    web = read_web(args.web)
    options = {"mode": "classify", "include_tensors": args.dump_tensors, "use_oracle": args.oracle}

    if args.point is not None:
        state = run_analysis(web, parse_point(args.point), config, **options)
        _raise_if_failed(state)
        report = state["report"]
        if _wants_json(args, config):
            console.file.write(dumps(report))
        else:
            render_classification(console, report)
        return 0

    points = read_points(args.points)
    states = run_batch(web, points, config, **options)
    codes = [s.get("exit_code", 0) or 0 for s in states]
    summary = batch_summary(points, states)
    if args.csv:
        summary.to_csv(args.csv, index=False)
        logger.info(f"Wrote batch summary to {args.csv}")

    if _wants_json(args, config):
        console.file.write(dumps([
            s["report"] if s.get("report") is not None
            else {"point": p.as_list(), "error": str(s.get("error"))}
            for p, s in zip(points, states)
        ]))
    else:
        with pd.option_context("display.width", CONSOLE_WIDTH, "display.max_columns", None):
            console.print(summary.to_string(index=False))
    for point, state in zip(points, states):
        if state.get("error") is not None:
            print(f"error: ({point}) {state['error']}", file=sys.stderr)
    return max(codes)


# Verify

def render_verification(console: Console, report: VerificationReport) -> None:
    table = Table(title=f"Verification of {report.web or 'web'} at ({', '.join(_fmt(v) for v in report.point)})")
    table.add_column("Family")
    table.add_column("Max residual", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Status", justify="center")
    for family in report.families:
        status = "skipped" if family.skipped else ("ok" if family.passed else "FAIL")
        table.add_row(family.name, _fmt(family.max_residual), _fmt(family.tolerance), status)
    console.print(table)
    if report.injected:
        console.print(f"injected: {', '.join(report.injected)}")
    console.print(
        f"{report.checks_passed}/{report.checks_performed} checks passed: "
        f"{'VALID' if report.is_valid else 'INVALID'}"
    )


def cmd_verify(args: argparse.Namespace, config: AnalysisConfig, console: Console) -> int:
    if args.seeds < 0:
        raise UsageError(f"--seeds must be non-negative, got {args.seeds}")
    web = read_web(args.web)
    state = run_analysis(
        web, parse_point(args.point), config,
        mode="verify", seeds=args.seeds, injections=list(args.inject), use_oracle=args.oracle,
    )
    _raise_if_failed(state)
    report: VerificationReport = state["verification"]
    if _wants_json(args, config):
        console.file.write(dumps(report))
    else:
        render_verification(console, report)
    return 0 if report.is_valid else 1


# Characters

def unconstrained_count() -> Dict[str, Any]:
    """Third-order count of the unconstrained web, computed and as printed."""
    spec = SCENARIOS[Scenario.NONE]
    pfaffian, curvature = partition(Scenario.NONE)
    return {
        "N": pfaffian + curvature,
        "N_pfaffian": pfaffian,
        "N_curvature": curvature,
        "stated_N": spec.stated_N,
        "stated_partition": list(spec.stated_partition) if spec.stated_partition else None,
    }


def render_characters(console: Console, tables: Sequence[CharacterTable], unconstrained: Optional[Dict[str, Any]]) -> None:
    table = Table(title="Cartan characters")
    for name in ("Scenario", "q", "s1", "s2", "s3", "Q", "N", "Pfaffian", "Curvature", "Involutive", "Printed N"):
        table.add_column(name, justify="left" if name == "Scenario" else "right")
    for row in tables:
        verdict = "yes" if row.involutive else "no"
        if not row.hard:
            verdict += " (soft)"
        table.add_row(
            row.scenario, str(row.q), str(row.s1), str(row.s2), str(row.s3), str(row.Q), str(row.N),
            str(row.N_pfaffian), str(row.N_curvature), verdict,
            "-" if row.stated_N is None else str(row.stated_N),
        )
    console.print(table)
    for row in tables:
        for note in row.notes:
            console.print(f"{row.scenario}: {note}")
    if unconstrained is not None:
        stated = unconstrained["stated_partition"]
        console.print(
            f"unconstrained: N = {unconstrained['N']} ({unconstrained['N_pfaffian']} + "
            f"{unconstrained['N_curvature']}), printed {unconstrained['stated_N']} "
            f"({stated[0]} + {stated[1]})"
        )


def cmd_characters(args: argparse.Namespace, console: Console) -> int:
    if args.scenario.strip().lower() == "all":
        scenarios = list(CHARACTER_SCENARIOS)
        unconstrained = unconstrained_count()
    else:
        scenario = Scenario.parse(args.scenario)
        if scenario not in CHARACTER_SCENARIOS:
            raise UnknownScenarioError(
                f"scenario '{args.scenario}' has no character table, expected one of "
                f"{', '.join(s.value for s in CHARACTER_SCENARIOS)} or all",
                {"scenario": args.scenario}
            )
        scenarios = [scenario]
        unconstrained = None

    tables = [character_table(s) for s in scenarios]
    if args.json:
        payload: Dict[str, Any] = {"tables": tables}
        if unconstrained is not None:
            payload["unconstrained"] = unconstrained
        console.file.write(dumps(payload))
    else:
        render_characters(console, tables, unconstrained)
    return 0 if all(t.involutive for t in tables if t.hard) else 1


def run_cli(argv: Optional[Sequence[str]] = None, config: Optional[AnalysisConfig] = None) -> int:
    """Parse arguments, run the subcommand and return the exit code.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])
        config: Base configuration; flags and --config override it

    Returns:
        0 ok, 1 verification failure, 2 degenerate geometry, 3 parse error, 64 usage error
    """
    try:
        args = build_parser().parse_args(list(argv) if argv is not None else None)
        console = _console()
        if args.command == "characters":
            return cmd_characters(args, console)
        resolved = _resolve_config(args, config)
        if args.command == "analyze":
            return cmd_analyze(args, resolved, console)
        return cmd_verify(args, resolved, console)
    except WebGeometryError as e:
        logger.debug(f"Command failed with {e.code.name}: {e.details}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1
