"""
Command-line front end of the workbench.

Every command loads one algebra document, runs a single computation and prints a
table (pandas) as text, CSV or JSON. Exit codes: 0 on success, 1 on a WorkbenchError
or a failed verification, 2 when `--strict` is given and a colimit did not stabilize.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import pandas as pd
from dotenv import load_dotenv

from .modules.algebra import Algebra, load_algebra, read_document
from .modules.bar import bar
from .modules.config import Window, get_settings, parse_range
from .modules.errors import NonStabilizationWarning, ParseError, WorkbenchError
from .modules.homalg import (
    Complex,
    Module,
    complex_from_document,
    injective_module,
    module_from_document,
    projective_module,
    regular_module,
    simple_module,
)
from .modules.identities import finite_global_dimension, run_suites, singular_agreement
from .modules.resolutions import is_self_injective, proj_resolution
from .modules.singyoneda import sy_cohomology
from .modules.stabilization import StabWindow, comparison_c, complete_resolution, gorenstein_probe, stab
from .modules.yoneda import yoneda_ext

logger = logging.getLogger(__name__)

FORMATS = ("table", "json", "csv")
_STANDARD = re.compile(r"([SPI])(\d+)")


@dataclass
class JobConfig:
    """One invocation: the algebra, the command with its targets, the window and the output options"""

    algebra: Path
    command: str
    targets: list[str] = field(default_factory=list)
    window: Window = field(default_factory=Window)
    max_deg: int = 6
    complete: bool = False
    output: str = "table"
    out: Path | None = None
    strict: bool = False
    seed: int = 0
    samples: int | None = None


@dataclass
class JobResult:
    command: str
    algebra: str
    parameters: dict[str, Any] = field(default_factory=dict)
    table: list[dict[str, Any]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    message: str = ""
    failed: bool = False

    def row(self, degree: Any, value: Any, stable: Any = None, stage: Any = None, **extra) -> None:
        self.table.append({"degree": degree, "value": value, "stable": stable, "stage": stage, **extra})

    def payload(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "algebra": self.algebra,
            "parameters": self.parameters,
            "table": self.table,
            "warnings": self.warnings,
        }


class Workspace:
    """The loaded algebra document with name resolution for modules and complexes"""

    def __init__(self, path: Path):
        self.path = path
        self.document = read_document(path)
        self.algebra: Algebra = load_algebra(self.document | {"name": self.document.get("name", path.stem)})
        self._modules: dict[str, Module] = {}

    def module(self, name: str) -> Module:
        """`k`, `Lambda`, `S<v>`, `P<v>`, `I<v>` (1-based) or a `[modules.NAME]` table"""
        if name in self._modules:
            return self._modules[name]
        a = self.algebra
        tables = self.document.get("modules", {})
        if name in tables:
            m = module_from_document(a, name, tables[name])
        elif name == "k":
            if a.num_vertices != 1:
                raise WorkbenchError(f"'k' needs a local algebra; {a.name} has {a.num_vertices} vertices", name)
            m = simple_module(a, 0)
        elif name == "Lambda":
            m = regular_module(a)
        elif match := _STANDARD.fullmatch(name):
            kind, v = match.group(1), int(match.group(2)) - 1
            if not 0 <= v < a.num_vertices:
                raise WorkbenchError(f"Vertex out of range in '{name}'", name)
            m = {"S": simple_module, "P": projective_module, "I": injective_module}[kind](a, v)
        else:
            raise ParseError(f"Unknown module '{name}'", name)
        self._modules[name] = m
        return m

    def complex(self, name: str) -> Complex:
        """A `[complexes.NAME]` table of the algebra document or of a separate TOML file,
        otherwise the stalk complex of a module in degree 0"""
        tables = self.document.get("complexes", {})
        if name in tables:
            return self._complex_from_table(name, tables[name])
        path = Path(name)
        if path.suffix == ".toml":
            doc = read_document(path)
            tables = doc.get("complexes", {})
            if len(tables) != 1:
                raise ParseError(f"{path} must define exactly one [complexes.NAME] table", str(path))
            (cname, table), = tables.items()
            for mname, mtable in doc.get("modules", {}).items():
                self._modules[mname] = module_from_document(self.algebra, mname, mtable)
            return self._complex_from_table(cname, table)
        return Complex.stalk(self.module(name), 0, name)

    def _complex_from_table(self, name: str, table: dict) -> Complex:
        modules = {m: self.module(m) for m in table.get("components", {}).values()}
        return complex_from_document(self.algebra, name, table, modules)


def _window_rows(result: JobResult, sw: StabWindow) -> None:
    """Rows for a windowed complex of injectives: reduced dimension, acyclicity, bar cap"""
    reduced = sw.reduced if sw.complex.algebra.is_basic() else None
    for n in range(sw.lo, sw.hi + 1):
        value = reduced.dims[n] if reduced else sw.complex.dim(n)
        result.row(n, value, sw.cohomology[n] == 0, sw.cap)
    result.parameters["raw_dims"] = {str(n): d for n, d in sw.dims.items()}
    if reduced:
        result.parameters["ranks"] = {str(n): r for n, r in reduced.ranks.items()}
        result.parameters["multiplicities"] = {str(n): c for n, c in reduced.multiplicities.items()}
    result.parameters["injective"] = sw.injective
    result.parameters["acyclic"] = sw.acyclic


def _algebra_check(ws: Workspace, job: JobConfig, result: JobResult) -> None:
    a = ws.algebra
    result.parameters.update(
        field=a.field.name,
        dim=a.dim,
        vertices=a.num_vertices,
        basic=a.is_basic(),
        self_injective=is_self_injective(a),
    )
    for v in range(a.num_vertices):
        result.row(v + 1, projective_module(a, v).dim)
    result.message = f"{a.name}: valid algebra of dimension {a.dim}"


def _bar_dump(ws: Workspace, job: JobConfig, result: JobResult) -> None:
    b = bar(ws.algebra, job.max_deg)
    result.parameters["max_deg"] = job.max_deg
    for j in range(-job.max_deg, 1):
        result.row(j, b.dim(j))


def _ext(ws: Workspace, job: JobConfig, result: JobResult) -> None:
    m, n = (ws.module(t) for t in _targets(job, 2))
    result.parameters["max_deg"] = job.max_deg
    for deg, dim in enumerate(yoneda_ext(m, n, job.max_deg)):
        result.row(deg, dim)


def _singular_hom(ws: Workspace, job: JobConfig, result: JobResult, x: Complex, y: Complex) -> None:
    w = job.window
    result.parameters.update(range=f"{w.lo}..{w.hi}", stabilization_count=w.stabilization_count, max_stage=w.max_stage)
    for n in w.degrees:
        report = sy_cohomology(x, y, n, w)
        result.row(n, report.value, report.stable, report.stage)


def _dsg_hom(ws: Workspace, job: JobConfig, result: JobResult) -> None:
    x, y = (ws.complex(t) for t in _targets(job, 2))
    _singular_hom(ws, job, result, x, y)


def _tate(ws: Workspace, job: JobConfig, result: JobResult) -> None:
    (x,) = (ws.complex(t) for t in _targets(job, 1))
    _singular_hom(ws, job, result, x, x)


def _resolve(ws: Workspace, job: JobConfig, result: JobResult) -> None:
    (m,) = (ws.module(t) for t in _targets(job, 1))
    if not job.complete:
        res = proj_resolution(m, job.max_deg)
        result.parameters["max_deg"] = job.max_deg
        for deg, count in enumerate(res.betti()):
            result.row(deg, count)
        return
    cr = complete_resolution(m, job.window)
    _window_rows(result, cr.window)
    result.parameters["gorenstein_consistent"] = cr.probe.consistent
    result.parameters["matches_injective_resolution"] = cr.matches_injective_resolution
    result.warnings.extend(cr.warnings)
    if not cr.matches_injective_resolution:
        result.warnings.append(f"S({m.name}) differs from the minimal injective resolution in high degrees")


def _stab(ws: Workspace, job: JobConfig, result: JobResult) -> None:
    (x,) = (ws.complex(t) for t in _targets(job, 1))
    sw = stab(x, job.window)
    _window_rows(result, sw)
    result.parameters["contractible"] = sw.contractible


def _compare(ws: Workspace, job: JobConfig, result: JobResult) -> None:
    (x,) = (ws.complex(t) for t in _targets(job, 1))
    report = comparison_c(x, job.window)
    for n in range(report.lo, report.hi + 1):
        result.row(n, report.sy_dims[n], report.sy_dims[n] == report.stab_dims[n], report.sy_stage)
    result.parameters.update(
        stab_dims={str(n): d for n, d in report.stab_dims.items()},
        cone_acyclic=report.cone_acyclic,
        cocycles_injective=report.cocycles_injective,
        certified=report.certified,
    )
    result.warnings.extend(report.warnings)
    if not report.certified:
        result.warnings.append(f"c_{x.name} is not certified on {report.lo}..{report.hi}")


def _gorenstein(ws: Workspace, job: JobConfig, result: JobResult) -> None:
    report = gorenstein_probe(ws.algebra, job.max_deg)
    counts = {n: sum(n in degrees for degrees in report.nonvanishing.values()) for n in range(1, job.max_deg + 1)}
    for n, count in counts.items():
        result.row(n, count)
    result.parameters.update(
        max_deg=job.max_deg, tail=report.tail, consistent=report.consistent, nonvanishing=report.nonvanishing
    )
    if not report.consistent:
        result.warnings.append(f"Ext^n(S, Lambda) is nonzero in the last {report.tail} degrees")


def _verify(ws: Workspace, job: JobConfig, result: JobResult) -> None:
    a = ws.algebra
    suites = run_suites(a, job.seed, job.samples, min(job.max_deg, 6))
    if is_self_injective(a) or finite_global_dimension(a):
        suites.append(singular_agreement(a, job.window.lo, job.window.hi, job.window))
    else:
        result.warnings.append(f"No singularity-category oracle for {a.name}; agreement suite skipped")
    for s in suites:
        result.row(None, len(s.failures), s.passed, None, suite=s.name, checked=s.checked)
    result.parameters.update(seed=job.seed, samples=job.samples or get_settings().random_samples)
    result.failed = not all(s.passed for s in suites)
    result.message = "some identity suites failed" if result.failed else "all identity suites passed"


COMMANDS = {
    "algebra": _algebra_check,
    "bar": _bar_dump,
    "ext": _ext,
    "dsg-hom": _dsg_hom,
    "tate": _tate,
    "resolve": _resolve,
    "stab": _stab,
    "compare": _compare,
    "gorenstein": _gorenstein,
    "verify": _verify,
}


def _targets(job: JobConfig, count: int) -> list[str]:
    if len(job.targets) != count:
        raise WorkbenchError(f"'{job.command}' takes {count} object name(s), got {len(job.targets)}", job.targets)
    return job.targets


def render(result: JobResult, output: str) -> str:
    """The result as text: an aligned table, CSV, or the fixed JSON schema"""
    if output == "json":
        return json.dumps(result.payload(), indent=2, ensure_ascii=False, default=str) + "\n"
    frame = pd.DataFrame(result.table, columns=None if result.table else ["degree", "value", "stable", "stage"])
    if output == "csv":
        return frame.to_csv(index=False)
    lines = [f"{result.command} over {result.algebra}", frame.to_string(index=False)]
    lines.extend(f"warning: {w}" for w in result.warnings)
    if result.message:
        lines.append(result.message)
    return "\n".join(lines) + "\n"


def run(job: JobConfig) -> int:
    """Execute one job and write its output; returns the exit code"""
    try:
        ws = Workspace(job.algebra)
        result = JobResult(job.command, ws.algebra.name)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NonStabilizationWarning)
            COMMANDS[job.command](ws, job, result)
    except WorkbenchError as e:
        logger.error(f"{job.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    unstable = [str(w.message) for w in caught if issubclass(w.category, NonStabilizationWarning)]
    for message in unstable:
        if message not in result.warnings:
            result.warnings.append(message)
    text = render(result, job.output)
    if job.out is not None:
        job.out.write_text(text, encoding="utf-8")
        logger.info(f"Wrote {job.command} output to {job.out}")
    else:
        sys.stdout.write(text)
    if result.failed:
        return 1
    if job.strict and unstable:
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--algebra", type=Path, required=True, help="Algebra TOML document")
    common.add_argument("--format", dest="output", choices=FORMATS, default="table", help="Output format")
    common.add_argument("--out", type=Path, help="Write output to this file instead of stdout")
    common.add_argument("--strict", action="store_true", help="Exit with 2 when a colimit does not stabilize")
    common.add_argument("--window", "--range", dest="window", help="Degree window lo..hi")
    common.add_argument("--stab-count", type=int, help="Consecutive stable stages required")
    common.add_argument("--max-stage", type=int, help="Last stage tried before giving up")
    common.add_argument("--cap", type=int, help="Explicit bar filtration cap")
    common.add_argument("--max-deg", type=int, default=6, help="Highest degree for ext, bar, resolve and gorenstein")
    common.add_argument("--seed", type=int, default=0, help="Seed for randomized suites")
    common.add_argument("--samples", type=int, help="Random samples per identity suite")

    parser = argparse.ArgumentParser(
        prog="yoneda-workbench", description="Exact computations in singularity categories"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    algebra = sub.add_parser("algebra", parents=[common], help="Validate the algebra document")
    algebra.add_argument("action", choices=["check"])
    bar_cmd = sub.add_parser("bar", parents=[common], help="Component dimensions of the truncated bar resolution")
    bar_cmd.add_argument("action", choices=["dump"])
    for name, nargs, text in (
        ("ext", 2, "dim Ext^n(M, N) through the Yoneda Hom complex"),
        ("dsg-hom", 2, "dim Hom in the singularity category, degree by degree"),
        ("tate", 1, "Tate cohomology dim Hom_sg(X, X[n])"),
        ("resolve", 1, "Minimal projective resolution, or the complete resolution with --complete"),
        ("stab", 1, "The stabilization S(X) on a window"),
        ("compare", 1, "Certify the comparison SY(Lambda, X) to S(X) on a window"),
    ):
        cmd = sub.add_parser(name, parents=[common], help=text)
        cmd.add_argument("targets", nargs=nargs, metavar="OBJECT")
        if name == "resolve":
            cmd.add_argument("--complete", action="store_true", help="Complete injective resolution via S(M)")
    sub.add_parser("gorenstein", parents=[common], help="Probe the vanishing of Ext^n(S, Lambda)")
    sub.add_parser("verify", parents=[common], help="Run the identity suites and oracle agreements")
    return parser


def job_from_args(args: argparse.Namespace) -> JobConfig:
    window = Window.from_settings()
    if args.window:
        window = window.with_range(*parse_range(args.window))
    window = Window(
        window.lo,
        window.hi,
        args.stab_count if args.stab_count is not None else window.stabilization_count,
        args.max_stage if args.max_stage is not None else window.max_stage,
        args.cap,
    )
    if args.max_deg < 0:
        raise WorkbenchError("--max-deg must be non-negative", args.max_deg)
    return JobConfig(
        algebra=args.algebra,
        command=args.command,
        targets=list(getattr(args, "targets", [])),
        window=window,
        max_deg=args.max_deg,
        complete=getattr(args, "complete", False),
        output=args.output,
        out=args.out,
        strict=args.strict,
        seed=args.seed,
        samples=args.samples,
    )


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings()
        logging.basicConfig(level=settings.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        job = job_from_args(args)
    except WorkbenchError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return run(job)


if __name__ == "__main__":
    sys.exit(main())
