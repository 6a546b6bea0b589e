"""Command line interface.

Commands::

    capfilm solve  --scenario S [--template T] --epsilon E
    capfilm sweep  --scenario S [--template T] [--epsilons START:STOP:N] [--format csv|svg|both]
    capfilm verify --scenario S [--template T] [--epsilon E] [--checks competitors,diagnostics]
    capfilm select --scenario S [--epsilons START:STOP:N]
    capfilm render DUMP

Every artifact goes to ``--out`` (default: the scenario ``outputs`` entry,
else ``./out``).  Exit status: 0 ok, 2 parse or schema error, 3 solver
failure, 4 verification violations.  Failures print one JSON error record
on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dump
from .competitors import sample_balls, verify_minimality
from .diagnostics import run_diagnostics
from .film import InvalidNetwork
from .relaxation import (CSV_COLUMNS, InfeasibleVolume, NotConverged, SpanningLost, SweepResult,
                         plateau_reference, relax, sweep)
from .scenario import ParseError, SchemaError, load_scenario
from .svg import render_svg
from .templates import build_network
from .wireframe import SpanningClass, is_spanning

EXIT_OK, EXIT_SCHEMA, EXIT_SOLVER, EXIT_VIOLATION = 0, 2, 3, 4
CHECKS = ("competitors", "diagnostics")
N_BALLS = 20
C_STAR_FACTOR = 1.1

log = logging.getLogger("capfilm")


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, **extra):
        super().__init__(message)
        self.code, self.kind, self.extra = code, kind, extra

    def record(self) -> dict:
        return {"error": self.kind, "exit": self.code, "message": str(self), **self.extra}


# -- argument handling ---------------------------------------------------------------

def parse_epsilons(text: str) -> list[float]:
    """``START:STOP:N`` as N log-spaced values (N = 0 gives an empty list)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected START:STOP:N")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError("expected START:STOP:N with numbers") from None
    if n < 0 or not (a > 0 and b > 0):
        raise argparse.ArgumentTypeError("START and STOP must be positive, N non-negative")
    return [float(x) for x in np.logspace(math.log10(a), math.log10(b), n)]


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("epsilon must be positive")
    return v


def _checks(text: str) -> tuple[str, ...]:
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in items if s not in CHECKS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown checks {bad}; choose from {list(CHECKS)}")
    return items


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_SCHEMA, "UsageError", message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="capfilm", description="Relaxed liquid films around planar wire frames.")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, eps_many: bool):
        sp.add_argument("--scenario", required=True, help="scenario file or shipped scenario name")
        sp.add_argument("--template", help="template name (default: the scenario default)")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--seed", type=int, help="seed overriding the scenario solver seed")
        sp.add_argument("--epsilon", type=_positive, help="single liquid area")
        if eps_many:
            sp.add_argument("--epsilons", type=parse_epsilons, help="log range START:STOP:N")

    s = sub.add_parser("solve", help="relax one template at one epsilon")
    common(s, False)
    s.add_argument("--format", choices=("csv", "svg", "both"), default="both")
    s = sub.add_parser("sweep", help="relax one template over an epsilon schedule")
    common(s, True)
    s.add_argument("--format", choices=("csv", "svg", "both"), default="both")
    s = sub.add_parser("verify", help="competitor and diagnostic checks on relaxed networks")
    common(s, True)
    s.add_argument("--checks", type=_checks, default=CHECKS)
    s = sub.add_parser("select", help="relax every template and report the minimiser per epsilon")
    common(s, True)
    s = sub.add_parser("render", help="SVG of a network dump")
    s.add_argument("dump", type=Path)
    s.add_argument("--out", type=Path, help="output directory (default: next to the dump)")
    return p


# -- helpers --------------------------------------------------------------------------

def _load(args):
    try:
        sc = load_scenario(args.scenario)
    except FileNotFoundError as exc:
        raise CliError(EXIT_SCHEMA, "FileNotFound", str(exc)) from None
    except ParseError as exc:
        raise CliError(EXIT_SCHEMA, "ParseError", str(exc), line=exc.line, column=exc.col) from None
    except SchemaError as exc:
        raise CliError(EXIT_SCHEMA, "SchemaError", str(exc), key=exc.key) from None
    if args.seed is not None:
        sc.solver = replace(sc.solver, seed=args.seed)
    return sc


def _template(sc, name):
    try:
        return sc.template(name)
    except KeyError as exc:
        raise CliError(EXIT_SCHEMA, "SchemaError", exc.args[0], key="template") from None


def _epsilons(args, sc) -> list[float]:
    if getattr(args, "epsilons", None) is not None:
        return args.epsilons
    if args.epsilon is not None:
        return [args.epsilon]
    return list(sc.epsilons)


def _outdir(args, sc=None) -> Path:
    out = args.out or Path(sc.outputs if sc is not None and sc.outputs else "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _tag(eps: float) -> str:
    return f"eps{eps:.6e}"


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def _witness(net, cls: SpanningClass) -> list[np.ndarray]:
    res = is_spanning(net, net.wire, cls, want_witness=True)
    return [] if res.spanning else list(res.witness)


def _solver_failure(exc: Exception, eps: float) -> CliError:
    extra = {"epsilon": eps}
    if isinstance(exc, NotConverged):
        extra["iterations"] = exc.result.iterations
        extra["residual"] = exc.result.residual
    return CliError(EXIT_SOLVER, type(exc).__name__, str(exc) or type(exc).__name__, **extra)


def _solve_one(sc, tpl, eps):
    try:
        start = build_network(tpl, sc.wire, eps, sc.solver.max_seg_len)
    except ValueError as exc:  # the template cannot hold this area
        raise _solver_failure(InfeasibleVolume(str(exc)), eps) from None
    try:
        return relax(start, sc.wire, sc.spanning, eps, sc.solver)
    except (NotConverged, SpanningLost, InfeasibleVolume, InvalidNetwork) as exc:
        raise _solver_failure(exc, eps) from None


def _energy_record(sc, tpl, eps, res) -> dict:
    e = res.energy
    return {
        "scenario": sc.name, "template": tpl.name, "epsilon": eps, "energy_F": e.energy_F,
        "boundary_length": e.boundary_length, "collapsed_length": e.collapsed_length,
        "lambda": res.lambda_forces, "iterations": res.iterations, "status": res.status,
        "residual": res.residual,
    }


# -- commands -------------------------------------------------------------------------

def cmd_solve(args) -> int:
    sc = _load(args)
    tpl = _template(sc, args.template)
    eps = args.epsilon if args.epsilon is not None else (min(sc.epsilons) if sc.epsilons else None)
    if eps is None:
        raise CliError(EXIT_SCHEMA, "UsageError", "no epsilon given and the scenario lists none")
    out = _outdir(args, sc)
    res = _solve_one(sc, tpl, eps)
    stem = f"{sc.name}_{tpl.name}_{_tag(eps)}"
    rec = _energy_record(sc, tpl, eps, res)
    gens = [list(g) for g in sc.spanning.generators]
    dump.save(res.network, out / f"{stem}.network.json", scenario=sc.name, template=tpl.name,
              epsilon=eps, generators=gens)
    _write_json(out / f"{stem}.energy.json", rec)
    if args.format in ("csv", "both"):
        (out / f"{stem}.csv").write_text(_csv_single(eps, res))
    if args.format in ("svg", "both"):
        (out / f"{stem}.svg").write_text(render_svg(res.network, _witness(res.network, sc.spanning),
                                                    title=stem))
    print(json.dumps(rec, sort_keys=True))
    return EXIT_OK


def _row(eps, res):
    from .relaxation import SweepRow

    e = res.energy
    return SweepRow(eps, e.energy_F, e.boundary_length, e.collapsed_length, res.lambda_forces,
                    res.iterations, True, math.nan, res.status)


def _csv_single(eps, res) -> str:
    return SweepResult([_row(eps, res)], None, math.nan, "").to_csv()


def _fit_summary(sc, tpl, res: SweepResult) -> dict:
    fit = res.fit
    return {
        "scenario": sc.name, "template": tpl.name,
        "ell_reference": None if math.isnan(res.ell_reference) else res.ell_reference,
        "rows": len(res.rows),
        "failed_rows": [{"epsilon": r.epsilon, "status": r.status} for r in res.rows if r.status != "converged"],
        "fit": None if fit is None else {
            "model": fit.model, "exponent": fit.exponent, "coefficient": fit.coefficient,
            "r2": fit.r2, "bound_C": fit.bound_C,
        },
    }


def cmd_sweep(args) -> int:
    sc = _load(args)
    tpl = _template(sc, args.template)
    eps = _epsilons(args, sc)
    out = _outdir(args, sc)
    try:
        res = sweep(sc.wire, sc.spanning, tpl, eps, sc.solver, keep_networks=True)
    except (SpanningLost, InfeasibleVolume, InvalidNetwork) as exc:
        raise _solver_failure(exc, math.nan) from None
    stem = f"{sc.name}_{tpl.name}"
    if args.format in ("csv", "both"):
        (out / f"{stem}.sweep.csv").write_text(res.to_csv())
    summary = _fit_summary(sc, tpl, res)
    _write_json(out / f"{stem}.fit.json", summary)
    for r in res.rows:
        if r.network is None:
            continue
        dump.save(r.network, out / f"{stem}_{_tag(r.epsilon)}.network.json", scenario=sc.name,
                  template=tpl.name, epsilon=r.epsilon,
                  generators=[list(g) for g in sc.spanning.generators])
        if args.format in ("svg", "both"):
            (out / f"{stem}_{_tag(r.epsilon)}.svg").write_text(
                render_svg(r.network, _witness(r.network, sc.spanning), title=f"{stem} {r.epsilon:g}"))
    print(json.dumps(summary, sort_keys=True))
    if summary["failed_rows"]:
        raise CliError(EXIT_SOLVER, "SweepRowFailed", "some sweep rows did not converge",
                       rows=summary["failed_rows"])
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = _load(args)
    tpl = _template(sc, args.template)
    eps = _epsilons(args, sc)
    out = _outdir(args, sc)
    res = sweep(sc.wire, sc.spanning, tpl, eps, sc.solver, keep_networks=True)
    reference = None
    if "diagnostics" in args.checks and res.rows:
        _, ref = plateau_reference(tpl, sc.wire, sc.spanning, sc.solver)
        reference = ref.network
    seed = sc.solver.seed
    summary = {"scenario": sc.name, "template": tpl.name, "checks": list(args.checks), "rows": []}
    failed = False
    for r in res.rows:
        entry = {"epsilon": r.epsilon, "status": r.status}
        if r.status != "converged":
            summary["rows"].append(entry)
            failed = True
            continue
        stem = f"{sc.name}_{tpl.name}_{_tag(r.epsilon)}"
        if "competitors" in args.checks:
            balls = sample_balls(r.network, N_BALLS, np.random.default_rng(seed))
            rep = verify_minimality(r.network, balls, C_STAR_FACTOR * abs(r.lam), sc.spanning)
            (out / f"{stem}.competitors.txt").write_text(rep.to_text())
            entry["violations"] = len(rep.violations)
            entry["competitors_checked"] = sum(1 for x in rep.records if x.verdict != "inadmissible")
        if "diagnostics" in args.checks:
            diag = run_diagnostics(r.network, r.lam, seed=seed, reference=reference)
            (out / f"{stem}.diagnostics.txt").write_text(diag.to_text())
            entry["diagnostics_passed"] = diag.passed
            entry["failed_sections"] = [s.name for s in diag.sections if not s.passed]
        summary["rows"].append(entry)
    _write_json(out / f"{sc.name}_{tpl.name}.verify.json", summary)
    print(json.dumps(summary, sort_keys=True))
    if failed:
        raise CliError(EXIT_SOLVER, "SweepRowFailed", "some epsilons did not converge")
    bad = [e for e in summary["rows"] if e.get("violations", 0) or not e.get("diagnostics_passed", True)]
    if bad:
        raise CliError(EXIT_VIOLATION, "VerificationFailed", "verification found violations",
                       rows=[e["epsilon"] for e in bad])
    return EXIT_OK


SELECT_COLUMNS = ("epsilon", "template", "wet_junctions", "energy_F", "status", "winner")


def select_templates(sc, epsilons) -> tuple[list[dict], dict[float, str]]:
    """Relax every template over ``epsilons``; returns rows and the argmin per epsilon."""
    rows: list[dict] = []
    for name, tpl in sc.templates.items():
        res = sweep(sc.wire, sc.spanning, tpl, epsilons, sc.solver)
        for r in res.rows:
            rows.append({"epsilon": r.epsilon, "template": name, "wet_junctions": len(tpl.wet_junctions),
                         "energy_F": r.energy_F, "status": r.status})
    winners = {}
    for eps in sorted({r["epsilon"] for r in rows}):
        ok = [r for r in rows if r["epsilon"] == eps and r["status"] == "converged"]
        if ok:
            winners[eps] = min(ok, key=lambda r: (r["energy_F"], r["template"]))["template"]
    for r in rows:
        r["winner"] = winners.get(r["epsilon"]) == r["template"]
    rows.sort(key=lambda r: (r["epsilon"], r["template"]))
    return rows, winners


def cmd_select(args) -> int:
    sc = _load(args)
    eps = _epsilons(args, sc)
    out = _outdir(args, sc)
    rows, winners = select_templates(sc, eps)
    lines = [",".join(SELECT_COLUMNS)]
    for r in rows:
        lines.append(",".join([repr(r["epsilon"]), r["template"], str(r["wet_junctions"]),
                               repr(r["energy_F"]), r["status"], "true" if r["winner"] else "false"]))
    (out / f"{sc.name}.select.csv").write_text("\n".join(lines) + "\n")
    summary = {"scenario": sc.name, "winners": [{"epsilon": e, "template": t} for e, t in winners.items()]}
    _write_json(out / f"{sc.name}.select.json", summary)
    print(json.dumps(summary, sort_keys=True))
    failed = [r for r in rows if r["status"] != "converged"]
    if failed:
        raise CliError(EXIT_SOLVER, "SweepRowFailed", "some template runs did not converge",
                       rows=[{"epsilon": r["epsilon"], "template": r["template"]} for r in failed])
    return EXIT_OK


def cmd_render(args) -> int:
    try:
        net = dump.load(args.dump)
        meta = dump.load_meta(args.dump)
    except FileNotFoundError as exc:
        raise CliError(EXIT_SCHEMA, "FileNotFound", str(exc)) from None
    except (ValueError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_SCHEMA, "DumpError", str(exc)) from None
    witness = []
    if meta.get("generators"):
        witness = _witness(net, SpanningClass(tuple(tuple(g) for g in meta["generators"])))
    name = args.dump.name.removesuffix(".json").removesuffix(".network")
    out = args.out or args.dump.parent
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.svg"
    path.write_text(render_svg(net, witness, title=name))
    print(json.dumps({"svg": str(path)}))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "verify": cmd_verify, "select": cmd_select,
            "render": cmd_render}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(json.dumps(exc.record(), sort_keys=True, default=str), file=sys.stderr)
        return exc.code
    except Exception as exc:  # any module failure still yields a record
        rec = {"error": type(exc).__name__, "exit": EXIT_SOLVER, "message": str(exc)}
        print(json.dumps(rec, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
