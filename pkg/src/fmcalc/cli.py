"""Command-line front end.

Every subcommand assembles a one-task scenario and hands it to the same
runner as ``fmcalc run``, so flags and scenario files behave identically.

Exit codes: 0 all checks pass, 1 usage error, 2 computation error,
3 an internal identity check failed.
"""

from __future__ import annotations

import argparse
import os
import platform
import sys
from datetime import datetime, timezone

from . import __version__
from .errors import FMCalcError, ScenarioError, UnknownCatalogEntry
from .geometry import build_base
from .report import FAST, FULL, TaskFailure, render, run
from .scenario import FORMATS, parse_scenario, scenario_from_dict

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _split(text: str | None) -> list[str]:
    if text is None or text.strip() == "":
        return []
    return [t.strip() for t in text.split(",")]


def _base_block(args) -> dict:
    if getattr(args, "surface", None):
        parts = _split(args.surface)
        if len(parts) != 2:
            raise UsageError("--surface expects GENUS,E")
        return {"surface": {"genus": int(parts[0]), "e": int(parts[1])}}
    if getattr(args, "base", None):
        return {"base": args.base}
    raise UsageError("give --base NAME or --surface GENUS,E")


def _cy3_E(values: list[str], r: int) -> dict:
    if len(values) != 2 * r + 4:
        raise UsageError(f"--E expects {2 * r + 4} comma-separated values (n,x,S..,eta..,a,s)")
    return {"n": values[0], "x": values[1], "S": values[2 : 2 + r], "eta": values[2 + r : 2 + 2 * r], "a": values[-2], "s": values[-1]}


def _h11(base: str) -> int:
    try:
        return build_base(base).h11
    except UnknownCatalogEntry as exc:
        raise UnknownCatalogEntry(f"--base: {exc}") from None


def _class_block(args, text: str) -> dict:
    vals = _split(text)
    if getattr(args, "surface", None):
        if len(vals) != 4:
            raise UsageError("surface classes are n,theta,f,s (c1 = theta·Θ + f·f)")
        return {"n": vals[0], "c1": {"Θ": vals[1], "f": vals[2]}, "s": vals[3]}
    return _cy3_E(vals, _h11(args.base))


def _range_arg(text: str):
    """'0:30' -> {min, max}; '1/2,3/2' -> list."""
    if ":" in text:
        parts = text.split(":")
        out = {"min": parts[0], "max": parts[1]}
        if len(parts) == 3:
            out["step"] = parts[2]
        return out
    return _split(text)


def _kahler_arg(text: str) -> list:
    out = []
    for item in _split(text):
        re_, _, im = item.partition(":")
        out.append([re_, im or "0"])
    return out


def _task_from_args(args) -> dict:
    cmd = args.command
    if cmd == "transform":
        return {"type": "transform", "E": _class_block(args, args.E), "direction": args.direction}
    if cmd == "factor-check":
        return {"type": "factorization-check", "E": _class_block(args, args.E)}
    if cmd == "tduality":
        return {"type": "tduality", "frame": args.frame}
    if cmd == "spectral":
        t = {"type": "spectral", "n": args.n, "eta": _split(args.eta), "lambda": args.lam}
        if args.eta_E:
            t["eta_E"] = _split(args.eta_E)
        return t
    if cmd == "scan":
        t = {
            "type": "scan",
            "n": _range_arg(args.n),
            "eta": [_range_arg(x) for x in args.eta.split(";")],
            "lambda": _range_arg(args.lam),
            "require_anomaly": not args.all,
        }
        if args.target is not None:
            t["target_n_gen"] = args.target
        return t
    if cmd == "charges":
        t = {"type": "charges", "t": _kahler_arg(args.t)}
        if args.charge is not None:
            t["charge"] = _split(args.charge)
        if args.E is not None:
            t["E"] = _class_block(args, args.E)
        return t
    if cmd == "monodromy":
        return {
            "type": "monodromy",
            "seed": _split(args.seed),
            "generators": _split(args.generators),
            "max_steps": args.max_steps,
        }
    if cmd == "stability":
        t: dict = {"type": "stability"}
        if args.surface:
            a, b = _split(args.polarization)
            t["polarization"] = {"a": a, "b": b}
        else:
            vals = _split(args.polarization)
            t["polarization"] = {"theta": vals[0], "D": vals[1:]}
        if args.F:
            n, c, s = _split(args.F)
            t["F"] = {"n": n, "c": c, "s": s}
        if args.spectral:
            n, ell, r = _split(args.spectral)
            t["spectral"] = {"n": n, "ell": ell, "r": r}
        if args.E:
            t["E"] = _class_block(args, args.E)
        return t
    raise UsageError(f"unknown command {cmd}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None, help="report format (default json)")
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument(
        "--check-level",
        choices=(FAST, FULL),
        default=None,
        help="'full' adds oracle cross-checks (env FMCALC_CHECK_LEVEL)",
    )
    common.add_argument("--parallel", type=int, default=0, help="worker processes for scans")
    common.add_argument("--header", action="store_true", help="prepend run metadata (not deterministic)")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--base", help="catalog base surface: P2, F<m>, dP<k>, Enriques")
    model.add_argument("--surface", help="elliptic surface GENUS,E instead of a threefold")

    p = argparse.ArgumentParser(prog="fmcalc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fmcalc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", parents=[common], help="run a scenario file")
    s.add_argument("scenario", help="path to a TOML scenario ('-' for stdin)")

    s = sub.add_parser("transform", parents=[common, model], help="Fourier-Mukai transform of a class")
    s.add_argument("--E", required=True, help="n,x,S..,eta..,a,s (threefold) or n,theta,f,s (surface)")
    s.add_argument("--direction", choices=("forward", "inverse"), default="forward")

    s = sub.add_parser("factor-check", parents=[common, model], help="compare the four-factor composition")
    s.add_argument("--E", required=True)

    s = sub.add_parser("tduality", parents=[common, model], help="T-duality matrix on charge coordinates")
    s.add_argument("--frame", choices=("effective", "adiabatic", "both"), default="both")

    s = sub.add_parser("spectral", parents=[common, model], help="spectral-cover bundle invariants")
    s.add_argument("--n", required=True)
    s.add_argument("--eta", required=True, help="comma-separated base divisor coefficients")
    s.add_argument("--lambda", dest="lam", required=True)
    s.add_argument("--eta-E", dest="eta_E")

    s = sub.add_parser("scan", parents=[common, model], help="scan (n, eta, lambda) models")
    s.add_argument("--n", required=True, help="list '2,3' or range '2:5'")
    s.add_argument("--eta", required=True, help="per-divisor ranges separated by ';', e.g. '0:30;1,2'")
    s.add_argument("--lambda", dest="lam", required=True)
    s.add_argument("--target", help="keep only models with this N_gen")
    s.add_argument("--all", action="store_true", help="do not filter by the anomaly check")

    s = sub.add_parser("charges", parents=[common, model], help="charges, periods and central charges")
    s.add_argument("--charge", help="n6,n4..,n2..,n0 in the (Θ, p*D) basis")
    s.add_argument("--E", help="Chern data n,x,S..,eta..,a,s")
    s.add_argument("--t", required=True, help="Kähler point re:im,re:im,...")

    s = sub.add_parser("monodromy", parents=[common, model], help="monodromy orbit of a charge")
    s.add_argument("--seed", required=True)
    s.add_argument("--generators", default="conifold", help="conifold, conifold-raw, lcsl:A, lcsl-inv:A")
    s.add_argument("--max-steps", type=int, default=3)

    s = sub.add_parser("stability", parents=[common, model], help="Hilbert polynomial and slopes")
    s.add_argument("--polarization", required=True, help="a,b on a surface; theta,D.. on a threefold")
    s.add_argument("--F", help="surface invariants n,c,s of a relative-degree-0 sheaf")
    s.add_argument("--spectral", help="n,ell,r of a rank-one sheaf on a spectral curve")
    s.add_argument("--E", help="a class whose Hilbert polynomial to compute")
    return p


def _header(args, level: str) -> dict:
    return {
        "tool": f"fmcalc {__version__}",
        "command": args.command,
        "check_level": level,
        "python": platform.python_version(),
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    level = args.check_level or os.environ.get("FMCALC_CHECK_LEVEL", FAST)
    if level not in (FAST, FULL):
        print(f"error: FMCALC_CHECK_LEVEL must be '{FAST}' or '{FULL}'", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "run":
            text = sys.stdin.read() if args.scenario == "-" else open(args.scenario, encoding="utf-8").read()
            sc = parse_scenario(text)
        else:
            data = _base_block(args)
            data["tasks"] = [_task_from_args(args)]
            sc = scenario_from_dict(data)
    except (ScenarioError, UnknownCatalogEntry, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FMCalcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fmt = args.format or sc.format
    try:
        doc = run(sc, level, parallel=args.parallel)
    except TaskFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    text = render(doc, fmt, _header(args, level) if args.header else None)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); silence the interpreter's flush at exit
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return EXIT_OK if doc["all_checks_passed"] else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
