"""Command line front end: project, metric, verify and geodesic.

Exit codes: 0 success, 1 verification failed, 2 usage or parse error,
3 violated precondition, 4 degenerate geometry, 5 optimizer did not converge.

Defaults may be supplied in a JSON config file named by the environment
variable CURVEMETRICS_CONFIG, with keys n, scheme, tolerances, recipe,
splitting, seed and strict. Command line flags take precedence.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import io
from .curve import SCHEMES, DiscreteCurve, apply_diffeo, apply_diffeo_field, constant_speed_diffeo
from .errors import (
    CurveMetricsError,
    GridMismatch,
    NonPositiveCoefficient,
    NotADiffeo,
    NotConstantSpeed,
    NotImmersed,
    NotSymmetricPositive,
)
from .metrics import DEFAULT_TOLERANCES, Metric, evaluate, verify_metric
from .paths import horizontal_geodesic
from .recipes import SPLITTINGS, parse_recipe
from .splittings import make_splitting

log = logging.getLogger("curvemetrics")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRECONDITION, EXIT_DEGENERATE, EXIT_NONCONVERGED = range(6)
TOL_NAMES = (*DEFAULT_TOLERANCES, "geodesic")
CONFIG_ENV = "CURVEMETRICS_CONFIG"
DEFAULTS = {
    "n": None,
    "scheme": "central",
    "tolerances": {**DEFAULT_TOLERANCES, "geodesic": 1e-8},
    "recipe": "l2",
    "splitting": "tan_nor",
    "seed": 0,
    "strict": False,
}


class UsageError(CurveMetricsError):
    pass


def load_config(path: str | None) -> dict:
    """Defaults merged with the optional JSON config file."""
    cfg = json.loads(json.dumps(DEFAULTS))
    if not path:
        return cfg
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    tols = data.pop("tolerances", {}) or {}
    cfg.update(data)
    cfg["tolerances"].update(tols)
    return cfg


def _resolve(args) -> dict:
    cfg = load_config(os.environ.get(CONFIG_ENV))
    for key in ("recipe", "splitting", "seed", "scheme"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "strict", False):
        cfg["strict"] = True
    for name in TOL_NAMES:
        value = getattr(args, f"tol_{name}", None)
        if value is not None:
            cfg["tolerances"][name] = value
    # validate everything before computing anything
    for name, value in cfg["tolerances"].items():
        if not (isinstance(value, (int, float)) and value > 0):
            raise UsageError(f"tolerance {name} must be positive, got {value!r}")
    if cfg["scheme"] not in SCHEMES:
        raise UsageError(f"unknown scheme {cfg['scheme']!r}")
    if cfg["splitting"] not in SPLITTINGS:
        raise UsageError(f"unknown splitting {cfg['splitting']!r}; expected one of {SPLITTINGS}")
    cfg["recipe_obj"] = parse_recipe(cfg["recipe"])
    return cfg


def _read_curve(path, cfg) -> DiscreteCurve:
    c = io.read_curve(path, cfg["scheme"])
    if cfg["n"] is not None and c.n != cfg["n"]:
        raise GridMismatch(f"{path}: curve has n={c.n}, config expects n={cfg['n']}")
    return c


def _constant_speed(c: DiscreteCurve, fields, cfg, what: str):
    """Resample c (and fields along it) to constant speed unless --strict."""
    if c.is_constant_speed():
        return c, fields
    if cfg["strict"]:
        c.require_constant_speed()
    log.warning("%s: curve is not constant speed (deviation %.3g), resampling",
                what, c.speed_deviation())
    phi = constant_speed_diffeo(c)
    return apply_diffeo(c, phi), [apply_diffeo_field(f, phi, c) for f in fields]


def _emit(report: dict, fmt: str) -> None:
    if fmt == "csv":
        print("key,value")
        for k, v in report.items():
            print(f"{k},{v}")
    else:
        print(json.dumps(report, indent=2))


def cmd_project(args, cfg) -> int:
    c = _read_curve(args.curve, cfg)
    h = io.read_field(args.field, c.n)
    if cfg["splitting"] == "arc0":
        c, (h,) = _constant_speed(c, [h], cfg, "project")
    s = make_splitting(c, cfg["splitting"])
    first, second = s.project(h)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for label, part in zip(s.labels, (first, second)):
        target = out / f"{label.lower()}.csv"
        io.write_field(target, part)
        written.append(str(target))
    _emit({"splitting": s.name, "files": written} if args.format == "json"
          else {label.lower(): p for label, p in zip(s.labels, written)}, args.format)
    return EXIT_OK


def cmd_metric(args, cfg) -> int:
    recipe = cfg["recipe_obj"]
    c = _read_curve(args.curve, cfg)
    h = io.read_field(args.field, c.n)
    k = io.read_field(args.field2, c.n) if args.field2 else h
    if recipe.needs_constant_speed:
        c, (h, k) = _constant_speed(c, [h, k], cfg, "metric")
    value = evaluate(Metric(recipe.build(c), c, str(recipe)), h, k)
    print(f"{value:.12g}")
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    recipe = cfg["recipe_obj"]
    c = _read_curve(args.curve, cfg)
    if recipe.needs_constant_speed or cfg["splitting"] == "arc0":
        c, _ = _constant_speed(c, [], cfg, "verify")
    g = Metric(recipe.build(c), c, str(recipe))
    s = make_splitting(c, cfg["splitting"])
    report = verify_metric(g, s, cfg["tolerances"], seed=cfg["seed"])
    _emit(report.as_dict(), args.format)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_geodesic(args, cfg) -> int:
    if args.m < 3:
        raise UsageError(f"--m must be at least 3, got {args.m}")
    recipe = cfg["recipe_obj"]
    c0 = _read_curve(args.curve, cfg)
    c1 = _read_curve(args.curve2, cfg)
    if recipe.needs_constant_speed or cfg["splitting"] == "arc0":
        c0, _ = _constant_speed(c0, [], cfg, "geodesic start")
        c1, _ = _constant_speed(c1, [], cfg, "geodesic end")
    res = horizontal_geodesic(c0, c1, args.m, recipe, cfg["splitting"],
                              tol=cfg["tolerances"]["geodesic"], max_iters=args.max_iters)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_path(out / "path.json", res.path)
    io.write_diagnostics(out / "diagnostics.csv", res.diagnostics)
    _emit({"energy": res.energy, "iterations": res.iterations, "converged": res.converged,
           "reason": res.reason}, args.format)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", required=True, help="curve JSON file")
    common.add_argument("--recipe", help="operator recipe, e.g. 'sobolev(1,[1,1])'")
    common.add_argument("--splitting", help="tan_nor or arc0")
    common.add_argument("--scheme", help="derivative scheme: central or spectral")
    common.add_argument("--seed", type=int, help="seed for sampled checks (default 0)")
    common.add_argument("--strict", action="store_true",
                        help="fail instead of resampling non constant-speed curves")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    for name in TOL_NAMES:
        common.add_argument(f"--tol.{name}", dest=f"tol_{name}", type=float, metavar="TOL")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="curvemetrics", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", parents=[common], help="split a field into its two parts")
    p.add_argument("--field", required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("metric", parents=[common], help="evaluate G(h, k)")
    p.add_argument("--field", required=True, help="h")
    p.add_argument("--field2", help="k (defaults to h)")
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("verify", parents=[common], help="orthogonality/decomposition report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("geodesic", parents=[common], help="horizontal path straightening")
    p.add_argument("--curve2", required=True, help="end curve JSON file")
    p.add_argument("--m", type=int, default=16, help="number of curves on the path")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_geodesic)
    return parser


def exit_code(exc: Exception) -> int:
    # everything else (bad files, recipes, grids, flags) is a usage error
    if isinstance(exc, (NotConstantSpeed, NotSymmetricPositive, NonPositiveCoefficient)):
        return EXIT_PRECONDITION
    if isinstance(exc, (NotImmersed, NotADiffeo)):
        return EXIT_DEGENERATE
    return EXIT_USAGE


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = _resolve(args)
        return args.func(args, cfg)
    except (CurveMetricsError, OSError, ValueError) as exc:
        code = exit_code(exc)
        msg = " ".join(str(exc).split())
        print(f"curvemetrics: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
