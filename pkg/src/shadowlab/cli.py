"""Command line entry point: ``shadowlab <command> [options]``."""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import construction, experiments
from .errors import ConfigError, InvalidK, ParseError, ShadowLabError
from .polytope import HPolytope, load

EXACT_K_LIMIT = 20


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment; keys may use
    dashes or underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_CONVERTERS = {
    "k": _int_list, "sigma_start": float, "sigma_end": float, "sigma_count": int,
    "sigmas": _float_list, "trials": int, "seed": int, "method": str, "dedup_tol": float,
    "out": str, "workers": int, "layout": str, "n": int,
    "drop_s_bounds": lambda v: v.lower() in ("1", "true", "yes"),
    "half_angle_frames": lambda v: v.lower() in ("1", "true", "yes"),
    "no_runtime": lambda v: v.lower() in ("1", "true", "yes"),
}


def _experiment_config(args, command: str) -> experiments.ExperimentConfig:
    values = {}
    if args.config:
        for key, raw in read_config_file(args.config).items():
            if key not in _CONVERTERS:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _CONVERTERS[key](raw)
    for key in _CONVERTERS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            values[key] = v
    cfg = experiments.ExperimentConfig(command=command)
    mapping = {"k": "k_list", "seed": "master_seed"}
    updates = {}
    for key, v in values.items():
        if key == "no_runtime":
            updates["record_runtime"] = not v
        else:
            updates[mapping.get(key, key)] = v
    return replace(cfg, **updates).validate()


def _add_experiment_flags(p: argparse.ArgumentParser, *, lb: bool):
    p.add_argument("--config", help="key=value file; command line flags override it")
    if lb:
        p.add_argument("--k", type=_int_list, help="one or more levels, e.g. '4' or '2,3,4'")
        p.add_argument("--method", choices=experiments.METHODS)
        p.add_argument("--dedup-tol", dest="dedup_tol", type=float)
        p.add_argument("--drop-s-bounds", dest="drop_s_bounds", action="store_true",
                       help="omit the two bound rows on s (4k+5 rows)")
        p.add_argument("--half-angle-frames", dest="half_angle_frames", action="store_true",
                       help="fold lines at pi/2^(i+2) instead of pi/2^(i+1)")
        p.add_argument("--exact-mode", dest="exact_mode", choices=("auto", "on", "off"), default=None,
                       help="accepted for symmetry with verify; sweeps are float")
    else:
        p.add_argument("--layout", choices=("circle", "single_point"))
        p.add_argument("--n", type=int)
    p.add_argument("--sigma-start", dest="sigma_start", type=float)
    p.add_argument("--sigma-end", dest="sigma_end", type=float)
    p.add_argument("--sigma-count", dest="sigma_count", type=int)
    p.add_argument("--sigmas", type=_float_list, help="explicit sigma list (overrides the grid)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-runtime", dest="no_runtime", action="store_true",
                   help="leave runtime_ms empty so reruns are byte-identical")
    p.add_argument("--out", help="CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shadowlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="write the primal and dual instance files")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--drop-s-bounds", dest="drop_s_bounds", action="store_true")
    p.add_argument("--half-angle-frames", dest="half_angle_frames", action="store_true")

    p = sub.add_parser("verify", help="check the radius and duality facts of the construction")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--angle-samples", dest="angle_samples", type=int, default=1024)
    p.add_argument("--exact-mode", dest="exact_mode", choices=("auto", "on", "off"), default="auto")
    p.add_argument("--instance", help="shifted primal file to check instead of the built one")
    p.add_argument("--half-angle-frames", dest="half_angle_frames", action="store_true")
    p.add_argument("--out", help="report path (default: stdout)")

    _add_experiment_flags(sub.add_parser("experiment-lb", help="shadow sizes of the perturbed construction"), lb=True)
    _add_experiment_flags(sub.add_parser("experiment-2d", help="hull sizes of perturbed planar layouts"), lb=False)
    return parser


def cmd_construct(args) -> int:
    hp, dp = experiments.construct_files(args.k, args.out, drop_s_bounds=args.drop_s_bounds,
                                         half_angle_frames=args.half_angle_frames)
    print(hp)
    print(dp)
    return 0


def cmd_verify(args) -> int:
    if args.k > EXACT_K_LIMIT:
        raise ConfigError(f"k={args.k} exceeds the supported limit {EXACT_K_LIMIT}")
    params = construction.ConstructionParams(args.k, args.half_angle_frames)
    shifted = None
    if args.instance:
        obj = load(args.instance)
        if not isinstance(obj, HPolytope):
            raise ParseError(f"{args.instance}: expected an hpoly file")
        if obj.d != params.d:
            raise ParseError(f"{args.instance}: dimension {obj.d} does not match k={args.k}")
        shifted = obj.as_float()
    exact = {"auto": None, "on": True, "off": False}[args.exact_mode]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = construction.verify_radii(params, args.angle_samples, exact=exact, shifted=shifted)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    text = "\n".join(report.lines()) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if report.passed else 1


def cmd_experiment_lb(args) -> int:
    cfg = _experiment_config(args, "experiment-lb")
    rows = experiments.run_lb_grid(cfg)
    _emit(rows, experiments.LB_COLUMNS, cfg.out)
    return 0


def cmd_experiment_2d(args) -> int:
    cfg = _experiment_config(args, "experiment-2d")
    rows = experiments.run_2d_grid(cfg)
    _emit(rows, experiments.TWO_D_COLUMNS, cfg.out)
    return 0


def _emit(rows, columns, out):
    if out:
        experiments.write_csv(rows, columns, out)
    else:
        sys.stdout.write(experiments.format_csv(rows, columns))


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify,
            "experiment-lb": cmd_experiment_lb, "experiment-2d": cmd_experiment_2d}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InvalidK, ConfigError, ParseError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ShadowLabError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
