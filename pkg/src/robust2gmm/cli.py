"""Command-line interface: ``robust2gmm {gen,estimate,bench,sensitivity,check}``.

Exit status is 0 on success, 1 when an input fails validation and 2 when a
file cannot be read or written.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dataio
from .agnostic import AgnosticConfig
from .baseline_em import EmConfig, estimate_em
from .bench import (
    AGGREGATE_COLUMNS,
    RECORD_COLUMNS,
    SENSITIVITY_COLUMNS,
    BenchmarkConfig,
    default_model,
    run_benchmark,
    run_sensitivity,
)
from .errors import EstimationError, InvalidConfig, ParseError
from .gmm2 import Alg1Config, estimate_alg1
from .model import MixtureModel, validate_model
from .synthdata import GenerationConfig, NoiseModel, generate
from .theory import (
    SeparationParams,
    check_nonspherical_separation,
    check_spherical_separation,
    sample_complexity,
    spherical_scale,
)

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


# ---------------------------------------------------------------- config file

def _floats(v: str) -> tuple:
    return tuple(float(x) for x in v.split(",") if x.strip())


def _ints(v: str) -> tuple:
    return tuple(int(x) for x in v.split(",") if x.strip())


def _bool(v: str) -> bool:
    if v.lower() in ("1", "true", "yes"):
        return True
    if v.lower() in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


_CONFIG_KEYS = {
    "m": int,
    "dims": _ints,
    "reps": int,
    "methods": lambda v: tuple(x.strip() for x in v.split(",") if x.strip()),
    "seed": int,
    "weights": _floats,
    "separation_factor": float,
    "alpha_grid": _floats,
    "allocation": str,
    "model": str,
    "noise": str,
    "noise_scale": float,
    "noise_point": _floats,
    "epsilon": float,
    "damping_c": float,
    "em_reg": float,
    "em_max_iters": int,
    "em_tol": float,
    "em_init": str,
    "record_runtime": _bool,
}


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Returns typed values."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in out:
            raise ParseError(f"duplicate key {key!r}", lineno)
        try:
            out[key] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ParseError(f"bad value for {key}: {exc}", lineno) from exc
    return out


def _noise(kind: str, scale: float = 1.0, point=None) -> NoiseModel:
    if kind == "cauchy":
        return NoiseModel.cauchy(scale)
    if kind == "point_mass":
        if point is None:
            raise InvalidConfig("point_mass noise needs noise_point")
        return NoiseModel.point_mass(point)
    raise InvalidConfig(f"unknown noise kind {kind!r}")


def load_model(path) -> MixtureModel:
    model = MixtureModel.from_dict(dataio.read_json(path))
    validate_model(model)
    return model


def config_from_dict(d: dict, base_dir: Path = Path(".")) -> BenchmarkConfig:
    kw = {}
    for key in ("m", "dims", "reps", "methods", "seed", "weights", "separation_factor", "alpha_grid",
                "allocation", "record_runtime"):
        if key in d:
            kw[key] = d[key]
    if "model" in d:
        model = load_model(base_dir / d["model"])
        kw["model"] = model
        kw.setdefault("dims", (model.dim,))
    kw["noise"] = _noise(d.get("noise", "cauchy"), d.get("noise_scale", 1.0), d.get("noise_point"))
    agn = {k: d[k] for k in ("epsilon", "damping_c") if k in d}
    kw["agnostic"] = AgnosticConfig(**agn)
    em = {}
    for src, dst in (("em_reg", "reg"), ("em_max_iters", "max_iters"), ("em_tol", "tol"), ("em_init", "init")):
        if src in d:
            em[dst] = d[src]
    kw["em"] = EmConfig(**em)
    return BenchmarkConfig(**kw)


def load_config(path) -> BenchmarkConfig:
    path = Path(path)
    return config_from_dict(parse_config_text(path.read_text()), path.parent)


# ---------------------------------------------------------------- commands

def cmd_gen(args) -> None:
    model = load_model(args.model) if args.model else default_model(args.n, tuple(args.weights), args.separation_factor)
    noise = _noise(args.noise, args.noise_scale, args.noise_point)
    cfg = GenerationConfig(model, args.m, noise, args.seed, args.allocation)
    ds = generate(cfg)
    echo = {
        "command": "gen",
        "model": model.to_dict(),
        "m": args.m,
        "seed": args.seed,
        "allocation": cfg.allocation.value,
        "noise": noise.describe(),
        "substreams": "default_rng([seed, k]); k=0 counts, 1 G1, 2 G2, 3 noise, 4 shuffle",
    }
    dataio.write_dataset(args.out, ds, echo)


def cmd_estimate(args) -> None:
    ds = dataio.read_dataset(args.input)
    agn = AgnosticConfig(epsilon=args.epsilon, damping_c=args.damping_c)
    if args.method == "alg1":
        if args.w1 is None:
            raise InvalidConfig("--w1 is required for alg1")
        cfg = Alg1Config(args.w1, agn)
        res = estimate_alg1(ds.points, cfg)
        echo = {"method": "alg1"} | cfg.echo()
    else:
        cfg = EmConfig(seed=args.seed, reg=args.em_reg, max_iters=args.em_max_iters)
        res = estimate_em(ds.points, cfg)
        echo = {"method": "em"} | cfg.echo()
    echo |= {"command": "estimate", "input": str(args.input), "m": ds.m, "n": ds.dim, "labels_present": ds.labels is not None}
    dataio.write_result(args.out, res, echo)


def cmd_bench(args) -> None:
    cfg = load_config(args.config)
    if args.reps is not None:
        cfg = replace(cfg, reps=args.reps)
    records, agg = run_benchmark(cfg)
    echo = {"command": "bench"} | cfg.echo()
    cols = RECORD_COLUMNS + (["runtime_ms"] if cfg.record_runtime else [])
    dataio.write_table(args.records, cols, [r.row() for r in records], echo)
    dataio.write_table(args.aggregate, AGGREGATE_COLUMNS, agg, echo)


def cmd_sensitivity(args) -> None:
    cfg = load_config(args.config)
    if args.reps is not None:
        cfg = replace(cfg, reps=args.reps)
    records, rows = run_sensitivity(cfg)
    echo = {"command": "sensitivity"} | cfg.echo()
    dataio.write_table(args.out, SENSITIVITY_COLUMNS, rows, echo)
    if args.records:
        dataio.write_table(args.records, RECORD_COLUMNS, [r.row() for r in records], echo)


def cmd_check(args) -> None:
    model = load_model(args.model)
    params = SeparationParams(model, args.eta, m=args.m)
    kind = args.kind
    if kind == "auto":
        kind = "spherical" if spherical_scale(model.sigma) is not None else "nonspherical"
    report = check_spherical_separation(params) if kind == "spherical" else check_nonspherical_separation(params)
    out = report.to_dict()
    out["sample_complexity"] = {
        "epsilon": args.epsilon,
        "constants": "all hidden constants = 1",
        "terms": sample_complexity(model.dim, args.epsilon, *model.weights, spherical=kind == "spherical"),
    }
    out["config_echo"] |= {"command": "check", "kind": kind, "epsilon": args.epsilon}
    dataio.write_json(args.out, out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robust2gmm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a dataset to CSV")
    g.add_argument("--out", required=True)
    g.add_argument("--model", help="model JSON; default is the benchmark model for --n")
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--m", type=int, default=2000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--weights", type=float, nargs=3, default=(0.8, 0.16, 0.04))
    g.add_argument("--separation-factor", type=float, default=4.0)
    g.add_argument("--allocation", choices=["multinomial", "exact_counts"], default="multinomial")
    g.add_argument("--noise", choices=["cauchy", "point_mass"], default="cauchy")
    g.add_argument("--noise-scale", type=float, default=1.0)
    g.add_argument("--noise-point", type=float, nargs="+")
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("estimate", help="estimate both means from a CSV")
    e.add_argument("--input", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--method", choices=["alg1", "em"], default="alg1")
    e.add_argument("--w1", type=float)
    e.add_argument("--epsilon", type=float, default=AgnosticConfig.epsilon)
    e.add_argument("--damping-c", type=float, default=AgnosticConfig.damping_c)
    e.add_argument("--seed", type=int, default=0, help="EM initialisation seed")
    e.add_argument("--em-reg", type=float, default=EmConfig.reg)
    e.add_argument("--em-max-iters", type=int, default=EmConfig.max_iters)
    e.set_defaults(func=cmd_estimate)

    b = sub.add_parser("bench", help="run an error-table campaign")
    b.add_argument("--config", required=True)
    b.add_argument("--records", required=True)
    b.add_argument("--aggregate", required=True)
    b.add_argument("--reps", type=int)
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("sensitivity", help="sweep the reported w1 over an alpha grid")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--records")
    s.add_argument("--reps", type=int)
    s.set_defaults(func=cmd_sensitivity)

    c = sub.add_parser("check", help="evaluate the separation conditions for a model")
    c.add_argument("--model", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--eta", type=float, default=0.1)
    c.add_argument("--epsilon", type=float, default=0.1)
    c.add_argument("--m", type=int)
    c.add_argument("--kind", choices=["auto", "spherical", "nonspherical"], default="auto")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (EstimationError, KeyError, TypeError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
