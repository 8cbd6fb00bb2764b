"""Batch command-line front end: `piltz <command> ...` or `python -m piltz ...`."""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import divisor_core as dc
from . import exponent_pairs as ep
from . import meansquare as ms
from . import voronoi_contour as vc
from .errors import ConvergenceError, DomainError, PiltzError, ResourceLimitError
from .records import ResidualRecord, records_to_csv, records_to_json

EXIT_INVALID, EXIT_RESOURCE, EXIT_CONVERGENCE = 1, 2, 3


class ConfigError(DomainError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    points: int = 1
    log: bool = False

    def __post_init__(self):
        if self.points < 1:
            raise ConfigError("grid needs at least one point")
        if self.stop < self.start:
            raise ConfigError("grid stop < start")
        if self.log and self.start <= 0:
            raise ConfigError("log grid needs start > 0")

    def values(self) -> list[float]:
        if self.points == 1:
            return [self.start]
        if self.log:
            return [float(v) for v in np.geomspace(self.start, self.stop, self.points)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.points)]


@dataclass(frozen=True)
class RunConfig:
    command: str
    k: int | None = None
    grid: GridSpec | None = None
    n_policy: str = "fixed"
    N: int = 0
    eta: float = 0.01
    delta: float | None = None
    radius: float = 0.1
    fmt: str = "csv"
    output: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.n_policy not in ("fixed", "equal", "sqrt"):
            raise ConfigError(f"unknown N policy {self.n_policy!r}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if self.N < 0:
            raise ConfigError("--N must be >= 0")

    def N_for(self, x: float) -> int:
        if self.n_policy == "equal":
            return int(math.floor(x))
        if self.n_policy == "sqrt":
            return math.isqrt(int(math.floor(x)))
        return self.N

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("output")
        d.pop("threads")
        return d


# ---------------------------------------------------------------------------
# table cache
# ---------------------------------------------------------------------------

def cache_dir() -> Path:
    return Path(os.environ.get("PILTZ_CACHE", "./.piltz-cache"))


def get_table(k: int, N: int, workers: int = 1) -> dc.DivisorTable:
    N = max(int(N), 1)
    path = cache_dir() / f"d{k}_{N}.pltz"
    if path.exists():
        t = dc.load_table(path)
        if t.k == k and t.limit == N:
            return t
    t = dc.build_divisor_table(k, N, workers=workers)
    try:
        dc.save_table(t, path)
    except OSError:
        pass  # cache is best effort
    return t


# ---------------------------------------------------------------------------
# record producers
# ---------------------------------------------------------------------------

def _value(k, x, N, v):
    return ResidualRecord.build(k, x, N, v, 0.0, 1.0)


def _grid_records(cfg: RunConfig, fn, limit_of):
    xs = cfg.grid.values()
    limit = max(limit_of(x) for x in xs)
    table = get_table(cfg.k, limit, cfg.threads)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(lambda x: fn(table, x), xs))
    return [fn(table, x) for x in xs]


def _floor(x):
    return int(math.floor(x))


def _params(cfg, x):
    return vc.VoronoiParams(cfg.k, x, cfg.N_for(x), cfg.eta, cfg.delta)


def produce(cfg: RunConfig) -> list[ResidualRecord]:
    c = cfg.command
    k = cfg.k
    if c == "sieve":
        t = get_table(k, cfg.N, cfg.threads)
        return [_value(k, t.limit, t.limit, float(t.prefix[-1]))]
    if c == "sum-dk":
        return _grid_records(cfg, lambda t, x: _value(k, x, 0, float(dc.summatory_dk(t, x))), _floor)
    if c == "delta":
        return _grid_records(cfg, lambda t, x: _value(k, x, 0, dc.delta_k(t, x)), _floor)
    if c == "sum-delta":
        return _grid_records(cfg, lambda t, x: _value(k, x, 0, dc.sum_delta(t, x)), _floor)
    if c == "integral-delta":
        return _grid_records(cfg, lambda t, x: _value(k, x, 0, dc.integral_delta(t, x)), _floor)
    if c == "segal":
        return _grid_records(cfg, dc.segal_residual, _floor)
    if c == "thm2-residual":
        return _grid_records(cfg, lambda t, x: vc.thm2_residual(_params(cfg, x), t),
                             lambda x: max(_floor(x), cfg.N_for(x)))
    if c == "integral-voronoi":
        return _grid_records(cfg, lambda t, x: vc.integral_delta_voronoi(_params(cfg, x), t),
                             lambda x: max(_floor(x), cfg.N_for(x)))
    if c == "lemma5-check":
        return _grid_records(cfg, lambda t, x: vc.lemma5_check(_params(cfg, x), t),
                             lambda x: cfg.N_for(x))
    if c == "residue-check":
        xs = cfg.grid.values()
        return [vc.residue_check(k, x, cfg.radius) for x in xs]
    if c == "mean-square":
        X = cfg.grid.start
        t = get_table(k, cfg.N, cfg.threads)
        r = ms.mean_square_V(k, X, cfg.N, t)
        return [ResidualRecord.build(k, X, cfg.N, r.value, r.leading_term(), r.leading_term())]
    if c == "second-moment":
        X = _floor(cfg.grid.start)
        t = get_table(k, X, cfg.threads)
        return [ms.second_moment_integral(k, X, t)]
    raise ConfigError(f"unknown command {c!r}")


def emit(cfg: RunConfig, records) -> str:
    if cfg.fmt == "json":
        return records_to_json(records, __version__, cfg.as_dict())
    return records_to_csv(records, header=f"piltz {__version__}")


# ---------------------------------------------------------------------------
# exponent-pair subcommands (plain text, rationals as p/q)
# ---------------------------------------------------------------------------

def run_ep(args) -> str:
    sub = args.ep_command
    if sub == "reduce":
        seed = ep.pair(ep.as_fraction(args.seed[0]), ep.as_fraction(args.seed[1]))
        return str(ep.reduce_word(args.word, seed)) + "\n"
    if sub == "theta4":
        return f"{ep.theta4(args.rho)}\n"
    if sub == "minimax":
        sets = {"bourgain": ep.bourgain_strategies, "trudgian-yang": ep.trudgian_yang_strategies,
                "hypothesis": ep.hypothesis_strategies}
        r = ep.minimax_critical_exponent(sets[args.set]())
        lines = [f"value {r.value}", f"theta {r.theta}", f"a {r.a}", f"m {r.m}", f"region {r.region}"]
        lines += [f"strategy {name} {val}" for name, val in r.per_strategy.items()]
        return "\n".join(lines) + "\n"
    if sub == "probe":
        val = ep.exp_sum_probe(args.x, args.n1, args.n2, args.M)
        rec = ResidualRecord.build(3, args.x, args.M, val, 0.0, args.M ** (27 / 28))
        return records_to_csv([rec], header=f"piltz {__version__}")
    raise ConfigError(f"unknown ep command {sub!r}")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

_GRID_COMMANDS = ("sum-dk", "delta", "sum-delta", "integral-delta", "segal", "thm2-residual",
                  "integral-voronoi", "lemma5-check", "residue-check")


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _integer(text: str) -> int:
    v = _number(text)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="piltz", description="Piltz divisor problem laboratory.")
    p.add_argument("--version", action="version", version=f"piltz {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, k_choices=(2, 3, 4)):
        sp.add_argument("--k", type=int, choices=k_choices, required=True)
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        sp.add_argument("--output", "-o")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    s = sub.add_parser("sieve", help="build and cache a d_k table")
    common(s)
    s.add_argument("--N", type=_integer, required=True)

    for name in _GRID_COMMANDS:
        kc = (3, 4) if name in ("segal", "thm2-residual", "integral-voronoi", "lemma5-check",
                                "residue-check") else (2, 3, 4)
        s = sub.add_parser(name)
        common(s, kc)
        g = s.add_mutually_exclusive_group(required=True)
        g.add_argument("--x", type=_number)
        g.add_argument("--x-grid", nargs=3, metavar=("START", "STOP", "POINTS"))
        s.add_argument("--log", action="store_true", help="geometric x grid")
        if name in ("thm2-residual", "integral-voronoi", "lemma5-check"):
            s.add_argument("--N", type=_integer, default=0)
            s.add_argument("--N-policy", choices=("fixed", "equal", "sqrt"), default="fixed")
            s.add_argument("--eta", type=float, default=0.01)
            s.add_argument("--delta", type=float)
        if name == "residue-check":
            s.add_argument("--r", type=float, default=0.1)

    s = sub.add_parser("mean-square")
    common(s, (3, 4))
    s.add_argument("--X", type=_number, required=True)
    s.add_argument("--N", type=_integer, required=True)

    s = sub.add_parser("second-moment")
    common(s, (3, 4))
    s.add_argument("--X", type=_number, required=True)

    e = sub.add_parser("ep", help="exponent-pair calculator")
    esub = e.add_subparsers(dest="ep_command", required=True, parser_class=_Parser)
    r = esub.add_parser("reduce")
    r.add_argument("word")
    r.add_argument("--seed", nargs=2, default=("0", "1"), metavar=("KAPPA", "LAMBDA"))
    r = esub.add_parser("theta4")
    r.add_argument("--rho", required=True)
    r = esub.add_parser("minimax")
    r.add_argument("--set", choices=("bourgain", "trudgian-yang", "hypothesis"), default="trudgian-yang")
    r = esub.add_parser("probe")
    r.add_argument("--x", type=_number, required=True)
    r.add_argument("--n1", type=_integer, default=1)
    r.add_argument("--n2", type=_integer, default=1)
    r.add_argument("--M", type=_integer, required=True)
    return p


def config_from_args(args) -> RunConfig:
    grid = None
    if getattr(args, "x", None) is not None:
        grid = GridSpec(args.x, args.x)
    elif getattr(args, "x_grid", None):
        a, b, n = args.x_grid
        grid = GridSpec(_number(a), _number(b), _integer(n), args.log)
    elif getattr(args, "X", None) is not None:
        grid = GridSpec(args.X, args.X)
    return RunConfig(
        command=args.command, k=args.k, grid=grid,
        n_policy=getattr(args, "N_policy", "fixed"), N=getattr(args, "N", 0) or 0,
        eta=getattr(args, "eta", 0.01), delta=getattr(args, "delta", None),
        radius=getattr(args, "r", 0.1), fmt=args.fmt, output=args.output, threads=args.threads,
    )


def _fail(code: int, kind: str, msg: str) -> int:
    msg = " ".join(str(msg).split())
    print(f"piltz: error={kind} exit={code} reason={msg}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "ep":
            text = run_ep(args)
            out_path = None
        else:
            cfg = config_from_args(args)
            text = emit(cfg, produce(cfg))
            out_path = cfg.output
        if out_path:
            Path(out_path).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    except ResourceLimitError as exc:
        return _fail(EXIT_RESOURCE, "resource_limit", exc)
    except ConvergenceError as exc:
        return _fail(EXIT_CONVERGENCE, "no_convergence", exc)
    except (DomainError, PiltzError) as exc:
        return _fail(EXIT_INVALID, "invalid_config", exc)


if __name__ == "__main__":
    sys.exit(main())
