"""Command-line surface.

Subcommands: ``sweep`` (grid Monte Carlo), ``ratio`` (eigenvalue/diagonal
ratio experiment), ``certify`` (one-shot instance certification), ``eig``
(spectrum of a matrix file), and ``tail`` (threshold margins and exact tail
probabilities). Exit codes: 0 success, 1 configuration error, 2 I/O error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import __version__
from .certificates import (
    certify_sbm,
    certify_z2sync,
    connectivity_spectral,
    connectivity_unionfind,
    flip_oracle_sbm,
    flip_oracle_z2,
)
from .eig import SymmetricMatrix, eigendecompose
from .ensembles import derive_stream, sample_er, sample_sbm, sample_z2sync_er, sample_z2sync_gaussian
from .errors import ConfigError, IoError, NonConvergence
from .sweeps import EXPERIMENTS, SweepConfig, run_sweep
from .tails import (
    ThresholdQuery,
    bernoulli_diff_tail,
    bernoulli_diff_tail_mc,
    threshold_margin,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    """Argument parser that raises instead of exiting."""

    def error(self, message):
        raise ConfigError(message)


def _parse_grid(text) -> list:
    """Grid syntax: single value, comma list, or inclusive start:stop:step."""
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("grid step must be positive")
        values = []
        v = start
        snap = 1e-9 * max(1.0, abs(stop))
        while v <= stop + snap:
            values.append(v)
            v = start + len(values) * step
        return values
    if "," in text:
        return [float(p) for p in text.split(",") if p.strip()]
    return [float(text)]


def _build_parser() -> _Parser:
    parser = _Parser(prog="lapcert", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    common = {
        "--seed": dict(type=int, default=None, help="master seed"),
        "--trials": dict(type=int, default=None, help="trials per cell"),
        "--out": dict(default=None, help="CSV output path"),
        "--config": dict(default=None, help="JSON config file (flags override)"),
        "--workers": dict(type=int, default=None, help="parallel workers"),
    }

    sweep = sub.add_parser("sweep", help="run a grid Monte Carlo sweep")
    sweep.add_argument("--experiment", choices=EXPERIMENTS, default=None)
    for flag in ("--n", "--p", "--q", "--rho", "--alpha", "--beta", "--sigma",
                 "--sigma-factor", "--eps", "--t-factor"):
        sweep.add_argument(flag, default=None, help="grid (value, list, or a:b:step)")
    sweep.add_argument("--ensemble", default=None)
    sweep.add_argument("--rank-k", type=int, default=None)
    sweep.add_argument("--tau", type=float, default=None)
    sweep.add_argument("--cross-check", action="store_true", default=None)
    for flag, kw in common.items():
        sweep.add_argument(flag, **kw)

    ratio = sub.add_parser("ratio", help="largest-eigenvalue ratio experiment")
    ratio.add_argument("--ensemble", default=None)
    for flag in ("--n", "--p", "--rho", "--alpha", "--beta"):
        ratio.add_argument(flag, default=None)
    for flag, kw in common.items():
        ratio.add_argument(flag, **kw)

    certify = sub.add_parser("certify", help="certify one sampled instance")
    certify.add_argument("--model", choices=("er", "sbm", "z2er", "z2gauss"),
                         required=True)
    certify.add_argument("--n", type=int, required=True)
    for flag in ("--p", "--q", "--sigma", "--eps"):
        certify.add_argument(flag, type=float, default=None)
    certify.add_argument("--seed", type=int, default=0)

    eig = sub.add_parser("eig", help="print the spectrum of a matrix file")
    eig.add_argument("matrix", help="text file: first line n, then n rows")
    eig.add_argument("--vectors", action="store_true")

    tail = sub.add_parser("tail", help="threshold margins and tail values")
    tail.add_argument("--model", choices=("er", "sbm", "z2er", "z2gauss"),
                      default=None)
    tail.add_argument("--n", type=int, default=None)
    for flag in ("--p", "--q", "--sigma", "--eps", "--alpha", "--beta",
                 "--rho", "--cap-k", "--delta"):
        tail.add_argument(flag, type=float, default=None)
    tail.add_argument("--m", type=int, default=None,
                      help="evaluate the exact Bernoulli-difference tail")
    tail.add_argument("--mc-trials", type=int, default=None,
                      help="cross-check the exact tail by Monte Carlo")
    tail.add_argument("--seed", type=int, default=0)
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    """File values under CLI ones; keys are kebab-case long flag names."""
    merged = {}
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path, "r", encoding="utf-8") as f:
                merged.update(json.load(f))
        except OSError as exc:
            raise IoError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON in {path}: {exc}") from exc
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None:
            merged[key.replace("_", "-")] = value
    return merged


def _sweep_config(opts: dict, experiment: Optional[str] = None) -> SweepConfig:
    exp = experiment or opts.get("experiment")
    if exp is None:
        raise ConfigError("--experiment is required")
    if "n" not in opts:
        raise ConfigError("--n is required")
    n_grid = [int(round(v)) for v in _parse_grid(opts["n"])]
    grids = {}
    axis_order = {
        "er": ("rho", "p"),
        "sbm": ("alpha", "beta", "p", "q"),
        "z2gauss": ("sigma", "sigma-factor"),
        "z2er": ("p", "rho", "eps"),
        "ratio": ("rho", "p", "alpha", "beta"),
        "normbound": ("p", "t-factor"),
    }.get(exp, ())
    for axis in axis_order:
        if opts.get(axis) is not None:
            grids[axis.replace("-", "_")] = _parse_grid(opts[axis])
    return SweepConfig(
        experiment=exp,
        n=n_grid,
        grids=grids,
        trials=int(opts.get("trials") or 1),
        master_seed=int(opts.get("seed") or 0),
        out_path=opts.get("out"),
        ensemble=opts.get("ensemble"),
        rank_k=opts.get("rank-k"),
        tau=opts.get("tau"),
        cross_check=bool(opts.get("cross-check")),
        workers=int(opts.get("workers") or 1),
    )


def _print_report(kind: str, report, extra: str = "") -> None:
    print(f"model {kind}")
    print(f"lambda1 {report.lambda1:.9g}")
    print(f"lambda2 {report.lambda2:.9g}")
    print(f"margin {report.margin:.9g}")
    print(f"tight {int(report.tight)}")
    if extra:
        print(extra)


def _cmd_certify(args: argparse.Namespace) -> int:
    rng = derive_stream(args.seed, 0)
    n = args.n
    if args.model == "er":
        if args.p is None:
            raise ConfigError("--p is required for er")
        g = sample_er(n, args.p, rng)
        spectral = connectivity_spectral(g)
        exact = connectivity_unionfind(g)
        print(f"connected_spectral {int(spectral)}")
        print(f"connected_unionfind {int(exact)}")
        return EXIT_OK
    if args.model == "sbm":
        if args.p is None or args.q is None:
            raise ConfigError("--p and --q are required for sbm")
        g = sample_sbm(n, args.p, args.q, rng)
        rep = certify_sbm(g)
        verdict = flip_oracle_sbm(g)
        _print_report("sbm", rep, f"oracle_min_stat {verdict.min_stat:.9g}")
        return EXIT_OK
    z = np.ones(n)
    if args.model == "z2er":
        if args.p is None or args.eps is None:
            raise ConfigError("--p and --eps are required for z2er")
        inst = sample_z2sync_er(n, args.p, args.eps, z, rng)
        rep = certify_z2sync(inst)
        verdict = flip_oracle_z2(inst)
        _print_report("z2er", rep, f"oracle_min_stat {verdict.min_stat:.9g}")
        return EXIT_OK
    if args.sigma is None:
        raise ConfigError("--sigma is required for z2gauss")
    inst = sample_z2sync_gaussian(n, args.sigma, z, rng)
    rep = certify_z2sync(inst)
    _print_report("z2gauss", rep)
    return EXIT_OK


def _read_matrix(path: str) -> SymmetricMatrix:
    try:
        with open(path, "r", encoding="utf-8") as f:
            tokens = f.read().split()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not tokens:
        raise ConfigError(f"{path}: empty matrix file")
    try:
        n = int(tokens[0])
        values = [float(t) for t in tokens[1:]]
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if n < 1 or len(values) != n * n:
        raise ConfigError(f"{path}: expected {n}x{n} entries after the header")
    a = np.array(values).reshape(n, n)
    asym = float(np.max(np.abs(a - a.T))) if n > 1 else 0.0
    if asym > 1e-9:
        print(f"warning: asymmetry {asym:.3g} exceeds 1e-9; averaging with "
              "the transpose", file=sys.stderr)
    return SymmetricMatrix(a, symmetrize=True)


def _cmd_eig(args: argparse.Namespace) -> int:
    m = _read_matrix(args.matrix)
    spec = eigendecompose(m, want_vectors=args.vectors)
    for lam in spec.eigenvalues:
        print(format(float(lam), ".12g"))
    if args.vectors:
        print(f"residual {spec.residual:.3g}", file=sys.stderr)
    return EXIT_OK


def _cmd_tail(args: argparse.Namespace) -> int:
    printed = False
    if args.m is not None:
        if args.p is None or args.q is None or args.delta is None:
            raise ConfigError("--m needs --p, --q, and --delta")
        exact = bernoulli_diff_tail(args.m, args.p, args.q, args.delta)
        print(f"t_exact {exact:.12g}")
        if args.mc_trials:
            est, se = bernoulli_diff_tail_mc(
                args.m, args.p, args.q, args.delta, args.mc_trials,
                derive_stream(args.seed, 0),
            )
            print(f"t_mc {est:.9g}")
            print(f"t_mc_se {se:.3g}")
        printed = True
    if args.model is not None:
        query = _tail_query(args)
        print(f"margin {threshold_margin(query):.9g}")
        printed = True
    if not printed:
        raise ConfigError("tail needs --model and/or --m")
    return EXIT_OK


def _tail_query(args: argparse.Namespace) -> ThresholdQuery:
    if args.model == "er":
        if args.rho is None:
            raise ConfigError("--rho is required for er")
        return ThresholdQuery("er_connectivity", {"rho": args.rho})
    if args.model == "sbm":
        if args.alpha is None or args.beta is None:
            raise ConfigError("--alpha and --beta are required for sbm")
        return ThresholdQuery("sbm", {"alpha": args.alpha, "beta": args.beta})
    if args.model == "z2gauss":
        if args.n is None or args.sigma is None:
            raise ConfigError("--n and --sigma are required for z2gauss")
        return ThresholdQuery("z2_gaussian", {"n": args.n, "sigma": args.sigma})
    if args.n is None or args.p is None or args.eps is None:
        raise ConfigError("--n, --p, and --eps are required for z2er")
    params = {"n": args.n, "p": args.p, "eps": args.eps}
    if args.cap_k is not None:
        params["K"] = args.cap_k
    if args.delta is not None:
        params["delta"] = args.delta
    return ThresholdQuery("z2_er", params)


def cli_main(argv) -> int:
    """Entry point; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError("a subcommand is required")
        if args.command == "sweep":
            run_sweep(_sweep_config(_merge_config(args)))
            return EXIT_OK
        if args.command == "ratio":
            run_sweep(_sweep_config(_merge_config(args), experiment="ratio"))
            return EXIT_OK
        if args.command == "certify":
            return _cmd_certify(args)
        if args.command == "eig":
            return _cmd_eig(args)
        return _cmd_tail(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    except IoError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NonConvergence as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:  # pragma: no cover - thin shim
    sys.exit(cli_main(sys.argv[1:]))
