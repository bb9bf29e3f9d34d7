"""Command-line interface.

Exit status: 0 on success, 1 for usage or configuration errors, 2 when a
numeric check or search fails.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import os
import sys
from typing import Sequence

import numpy as np

from . import bench, cost, search
from .evaluator import HamiltonianTerms, apply_method, exact_evolution, operator_error, pauli_error, spin_terms
from .lie import random_antihermitian
from .methods import LABELS, Method, MethodSyntaxError, parse_method, print_method, sigma_all

SEED_ENV = "PRODFORM_SEED"
SEARCH_HEADER = ("method", "order", "D", "L", "R", "Z", "inverses")


class UsageError(Exception):
    """Bad arguments or configuration (exit status 1)."""


class NumericFailure(Exception):
    """A check or search did not succeed (exit status 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment line."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_string("[config]\n" + fh.read(), source=path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise UsageError(f"malformed config {path}: {exc}") from exc
    return dict(parser["config"])


def _get(cfg: dict[str, str], key: str, kind, default=None):
    if key not in cfg:
        return default
    raw = cfg[key]
    try:
        if kind is tuple:
            return tuple(float(x) for x in raw.replace(",", " ").split())
        return kind(raw)
    except ValueError as exc:
        raise UsageError(f"bad value for {key!r}: {raw!r}") from exc


def _method(text: str) -> Method:
    text = text.strip()
    if text in bench.BUILTIN_STRINGS:
        return bench.builtin(text)
    try:
        return parse_method(text)
    except MethodSyntaxError as exc:
        raise UsageError(str(exc)) from exc


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    m = _method(args.method)
    sigma = sigma_all(m)
    metrics = cost.method_metrics(m, args.terms, tol=args.tol)
    print(f"method    {print_method(m)}")
    for x in LABELS:
        print(f"sigma[{x}]".ljust(14) + _fmt(sigma[x]))
    print(f"order     {metrics.order}")
    print(f"I         {metrics.I}")
    print(f"D         {_fmt(metrics.D)}")
    print(f"L         {_fmt(metrics.L)}")
    print(f"inverses  {metrics.inverses}")
    if metrics.order >= 1:
        print(f"R         {_fmt(metrics.R)}")
        print(f"Z         {_fmt(metrics.Z)}  (N = {args.terms})")
    if metrics.order < args.min_order:
        raise NumericFailure(f"order {metrics.order} is below the requested {args.min_order}")
    return 0


def _search_config(args) -> search.SearchConfig:
    raw = read_config(args.config)
    limits = search.StageLimits(
        multisets=_get(raw, "limit_multisets", int, search.StageLimits.multisets),
        realizations=_get(raw, "limit_realizations", int, search.StageLimits.realizations),
        permutations=_get(raw, "limit_permutations", int, search.StageLimits.permutations),
    )
    size = args.I if args.I is not None else _get(raw, "I", int)
    if size is None:
        raise UsageError("search config needs I")
    max_inv = _get(raw, "max_inverses", int)
    try:
        return search.SearchConfig(
            I=size,
            candidates=_get(raw, "candidates", tuple, (1.0, 2.0, 3.0)),
            target_order=args.target_order or _get(raw, "target_order", int, 3),
            tol=_get(raw, "tol", float, 1e-9),
            max_results=args.max_results or _get(raw, "max_results", int),
            n_terms=_get(raw, "n_terms", int, 2),
            max_inverses=max_inv,
            limits=limits,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def search_csv(results: Sequence[search.SearchResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SEARCH_HEADER)
    for r in results:
        mt = r.metrics
        writer.writerow([print_method(r.method), mt.order, _fmt(mt.D), _fmt(mt.L), _fmt(mt.R), _fmt(mt.Z), mt.inverses])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path and path != "-":
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_search(args) -> int:
    cfg = _search_config(args)
    try:
        results = search.search(cfg)
    except search.SearchLimitError as exc:
        raise NumericFailure(str(exc)) from exc
    out = args.output or read_config(args.config).get("output")
    _emit(search_csv(results), out)
    if not results:
        print("no solutions", file=sys.stderr)
    else:
        pairs = sum(1 for r in results if r.transpose == "pair")
        print(f"{len(results)} solutions ({pairs} in transpose pairs)", file=sys.stderr)
    return 0


def _bench_spec(args) -> tuple[bench.BenchmarkSpec, str | None]:
    raw = read_config(args.config) if args.config else {}
    if args.methods:
        methods = [_method(t) for t in args.methods]
    elif "methods" in raw:
        methods = [_method(t) for t in raw["methods"].split(";") if t.strip()]
    else:
        methods = bench.builtin_methods()
    try:
        spec = bench.BenchmarkSpec(
            methods=tuple(methods),
            dt=args.dt if args.dt is not None else _get(raw, "dt", float, 0.01),
            t_max=args.t_max if args.t_max is not None else _get(raw, "t_max", float, 100.0),
            stride=args.stride if args.stride is not None else _get(raw, "stride", int, 1024),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return spec, args.output or raw.get("output")


def cmd_bench(args) -> int:
    spec, out = _bench_spec(args)
    series = bench.run_spin_benchmark(spec)
    try:
        _emit(bench.write_series_csv(series), out)
    except OSError as exc:
        raise NumericFailure(f"cannot write output: {exc}") from exc
    log = sys.stdout if out and out != "-" else sys.stderr
    for s in series:
        try:
            slope = f"{bench.loglog_slope(s):.3f}"
        except ValueError:
            slope = "n/a"
        print(f"{s.method}: order {s.order}, max error {s.max_error:.3e}, log-log slope {slope}", file=log)
    if len(series) > 1:
        try:
            gaps = ", ".join(f"{g:.3f}" for g in bench.intercept_gaps(series))
        except ValueError as exc:
            gaps = f"n/a ({exc})"
        print(f"intercept gaps: {gaps}", file=log)
    return 0


def cmd_apps(args) -> int:
    m = _method(args.method)
    h = spin_terms()
    try:
        count = cost.applications_needed(m, h, args.t_phys, args.error, ceiling=args.ceiling)
    except RuntimeError as exc:
        raise NumericFailure(str(exc)) from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    metrics = cost.method_metrics(m, len(h))
    print(f"n         {count.n}")
    print(f"error     {_fmt(count.error)}")
    if metrics.order >= 1:
        print(f"model n   {_fmt(cost.applications_model(metrics, args.t_phys, args.error))}")
    return 0


def cmd_cost(args) -> int:
    m = _method(args.method)
    try:
        params = cost.CostParams(t_g=args.t_g, b=args.b, T_p=args.t_phys, E_target=args.error)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    metrics = cost.method_metrics(m, args.terms)
    if metrics.order < 1 or not metrics.D > 0:
        raise NumericFailure("method is not a valid approximation")
    tc = cost.computer_time(metrics, params)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["name", "I", "N", "o", "D", "L", "R", "Z", "G", "T_c", "T_switch", "T_apply"])
    writer.writerow([
        m.name or print_method(m), metrics.I, metrics.N, metrics.order, _fmt(metrics.D), _fmt(metrics.L),
        _fmt(metrics.R), _fmt(metrics.Z), _fmt(metrics.G), _fmt(tc.total), _fmt(tc.switching), _fmt(tc.application),
    ])
    return 0


def _hamiltonian(raw: dict[str, str], args) -> HamiltonianTerms:
    kind = args.hamiltonian or raw.get("hamiltonian", "spin")
    if kind == "spin":
        return spin_terms()
    if kind == "random":
        seed = os.environ.get(SEED_ENV)
        seed = int(seed) if seed is not None else (args.seed if args.seed is not None else _get(raw, "seed", int, 0))
        dim = args.dim or _get(raw, "dim", int, 4)
        n_terms = args.terms or _get(raw, "terms", int, 2)
        rng = np.random.default_rng(seed)
        try:
            return HamiltonianTerms(tuple(1j * random_antihermitian(dim, rng) for _ in range(n_terms)))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown hamiltonian {kind!r}; use 'spin' or 'random'")


def cmd_simulate(args) -> int:
    raw = read_config(args.config) if args.config else {}
    text = args.method or raw.get("method")
    if not text:
        raise UsageError("simulate needs a method")
    m = _method(text)
    h = _hamiltonian(raw, args)
    dt = args.dt if args.dt is not None else _get(raw, "dt", float, 0.01)
    n = args.n if args.n is not None else _get(raw, "n", int, 1)
    if not dt > 0 or n < 1:
        raise UsageError("dt must be positive and n at least 1")
    u = apply_method(m, h, dt, n)
    exact = exact_evolution(h, n * sum(x.step for x in m.units) * dt)
    for row in u:
        print(" ".join(f"{_fmt(z.real)}{'+' if z.imag >= 0 else '-'}{_fmt(abs(z.imag))}j" for z in row))
    print(f"operator error {_fmt(operator_error(u, exact))}")
    if h.dim == 2:
        print(f"pauli error    {_fmt(pauli_error(u, exact))}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prodform", description="High-order product formulas: verify, search, benchmark.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="print sigma coefficients and order of a method")
    p.add_argument("method", help="method string or built-in name (order1..order4)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--terms", type=int, default=3, help="Hamiltonian terms N used for Z")
    p.add_argument("--min-order", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="staged search for methods of a target order")
    p.add_argument("config")
    p.add_argument("--I", type=int)
    p.add_argument("--target-order", type=int)
    p.add_argument("--max-results", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("simulate", help="apply a method and print the resulting unitary")
    p.add_argument("config", nargs="?")
    p.add_argument("--method")
    p.add_argument("--hamiltonian", choices=("spin", "random"))
    p.add_argument("--dim", type=int)
    p.add_argument("--terms", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("-n", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="single-spin error series as CSV")
    p.add_argument("config", nargs="?")
    p.add_argument("--methods", action="append")
    p.add_argument("--dt", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--stride", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("apps", help="applications needed for a target error on the single spin")
    p.add_argument("method")
    p.add_argument("--t-phys", type=float, default=1.0)
    p.add_argument("--error", type=float, default=1e-4)
    p.add_argument("--ceiling", type=int, default=10**6)
    p.set_defaults(func=cmd_apps)

    p = sub.add_parser("cost", help="metrics and computer-time model")
    p.add_argument("method")
    p.add_argument("--terms", type=int, default=3)
    p.add_argument("--t-g", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--t-phys", type=float, default=1.0)
    p.add_argument("--error", type=float, default=1e-4)
    p.set_defaults(func=cmd_cost)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"prodform: error: {exc}", file=sys.stderr)
        return 1
    except NumericFailure as exc:
        print(f"prodform: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
