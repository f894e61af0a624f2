"""Command-line entry point: ``doq <subcommand> [flags]``.

Exit codes: 0 success, 1 invalid input (bad flags, domain or data errors),
2 numerical or runtime failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path

from doq import __version__
from doq.backtest import emit_report, load_price_series, load_quotes, run_backtest
from doq.errors import NumericalError, ValidationError
from doq.estimation import DEFAULT_DT, DEFAULT_WINDOW, Method, rolling_estimates, CSV_HEADER
from doq.paths import (FBM_CHOLESKY_MAX_STEPS, Model, ModelParams, PathKind, SamplePath, Scheme, TimeGrid,
                       simulate_bm_paths, simulate_do_paths, simulate_fbm_paths, simulate_martingale_paths,
                       simulate_modified_do_paths, simulate_stock_paths, write_path_csv)
from doq.pricing import OptionSpec, call_price, do_call_pde, mc_call
from doq.qv import qv_convergence_harness

DEFAULT_SEED = 42
PROCESSES = {"M": PathKind.M, "V": PathKind.V, "V_eps": PathKind.V_EPS, "fbm": PathKind.FBM,
             "bm": PathKind.BM, "stock": PathKind.STOCK}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with status 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _int_list(text: str) -> list[int]:
    return [_positive_int(p) for p in text.replace(",", " ").split()]


def _iso_date(text: str) -> _dt.date:
    try:
        return _dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an ISO date YYYY-MM-DD, got {text!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed (default 42)")
    p.add_argument("--paper-literal", action="store_true",
                   help="use the estimator formulas exactly as originally printed")


def _market(p: argparse.ArgumentParser) -> None:
    p.add_argument("--s", type=float, required=True, help="spot (DO: the price at time t)")
    p.add_argument("--k", type=float, required=True, help="strike")
    p.add_argument("--r", type=float, default=0.0, help="risk-free rate")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--h", type=float, default=0.5, help="Hurst index")
    p.add_argument("--t", type=float, default=0.0, help="current model time")
    p.add_argument("--T", type=float, required=True, dest="t_exp", help="expiry (model time)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="doq", allow_abbrev=False,
                     description="Dobric-Ojeda process simulation, estimation and option pricing.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate one path and write it as CSV", allow_abbrev=False)
    p.add_argument("--process", choices=sorted(PROCESSES), required=True)
    p.add_argument("--h", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.0, help="drift cut-on time for V_eps and DO stock paths")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--T", type=float, default=1.0, dest="t_end")
    p.add_argument("--n", type=_positive_int, default=1000, help="number of steps")
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default=Scheme.EXACT.value)
    p.add_argument("--fbm-method", choices=["cholesky", "davies-harte"], default="cholesky")
    p.add_argument("--model", choices=[m.value for m in Model], default=Model.DOBRIC_OJEDA.value,
                   help="stock model (process=stock)")
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--s0", type=float, default=100.0)
    p.add_argument("--output", "-o", type=Path, help="CSV path (default: stdout)")
    _common(p)

    p = sub.add_parser("qv-check", help="quadratic-variation convergence table", allow_abbrev=False)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--T", type=float, default=1.0, dest="t_end")
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--n-list", type=_int_list, default=[64, 256, 1024], help="e.g. 64,256,1024")
    p.add_argument("--seeds", type=_positive_int, default=20, help="number of replications")
    p.add_argument("--output", "-o", type=Path)
    _common(p)

    p = sub.add_parser("estimate", help="rolling H/sigma estimates from a date,close CSV", allow_abbrev=False)
    p.add_argument("--csv", type=Path, required=True)
    p.add_argument("--method", choices=[m.value for m in Method], default=Method.QV.value)
    p.add_argument("--window", type=_positive_int, default=DEFAULT_WINDOW)
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--output", "-o", type=Path)
    _common(p)

    p = sub.add_parser("price", help="price a European call, JSON to stdout", allow_abbrev=False)
    p.add_argument("--model", choices=["bs", "fbm", "do", "mc"], required=True)
    _market(p)
    p.add_argument("--eps", type=float, default=0.0, help="drift cut-on time (mc)")
    p.add_argument("--paths", type=_positive_int, default=100_000, help="Monte Carlo paths (mc)")
    p.add_argument("--mc-model", choices=[m.value for m in Model], default=Model.DOBRIC_OJEDA.value,
                   help="model simulated by mc")
    _common(p)

    p = sub.add_parser("pde-price", help="DO call price from the pricing PDE, JSON to stdout",
                       allow_abbrev=False)
    _market(p)
    p.add_argument("--x-nodes", type=_positive_int, default=400)
    p.add_argument("--t-steps", type=_positive_int, default=400)
    p.add_argument("--no-check", action="store_true", help="skip the grid-refinement self-check")
    _common(p)

    p = sub.add_parser("backtest", help="rolling three-model backtest to a report directory",
                       allow_abbrev=False)
    p.add_argument("--csv", type=Path, required=True)
    p.add_argument("--strike", type=float, required=True)
    p.add_argument("--expiry", type=_iso_date, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--window", type=_positive_int, default=DEFAULT_WINDOW)
    p.add_argument("--quotes-csv", type=Path)
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--symbol", default="")
    p.add_argument("--output", "-o", type=Path, default=Path("backtest_report"))
    p.add_argument("--svg", action="store_true", help="also write SVG charts")
    _common(p)
    return parser


def _metadata(args) -> dict:
    meta = {}
    for key, value in sorted(vars(args).items()):
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, _dt.date):
            value = value.isoformat()
        meta[key] = value
    meta["version"] = __version__
    return meta


def _write_sidecar(output: Path | None, args) -> None:
    if output is not None:
        Path(str(output) + ".meta.json").write_text(json.dumps(_metadata(args), indent=2, sort_keys=True) + "\n")


def _cmd_simulate(args) -> int:
    grid = TimeGrid(args.t0, args.t_end, args.n)
    kind = PROCESSES[args.process]
    if kind is PathKind.M:
        values = simulate_martingale_paths(grid, args.h, args.seed, 1, args.scheme)
    elif kind is PathKind.V:
        values = simulate_do_paths(grid, args.h, args.seed, 1, args.scheme)
    elif kind is PathKind.V_EPS:
        values = simulate_modified_do_paths(grid, args.h, args.eps, args.seed, 1, args.scheme)
    elif kind is PathKind.FBM:
        values = simulate_fbm_paths(grid, args.h, args.seed, 1, args.fbm_method, FBM_CHOLESKY_MAX_STEPS)
    elif kind is PathKind.BM:
        values = simulate_bm_paths(grid, args.seed, 1)
    else:
        params = ModelParams(mu=args.mu, sigma=args.sigma, h=args.h, eps=args.eps, s0=args.s0,
                             model=args.model)
        values = simulate_stock_paths(params, grid, args.seed, 1, scheme=args.scheme,
                                      fbm_method=args.fbm_method)
    path = SamplePath(grid, values[0], kind)
    write_path_csv(path, args.output if args.output else sys.stdout)
    _write_sidecar(args.output, args)
    return 0


def _cmd_qv_check(args) -> int:
    report = qv_convergence_harness(args.h, args.t0, args.t_end, args.n_list, args.delta,
                                    args.seeds, args.seed)
    report.to_csv(args.output if args.output else sys.stdout)
    _write_sidecar(args.output, args)
    return 0


def _cmd_estimate(args) -> int:
    import csv

    series = load_price_series(args.csv)
    results = rolling_estimates(series, args.window, args.method, args.dt, args.paper_literal)
    rows = [CSV_HEADER] + [r.csv_row() for r in results]
    if args.output:
        with args.output.open("w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    else:
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
    _write_sidecar(args.output, args)
    return 0


def _emit_quote(quote, args, **extra) -> int:
    out = quote.to_dict()
    out.update(extra)
    out["seed"] = args.seed
    out["paper_literal"] = args.paper_literal
    print(json.dumps(out, sort_keys=True))
    return 0


def _cmd_price(args) -> int:
    if args.model == "mc":
        params = ModelParams(sigma=args.sigma, h=args.h, eps=args.eps, s0=args.s, r=args.r, model=args.mc_model)
        quote = mc_call(params, OptionSpec(args.k, args.t_exp), args.t, args.paths, args.seed)
        return _emit_quote(quote, args, method="mc", paths=args.paths)
    quote = call_price(args.model, args.s, args.k, args.r, args.sigma, args.h, args.t, args.t_exp)
    return _emit_quote(quote, args, method="closed-form")


def _cmd_pde_price(args) -> int:
    quote = do_call_pde(args.s, args.k, args.r, args.sigma, args.h, args.t, args.t_exp,
                        args.x_nodes, args.t_steps, check=not args.no_check)
    return _emit_quote(quote, args, method="pde", x_nodes=args.x_nodes, t_steps=args.t_steps)


def _cmd_backtest(args) -> int:
    series = load_price_series(args.csv, args.symbol)
    quotes = load_quotes(args.quotes_csv) if args.quotes_csv else None
    rows = run_backtest(series, args.strike, args.expiry, args.r, args.window, quotes, args.dt,
                        args.paper_literal)
    meta = _metadata(args)
    meta["symbol"] = series.symbol
    written = emit_report(rows, args.output, metadata=meta, svg=args.svg)
    for path in written:
        print(path)
    return 0


_COMMANDS = {"simulate": _cmd_simulate, "qv-check": _cmd_qv_check, "estimate": _cmd_estimate,
             "price": _cmd_price, "pde-price": _cmd_pde_price, "backtest": _cmd_backtest}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"doq: error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"doq: runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
