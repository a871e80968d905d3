"""Command-line front end.

Commands and their output columns:

``kernel``       t, value, abs_err
``interp``       n, x, f, interp, rho              (f is the kernel itself)
``lebesgue``     n, x, lebesgue, main_term
``best-approx``  n, p, value, certificate, residual (f is the kernel itself)
``class-sup``    n, x, p, exact_p2, dual_center, dual_halfwidth, mc_lower
``table``        regime, p_case, r, p, n, A_n
``verify``       criterion, title, passed, detail, seconds

CSV output starts with a ``# generated ...`` line unless ``--no-header`` is
given; JSON output is an array of flat records.  Exit status is 0 on success,
1 when ``verify`` sees a failing criterion, 2 on usage errors and 3 on
numerical failure (a diagnostic record is written to the output).
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import __version__
from .exceptions import ConvergenceError, DomainError, ThresholdOverflowError
from .kernels import KernelParams, kernel_eval, kernel_series
from .specfun import LpExponent

COMMANDS = ("kernel", "interp", "lebesgue", "best-approx", "class-sup", "table", "verify")
EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "POISSON_INTERP_THREADS"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    params: KernelParams
    p: LpExponent
    ns: tuple
    xs: tuple
    tol: float
    seed: int
    output: str
    fmt: str
    header: bool
    trials: int = 500


def parse_grid(spec: str) -> tuple:
    """``start:stop:count`` with ``stop`` excluded."""
    try:
        start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError as exc:
        raise UsageError(f"bad grid spec {spec!r}; expected start:stop:count") from exc
    if count < 1:
        raise UsageError("grid count must be at least 1")
    return tuple(float(v) for v in start + (stop - start) * np.arange(count) / count)


def parse_range(spec: str) -> tuple:
    """``a:b`` with both ends included."""
    try:
        a, b = (int(v) for v in spec.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad range spec {spec!r}; expected a:b") from exc
    if a < 1 or b < a:
        raise UsageError("n-range needs 1 <= a <= b")
    return tuple(range(a, b + 1))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poisson-interp",
        description="Interpolation deviations on classes of generalized Poisson integrals.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--r", type=float, default=0.5)
    parser.add_argument("--beta", type=float, default=0.0)
    parser.add_argument("--p", default="2", help="exponent in [1, inf]; 'inf' for the sup norm")
    group_n = parser.add_mutually_exclusive_group()
    group_n.add_argument("--n", type=int)
    group_n.add_argument("--n-range", help="a:b, both ends included")
    group_x = parser.add_mutually_exclusive_group()
    group_x.add_argument("--x", type=float)
    group_x.add_argument("--x-grid", help="start:stop:count, stop excluded")
    parser.add_argument("--tol", type=float, default=1e-10)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--trials", type=int, default=500, help="Monte-Carlo trials for class-sup")
    parser.add_argument("--output", default="-", help="output path, '-' for stdout")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"))
    parser.add_argument("--no-header", action="store_true")
    return parser


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    try:
        params = KernelParams(args.alpha, args.r, args.beta)
        p = LpExponent.parse(args.p)
    except (DomainError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if args.n_range:
        ns = parse_range(args.n_range)
    elif args.n is not None:
        if args.n < 1:
            raise UsageError("--n must be at least 1")
        ns = (args.n,)
    else:
        ns = (8,)
    if args.x_grid:
        xs = parse_grid(args.x_grid)
    elif args.x is not None:
        xs = (args.x,)
    else:
        xs = (1.0,)
    fmt = args.fmt or ("json" if args.command == "class-sup" else "csv")
    return ExperimentConfig(args.command, params, p, ns, xs, args.tol, args.seed, args.output,
                            fmt, not args.no_header, args.trials)


def thread_count() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def pmap(func: Callable, items: Sequence) -> List:
    """Ordered parallel map capped by the thread environment variable."""
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else str(v)


# ---------------------------------------------------------------------------
# commands


def cmd_kernel(cfg: ExperimentConfig):
    def row(t):
        cv = kernel_eval(cfg.params, t, cfg.tol)
        return {"t": t, "value": cv.value, "abs_err": float(cv.abs_err)}
    return pmap(row, cfg.xs)


def cmd_interp(cfg: ExperimentConfig):
    from .trig import PeriodicFn, interp_eval

    f = PeriodicFn.from_series(kernel_series(cfg.params, tol=min(cfg.tol, 1e-15)))

    def row(item):
        n, x = item
        fx = f(x)
        sx = interp_eval(f, n, x)
        return {"n": n, "x": x, "f": fx, "interp": sx, "rho": fx - sx}
    return pmap(row, [(n, x) for n in cfg.ns for x in cfg.xs])


def cmd_lebesgue(cfg: ExperimentConfig):
    from .trig import lebesgue_fn, lebesgue_main_term

    rows = []
    for n in cfg.ns:
        xs = np.array(cfg.xs)
        vals = lebesgue_fn(n, xs)
        main = lebesgue_main_term(n, xs)
        rows += [{"n": n, "x": float(x), "lebesgue": float(v), "main_term": float(m)}
                 for x, v, m in zip(xs, np.atleast_1d(vals), np.atleast_1d(main))]
    return rows


def cmd_best_approx(cfg: ExperimentConfig):
    from .approx import best_approx
    from .trig import PeriodicFn

    f = PeriodicFn.from_series(kernel_series(cfg.params, tol=min(cfg.tol, 1e-15)))

    def row(n):
        res = best_approx(f, n, cfg.p, tol=max(cfg.tol, 1e-12))
        return {"n": n, "p": str(cfg.p), "value": res.value,
                "certificate": res.certificate.value, "residual": float(res.residual)}
    return pmap(row, list(cfg.ns))


def cmd_class_sup(cfg: ExperimentConfig):
    from .extremes import dual_value, exact_p2, monte_carlo_lower

    def row(item):
        n, x = item
        band = dual_value(cfg.params, n, x, cfg.p, tol=cfg.tol)
        exact = exact_p2(cfg.params, n, x).value if cfg.p.p == 2.0 else None
        mc = monte_carlo_lower(cfg.params, n, x, cfg.p, trials=cfg.trials, seed=cfg.seed)
        return {"n": n, "x": x, "p": str(cfg.p), "exact_p2": exact, "dual_center": band.center,
                "dual_halfwidth": band.half_width, "mc_lower": mc}
    return pmap(row, [(n, x) for n in cfg.ns for x in cfg.xs])


def cmd_table(cfg: ExperimentConfig):
    from .extremes import kn_main_term, pcase_of, regime_of

    r_values = (cfg.params.r if cfg.params.r < 1.0 else 0.5, 1.0,
                cfg.params.r if cfg.params.r > 1.0 else 2.0)
    mid_p = cfg.p if 1.0 < cfg.p.p < math.inf else LpExponent(2.0)
    rows = []
    for n in cfg.ns:
        for p in (LpExponent(math.inf), mid_p, LpExponent(1.0)):
            for r in r_values:
                params = KernelParams(cfg.params.alpha, r, cfg.params.beta)
                rows.append({"regime": regime_of(r).value, "p_case": pcase_of(p).value, "r": r,
                             "p": str(p), "n": n, "A_n": kn_main_term(params, p, n)})
    return rows


def cmd_verify(cfg: ExperimentConfig):
    from .acceptance import CRITERIA, run_criterion

    rows = []
    for k in sorted(CRITERIA):
        res = run_criterion(k, seed=cfg.seed, tol=cfg.tol)
        print(res.line(), file=sys.stderr, flush=True)
        rows.append({"criterion": res.number, "title": res.title, "passed": bool(res.passed),
                     "detail": res.detail, "seconds": round(res.seconds, 3)})
    return rows


HANDLERS = {
    "kernel": cmd_kernel, "interp": cmd_interp, "lebesgue": cmd_lebesgue,
    "best-approx": cmd_best_approx, "class-sup": cmd_class_sup, "table": cmd_table,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# output


def _plain(v):
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, np.generic):
        return v.item()
    return v


def render(rows: List[dict], cfg: ExperimentConfig) -> str:
    if cfg.fmt == "json":
        clean = [{k: _plain(v) for k, v in r.items()} for r in rows]
        return json.dumps(clean, indent=1) + "\n"
    buf = io.StringIO()
    if cfg.header:
        stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        buf.write(f"# generated {stamp} by poisson-interp {__version__} {cfg.command}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: ("" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v))
                             for k, v in r.items()})
    return buf.getvalue()


def emit(text: str, output: str) -> None:
    if output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def run(cfg: ExperimentConfig) -> int:
    """Execute one configured command and write its output; returns the exit status."""
    try:
        rows = HANDLERS[cfg.command](cfg)
    except (ConvergenceError, ThresholdOverflowError, FloatingPointError, ArithmeticError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        record.update({k: _num(v) if isinstance(v, float) else v
                       for k, v in getattr(exc, "diagnostics", {}).items()})
        emit(json.dumps([record], indent=1) + "\n" if cfg.fmt == "json" else render([record], cfg),
             cfg.output)
        print(f"poisson-interp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    emit(render(rows, cfg), cfg.output)
    if cfg.command == "verify" and not all(r["passed"] for r in rows):
        return EXIT_FAILED
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits on --help, --version and usage errors
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"poisson-interp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(cfg)
    except DomainError as exc:
        print(f"poisson-interp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
