"""Command-line entry point ``matrixballs``.

Every artifact embeds the parameters, the seed and the library version. The
wall-clock duration goes to ``<output>.timing.json`` (or stderr), which keeps
repeated runs with the same seed byte-identical.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
import warnings

import numpy as np

from . import __version__
from ._validation import DegenerateInputWarning, check_p
from .constants import (
    A_pq_classical,
    C_pq,
    EnsembleSpec,
    a_pq,
    asymptotic_volume_radius,
    b_p,
    delta_p_closed_form,
    intersection_threshold,
)
from .delta_opt import OptimizerConfig, optimize_delta_n
from .experiments import (
    intersection_experiment,
    log_volume_ball,
    parse_t_grid,
    wlln_experiment,
)
from .sampler import ChainConfig, default_threads, sample_unit_ball_eigen
from .ullman import (
    UllmanDist,
    free_entropy,
    lambda_p,
    log_potential,
    ullman_cdf,
    ullman_pdf,
    verify_free_entropy,
)
from .vandermonde import gl_vandermonde_identity_gap, k_diameter

SCHEMA = 1


class UsageError(ValueError):
    pass


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars plain Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _safe(fn, *args):
    try:
        return fn(*args)
    except ValueError:
        return None


# ----------------------------------------------------------------- commands


def cmd_constants(args):
    p = check_p(args.p, allow_inf=True)
    finite = not math.isinf(p)
    row = {"p": p, "delta_p": delta_p_closed_form(p)}
    row["lambda_p"] = lambda_p(p) if finite else None
    row["b_p"] = b_p(p) if finite else None
    if args.q is not None:
        q = check_p(args.q, "q", allow_inf=True)
        row["q"] = q
        both = finite and not math.isinf(q)
        row["C_pq"] = C_pq(p, q) if both else None
        row["a_pq"] = a_pq(p, q)
        if both:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", DegenerateInputWarning)
                row["threshold"] = intersection_threshold(p, q).value
            row["threshold_degenerate"] = bool(caught)
        else:
            row["threshold"] = None
        row["A_pq_classical"] = _safe(A_pq_classical, p, q)
    spec = EnsembleSpec(args.n, args.beta, p)
    radius = asymptotic_volume_radius(spec, "n2")
    row.update({"n": spec.n, "beta": spec.beta, "asymptotic_radius_n2": radius.value,
                "asymptotic_radius_beta_n2": asymptotic_volume_radius(spec, "beta_n2").value,
                "asymptotic_radius_kind": radius.kind})
    summary = f"delta_p={row['delta_p']:.6g}"
    if row.get("threshold") is not None:
        summary += f" threshold={row['threshold']:.6g}"
    return [row], summary


def _optimizer_config(args):
    cfg = OptimizerConfig.from_json(args.config) if args.config else OptimizerConfig()
    if args.seed is not None:
        cfg = OptimizerConfig(cfg.tol, cfg.max_iter, cfg.restarts, args.seed)
    return cfg


def cmd_delta(args):
    p = check_p(args.p)
    if args.n_max < 2:
        raise UsageError("--n-max must be at least 2")
    cfg = _optimizer_config(args)
    rows = []
    for n in range(2, args.n_max + 1):
        r = optimize_delta_n(p, n, cfg)
        if not r.converged:
            print(f"warning: n={n} did not converge ({r.message})", file=sys.stderr)
        rows.append({"n": n, "delta_n": r.delta_n, "log_delta_n": r.log_delta_n,
                     "lambda_hat": r.lagrange_lambda_hat, "max_residual": r.max_lagrange_residual,
                     "iterations": r.iterations, "status": "converged" if r.converged else r.message})
    rows.append({"n": "inf", "delta_n": delta_p_closed_form(p), "log_delta_n": math.log(delta_p_closed_form(p)),
                 "lambda_hat": None, "max_residual": None, "iterations": None, "status": "closed form"})
    return rows, f"delta_{args.n_max}={rows[-2]['delta_n']:.8g} limit={rows[-1]['delta_n']:.8g}"


def cmd_ullman(args):
    p = check_p(args.p)
    dist = UllmanDist(p, args.b)
    lo, hi, count = args.x_grid
    xs = np.linspace(lo, hi, count)
    pdf = np.atleast_1d(ullman_pdf(dist, xs))
    cdf = np.atleast_1d(ullman_cdf(dist, xs))
    rows = [{"x": float(x), "pdf": float(f), "cdf": float(c)} for x, f, c in zip(xs, pdf, cdf)]
    extra = {}
    if args.check_potential:
        reports = [log_potential(p, y) for y in np.linspace(-1, 1, 21)]
        extra["potential_max_abs_error"] = max(r.abs_error for r in reports)
    if args.check_entropy:
        chk = verify_free_entropy(p, method=args.entropy_method, seed=args.seed or 0)
        extra["free_entropy"] = free_entropy(p)
        extra["free_entropy_estimate"] = chk.estimate
        extra["free_entropy_abs_error"] = chk.abs_error
    summary = f"{len(rows)} grid points"
    for k, v in extra.items():
        summary += f" {k}={v:.3g}"
    return rows, summary, extra


def cmd_vandermonde(args):
    if args.n_max < 2:
        raise UsageError("--n-max must be at least 2")
    rows = []
    for n in range(2, args.n_max + 1):
        row = {"n": n, "k_diameter": k_diameter(n)}
        if args.check_gl:
            row["gl_identity_gap"] = gl_vandermonde_identity_gap(n)
        rows.append(row)
    summary = f"k_diameter({args.n_max})={rows[-1]['k_diameter']:.8g}"
    if args.check_gl:
        summary += f" max identity gap={max(r['gl_identity_gap'] for r in rows):.3g}"
    return rows, summary


def _chain(args):
    threads = args.threads if args.threads is not None else default_threads()
    return ChainConfig(burn_in=args.burn_in, thinning=args.thinning, seed=args.seed or 0, threads=threads)


def cmd_sample(args):
    spec = EnsembleSpec(args.n, args.beta, args.p)
    batch = sample_unit_ball_eigen(spec, args.count, _chain(args))
    rows = [{f"x{i}": float(v) for i, v in enumerate(r)} for r in batch.values]
    meta = {"source": batch.source, **batch.metadata}
    return rows, f"{len(rows)} samples from {meta.get('base_source')}", meta


def cmd_wlln(args):
    rows = []
    for n in args.n:
        est = wlln_experiment(EnsembleSpec(n, args.beta, args.p), args.q, args.reps, _chain(args))
        rows.append({"n": n, "mean": est.value, "stderr": est.stderr, "sample_std": est.metadata["sample_std"],
                     "limit": est.metadata["limit"], "abs_deviation": est.metadata["abs_deviation"]})
    return rows, f"mean at n={rows[-1]['n']}: {rows[-1]['mean']:.6g} (limit {rows[-1]['limit']:.6g})"


def cmd_intersect(args):
    res = intersection_experiment(args.p, args.q, args.beta, args.n, args.t_grid, args.reps, _chain(args))
    rows = [{"t": t, "t_over_threshold": e.metadata["t_over_threshold"], "fraction": e.value,
             "stderr": e.stderr} for t, e in res]
    return rows, f"{len(rows)} rows, threshold={res[0][1].metadata['threshold']:.6g}"


def cmd_volume(args):
    rows = []
    for n in args.n:
        spec = EnsembleSpec(n, args.beta, args.p)
        est = log_volume_ball(spec, args.samples, args.seed or 0)
        m = est.metadata
        rows.append({"n": n, "log_volume": est.value, "stderr": est.stderr, "log_I": m["log_I"],
                     "log_c_n_beta": m["log_c_n_beta"], "radius_n2": m["radius_n2"],
                     "surrogate_radius_n2": m["surrogate_radius_n2"], "surrogate_kind": m["surrogate_kind"]})
    return rows, f"log volume at n={rows[-1]['n']}: {rows[-1]['log_volume']:.6g}"


# ------------------------------------------------------------------ parsing


def _grid3(text):
    """``lo:hi:count`` for the x grid; unlike the t grid, negative ends are allowed."""
    parts = str(text).split(":")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise argparse.ArgumentTypeError(f"expected lo:hi:count, got {text!r}") from None
    if len(parts) != 3 or count < 1 or not lo <= hi or not (math.isfinite(lo) and math.isfinite(hi)):
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    return lo, hi, count


def _tgrid(text):
    try:
        return parse_t_grid(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="json (default) or csv (default for sample)")
    common.add_argument("--output", help="file to write; stdout when omitted")
    common.add_argument("--seed", type=_seed, default=None, help="unsigned 64-bit seed (default 0)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: MBL_THREADS or logical cores)")

    chain = argparse.ArgumentParser(add_help=False)
    chain.add_argument("--burn-in", type=int, default=1000)
    chain.add_argument("--thinning", type=int, default=None)

    parser = argparse.ArgumentParser(prog="matrixballs",
                                     description="Volumes and intersections of matrix unit balls.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("constants", parents=[common], help="closed-form constants")
    s.add_argument("--p", required=True)
    s.add_argument("--q")
    s.add_argument("--beta", type=float, default=2.0)
    s.add_argument("--n", type=int, default=10)
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("delta", parents=[common], help="Delta_n(p) by optimisation")
    s.add_argument("--p", required=True, type=float)
    s.add_argument("--n-max", required=True, type=int)
    s.add_argument("--config", help="JSON file with optimizer settings (tol, max_iter, restarts, seed)")
    s.set_defaults(func=cmd_delta)

    s = sub.add_parser("ullman", parents=[common], help="Ullman density and CDF on a grid")
    s.add_argument("--p", required=True, type=float)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--x-grid", type=_grid3, default=(-1.0, 1.0, 21),
                   help="lo:hi:count (write --x-grid=-1:1:21 when lo is negative)")
    s.add_argument("--check-potential", action="store_true")
    s.add_argument("--check-entropy", action="store_true")
    s.add_argument("--entropy-method", choices=("qmc", "mc", "quadrature"), default="qmc")
    s.set_defaults(func=cmd_ullman)

    s = sub.add_parser("vandermonde", parents=[common], help="k-diameters and the Gauss-Lobatto identity")
    s.add_argument("--n-max", required=True, type=int)
    s.add_argument("--check-gl", action="store_true")
    s.set_defaults(func=cmd_vandermonde)

    s = sub.add_parser("sample", parents=[common, chain], help="eigenvalues of uniform ball samples")
    s.add_argument("--n", required=True, type=int)
    s.add_argument("--beta", type=float, default=2.0)
    s.add_argument("--p", required=True, type=float)
    s.add_argument("--count", type=int, default=1000)
    s.set_defaults(func=cmd_sample, fmt_default="csv")

    s = sub.add_parser("wlln", parents=[common, chain], help="weak law of large numbers experiment")
    s.add_argument("--p", required=True, type=float)
    s.add_argument("--q", required=True, type=float)
    s.add_argument("--beta", type=float, default=2.0)
    s.add_argument("--n", required=True, type=_int_list, help="comma-separated sizes")
    s.add_argument("--reps", type=int, default=500)
    s.set_defaults(func=cmd_wlln)

    s = sub.add_parser("intersect", parents=[common, chain], help="intersection threshold scan")
    s.add_argument("--p", required=True, type=float)
    s.add_argument("--q", required=True, type=float)
    s.add_argument("--beta", type=float, default=2.0)
    s.add_argument("--n", required=True, type=int)
    s.add_argument("--reps", type=int, default=500)
    s.add_argument("--t-grid", required=True, type=_tgrid, help="lo:hi:count, inclusive")
    s.set_defaults(func=cmd_intersect)

    s = sub.add_parser("volume", parents=[common], help="Monte Carlo log volume of matrix balls")
    s.add_argument("--n", required=True, type=_int_list)
    s.add_argument("--beta", type=float, default=2.0)
    s.add_argument("--p", required=True)
    s.add_argument("--samples", type=int, default=100_000)
    s.set_defaults(func=cmd_volume)
    return parser


# ------------------------------------------------------------------- output


def _params(args):
    skip = {"func", "command", "output", "format", "threads", "fmt_default"}
    out = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        if isinstance(v, np.ndarray):
            v = v.tolist()
        out[k] = v
    return out


def _render(args, rows, extra):
    header = {"schema": SCHEMA, "command": args.command, "version": __version__,
              "seed": args.seed if args.seed is not None else 0, "params": _params(args)}
    if args.format == "json":
        doc = dict(header)
        if extra:
            doc["metadata"] = extra
        doc["results"] = rows
        return json.dumps(_clean(doc), indent=2) + "\n", None
    buf = io.StringIO()
    keys = list(rows[0].keys()) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(keys)
    for r in rows:
        writer.writerow([_cell(r.get(k)) for k in keys])
    sidecar = dict(header)
    if extra:
        sidecar["metadata"] = extra
    return buf.getvalue(), json.dumps(_clean(sidecar), indent=2) + "\n"


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "fmt_default", "json")
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be positive")
    start = time.perf_counter()
    try:
        out = args.func(args)
    except (ValueError, ArithmeticError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    rows, summary = out[0], out[1]
    extra = out[2] if len(out) > 2 else None
    data, sidecar = _render(args, rows, extra)
    duration = time.perf_counter() - start
    try:
        if args.output:
            _write(args.output, data)
            if sidecar is not None:
                _write(args.output + ".meta.json", sidecar)
            _write(args.output + ".timing.json", json.dumps({"duration_seconds": duration}) + "\n")
            print(f"{args.command}: {summary} -> {args.output}")
        else:
            sys.stdout.write(data)
            if sidecar is not None:
                sys.stderr.write(sidecar)
            print(f"{args.command}: {summary} ({duration:.2f} s)", file=sys.stderr)
    except OSError as exc:
        print(f"{parser.prog} {args.command}: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
