"""Command-line front end.

Subcommands: ``solve``, ``phase-transition``, ``noise-sweep``, ``table`` and
``htp-bench``. Every sweep accepts ``--config FILE`` (a JSON object with
:class:`~stormspar.experiments.ExperimentSpec` fields); flags override the
file, and the file overrides the subcommand's preset. The base seed falls
back to ``$STORMSPAR_SEED`` when neither sets it.

Exit codes: 0 ran and met its criterion, 1 ran but did not, 2 usage or
configuration error.
"""
import argparse
import csv
import io
import json
import math
import os
import sys
import time

from . import __version__
from .experiments import ExperimentSpec, aggregate, htp_benchmark, run_experiment
from .htp import HtpConfig
from .model import (
    generate_ensemble,
    generate_ground_truth,
    is_success,
    measurement_snr_db,
    relative_error,
)
from .rng import SeededRng
from .solver import default_sample_size, stormspar_solve

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

PHASE_FACTORS = [1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0]
DIMENSION_N = [100, 200, 300, 400, 500, 750, 1000]
SPARSITY_S = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 75, 100]

PRESETS = {
    "solve": dict(kind="single", n_values=[100], s_values=[10], sample_factors=[2.5],
                  sigma_values=[0.01], trials=1),
    "phase-transition": dict(kind="phase_transition", n_values=[200], s_values=[10],
                             sample_factors=PHASE_FACTORS, sigma_values=[0.01], trials=50),
    "noise-sweep": dict(kind="noise_sweep", n_values=[300], s_values=[10],
                        sample_factors=[2.5], snr_db_values=[20.0, 30.0, 40.0, 50.0],
                        trials=30),
    "dimension": dict(kind="dimension_table", n_values=DIMENSION_N, s_values=[10],
                      sample_factors=[2.5], sigma_values=[0.01], trials=50),
    "sparsity": dict(kind="sparsity_table", n_values=[2000], s_values=SPARSITY_S,
                     sample_factors=[2.5], sigma_values=[0.01], trials=50),
}


class UsageError(Exception):
    pass


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _add_common(p, lists):
    ints = _int_list if lists else int
    floats = _float_list if lists else float
    p.add_argument("--config", dest="config_path", help="JSON file with ExperimentSpec fields")
    p.add_argument("--n", type=ints, help="signal dimension" + (" (comma list)" if lists else ""))
    p.add_argument("--s", type=ints, help="sparsity" + (" (comma list)" if lists else ""))
    p.add_argument("--m", type=ints, help="sample count; default is floor(factor*s*(ln n+ln 100))")
    p.add_argument("--sigma", type=floats, help="noise standard deviation")
    p.add_argument("--gamma", type=float, help="row subsample fraction (default: formula)")
    p.add_argument("--delta", type=float, help="outer stopping tolerance")
    p.add_argument("--max-iters", type=int, help="outer iteration cap")
    p.add_argument("--step-size", type=float, help="HTP step size")
    p.add_argument("--seed", type=int, help="base seed (fallback: $STORMSPAR_SEED)")
    p.add_argument("--tol", type=float, help="success tolerance on the relative error")
    p.add_argument("--output", dest="output_format", choices=["csv", "json"],
                   help="output format (solve prints text when omitted)")
    p.add_argument("--output-path", help="output file prefix or directory for sweeps")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stormspar", description="Sparse phase retrieval by stochastic alternating minimization."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("solve", help="solve one random instance and report")
    _add_common(p, lists=False)
    p.add_argument("--factor", type=float, help="sample factor when --m is omitted")
    p.add_argument("--trace", action=argparse.BooleanOptionalAction, default=True,
                   help="include the per-iteration step-norm trace")

    for name, helptext in [
        ("phase-transition", "success rate against m/K"),
        ("noise-sweep", "relative error against measurement SNR"),
        ("table", "success rate and iterations over n or s"),
    ]:
        p = sub.add_parser(name, help=helptext)
        _add_common(p, lists=True)
        p.add_argument("--factors", type=_float_list, help="sample factors m/K (comma list)")
        p.add_argument("--trials", type=int, help="Monte-Carlo trials per grid point")
        p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        if name == "noise-sweep":
            p.add_argument("--snr", type=_float_list, help="target SNRs in dB (comma list)")
        if name == "table":
            p.add_argument("--kind", choices=["dimension", "sparsity"], default="dimension")

    p = sub.add_parser("htp-bench", help="HTP against exhaustive support search")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--m", type=int, default=15)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int)
    # recovery at m < n peaks for mu in [1.25, 1.75] on column-normalized A
    p.add_argument("--step-size", type=float, default=1.5)
    p.add_argument("--min-rate", type=float, default=0.95,
                   help="agreement rate needed for exit code 0")
    p.add_argument("--output", dest="output_format", choices=["csv", "json"])
    p.add_argument("--output-path")
    return parser


def _env_seed():
    raw = os.environ.get("STORMSPAR_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"STORMSPAR_SEED must be an integer, got {raw!r}")


def _load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return data


def _as_list(value):
    return value if isinstance(value, list) else [value]


def resolve_spec(args):
    """Merge preset, config file and flags into an ExperimentSpec."""
    key = args.subcommand if args.subcommand != "table" else args.kind
    fields = dict(PRESETS[key])
    if args.config_path:
        fields.update(_load_config(args.config_path))
    if "base_seed" not in fields or args.seed is not None:
        seed = args.seed if args.seed is not None else _env_seed()
        fields["base_seed"] = seed if seed is not None else fields.get("base_seed", 0)

    flag_map = dict(n="n_values", s="s_values", factors="sample_factors",
                    trials="trials", gamma="gamma", delta="delta", tol="success_tol",
                    max_iters="max_outer_iters", step_size="htp_step_size")
    for flag, name in flag_map.items():
        value = getattr(args, flag, None)
        if value is not None:
            fields[name] = _as_list(value) if name.endswith("_values") else value
    if getattr(args, "factor", None) is not None:
        fields["sample_factors"] = [args.factor]
    if args.m is not None:
        fields["m_values"] = _as_list(args.m)
        fields["m_rule"] = "explicit"
    if args.sigma is not None:
        fields["sigma_values"] = _as_list(args.sigma)
        fields["snr_db_values"] = []
    if getattr(args, "snr", None) is not None:
        fields["snr_db_values"] = args.snr
    try:
        spec = ExperimentSpec.from_dict(fields)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc))
    return spec


# -- formatting ---------------------------------------------------------------

def _fmt(name, value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if name in ("success_rate", "factor"):
            return f"{value:.2f}"
        if "rel_error" in name or name in ("step_norm", "objective", "htp_residual",
                                           "best_residual", "sigma"):
            return f"{value:.6e}"
        return f"{value:.6g}"
    return str(value)


def write_csv(rows, columns, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(c, row.get(c)) for c in columns])


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_json(payload, fh):
    json.dump(_json_safe(payload), fh, indent=2, sort_keys=True, allow_nan=False)
    fh.write("\n")


# -- subcommands --------------------------------------------------------------

def _solve_report(spec, show_trace):
    n, s, sigma = spec.n_values[0], spec.s_values[0], None
    if s > n:
        raise UsageError("sparsity exceeds dimension")
    if spec.m_rule == "explicit":
        m = spec.m_values[0]
    else:
        m = default_sample_size(n, s, spec.sample_factors[0])
    sigma = spec.sigma_values[0] if spec.sigma_values else 0.0
    truth_rng, ens_rng, solve_rng = SeededRng(spec.base_seed).spawn(3)
    try:
        truth = generate_ground_truth(n, s, truth_rng)
        ens = generate_ensemble(truth, m, sigma, ens_rng)
        start = time.perf_counter()
        result = stormspar_solve(ens.matrix, ens.measurements, s,
                                 spec.solver_config(), rng=solve_rng)
        elapsed = time.perf_counter() - start
    except ValueError as exc:
        raise UsageError(str(exc))
    report = dict(
        n=n, s=s, m=m, sigma=sigma, gamma=result.gamma, delta=spec.delta,
        seed=spec.base_seed,
        snr_db=measurement_snr_db(ens),
        rel_error=relative_error(result.estimate, truth),
        success=is_success(result.estimate, truth, spec.success_tol),
        outer_iters=result.outer_iters,
        termination=result.termination.value,
        wall_time=elapsed,
    )
    if show_trace:
        report["step_norm_trace"] = result.step_norm_trace
    return report


def cmd_solve(args, out):
    report = _solve_report(resolve_spec(args), args.trace)
    if args.output_format == "json":
        write_json(report, out)
    elif args.output_format == "csv":
        row = dict(report)
        if "step_norm_trace" in row:
            row["step_norm_trace"] = " ".join(f"{v:.6e}" for v in row["step_norm_trace"])
        write_csv([row], list(row), out)
    else:
        for key, value in report.items():
            if key == "step_norm_trace":
                continue
            out.write(f"{key}: {_fmt(key, value)}\n")
        if "step_norm_trace" in report:
            out.write("step_norm_trace:\n")
            for i, v in enumerate(report["step_norm_trace"], 1):
                out.write(f"  {i} {v:.6e}\n")
    return EXIT_OK if report["success"] else EXIT_FAILED


RECORD_COLUMNS = ["n", "s", "m", "factor", "sigma", "target_snr_db", "snr_db",
                  "trial_index", "seed", "stream_id", "success", "rel_error",
                  "outer_iters", "termination", "wall_time", "skipped", "skip_reason"]
AGGREGATE_COLUMNS = ["n", "s", "m", "factor", "sigma", "target_snr_db", "snr_db",
                     "success_rate", "aver_iter", "mean_outer_iters", "mean_rel_error",
                     "trial_count", "skipped_count"]


def _aggregate_dict(row):
    d = row.to_dict()
    d["snr_db"] = d.pop("mean_snr_db")
    return d


def _series(kind, rows):
    """Two-column (x, y) series, one per curve, keyed by a file label."""
    series = {}
    if kind == "phase_transition":
        for r in rows:
            label = f"n{r.n}_s{r.s}"
            series.setdefault(label, ("factor", "success_rate", []))[2].append(
                (r.factor, r.success_rate))
    elif kind == "noise_sweep":
        for r in rows:
            if not math.isfinite(r.mean_snr_db):
                continue
            label = f"n{r.n}_s{r.s}_m{r.m}"
            x = r.target_snr_db if r.target_snr_db is not None else r.mean_snr_db
            series.setdefault(label, ("snr_db", "mean_rel_error", []))[2].append(
                (x, r.mean_rel_error))
        for _, _, pts in series.values():
            pts.sort()
    return series


def _output_prefix(args, default):
    path = args.output_path or default
    if path.endswith(os.sep) or os.path.isdir(path):
        path = os.path.join(path, default)
    return path


def _open_out(path):
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}")


def cmd_sweep(args, out):
    spec = resolve_spec(args)
    workers = getattr(args, "workers", 1)
    if workers < 1:
        raise UsageError("--workers must be at least 1")
    records = run_experiment(spec, workers)
    rows = aggregate(records)
    fmt = args.output_format or "csv"
    prefix = _output_prefix(args, f"stormspar-{args.subcommand}")
    written = []

    def emit(suffix, payload_rows, columns, extra=None):
        path = f"{prefix}_{suffix}.{fmt}"
        with _open_out(path) as fh:
            if fmt == "csv":
                write_csv(payload_rows, columns, fh)
            else:
                doc = {"spec": spec.to_dict(), "rows": [
                    {c: r.get(c) for c in columns} for r in payload_rows]}
                if extra:
                    doc.update(extra)
                write_json(doc, fh)
        written.append(path)

    emit("records", [r.to_dict() for r in records], RECORD_COLUMNS)
    emit("aggregate", [_aggregate_dict(r) for r in rows], AGGREGATE_COLUMNS)
    for label, (xname, yname, pts) in _series(spec.kind, rows).items():
        emit(f"series_{label}", [{xname: x, yname: y} for x, y in pts], [xname, yname])

    write_csv([_aggregate_dict(r) for r in rows],
              ["n", "s", "m", "factor", "snr_db", "success_rate", "aver_iter",
               "mean_rel_error", "trial_count", "skipped_count"], out)
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    if all(r.trial_count == 0 for r in rows):
        return EXIT_FAILED
    return EXIT_OK


def cmd_htp_bench(args, out):
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    if not 1 <= args.s <= min(args.m, args.n):
        raise UsageError("need 1 <= s <= min(m, n)")
    try:
        config = HtpConfig(step_size=args.step_size)
    except ValueError as exc:
        raise UsageError(str(exc))
    rows = htp_benchmark(args.n, args.s, args.m, args.trials, seed, config)
    rate = sum(r["match"] for r in rows) / len(rows)
    columns = ["trial_index", "htp_residual", "best_residual", "inner_iters",
               "converged", "match"]
    if args.output_path:
        with _open_out(args.output_path) as fh:
            if args.output_format == "json":
                write_json({"match_rate": rate, "rows": rows}, fh)
            else:
                write_csv(rows, columns, fh)
    out.write(f"match_rate: {rate:.2f} ({sum(r['match'] for r in rows)}/{len(rows)})\n")
    return EXIT_OK if rate >= args.min_rate else EXIT_FAILED


COMMANDS = {
    "solve": cmd_solve,
    "phase-transition": cmd_sweep,
    "noise-sweep": cmd_sweep,
    "table": cmd_sweep,
    "htp-bench": cmd_htp_bench,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.subcommand](args, out)
    except UsageError as exc:
        print(f"stormspar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run(argv=None):
    """Call :func:`main` and capture its output as a string."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()
