"""Command-line interface: ``generate``, ``decompose`` and ``report``.

Exit codes: 0 success, 2 usage or invalid input, 3 I/O failure,
4 solver divergence (history is still written).
"""
import argparse
import glob
import logging
import os
import sys
import time

import numpy as np

from . import formats
from .errors import DivergenceError, FormatError, SpodError
from .metrics import RunReport, build_table, relative_reconstruction_error
from .prox import DEFAULT_RANK_TOL, estimate_rank
from .solvers import METHODS, ALM_E_UPDATES, Decomposition, SolverConfig, SpodProblem, solve
from .synth import BENCHMARKS, generate
from .transport import SnapshotMatrix, SpatialGrid, TransportOperator

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DIVERGED = 4

OUT_ENV = "ROBUST_SPOD_OUT"

log = logging.getLogger("robust_spod")


class UsageError(SpodError):
    pass


def _default_out(name):
    return os.path.join(os.environ.get(OUT_ENV, "."), name)


# generate -------------------------------------------------------------------

def cmd_generate(args):
    snap, ops, truth = generate(args.name, m=args.m, n=args.n, noise_fraction=args.noise,
                                seed=args.seed, delta_width=args.width)
    out = args.out or _default_out(args.name)
    os.makedirs(out, exist_ok=True)
    formats.write_matrix(os.path.join(out, "Q.matrix"), snap.values)
    for k, op in enumerate(ops, 1):
        formats.write_vector(os.path.join(out, f"shift_{k}.txt"), op.shifts)
    formats.write_vector(os.path.join(out, "times.txt"), snap.times)
    formats.write_matrix(os.path.join(out, "mask.matrix"),
                         truth.noise_mask.astype(np.float64).reshape(-1, 2))
    formats.write_kv(os.path.join(out, "meta.txt"), {
        "benchmark": args.name,
        "m": snap.shape[0],
        "n": snap.shape[1],
        "x_min": repr(snap.grid.x_min),
        "dx": repr(snap.grid.dx),
        "true_ranks": " ".join(str(r) for r in truth.true_ranks),
        "seed": args.seed if args.seed is not None else 0,
        "noise_fraction": repr(float(args.noise if args.noise is not None
                                     else (0.125 if args.name == "sine_noise" else 0.0))),
        "mask_count": len(truth.noise_mask),
    })
    print(f"wrote {args.name} ({snap.shape[0]}x{snap.shape[1]}, {len(ops)} frames) to {out}")
    return EXIT_OK


# decompose ------------------------------------------------------------------

# CLI flag -> (manifest key, SolverConfig field)
_CONFIG_FLAGS = {
    "method": "method",
    "lam": "lambdas",
    "lambda_noise": "lambda_noise",
    "mu": "mu",
    "mu_preset": "mu_preset",
    "alpha": "step_alpha",
    "alphas": "step_alphas",
    "tol": "delta_tol",
    "max_iter": "max_iter",
    "rank_tol": "rank_rel_tol",
    "alm_e_update": "alm_e_update",
}
_INPUT_FLAGS = ("input_dir", "data", "shifts", "times", "dx", "x_min")


def _merge(args, manifest):
    """Flag > manifest > default."""
    cfg = dict(manifest.get("config", {}))
    inputs = dict(manifest.get("inputs", {}))
    for flag, key in _CONFIG_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            cfg[key] = v
    for flag in _INPUT_FLAGS:
        v = getattr(args, flag)
        if v is not None:
            inputs[flag] = v
    seed = args.seed if args.seed is not None else manifest.get("seed", 0)
    return cfg, inputs, seed


def _load_inputs(inputs):
    input_dir = inputs.get("input_dir")
    data_path = inputs.get("data")
    shift_paths = inputs.get("shifts")
    times_path = inputs.get("times")
    meta = {}
    if input_dir:
        data_path = data_path or os.path.join(input_dir, "Q.matrix")
        if not shift_paths:
            shift_paths = sorted(glob.glob(os.path.join(input_dir, "shift_*.txt")),
                                 key=lambda p: int(p.rsplit("_", 1)[1].split(".")[0]))
        t = os.path.join(input_dir, "times.txt")
        times_path = times_path or (t if os.path.exists(t) else None)
        mp = os.path.join(input_dir, "meta.txt")
        if os.path.exists(mp):
            meta = formats.read_kv(mp)
    if not data_path:
        raise UsageError("no input data: give an input directory or --data")
    if not shift_paths:
        raise UsageError("no shift files: give --shifts or an input directory with shift_*.txt")

    if str(data_path).endswith(".csv"):
        values = formats.read_csv_matrix(data_path)
    else:
        values = formats.read_matrix(data_path)
    m, n = values.shape
    dx = inputs.get("dx", meta.get("dx"))
    x_min = inputs.get("x_min", meta.get("x_min", 0.0))
    if dx is None:
        raise UsageError("grid spacing unknown: pass --dx or provide meta.txt")
    grid = SpatialGrid(m, float(x_min), float(dx))
    times = formats.read_vector(times_path) if times_path else np.arange(n, dtype=np.float64)
    snap = SnapshotMatrix(values, grid, times)
    ops = [TransportOperator(formats.read_vector(p), grid) for p in shift_paths]
    resolved = {
        "input_dir": input_dir,
        "data": os.path.abspath(data_path),
        "shifts": [os.path.abspath(p) for p in shift_paths],
        "times": os.path.abspath(times_path) if times_path else None,
        "dx": float(dx),
        "x_min": float(x_min),
    }
    return snap, ops, meta, resolved


def _config_dict(config):
    out = {}
    for key in _CONFIG_FLAGS.values():
        v = getattr(config, key)
        if isinstance(v, tuple):
            v = list(v)
        out[key] = v
    return out


def _write_history(path, history, n_frames):
    header = ["iter", "criterion", "rel_error"] + [f"rank_{k + 1}" for k in range(n_frames)]
    header += ["noise_l1", "seconds"]
    lines = [",".join(header)]
    for r in history:
        row = [str(r.iteration), repr(r.criterion), repr(r.rel_error)]
        row += [str(k) for k in r.ranks] + [repr(r.noise_l1), repr(r.seconds)]
        lines.append(",".join(row))
    formats.write_text(path, "\n".join(lines) + "\n")


def _write_spectra(path, spectra):
    formats.write_text(path, "".join(" ".join(repr(float(v)) for v in s) + "\n" for s in spectra))


def read_spectra(path):
    with open(path) as fh:
        return [np.array([float(v) for v in ln.split()]) for ln in fh if ln.strip()]


def read_history(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [ln.strip().split(",") for ln in fh if ln.strip()]
    return header, rows


def cmd_decompose(args):
    manifest = formats.read_json(args.manifest) if args.manifest else {}
    cfg, inputs, seed = _merge(args, manifest)
    snap, ops, meta, resolved_inputs = _load_inputs(inputs)
    lam_noise = float(cfg.get("lambda_noise", 0.0) or 0.0)
    problem = SpodProblem(snap, ops, noise_enabled=lam_noise > 0)
    config = SolverConfig(**cfg).resolved(problem)

    out = args.out or manifest.get("out") or _default_out(f"run-{config.method}")
    os.makedirs(out, exist_ok=True)
    manifest_out = {
        "benchmark": meta.get("benchmark", os.path.basename(os.path.normpath(
            resolved_inputs["input_dir"] or os.path.dirname(resolved_inputs["data"])))),
        "inputs": resolved_inputs,
        "config": _config_dict(config),
        "seed": int(seed),
        "out": os.path.abspath(out),
    }
    formats.write_json(os.path.join(out, "manifest.json"), manifest_out)

    start = time.perf_counter()
    try:
        decomposition, history = solve(problem, config)
    except DivergenceError as exc:
        if exc.history is not None:
            _write_history(os.path.join(out, "history.csv"), exc.history, problem.n_frames)
        formats.write_kv(os.path.join(out, "summary.txt"), {"status": "diverged",
                                                            "iterations": len(exc.history or [])})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    cpu = time.perf_counter() - start

    for k, q in enumerate(decomposition.frames, 1):
        formats.write_matrix(os.path.join(out, f"frame_{k}.matrix"), q)
    formats.write_matrix(os.path.join(out, "E.matrix"), decomposition.noise)
    _write_spectra(os.path.join(out, "spectra.txt"), decomposition.spectra)
    _write_history(os.path.join(out, "history.csv"), history, problem.n_frames)
    rel = relative_reconstruction_error(problem, decomposition)
    formats.write_kv(os.path.join(out, "summary.txt"), {
        "status": "converged" if decomposition.converged else "max_iter",
        "method": config.method,
        "rel_error": repr(rel),
        "ranks": " ".join(str(r) for r in decomposition.ranks),
        "iterations": decomposition.iterations,
        "cpu_seconds": repr(cpu),
    })
    print(f"{config.method}: {decomposition.iterations} iterations, rel_error={rel:.3e}, "
          f"ranks={decomposition.ranks} -> {out}")
    return EXIT_OK


# report ---------------------------------------------------------------------

def load_run_report(run_dir):
    """Rebuild a :class:`RunReport` from the files of one ``decompose`` run."""
    manifest = formats.read_json(os.path.join(run_dir, "manifest.json"))
    summary = formats.read_kv(os.path.join(run_dir, "summary.txt"))
    if summary.get("status") == "diverged":
        raise FormatError(f"{run_dir}: run diverged, nothing to report")
    snap, ops, _, _ = _load_inputs(manifest["inputs"])
    frames = [formats.read_matrix(os.path.join(run_dir, f"frame_{k}.matrix"))
              for k in range(1, len(ops) + 1)]
    noise = formats.read_matrix(os.path.join(run_dir, "E.matrix"))
    problem = SpodProblem(snap, ops)
    spectra = read_spectra(os.path.join(run_dir, "spectra.txt"))
    tol = manifest["config"].get("rank_rel_tol", DEFAULT_RANK_TOL)
    ranks = tuple(estimate_rank(s, tol) for s in spectra)
    _, rows = read_history(os.path.join(run_dir, "history.csv"))
    dec = Decomposition(frames, noise, spectra, ranks, summary["status"] == "converged", len(rows))
    return RunReport(
        method=manifest["config"]["method"],
        relative_error=relative_reconstruction_error(problem, dec),
        ranks=ranks,
        iterations=len(rows),
        cpu_seconds=float(summary.get("cpu_seconds", "nan")),
        converged=dec.converged,
        benchmark=manifest.get("benchmark", ""),
    )


def cmd_report(args):
    reports = [load_run_report(d) for d in args.runs]
    table = build_table(reports)
    out = args.out or _default_out("report.csv")
    if out.endswith(".txt"):
        formats.write_text(out, table.to_text())
    else:
        formats.write_text(out, table.to_csv())
    sys.stdout.write(table.to_text())
    return EXIT_OK


# parser ---------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="robust-spod",
                                     description="Robust shifted POD decompositions.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic benchmark to disk")
    g.add_argument("name", choices=BENCHMARKS)
    g.add_argument("--m", type=int, help="spatial points")
    g.add_argument("--n", type=int, help="time samples")
    g.add_argument("--noise", type=float, help="salt-and-pepper fraction")
    g.add_argument("--seed", type=int)
    g.add_argument("--width", type=float, help="Gaussian profile width")
    g.add_argument("--out", help=f"output directory (default ${OUT_ENV}/<name>)")
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("decompose", help="run a solver on snapshot data")
    d.add_argument("input_dir", nargs="?", help="directory written by 'generate'")
    d.add_argument("--data", help="matrix file (.matrix or .csv)")
    d.add_argument("--shifts", nargs="+", help="one shift file per frame")
    d.add_argument("--times", help="time samples file")
    d.add_argument("--dx", type=float, help="grid spacing")
    d.add_argument("--x-min", type=float, dest="x_min")
    d.add_argument("--manifest", help="replay settings from a manifest.json")
    d.add_argument("--method", choices=METHODS)
    d.add_argument("--lambda", dest="lam", type=float, nargs="+",
                   help="nuclear-norm weight(s), one value or one per frame")
    d.add_argument("--lambda-noise", type=float, help="l1 weight; 0 disables the noise term")
    d.add_argument("--mu", type=float, help="ALM penalty (default from --mu-preset)")
    d.add_argument("--mu-preset", choices=("snapshots", "frames"))
    d.add_argument("--alpha", type=float, help="FB step size (default 1/K)")
    d.add_argument("--alphas", type=float, nargs="+", help="BFB per-block steps (K+1 values)")
    d.add_argument("--tol", type=float, help="relative stopping tolerance")
    d.add_argument("--max-iter", type=int)
    d.add_argument("--rank-tol", type=float, help="relative singular value cutoff for ranks")
    d.add_argument("--alm-e-update", choices=ALM_E_UPDATES)
    d.add_argument("--seed", type=int, help="recorded in the manifest")
    d.add_argument("--out", help=f"output directory (default ${OUT_ENV}/run-<method>)")
    d.set_defaults(func=cmd_decompose)

    r = sub.add_parser("report", help="tabulate finished runs")
    r.add_argument("runs", nargs="*", help="run directories written by 'decompose'")
    r.add_argument("--out", help="table file; .txt for aligned text, CSV otherwise")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "report" and not args.runs:
        parser.print_usage(sys.stderr)
        print("robust-spod report: error: at least one run directory is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SpodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
