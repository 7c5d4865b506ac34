"""Command-line front end.

Subcommands: ``grid`` samples a landscape to a QLGRID01 file, ``deceptive``
labels a grid file and writes a QLMASK01 mask, ``optimize`` runs the
multi-start benchmark to CSV, ``stats`` prints gradient-magnitude quantiles,
and ``sweep`` orchestrates the full cross-product from a JSON config.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error. Every
command is deterministic given its flags and seed; the only timestamps live
in experiment manifests. The default sweep worker count can be set with the
``QLANDSCAPE_WORKERS`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import DOMAIN_MAX, build_default_circuit
from .deceptiveness import (
    DEFAULT_TOL,
    DEFAULT_TOL_G,
    deceptiveness_mask,
    write_mask,
)
from .formats import FormatError, atomic_write
from .landscape import (
    global_minimum,
    gradient_magnitude_stats,
    read_grid,
    sample_grid,
    write_grid,
)
from .optimizers import (
    DEFAULT_SUCCESS_TOL,
    OPTIMIZER_KINDS,
    OptimizerConfig,
    experiment_manifest,
    multi_start_experiment,
    success_summary,
    write_records_csv,
)

SUMMARY_SCHEMA = "qlandscape-summary-v1"
WORKERS_ENV = "QLANDSCAPE_WORKERS"


class UsageError(Exception):
    """Bad flags or config; maps to exit code 2."""


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _resolution(value: str) -> int:
    n = int(value)
    if n < 2:
        raise argparse.ArgumentTypeError(f"resolution must be >= 2, got {n}")
    return n


def _qubits(value: str) -> int:
    n = int(value)
    if n < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 qubits, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlandscape",
        description="Sample, label, and benchmark periodic two-parameter circuit loss landscapes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grid", help="sample a loss/gradient grid to a file")
    p.add_argument("--qubits", type=_qubits, default=2)
    p.add_argument("--reps", type=_positive_int, default=1,
                   help="parameter-sharing block count")
    p.add_argument("--resolution", type=_resolution, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("deceptive", help="label a grid file with the descent flood-fill")
    p.add_argument("--grid", required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help="loss tolerance around the minimum")
    p.add_argument("--grad-tol", type=float, default=DEFAULT_TOL_G,
                   help="gradient sign tolerance")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_deceptive)

    p = sub.add_parser("optimize", help="run a multi-start optimizer benchmark")
    p.add_argument("--qubits", type=_qubits, default=2)
    p.add_argument("--reps", type=_positive_int, default=1)
    p.add_argument("--optimizer", choices=OPTIMIZER_KINDS, required=True)
    p.add_argument("--lr", type=float, required=True)
    p.add_argument("--starts", type=_positive_int, default=200)
    p.add_argument("--iters", type=_positive_int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start-max", type=float, default=DOMAIN_MAX,
                   help="upper bound of the uniform start box")
    p.add_argument("--out", required=True, help="records CSV path")
    p.add_argument("--manifest", default=None,
                   help="manifest JSON path (default: derived from --out)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("stats", help="gradient-magnitude quantiles of a grid file")
    p.add_argument("--grid", required=True)
    p.add_argument("--quantiles", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sweep", help="run a full experiment cross-product from a JSON config")
    p.add_argument("config", help="JSON config file")
    p.add_argument("--output-dir", default=None, help="overrides the config output_dir")
    p.add_argument("--workers", type=_positive_int, default=None,
                   help=f"overrides config and {WORKERS_ENV}")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.set_defaults(func=cmd_sweep)

    return parser


def cmd_grid(args) -> int:
    circuit = build_default_circuit(args.qubits, args.reps)
    t0 = time.perf_counter()
    grid = sample_grid(circuit, args.resolution)
    elapsed = time.perf_counter() - t0
    write_grid(args.out, grid)
    gt = global_minimum(grid)
    stats = gradient_magnitude_stats(grid)
    print(f"grid qubits={args.qubits} reps={args.reps} resolution={args.resolution}")
    print(f"min={gt.value!r} at theta=({gt.theta[0]:.6f}, {gt.theta[1]:.6f})")
    print(f"max |grad|={stats.max!r}")
    print(f"wrote {args.out} in {elapsed:.2f}s")
    return 0


def cmd_deceptive(args) -> int:
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    if args.grad_tol < 0:
        raise UsageError("--grad-tol must be non-negative")
    grid = read_grid(args.grid)
    result = deceptiveness_mask(grid, tol=args.tol, tol_g=args.grad_tol)
    write_mask(args.out, result)
    print(f"ratio={result.ratio!r}")
    print(f"iterations_to_fixpoint={result.iterations_to_fixpoint}")
    print(f"wrote {args.out}")
    return 0


def cmd_optimize(args) -> int:
    if args.lr <= 0:
        raise UsageError("--lr must be positive")
    if not 0 < args.start_max <= DOMAIN_MAX:
        raise UsageError("--start-max must lie in (0, 4*pi]")
    circuit = build_default_circuit(args.qubits, args.reps)
    config = OptimizerConfig(kind=args.optimizer, learning_rate=args.lr)
    t0 = time.perf_counter()
    records = multi_start_experiment(
        circuit, args.starts, [config], args.iters, args.seed, args.start_max
    )
    elapsed = time.perf_counter() - t0
    write_records_csv(args.out, records)
    manifest_path = args.manifest or os.path.splitext(args.out)[0] + ".manifest.json"
    manifest = experiment_manifest(circuit, [config], args.starts, args.iters,
                                   args.seed, args.start_max)
    atomic_write(manifest_path, (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    diverged = sum(r.diverged for r in records)
    best = min(r.best_loss for r in records)
    print(f"runs={len(records)} iterations={args.iters} diverged={diverged}")
    print(f"best_loss={best!r}")
    print(f"wrote {args.out} and {manifest_path} in {elapsed:.2f}s")
    return 0


def cmd_stats(args) -> int:
    for q in args.quantiles:
        if not 0.0 <= q <= 1.0:
            raise UsageError(f"quantile levels must lie in [0, 1], got {q}")
    grid = read_grid(args.grid)
    mags = np.linalg.norm(grid.gradients, axis=2).ravel()
    values = np.quantile(mags, args.quantiles)
    if args.json:
        print(json.dumps(
            {
                "resolution": grid.resolution,
                "n_qubits": grid.n_qubits,
                "repetitions": grid.repetitions,
                "quantiles": {repr(q): float(v) for q, v in zip(args.quantiles, values)},
            },
            indent=2, sort_keys=True,
        ))
    else:
        print("quantile gradient_magnitude")
        for q, v in zip(args.quantiles, values):
            print(f"{q:g} {v!r}")
    return 0


# --- sweep ------------------------------------------------------------------

_CONFIG_KEYS = {
    "qubits", "repetitions", "resolutions", "ground_truth_resolution",
    "tolerances", "tol_g", "optimizers", "n_starts", "iterations", "seed",
    "start_max", "success_tol", "output_dir", "workers",
    "report_resolution", "report_tol",
}


@dataclass
class ExperimentConfig:
    """Validated sweep plan: the cross-product of circuit cells, grid
    resolutions, and labeling tolerances, plus one optimizer protocol."""

    qubits: list[int]
    repetitions: list[int]
    resolutions: list[int]
    ground_truth_resolution: int
    tolerances: list[float]
    tol_g: float
    optimizers: list[OptimizerConfig]
    n_starts: int
    iterations: int
    seed: int
    start_max: float
    success_tol: float
    output_dir: str
    workers: int
    report_resolution: int
    report_tol: float

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")

        def want(key, default=None):
            if key in raw:
                return raw[key]
            if default is None:
                raise UsageError(f"config missing required key {key!r}")
            return default

        def int_list(key, minimum):
            vals = want(key)
            if not isinstance(vals, list) or not vals:
                raise UsageError(f"{key} must be a non-empty list")
            out = []
            for v in vals:
                if not isinstance(v, int) or v < minimum:
                    raise UsageError(f"{key} entries must be integers >= {minimum}")
                out.append(v)
            return out

        qubits = int_list("qubits", 2)
        repetitions = int_list("repetitions", 1)
        resolutions = int_list("resolutions", 2)
        gt_res = raw.get("ground_truth_resolution", max(resolutions))
        if not isinstance(gt_res, int) or gt_res < 2:
            raise UsageError("ground_truth_resolution must be an integer >= 2")
        tolerances = want("tolerances", [DEFAULT_TOL])
        if not isinstance(tolerances, list) or not tolerances:
            raise UsageError("tolerances must be a non-empty list")
        for t in tolerances:
            if not isinstance(t, (int, float)) or t <= 0:
                raise UsageError("tolerances entries must be positive numbers")
        tol_g = raw.get("tol_g", DEFAULT_TOL_G)
        if not isinstance(tol_g, (int, float)) or tol_g < 0:
            raise UsageError("tol_g must be a non-negative number")

        optimizers = []
        for entry in raw.get("optimizers", []):
            if not isinstance(entry, dict) or "kind" not in entry or "learning_rate" not in entry:
                raise UsageError("optimizer entries need kind and learning_rate")
            extra = {k: entry[k] for k in ("adam_beta1", "adam_beta2", "adam_eps") if k in entry}
            try:
                optimizers.append(OptimizerConfig(
                    kind=entry["kind"], learning_rate=entry["learning_rate"], **extra
                ))
            except ValueError as exc:
                raise UsageError(f"bad optimizer entry: {exc}") from exc

        n_starts = raw.get("n_starts", 200)
        iterations = raw.get("iterations", 500)
        if optimizers:
            if not isinstance(n_starts, int) or n_starts < 1:
                raise UsageError("n_starts must be an integer >= 1")
            if not isinstance(iterations, int) or iterations < 1:
                raise UsageError("iterations must be an integer >= 1")
        seed = raw.get("seed", 0)
        if not isinstance(seed, int):
            raise UsageError("seed must be an integer")
        start_max = raw.get("start_max", DOMAIN_MAX)
        if not isinstance(start_max, (int, float)) or not 0 < start_max <= DOMAIN_MAX:
            raise UsageError("start_max must lie in (0, 4*pi]")
        success_tol = raw.get("success_tol", DEFAULT_SUCCESS_TOL)
        if not isinstance(success_tol, (int, float)) or success_tol <= 0:
            raise UsageError("success_tol must be positive")
        output_dir = raw.get("output_dir")
        workers = raw.get("workers")
        if workers is not None and (not isinstance(workers, int) or workers < 1):
            raise UsageError("workers must be an integer >= 1")
        report_resolution = raw.get("report_resolution", max(resolutions))
        if report_resolution not in resolutions:
            raise UsageError("report_resolution must be one of resolutions")
        report_tol = raw.get("report_tol", tolerances[0])
        if report_tol not in tolerances:
            raise UsageError("report_tol must be one of tolerances")

        return cls(
            qubits=qubits, repetitions=repetitions, resolutions=resolutions,
            ground_truth_resolution=gt_res, tolerances=[float(t) for t in tolerances],
            tol_g=float(tol_g), optimizers=sorted(optimizers, key=OptimizerConfig.sort_key),
            n_starts=n_starts, iterations=iterations, seed=seed,
            start_max=float(start_max), success_tol=float(success_tol),
            output_dir=output_dir, workers=workers,
            report_resolution=report_resolution, report_tol=float(report_tol),
        )

    def as_dict(self) -> dict:
        return {
            "qubits": self.qubits,
            "repetitions": self.repetitions,
            "resolutions": self.resolutions,
            "ground_truth_resolution": self.ground_truth_resolution,
            "tolerances": self.tolerances,
            "tol_g": self.tol_g,
            "optimizers": [
                {"kind": c.kind, "learning_rate": c.learning_rate}
                for c in self.optimizers
            ],
            "n_starts": self.n_starts,
            "iterations": self.iterations,
            "seed": self.seed,
            "start_max": self.start_max,
            "success_tol": self.success_tol,
            "report_resolution": self.report_resolution,
            "report_tol": self.report_tol,
        }


@dataclass
class _CellOutput:
    n_qubits: int
    repetitions: int
    summary: dict = field(default_factory=dict)


def _run_cell(cfg: ExperimentConfig, n_qubits: int, reps: int, out_dir: str) -> _CellOutput:
    circuit = build_default_circuit(n_qubits, reps)
    cell = _CellOutput(n_qubits=n_qubits, repetitions=reps)
    needed = sorted(set(cfg.resolutions) | {cfg.ground_truth_resolution})

    grids = {}
    grid_infos = []
    for r in needed:
        grid = sample_grid(circuit, r)
        grids[r] = grid
        name = f"grid_q{n_qubits}_b{reps}_r{r}.qlgrid"
        write_grid(os.path.join(out_dir, name), grid)
        grid_infos.append({
            "resolution": r,
            "file": name,
            "min": global_minimum(grid).value,
            "gradient_stats": gradient_magnitude_stats(grid).as_dict(),
        })

    gt = global_minimum(grids[cfg.ground_truth_resolution])

    mask_infos = []
    report_ratio = None
    for r in cfg.resolutions:
        for tol in cfg.tolerances:
            result = deceptiveness_mask(grids[r], tol=tol, tol_g=cfg.tol_g)
            name = f"mask_q{n_qubits}_b{reps}_r{r}_tol{tol:g}.qlmask"
            write_mask(os.path.join(out_dir, name), result)
            mask_infos.append({
                "resolution": r,
                "tol": tol,
                "tol_g": cfg.tol_g,
                "ratio": result.ratio,
                "iterations_to_fixpoint": result.iterations_to_fixpoint,
                "file": name,
            })
            if r == cfg.report_resolution and tol == cfg.report_tol:
                report_ratio = result.ratio

    cell.summary = {
        "n_qubits": n_qubits,
        "repetitions": reps,
        "ground_truth": {
            "resolution": cfg.ground_truth_resolution,
            "value": gt.value,
            "theta": [gt.theta[0], gt.theta[1]],
            "tie_count": len(gt.ties),
        },
        "grids": grid_infos,
        "masks": mask_infos,
    }

    if cfg.optimizers:
        records = multi_start_experiment(
            circuit, cfg.n_starts, cfg.optimizers, cfg.iterations, cfg.seed, cfg.start_max
        )
        csv_name = f"records_q{n_qubits}_b{reps}.csv"
        write_records_csv(os.path.join(out_dir, csv_name), records)
        manifest = experiment_manifest(circuit, cfg.optimizers, cfg.n_starts,
                                       cfg.iterations, cfg.seed, cfg.start_max)
        manifest_name = f"records_q{n_qubits}_b{reps}.manifest.json"
        atomic_write(os.path.join(out_dir, manifest_name),
                     (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"))
        summary = success_summary(records, gt, report_ratio, cfg.success_tol)
        cell.summary["optimizers"] = summary.as_dict()
        cell.summary["records_file"] = csv_name
        cell.summary["manifest_file"] = manifest_name
        cell.summary["n_records"] = len(records)
    return cell


def cmd_sweep(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from exc

    cfg = ExperimentConfig.from_dict(raw)
    if args.seed is not None:
        cfg.seed = args.seed
    out_dir = args.output_dir or cfg.output_dir
    if not out_dir:
        raise UsageError("output_dir must be set in the config or via --output-dir")
    workers = args.workers or cfg.workers or int(os.environ.get(WORKERS_ENV, "1"))
    if workers < 1:
        raise UsageError(f"{WORKERS_ENV} must be >= 1")
    os.makedirs(out_dir, exist_ok=True)

    cells = [(q, b) for q in cfg.qubits for b in cfg.repetitions]
    results: dict[tuple[int, int], dict] = {}
    failures = []
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            pool.submit(_run_cell, cfg, q, b, out_dir): (q, b) for q, b in cells
        }
        for future, key in futures.items():
            try:
                results[key] = future.result().summary
            except Exception as exc:  # partial-failure policy: keep going
                failures.append({
                    "n_qubits": key[0], "repetitions": key[1], "error": str(exc),
                })
    elapsed = time.perf_counter() - t0

    summary = {
        "schema": SUMMARY_SCHEMA,
        "config": cfg.as_dict(),
        "cells": [results[key] for key in sorted(results)],
        "failures": sorted(failures, key=lambda f: (f["n_qubits"], f["repetitions"])),
    }
    summary_path = os.path.join(out_dir, "summary.json")
    atomic_write(summary_path, (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    print(f"cells={len(cells)} ok={len(results)} failed={len(failures)} in {elapsed:.2f}s")
    print(f"wrote {summary_path}")
    if failures:
        for f in summary["failures"]:
            print(f"failed q={f['n_qubits']} b={f['repetitions']}: {f['error']}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> int:
    return main()
