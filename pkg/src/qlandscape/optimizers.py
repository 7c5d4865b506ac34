"""Gradient-descent benchmarks against grid ground truth.

SGD and Adam iterate on the exact analytic gradient (the loss comes from a
simulator, so there is no sampling noise to model). The multi-start harness
draws a seeded set of uniform starting points, runs every optimizer
configuration from the same starts for a paired comparison, and summarizes
best/last losses per configuration against the grid minimum.

All runs in an experiment advance in lockstep so each iteration evaluates a
single batched circuit call; because every update is elementwise per run,
batch composition cannot change any individual trajectory.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .circuit import DOMAIN_MAX, CircuitSpec
from .formats import atomic_write
from .gradients import batch_loss_and_gradient

OPTIMIZER_KINDS = ("sgd", "adam")
BENCHMARK_LEARNING_RATES = (0.0001, 0.001, 0.01, 0.1, 1.0)
GENERATOR_ID = "numpy-pcg64-uniform"
UNDERCUT_SLACK = 1e-9
DEFAULT_SUCCESS_TOL = 1e-2
MANIFEST_SCHEMA = "qlandscape-experiment-v1"
CSV_COLUMNS = ("run_id", "optimizer", "lr", "repetitions", "iter", "theta1", "theta2", "loss")


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str
    learning_rate: float
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"optimizer kind must be one of {OPTIMIZER_KINDS}, got {self.kind!r}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ValueError("adam betas must lie in [0, 1)")
        if not self.adam_eps > 0:
            raise ValueError("adam_eps must be positive")

    def sort_key(self):
        return (self.kind, self.learning_rate)

    def label(self) -> str:
        return f"{self.kind}-lr{self.learning_rate:g}"


@dataclass
class AdamState:
    """First/second moment accumulators and the step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n_params: int) -> "AdamState":
        return cls(np.zeros(n_params), np.zeros(n_params), 0)


def sgd_step(theta, gradient, config: OptimizerConfig) -> np.ndarray:
    """theta' = theta - lr * gradient, no momentum, no clipping."""
    theta = np.asarray(theta, dtype=np.float64)
    gradient = np.asarray(gradient, dtype=np.float64)
    if theta.shape != gradient.shape:
        raise ValueError("theta and gradient shapes must match")
    return theta - config.learning_rate * gradient


def adam_step(theta, gradient, state: AdamState,
              config: OptimizerConfig) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; the step counter increments first."""
    theta = np.asarray(theta, dtype=np.float64)
    gradient = np.asarray(gradient, dtype=np.float64)
    if theta.shape != gradient.shape:
        raise ValueError("theta and gradient shapes must match")
    t = state.t + 1
    m = config.adam_beta1 * state.m + (1.0 - config.adam_beta1) * gradient
    v = config.adam_beta2 * state.v + (1.0 - config.adam_beta2) * gradient * gradient
    m_hat = m / (1.0 - config.adam_beta1**t)
    v_hat = v / (1.0 - config.adam_beta2**t)
    theta_next = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    return theta_next, AdamState(m, v, t)


@dataclass
class RunRecord:
    """One optimization run: full trajectory, losses, and elitism fields.

    Parameters evolve unwrapped; the loss is 4*pi-periodic per coordinate so
    wrapping would be cosmetic. ``canonical_thetas`` folds the trajectory back
    into [0, 4*pi) when a normalized view is needed.
    """

    run_id: str
    config: OptimizerConfig
    repetitions: int
    start_index: int
    seed: int
    thetas: np.ndarray  # (iterations + 1, n_params)
    losses: np.ndarray  # (iterations + 1,)
    diverged: bool = False

    @property
    def start(self) -> tuple[float, float]:
        return tuple(float(x) for x in self.thetas[0])

    @property
    def best_loss(self) -> float:
        return float(np.min(self.losses))

    @property
    def best_iter(self) -> int:
        return int(np.argmin(self.losses))

    @property
    def last_loss(self) -> float:
        return float(self.losses[-1])

    def canonical_thetas(self) -> np.ndarray:
        return np.mod(self.thetas, DOMAIN_MAX)


def sample_starts(n_starts: int, seed: int, start_max: float = DOMAIN_MAX) -> np.ndarray:
    """Uniform (n_starts, 2) start coordinates from a PCG64 stream.

    The generator is pinned so a seed fully determines the start set; the
    identifier :data:`GENERATOR_ID` is recorded in experiment manifests.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    if not 0 < start_max <= DOMAIN_MAX:
        raise ValueError("start_max must lie in (0, 4*pi]")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.uniform(0.0, start_max, size=(n_starts, 2))


def _drive(circuit: CircuitSpec, configs, starts: np.ndarray, iterations: int):
    """Advance every (config, start) pair one shared batched evaluation per
    iteration. Returns trajectories (C, m, iterations+1, 2), losses
    (C, m, iterations+1), and a diverged flag array (C, m).

    A run whose proposed parameters go non-finite is frozen at its last
    finite point; its remaining rows repeat that point's loss.
    """
    n_configs = len(configs)
    m = starts.shape[0]
    rows = n_configs * m
    theta = np.tile(starts, (n_configs, 1))
    hist_theta = np.empty((rows, iterations + 1, 2))
    hist_loss = np.empty((rows, iterations + 1))
    active = np.ones(rows, dtype=bool)
    adam_m = np.zeros((rows, 2))
    adam_v = np.zeros((rows, 2))

    for t in range(iterations + 1):
        losses, grads = batch_loss_and_gradient(circuit, theta)
        hist_theta[:, t] = theta
        hist_loss[:, t] = losses
        if t == iterations:
            break
        proposed = np.empty_like(theta)
        for c, config in enumerate(configs):
            sl = slice(c * m, (c + 1) * m)
            if config.kind == "sgd":
                proposed[sl] = theta[sl] - config.learning_rate * grads[sl]
            else:
                step = t + 1
                adam_m[sl] = config.adam_beta1 * adam_m[sl] + (1.0 - config.adam_beta1) * grads[sl]
                adam_v[sl] = config.adam_beta2 * adam_v[sl] + (1.0 - config.adam_beta2) * grads[sl] * grads[sl]
                m_hat = adam_m[sl] / (1.0 - config.adam_beta1**step)
                v_hat = adam_v[sl] / (1.0 - config.adam_beta2**step)
                proposed[sl] = theta[sl] - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
        active &= np.isfinite(proposed).all(axis=1)
        theta = np.where(active[:, None], proposed, theta)

    shape4 = (n_configs, m, iterations + 1, 2)
    return (hist_theta.reshape(shape4), hist_loss.reshape(shape4[:3]),
            (~active).reshape(n_configs, m))


def run_optimization(circuit: CircuitSpec, start, config: OptimizerConfig,
                     iterations: int, seed: int = 0,
                     start_index: int = 0) -> RunRecord:
    """Optimize from a single start, recording the loss at the start and
    after every step (iterations + 1 entries)."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    start = np.asarray(start, dtype=np.float64).reshape(1, circuit.n_params)
    if not np.all(np.isfinite(start)):
        raise ValueError("start must be finite")
    thetas, losses, diverged = _drive(circuit, [config], start, iterations)
    return RunRecord(
        run_id=f"{config.label()}-b{circuit.repetitions}-s{start_index:04d}",
        config=config,
        repetitions=circuit.repetitions,
        start_index=start_index,
        seed=seed,
        thetas=thetas[0, 0],
        losses=losses[0, 0],
        diverged=bool(diverged[0, 0]),
    )


def multi_start_experiment(circuit: CircuitSpec, n_starts: int, configs,
                           iterations: int, seed: int,
                           start_max: float = DOMAIN_MAX) -> list[RunRecord]:
    """Run every configuration from the same seeded start set.

    Records come back in canonical order, configurations sorted by
    (kind, learning_rate) and starts by index, independent of input order.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    configs = sorted(configs, key=OptimizerConfig.sort_key)
    if not configs:
        raise ValueError("need at least one optimizer config")
    if len({c.sort_key() for c in configs}) != len(configs):
        raise ValueError("duplicate optimizer configs")
    starts = sample_starts(n_starts, seed, start_max)
    thetas, losses, diverged = _drive(circuit, configs, starts, iterations)
    records = []
    for c, config in enumerate(configs):
        for i in range(n_starts):
            records.append(RunRecord(
                run_id=f"{config.label()}-b{circuit.repetitions}-s{i:04d}",
                config=config,
                repetitions=circuit.repetitions,
                start_index=i,
                seed=seed,
                thetas=thetas[c, i],
                losses=losses[c, i],
                diverged=bool(diverged[c, i]),
            ))
    return records


# --- summaries ------------------------------------------------------------------

@dataclass
class DistStats:
    """Five-number summary plus mean, quartiles by linear interpolation."""

    min: float
    q25: float
    median: float
    q75: float
    max: float
    mean: float

    @classmethod
    def of(cls, values) -> "DistStats":
        arr = np.asarray(values, dtype=np.float64)
        q = np.quantile(arr, [0.0, 0.25, 0.5, 0.75, 1.0])
        return cls(float(q[0]), float(q[1]), float(q[2]), float(q[3]),
                   float(q[4]), float(np.mean(arr)))

    def as_dict(self) -> dict:
        return {"min": self.min, "q25": self.q25, "median": self.median,
                "q75": self.q75, "max": self.max, "mean": self.mean}


@dataclass
class GroupSummary:
    """Per-(optimizer, learning rate) distribution over starts."""

    optimizer: str
    learning_rate: float
    n_runs: int
    n_diverged: int
    best: DistStats
    last: DistStats
    success_fraction: float
    undercut_count: int

    def as_dict(self) -> dict:
        return {
            "optimizer": self.optimizer,
            "learning_rate": self.learning_rate,
            "n_runs": self.n_runs,
            "n_diverged": self.n_diverged,
            "best": self.best.as_dict(),
            "last": self.last.as_dict(),
            "success_fraction": self.success_fraction,
            "undercut_count": self.undercut_count,
        }


@dataclass
class ExperimentSummary:
    repetitions: int
    ground_truth_min: float
    deceptiveness_ratio: float | None
    success_tol: float
    groups: list[GroupSummary] = field(default_factory=list)

    def group(self, kind: str, lr: float) -> GroupSummary:
        for g in self.groups:
            if g.optimizer == kind and g.learning_rate == lr:
                return g
        raise KeyError(f"no group {kind} lr={lr}")

    def as_dict(self) -> dict:
        return {
            "repetitions": self.repetitions,
            "ground_truth_min": self.ground_truth_min,
            "deceptiveness_ratio": self.deceptiveness_ratio,
            "success_tol": self.success_tol,
            "groups": [g.as_dict() for g in self.groups],
        }


def success_summary(records, ground_truth, deceptiveness=None,
                    success_tol: float = DEFAULT_SUCCESS_TOL) -> ExperimentSummary:
    """Quartile statistics of best and last loss per configuration, with the
    grid minimum and deceptiveness ratio attached for joint reporting.

    A run succeeds when its best loss comes within ``success_tol`` of the
    ground-truth minimum; a run undercuts when its best loss beats the grid
    minimum by more than the numeric slack (it found an off-grid point).
    """
    if not records:
        raise ValueError("records must be non-empty")
    reps = {r.repetitions for r in records}
    if len(reps) != 1:
        raise ValueError(f"records mix repetition counts {sorted(reps)}")
    gt_value = ground_truth.value if hasattr(ground_truth, "value") else float(ground_truth)
    ratio = None
    if deceptiveness is not None:
        ratio = deceptiveness.ratio if hasattr(deceptiveness, "ratio") else float(deceptiveness)

    by_config: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        by_config.setdefault(rec.config.sort_key(), []).append(rec)

    groups = []
    for key in sorted(by_config):
        runs = sorted(by_config[key], key=lambda r: r.start_index)
        best = np.array([r.best_loss for r in runs])
        last = np.array([r.last_loss for r in runs])
        groups.append(GroupSummary(
            optimizer=key[0],
            learning_rate=key[1],
            n_runs=len(runs),
            n_diverged=sum(r.diverged for r in runs),
            best=DistStats.of(best),
            last=DistStats.of(last),
            success_fraction=float(np.mean(best <= gt_value + success_tol)),
            undercut_count=int(np.sum(best < gt_value - UNDERCUT_SLACK)),
        ))
    return ExperimentSummary(
        repetitions=reps.pop(),
        ground_truth_min=gt_value,
        deceptiveness_ratio=ratio,
        success_tol=success_tol,
        groups=groups,
    )


# --- export ----------------------------------------------------------------------

def records_to_csv(records) -> str:
    """One row per iteration per run. Floats are rendered with repr so the
    text round-trips to the same doubles and is byte-stable across runs."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        rid = rec.run_id
        kind = rec.config.kind
        lr = repr(float(rec.config.learning_rate))
        reps = rec.repetitions
        for t in range(rec.losses.shape[0]):
            writer.writerow((
                rid, kind, lr, reps, t,
                repr(float(rec.thetas[t, 0])),
                repr(float(rec.thetas[t, 1])),
                repr(float(rec.losses[t])),
            ))
    return buf.getvalue()


def write_records_csv(path, records) -> None:
    atomic_write(path, records_to_csv(records).encode("utf-8"))


def experiment_manifest(circuit: CircuitSpec, configs, n_starts: int,
                        iterations: int, seed: int,
                        start_max: float = DOMAIN_MAX) -> dict:
    """Reproduction metadata for one experiment. ``created_at`` is the only
    non-deterministic field and is excluded from any artifact comparison."""
    return {
        "schema": MANIFEST_SCHEMA,
        "seed": int(seed),
        "n_starts": int(n_starts),
        "iterations": int(iterations),
        "generator": GENERATOR_ID,
        "start_max": float(start_max),
        "circuit": {
            "family": "default-ansatz",
            "n_qubits": circuit.n_qubits,
            "repetitions": circuit.repetitions,
            "n_params": circuit.n_params,
            "n_gates": len(circuit.gates),
        },
        "configs": [
            {
                "optimizer": c.kind,
                "learning_rate": c.learning_rate,
                **({"adam_beta1": c.adam_beta1, "adam_beta2": c.adam_beta2,
                    "adam_eps": c.adam_eps} if c.kind == "adam" else {}),
            }
            for c in sorted(configs, key=OptimizerConfig.sort_key)
        ],
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
