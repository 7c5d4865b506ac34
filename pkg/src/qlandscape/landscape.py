"""Periodic loss-landscape grids over the two shared parameters.

A grid at resolution R samples theta = (4*pi*i/R, 4*pi*j/R) for
i, j in [0, R), endpoint excluded, so the samples tile the torus and a grid
at 2R contains every point of the grid at R bit-for-bit (the axis values are
computed as 4*pi * k / R, and (2k)/(2R) reduces exactly).

Axis 0 of the value and gradient arrays indexes theta_1, axis 1 theta_2,
and the innermost gradient axis is the parameter index.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass

import numpy as np

from .circuit import DOMAIN_MAX, CircuitSpec, build_default_circuit
from .formats import (
    GRID_MAGIC,
    FormatError,
    atomic_write,
    expect_eof,
    read_container,
    read_exact,
    write_container,
)

GRID_FORMAT_VERSION = 1

# Cap on complex doubles held per batch. The adjoint pass keeps bra/ket/tmp
# alive simultaneously, so small chunks that stay cache-resident beat large
# ones by ~2x; chunking cannot change results (all math is elementwise).
_AMPLITUDE_BUDGET = 1 << 14


def grid_axis(resolution: int) -> np.ndarray:
    """The R sample angles along one parameter axis, [0, 4*pi) endpoint excluded."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    return DOMAIN_MAX * np.arange(resolution) / resolution


@dataclass
class LandscapeGrid:
    """Sampled losses and analytic gradients over the full periodic domain."""

    resolution: int
    n_qubits: int
    repetitions: int
    values: np.ndarray    # (R, R) float64
    gradients: np.ndarray  # (R, R, 2) float64

    def __post_init__(self):
        r = self.resolution
        if self.values.shape != (r, r):
            raise ValueError(f"values must be ({r}, {r}), got {self.values.shape}")
        if self.gradients.shape != (r, r, 2):
            raise ValueError(f"gradients must be ({r}, {r}, 2), got {self.gradients.shape}")

    @property
    def axis(self) -> np.ndarray:
        return grid_axis(self.resolution)


def points_per_chunk(n_qubits: int) -> int:
    return max(1, _AMPLITUDE_BUDGET // (2**n_qubits))


def sample_grid(circuit: CircuitSpec, resolution: int,
                chunk: int | None = None) -> LandscapeGrid:
    """Evaluate loss and gradient on the full R x R parameter grid.

    Work is chunked to bound memory; the chunk boundary cannot affect values
    because every update in the evaluation pipeline is elementwise in the
    batch dimension.
    """
    from .gradients import batch_loss_and_gradient

    if circuit.n_params != 2:
        raise ValueError("landscape grids are defined for 2-parameter circuits")
    axis = grid_axis(resolution)
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    thetas = np.column_stack([t1.ravel(), t2.ravel()])
    if chunk is None:
        chunk = points_per_chunk(circuit.n_qubits)
    total = thetas.shape[0]
    values = np.empty(total)
    grads = np.empty((total, 2))
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        values[lo:hi], grads[lo:hi] = batch_loss_and_gradient(circuit, thetas[lo:hi])
    return LandscapeGrid(
        resolution=resolution,
        n_qubits=circuit.n_qubits,
        repetitions=circuit.repetitions,
        values=values.reshape(resolution, resolution),
        gradients=grads.reshape(resolution, resolution, 2),
    )


def sample_default_grid(n_qubits: int, repetitions: int, resolution: int) -> LandscapeGrid:
    return sample_grid(build_default_circuit(n_qubits, repetitions), resolution)


@dataclass
class GroundTruth:
    """Global minimum of a sampled grid, with all grid points attaining it."""

    value: float
    theta: tuple[float, float]
    indices: tuple[int, int]
    ties: list[tuple[int, int]]


def global_minimum(grid: LandscapeGrid) -> GroundTruth:
    """Locate the grid minimum; ties are reported in row-major order and the
    first one is the canonical representative."""
    flat = int(np.argmin(grid.values))
    i, j = divmod(flat, grid.resolution)
    vmin = float(grid.values[i, j])
    tie_idx = np.argwhere(grid.values == vmin)
    ties = [(int(a), int(b)) for a, b in tie_idx]
    axis = grid.axis
    return GroundTruth(
        value=vmin,
        theta=(float(axis[i]), float(axis[j])),
        indices=(i, j),
        ties=ties,
    )


@dataclass
class GradientStats:
    """Distribution summary of gradient magnitudes over a grid."""

    min: float
    q25: float
    median: float
    q75: float
    max: float
    mean: float

    def as_dict(self) -> dict:
        return {
            "min": self.min, "q25": self.q25, "median": self.median,
            "q75": self.q75, "max": self.max, "mean": self.mean,
        }


def gradient_magnitude_stats(grid: LandscapeGrid) -> GradientStats:
    """Euclidean gradient norms summarized with linear-interpolation quantiles."""
    mags = np.linalg.norm(grid.gradients, axis=2).ravel()
    q = np.quantile(mags, [0.0, 0.25, 0.5, 0.75, 1.0])
    return GradientStats(
        min=float(q[0]), q25=float(q[1]), median=float(q[2]),
        q75=float(q[3]), max=float(q[4]), mean=float(np.mean(mags)),
    )


# --- on-disk format -------------------------------------------------------------

def _grid_header(grid: LandscapeGrid) -> dict:
    return {
        "format_version": GRID_FORMAT_VERSION,
        "resolution": grid.resolution,
        "n_params": 2,
        "n_qubits": grid.n_qubits,
        "repetitions": grid.repetitions,
        "domain_max": DOMAIN_MAX,
    }


def _grid_payloads(grid: LandscapeGrid) -> tuple[bytes, bytes]:
    v = np.ascontiguousarray(grid.values, dtype="<f8")
    g = np.ascontiguousarray(grid.gradients, dtype="<f8")
    return v.tobytes(), g.tobytes()


def grid_to_bytes(grid: LandscapeGrid) -> bytes:
    buf = io.BytesIO()
    write_container(buf, GRID_MAGIC, _grid_header(grid), _grid_payloads(grid))
    return buf.getvalue()


def write_grid(path, grid: LandscapeGrid) -> None:
    atomic_write(path, grid_to_bytes(grid))


def read_grid(path) -> LandscapeGrid:
    with open(path, "rb") as fh:
        header = read_container(fh, GRID_MAGIC)
        try:
            r = int(header["resolution"])
            n_qubits = int(header["n_qubits"])
            reps = int(header["repetitions"])
            n_params = int(header["n_params"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad grid header: {exc}") from exc
        if header.get("format_version") != GRID_FORMAT_VERSION:
            raise FormatError(f"unsupported grid format version {header.get('format_version')!r}")
        if n_params != 2:
            raise FormatError(f"expected 2 parameters, header says {n_params}")
        if r < 2:
            raise FormatError(f"bad resolution {r}")
        values = np.frombuffer(
            read_exact(fh, r * r * 8, "value payload"), dtype="<f8"
        ).reshape(r, r).copy()
        grads = np.frombuffer(
            read_exact(fh, r * r * 2 * 8, "gradient payload"), dtype="<f8"
        ).reshape(r, r, 2).copy()
        expect_eof(fh)
    return LandscapeGrid(
        resolution=r, n_qubits=n_qubits, repetitions=reps,
        values=values, gradients=grads,
    )


def grid_digest(grid: LandscapeGrid) -> str:
    """SHA-256 over the canonical serialized grid, used to pin a mask to its source."""
    return hashlib.sha256(grid_to_bytes(grid)).hexdigest()
