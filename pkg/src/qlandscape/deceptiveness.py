"""Classify grid cells by whether gradient descent can reach the global minimum.

A cell is gradient-deceptive when no sequence of sign-consistent axis steps
(moving to a neighboring grid cell only if the local partial derivative does
not forbid that direction, within a tolerance ``tol_g``) leads to a cell whose
loss is within ``tol`` of the global minimum. The classification is computed by
growing the reachable set outward from the minimum cells with synchronized
masked flood-fill sweeps on the torus; wrap-around neighbors are real neighbors
because the landscape is periodic.

Mask values: 0 = within tolerance of the minimum, 1 = minimum reachable,
-1 = deceptive.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .formats import (
    MASK_MAGIC,
    FormatError,
    atomic_write,
    expect_eof,
    read_container,
    read_exact,
    write_container,
)
from .landscape import LandscapeGrid, grid_digest

MASK_FORMAT_VERSION = 1
DEFAULT_TOL = 1e-2
DEFAULT_TOL_G = 1e-7


@dataclass
class DeceptivenessResult:
    resolution: int
    tol: float
    tol_g: float
    mask: np.ndarray  # (R, R) int8 in {-1, 0, 1}
    ratio: float
    iterations_to_fixpoint: int
    source_grid_digest: str


def deceptiveness_mask(grid: LandscapeGrid, tol: float = DEFAULT_TOL,
                       tol_g: float = DEFAULT_TOL_G) -> DeceptivenessResult:
    """Flood-fill the set of cells from which descent can reach the minimum.

    Each sweep marks every unmarked cell that has a marked neighbor in a
    direction its gradient permits, and repeats until a sweep changes nothing.
    The sweep count is bounded by R*R because each productive sweep marks at
    least one of the R*R cells.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if tol_g < 0:
        raise ValueError("tol_g must be non-negative")
    v = grid.values
    g = grid.gradients
    r = grid.resolution

    mask = np.full((r, r), -1, dtype=np.int8)
    optimum = (v - v.min()) < tol
    mask[optimum] = 1

    # A step along -theta_k is consistent with descent when the partial
    # derivative along k is >= -tol_g (and mirrored for +theta_k); axis 0 is
    # theta_1, axis 1 is theta_2.
    valid_left = g[:, :, 0] >= -tol_g
    valid_right = g[:, :, 0] <= tol_g
    valid_up = g[:, :, 1] >= -tol_g
    valid_down = g[:, :, 1] <= tol_g

    iterations = 0
    while True:
        iterations += 1
        marked = mask == 1
        grow = (
            (valid_left & np.roll(marked, 1, axis=0))
            | (valid_right & np.roll(marked, -1, axis=0))
            | (valid_up & np.roll(marked, 1, axis=1))
            | (valid_down & np.roll(marked, -1, axis=1))
        )
        new_mask = np.where(grow, np.int8(1), mask)
        if np.array_equal(new_mask, mask):
            break
        mask = new_mask
    mask = np.where(optimum, np.int8(0), mask)

    deceptive = int(np.count_nonzero(mask == -1))
    return DeceptivenessResult(
        resolution=r,
        tol=float(tol),
        tol_g=float(tol_g),
        mask=mask,
        ratio=deceptive / (r * r),
        iterations_to_fixpoint=iterations,
        source_grid_digest=grid_digest(grid),
    )


def deceptiveness_ratio(grid: LandscapeGrid, tol: float = DEFAULT_TOL,
                        tol_g: float = DEFAULT_TOL_G) -> float:
    """Fraction of grid cells from which the minimum is unreachable."""
    return deceptiveness_mask(grid, tol, tol_g).ratio


def resolution_stability_report(ratios_by_resolution: dict[int, float],
                                reference: int | None = None) -> dict:
    """Compare ratios at several resolutions against the finest (or given) one."""
    if not ratios_by_resolution:
        raise ValueError("need at least one resolution")
    if reference is None:
        reference = max(ratios_by_resolution)
    if reference not in ratios_by_resolution:
        raise ValueError(f"reference resolution {reference} not sampled")
    ref = ratios_by_resolution[reference]
    deviations = {
        r: abs(ratio - ref)
        for r, ratio in ratios_by_resolution.items()
        if r != reference
    }
    return {
        "reference_resolution": reference,
        "reference_ratio": ref,
        "ratios": dict(sorted(ratios_by_resolution.items())),
        "deviations": dict(sorted(deviations.items())),
        "max_deviation": max(deviations.values()) if deviations else 0.0,
    }


# --- on-disk format -------------------------------------------------------------

def _mask_header(result: DeceptivenessResult) -> dict:
    return {
        "format_version": MASK_FORMAT_VERSION,
        "resolution": result.resolution,
        "tol": result.tol,
        "tol_g": result.tol_g,
        "ratio": result.ratio,
        "iterations_to_fixpoint": result.iterations_to_fixpoint,
        "source_grid_digest": result.source_grid_digest,
    }


def mask_to_bytes(result: DeceptivenessResult) -> bytes:
    buf = io.BytesIO()
    payload = np.ascontiguousarray(result.mask, dtype=np.int8).tobytes()
    write_container(buf, MASK_MAGIC, _mask_header(result), [payload])
    return buf.getvalue()


def write_mask(path, result: DeceptivenessResult) -> None:
    atomic_write(path, mask_to_bytes(result))


def read_mask(path) -> DeceptivenessResult:
    with open(path, "rb") as fh:
        header = read_container(fh, MASK_MAGIC)
        try:
            r = int(header["resolution"])
            tol = float(header["tol"])
            tol_g = float(header["tol_g"])
            ratio = float(header["ratio"])
            iters = int(header["iterations_to_fixpoint"])
            digest = str(header["source_grid_digest"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad mask header: {exc}") from exc
        if header.get("format_version") != MASK_FORMAT_VERSION:
            raise FormatError(f"unsupported mask format version {header.get('format_version')!r}")
        if r < 2:
            raise FormatError(f"bad resolution {r}")
        mask = np.frombuffer(
            read_exact(fh, r * r, "mask payload"), dtype=np.int8
        ).reshape(r, r).copy()
        expect_eof(fh)
    if not np.isin(mask, (-1, 0, 1)).all():
        raise FormatError("mask payload contains values outside {-1, 0, 1}")
    return DeceptivenessResult(
        resolution=r, tol=tol, tol_g=tol_g, mask=mask, ratio=ratio,
        iterations_to_fixpoint=iters, source_grid_digest=digest,
    )
