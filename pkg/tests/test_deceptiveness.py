import numpy as np
import pytest

import qlandscape as ql
from oracle_floodfill import bfs_mask
from qlandscape.formats import MASK_MAGIC


def make_grid(values, gradients=None):
    values = np.asarray(values, dtype=np.float64)
    r = values.shape[0]
    if gradients is None:
        gradients = np.zeros((r, r, 2))
    return ql.LandscapeGrid(r, 2, 1, values, np.asarray(gradients, dtype=np.float64))


def synthetic_grid(rng, resolution):
    """Random landscape with exact-zero and boundary-magnitude gradients mixed
    in, so tolerance comparisons get exercised on both sides."""
    values = rng.uniform(0, 1, (resolution, resolution))
    grads = rng.normal(0, 1, (resolution, resolution, 2))
    flat = rng.uniform(size=grads.shape) < rng.uniform(0, 0.35)
    grads[flat] = 0.0
    return make_grid(values, grads)


def test_all_optimum_grid():
    """A constant landscape is optimum everywhere: no deceptive cells, one sweep."""
    result = ql.deceptiveness_mask(make_grid(np.full((8, 8), 0.4)))
    assert np.array_equal(result.mask, np.zeros((8, 8), dtype=np.int8))
    assert result.ratio == 0.0
    assert result.iterations_to_fixpoint == 1


def test_zero_gradients_reach_everything():
    """With all gradients zero every step is sign-consistent, so every cell
    reaches the minimum regardless of values."""
    rng = np.random.default_rng(2)
    values = rng.uniform(0, 1, (10, 10))
    result = ql.deceptiveness_mask(make_grid(values), tol=1e-6)
    assert not np.any(result.mask == -1)
    assert result.ratio == 0.0


def test_opposing_gradient_rows_trap_descent():
    """Two adjacent rows whose gradients point at each other form an
    absorbing set: descent shuttles between them and never leaves."""
    r = 6
    values = np.ones((r, r))
    values[0, 3] = 0.0
    grads = np.zeros((r, r, 2))
    grads[2, :, 0] = -1.0   # from row 2 only steps toward larger i: row 3
    grads[3, :, 0] = 1.0    # from row 3 only steps toward smaller i: row 2
    result = ql.deceptiveness_mask(make_grid(values, grads), tol=0.5)
    trapped = np.zeros((r, r), dtype=bool)
    trapped[2:4, :] = True
    assert np.array_equal(result.mask == -1, trapped)
    assert result.ratio == pytest.approx(2 * r / r**2)
    oracle = bfs_mask(values, grads, 0.5, ql.DEFAULT_TOL_G)
    assert np.array_equal(result.mask, oracle)


def test_matches_bfs_oracle_on_synthetic_landscapes():
    rng = np.random.default_rng(31)
    for _ in range(12):
        grid = synthetic_grid(rng, int(rng.integers(8, 33)))
        tol = float(rng.uniform(0.01, 0.3))
        tol_g = float(10 ** rng.uniform(-9, -1))
        result = ql.deceptiveness_mask(grid, tol=tol, tol_g=tol_g)
        oracle = bfs_mask(grid.values, grid.gradients, tol, tol_g)
        assert np.array_equal(result.mask, oracle)


def test_wraparound_neighbors_are_connected():
    """The domain is periodic: reachability crosses the array edges."""
    r = 6
    values = np.ones((r, r))
    values[0, 3] = 0.0
    # strongly positive gradients allow only -axis steps; reaching the
    # minimum at column 3 from column 0 requires wrapping past the edge
    grads = np.full((r, r, 2), 5.0)
    result = ql.deceptiveness_mask(make_grid(values, grads), tol=0.5)
    assert not np.any(result.mask == -1)


def test_optimum_region_uses_strict_inequality():
    values = np.zeros((4, 4))
    values[1, 1] = 0.01   # exactly tol above the minimum: not optimum
    values[2, 2] = 0.0099
    result = ql.deceptiveness_mask(make_grid(values), tol=0.01)
    assert result.mask[1, 1] != 0
    assert result.mask[2, 2] == 0


def test_gradient_tolerance_is_inclusive():
    """Gradient entries exactly at +-tol_g permit the step."""
    r = 4
    values = np.ones((r, r))
    values[0, 0] = 0.0
    tol_g = 1e-7
    grads = np.zeros((r, r, 2))
    grads[1, 0, 0] = tol_g       # at +tol_g: stepping right still allowed
    grads[0, 1, 1] = -tol_g      # at -tol_g: stepping left still allowed
    result = ql.deceptiveness_mask(make_grid(values, grads), tol=0.5, tol_g=tol_g)
    assert result.mask[1, 0] == 1
    assert result.mask[0, 1] == 1
    grads[1, 0, 0] = np.nextafter(tol_g, 1.0)
    result = ql.deceptiveness_mask(make_grid(values, grads), tol=0.5, tol_g=tol_g)
    # just past the tolerance only the left step remains, which also reaches
    # the optimum; the cell stays labeled 1 either way
    assert result.mask[1, 0] == 1


def test_iterations_to_fixpoint_counts_sweeps():
    """Marking grows one Manhattan ring per sweep when only left/up steps are
    allowed, so the fixpoint takes 2(r-1) productive sweeps plus one idle."""
    r = 5
    values = np.ones((r, r))
    values[0, 0] = 0.0
    grads = np.full((r, r, 2), 1.0)  # positive: only -axis steps allowed
    result = ql.deceptiveness_mask(make_grid(values, grads), tol=0.5)
    assert result.iterations_to_fixpoint == 2 * (r - 1) + 1
    assert result.iterations_to_fixpoint <= r * r
    assert not np.any(result.mask == -1)
    oracle = bfs_mask(values, grads, 0.5, ql.DEFAULT_TOL_G)
    assert np.array_equal(result.mask, oracle)


def test_ratio_is_deceptive_fraction():
    rng = np.random.default_rng(37)
    grid = synthetic_grid(rng, 16)
    result = ql.deceptiveness_mask(grid, tol=0.05)
    assert result.ratio == np.count_nonzero(result.mask == -1) / 16**2


def test_parameter_validation():
    grid = make_grid(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        ql.deceptiveness_mask(grid, tol=0.0)
    with pytest.raises(ValueError):
        ql.deceptiveness_mask(grid, tol_g=-1e-9)


def test_mask_roundtrip(tmp_path):
    grid = ql.sample_default_grid(2, 1, 12)
    result = ql.deceptiveness_mask(grid)
    path = tmp_path / "m.qlmask"
    ql.write_mask(path, result)
    back = ql.read_mask(path)
    assert np.array_equal(back.mask, result.mask)
    assert back.resolution == 12
    assert back.tol == result.tol
    assert back.tol_g == result.tol_g
    assert back.ratio == result.ratio
    assert back.iterations_to_fixpoint == result.iterations_to_fixpoint
    assert back.source_grid_digest == ql.grid_digest(grid)
    assert path.read_bytes()[:8] == MASK_MAGIC


def test_mask_file_is_deterministic(tmp_path):
    grid = ql.sample_default_grid(2, 1, 8)
    result = ql.deceptiveness_mask(grid)
    a, b = tmp_path / "a.qlmask", tmp_path / "b.qlmask"
    ql.write_mask(a, result)
    ql.write_mask(b, result)
    assert a.read_bytes() == b.read_bytes()


def test_read_mask_rejects_bad_payload(tmp_path):
    grid = ql.sample_default_grid(2, 1, 6)
    result = ql.deceptiveness_mask(grid)
    path = tmp_path / "m.qlmask"
    ql.write_mask(path, result)
    blob = bytearray(path.read_bytes())
    blob[-1] = 7  # not in {-1, 0, 1}
    bad = tmp_path / "bad.qlmask"
    bad.write_bytes(bytes(blob))
    with pytest.raises(ql.FormatError, match="outside"):
        ql.read_mask(bad)
    short = tmp_path / "short.qlmask"
    short.write_bytes(bytes(blob[:-4]))
    with pytest.raises(ql.FormatError, match="truncated"):
        ql.read_mask(short)


def test_resolution_stability_report():
    report = ql.resolution_stability_report({360: 0.20, 720: 0.22, 1440: 0.21})
    assert report["reference_resolution"] == 1440
    assert report["deviations"][360] == pytest.approx(0.01)
    assert report["deviations"][720] == pytest.approx(0.01)
    assert report["max_deviation"] == pytest.approx(0.01)
    with pytest.raises(ValueError):
        ql.resolution_stability_report({})
    with pytest.raises(ValueError):
        ql.resolution_stability_report({360: 0.2}, reference=720)
