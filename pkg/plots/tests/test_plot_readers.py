"""File readers: fixture round-trips and rejection of malformed inputs."""

import hashlib
import json
import pathlib
import struct

import numpy as np
import pytest

from qlplots import (
    FileFormatError,
    read_grid_file,
    read_mask_file,
    read_records_csv,
    read_summary,
)

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
GRID32 = FIXTURES / "grid_q2_b2_r32.qlgrid"
MASK32 = FIXTURES / "mask_q2_b2_r32_tol0.01.qlmask"
RECORDS = FIXTURES / "records_q2_b2.csv"
SUMMARY = FIXTURES / "summary.json"


def mutate(src: pathlib.Path, tmp_path, fn) -> str:
    blob = bytearray(src.read_bytes())
    out = tmp_path / f"mutated{src.suffix}"
    out.write_bytes(bytes(fn(blob)))
    return str(out)


def rewrite_header(blob: bytearray, **updates) -> bytes:
    (header_len,) = struct.unpack_from("<I", blob, 8)
    header = json.loads(bytes(blob[12:12 + header_len]))
    header.update(updates)
    encoded = json.dumps(header).encode("utf-8")
    return bytes(blob[:8]) + struct.pack("<I", len(encoded)) + encoded + bytes(blob[12 + header_len:])


def test_grid_fixture_fields():
    grid = read_grid_file(str(GRID32))
    assert grid.resolution == 32
    assert grid.n_qubits == 2
    assert grid.repetitions == 2
    assert grid.domain_max == pytest.approx(4 * np.pi)
    assert grid.values.shape == (32, 32)
    assert grid.gradients.shape == (32, 32, 2)
    assert np.all((grid.values >= 0.0) & (grid.values <= 1.0))


def test_grid_axis_is_periodic_sampling():
    grid = read_grid_file(str(GRID32))
    axis = grid.axis
    assert len(axis) == 32
    assert axis[0] == 0.0
    assert np.all(np.diff(axis) > 0)
    assert axis[-1] < grid.domain_max


def test_grid_magnitudes_combine_both_components():
    grid = read_grid_file(str(GRID32))
    expected = np.hypot(grid.gradients[..., 0], grid.gradients[..., 1])
    assert np.allclose(grid.magnitudes(), expected)


def test_grid_rejects_bad_magic(tmp_path):
    def corrupt(blob):
        blob[:8] = b"NOTMAGIC"
        return blob

    with pytest.raises(FileFormatError, match="bad magic at offset 0"):
        read_grid_file(mutate(GRID32, tmp_path, corrupt))


def test_grid_rejects_truncated_payload(tmp_path):
    with pytest.raises(FileFormatError, match=r"truncated .*payload at offset \d+"):
        read_grid_file(mutate(GRID32, tmp_path, lambda blob: blob[:-8]))


def test_grid_rejects_trailing_bytes(tmp_path):
    with pytest.raises(FileFormatError, match="3 trailing bytes"):
        read_grid_file(mutate(GRID32, tmp_path, lambda blob: blob + b"xyz"))


def test_grid_rejects_non_finite_values(tmp_path):
    def poison(blob):
        (header_len,) = struct.unpack_from("<I", blob, 8)
        start = 12 + header_len
        blob[start:start + 8] = struct.pack("<d", float("nan"))
        return blob

    with pytest.raises(FileFormatError, match="non-finite"):
        read_grid_file(mutate(GRID32, tmp_path, poison))


@pytest.mark.parametrize("updates, message", [
    ({"format_version": 9}, "unsupported format_version"),
    ({"resolution": 0}, "resolution=0 invalid"),
    ({"n_params": 3}, "expected 2 parameters"),
    ({"domain_max": -1.0}, "domain_max"),
])
def test_grid_rejects_bad_header(tmp_path, updates, message):
    with pytest.raises(FileFormatError, match=message):
        read_grid_file(mutate(GRID32, tmp_path, lambda b: rewrite_header(b, **updates)))


def test_mask_fixture_fields():
    mask = read_mask_file(str(MASK32))
    assert mask.resolution == 32
    assert mask.tol == pytest.approx(0.01)
    assert mask.tol_g > 0
    assert mask.mask.shape == (32, 32)
    assert set(np.unique(mask.mask)) <= {-1, 0, 1}
    assert np.count_nonzero(mask.mask == 0) >= 1
    assert mask.ratio == pytest.approx(np.mean(mask.mask == -1))
    assert mask.iterations_to_fixpoint > 0


def test_mask_digest_pins_source_grid():
    mask = read_mask_file(str(MASK32))
    assert mask.source_grid_digest == hashlib.sha256(GRID32.read_bytes()).hexdigest()


def test_mask_rejects_unknown_cell_values(tmp_path):
    def corrupt(blob):
        blob[-1] = 5
        return blob

    with pytest.raises(FileFormatError, match=r"outside \{-1, 0, 1\}"):
        read_mask_file(mutate(MASK32, tmp_path, corrupt))


@pytest.mark.parametrize("updates, message", [
    ({"tol": -1.0}, "tol=-1.0 invalid"),
    ({"ratio": 2.0}, "ratio=2.0 invalid"),
    ({"source_grid_digest": "zz"}, "source_grid_digest invalid"),
    ({"iterations_to_fixpoint": -1}, "iterations_to_fixpoint=-1 invalid"),
])
def test_mask_rejects_bad_header(tmp_path, updates, message):
    with pytest.raises(FileFormatError, match=message):
        read_mask_file(mutate(MASK32, tmp_path, lambda b: rewrite_header(b, **updates)))


def test_records_fixture_runs():
    runs = read_records_csv(str(RECORDS))
    assert len(runs) == 8
    assert len({r.run_id for r in runs}) == 8
    by_kind = {"sgd": 0, "adam": 0}
    for run in runs:
        by_kind[run.optimizer] += 1
        assert run.learning_rate == pytest.approx(0.1)
        assert run.repetitions == 2
        assert run.thetas.shape == (41, 2)
        assert run.losses.shape == (41,)
        assert np.all((run.losses >= 0.0) & (run.losses <= 1.0))
        assert np.all((run.thetas[0] >= 0.0) & (run.thetas[0] < 4 * np.pi))
    assert by_kind == {"sgd": 4, "adam": 4}


def _write_csv(tmp_path, lines) -> str:
    path = tmp_path / "records.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


HEADER = "run_id,optimizer,lr,repetitions,iter,theta1,theta2,loss"


def test_records_rejects_wrong_columns(tmp_path):
    path = _write_csv(tmp_path, ["loss,run_id,optimizer,lr,repetitions,iter,theta1,theta2"])
    with pytest.raises(FileFormatError, match="unexpected columns"):
        read_records_csv(path)


def test_records_rejects_iteration_gap(tmp_path):
    path = _write_csv(tmp_path, [
        HEADER,
        "r0,sgd,0.1,1,0,0.0,0.0,0.5",
        "r0,sgd,0.1,1,2,0.1,0.1,0.4",
    ])
    with pytest.raises(FileFormatError, match=r":3: .*iter 2 out of order"):
        read_records_csv(path)


def test_records_rejects_late_start(tmp_path):
    path = _write_csv(tmp_path, [HEADER, "r0,sgd,0.1,1,1,0.0,0.0,0.5"])
    with pytest.raises(FileFormatError, match="starts at iter 1, not 0"):
        read_records_csv(path)


def test_records_rejects_unparsable_fields(tmp_path):
    path = _write_csv(tmp_path, [HEADER, "r0,sgd,0.1,1,0,0.0,0.0,abc"])
    with pytest.raises(FileFormatError, match=":2:"):
        read_records_csv(path)


def test_records_rejects_empty_inputs(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(FileFormatError, match="empty file"):
        read_records_csv(str(path))
    with pytest.raises(FileFormatError, match="no record rows"):
        read_records_csv(_write_csv(tmp_path, [HEADER]))


def test_summary_fixture_shape():
    summary = read_summary(str(SUMMARY))
    cells = summary["cells"]
    assert [(c["n_qubits"], c["repetitions"]) for c in cells] == [(2, 1), (2, 2), (2, 3)]
    for cell in cells:
        assert isinstance(cell["ground_truth"]["value"], float)
        groups = cell["optimizers"]["groups"]
        assert {g["optimizer"] for g in groups} == {"sgd", "adam"}
        for group in groups:
            for mode in ("best", "last"):
                stats = group[mode]
                assert stats["min"] <= stats["median"] <= stats["max"]


def test_summary_rejects_wrong_schema(tmp_path):
    path = tmp_path / "summary.json"
    path.write_text(json.dumps({"schema": "something-else", "cells": []}))
    with pytest.raises(FileFormatError, match="expected schema"):
        read_summary(str(path))


def test_summary_rejects_missing_cells(tmp_path):
    path = tmp_path / "summary.json"
    path.write_text(json.dumps({"schema": "qlandscape-summary-v1"}))
    with pytest.raises(FileFormatError, match="missing cells"):
        read_summary(str(path))


def test_summary_rejects_invalid_json(tmp_path):
    path = tmp_path / "summary.json"
    path.write_text("{not json")
    with pytest.raises(FileFormatError, match="not valid JSON"):
        read_summary(str(path))
