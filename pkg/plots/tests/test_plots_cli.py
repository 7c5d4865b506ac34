"""Command line behavior: happy paths on fixtures and exit code mapping."""

import pathlib

import pytest

from qlplots.cli import main

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
GRID16 = str(FIXTURES / "grid_q2_b1_r16.qlgrid")
GRID32 = str(FIXTURES / "grid_q2_b1_r32.qlgrid")
MASK32 = str(FIXTURES / "mask_q2_b1_r32_tol0.01.qlmask")
MASK16 = str(FIXTURES / "mask_q2_b1_r16_tol0.01.qlmask")
RECORDS = str(FIXTURES / "records_q2_b1.csv")
SUMMARY = str(FIXTURES / "summary.json")

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def assert_png(path: pathlib.Path):
    blob = path.read_bytes()
    assert blob[:8] == PNG_SIGNATURE
    assert len(blob) > 1000


def test_triptych_writes_png(tmp_path, capsys):
    out = tmp_path / "t.png"
    code = main(["triptych", "--grid", GRID32, "--mask", MASK32, "--out", str(out)])
    assert code == 0
    assert f"wrote {out}" in capsys.readouterr().out
    assert_png(out)


def test_triptych_accepts_multiple_rows(tmp_path):
    out = tmp_path / "t.png"
    code = main(["triptych", "--grid", GRID32, "--mask", MASK32,
                 "--grid", GRID16, "--mask", MASK16, "--out", str(out)])
    assert code == 0
    assert_png(out)


def test_triptych_requires_paired_flags(tmp_path, capsys):
    code = main(["triptych", "--grid", GRID32, "--grid", GRID16,
                 "--mask", MASK32, "--out", str(tmp_path / "t.png")])
    assert code == 2
    assert "same number" in capsys.readouterr().err


def test_triptych_mismatched_pair_is_a_data_error(tmp_path, capsys):
    code = main(["triptych", "--grid", GRID32, "--mask", MASK16,
                 "--out", str(tmp_path / "t.png")])
    assert code == 1
    assert "does not match" in capsys.readouterr().err


def test_trajectories_writes_png(tmp_path):
    out = tmp_path / "runs.png"
    code = main(["trajectories", "--records", RECORDS, "--grid", GRID32,
                 "--out", str(out)])
    assert code == 0
    assert_png(out)


def test_trajectories_with_crop(tmp_path):
    out = tmp_path / "runs.png"
    code = main(["trajectories", "--records", RECORDS, "--grid", GRID32,
                 "--crop", "0", "6.3", "--out", str(out)])
    assert code == 0
    assert_png(out)


def test_trajectories_rejects_inverted_crop(tmp_path, capsys):
    code = main(["trajectories", "--records", RECORDS, "--grid", GRID32,
                 "--crop", "5", "1", "--out", str(tmp_path / "runs.png")])
    assert code == 2
    assert "LOW < HIGH" in capsys.readouterr().err


def test_trajectories_rejects_wrong_file_kind(tmp_path):
    code = main(["trajectories", "--records", SUMMARY, "--grid", GRID32,
                 "--out", str(tmp_path / "runs.png")])
    assert code == 1


def test_success_best_and_last(tmp_path):
    for mode in ("best", "last"):
        out = tmp_path / f"{mode}.png"
        assert main(["success", "--summary", SUMMARY, "--mode", mode,
                     "--out", str(out)]) == 0
        assert_png(out)


def test_success_rejects_unknown_mode(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["success", "--summary", SUMMARY, "--mode", "median",
              "--out", str(tmp_path / "s.png")])
    assert exc.value.code == 2


def test_quantiles_writes_png(tmp_path):
    out = tmp_path / "q.png"
    code = main(["quantiles", "--grid", GRID16, "--grid", GRID32,
                 "--levels", "0", "0.25", "0.5", "0.75", "1",
                 "--out", str(out)])
    assert code == 0
    assert_png(out)


def test_quantiles_requires_two_grids(tmp_path, capsys):
    code = main(["quantiles", "--grid", GRID16, "--out", str(tmp_path / "q.png")])
    assert code == 2
    assert "at least twice" in capsys.readouterr().err


def test_quantiles_rejects_out_of_range_levels(tmp_path, capsys):
    code = main(["quantiles", "--grid", GRID16, "--grid", GRID32,
                 "--levels", "0.5", "1.5", "--out", str(tmp_path / "q.png")])
    assert code == 2
    assert "quantile levels" in capsys.readouterr().err


def test_missing_input_file_maps_to_exit_1(tmp_path, capsys):
    code = main(["triptych", "--grid", str(tmp_path / "nope.qlgrid"),
                 "--mask", MASK32, "--out", str(tmp_path / "t.png")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_corrupt_input_file_maps_to_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.qlgrid"
    bad.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
    code = main(["triptych", "--grid", str(bad), "--mask", MASK32,
                 "--out", str(tmp_path / "t.png")])
    assert code == 1
    assert "bad magic" in capsys.readouterr().err


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["histogram"])
    assert exc.value.code == 2
