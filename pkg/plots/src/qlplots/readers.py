"""Read-only parsers for the artifact files the plotting layer consumes.

Four inputs: QLGRID01 landscape grids, QLMASK01 deceptiveness masks, run
records CSV, and the sweep summary JSON. The parsers are deliberately
independent of the code that writes these files; they validate magic bytes,
header contents, payload lengths, and trailing garbage, and report the byte
offset of whatever they reject. Nothing here ever writes.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass

import numpy as np

GRID_MAGIC = b"QLGRID01"
MASK_MAGIC = b"QLMASK01"
SUMMARY_SCHEMA = "qlandscape-summary-v1"
RECORD_COLUMNS = ("run_id", "optimizer", "lr", "repetitions",
                  "iter", "theta1", "theta2", "loss")

_LEN = struct.Struct("<I")


class FileFormatError(Exception):
    """Raised for any structural problem in an input file."""


@dataclass(frozen=True)
class GridData:
    resolution: int
    n_qubits: int
    repetitions: int
    domain_max: float
    values: np.ndarray     # (R, R)
    gradients: np.ndarray  # (R, R, 2)

    @property
    def axis(self) -> np.ndarray:
        return self.domain_max * np.arange(self.resolution) / self.resolution

    def magnitudes(self) -> np.ndarray:
        return np.linalg.norm(self.gradients, axis=2)


@dataclass(frozen=True)
class MaskData:
    resolution: int
    tol: float
    tol_g: float
    ratio: float
    iterations_to_fixpoint: int
    source_grid_digest: str
    mask: np.ndarray  # (R, R) int8, entries in {-1, 0, 1}


@dataclass(frozen=True)
class RunTrajectory:
    run_id: str
    optimizer: str
    learning_rate: float
    repetitions: int
    thetas: np.ndarray  # (k, 2)
    losses: np.ndarray  # (k,)


class _Cursor:
    """Byte-offset bookkeeping over a fully loaded file."""

    def __init__(self, blob: bytes, path: str):
        self.blob = blob
        self.path = path
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.blob):
            raise FileFormatError(
                f"{self.path}: truncated {what} at offset {self.pos}"
                f" (need {n} bytes, have {len(self.blob) - self.pos})"
            )
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def done(self) -> None:
        extra = len(self.blob) - self.pos
        if extra:
            raise FileFormatError(
                f"{self.path}: {extra} trailing bytes at offset {self.pos}"
            )


def _parse_header(cur: _Cursor, magic: bytes) -> dict:
    got = cur.take(len(magic), "magic")
    if got != magic:
        raise FileFormatError(
            f"{cur.path}: bad magic at offset 0, expected {magic!r}, got {got!r}"
        )
    (header_len,) = _LEN.unpack(cur.take(_LEN.size, "header length"))
    raw = cur.take(header_len, "header")
    try:
        header = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FileFormatError(
            f"{cur.path}: unreadable header at offset {len(magic) + _LEN.size}: {exc}"
        ) from exc
    if not isinstance(header, dict):
        raise FileFormatError(f"{cur.path}: header is not a JSON object")
    return header


def _header_int(header: dict, key: str, path: str, minimum: int) -> int:
    value = header.get(key)
    if not isinstance(value, int) or value < minimum:
        raise FileFormatError(f"{path}: header {key}={value!r} invalid")
    return value


def read_grid_file(path: str) -> GridData:
    with open(path, "rb") as fh:
        cur = _Cursor(fh.read(), path)
    header = _parse_header(cur, GRID_MAGIC)
    if header.get("format_version") != 1:
        raise FileFormatError(
            f"{path}: unsupported format_version {header.get('format_version')!r}"
        )
    r = _header_int(header, "resolution", path, 2)
    if header.get("n_params") != 2:
        raise FileFormatError(f"{path}: expected 2 parameters, header says"
                              f" {header.get('n_params')!r}")
    n_qubits = _header_int(header, "n_qubits", path, 1)
    repetitions = _header_int(header, "repetitions", path, 1)
    domain_max = header.get("domain_max")
    if not isinstance(domain_max, float) or domain_max <= 0:
        raise FileFormatError(f"{path}: header domain_max={domain_max!r} invalid")
    values = np.frombuffer(cur.take(r * r * 8, "values payload"),
                           dtype="<f8").reshape(r, r)
    gradients = np.frombuffer(cur.take(r * r * 2 * 8, "gradients payload"),
                              dtype="<f8").reshape(r, r, 2)
    cur.done()
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(gradients))):
        raise FileFormatError(f"{path}: non-finite payload values")
    return GridData(resolution=r, n_qubits=n_qubits, repetitions=repetitions,
                    domain_max=domain_max, values=values, gradients=gradients)


def read_mask_file(path: str) -> MaskData:
    with open(path, "rb") as fh:
        cur = _Cursor(fh.read(), path)
    header = _parse_header(cur, MASK_MAGIC)
    if header.get("format_version") != 1:
        raise FileFormatError(
            f"{path}: unsupported format_version {header.get('format_version')!r}"
        )
    r = _header_int(header, "resolution", path, 2)
    tol = header.get("tol")
    tol_g = header.get("tol_g")
    ratio = header.get("ratio")
    if not isinstance(tol, float) or tol <= 0:
        raise FileFormatError(f"{path}: header tol={tol!r} invalid")
    if not isinstance(tol_g, (int, float)) or tol_g < 0:
        raise FileFormatError(f"{path}: header tol_g={tol_g!r} invalid")
    if not isinstance(ratio, (int, float)) or not 0 <= ratio <= 1:
        raise FileFormatError(f"{path}: header ratio={ratio!r} invalid")
    iters = _header_int(header, "iterations_to_fixpoint", path, 0)
    digest = header.get("source_grid_digest")
    if not isinstance(digest, str) or len(digest) != 64:
        raise FileFormatError(f"{path}: header source_grid_digest invalid")
    mask = np.frombuffer(cur.take(r * r, "mask payload"),
                         dtype=np.int8).reshape(r, r)
    cur.done()
    if not np.isin(mask, (-1, 0, 1)).all():
        raise FileFormatError(f"{path}: mask entries outside {{-1, 0, 1}}")
    return MaskData(resolution=r, tol=tol, tol_g=float(tol_g), ratio=float(ratio),
                    iterations_to_fixpoint=iters, source_grid_digest=digest,
                    mask=mask)


def read_records_csv(path: str) -> list[RunTrajectory]:
    """Group record rows into per-run trajectories, preserving file order.

    Rows of one run must be contiguous with iterations counting 0, 1, 2, ...;
    that is how the writer emits them, and silent reordering would corrupt
    the drawn paths.
    """
    runs: list[RunTrajectory] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise FileFormatError(f"{path}: empty file") from None
        if tuple(head) != RECORD_COLUMNS:
            raise FileFormatError(f"{path}: unexpected columns {head!r}")
        current: dict | None = None

        def finish(block):
            runs.append(RunTrajectory(
                run_id=block["run_id"],
                optimizer=block["optimizer"],
                learning_rate=block["lr"],
                repetitions=block["repetitions"],
                thetas=np.array(block["thetas"]),
                losses=np.array(block["losses"]),
            ))

        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(RECORD_COLUMNS):
                raise FileFormatError(f"{path}:{lineno}: expected"
                                      f" {len(RECORD_COLUMNS)} fields, got {len(row)}")
            run_id, optimizer, lr, reps, it, t1, t2, loss = row
            try:
                it = int(it)
                parsed = (float(lr), int(reps), float(t1), float(t2), float(loss))
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: {exc}") from exc
            if current is None or run_id != current["run_id"]:
                if current is not None:
                    finish(current)
                if it != 0:
                    raise FileFormatError(
                        f"{path}:{lineno}: run {run_id!r} starts at iter {it}, not 0"
                    )
                current = {"run_id": run_id, "optimizer": optimizer,
                           "lr": parsed[0], "repetitions": parsed[1],
                           "thetas": [], "losses": []}
            elif it != len(current["thetas"]):
                raise FileFormatError(
                    f"{path}:{lineno}: run {run_id!r} iter {it} out of order"
                )
            current["thetas"].append(parsed[2:4])
            current["losses"].append(parsed[4])
        if current is not None:
            finish(current)
    if not runs:
        raise FileFormatError(f"{path}: no record rows")
    return runs


def read_summary(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            summary = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(summary, dict) or summary.get("schema") != SUMMARY_SCHEMA:
        raise FileFormatError(
            f"{path}: expected schema {SUMMARY_SCHEMA!r},"
            f" got {summary.get('schema')!r}"
        )
    cells = summary.get("cells")
    if not isinstance(cells, list):
        raise FileFormatError(f"{path}: missing cells list")
    return summary
