"""CSV and JSON formats for samples, spectra and run manifests.

Sample files have a mandatory header.  The first column, ``sample``, is the
0-based row index.  Euclidean samples follow with ``x0, x1, ...``.  Density
matrices are stored as their lower triangle, row-major, diagonal included:
``re_0_0, im_0_0, re_1_0, im_1_0, re_1_1, im_1_1, ...``; the column names
carry ``N``.  Floats are written with ``repr`` so reading and re-writing a
file reproduces it byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ValidationError


def _tri(N):
    return [(i, j) for i in range(N) for j in range(i + 1)]


def matrix_header(N: int) -> list[str]:
    cols = ["sample"]
    for i, j in _tri(N):
        cols += [f"re_{i}_{j}", f"im_{i}_{j}"]
    return cols


def vector_header(d: int) -> list[str]:
    return ["sample"] + [f"x{i}" for i in range(d)]


def encode_matrices(rhos: np.ndarray) -> np.ndarray:
    """``(n, N, N)`` Hermitian -> ``(n, N (N + 1))`` real rows in header order."""
    N = rhos.shape[-1]
    ii, jj = np.tril_indices(N)
    tri = rhos[:, ii, jj]
    out = np.empty((len(rhos), 2 * len(ii)))
    out[:, 0::2] = tri.real
    out[:, 1::2] = tri.imag
    return out


def decode_matrices(rows: np.ndarray, N: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    ii, jj = np.tril_indices(N)
    if rows.shape[-1] != 2 * len(ii):
        raise ValidationError(f"expected {2 * len(ii)} matrix columns for N={N}, got {rows.shape[-1]}")
    tri = rows[:, 0::2] + 1j * rows[:, 1::2]
    out = np.zeros((len(rows), N, N), dtype=complex)
    out[:, ii, jj] = tri
    out[:, jj, ii] = np.conj(tri)
    out[:, np.arange(N), np.arange(N)] = tri[:, ii == jj].real
    return out


def _fmt(v: float) -> str:
    return repr(float(v))


def write_rows(fh, rows: np.ndarray, start_index: int = 0):
    w = csv.writer(fh, lineterminator="\n")
    for k, r in enumerate(rows):
        w.writerow([start_index + k] + [_fmt(v) for v in r])


def write_samples_csv(path, samples: np.ndarray, kind: str = "vector"):
    """Write ``(n, d)`` vectors or ``(n, N, N)`` matrices with the documented header."""
    samples = np.asarray(samples)
    if kind == "matrix":
        N = samples.shape[-1] if samples.ndim == 3 else 0
        header = matrix_header(N)
        rows = encode_matrices(samples) if len(samples) else np.empty((0, N * (N + 1)))
    else:
        header = vector_header(samples.shape[1] if samples.ndim == 2 else 0)
        rows = samples
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerow(header)
        write_rows(fh, rows)


@dataclass
class SampleFile:
    kind: str
    header: list
    data: np.ndarray
    N: int | None = None

    @property
    def matrices(self) -> np.ndarray:
        if self.kind != "matrix":
            raise ValidationError("file does not hold density matrices")
        return decode_matrices(self.data, self.N)


def read_samples_csv(path) -> SampleFile:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file, a header row is required") from None
        rows = [r for r in reader if r]
    if not header or header[0] != "sample":
        raise ValidationError(f"{path}: first column must be 'sample'")
    data = np.array([[float(v) for v in r[1:]] for r in rows]).reshape(len(rows), len(header) - 1)
    if len(header) > 1 and header[1] == "re_0_0":
        ncols = len(header) - 1
        N = int((np.sqrt(1 + 4 * ncols) - 1) / 2)
        if matrix_header(N) != header:
            raise ValidationError(f"{path}: malformed matrix header")
        return SampleFile("matrix", header, data, N)
    if header[1:] != [f"x{i}" for i in range(len(header) - 1)]:
        return SampleFile("table", header, data)
    return SampleFile("vector", header, data)


def read_column(path, column: str | None = None) -> np.ndarray:
    """One numeric column of a CSV with header (default: ``value`` or the first non-index column)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        if column is None:
            column = "value" if "value" in names else next((c for c in names if c not in ("sample", "state", "index")), None)
        if column not in names:
            raise ValidationError(f"{path}: no column {column!r}")
        return np.array([float(r[column]) for r in reader])


def write_spectra_csv(path, values: np.ndarray):
    """Rows ``state, index, value`` for an ``(n_states, N)`` array of eigenvalues."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["state", "index", "value"])
        for s, row in enumerate(values):
            for i, v in enumerate(row):
                w.writerow([s, i, _fmt(v)])


def write_curve_csv(fh, x, y, name: str = "density"):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", name])
    for a, b in zip(x, y):
        w.writerow([_fmt(a), _fmt(b)])


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Everything needed to replay a CLI run and check its outputs."""

    command: list
    body: dict | None = None
    config: dict | None = None
    seed: int | None = None
    started: str = ""
    finished: str = ""
    outputs: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def add_output(self, path):
        self.outputs[os.path.basename(str(path))] = sha256_file(path)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def read(cls, path) -> "RunManifest":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def manifest_path(out_path) -> str:
    root, _ = os.path.splitext(str(out_path))
    return root + ".manifest.json"
