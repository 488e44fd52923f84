"""
Text artifacts: operator triplets, state vectors, CSV tables and JSON records.

Numbers are written with 17 significant digits and files are replaced atomically.
"""
import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel

from app.core.exceptions import DimensionError
from app.schemas.report import ErrorReport, ResultTable
from app.services.operators import Operator

NUMBER_FORMAT = "%.17g"


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return NUMBER_FORMAT % value
    return "" if value is None else str(value)


def atomic_write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# ── Operators and states ──────────────────────────────────────────────────────

def export_triplets(op: Operator, path: str | Path) -> Path:
    """Header `dim rows cols nnz`, then one `row col real imag` line per nonzero (0-based)."""
    mat = sp.coo_matrix(op.to_sparse())
    order = np.lexsort((mat.col, mat.row))
    lines = [f"dim {mat.shape[0]} {mat.shape[1]} {mat.nnz}"]
    for k in order:
        v = complex(mat.data[k])
        lines.append(f"{mat.row[k]} {mat.col[k]} {fmt(v.real)} {fmt(v.imag)}")
    return atomic_write_text(path, "\n".join(lines) + "\n")


def load_triplets(path: str | Path, name: str = "") -> Operator:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "dim":
            raise DimensionError(f"{path}: missing 'dim rows cols nnz' header")
        rows, cols, nnz = (int(x) for x in header[1:])
        data = np.loadtxt(fh, ndmin=2) if nnz else np.zeros((0, 4))
    if data.shape[0] != nnz:
        raise DimensionError(f"{path}: header announces {nnz} entries, found {data.shape[0]}")
    values = data[:, 2] + 1j * data[:, 3]
    mat = sp.coo_matrix((values, (data[:, 0].astype(int), data[:, 1].astype(int))), shape=(rows, cols))
    return Operator(mat.tocsr(), name=name or Path(path).stem)


def export_state(vec: np.ndarray, path: str | Path) -> Path:
    vec = np.asarray(vec, dtype=complex).ravel()
    lines = [f"{i} {fmt(v.real)} {fmt(v.imag)}" for i, v in enumerate(vec)]
    return atomic_write_text(path, "\n".join(lines) + "\n")


def load_state(path: str | Path) -> np.ndarray:
    data = np.loadtxt(path, ndmin=2)
    if data.size == 0:
        return np.zeros(0, dtype=complex)
    if not np.array_equal(data[:, 0], np.arange(data.shape[0])):
        raise DimensionError(f"{path}: state indices are not 0..n-1 in order")
    return data[:, 1] + 1j * data[:, 2]


# ── Tables ────────────────────────────────────────────────────────────────────

def render_csv(
    columns: Iterable[str],
    rows: Iterable[Iterable],
    metadata: Optional[Mapping[str, str]] = None,
) -> str:
    buf = io.StringIO()
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(columns))
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows, metadata=None) -> Path:
    return atomic_write_text(path, render_csv(columns, rows, metadata))


def write_json(path: str | Path, payload) -> Path:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def result_table_columns(axes: list[str]) -> list[str]:
    return ["component", *axes, "quantum", "classical", "exact", "abs_err", "rel_err"]


def write_result_table(table: ResultTable, path: str | Path) -> Path:
    rows = (
        [r.component, *r.coords, r.quantum, r.classical, r.exact, r.abs_err, r.rel_err]
        for r in table.rows
    )
    return write_csv(path, result_table_columns(table.axes), rows, table.metadata)


def write_error_csv(reports: Mapping[str, ErrorReport], path: str | Path, metadata=None) -> Path:
    columns = ["reference", "component", "l2_abs", "l2_rel", "linf_abs", "linf_rel", "rel_defined"]
    rows = [
        [ref, c.component, c.l2_abs, c.l2_rel, c.linf_abs, c.linf_rel, c.rel_defined]
        for ref, report in reports.items()
        for c in report.components
    ]
    return write_csv(path, columns, rows, metadata)
