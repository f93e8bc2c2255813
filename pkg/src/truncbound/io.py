"""File formats: Matrix Market kernels, JSON label sidecars, CSV nu tables, JSON reports."""
from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .censor import NuTable
from .errors import DimensionMismatch, ParseError
from .kernel import Kind, SparseKernel, StateSpace, as_label

MM_HEADER = "%%MatrixMarket matrix coordinate real general"


def fmt(x: float) -> str:
    return "%.17g" % x


def write_matrix_market(path, K: SparseKernel, space: StateSpace | None = None, labels_path=None):
    """Write ``K`` in coordinate format; optionally write the label sidecar."""
    coo = K.csr.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write(MM_HEADER + "\n")
        fh.write(f"{K.shape[0]} {K.shape[1]} {coo.nnz}\n")
        for k in order:
            fh.write(f"{coo.row[k] + 1} {coo.col[k] + 1} {fmt(coo.data[k])}\n")
    if labels_path is not None:
        write_labels(labels_path, space if space is not None else StateSpace.range(K.shape[0]))


def write_labels(path, space: StateSpace):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(space.to_json() + "\n")


def read_labels(path) -> list[tuple]:
    """Labels in file order (the order of the matrix rows they annotate)."""
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read label sidecar {path}: {exc}") from None
    labels = obj["labels"] if isinstance(obj, dict) else obj
    try:
        return [as_label(x) for x in labels]
    except (TypeError, ValueError):
        raise ParseError(f"labels in {path} must be integers or integer lists") from None


def _parse_header(line):
    parts = line.strip().lower().split()
    if len(parts) != 5 or parts[0] != "%%matrixmarket":
        raise ParseError("missing %%MatrixMarket header", line=1)
    if parts[1] != "matrix" or parts[2] != "coordinate":
        raise ParseError("only coordinate matrices are supported", line=1)
    if parts[3] not in ("real", "integer"):
        raise ParseError(f"unsupported field {parts[3]!r}", line=1)
    if parts[4] != "general":
        raise ParseError(f"unsupported symmetry {parts[4]!r}", line=1)


def read_matrix_market(path, labels_path=None, kind=Kind.SUBSTOCHASTIC) -> tuple[StateSpace, SparseKernel]:
    """Parse a coordinate real general matrix into a kernel over its labels.

    Without a sidecar, state ``i`` gets label ``(i,)``. With one, rows are
    permuted into the canonical label order.
    """
    try:
        lines = Path(path).read_text(encoding="ascii").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    if not lines:
        raise ParseError("empty file", line=1)
    _parse_header(lines[0])
    body = [(i + 1, ln) for i, ln in enumerate(lines) if i > 0 and ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", line=len(lines))
    lineno, size = body[0]
    try:
        nrow, ncol, nnz = (int(t) for t in size.split())
    except ValueError:
        raise ParseError(f"bad size line {size!r}", line=lineno) from None
    if nrow != ncol:
        raise DimensionMismatch(f"kernel must be square, got {nrow}x{ncol}")
    if nrow < 0 or nnz < 0:
        raise ParseError("negative dimension", line=lineno)
    entries = body[1:]
    if len(entries) != nnz:
        raise ParseError(f"expected {nnz} entries, found {len(entries)}", line=entries[-1][0] if entries else lineno)
    rows, cols, vals, seen = [], [], [], set()
    for lineno, ln in entries:
        toks = ln.split()
        if len(toks) != 3:
            raise ParseError(f"expected 'row col value', got {ln.strip()!r}", line=lineno)
        try:
            i, j, v = int(toks[0]) - 1, int(toks[1]) - 1, float(toks[2])
        except ValueError:
            raise ParseError(f"malformed entry {ln.strip()!r}", line=lineno) from None
        if not (0 <= i < nrow and 0 <= j < ncol):
            raise ParseError(f"index ({i + 1}, {j + 1}) outside {nrow}x{ncol}", line=lineno)
        if not math.isfinite(v):
            raise ParseError("non-finite value", line=lineno)
        if (i, j) in seen:
            raise ParseError(f"duplicate entry ({i + 1}, {j + 1})", line=lineno)
        seen.add((i, j))
        rows.append(i)
        cols.append(j)
        vals.append(v)
    if labels_path is None:
        space = StateSpace.range(nrow)
        perm = np.arange(nrow)
    else:
        file_labels = read_labels(labels_path)
        if len(file_labels) != nrow:
            raise DimensionMismatch(f"{len(file_labels)} labels for a {nrow}-state matrix")
        space = StateSpace(file_labels)
        if len(space) != nrow:
            raise DimensionMismatch("label sidecar contains duplicates")
        perm = space.indices(file_labels)
    rows = perm[np.asarray(rows, dtype=np.intp)] if rows else np.zeros(0, dtype=np.intp)
    cols = perm[np.asarray(cols, dtype=np.intp)] if cols else np.zeros(0, dtype=np.intp)
    return space, SparseKernel.from_coo((nrow, nrow), rows, cols, vals, kind)


def label_str(label) -> str:
    return ";".join(str(v) for v in label)


def parse_label(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.strip().strip("()").replace(",", ";").split(";") if t.strip())
    except ValueError:
        raise ParseError(f"bad label {text!r}") from None


def write_nu_csv(path, nt: NuTable):
    space = nt.space if nt.space is not None else StateSpace.range(nt.n)
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "g"] + [label_str(lab) for lab in space])
        for lab, gx, row in zip(space, nt.g, nt.nu):
            w.writerow([label_str(lab), fmt(gx)] + [fmt(v) for v in row])


def read_nu_csv(path) -> NuTable:
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["label", "g"]:
        raise ParseError("nu table CSV must start with 'label,g'", line=1)
    labels = [parse_label(r[0]) for r in rows[1:]]
    try:
        g = np.array([float(r[1]) for r in rows[1:]])
        nu = np.array([[float(v) for v in r[2:]] for r in rows[1:]]).reshape(len(labels), len(labels))
    except ValueError as exc:
        raise ParseError(f"bad number in nu table: {exc}") from None
    return NuTable(nu, g, StateSpace(labels))


def write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path is None or path == "-":
        return text
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return text


def distribution_to_json(weights, space: StateSpace | None = None) -> dict:
    out = {"weights": [float(w) for w in np.asarray(weights)]}
    if space is not None:
        out["labels"] = [list(t) for t in space.labels]
    return out
