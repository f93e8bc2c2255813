"""Indexed state sets and sparse (sub)stochastic kernels."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .constants import DEFECT_SNAP, TOL_ENTRY, TOL_ROW
from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NegativeEntry,
    RowSumExceedsOne,
    RowSumNotOne,
    ValidationError,
)


def as_label(x) -> tuple:
    """Coerce an int or integer sequence to a label tuple."""
    if isinstance(x, (int, np.integer)):
        return (int(x),)
    return tuple(int(v) for v in x)


class StateSpace:
    """Ordered set of integer-tuple labels with a dense index.

    Labels are sorted lexicographically on construction, so the index of a
    label does not depend on the order it was supplied in.
    """

    __slots__ = ("labels", "index", "arity")

    def __init__(self, labels: Iterable):
        labs = sorted({as_label(x) for x in labels})
        arities = {len(t) for t in labs}
        if len(arities) > 1:
            raise ValidationError(f"labels of mixed arity {sorted(arities)}")
        self.labels = tuple(labs)
        self.arity = arities.pop() if arities else 0
        self.index = {lab: i for i, lab in enumerate(self.labels)}

    @classmethod
    def range(cls, n: int) -> "StateSpace":
        return cls((i,) for i in range(n))

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, x):
        return as_label(x) in self.index

    def __eq__(self, other):
        return isinstance(other, StateSpace) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return f"StateSpace(n={len(self)}, arity={self.arity})"

    def index_of(self, label) -> int:
        try:
            return self.index[as_label(label)]
        except KeyError:
            raise IndexOutOfRange(f"label {label!r} not in state space") from None

    def indices(self, labels: Iterable) -> np.ndarray:
        return np.array([self.index_of(x) for x in labels], dtype=np.intp)

    def issubset(self, other: "StateSpace") -> bool:
        return all(lab in other.index for lab in self.labels)

    def to_json(self) -> str:
        return json.dumps({"arity": self.arity, "labels": [list(t) for t in self.labels]})

    @classmethod
    def from_json(cls, text: str) -> "StateSpace":
        obj = json.loads(text)
        labels = obj["labels"] if isinstance(obj, dict) else obj
        return cls(labels)


class Kind(str, enum.Enum):
    STOCHASTIC = "stochastic"
    SUBSTOCHASTIC = "substochastic"


def _canonical_csr(mat) -> sp.csr_matrix:
    m = sp.csr_matrix(mat, dtype=np.float64, copy=True)
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return m


@dataclass(frozen=True, eq=False)
class SparseKernel:
    """Row-major sparse nonnegative matrix tagged stochastic or substochastic.

    Backed by a canonical CSR matrix: explicit zeros dropped, column indices
    strictly increasing within each row. Mass constraints are checked by
    :func:`validate_kernel`, not on construction.
    """

    csr: sp.csr_matrix
    kind: Kind = Kind.SUBSTOCHASTIC
    ncols: int = field(default=-1)

    def __post_init__(self):
        object.__setattr__(self, "csr", _canonical_csr(self.csr))
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "ncols", self.csr.shape[1])

    @classmethod
    def from_dense(cls, a, kind=Kind.SUBSTOCHASTIC) -> "SparseKernel":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise DimensionMismatch("kernel must be two-dimensional")
        return cls(sp.csr_matrix(a), kind)

    @classmethod
    def from_coo(cls, shape, rows, cols, vals, kind=Kind.SUBSTOCHASTIC) -> "SparseKernel":
        rows, cols = np.asarray(rows, dtype=np.intp), np.asarray(cols, dtype=np.intp)
        if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= shape[0] or cols.max() >= shape[1]):
            raise IndexOutOfRange("entry index outside matrix shape")
        return cls(sp.coo_matrix((np.asarray(vals, dtype=np.float64), (rows, cols)), shape=shape), kind)

    @classmethod
    def zeros(cls, n, m=None) -> "SparseKernel":
        return cls(sp.csr_matrix((n, n if m is None else m)))

    @property
    def n(self) -> int:
        return self.csr.shape[0]

    @property
    def shape(self):
        return self.csr.shape

    @property
    def nnz(self):
        return self.csr.nnz

    def row(self, x) -> list[tuple[int, float]]:
        lo, hi = self.csr.indptr[x], self.csr.indptr[x + 1]
        return list(zip(self.csr.indices[lo:hi].tolist(), self.csr.data[lo:hi].tolist()))

    @property
    def rows(self):
        return [self.row(x) for x in range(self.n)]

    def row_sums(self) -> np.ndarray:
        ip, data = self.csr.indptr, self.csr.data
        return np.array([math.fsum(data[ip[i]:ip[i + 1]]) for i in range(self.n)])

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()

    def with_kind(self, kind) -> "SparseKernel":
        return SparseKernel(self.csr, kind)

    def __eq__(self, other):
        if not isinstance(other, SparseKernel) or self.shape != other.shape:
            return False
        a, b = self.csr, other.csr
        return (
            np.array_equal(a.indptr, b.indptr)
            and np.array_equal(a.indices, b.indices)
            and np.array_equal(a.data, b.data)
        )

    __hash__ = None


@dataclass(frozen=True)
class ValidationReport:
    kind: Kind
    row_sums: np.ndarray
    max_violation: float
    worst_row: int
    passed: bool
    min_entry: float


def validate_kernel(K: SparseKernel, kind=None, *, tol=TOL_ROW, strict=True) -> ValidationReport:
    """Check nonnegativity and row sums for ``kind`` (defaults to ``K.kind``).

    With ``strict`` the first violated invariant is raised as its specific
    error; otherwise the failing report is returned.
    """
    kind = Kind(kind if kind is not None else K.kind)
    sums = K.row_sums()
    min_entry = float(K.csr.data.min()) if K.nnz else 0.0
    if K.shape[0] != K.shape[1]:
        raise DimensionMismatch(f"kernel must be square, got {K.shape}")
    if sums.size:
        if kind is Kind.STOCHASTIC:
            viol = np.abs(sums - 1.0)
        else:
            viol = np.maximum(sums - 1.0, 0.0)
        worst = int(np.argmax(viol))
        max_viol = float(viol[worst])
    else:
        worst, max_viol = -1, 0.0
    passed = min_entry >= 0.0 and max_viol <= tol
    report = ValidationReport(kind, sums, max_viol, worst, passed, min_entry)
    if strict and not passed:
        if min_entry < 0.0:
            raise NegativeEntry(f"negative entry {min_entry!r}", report=None)
        err = RowSumNotOne if kind is Kind.STOCHASTIC else RowSumExceedsOne
        raise err(f"row {worst} sums to {sums[worst]!r}", row=worst, row_sum=float(sums[worst]))
    return report


def dominates(P: SparseKernel, G: SparseKernel, *, tol=TOL_ENTRY) -> bool:
    """True iff ``P(x, y) >= G(x, y) - tol`` for every entry."""
    if P.shape != G.shape:
        raise DimensionMismatch(f"shapes differ: {P.shape} vs {G.shape}")
    diff = (G.csr - P.csr).tocsr()
    return not diff.nnz or float(diff.data.max()) <= tol


def deficiency(G: SparseKernel) -> np.ndarray:
    """Per-row mass deficit ``1 - G(x, S)``.

    Deficits within ``DEFECT_SNAP`` of zero are returned as exactly zero.
    """
    d = 1.0 - G.row_sums()
    d[np.abs(d) <= DEFECT_SNAP] = 0.0
    return d


def _check_index_set(idx, n, what):
    idx = np.asarray(idx, dtype=np.intp).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexOutOfRange(f"{what} index outside [0, {n})")
    if idx.size > 1 and np.any(np.diff(idx) <= 0):
        raise ValidationError(f"{what} index set must be strictly increasing")
    return idx


def restrict(K: SparseKernel, rows: Sequence[int], cols: Sequence[int]) -> SparseKernel:
    """Submatrix ``K[rows][:, cols]`` in the induced order, tagged substochastic."""
    r = _check_index_set(rows, K.shape[0], "row")
    c = _check_index_set(cols, K.shape[1], "column")
    return SparseKernel(K.csr[r][:, c], Kind.SUBSTOCHASTIC)
