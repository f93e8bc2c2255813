"""Censoring onto the inner set and the normalized fundamental-matrix rows.

The default ``"gth"`` method eliminates boundary-layer states one at a time
and then inverts ``I - G`` by triangular solves. Pivots come from tracked
exit mass plus off-diagonal mass, so nothing is ever subtracted. That keeps
entrywise relative accuracy when the inner set leaks almost nothing (deep
windows, where ``g(x)`` reaches 1e12 and beyond and ``1 - rowsum`` is pure
cancellation). The ``"lu"`` method is the plain sparse-LU route, kept for
comparison.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _backend
from .constants import MAX_TERMS, NEG_CLAMP, PIVOT_MIN, TOL_PROB, TOL_SOLVE
from .errors import (
    ConfigSNotInA,
    DimensionMismatch,
    FundamentalDiverges,
    NotConverged,
    ResidualTooLarge,
    SingularInterior,
    ValidationError,
    ZeroRow,
)
from .kernel import Kind, SparseKernel, StateSpace, deficiency, restrict, validate_kernel


@dataclass(frozen=True, eq=False)
class TruncationSpec:
    """Window ``A`` with inner set ``S``; ``A \\ S`` is the boundary layer."""

    A: StateSpace
    S: StateSpace
    ambient: Any = None

    def __post_init__(self):
        if not isinstance(self.A, StateSpace):
            object.__setattr__(self, "A", StateSpace(self.A))
        if not isinstance(self.S, StateSpace):
            object.__setattr__(self, "S", StateSpace(self.S))
        if len(self.S) == 0:
            raise ValidationError("inner set S must be nonempty")
        missing = [lab for lab in self.S if lab not in self.A.index]
        if missing:
            raise ConfigSNotInA(f"{len(missing)} labels of S are outside A, e.g. {missing[0]}")

    @property
    def boundary(self) -> StateSpace:
        return StateSpace(lab for lab in self.A if lab not in self.S.index)

    @property
    def inner_indices(self) -> np.ndarray:
        return self.A.indices(self.S.labels)

    @property
    def boundary_indices(self) -> np.ndarray:
        return np.array([i for i, lab in enumerate(self.A) if lab not in self.S.index], dtype=np.intp)


@dataclass(frozen=True, eq=False)
class CensoredKernel:
    G: SparseKernel
    spec: TruncationSpec | None
    defect: np.ndarray
    stats: dict = field(default_factory=dict)

    @classmethod
    def from_kernel(cls, G: SparseKernel, space: StateSpace | None = None) -> "CensoredKernel":
        """Wrap a bare substochastic kernel; exit mass is taken from row sums."""
        validate_kernel(G, Kind.SUBSTOCHASTIC)
        spec = None
        if space is not None:
            spec = TruncationSpec(space, space)
        return cls(G.with_kind(Kind.SUBSTOCHASTIC), spec, deficiency(G), {"method": "given"})

    @property
    def n(self) -> int:
        return self.G.n

    @property
    def space(self) -> StateSpace | None:
        return self.spec.S if self.spec is not None else None


@dataclass(frozen=True, eq=False)
class NuTable:
    """Rows ``nu[x] = N[x] / g[x]`` of the fundamental matrix ``N = (I - G)^-1``."""

    nu: np.ndarray
    g: np.ndarray
    space: StateSpace | None = None
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.nu.shape[0]

    def check(self, tol=TOL_PROB):
        sums = self.nu.sum(axis=1)
        if np.any(self.nu < 0.0):
            raise ValidationError("negative entry in nu table")
        if np.any(np.abs(sums - 1.0) > tol):
            x = int(np.argmax(np.abs(sums - 1.0)))
            raise ValidationError(f"nu row {x} sums to {sums[x]!r}")
        if np.any(self.g < 1.0 - tol):
            raise ValidationError(f"normalizer below 1: {self.g.min()!r}")
        return self


def _dense_order(P_A, spec):
    b = spec.boundary_indices
    s = spec.inner_indices
    order = np.concatenate([b, s])
    M = np.ascontiguousarray(P_A.to_dense()[np.ix_(order, order)])
    d = np.ascontiguousarray(deficiency(P_A)[order])
    return M, d, len(b)


def censor(P_A: SparseKernel, spec: TruncationSpec, *, method: str = "gth") -> CensoredKernel:
    """Censored kernel ``G = P11 + P12 (I - P22)^-1 P21`` on the inner set.

    Raises :class:`SingularInterior` when some boundary-layer state can
    neither leave ``A`` nor return to ``S``.
    """
    if P_A.shape != (len(spec.A), len(spec.A)):
        raise DimensionMismatch(f"kernel shape {P_A.shape} does not match |A| = {len(spec.A)}")
    validate_kernel(P_A, Kind.SUBSTOCHASTIC)
    if method == "gth":
        M, d, m = _dense_order(P_A, spec)
        pivots, fail = _backend.kernels.gth_eliminate(M, d, m)
        if fail >= 0:
            lab = spec.boundary.labels[fail]
            raise SingularInterior(f"boundary state {lab} cannot escape the boundary layer", state=list(lab))
        G = M[m:, m:]
        defect = d[m:].copy()
        stats = {"method": "gth", "eliminated": m,
                 "min_pivot": float(pivots.min()) if m else None, "backend": _backend.BACKEND}
        return CensoredKernel(SparseKernel.from_dense(G), spec, defect, stats)
    if method == "lu":
        return _censor_lu(P_A, spec)
    raise ValueError(f"unknown method {method!r}")


def _censor_lu(P_A, spec):
    s, b = spec.inner_indices, spec.boundary_indices
    P11 = restrict(P_A, s, s)
    if b.size == 0:
        G = P11
        return CensoredKernel(G, spec, deficiency(G), {"method": "lu", "eliminated": 0, "min_pivot": None})
    P12, P21, P22 = restrict(P_A, s, b), restrict(P_A, b, s), restrict(P_A, b, b)
    I_P22 = (sp.identity(b.size, format="csc") - P22.csr.tocsc()).tocsc()
    try:
        lu = spla.splu(I_P22)
    except RuntimeError as exc:
        raise SingularInterior(f"I - P22 is singular: {exc}") from None
    min_pivot = float(np.abs(lu.U.diagonal()).min())
    if min_pivot < PIVOT_MIN:
        raise SingularInterior(f"I - P22 pivot {min_pivot:.3g} below {PIVOT_MIN}")
    X = lu.solve(P21.to_dense())
    X = _clamp(X, SingularInterior)
    G = SparseKernel.from_dense(P11.to_dense() + P12.csr @ X)
    return CensoredKernel(G, spec, deficiency(G), {"method": "lu", "eliminated": int(b.size), "min_pivot": min_pivot})


def _clamp(X, err):
    lo = X.min() if X.size else 0.0
    if lo < NEG_CLAMP:
        raise err(f"negative entry {lo:.3g} in a provably nonnegative solve")
    return np.maximum(X, 0.0)


def _as_censored(G):
    if isinstance(G, CensoredKernel):
        return G
    if isinstance(G, SparseKernel):
        return CensoredKernel.from_kernel(G)
    return CensoredKernel.from_kernel(SparseKernel.from_dense(G))


def fundamental_rows(G, *, method: str = "gth", return_info: bool = False):
    """Fundamental matrix ``N = sum_n G^n = (I - G)^-1``.

    Accepted only if every row satisfies
    ``max_k |(N (I - G) - I)[x, k]| <= TOL_SOLVE * g(x)``.
    Raises :class:`FundamentalDiverges` when ``I - G`` is singular.
    """
    cg = _as_censored(G)
    Gd = cg.G.to_dense()
    n = Gd.shape[0]
    if method == "gth":
        N, pivots, fail = _backend.kernels.fundamental(Gd, cg.defect)
        if fail >= 0:
            raise FundamentalDiverges(f"no escape from the inner set reachable from state index {fail}", state_index=int(fail))
        min_pivot = float(pivots.min()) if n else None
    elif method == "lu":
        I_G = (sp.identity(n, format="csc") - cg.G.csr.tocsc()).tocsc()
        try:
            lu = spla.splu(I_G.T.tocsc())
        except RuntimeError as exc:
            raise FundamentalDiverges(f"I - G is singular: {exc}") from None
        min_pivot = float(np.abs(lu.U.diagonal()).min()) if n else None
        if n and min_pivot < PIVOT_MIN:
            raise FundamentalDiverges(f"I - G pivot {min_pivot:.3g} below {PIVOT_MIN}")
        N = lu.solve(np.eye(n)).T.copy()
    else:
        raise ValueError(f"unknown method {method!r}")
    N = np.ascontiguousarray(_clamp(N, FundamentalDiverges))
    if not np.all(np.isfinite(N)):
        raise FundamentalDiverges("fundamental matrix overflowed")
    R = N @ (np.eye(n) - Gd) - np.eye(n)
    g = N.sum(axis=1)
    abs_res = np.abs(R).max(axis=1) if n else np.zeros(0)
    scaled = abs_res / g
    if n and scaled.max() > TOL_SOLVE:
        raise ResidualTooLarge(f"row-scaled residual {scaled.max():.3g} exceeds {TOL_SOLVE}")
    if not return_info:
        return N
    info = {
        "method": method,
        "backend": _backend.BACKEND,
        "min_pivot": min_pivot,
        "residual_max": float(abs_res.max()) if n else 0.0,
        "residual_row_scaled_max": float(scaled.max()) if n else 0.0,
    }
    return N, info


def nu_table(N, space: StateSpace | None = None, info: dict | None = None) -> NuTable:
    """Normalize the rows of ``N``: ``g(x) = N[x].sum()``, ``nu[x] = N[x] / g(x)``."""
    N = np.asarray(N, dtype=np.float64)
    if N.ndim != 2 or N.shape[0] != N.shape[1]:
        raise DimensionMismatch("fundamental matrix must be square")
    if space is not None and len(space) != N.shape[0]:
        raise DimensionMismatch("state space size does not match fundamental matrix")
    g = N.sum(axis=1)
    if np.any(g <= 0.0):
        raise ZeroRow(f"fundamental row {int(np.argmin(g))} has zero mass")
    nu = N / g[:, None]
    return NuTable(nu, g, space, dict(info or {})).check()


def build_nu_table(G, *, method: str = "gth") -> NuTable:
    """Fundamental rows followed by normalization."""
    cg = _as_censored(G)
    N, info = fundamental_rows(cg, method=method, return_info=True)
    return nu_table(N, cg.space, info)


def neumann_oracle(G, tol: float = 1e-14, max_terms: int = MAX_TERMS):
    """Partial sum ``sum_{n=0}^{k} G^n`` stopping once the last term's max entry is below ``tol``.

    Returns ``(partial_sum, k)``.
    """
    Gd = G.to_dense() if isinstance(G, SparseKernel) else np.asarray(G, dtype=np.float64)
    n = Gd.shape[0]
    term = np.eye(n)
    total = term.copy()
    k = 0
    while n and term.max() >= tol:
        if k >= max_terms:
            raise NotConverged(f"Neumann series not below {tol} after {max_terms} terms")
        term = term @ Gd
        total += term
        k += 1
    return total, k


def censor_neumann_oracle(P_A: SparseKernel, spec: TruncationSpec, tol: float = 1e-14,
                          max_terms: int = MAX_TERMS) -> np.ndarray:
    """Absorbing-chain oracle: ``P11 + P12 (sum_k P22^k) P21``, dense."""
    s, b = spec.inner_indices, spec.boundary_indices
    D = P_A.to_dense()
    P11 = D[np.ix_(s, s)]
    if b.size == 0:
        return P11.copy()
    series, _ = neumann_oracle(D[np.ix_(b, b)], tol, max_terms)
    return P11 + D[np.ix_(s, b)] @ series @ D[np.ix_(b, s)]
