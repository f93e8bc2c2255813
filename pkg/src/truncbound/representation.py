"""Mixture representation of stationary distributions of dominating kernels.

``forward_map`` takes a stationary ``pi`` of some ``P >= G`` to a mixing
measure ``eta`` with ``pi = sum_x eta(x) nu_x``. ``backward_map`` goes the
other way: from any mixing measure it builds a dominating stochastic ``P``
whose stationary distribution is the corresponding mixture.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import _backend
from .censor import CensoredKernel, NuTable, _as_censored, build_nu_table
from .constants import TOL_ENTRY, TOL_PROB, TOL_STAT
from .errors import (
    DimensionMismatch,
    NotDominating,
    NotStationary,
    NotUniqueStationary,
    ResidualTooLarge,
    ValidationError,
    ZeroMass,
)
from .kernel import Kind, SparseKernel, StateSpace, dominates, validate_kernel


class Measure:
    """Dense nonnegative weight vector, not necessarily normalized."""

    __slots__ = ("weights", "space")

    def __init__(self, weights, space: StateSpace | None = None):
        w = np.array(weights, dtype=np.float64).reshape(-1)
        if space is not None and len(space) != w.size:
            raise DimensionMismatch(f"{w.size} weights for a space of {len(space)} states")
        self.weights = w
        self.space = space
        self._check()

    def _check(self):
        if np.any(self.weights < 0.0) or not np.all(np.isfinite(self.weights)):
            raise ValidationError("measure weights must be finite and nonnegative")

    def __len__(self):
        return self.weights.size

    def __array__(self, dtype=None, copy=None):
        return self.weights if dtype is None else self.weights.astype(dtype)

    def total(self) -> float:
        return float(self.weights.sum())

    def __repr__(self):
        return f"{type(self).__name__}({self.weights!r})"


class Distribution(Measure):
    """Probability vector over an indexed state set."""

    __slots__ = ()

    def _check(self):
        super()._check()
        if abs(self.weights.sum() - 1.0) > TOL_PROB:
            raise ValidationError(f"weights sum to {self.weights.sum()!r}, not 1")

    @classmethod
    def point_mass(cls, n: int, x: int, space=None) -> "Distribution":
        w = np.zeros(n)
        w[x] = 1.0
        return cls(w, space)

    @classmethod
    def uniform(cls, n: int, space=None) -> "Distribution":
        return cls(np.full(n, 1.0 / n), space)


def _vec(x, n=None, what="vector"):
    w = x.weights if isinstance(x, Measure) else np.asarray(x, dtype=np.float64).reshape(-1)
    if n is not None and w.size != n:
        raise DimensionMismatch(f"{what} has {w.size} entries, expected {n}")
    return w


def mixture(eta, nt: NuTable) -> Distribution:
    """``sum_x eta(x) nu_x``."""
    w = _vec(eta, nt.n, "mixing measure")
    return Distribution(w @ nt.nu, nt.space)


def _stationarity_residual(pi, Pd):
    return float(np.abs(pi @ Pd - pi).sum())


@dataclass(frozen=True)
class ForwardParts:
    """Intermediate measures of the forward construction."""

    pi1: Measure  # pi G
    pi2: Measure  # pi (P - G)
    kappa: Measure  # pi2 G
    eta: Distribution


def forward_decomposition(P: SparseKernel, G, pi, nt: NuTable | None = None) -> ForwardParts:
    cg = _as_censored(G)
    validate_kernel(P, Kind.STOCHASTIC)
    if P.shape != cg.G.shape:
        raise DimensionMismatch(f"P is {P.shape}, G is {cg.G.shape}")
    if not dominates(P, cg.G):
        raise NotDominating("P does not dominate G entrywise")
    p = _vec(pi, P.n, "pi")
    Pd, Gd = P.to_dense(), cg.G.to_dense()
    res = _stationarity_residual(p, Pd)
    if res > TOL_STAT:
        raise NotStationary(f"||pi P - pi||_1 = {res:.3g}", residual=res)
    if nt is None:
        nt = build_nu_table(cg)
    H = Pd - Gd
    H[(H < 0.0) & (H >= -TOL_ENTRY)] = 0.0
    pi1 = p @ Gd
    pi2 = p @ H
    kappa = pi2 @ Gd
    eta = pi2 * nt.g
    space = cg.space
    return ForwardParts(Measure(pi1, space), Measure(pi2, space), Measure(kappa, space), Distribution(eta, space))


def forward_map(P: SparseKernel, G, pi, nt: NuTable | None = None) -> Distribution:
    """Mixing measure ``eta(x) = (pi (P - G))(x) g(x)`` representing ``pi``."""
    return forward_decomposition(P, G, pi, nt).eta


def backward_map(gamma, G, nt: NuTable | None = None) -> tuple[SparseKernel, Distribution]:
    """Dominating stochastic kernel ``P = G + d phi`` with stationary ``mixture(gamma)``.

    ``d`` is the exit mass of ``G`` and ``phi = gamma / g`` renormalized.
    """
    cg = _as_censored(G)
    if nt is None:
        nt = build_nu_table(cg)
    w = _vec(gamma, cg.n, "gamma")
    if nt.n != cg.n:
        raise DimensionMismatch("nu table does not match G")
    weighted = w / nt.g
    c = weighted.sum()
    phi = weighted / c
    P = cg.G.to_dense() + np.outer(cg.defect, phi)
    return SparseKernel.from_dense(P, Kind.STOCHASTIC), mixture(w, nt)


def closed_classes(P: SparseKernel) -> list[np.ndarray]:
    """Closed communicating classes of the transition graph, in index order."""
    ncomp, comp = connected_components(P.csr, directed=True, connection="strong")
    coo = P.csr.tocoo()
    leaves = np.zeros(ncomp, dtype=bool)
    leaves[comp[coo.row[comp[coo.row] != comp[coo.col]]]] = True
    return [np.flatnonzero(comp == c) for c in range(ncomp) if not leaves[c]]


def stationary_oracle(P: SparseKernel) -> Distribution:
    """Unique stationary distribution of a finite stochastic kernel.

    Solved by GTH elimination on the single closed class; transient states
    get zero mass.
    """
    validate_kernel(P, Kind.STOCHASTIC)
    classes = closed_classes(P)
    if len(classes) != 1:
        raise NotUniqueStationary(f"{len(classes)} closed classes")
    cls = classes[0]
    M = np.ascontiguousarray(P.to_dense()[np.ix_(cls, cls)])
    m = cls.size
    pivots, fail = _backend.kernels.gth_eliminate(M, np.zeros(m), m - 1)
    if fail >= 0:
        raise NotUniqueStationary(f"zero pivot at class state {fail}")
    x = np.zeros(m)
    x[m - 1] = 1.0
    for j in range(m - 2, -1, -1):
        x[j] = x[j + 1:] @ M[j + 1:, j] / pivots[j]
    pi = np.zeros(P.n)
    pi[cls] = x / x.sum()
    res = _stationarity_residual(pi, P.to_dense())
    if res > 1e-10:
        raise ResidualTooLarge(f"stationary residual {res:.3g}")
    return Distribution(pi)


def conditional_distribution(pi_star, S) -> Distribution:
    """``pi*(x) / pi*(S)`` for ``x`` in the index set ``S``."""
    w = _vec(pi_star)
    idx = np.asarray(S, dtype=np.intp).reshape(-1)
    if idx.size == 0:
        raise ValidationError("conditioning set must be nonempty")
    if idx.min() < 0 or idx.max() >= w.size:
        raise DimensionMismatch("conditioning index outside the ambient space")
    part = w[idx]
    mass = part.sum()
    if mass <= TOL_PROB:
        raise ZeroMass(f"pi*(S) = {mass!r}")
    return Distribution(part / mass)
