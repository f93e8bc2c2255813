"""Reward bounds, total-variation diameter, and adaptive window growth."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .censor import NuTable, TruncationSpec, build_nu_table, censor
from .errors import BudgetExhausted, DimensionMismatch, NegativeReward, ValidationError
from .kernel import StateSpace
from .models import ModelSpec, check_state, neighbors, window_from_labels
from .representation import _vec, mixture

log = logging.getLogger(__name__)


def tv_norm(p, q) -> float:
    """``sup_B |p(B) - q(B)|``, computed as half the L1 distance."""
    a, b = _vec(p), _vec(q)
    if a.size != b.size:
        raise DimensionMismatch(f"distributions of length {a.size} and {b.size}")
    return float(_backend.kernels.half_l1(a, b))


def _label(nt, i):
    return list(nt.space.labels[i]) if nt.space is not None else [int(i)]


@dataclass(frozen=True)
class RewardBounds:
    lower: float
    upper: float
    argmin_index: int
    argmax_index: int
    argmin_state: list
    argmax_state: list

    @property
    def width(self) -> float:
        return self.upper - self.lower


def reward_bounds(nt: NuTable, r) -> RewardBounds:
    """Smallest and largest ``sum_y nu_x(y) r(y)`` over rows ``x``."""
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    if r.size != nt.n:
        raise DimensionMismatch(f"reward has {r.size} entries, expected {nt.n}")
    if not np.all(np.isfinite(r)) or np.any(r < 0.0):
        raise NegativeReward("rewards must be finite and nonnegative")
    values = nt.nu @ r
    lo, hi = int(np.argmin(values)), int(np.argmax(values))
    return RewardBounds(float(values[lo]), float(values[hi]), lo, hi, _label(nt, lo), _label(nt, hi))


@dataclass(frozen=True)
class TvReport:
    diameter: float
    witness_pair: tuple[int, int]
    witness_labels: tuple[list, list]


def tv_diameter(nt: NuTable) -> TvReport:
    """``max_{x,y} tv_norm(nu_x, nu_y)`` with the first maximizing pair.

    The pair scan is split across threads; blocks are merged in row order
    with the same early stop at 1.0 as a sequential scan, so the result does
    not depend on the thread count.
    """
    n = nt.n
    if n < 2:
        return TvReport(0.0, (0, 0), (_label(nt, 0), _label(nt, 0)))
    nu = np.ascontiguousarray(nt.nu)
    blocks = _backend.row_blocks(n, _backend.get_threads())
    results = _backend.parallel_map(lambda b: _backend.kernels.tv_scan(nu, b[0], b[1]), blocks)
    best, bi, bj = -1.0, 0, 1
    for val, i, j in results:
        if val > best:
            best, bi, bj = val, i, j
        if best >= 1.0:
            break
    return TvReport(float(best), (int(bi), int(bj)), (_label(nt, bi), _label(nt, bj)))


def mixture_tv_gap(eta1, eta2, nt: NuTable) -> float:
    """Total-variation distance between two mixtures of the rows of ``nt``."""
    return tv_norm(mixture(eta1, nt), mixture(eta2, nt))


@dataclass
class AdaptRound:
    window_size: int
    boundary_size: int
    diameter: float


@dataclass
class AdaptReport:
    trajectory: list = field(default_factory=list)
    final_spec: TruncationSpec | None = None
    converged: bool = False
    eps: float = 0.0
    budget: int = 0
    final_tv: TvReport | None = None
    final_nu: NuTable | None = None

    @property
    def final_diameter(self):
        return self.trajectory[-1].diameter if self.trajectory else None


def grow_window(model: ModelSpec, A: StateSpace) -> StateSpace:
    """One breadth-first hop: ``A`` plus every state reachable in one step."""
    labels = set(A.labels)
    for x in A:
        labels.update(neighbors(model, x))
    return StateSpace(labels)


def evaluate_window(model: ModelSpec, A: StateSpace, S: StateSpace, *, method="gth"):
    spec = TruncationSpec(A, S, model)
    _, P_A = window_from_labels(model, A)
    nt = build_nu_table(censor(P_A, spec, method=method), method=method)
    return spec, nt, tv_diameter(nt)


def adapt_boundary(model: ModelSpec, S, eps: float, policy: str = "bfs", budget: int = 10_000,
                   A0=None, *, method="gth") -> AdaptReport:
    """Grow the boundary layer until the TV diameter is at most ``eps``.

    Raises :class:`BudgetExhausted` (carrying the partial report) when the
    next window would exceed ``budget`` states or stops growing.
    """
    if not 0.0 < eps <= 1.0:
        raise ValidationError(f"eps must lie in (0, 1], got {eps}")
    if policy != "bfs":
        raise ValidationError(f"unknown growth policy {policy!r}")
    S = S if isinstance(S, StateSpace) else StateSpace(S)
    for x in S:
        check_state(model, x)
    A = S if A0 is None else (A0 if isinstance(A0, StateSpace) else StateSpace(A0))
    report = AdaptReport(eps=eps, budget=budget)
    if len(A) > budget:
        raise BudgetExhausted(f"initial window of {len(A)} states exceeds budget {budget}", report)
    while True:
        spec, nt, tv = evaluate_window(model, A, S, method=method)
        report.trajectory.append(AdaptRound(len(A), len(A) - len(S), tv.diameter))
        report.final_spec, report.final_tv, report.final_nu = spec, tv, nt
        log.info("window %d: diameter %.3e", len(A), tv.diameter)
        if tv.diameter <= eps:
            report.converged = True
            return report
        grown = grow_window(model, A)
        if len(grown) == len(A) or len(grown) > budget:
            raise BudgetExhausted(
                f"diameter {tv.diameter:.3e} > eps {eps:g} with window {len(A)} at budget {budget}", report)
        A = grown
