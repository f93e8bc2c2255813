"""Parameterized chain families over countable state spaces.

Transition probabilities are built as exact fractions and converted to
floats once, so every row sums to exactly 1 before conversion.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidModel, InvalidState, Unavailable, Unstable
from .kernel import Kind, SparseKernel, StateSpace, as_label
from .representation import Distribution

FAMILIES = ("birth_death", "tandem_2d", "ncd_blocks", "random_dense")

_DEFAULTS = {
    "birth_death": {"p": 0.3},
    "tandem_2d": {"a": 0.2, "d1": 0.3, "d2": 0.3},
    "ncd_blocks": {"k": 3, "b": 4, "eps": 0.01},
    "random_dense": {"n": 10},
}


def _frac(v) -> Fraction:
    # str() first so that 0.3 means 3/10, not the nearest binary double
    return Fraction(str(v)) if isinstance(v, float) else Fraction(v)


@dataclass(frozen=True)
class ModelSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidModel(f"unknown model family {self.family!r}; expected one of {FAMILIES}")
        merged = dict(_DEFAULTS[self.family])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise InvalidModel(f"unknown parameters for {self.family}: {sorted(unknown)}")
        merged.update(self.params)
        object.__setattr__(self, "params", merged)
        _validate(self)

    def __hash__(self):
        return hash((self.family, tuple(sorted(self.params.items())), self.seed))

    @property
    def finite(self) -> bool:
        return self.family in ("ncd_blocks", "random_dense")

    def to_dict(self) -> dict:
        out = {"family": self.family, "params": dict(self.params)}
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        if not isinstance(d, dict) or "family" not in d:
            raise InvalidModel("model spec needs a 'family' field")
        return cls(d["family"], dict(d.get("params", {})), d.get("seed"))


def _prob(name, v):
    f = _frac(v)
    if not 0 <= f <= 1:
        raise InvalidModel(f"{name} = {v} is not a probability")
    return f


def _posint(name, v):
    if int(v) != v or int(v) < 1:
        raise InvalidModel(f"{name} = {v} must be a positive integer")
    return int(v)


def _validate(m: ModelSpec):
    p = m.params
    for key in ("k", "b", "n"):
        if key in p:
            p[key] = _posint(key, p[key])
    if m.family == "birth_death":
        _prob("p", p["p"])
    elif m.family == "tandem_2d":
        total = sum(_prob(k, p[k]) for k in ("a", "d1", "d2"))
        if total > 1:
            raise InvalidModel("a + d1 + d2 must not exceed 1")
    elif m.family == "ncd_blocks":
        if _posint("k", p["k"]) < 2:
            raise InvalidModel("ncd_blocks needs at least 2 blocks")
        _posint("b", p["b"])
        eps = _frac(p["eps"])
        if not 0 < eps < 1:
            raise InvalidModel("coupling eps must lie in (0, 1)")
    elif m.family == "random_dense":
        _posint("n", p["n"])
        if m.seed is None:
            raise InvalidModel("random_dense needs a seed")


def check_state(m: ModelSpec, x) -> tuple:
    x = as_label(x)
    p = m.params
    ok = False
    if m.family == "birth_death":
        ok = len(x) == 1 and x[0] >= 0
    elif m.family == "tandem_2d":
        ok = len(x) == 2 and min(x) >= 0
    elif m.family == "ncd_blocks":
        ok = len(x) == 2 and 0 <= x[0] < p["k"] and 0 <= x[1] < p["b"]
    elif m.family == "random_dense":
        ok = len(x) == 1 and 0 <= x[0] < p["n"]
    if not ok:
        raise InvalidState(f"{x} is not a state of {m.family}")
    return x


@functools.lru_cache(maxsize=32)
def _dense_weights(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(1, 1000, size=(n, n))


def _row_fractions(m: ModelSpec, x) -> list[tuple[tuple, Fraction]]:
    x = check_state(m, x)
    p = m.params
    out: dict[tuple, Fraction] = {}

    def add(lab, w):
        if w:
            out[lab] = out.get(lab, Fraction(0)) + w

    if m.family == "birth_death":
        up = _frac(p["p"])
        n = x[0]
        add((n + 1,), up)
        add((max(n - 1, 0),), 1 - up)
    elif m.family == "tandem_2d":
        a, d1, d2 = (_frac(p[k]) for k in ("a", "d1", "d2"))
        x1, x2 = x
        add((x1 + 1, x2), a)
        stay = 1 - a
        if x1 > 0:
            add((x1 - 1, x2 + 1), d1)
            stay -= d1
        if x2 > 0:
            add((x1, x2 - 1), d2)
            stay -= d2
        add(x, stay)
    elif m.family == "ncd_blocks":
        k, b, eps = p["k"], p["b"], _frac(p["eps"])
        inner = (1 - eps) / b
        cross = eps / ((k - 1) * b)
        for blk in range(k):
            for i in range(b):
                add((blk, i), inner if blk == x[0] else cross)
    elif m.family == "random_dense":
        w = _dense_weights(p["n"], m.seed)[x[0]]
        total = int(w.sum())
        for j, wj in enumerate(w.tolist()):
            add((j,), Fraction(wj, total))
    return sorted(out.items())


def transition_row(m: ModelSpec, x) -> list[tuple[tuple, float]]:
    """One-step transition row of state ``x`` as ``(label, probability)`` pairs."""
    return [(lab, float(w)) for lab, w in _row_fractions(m, x)]


def neighbors(m: ModelSpec, x) -> list[tuple]:
    return [lab for lab, _ in _row_fractions(m, x)]


def state_space(m: ModelSpec) -> StateSpace:
    """The full state space of a finite family."""
    p = m.params
    if m.family == "ncd_blocks":
        return StateSpace((blk, i) for blk in range(p["k"]) for i in range(p["b"]))
    if m.family == "random_dense":
        return StateSpace.range(p["n"])
    raise Unavailable(f"{m.family} has an infinite state space")


def window_labels(m: ModelSpec, radius: int) -> StateSpace:
    """Box window: coordinates below ``radius``; first ``radius`` states for finite families."""
    if radius < 1:
        raise InvalidModel("window radius must be >= 1")
    if m.family == "birth_death":
        return StateSpace.range(radius)
    if m.family == "tandem_2d":
        return StateSpace((i, j) for i in range(radius) for j in range(radius))
    full = state_space(m)
    return StateSpace(full.labels[:radius])


def window_from_labels(m: ModelSpec, labels, boundary: str = "truncate") -> tuple[StateSpace, SparseKernel]:
    """Within-window transitions ``P*_A``.

    ``boundary="truncate"`` drops mass leaving the window (substochastic);
    ``"reflect"`` returns it to the originating state.
    """
    space = labels if isinstance(labels, StateSpace) else StateSpace(labels)
    rows, cols, vals = [], [], []
    leaked = False
    for i, x in enumerate(space):
        lost = Fraction(0)
        for lab, w in _row_fractions(m, x):
            j = space.index.get(lab)
            if j is None:
                lost += w
                continue
            rows.append(i)
            cols.append(j)
            vals.append(w)
        if lost:
            if boundary == "reflect":
                rows.append(i)
                cols.append(i)
                vals.append(lost)
            elif boundary == "truncate":
                leaked = True
            else:
                raise ValueError(f"unknown boundary mode {boundary!r}")
    n = len(space)
    # duplicates (reflected mass onto an existing self-loop) are merged exactly first
    merged: dict[tuple[int, int], Fraction] = {}
    for r, c, v in zip(rows, cols, vals):
        merged[(r, c)] = merged.get((r, c), Fraction(0)) + v
    keys = sorted(merged)
    K = SparseKernel.from_coo(
        (n, n), [k[0] for k in keys], [k[1] for k in keys], [float(merged[k]) for k in keys],
        Kind.SUBSTOCHASTIC if leaked else Kind.STOCHASTIC,
    )
    return space, K


def window(m: ModelSpec, radius: int, boundary: str = "truncate") -> tuple[StateSpace, SparseKernel]:
    return window_from_labels(m, window_labels(m, radius), boundary)


def closed_form_stationary(m: ModelSpec, support) -> Distribution:
    """Birth-death stationary law ``pi(n) ~ (p / (1 - p))^n`` renormalized over ``support``."""
    if m.family != "birth_death":
        raise Unavailable(f"no closed form for {m.family}")
    p = float(m.params["p"])
    if p >= 0.5:
        raise Unstable(f"birth-death with p = {p} has no stationary distribution")
    space = support if isinstance(support, StateSpace) else StateSpace(support)
    for lab in space:
        check_state(m, lab)
    if p == 0.0:
        w = np.array([1.0 if lab[0] == 0 else 0.0 for lab in space])
    else:
        rho = p / (1.0 - p)
        w = np.array([rho ** lab[0] for lab in space])
    if w.sum() == 0.0:
        raise Unavailable("support carries no stationary mass")
    return Distribution(w / w.sum(), space)
