"""Run configuration and the end-to-end pipelines behind the CLI commands."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import _backend
from .bounds import adapt_boundary, reward_bounds, tv_diameter
from .censor import NuTable, TruncationSpec, build_nu_table, censor
from .constants import SCHEMA_VERSION
from .errors import BudgetExhausted, ConfigError, ConfigSNotInA, TruncboundError
from .io import read_matrix_market
from .kernel import Kind, SparseKernel, StateSpace, as_label, dominates, restrict, validate_kernel
from .models import ModelSpec, state_space, window_from_labels, window_labels
from .representation import backward_map, conditional_distribution, forward_map, mixture, stationary_oracle

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    model: ModelSpec | None = None
    matrix_file: Path | None = None
    labels_file: Path | None = None
    S: Any = None
    A: Any = None
    reward: Any = "constant:1"
    eps: float | None = None
    budget: int = 10_000
    output_dir: Path | None = None
    write_nu_csv: bool = True
    trials: int = 100
    method: str = "gth"

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"model", "matrix_file", "labels_file", "S", "A", "reward", "eps", "budget",
                 "output_dir", "write_nu_csv", "trials", "method"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        base = Path(base_dir)
        has_model, has_matrix = "model" in d, "matrix_file" in d
        if has_model == has_matrix:
            raise ConfigError("config needs exactly one input source: 'model' or 'matrix_file'")
        if "labels_file" in d and not has_matrix:
            raise ConfigError("'labels_file' requires 'matrix_file'")

        def path(key):
            return base / d[key] if d.get(key) is not None else None

        cfg = cls(
            model=ModelSpec.from_dict(d["model"]) if has_model else None,
            matrix_file=path("matrix_file"),
            labels_file=path("labels_file"),
            S=d.get("S"),
            A=d.get("A"),
            reward=d.get("reward", "constant:1"),
            eps=d.get("eps"),
            budget=d.get("budget", 10_000),
            output_dir=path("output_dir"),
            write_nu_csv=bool(d.get("write_nu_csv", True)),
            trials=d.get("trials", 100),
            method=d.get("method", "gth"),
        )
        cfg._base = base
        for key in ("budget", "trials"):
            v = getattr(cfg, key)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ConfigError(f"'{key}' must be a nonnegative integer")
        if cfg.eps is not None and not (isinstance(cfg.eps, (int, float)) and 0 < cfg.eps <= 1):
            raise ConfigError("'eps' must lie in (0, 1]")
        if cfg.method not in ("gth", "lu"):
            raise ConfigError("'method' must be 'gth' or 'lu'")
        return cfg


def _label_set(spec, *, model=None, within=None, what="S") -> StateSpace:
    """Resolve ``{"radius": r}``, ``{"labels": [...]}`` or a bare label list."""
    if spec is None:
        raise ConfigError(f"config needs '{what}'")
    if isinstance(spec, dict) and set(spec) == {"radius"}:
        r = spec["radius"]
        if not isinstance(r, int) or r < 1:
            raise ConfigError(f"{what} radius must be a positive integer")
        if model is not None:
            return window_labels(model, r)
        return StateSpace(lab for lab in within if max(lab) < r)
    labels = spec.get("labels") if isinstance(spec, dict) else spec
    if not isinstance(labels, list) or not labels:
        raise ConfigError(f"{what} must be {{'radius': r}}, {{'labels': [...]}} or a nonempty label list")
    try:
        return StateSpace(as_label(x) for x in labels)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} labels must be integers or integer lists") from None


@dataclass
class Problem:
    spec: TruncationSpec
    P_A: SparseKernel
    source: dict


def resolve_problem(cfg: RunConfig) -> Problem:
    if cfg.model is not None:
        m = cfg.model
        if cfg.A is None:
            if not m.finite:
                raise ConfigError("'A' is required for infinite model families")
            A = state_space(m)
        else:
            A = _label_set(cfg.A, model=m, what="A")
        _, P_A = window_from_labels(m, A)
        source = {"model": m.to_dict()}
    else:
        A, P_A = read_matrix_market(cfg.matrix_file, cfg.labels_file)
        if cfg.A is not None and _label_set(cfg.A, within=A, what="A") != A:
            raise ConfigError("'A' must match the matrix labels when reading from a file")
        source = {"matrix_file": cfg.matrix_file.name}
    S = _label_set(cfg.S, model=cfg.model, within=A, what="S")
    if not S.issubset(A):
        raise ConfigSNotInA("S is not contained in A")
    return Problem(TruncationSpec(A, S, cfg.model), P_A, source)


def resolve_reward(reward, S: StateSpace, base=Path(".")) -> np.ndarray:
    if isinstance(reward, list):
        r = np.asarray(reward, dtype=np.float64)
    elif isinstance(reward, dict) and "file" in reward:
        import json

        try:
            r = np.asarray(json.loads((base / reward["file"]).read_text()), dtype=np.float64)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read reward file: {exc}") from None
    elif isinstance(reward, str) and ":" in reward:
        kind, _, arg = reward.partition(":")
        try:
            if kind == "constant":
                r = np.full(len(S), float(arg))
            elif kind == "coordinate":
                i = int(arg)
                if not 0 <= i < S.arity:
                    raise ConfigError(f"coordinate {i} out of range for labels of arity {S.arity}")
                r = np.array([lab[i] for lab in S], dtype=np.float64)
            elif kind == "indicator":
                members = {tuple(int(v) for v in part.split(",")) for part in arg.split(";") if part.strip()}
                r = np.array([1.0 if lab in members else 0.0 for lab in S])
            else:
                raise ConfigError(f"unknown reward kind {kind!r}")
        except ValueError:
            raise ConfigError(f"malformed reward {reward!r}") from None
    else:
        raise ConfigError(f"unrecognized reward {reward!r}")
    if r.shape != (len(S),):
        raise ConfigError(f"reward vector has {r.size} entries, expected |S| = {len(S)}")
    return r


def _labels(space, pair):
    return [list(space.labels[i]) for i in pair]


def compute_nu(cfg: RunConfig):
    timings = {}
    t0 = time.perf_counter()
    prob = resolve_problem(cfg)
    timings["setup"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    cg = censor(prob.P_A, prob.spec, method=cfg.method)
    timings["censor"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    nt = build_nu_table(cg, method=cfg.method)
    timings["fundamental"] = time.perf_counter() - t0
    return prob, cg, nt, timings


def run_bounds(cfg: RunConfig) -> tuple[dict, NuTable]:
    prob, cg, nt, timings = compute_nu(cfg)
    S = prob.spec.S
    r = resolve_reward(cfg.reward, S, getattr(cfg, "_base", Path(".")))
    t0 = time.perf_counter()
    rb = reward_bounds(nt, r)
    tv = tv_diameter(nt)
    timings["bounds"] = time.perf_counter() - t0
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "bounds",
        "source": prob.source,
        "truncation": {"S_size": len(S), "A_size": len(prob.spec.A),
                       "boundary_size": len(prob.spec.A) - len(S)},
        "g": {"min": float(nt.g.min()), "max": float(nt.g.max())},
        "reward": {"spec": cfg.reward if isinstance(cfg.reward, str) else "vector",
                   "lower": rb.lower, "upper": rb.upper, "width": rb.width,
                   "argmin_state": rb.argmin_state, "argmax_state": rb.argmax_state},
        "tv": {"diameter": tv.diameter, "witness_pair": list(tv.witness_labels)},
        "solver": {"censor": dict(cg.stats), "fundamental": dict(nt.info)},
        "timings": timings,
    }
    return report, nt


def run_adapt(cfg: RunConfig) -> dict:
    if cfg.model is None:
        raise ConfigError("adapt needs a model input (lazy window expansion)")
    if cfg.eps is None:
        raise ConfigError("adapt needs 'eps'")
    m = cfg.model
    S = _label_set(cfg.S, model=m, what="S")
    A0 = _label_set(cfg.A, model=m, what="A") if cfg.A is not None else None
    if A0 is not None and not S.issubset(A0):
        raise ConfigSNotInA("S is not contained in A")
    t0 = time.perf_counter()
    try:
        rep = adapt_boundary(m, S, float(cfg.eps), "bfs", cfg.budget, A0, method=cfg.method)
        exc = None
    except BudgetExhausted as e:
        rep, exc = e.report, e
    out = {
        "schema_version": SCHEMA_VERSION,
        "command": "adapt",
        "source": {"model": m.to_dict()},
        "S_size": len(S),
        "eps": float(cfg.eps),
        "budget": cfg.budget,
        "converged": bool(rep.converged),
        "trajectory": [{"window_size": t.window_size, "boundary_size": t.boundary_size, "diameter": t.diameter}
                       for t in rep.trajectory],
        "final": None,
        "timings": {"total": time.perf_counter() - t0},
    }
    if rep.final_spec is not None:
        out["final"] = {
            "window_size": len(rep.final_spec.A),
            "diameter": rep.final_tv.diameter,
            "witness_pair": list(rep.final_tv.witness_labels),
            "window_labels": [list(t) for t in rep.final_spec.A.labels],
        }
    return out, exc


def verify_chain(cfg: RunConfig) -> tuple[StateSpace, SparseKernel]:
    if cfg.model is not None:
        if not cfg.model.finite:
            raise ConfigError("verify needs a finite chain (ncd_blocks, random_dense or a matrix file)")
        space = state_space(cfg.model)
        _, P = window_from_labels(cfg.model, space)
    else:
        space, P = read_matrix_market(cfg.matrix_file, cfg.labels_file)
    return space, P.with_kind(Kind.STOCHASTIC)


TOLERANCES = {"forward": 1e-8, "backward_stationarity": 1e-10, "backward_forward": 1e-8,
              "eta_mass": 1e-9, "stochastic": 1e-12}


def _corrupt(nt: NuTable) -> NuTable:
    return NuTable(np.roll(nt.nu, 1, axis=0), nt.g, nt.space, nt.info)


def verify_trial(P_star, pi_star, rng, *, corrupt=False) -> dict:
    """One draw of both round trips on a random window of ``P_star``."""
    n = P_star.n
    perm = rng.permutation(n)
    s_size = max(1, n // 2)
    extra = int(rng.integers(0, n - s_size)) if n - s_size > 0 else 0
    S_idx = np.sort(perm[:s_size])
    A_idx = np.sort(perm[:s_size + extra])
    full = StateSpace.range(n)
    A = StateSpace(full.labels[i] for i in A_idx)
    S = StateSpace(full.labels[i] for i in S_idx)
    G = censor(restrict(P_star, A_idx, A_idx), TruncationSpec(A, S))
    P = censor(P_star, TruncationSpec(full, S)).G.with_kind(Kind.STOCHASTIC)
    nt = build_nu_table(G)
    if corrupt:
        nt = _corrupt(nt)
    pi = conditional_distribution(pi_star, S_idx)
    eta = forward_map(P, G, pi, nt)
    gamma = rng.dirichlet(np.ones(len(S)))
    Pb, mu = backward_map(gamma, G, nt)
    Pbd, mw = Pb.to_dense(), mu.weights
    eta2 = forward_map(Pb, G, mu, nt)
    return {
        "forward": float(np.abs(mixture(eta, nt).weights - pi.weights).sum()),
        "eta_mass": abs(float(eta.weights.sum()) - 1.0),
        "backward_stationarity": float(np.abs(mw @ Pbd - mw).sum()),
        "backward_forward": float(np.abs(mixture(eta2, nt).weights - mw).sum()),
        "stochastic": validate_kernel(Pb, Kind.STOCHASTIC, strict=False).max_violation,
        "dominates": bool(dominates(Pb, G.G)),
        "fundamental_residual": float(nt.info.get("residual_max", 0.0)),
    }


def run_verify(cfg: RunConfig, trials: int, seed: int, *, corrupt=False) -> dict:
    space, P_star = verify_chain(cfg)
    validate_kernel(P_star, Kind.STOCHASTIC)
    if P_star.n < 2:
        raise ConfigError("verify needs at least 2 states")
    pi_star = stationary_oracle(P_star)
    maxima = {k: 0.0 for k in TOLERANCES}
    failures, warnings = [], []
    if trials == 0:
        warnings.append("trials = 0: vacuous pass")
        log.warning("verify: trials = 0, nothing checked")
    for t in range(trials):
        trial_seed = int(np.random.SeedSequence([seed, t]).generate_state(1)[0])
        rng = np.random.default_rng(trial_seed)
        try:
            res = verify_trial(P_star, pi_star, rng, corrupt=corrupt)
        except TruncboundError as exc:
            failures.append({"trial": t, "trial_seed": trial_seed, "error": exc.code, "message": str(exc)})
            continue
        bad = [k for k, tol in TOLERANCES.items() if not res[k] <= tol]
        if not res["dominates"]:
            bad.append("dominates")
        for k in TOLERANCES:
            maxima[k] = max(maxima[k], res[k])
        if bad:
            failures.append({"trial": t, "trial_seed": trial_seed, "failed": bad})
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "states": len(space),
        "trials": trials,
        "seed": seed,
        "tolerances": TOLERANCES,
        "max_residuals": maxima,
        "failures": failures,
        "passed": not failures,
        "warnings": warnings,
        "backend": _backend.BACKEND,
    }
