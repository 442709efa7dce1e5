"""Numerical checks of product-estimate witnesses and counterexample reproductions.

Sampling is one-sided: ``Pass`` only says no sampled pair broke the bound.
All randomness comes from ``numpy.random.Generator(PCG64(seed))`` and samples
are reduced in sample order, so a given seed always reports the same first
violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import DEFAULT_SETTINGS, Settings
from errors import GridTooCoarse, IndexBeyondTruncation, InputError, NonPositiveT, ShapeMismatch
from log_utils import LogCategory, log_debug, log_info, log_warning
from models import BilinearModel, bump, bump_bound, bump_intervals, ck_norm, evaluate, sequence_pointwise
from seminorms import PrefixSup, describe, scaled
from witness import ProductEstimateWitness

STRATEGIES = ("basis", "randomSparse", "randomDense", "hillClimb")
SPARSE_MAX_NONZERO = 3


@dataclass(frozen=True)
class SampleConfig:
    seed: int
    count: int = 10_000
    strategies: Tuple[str, ...] = STRATEGIES

    def __post_init__(self) -> None:
        if self.count < 1:
            raise InputError("Sample count must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise InputError("Seed must be a 64-bit unsigned integer")
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown:
            raise InputError(f"Unknown sampling strategies: {', '.join(sorted(unknown))}")
        object.__setattr__(self, "strategies", tuple(s for s in STRATEGIES if s in self.strategies))


@dataclass(frozen=True, eq=False)
class Violation:
    i: int
    j: int
    x: np.ndarray
    y: np.ndarray
    lhs: float
    rhs: float
    strategy: str = "basis"
    sample_index: int = 0
    samples_tried: int = 0
    seed: Optional[int] = None
    note: str = ""

    @property
    def outcome(self) -> str:
        return "Violation"

    def to_json(self) -> Dict[str, Any]:
        document = {
            "i": self.i,
            "j": self.j,
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "strategy": self.strategy,
            "sampleIndex": self.sample_index,
        }
        if self.note:
            document["note"] = self.note
        return document


@dataclass(frozen=True)
class Pass:
    samples_tried: int
    seed: Optional[int] = None

    @property
    def outcome(self) -> str:
        return "Pass"


Outcome = Union[Pass, Violation]


def report_json(outcome: Outcome) -> Dict[str, Any]:
    return {
        "outcome": outcome.outcome,
        "violation": outcome.to_json() if isinstance(outcome, Violation) else None,
        "samplesTried": outcome.samples_tried,
        "seed": outcome.seed,
    }


def report_text(outcome: Outcome) -> str:
    if isinstance(outcome, Pass):
        return f"Pass: no violation in {outcome.samples_tried} samples (seed {outcome.seed})"
    lines = [
        f"Violation at (i={outcome.i}, j={outcome.j}) from {outcome.strategy} sample {outcome.sample_index}",
        f"  lhs = {outcome.lhs!r}",
        f"  rhs = {outcome.rhs!r}",
        f"  x = {outcome.x.tolist()}",
        f"  y = {outcome.y.tolist()}",
    ]
    if outcome.note:
        lines.append(f"  note: {outcome.note}")
    return "\n".join(lines)


# --- evaluation ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Problem:
    model: BilinearModel
    targets: Tuple[Tuple[Any, ...], ...]
    p_family: Tuple[Any, ...]
    q_family: Tuple[Any, ...]
    settings: Settings


def _problem(model: BilinearModel, targets: Any, witness: ProductEstimateWitness, settings: Settings) -> _Problem:
    table = targets if targets is not None else witness.targets
    if table is None:
        raise InputError("No target seminorms given and the witness carries none")
    table = tuple(tuple(row) for row in table)
    rows, cols = len(table), len(table[0])
    if any(len(row) != cols for row in table):
        raise ShapeMismatch("Target table is ragged")
    if len(witness.p_family) < rows or len(witness.q_family) < cols:
        raise ShapeMismatch(f"Witness covers {len(witness.p_family)}x{len(witness.q_family)} "
                            f"but the targets are {rows}x{cols}")
    return _Problem(model, table, witness.p_family[:rows], witness.q_family[:cols], settings)


def _sides(problem: _Problem, X: np.ndarray, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """``lhs[i, j, b]`` and ``rhs[i, j, b]`` for a batch of pairs."""
    model = problem.model
    Z = model(X, Y)
    lhs = np.stack([np.stack([evaluate(t, Z, model.codomain) for t in row]) for row in problem.targets])
    P = np.stack([evaluate(p, X, model.domains[0]) for p in problem.p_family])
    Q = np.stack([evaluate(q, Y, model.domains[1]) for q in problem.q_family])
    rhs = P[:, None, :] * Q[None, :, :]
    return lhs, rhs


def _broken(problem: _Problem, lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    s = problem.settings
    return lhs > rhs * (1.0 + s.rel_tolerance) + s.abs_tolerance


def _first_violation(problem: _Problem, X: np.ndarray, Y: np.ndarray, strategy: str,
                     offset: int) -> Optional[Violation]:
    lhs, rhs = _sides(problem, X, Y)
    broken = _broken(problem, lhs, rhs)
    if not broken.any():
        return None
    samples = np.flatnonzero(broken.any(axis=(0, 1)))
    b = int(samples[0])
    i, j = (int(v) for v in np.argwhere(broken[:, :, b])[0])
    return Violation(i=i + 1, j=j + 1, x=X[b].copy(), y=Y[b].copy(), lhs=float(lhs[i, j, b]),
                     rhs=float(rhs[i, j, b]), strategy=strategy, sample_index=offset + b)


def _scores(problem: _Problem, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Worst ratio ``lhs / (rhs + abs_tolerance)`` per sample."""
    lhs, rhs = _sides(problem, X, Y)
    return (lhs / (rhs + problem.settings.abs_tolerance)).max(axis=(0, 1))


# --- samplers --------------------------------------------------------------

def _basis_pairs(problem: _Problem, limit: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    n1, n2 = problem.model.domains[0].dim, problem.model.domains[1].dim
    total = min(limit, n1 * n2)
    batch = problem.settings.batch_size
    eye1, eye2 = np.eye(n1), np.eye(n2)
    for start in range(0, total, batch):
        index = np.arange(start, min(start + batch, total))
        yield eye1[index // n2], eye2[index % n2]


def _random_batch(rng: np.random.Generator, size: int, dim: int, sparse: bool) -> np.ndarray:
    if not sparse:
        return rng.standard_normal((size, dim))
    batch = np.zeros((size, dim))
    nonzero = rng.integers(1, min(SPARSE_MAX_NONZERO, dim) + 1, size=size)
    for row in range(size):
        positions = rng.choice(dim, size=nonzero[row], replace=False)
        batch[row, positions] = rng.standard_normal(nonzero[row])
    return batch


def _random_pairs(problem: _Problem, rng: np.random.Generator, count: int,
                  sparse: bool) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    n1, n2 = problem.model.domains[0].dim, problem.model.domains[1].dim
    batch = problem.settings.batch_size
    for start in range(0, count, batch):
        size = min(batch, count - start)
        yield _random_batch(rng, size, n1, sparse), _random_batch(rng, size, n2, sparse)


def _budget(cfg: SampleConfig, problem: _Problem) -> List[Tuple[str, int]]:
    """Split the sample count over the enabled sampling strategies, in fixed order."""
    remaining = cfg.count
    plan = []
    if "basis" in cfg.strategies:
        n1, n2 = problem.model.domains[0].dim, problem.model.domains[1].dim
        basis = min(remaining, n1 * n2)
        plan.append(("basis", basis))
        remaining -= basis
    randoms = [s for s in ("randomSparse", "randomDense") if s in cfg.strategies]
    for k, strategy in enumerate(randoms):
        share = remaining - remaining // 2 if k == 0 and len(randoms) == 2 else remaining
        plan.append((strategy, share))
        remaining -= share
    return plan


@dataclass
class _Sweep:
    violation: Optional[Violation] = None
    tried: int = 0
    top: List[Tuple[float, int, np.ndarray, np.ndarray]] = field(default_factory=list)


def _sweep(problem: _Problem, cfg: SampleConfig, keep: int) -> _Sweep:
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    state = _Sweep()
    for strategy, count in _budget(cfg, problem):
        if count <= 0:
            continue
        if strategy == "basis":
            batches = _basis_pairs(problem, count)
        else:
            batches = _random_pairs(problem, rng, count, sparse=strategy == "randomSparse")
        for X, Y in batches:
            violation = _first_violation(problem, X, Y, strategy, state.tried)
            if violation is not None:
                state.violation = violation
                state.tried = violation.sample_index + 1
                return state
            if keep and strategy != "basis":
                scores = _scores(problem, X, Y)
                for b in np.argsort(-scores, kind="stable")[:keep]:
                    state.top.append((float(scores[b]), state.tried + int(b), X[b].copy(), Y[b].copy()))
                state.top.sort(key=lambda item: (-item[0], item[1]))
                del state.top[keep:]
            state.tried += X.shape[0]
    return state


def _with_totals(violation: Violation, tried: int, seed: int) -> Violation:
    return Violation(i=violation.i, j=violation.j, x=violation.x, y=violation.y, lhs=violation.lhs,
                     rhs=violation.rhs, strategy=violation.strategy, sample_index=violation.sample_index,
                     samples_tried=tried, seed=seed, note=violation.note)


def check(model: BilinearModel, targets: Any, witness: ProductEstimateWitness, cfg: SampleConfig,
          settings: Settings = DEFAULT_SETTINGS) -> Outcome:
    """First sampled pair breaking ``p_ij(beta(x,y)) <= p_i(x) q_j(y)``, or ``Pass``."""
    problem = _problem(model, targets, witness, settings)
    state = _sweep(problem, cfg, keep=0)
    if state.violation is not None:
        log_info(f"{model.name}: violation at sample {state.violation.sample_index}", LogCategory.FALSIFY)
        return _with_totals(state.violation, state.tried, cfg.seed)
    log_info(f"{model.name}: no violation in {state.tried} samples", LogCategory.FALSIFY)
    return Pass(samples_tried=state.tried, seed=cfg.seed)


def _hill_climb(problem: _Problem, x: np.ndarray, y: np.ndarray, offset: int) -> Tuple[Optional[Violation], int]:
    """Coordinate ascent on the worst ratio; the step halves whenever no move improves."""
    settings = problem.settings
    n1, n2 = x.size, y.size
    moves = np.concatenate([np.eye(n1 + n2), -np.eye(n1 + n2)])
    scale = max(np.abs(x).max(), np.abs(y).max(), 1.0)
    step = scale
    current = float(_scores(problem, x[None], y[None])[0])
    tried = 0
    for _ in range(settings.hill_climb_steps):
        candidates = np.concatenate([x, y])[None, :] + step * moves
        X, Y = candidates[:, :n1], candidates[:, n1:]
        violation = _first_violation(problem, X, Y, "hillClimb", offset + tried)
        tried += X.shape[0]
        if violation is not None:
            return violation, tried
        scores = _scores(problem, X, Y)
        best = int(np.argmax(scores))
        if scores[best] > current:
            current = float(scores[best])
            x, y = X[best].copy(), Y[best].copy()
        else:
            step /= 2.0
    return None, tried


def search(model: BilinearModel, targets: Any, witness: ProductEstimateWitness, cfg: SampleConfig,
           settings: Settings = DEFAULT_SETTINGS) -> Outcome:
    """``check`` plus hill climbing from the best random samples."""
    problem = _problem(model, targets, witness, settings)
    state = _sweep(problem, cfg, keep=settings.hill_climb_restarts)
    if state.violation is not None:
        return _with_totals(state.violation, state.tried, cfg.seed)

    tried = state.tried
    if "hillClimb" in cfg.strategies:
        for _, _, x, y in state.top:
            violation, used = _hill_climb(problem, x, y, tried)
            if violation is not None:
                log_info(f"{model.name}: hill climb found a violation", LogCategory.FALSIFY)
                return _with_totals(violation, violation.sample_index + 1, cfg.seed)
            tried += used
    log_info(f"{model.name}: search found no violation in {tried} samples", LogCategory.FALSIFY)
    return Pass(samples_tried=tried, seed=cfg.seed)


def replay_violation(model: BilinearModel, targets: Any, witness: ProductEstimateWitness,
                     violation: Violation) -> Tuple[float, float]:
    """Recompute ``(lhs, rhs)`` of a reported violation from its vectors and indices."""
    i, j = violation.i, violation.j
    target = (targets if targets is not None else witness.targets)[i - 1][j - 1]
    z = model(violation.x[None], violation.y[None])
    lhs = float(evaluate(target, z, model.codomain)[0])
    rhs = float(evaluate(witness.p(i), violation.x[None], model.domains[0])[0]
                * evaluate(witness.q(j), violation.y[None], model.domains[1])[0])
    return lhs, rhs


# --- counterexamples -------------------------------------------------------

SEQUENCE_NOTE = ("both factors are evaluated at e_(n+1): "
                 "p_1(e_(n+1)) q_n(e_(n+1)) <= r ||e_(n+1)||_n q_n(e_(n+1)) = 0")


def reproduce_sequence_counterexample(n: int, r: float = 1.0, truncation: Optional[int] = None) -> Violation:
    """Pointwise multiplication on R^N has no product estimates for ``p_ij = ||.||_(i+j)``.

    Any candidate ``p_1 <= r ||.||_n`` is beaten at ``x = y = e_(n+1)``.
    """
    if n < 1:
        raise IndexBeyondTruncation("n must be at least 1")
    if not r > 0:
        raise InputError(f"r must be positive, got {r}")
    truncation = n + 1 if truncation is None else truncation
    if truncation < n + 1:
        raise IndexBeyondTruncation(f"Truncation {truncation} cannot hold e_{n + 1}")

    model = sequence_pointwise(truncation)
    target = PrefixSup(n=1 + n)
    p_1 = scaled(r, PrefixSup(n=n))
    q_n = PrefixSup(n=truncation)
    e = model.basis(0, n + 1)
    z = model(e, e)
    lhs = float(evaluate(target, z, model.codomain))
    rhs = float(evaluate(p_1, e, model.domains[0]) * evaluate(q_n, e, model.domains[1]))
    log_info(f"Sequence counterexample n={n}, r={r}: lhs={lhs}, rhs={rhs} with p_1 = {describe(p_1)}",
             LogCategory.FALSIFY)
    return Violation(i=1, j=n, x=e, y=e.copy(), lhs=lhs, rhs=rhs, strategy="basis",
                     sample_index=0, samples_tried=1, note=SEQUENCE_NOTE)


@dataclass(frozen=True)
class BlowupReport:
    k: int
    t_values: Tuple[float, ...]
    ck_norms: Tuple[float, ...]
    ck1_norms: Tuple[float, ...]
    ratios: Tuple[float, ...]
    quotients: Tuple[float, ...]
    bound: float
    bounded: bool
    blowup: bool
    intervals: Tuple[int, ...]

    def to_json(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "tValues": list(self.t_values),
            "ckNorms": list(self.ck_norms),
            "ck1Norms": list(self.ck1_norms),
            "ratios": list(self.ratios),
            "quotients": list(self.quotients),
            "bound": self.bound,
            "bounded": self.bounded,
            "blowup": self.blowup,
            "intervals": list(self.intervals),
        }


def _converged(coarse: float, fine: float, tolerance: float) -> bool:
    return abs(fine - coarse) <= tolerance * max(abs(fine), 1e-300)


def reproduce_smooth_blowup(k: int, t_values: Sequence[float], settings: Settings = DEFAULT_SETTINGS) -> BlowupReport:
    """``||g_t||_(C^(k+1)) / ||g_t||_(C^k)`` grows like ``1/t`` while ``||g_t||_(C^k)`` stays bounded.

    Each grid has spacing at most ``t/divisor`` and must agree with its
    refinement to within the convergence tolerance.
    """
    if k < 0:
        raise InputError("k must be nonnegative")
    t_values = tuple(float(t) for t in t_values)
    if not t_values:
        raise InputError("At least one t value is required")
    for t in t_values:
        if not t > 0:
            raise NonPositiveT(f"t must be positive, got {t}")
        if t > 1:
            raise InputError(f"t must lie in (0, 1], got {t}")
    if any(b >= a for a, b in zip(t_values, t_values[1:])):
        raise InputError("t values must be strictly decreasing")

    tolerance = settings.bump_convergence_tolerance
    ck_norms, ck1_norms, ratios, intervals = [], [], [], []
    for t in t_values:
        n = bump_intervals(t, settings.bump_grid_divisor)
        coarse = bump(t, k, n)
        fine = bump(t, k, 2 * n)
        low, high = ck_norm(coarse, k), ck_norm(coarse, k + 1)
        if not (_converged(low, ck_norm(fine, k), tolerance) and _converged(high, ck_norm(fine, k + 1), tolerance)):
            log_warning(f"Bump grid for t={t} did not converge", LogCategory.FALSIFY)
            raise GridTooCoarse(f"C^{k} norms of g_t at t={t} change by more than {tolerance:.0%} under refinement")
        ck_norms.append(low)
        ck1_norms.append(high)
        ratios.append(high / low)
        intervals.append(n)

    quotients = tuple(b / a for a, b in zip(ratios, ratios[1:]))
    # each quotient should match the scale step t_a/t_b (2 for halvings) within 10%
    blowup = bool(quotients) and all(
        0.9 * (ta / tb) <= q <= 1.1 * (ta / tb) for q, ta, tb in zip(quotients, t_values, t_values[1:]))
    bound = bump_bound(k)
    bounded = all(norm <= bound * (1.0 + tolerance) for norm in ck_norms)
    log_debug(f"Bump ratios for k={k}: {ratios}", LogCategory.FALSIFY)
    return BlowupReport(k=k, t_values=t_values, ck_norms=tuple(ck_norms), ck1_norms=tuple(ck1_norms),
                        ratios=tuple(ratios), quotients=quotients, bound=bound, bounded=bounded,
                        blowup=blowup, intervals=tuple(intervals))
