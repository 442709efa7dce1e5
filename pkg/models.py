"""Finite-dimensional models of sequence spaces, test functions and bilinear maps.

Vectors are numpy arrays; every evaluator accepts a single vector or a batch
stacked along the first axis and works along the last axis. Derivatives
are second-order finite differences: central in the interior, one-sided at
interval ends, periodic on the circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from scipy import fft

from config import DEFAULT_SETTINGS, Settings
from errors import (IndexBeyondTruncation, NonAbelianUnsupported, NonPositiveT, OverflowOutsideWindow,
                    ShapeMismatch, StencilTooWide, UnevaluableSeminorm)
from log_utils import LogCategory, log_debug, log_warning
from seminorms import (Base, BlockMax, BlockSum, CkNorm, MaxOf, PrefixSup, Scale, SumOf, WeightedSup,
                       describe)

SEQUENCE = "sequence"
INTERVAL = "interval"
CIRCLE = "circle"


# --- vectors ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SeqVector:
    """Truncation ``(x_1, ..., x_N)`` of a real sequence."""
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 1 or entries.size == 0:
            raise ShapeMismatch("SeqVector needs a non-empty 1-d array")
        object.__setattr__(self, "entries", entries)

    @property
    def truncation(self) -> int:
        return self.entries.size

    @classmethod
    def basis(cls, truncation: int, k: int) -> "SeqVector":
        """Unit vector ``e_k`` (1-based)."""
        if not 1 <= k <= truncation:
            raise IndexBeyondTruncation(f"e_{k} does not exist in a truncation of size {truncation}")
        entries = np.zeros(truncation)
        entries[k - 1] = 1.0
        return cls(entries)

    @classmethod
    def zeros(cls, truncation: int) -> "SeqVector":
        return cls(np.zeros(truncation))

    def to_json(self) -> Dict[str, Any]:
        return {"entries": self.entries.tolist(), "truncation": self.truncation}


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on a uniform grid of [0,1] (endpoints included) or of the circle."""
    samples: np.ndarray
    periodic: bool = False

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < (1 if self.periodic else 2):
            raise ShapeMismatch("GridFunction needs a 1-d array of samples")
        object.__setattr__(self, "samples", samples)

    @property
    def spacing(self) -> float:
        n = self.samples.size
        return 1.0 / n if self.periodic else 1.0 / (n - 1)

    @property
    def points(self) -> np.ndarray:
        return grid_points(self.samples.size, self.periodic)

    @classmethod
    def sample(cls, f: Callable[[np.ndarray], np.ndarray], size: int, periodic: bool = False) -> "GridFunction":
        """Sample ``f`` on ``size`` grid points."""
        return cls(np.asarray(f(grid_points(size, periodic)), dtype=float) * np.ones(size), periodic)

    def to_json(self) -> Dict[str, Any]:
        return {"samples": self.samples.tolist(), "spacing": self.spacing, "periodic": self.periodic}


def grid_points(size: int, periodic: bool) -> np.ndarray:
    if periodic:
        return np.arange(size) / size
    return np.linspace(0.0, 1.0, size)


def _values(v: Union[SeqVector, GridFunction, np.ndarray]) -> np.ndarray:
    if isinstance(v, SeqVector):
        return v.entries
    if isinstance(v, GridFunction):
        return v.samples
    return np.asarray(v, dtype=float)


# --- norms -----------------------------------------------------------------

def _prefix(values: np.ndarray, n: int) -> np.ndarray:
    if n > values.shape[-1]:
        raise IndexBeyondTruncation(f"Prefix index {n} exceeds truncation {values.shape[-1]}")
    return np.abs(values[..., :n]).max(axis=-1)


def prefix_norm(x: Union[SeqVector, np.ndarray], n: int) -> Union[float, np.ndarray]:
    """``max |x_i|`` over ``1 <= i <= n``."""
    if n < 1:
        raise IndexBeyondTruncation("Prefix index must be at least 1")
    result = _prefix(_values(x), n)
    return float(result) if np.ndim(result) == 0 else result


def _weighted(values: np.ndarray, weights: Sequence[Tuple[int, float]]) -> np.ndarray:
    """Positions beyond the truncation carry zero entries."""
    inside = [(m, w) for m, w in weights if m <= values.shape[-1]]
    if not inside:
        return np.zeros(values.shape[:-1])
    positions = np.array([m - 1 for m, _ in inside])
    factors = np.array([w for _, w in inside])
    return (factors * np.abs(values[..., positions])).max(axis=-1)


def weighted_sup_norm(x: Union[SeqVector, np.ndarray], v: Any) -> Union[float, np.ndarray]:
    """``max v(m)|x_m|``; ``v`` is a map position -> weight or a weight vector (1-based)."""
    if isinstance(v, WeightedSup):
        weights = v.weights
    elif isinstance(v, dict):
        weights = WeightedSup(weights=v).weights
    else:
        weights = WeightedSup(weights={m: w for m, w in enumerate(v, start=1)}).weights
    result = _weighted(_values(x), weights)
    return float(result) if np.ndim(result) == 0 else result


def derivatives(values: np.ndarray, k: int, spacing: float, periodic: bool) -> List[np.ndarray]:
    """``[f, f', ..., f^(k)]`` by repeated second-order differences along the last axis."""
    size = values.shape[-1]
    if 2 * k + 1 > size or (k > 0 and not periodic and size < 3):
        raise StencilTooWide(f"{k} derivatives need at least {2 * k + 1} samples, got {size}")
    result = [values]
    current = values
    for _ in range(k):
        if periodic:
            current = (np.roll(current, -1, axis=-1) - np.roll(current, 1, axis=-1)) / (2.0 * spacing)
        else:
            current = np.gradient(current, spacing, axis=-1, edge_order=2)
        result.append(current)
    return result


def _ck(values: np.ndarray, k: int, spacing: float, periodic: bool) -> np.ndarray:
    sups = [np.abs(d).max(axis=-1) for d in derivatives(values, k, spacing, periodic)]
    return np.max(np.stack(sups), axis=0)


def ck_norm(f: GridFunction, k: int) -> float:
    """``max_{j<=k} sup |f^(j)|``."""
    if k < 0:
        raise StencilTooWide("Derivative order must be nonnegative")
    return float(_ck(f.samples, k, f.spacing, f.periodic))


def pointwise_mul(x: Any, y: Any) -> Any:
    """Entrywise product of two sequence vectors or two grid functions."""
    if isinstance(x, SeqVector) and isinstance(y, SeqVector):
        if x.truncation != y.truncation:
            raise ShapeMismatch(f"Truncations differ: {x.truncation} vs {y.truncation}")
        return SeqVector(x.entries * y.entries)
    if isinstance(x, GridFunction) and isinstance(y, GridFunction):
        if x.samples.size != y.samples.size or x.periodic != y.periodic:
            raise ShapeMismatch("Grid functions live on different grids")
        return GridFunction(x.samples * y.samples, x.periodic)
    raise ShapeMismatch(f"Cannot multiply {type(x).__name__} by {type(y).__name__}")


# --- groups ----------------------------------------------------------------

@dataclass(frozen=True)
class CyclicZ:
    """Z/mZ with counting measure; functions are arrays indexed by 0..m-1."""
    m: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ShapeMismatch("CyclicZ needs m >= 1")

    @property
    def size(self) -> int:
        return self.m


@dataclass(frozen=True)
class TruncatedZ:
    """The window ``{-radius, ..., radius}`` of Z with counting measure; index ``radius`` is 0."""
    radius: int

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ShapeMismatch("TruncatedZ needs radius >= 0")

    @property
    def size(self) -> int:
        return 2 * self.radius + 1


@dataclass(frozen=True)
class CircleGrid:
    """R/Z sampled at ``k/n`` with normalised measure (total mass 1)."""
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ShapeMismatch("CircleGrid needs n >= 1")

    @property
    def size(self) -> int:
        return self.n


GroupModel = Union[CyclicZ, TruncatedZ, CircleGrid]


def _group_values(G: GroupModel, f: Any) -> np.ndarray:
    values = _values(f)
    if values.shape[-1] != G.size:
        raise ShapeMismatch(f"{type(G).__name__} expects {G.size} samples, got {values.shape[-1]}")
    return values


def convolve(G: GroupModel, gamma: Any, eta: Any) -> np.ndarray:
    """``(gamma * eta)(x) = sum_y gamma(y) eta(x - y) w(y)`` with ``b`` scalar multiplication.

    ``w`` is 1 on the discrete models and ``1/n`` on the circle grid.
    """
    g = _group_values(G, gamma)
    h = _group_values(G, eta)

    if isinstance(G, CircleGrid):
        return fft.irfft(fft.rfft(g, axis=-1) * fft.rfft(h, axis=-1), n=G.n, axis=-1) / G.n

    if isinstance(G, CyclicZ):
        g, h = np.broadcast_arrays(g, h)
        out = np.zeros(g.shape)
        for y in range(G.m):
            out += g[..., y:y + 1] * np.roll(h, y, axis=-1)
        return out

    # TruncatedZ: full linear convolution over positions -2R..2R, then the window check
    R = G.radius
    g, h = np.broadcast_arrays(g, h)
    full = np.zeros(g.shape[:-1] + (4 * R + 1,))
    for y in range(G.size):
        full[..., y:y + G.size] += g[..., y:y + 1] * h
    outside = np.concatenate([full[..., :R], full[..., 3 * R + 1:]], axis=-1)
    if np.any(outside != 0.0):
        raise OverflowOutsideWindow(f"Convolution support leaves the window [-{R}, {R}]")
    return full[..., R:3 * R + 1]


def support_measure(G: GroupModel, f: Any) -> float:
    """Haar measure of the support of ``f``."""
    count = int(np.count_nonzero(_group_values(G, f)))
    return count / G.n if isinstance(G, CircleGrid) else float(count)


def _circle_values(G: GroupModel, f: Any) -> np.ndarray:
    if not isinstance(G, CircleGrid):
        raise NonAbelianUnsupported(
            f"Invariant C^k norms are only modelled on the circle grid, not on {type(G).__name__}")
    return _group_values(G, f)


def r_norm(G: GroupModel, f: Any, k: int) -> float:
    """Right-invariant C^k norm; on the circle every invariant field is a multiple of d/dx."""
    return float(_ck(_circle_values(G, f), k, 1.0 / G.n, True))


def l_norm(G: GroupModel, f: Any, k: int) -> float:
    return float(_ck(_circle_values(G, f), k, 1.0 / G.n, True))


def rl_norm(G: GroupModel, f: Any, k: int, l: int) -> float:
    """``max_{i<=k, j<=l} sup |f^(i+j)|``."""
    values = _circle_values(G, f)
    derived = derivatives(values, k + l, 1.0 / G.n, True)
    return float(max(np.abs(derived[i + j]).max() for i in range(k + 1) for j in range(l + 1)))


# --- bump family -----------------------------------------------------------

_X = sympy.Symbol("x", real=True)
BASE_BUMP = sympy.exp(-1 / (1 - 16 * _X ** 2))


def base_bump(x: np.ndarray) -> np.ndarray:
    """``g(x) = exp(-1/(1-(4x)^2))`` on ``|x| < 1/4``, zero elsewhere."""
    u = 4.0 * np.asarray(x, dtype=float)
    inside = np.abs(u) < 1.0
    result = np.zeros(u.shape)
    result[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return result


@lru_cache(maxsize=16)
def bump_derivative_sup(j: int, resolution: int = 200_001) -> float:
    """``sup |g^(j)|`` from the closed-form derivative, sampled densely inside the support."""
    derivative = sympy.lambdify(_X, sympy.diff(BASE_BUMP, _X, j), "numpy")
    x = np.linspace(-0.25, 0.25, resolution)[1:-1]
    return float(np.max(np.abs(derivative(x))))


def bump_bound(k: int) -> float:
    """``S = max_{j<=k} sup |g^(j)|``, a uniform bound for ``||g_t||_{C^k}`` over ``0 < t <= 1``."""
    return max(bump_derivative_sup(j) for j in range(k + 1))


def bump_intervals(t: float, divisor: int) -> int:
    """Number of grid intervals on [0,1] giving spacing at most ``t/divisor``."""
    return int(math.ceil(divisor / t - 1e-9))


def bump(t: float, k: int, intervals: Optional[int] = None, settings: Settings = DEFAULT_SETTINGS) -> GridFunction:
    """``g_t(x) = t^k g((x - 1/2)/t)`` sampled on [0,1]."""
    if not t > 0:
        raise NonPositiveT(f"Bump scale must be positive, got {t}")
    if intervals is None:
        intervals = bump_intervals(t, settings.bump_grid_divisor)
    x = np.linspace(0.0, 1.0, intervals + 1)
    return GridFunction(t ** k * base_bump((x - 0.5) / t), periodic=False)


# --- bilinear models -------------------------------------------------------

@dataclass(frozen=True)
class ModelSpace:
    dim: int
    kind: str = SEQUENCE

    @property
    def periodic(self) -> bool:
        return self.kind == CIRCLE

    @property
    def spacing(self) -> float:
        if self.kind == CIRCLE:
            return 1.0 / self.dim
        return 1.0 / (self.dim - 1) if self.dim > 1 else 1.0

    def split(self, parts: int) -> "ModelSpace":
        if self.dim % parts:
            raise ShapeMismatch(f"Cannot split dimension {self.dim} into {parts} equal blocks")
        return ModelSpace(self.dim // parts, self.kind)


@dataclass(frozen=True, eq=False)
class BilinearModel:
    """Evaluable bilinear map ``E1 x E2 -> F`` on batches of vectors."""
    name: str
    domains: Tuple[ModelSpace, ModelSpace]
    codomain: ModelSpace
    eval: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, x: Any, y: Any) -> np.ndarray:
        x, y = np.asarray(_values(x), dtype=float), np.asarray(_values(y), dtype=float)
        if x.shape[-1] != self.domains[0].dim or y.shape[-1] != self.domains[1].dim:
            raise ShapeMismatch(f"{self.name} expects dimensions {self.domains[0].dim} and {self.domains[1].dim}")
        return self.eval(x, y)

    def basis(self, side: int, k: int) -> np.ndarray:
        """Unit vector ``e_k`` (1-based) of domain ``side`` (0 or 1)."""
        vector = np.zeros(self.domains[side].dim)
        vector[k - 1] = 1.0
        return vector


def evaluate(expr: Any, batch: Any, space: ModelSpace) -> np.ndarray:
    """Evaluate a seminorm expression on a vector or a batch of vectors."""
    values = np.asarray(_values(batch), dtype=float)
    if values.shape[-1] != space.dim:
        raise ShapeMismatch(f"Vectors of length {values.shape[-1]} on a space of dimension {space.dim}")

    if isinstance(expr, Scale):
        return expr.c * evaluate(expr.inner, values, space)
    if isinstance(expr, MaxOf):
        return np.max(np.stack([evaluate(t, values, space) for t in expr.terms]), axis=0)
    if isinstance(expr, SumOf):
        return sum(w * evaluate(t, values, space) for w, t in zip(expr.weights, expr.terms))
    if isinstance(expr, PrefixSup):
        if space.kind != SEQUENCE:
            raise UnevaluableSeminorm(f"{describe(expr)} needs a sequence model, got {space.kind}")
        return _prefix(values, expr.n)
    if isinstance(expr, WeightedSup):
        if space.kind != SEQUENCE:
            raise UnevaluableSeminorm(f"{describe(expr)} needs a sequence model, got {space.kind}")
        return _weighted(values, expr.weights)
    if isinstance(expr, CkNorm):
        if space.kind == SEQUENCE:
            raise UnevaluableSeminorm(f"{describe(expr)} needs a grid model")
        return _ck(values, expr.k, space.spacing, space.periodic)
    if isinstance(expr, (BlockSum, BlockMax)):
        parts = len(expr.blocks)
        block_space = space.split(parts)
        pieces = np.split(values, parts, axis=-1)
        evaluated = [evaluate(b, piece, block_space) for b, piece in zip(expr.blocks, pieces)]
        if isinstance(expr, BlockMax):
            return np.max(np.stack(evaluated), axis=0)
        return sum(w * e for w, e in zip(expr.weights, evaluated))
    if isinstance(expr, Base):
        raise UnevaluableSeminorm(f"Abstract seminorm {expr.id!r} has no evaluator")
    raise UnevaluableSeminorm(f"No evaluator for {type(expr).__name__}")


def check_bilinear(model: BilinearModel, seed: int = 0, trials: int = 100, tolerance: float = 1e-12) -> bool:
    """Additivity and homogeneity spot checks in both arguments."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n1, n2 = model.domains[0].dim, model.domains[1].dim
    x, x2 = rng.standard_normal((trials, n1)), rng.standard_normal((trials, n1))
    y, y2 = rng.standard_normal((trials, n2)), rng.standard_normal((trials, n2))
    c = rng.standard_normal((trials, 1))

    base = model(x, y)
    checks = [
        (model(x + x2, y), base + model(x2, y)),
        (model(x, y + y2), base + model(x, y2)),
        (model(c * x, y), c * base),
        (model(x, c * y), c * base),
    ]
    for lhs, rhs in checks:
        scale = np.maximum(1.0, np.abs(rhs).max())
        if np.abs(lhs - rhs).max() > tolerance * scale * max(n1, n2):
            log_warning(f"{model.name} fails a bilinearity spot check", LogCategory.MODELS)
            return False
    log_debug(f"{model.name} passed {trials} bilinearity spot checks", LogCategory.MODELS)
    return True


def finsupp_pointwise(truncation: int) -> BilinearModel:
    """Pointwise multiplication on finitely supported sequences, truncated to ``N`` entries."""
    space = ModelSpace(truncation)
    return BilinearModel(f"finsupp_pointwise[{truncation}]", (space, space), space, lambda x, y: x * y)


def sequence_pointwise(truncation: int) -> BilinearModel:
    """Pointwise multiplication on R^N, truncated to ``N`` entries."""
    space = ModelSpace(truncation)
    return BilinearModel(f"sequence_pointwise[{truncation}]", (space, space), space, lambda x, y: x * y)


def smooth_pointwise(intervals: int) -> BilinearModel:
    space = ModelSpace(intervals + 1, INTERVAL)
    return BilinearModel(f"smooth_pointwise[{intervals}]", (space, space), space, lambda x, y: x * y)


def cyclic_convolution(m: int) -> BilinearModel:
    G = CyclicZ(m)
    space = ModelSpace(m)
    return BilinearModel(f"cyclic_convolution[{m}]", (space, space), space, lambda x, y: convolve(G, x, y))


def circle_convolution(n: int) -> BilinearModel:
    G = CircleGrid(n)
    space = ModelSpace(n, CIRCLE)
    return BilinearModel(f"circle_convolution[{n}]", (space, space), space, lambda x, y: convolve(G, x, y))


def zero_map(truncation: int) -> BilinearModel:
    space = ModelSpace(truncation)
    return BilinearModel(f"zero_map[{truncation}]", (space, space), space,
                         lambda x, y: np.zeros(np.broadcast_shapes(x.shape, y.shape)))


def block_pointwise(coefficients: Any, block_dim: int) -> BilinearModel:
    """``beta(x, y) = sum_ij c_ij x_i y_j`` on direct sums of ``block_dim``-dimensional blocks."""
    c = np.asarray(coefficients, dtype=float)
    if c.ndim != 2:
        raise ShapeMismatch("Block coefficients must form a matrix")
    n_i, n_j = c.shape

    def evaluate_blocks(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        xs = np.split(x, n_i, axis=-1)
        ys = np.split(y, n_j, axis=-1)
        shape = np.broadcast_shapes(x.shape[:-1], y.shape[:-1]) + (block_dim,)
        out = np.zeros(shape)
        for i in range(n_i):
            for j in range(n_j):
                out = out + c[i, j] * xs[i] * ys[j]
        return out

    return BilinearModel(
        f"block_pointwise[{n_i}x{n_j}, {block_dim}]",
        (ModelSpace(n_i * block_dim), ModelSpace(n_j * block_dim)),
        ModelSpace(block_dim),
        evaluate_blocks,
    )


MODEL_FACTORIES: Dict[str, Callable[..., BilinearModel]] = {
    "finsupp_pointwise": finsupp_pointwise,
    "sequence_pointwise": sequence_pointwise,
    "smooth_pointwise": smooth_pointwise,
    "cyclic_convolution": cyclic_convolution,
    "circle_convolution": circle_convolution,
    "zero_map": zero_map,
    "block_pointwise": block_pointwise,
}
