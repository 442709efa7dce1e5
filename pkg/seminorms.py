"""Space presentations, seminorm expressions and the domination pre-order.

Both trees are frozen pydantic models tagged by a ``node`` field, so they
parse from and dump to the JSON documents described in
``schema/presentation-schema.json`` and can be used as cache keys.

``dominates`` is sound but deliberately incomplete: it returns a certificate
``p <= C*q`` when one of its rewrite rules decides the pair and ``None``
otherwise. ``None`` never means that no constant exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Annotated, Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import (BaseModel, ConfigDict, Field, TypeAdapter, field_serializer,
                      field_validator, model_validator)

from cardinal import CardinalField, Finite
from errors import InputError, MismatchedSpace, NonPositiveEntry, ShapeMismatch, UncountableIndex
from log_utils import LogCategory, log_debug


class _Node(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)


# --- space presentations ---------------------------------------------------

class Normed(_Node):
    node: Literal["normed"] = "normed"
    name: str = "E"


class FrechetSeq(_Node):
    """Fréchet space given by a seminorm sequence; normability is declared, never inferred."""
    node: Literal["frechet"] = "frechet"
    declared_normable: bool = Field(alias="declaredNormable")
    name: str = "A"


class DirectSum(_Node):
    """Locally convex direct sum over ``index`` summands.

    ``block`` repeats one summand; ``blocks`` lists the summands (exactly
    ``n`` of them for a finite index, the summand types for an infinite one).
    """
    node: Literal["direct_sum"] = "direct_sum"
    index: CardinalField
    block: Optional["SpacePresentation"] = None
    blocks: Optional[Tuple["SpacePresentation", ...]] = None

    @model_validator(mode="after")
    def _check_blocks(self) -> "DirectSum":
        if (self.block is None) == (self.blocks is None):
            raise ValueError("direct_sum needs exactly one of 'block' or 'blocks'")
        if self.index.kind == "continuum":
            raise ValueError("direct_sum index must be finite or an aleph")
        if self.blocks is not None:
            if not self.blocks:
                raise ValueError("direct_sum 'blocks' must be non-empty")
            if self.index.is_finite and len(self.blocks) != self.index.index:
                raise ValueError("finite direct_sum must list exactly index-many blocks")
        return self

    def summands(self) -> Tuple["SpacePresentation", ...]:
        return (self.block,) if self.block is not None else tuple(self.blocks)


class Product(_Node):
    node: Literal["product"] = "product"
    blocks: Tuple["SpacePresentation", ...] = Field(min_length=1)


class Subspace(_Node):
    node: Literal["subspace"] = "subspace"
    of: "SpacePresentation"


class Quotient(_Node):
    node: Literal["quotient"] = "quotient"
    of: "SpacePresentation"


class CountableDirectLimit(_Node):
    node: Literal["direct_limit"] = "direct_limit"
    blocks: Tuple["SpacePresentation", ...] = Field(min_length=1)


class FinSupp(_Node):
    """Finitely supported real sequences with the finest locally convex topology."""
    node: Literal["finsupp"] = "finsupp"


class KOmegaFlagged(_Node):
    node: Literal["k_omega"] = "k_omega"


class DFFlagged(_Node):
    node: Literal["df"] = "df"


class GDFFlagged(_Node):
    node: Literal["gdf"] = "gdf"


class EllInftyTheta(_Node):
    """Bounded functions on a large set, topologised by sups over subsets of size at most ``theta``."""
    node: Literal["ell_infinity"] = "ell_infinity"
    theta: CardinalField

    @field_validator("theta")
    @classmethod
    def _infinite(cls, value):
        if value.is_finite:
            raise ValueError("ell_infinity theta must be infinite")
        return value


class RFinSuppUncountable(_Node):
    """Finitely supported functions on a set of size ``m_size``, initial topology of countable restrictions."""
    node: Literal["finsupp_uncountable"] = "finsupp_uncountable"
    m_size: CardinalField = Field(alias="mSize")

    @field_validator("m_size")
    @classmethod
    def _uncountable(cls, value):
        if value.is_countable:
            raise ValueError("finsupp_uncountable needs an uncountable index set")
        return value


SpacePresentation = Annotated[
    Union[Normed, FrechetSeq, DirectSum, Product, Subspace, Quotient, CountableDirectLimit,
          FinSupp, KOmegaFlagged, DFFlagged, GDFFlagged, EllInftyTheta, RFinSuppUncountable],
    Field(discriminator="node"),
]

for _model in (DirectSum, Product, Subspace, Quotient, CountableDirectLimit):
    _model.model_rebuild()


# --- seminorm expressions --------------------------------------------------

class Base(_Node):
    node: Literal["base"] = "base"
    id: str


class Scale(_Node):
    node: Literal["scale"] = "scale"
    c: float = Field(gt=0.0)
    inner: "SeminormExpr"


class MaxOf(_Node):
    node: Literal["max"] = "max"
    terms: Tuple["SeminormExpr", ...] = Field(min_length=1)


class SumOf(_Node):
    node: Literal["sum"] = "sum"
    weights: Tuple[float, ...]
    terms: Tuple["SeminormExpr", ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_weights(self) -> "SumOf":
        if len(self.weights) != len(self.terms):
            raise ValueError("sum needs one weight per term")
        if any(w <= 0 for w in self.weights):
            raise ValueError("sum weights must be strictly positive")
        return self


class PrefixSup(_Node):
    """``max |x_i|`` over ``1 <= i <= n``."""
    node: Literal["prefix_sup"] = "prefix_sup"
    n: int = Field(ge=1)


class CkNorm(_Node):
    """``max_{j<=k} sup |f^(j)|``."""
    node: Literal["ck"] = "ck"
    k: int = Field(ge=0)


class WeightedSup(_Node):
    """``max v(m)|x_m|`` over the support of ``v`` (1-based positions)."""
    node: Literal["weighted_sup"] = "weighted_sup"
    weights: Tuple[Tuple[int, float], ...] = ()

    @field_validator("weights", mode="before")
    @classmethod
    def _normalise(cls, value: Any):
        items = value.items() if isinstance(value, dict) else value
        pairs = []
        for position, weight in items:
            position, weight = int(position), float(weight)
            if position < 1:
                raise ValueError("weighted_sup positions are 1-based")
            if weight < 0 or not math.isfinite(weight):
                raise ValueError("weighted_sup weights must be finite and nonnegative")
            if weight > 0:
                pairs.append((position, weight))
        pairs.sort()
        if len({p for p, _ in pairs}) != len(pairs):
            raise ValueError("weighted_sup positions must be distinct")
        return tuple(pairs)

    @field_serializer("weights")
    def _dump_weights(self, weights):
        return {str(position): weight for position, weight in weights}

    def support(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.weights)

    def as_dict(self) -> Dict[int, float]:
        return dict(self.weights)


class BlockSum(_Node):
    """``sum_i w_i q_i(x_i)`` on a direct sum."""
    node: Literal["block_sum"] = "block_sum"
    weights: Tuple[float, ...]
    blocks: Tuple["SeminormExpr", ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_weights(self) -> "BlockSum":
        if len(self.weights) != len(self.blocks):
            raise ValueError("block_sum needs one weight per block")
        if any(w <= 0 for w in self.weights):
            raise ValueError("block_sum weights must be strictly positive")
        return self


class BlockMax(_Node):
    """``max_i q_i(x_i)`` on a countable direct sum."""
    node: Literal["block_max"] = "block_max"
    blocks: Tuple["SeminormExpr", ...] = Field(min_length=1)


SeminormExpr = Annotated[
    Union[Base, Scale, MaxOf, SumOf, PrefixSup, CkNorm, WeightedSup, BlockSum, BlockMax],
    Field(discriminator="node"),
]

for _model in (Scale, MaxOf, SumOf, BlockSum, BlockMax):
    _model.model_rebuild()

SPACE_ADAPTER: TypeAdapter = TypeAdapter(SpacePresentation)
SEMINORM_ADAPTER: TypeAdapter = TypeAdapter(SeminormExpr)


def parse_space(document: Any):
    return SPACE_ADAPTER.validate_python(document)


def parse_seminorm(document: Any):
    return SEMINORM_ADAPTER.validate_python(document)


def dump(node: _Node) -> Dict[str, Any]:
    """JSON-ready dict of a presentation or seminorm expression."""
    return node.model_dump(mode="json", by_alias=True, exclude_none=True)


def scaled(c: float, expr) -> Any:
    """``c*expr`` with unit factors dropped and nested scales merged."""
    if c <= 0:
        raise NonPositiveEntry(f"Scale factor must be positive, got {c}")
    if c == 1.0:
        return expr
    if isinstance(expr, Scale):
        product = c * expr.c
        return expr.inner if product == 1.0 else Scale(c=product, inner=expr.inner)
    return Scale(c=c, inner=expr)


def describe(expr) -> str:
    """Compact one-line rendering used in provenance and reports."""
    if isinstance(expr, Base):
        return expr.id
    if isinstance(expr, Scale):
        return f"{expr.c:g}*{describe(expr.inner)}"
    if isinstance(expr, MaxOf):
        return "max(" + ", ".join(describe(t) for t in expr.terms) + ")"
    if isinstance(expr, SumOf):
        return " + ".join(f"{w:g}*{describe(t)}" for w, t in zip(expr.weights, expr.terms))
    if isinstance(expr, PrefixSup):
        return f"||.||_{expr.n}"
    if isinstance(expr, CkNorm):
        return f"||.||_C^{expr.k}"
    if isinstance(expr, WeightedSup):
        inner = ", ".join(f"{p}:{w:g}" for p, w in expr.weights)
        return f"p_v{{{inner}}}"
    if isinstance(expr, BlockSum):
        return "sum_i(" + ", ".join(f"{w:g}*{describe(b)}" for w, b in zip(expr.weights, expr.blocks)) + ")"
    if isinstance(expr, BlockMax):
        return "max_i(" + ", ".join(describe(b) for b in expr.blocks) + ")"
    return repr(expr)


# --- domination ------------------------------------------------------------

@dataclass(frozen=True)
class DominationCert:
    """Asserts ``p <= C*q`` pointwise."""
    p: Any
    q: Any
    C: float
    rule: str

    def to_json(self) -> Dict[str, Any]:
        return {"p": dump(self.p), "q": dump(self.q), "C": self.C, "rule": self.rule}


@dataclass(frozen=True)
class AttachedSeminorm:
    """A seminorm expression together with the presentation it lives on."""
    expr: Any
    space: Any


def _blockwise(ps: Sequence, qs: Sequence) -> Optional[List[float]]:
    if len(ps) != len(qs):
        return None
    constants = []
    for p, q in zip(ps, qs):
        found = _least_constant(p, q)
        if found is None:
            return None
        constants.append(found[0])
    return constants


def _candidates(p, q):
    """Yield ``(rule, constant)`` pairs in the fixed rule order."""
    if p == q:
        yield "reflexive", 1.0
    if isinstance(p, Scale):
        inner = _least_constant(p.inner, q)
        if inner is not None:
            yield "scale-left", p.c * inner[0]
    if isinstance(q, Scale):
        inner = _least_constant(p, q.inner)
        if inner is not None:
            yield "scale-right", inner[0] / q.c
    if isinstance(p, PrefixSup) and isinstance(q, PrefixSup) and p.n <= q.n:
        yield "prefix-monotone", 1.0
    if isinstance(p, CkNorm) and isinstance(q, CkNorm) and p.k <= q.k:
        yield "ck-monotone", 1.0
    if isinstance(p, WeightedSup) and not p.weights:
        yield "zero-seminorm", 1.0
    if isinstance(p, WeightedSup) and isinstance(q, WeightedSup):
        q_weights = q.as_dict()
        if all(m in q_weights for m in p.support()):
            yield "weighted-support", max(w / q_weights[m] for m, w in p.weights) if p.weights else 1.0
    if isinstance(p, PrefixSup) and isinstance(q, WeightedSup):
        q_weights = q.as_dict()
        if all(m in q_weights for m in range(1, p.n + 1)):
            yield "prefix-weighted", max(1.0 / q_weights[m] for m in range(1, p.n + 1))
    if isinstance(p, WeightedSup) and isinstance(q, PrefixSup) and p.weights:
        if max(p.support()) <= q.n:
            yield "weighted-prefix", max(w for _, w in p.weights)
    if isinstance(p, MaxOf):
        members = [_least_constant(t, q) for t in p.terms]
        if all(m is not None for m in members):
            yield "max-left", max(m[0] for m in members)
    if isinstance(p, SumOf):
        members = [_least_constant(t, q) for t in p.terms]
        if all(m is not None for m in members):
            yield "sum-left", sum(w * m[0] for w, m in zip(p.weights, members))
    if isinstance(q, MaxOf):
        members = [_least_constant(p, t) for t in q.terms]
        decided = [m[0] for m in members if m is not None]
        if decided:
            yield "max-right", min(decided)
    if isinstance(q, SumOf):
        decided = []
        for w, t in zip(q.weights, q.terms):
            found = _least_constant(p, t)
            if found is not None:
                decided.append(found[0] / w)
        if decided:
            yield "sum-right", min(decided)
    if isinstance(p, BlockMax) and isinstance(q, BlockMax):
        constants = _blockwise(p.blocks, q.blocks)
        if constants is not None:
            yield "block-max-max", max(constants)
    if isinstance(p, BlockSum) and isinstance(q, BlockSum):
        constants = _blockwise(p.blocks, q.blocks)
        if constants is not None:
            yield "block-sum-sum", max(w * c / v for w, c, v in zip(p.weights, constants, q.weights))
    if isinstance(p, BlockMax) and isinstance(q, BlockSum):
        constants = _blockwise(p.blocks, q.blocks)
        if constants is not None:
            yield "block-max-sum", max(c / v for c, v in zip(constants, q.weights))
    if isinstance(p, BlockSum) and isinstance(q, BlockMax):
        constants = _blockwise(p.blocks, q.blocks)
        if constants is not None:
            yield "block-sum-max", sum(w * c for w, c in zip(p.weights, constants))


@lru_cache(maxsize=4096)
def _least_constant(p, q) -> Optional[Tuple[float, str]]:
    best: Optional[Tuple[float, str]] = None
    for rule, constant in _candidates(p, q):
        # strict improvement only, so ties keep the earlier rule
        if best is None or constant < best[0]:
            best = (constant, rule)
    return best


def dominates(p, q) -> Optional[DominationCert]:
    """Certificate ``p <= C*q`` with the least constant the rules find, or ``None``."""
    if isinstance(p, AttachedSeminorm) or isinstance(q, AttachedSeminorm):
        if isinstance(p, AttachedSeminorm) and isinstance(q, AttachedSeminorm) and p.space != q.space:
            raise MismatchedSpace("Seminorms are attached to different presentations")
        p = p.expr if isinstance(p, AttachedSeminorm) else p
        q = q.expr if isinstance(q, AttachedSeminorm) else q

    found = _least_constant(p, q)
    if found is None:
        log_debug(f"No domination certificate for {describe(p)} <= C*{describe(q)}", LogCategory.ENGINE)
        return None
    constant, rule = found
    log_debug(f"{describe(p)} <= {constant:g}*{describe(q)} via {rule}", LogCategory.ENGINE)
    return DominationCert(p=p, q=q, C=constant, rule=rule)


def upper_bound_direct_sum(family: Sequence, index, form: str = "max",
                           weights: Optional[Sequence[float]] = None):
    """Single seminorm on a direct sum dominating each block seminorm with constant 1.

    ``form="max"`` gives ``max_i q_i(x_i)`` (countable index only);
    ``form="sum"`` gives ``sum_i w_i q_i(x_i)`` for any index.
    """
    family = tuple(family)
    if not family:
        raise ShapeMismatch("Direct-sum upper bound needs at least one block seminorm")
    if index.is_finite and index.index != len(family):
        raise ShapeMismatch(f"Finite index {index} but {len(family)} block seminorms")

    if form == "max":
        if not index.is_countable:
            raise UncountableIndex(f"Max-form block seminorm needs a countable index, got {index}")
        return BlockMax(blocks=family)
    if form == "sum":
        weights = tuple(float(w) for w in (weights or [1.0] * len(family)))
        if len(weights) != len(family):
            raise ShapeMismatch("One weight per block seminorm required")
        if any(w <= 0 for w in weights):
            raise NonPositiveEntry("Block weights must be strictly positive")
        return BlockSum(weights=weights, blocks=family)
    raise InputError(f"Unknown direct-sum form: {form!r}")


__all__ = [
    "Normed", "FrechetSeq", "DirectSum", "Product", "Subspace", "Quotient",
    "CountableDirectLimit", "FinSupp", "KOmegaFlagged", "DFFlagged", "GDFFlagged",
    "EllInftyTheta", "RFinSuppUncountable", "SpacePresentation",
    "Base", "Scale", "MaxOf", "SumOf", "PrefixSup", "CkNorm", "WeightedSup",
    "BlockSum", "BlockMax", "SeminormExpr",
    "DominationCert", "AttachedSeminorm", "dominates", "upper_bound_direct_sum",
    "parse_space", "parse_seminorm", "dump", "scaled", "describe", "Finite",
]
