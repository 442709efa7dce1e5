"""Rule engine for neighbourhood properties of locally convex spaces.

``derive`` answers cnp, theta-np and continuous-norm queries on a
presentation and returns a :class:`Verdict` with a derivation tree. Every
node records its subject, the property it claims and whether it holds, so
``replay`` can re-check each node against the rule it cites.

The rule set is a list of sufficient conditions. When no rule chain applies
the verdict is ``Unknown``; the engine never guesses.

``psi_continuity`` and ``classify_convolution`` are the decision procedures
for scalar multiplication on test-function spaces and for convolution of
test functions on locally compact groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from cardinal import ALEPH_0, Cardinal, Order, compare, leq
from covering import LOCALLY_COMPACT_PARACOMPACT, BaseSpaceDesc, theta as covering_number
from errors import CompactBase, DegreeViolation, FiniteTheta, InputError
from log_utils import LogCategory, log_debug, log_warning
from seminorms import (CountableDirectLimit, DFFlagged, DirectSum, EllInftyTheta, FinSupp,
                       FrechetSeq, GDFFlagged, KOmegaFlagged, Normed, Product, Quotient,
                       RFinSuppUncountable, Subspace)

INF = math.inf

# R^(N) as the countable direct sum of copies of R
REAL_LINE = Normed(name="R")
REAL_SEQUENCES = DirectSum(index=ALEPH_0, block=REAL_LINE)


class Status(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, value: Union[str, bool, "Status", None]) -> "Status":
        if isinstance(value, Status):
            return value
        if value is True:
            return cls.HOLDS
        if value is False:
            return cls.FAILS
        lowered = str(value).strip().lower()
        if lowered in ("yes", "true", "holds"):
            return cls.HOLDS
        if lowered in ("no", "false", "fails"):
            return cls.FAILS
        if lowered in ("unknown", "none", "?"):
            return cls.UNKNOWN
        raise InputError(f"Not a three-valued answer: {value!r}")


def all_of(statuses: Sequence[Status]) -> Status:
    """Three-valued conjunction."""
    if any(s is Status.FAILS for s in statuses):
        return Status.FAILS
    if all(s is Status.HOLDS for s in statuses):
        return Status.HOLDS
    return Status.UNKNOWN


class QueryKind(str, Enum):
    CNP = "cnp"
    THETA_NP = "theta-np"
    CONTINUOUS_NORM = "continuous-norm"


@dataclass(frozen=True)
class PropertyQuery:
    kind: QueryKind
    theta: Optional[Cardinal] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", QueryKind(self.kind))
        if self.kind is QueryKind.THETA_NP:
            if self.theta is None:
                raise InputError("theta-np queries need a cardinal theta")
            if self.theta.is_finite:
                raise FiniteTheta(f"theta must be infinite, got {self.theta}")
        elif self.theta is not None:
            raise InputError(f"{self.kind.value} queries take no theta")

    @property
    def effective_theta(self) -> Optional[Cardinal]:
        if self.kind is QueryKind.CNP:
            return ALEPH_0
        return self.theta


def cnp() -> PropertyQuery:
    return PropertyQuery(QueryKind.CNP)


def theta_np(theta: Cardinal) -> PropertyQuery:
    return PropertyQuery(QueryKind.THETA_NP, theta)


def continuous_norm() -> PropertyQuery:
    return PropertyQuery(QueryKind.CONTINUOUS_NORM)


# --- derivations -----------------------------------------------------------

@dataclass(frozen=True)
class Derivation:
    conclusion: str
    rule: str
    premises: Tuple["Derivation", ...] = ()
    subject: Any = None
    prop: str = ""
    theta: Optional[Cardinal] = None
    status: Status = Status.HOLDS
    detail: Tuple[Tuple[str, Any], ...] = ()

    def info(self, key: str, default: Any = None) -> Any:
        return dict(self.detail).get(key, default)


@dataclass(frozen=True)
class Verdict:
    status: Status
    derivation: Optional[Derivation] = None
    note: str = ""

    def __post_init__(self) -> None:
        if self.status is not Status.UNKNOWN and self.derivation is None:
            raise ValueError("Decided verdicts need a derivation")


def space_label(space: Any) -> str:
    """Short human-readable name of a presentation."""
    if isinstance(space, (Normed, FrechetSeq)):
        return space.name
    if isinstance(space, DirectSum):
        return f"sum[{space.index}](" + ", ".join(space_label(s) for s in space.summands()) + ")"
    if isinstance(space, Product):
        return "prod(" + ", ".join(space_label(b) for b in space.blocks) + ")"
    if isinstance(space, Subspace):
        return f"sub({space_label(space.of)})"
    if isinstance(space, Quotient):
        return f"quot({space_label(space.of)})"
    if isinstance(space, CountableDirectLimit):
        return "lim(" + ", ".join(space_label(b) for b in space.blocks) + ")"
    if isinstance(space, FinSupp):
        return "R^(N)"
    if isinstance(space, KOmegaFlagged):
        return "K"
    if isinstance(space, DFFlagged):
        return "DF"
    if isinstance(space, GDFFlagged):
        return "gDF"
    if isinstance(space, EllInftyTheta):
        return f"l_inf[{space.theta}]"
    if isinstance(space, RFinSuppUncountable):
        return f"R^(M)[|M|={space.m_size}]"
    if isinstance(space, tuple):
        return " x ".join(space_label(s) for s in space)
    return "?"


def _np_name(theta: Optional[Cardinal]) -> str:
    return "cnp" if theta == ALEPH_0 else f"{theta}-np"


_PROP_TEXT: Dict[str, Tuple[str, str]] = {
    "np": ("has the {np}", "lacks the {np}"),
    "continuous-norm": ("admits a continuous norm", "admits no continuous norm"),
    "normable": ("is normable", "is not normable"),
    "metrizable": ("is metrizable", "is not metrizable"),
    "k-omega": ("is a k_omega space", "is not a k_omega space"),
    "df": ("is a DF-space", "is not a DF-space"),
    "gdf": ("is a gDF-space", "is not a gDF-space"),
    "psi-continuous": ("makes C^r_c(M) x E -> C^r_c(M,E) continuous",
                       "makes C^r_c(M) x E -> C^r_c(M,E) discontinuous"),
    "psi-hypocontinuous": ("makes C^r_c(M) x E -> C^r_c(M,E) hypocontinuous",
                           "makes C^r_c(M) x E -> C^r_c(M,E) not hypocontinuous"),
    "product-estimates": ("carries only continuous bilinear maps with product estimates",
                          "carries a continuous bilinear map without product estimates"),
    "group-finite": ("G is finite", "G is infinite"),
    "group-compact": ("G is compact", "G is not compact"),
    "group-countable": ("G is countable", "G is uncountable"),
    "group-sigma-compact": ("G is sigma-compact", "G is not sigma-compact"),
    "degree-condition": ("t = inf forces r = s = inf", "t = inf while r or s is finite"),
    "b-product-estimates": ("b admits product estimates", "b does not admit product estimates"),
    "beta-continuous": ("the convolution map is continuous", "the convolution map is not continuous"),
    "beta-product-estimates": ("the convolution map admits product estimates",
                               "the convolution map does not admit product estimates"),
}


def _conclusion(subject: Any, prop: str, theta: Optional[Cardinal], status: Status) -> str:
    positive, negative = _PROP_TEXT[prop]
    text = (positive if status is Status.HOLDS else negative).format(np=_np_name(theta))
    return text if subject is None else f"{space_label(subject)} {text}"


def _node(rule: str, subject: Any, prop: str, status: Status, premises: Sequence[Derivation] = (),
          theta: Optional[Cardinal] = None, **detail: Any) -> Derivation:
    return Derivation(
        conclusion=_conclusion(subject, prop, theta, status),
        rule=rule,
        premises=tuple(premises),
        subject=subject,
        prop=prop,
        theta=theta,
        status=status,
        detail=tuple(sorted(detail.items())),
    )


# --- rule table ------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    rule_id: str
    statement: str
    leaf: bool
    citation: str
    check: Callable[[Derivation], bool] = field(compare=False)


# Source of each rule: an input fact, an external result, or the closure
# property / decision table the rule instantiates.
CITATIONS: Dict[str, str] = {
    "normed-input": "input: normed presentation",
    "declared-normable": "input: declaredNormable flag",
    "frechet-metrizable": "input: countable seminorm sequence",
    "k-omega-flag": "input: k_omega flag",
    "df-flag": "input: DF / gDF flag",
    "ell-infinity-axiom": "external: bounded functions with sups over theta-small subsets",
    "countable-support-axiom": "external: seminorms of finitely supported functions on an uncountable set",
    "normable": "closure: normable spaces",
    "metrizable-non-normable": "characterisation: metrizable spaces",
    "monotonicity": "closure: monotonicity in theta",
    "monotonicity-contrapositive": "closure: monotonicity in theta",
    "countable-direct-sum": "closure: countable locally convex direct sums",
    "finite-sum": "closure: finite products",
    "finite-product": "closure: finite products",
    "complemented-block": "closure: vector subspaces",
    "subspace": "closure: vector subspaces",
    "quotient": "closure: quotients by closed subspaces",
    "k-omega": "closure: k_omega spaces",
    "finite-support-sequences": "closure: countable locally convex direct sums",
    "countable-direct-limit": "closure: countable locally convex direct limits",
    "df-space": "closure: DF and gDF spaces",
    "norm-from-normable": "closure: normable spaces",
    "block-norm": "closure: block sums of norms",
    "psi-continuity": "decision: multiplication on test-function spaces",
    "psi-continuity-metrizable": "decision: multiplication on test-function spaces, metrizable E",
    "psi-hypocontinuous": "decision: hypocontinuity of multiplication on test-function spaces",
    "input-flag": "input: group and bilinear-map flags",
    "degree-check": "computed: smoothness degrees",
    "finite-group": "decision table: convolution on finite groups",
    "infinite-discrete-group": "decision table: convolution on infinite discrete groups",
    "infinite-compact-group": "decision table: convolution on infinite compact groups",
    "non-compact-non-discrete-group": "decision table: convolution on groups neither compact nor discrete",
    "domain-cnp": "product estimates: both domains have the cnp",
    "target-cnp": "product estimates: target has the cnp",
}


RULES: Dict[str, Rule] = {}


def _rule(rule_id: str, statement: str, leaf: bool = False):
    def register(check: Callable[[Derivation], bool]) -> Callable[[Derivation], bool]:
        RULES[rule_id] = Rule(rule_id, statement, leaf, CITATIONS[rule_id], check)
        return check
    return register


def _claims(d: Derivation, subject: Any, prop: str, status: Status, theta: Optional[Cardinal] = None) -> bool:
    return d.subject == subject and d.prop == prop and d.status is status and d.theta == theta


def _holds_np(d: Derivation) -> bool:
    return d.prop == "np" and d.status is Status.HOLDS


# leaves

@_rule("normed-input", "A normed space is normable.", leaf=True)
def _check_normed_input(d: Derivation) -> bool:
    return isinstance(d.subject, Normed) and d.prop == "normable" and d.status is Status.HOLDS


@_rule("declared-normable", "Normability of a Frechet presentation is a declared input.", leaf=True)
def _check_declared_normable(d: Derivation) -> bool:
    if not isinstance(d.subject, FrechetSeq) or d.prop != "normable":
        return False
    return d.status is (Status.HOLDS if d.subject.declared_normable else Status.FAILS)


@_rule("frechet-metrizable", "A space presented by a countable seminorm sequence is metrizable.", leaf=True)
def _check_frechet_metrizable(d: Derivation) -> bool:
    return isinstance(d.subject, FrechetSeq) and d.prop == "metrizable" and d.status is Status.HOLDS


@_rule("k-omega-flag", "The k_omega property is a declared input.", leaf=True)
def _check_k_omega_flag(d: Derivation) -> bool:
    return isinstance(d.subject, KOmegaFlagged) and d.prop == "k-omega" and d.status is Status.HOLDS


@_rule("df-flag", "The DF / gDF property is a declared input.", leaf=True)
def _check_df_flag(d: Derivation) -> bool:
    expected = {DFFlagged: "df", GDFFlagged: "gdf"}.get(type(d.subject))
    return expected is not None and d.prop == expected and d.status is Status.HOLDS


@_rule("ell-infinity-axiom",
       "Bounded functions on a set of size > theta, topologised by sups over subsets of size <= theta, "
       "have the theta-np and lack the theta'-np for every theta' > theta (external result).",
       leaf=True)
def _check_ell_infinity(d: Derivation) -> bool:
    if not isinstance(d.subject, EllInftyTheta) or d.prop != "np" or d.theta is None:
        return False
    order = compare(d.theta, d.subject.theta)
    if d.status is Status.HOLDS:
        return order is Order.EQUAL
    return d.status is Status.FAILS and order is Order.GREATER


@_rule("countable-support-axiom",
       "Finitely supported functions on an uncountable set, topologised through countable restrictions, "
       "have only seminorms vanishing off a countable set, so none is a norm.",
       leaf=True)
def _check_countable_support(d: Derivation) -> bool:
    return (isinstance(d.subject, RFinSuppUncountable) and d.prop == "continuous-norm"
            and d.status is Status.FAILS)


# neighbourhood properties

@_rule("normable", "Every normable space has the theta-np for each infinite theta.")
def _check_normable(d: Derivation) -> bool:
    return (d.prop == "np" and d.status is Status.HOLDS and len(d.premises) == 1
            and _claims(d.premises[0], d.subject, "normable", Status.HOLDS))


@_rule("metrizable-non-normable", "A metrizable space has the cnp if and only if it is normable.")
def _check_metrizable_non_normable(d: Derivation) -> bool:
    if d.prop != "np" or d.theta != ALEPH_0 or d.status is not Status.FAILS or len(d.premises) != 2:
        return False
    normable, metrizable = d.premises
    return (_claims(normable, d.subject, "normable", Status.FAILS)
            and _claims(metrizable, d.subject, "metrizable", Status.HOLDS))


@_rule("monotonicity", "The theta'-np implies the theta-np whenever theta <= theta'.")
def _check_monotonicity(d: Derivation) -> bool:
    if d.prop != "np" or d.status is not Status.HOLDS or len(d.premises) != 1:
        return False
    (stronger,) = d.premises
    return (stronger.subject == d.subject and _holds_np(stronger)
            and stronger.theta is not None and leq(d.theta, stronger.theta))


@_rule("monotonicity-contrapositive", "Lacking the theta-np implies lacking the theta'-np for theta' >= theta.")
def _check_monotonicity_contra(d: Derivation) -> bool:
    if d.prop != "np" or d.status is not Status.FAILS or len(d.premises) != 1:
        return False
    (weaker,) = d.premises
    return (weaker.subject == d.subject and weaker.prop == "np" and weaker.status is Status.FAILS
            and weaker.theta is not None and leq(weaker.theta, d.theta))


def _per_summand(d: Derivation, summands: Sequence[Any], prop: str, theta: Optional[Cardinal]) -> bool:
    if len(d.premises) != len(summands):
        return False
    return all(_claims(p, s, prop, Status.HOLDS, theta) for p, s in zip(d.premises, summands))


@_rule("countable-direct-sum", "A countable locally convex direct sum of spaces with the cnp has the cnp.")
def _check_countable_sum(d: Derivation) -> bool:
    return (isinstance(d.subject, DirectSum) and d.subject.index == ALEPH_0
            and d.prop == "np" and d.theta == ALEPH_0 and d.status is Status.HOLDS
            and _per_summand(d, d.subject.summands(), "np", ALEPH_0))


@_rule("finite-sum", "A finite direct sum is a finite product; products of spaces with the theta-np have it.")
def _check_finite_sum(d: Derivation) -> bool:
    return (isinstance(d.subject, DirectSum) and d.subject.index.is_finite
            and d.prop == "np" and d.status is Status.HOLDS
            and _per_summand(d, d.subject.summands(), "np", d.theta))


@_rule("finite-product", "A finite product of spaces with the theta-np has the theta-np.")
def _check_finite_product(d: Derivation) -> bool:
    return (isinstance(d.subject, Product) and d.prop == "np" and d.status is Status.HOLDS
            and _per_summand(d, d.subject.blocks, "np", d.theta))


@_rule("complemented-block",
       "Each block of a direct sum or product is a vector subspace, which inherits the property; "
       "so a failing block makes the whole space fail.")
def _check_complemented_block(d: Derivation) -> bool:
    if d.status is not Status.FAILS or len(d.premises) != 1:
        return False
    if isinstance(d.subject, DirectSum):
        blocks = d.subject.summands()
    elif isinstance(d.subject, Product):
        blocks = d.subject.blocks
    else:
        return False
    (block,) = d.premises
    return (block.subject in blocks and block.prop == d.prop and block.theta == d.theta
            and block.status is Status.FAILS and d.prop in ("np", "continuous-norm"))


@_rule("subspace", "Every vector subspace of a space with the property has it.")
def _check_subspace(d: Derivation) -> bool:
    return (isinstance(d.subject, Subspace) and d.status is Status.HOLDS and len(d.premises) == 1
            and d.prop in ("np", "continuous-norm")
            and _claims(d.premises[0], d.subject.of, d.prop, Status.HOLDS, d.theta))


@_rule("quotient", "Quotients by closed subspaces inherit the theta-np.")
def _check_quotient(d: Derivation) -> bool:
    return (isinstance(d.subject, Quotient) and d.prop == "np" and d.status is Status.HOLDS
            and len(d.premises) == 1
            and _claims(d.premises[0], d.subject.of, "np", Status.HOLDS, d.theta))


@_rule("k-omega", "A k_omega locally convex space has the cnp.")
def _check_k_omega(d: Derivation) -> bool:
    return (isinstance(d.subject, KOmegaFlagged) and d.prop == "np" and d.theta == ALEPH_0
            and d.status is Status.HOLDS and len(d.premises) == 1
            and _claims(d.premises[0], d.subject, "k-omega", Status.HOLDS))


@_rule("finite-support-sequences", "Finitely supported sequences form the countable direct sum of copies of R.")
def _check_finite_support(d: Derivation) -> bool:
    return (isinstance(d.subject, FinSupp) and d.status is Status.HOLDS and len(d.premises) == 1
            and _claims(d.premises[0], REAL_SEQUENCES, d.prop, Status.HOLDS, d.theta))


@_rule("countable-direct-limit", "A countable locally convex direct limit of spaces with the cnp has the cnp.")
def _check_direct_limit(d: Derivation) -> bool:
    return (isinstance(d.subject, CountableDirectLimit) and d.prop == "np" and d.theta == ALEPH_0
            and d.status is Status.HOLDS and _per_summand(d, d.subject.blocks, "np", ALEPH_0))


@_rule("df-space", "Every DF-space and every gDF-space has the cnp.")
def _check_df_space(d: Derivation) -> bool:
    if not isinstance(d.subject, (DFFlagged, GDFFlagged)):
        return False
    flag = "df" if isinstance(d.subject, DFFlagged) else "gdf"
    return (d.prop == "np" and d.theta == ALEPH_0 and d.status is Status.HOLDS
            and len(d.premises) == 1 and _claims(d.premises[0], d.subject, flag, Status.HOLDS))


# continuous norms

@_rule("norm-from-normable", "A normable space admits a continuous norm.")
def _check_norm_from_normable(d: Derivation) -> bool:
    return (d.prop == "continuous-norm" and d.status is Status.HOLDS and len(d.premises) == 1
            and _claims(d.premises[0], d.subject, "normable", Status.HOLDS))


@_rule("block-norm", "The block sum of continuous norms is a continuous norm on a direct sum or product.")
def _check_block_norm(d: Derivation) -> bool:
    if d.prop != "continuous-norm" or d.status is not Status.HOLDS:
        return False
    if isinstance(d.subject, DirectSum):
        return _per_summand(d, d.subject.summands(), "continuous-norm", None)
    if isinstance(d.subject, Product):
        return _per_summand(d, d.subject.blocks, "continuous-norm", None)
    return False


# function spaces and convolution

@_rule("psi-continuity",
       "Multiplication C^r_c(M) x E -> C^r_c(M,E) is continuous if and only if E has the theta(M)-np.")
def _check_psi(d: Derivation) -> bool:
    return (d.prop == "psi-continuous" and d.status is not Status.UNKNOWN and len(d.premises) == 1
            and _claims(d.premises[0], d.subject, "np", d.status, d.theta))


@_rule("psi-continuity-metrizable",
       "For metrizable E, multiplication C^r_c(M) x E -> C^r_c(M,E) is continuous if and only if E is normable.")
def _check_psi_metrizable(d: Derivation) -> bool:
    return (d.prop == "psi-continuous" and d.status is not Status.UNKNOWN and len(d.premises) == 2
            and _claims(d.premises[0], d.subject, "normable", d.status)
            and _claims(d.premises[1], d.subject, "metrizable", Status.HOLDS))


@_rule("psi-hypocontinuous",
       "Multiplication C^r_c(M) x E -> C^r_c(M,E) is always hypocontinuous for non-compact M.", leaf=True)
def _check_psi_hypo(d: Derivation) -> bool:
    return d.prop == "psi-hypocontinuous" and d.status is Status.HOLDS


@_rule("input-flag", "A property of the input taken as given.", leaf=True)
def _check_input_flag(d: Derivation) -> bool:
    return d.prop in ("group-finite", "group-compact", "group-countable", "group-sigma-compact",
                      "b-product-estimates") and d.status is not Status.UNKNOWN


@_rule("degree-check", "Computed from the degrees: if t = inf then r = s = inf.", leaf=True)
def _check_degree(d: Derivation) -> bool:
    r, s, t = d.info("r"), d.info("s"), d.info("t")
    if d.prop != "degree-condition" or None in (r, s, t):
        return False
    satisfied = t != INF or (r == INF and s == INF)
    return d.status is (Status.HOLDS if satisfied else Status.FAILS)


def _conjunction_rule(rule_id: str, statement: str, props: Dict[str, Tuple[str, ...]]):
    def check(d: Derivation) -> bool:
        required = props.get(d.prop)
        if required is None or d.status is Status.UNKNOWN:
            return False
        premise_props = [p.prop for p in d.premises]
        if d.status is Status.HOLDS:
            return (sorted(premise_props) == sorted(required)
                    and all(p.status is Status.HOLDS for p in d.premises))
        return (bool(d.premises) and all(prop in required for prop in premise_props)
                and all(p.status is Status.FAILS for p in d.premises))
    _rule(rule_id, statement)(check)


_conjunction_rule(
    "finite-group",
    "On a finite group convolution is always continuous; it admits product estimates iff b does.",
    {"beta-continuous": ("group-finite",), "beta-product-estimates": ("b-product-estimates",)},
)
_conjunction_rule(
    "infinite-discrete-group",
    "On an infinite discrete group convolution admits product estimates iff it is continuous, "
    "iff G is countable and b admits product estimates.",
    {"beta-continuous": ("group-countable", "b-product-estimates"),
     "beta-product-estimates": ("group-countable", "b-product-estimates")},
)
_conjunction_rule(
    "infinite-compact-group",
    "On an infinite compact group convolution is always continuous; it admits product estimates iff "
    "t = inf forces r = s = inf and b admits product estimates.",
    {"beta-continuous": ("group-compact",),
     "beta-product-estimates": ("degree-condition", "b-product-estimates")},
)
_conjunction_rule(
    "non-compact-non-discrete-group",
    "On a group neither compact nor discrete convolution admits product estimates iff it is continuous, "
    "iff G is sigma-compact, t = inf forces r = s = inf, and b admits product estimates.",
    {"beta-continuous": ("group-sigma-compact", "degree-condition", "b-product-estimates"),
     "beta-product-estimates": ("group-sigma-compact", "degree-condition", "b-product-estimates")},
)


@_rule("domain-cnp", "A continuous bilinear map whose two domains have the cnp admits product estimates.")
def _check_domain_cnp(d: Derivation) -> bool:
    if d.prop != "product-estimates" or d.status is not Status.HOLDS or len(d.premises) != 2:
        return False
    e1, e2, _ = d.subject
    return (_claims(d.premises[0], e1, "np", Status.HOLDS, ALEPH_0)
            and _claims(d.premises[1], e2, "np", Status.HOLDS, ALEPH_0))


@_rule("target-cnp", "A continuous bilinear map whose target has the cnp admits product estimates.")
def _check_target_cnp(d: Derivation) -> bool:
    if d.prop != "product-estimates" or d.status is not Status.HOLDS or len(d.premises) != 1:
        return False
    _, _, target = d.subject
    return _claims(d.premises[0], target, "np", Status.HOLDS, ALEPH_0)


# --- derivation of neighbourhood properties --------------------------------

def _unknown(note: str) -> Verdict:
    return Verdict(Status.UNKNOWN, None, note)


def _decided(derivation: Derivation) -> Verdict:
    return Verdict(derivation.status, derivation)


def _normable_leaf(space: Any) -> Optional[Derivation]:
    if isinstance(space, Normed):
        return _node("normed-input", space, "normable", Status.HOLDS)
    if isinstance(space, FrechetSeq):
        status = Status.HOLDS if space.declared_normable else Status.FAILS
        return _node("declared-normable", space, "normable", status)
    return None


def _blockwise_np(space: Any, blocks: Sequence[Any], theta: Cardinal, holds_rule: Optional[str]) -> Verdict:
    verdicts = [_derive_np(block, theta) for block in blocks]
    for verdict in verdicts:
        if verdict.status is Status.FAILS:
            return _decided(_node("complemented-block", space, "np", Status.FAILS, [verdict.derivation], theta))
    if holds_rule is not None and all(v.status is Status.HOLDS for v in verdicts):
        return _decided(_node(holds_rule, space, "np", Status.HOLDS, [v.derivation for v in verdicts], theta))
    return _unknown(f"no rule decides the {_np_name(theta)} of {space_label(space)}")


def _derive_np(space: Any, theta: Cardinal) -> Verdict:
    """Fixed rule order per presentation node; first applicable chain wins."""
    countable = theta == ALEPH_0

    if isinstance(space, (Normed, FrechetSeq)):
        normable = _normable_leaf(space)
        if normable.status is Status.HOLDS:
            return _decided(_node("normable", space, "np", Status.HOLDS, [normable], theta))
        metrizable = _node("frechet-metrizable", space, "metrizable", Status.HOLDS)
        fails_cnp = _node("metrizable-non-normable", space, "np", Status.FAILS, [normable, metrizable], ALEPH_0)
        if countable:
            return _decided(fails_cnp)
        return _decided(_node("monotonicity-contrapositive", space, "np", Status.FAILS, [fails_cnp], theta))

    if isinstance(space, DirectSum):
        if space.index.is_finite:
            return _blockwise_np(space, space.summands(), theta, "finite-sum")
        if space.index == ALEPH_0:
            if countable:
                return _blockwise_np(space, space.summands(), theta, "countable-direct-sum")
            return _blockwise_np(space, space.summands(), theta, None)
        return _blockwise_np(space, space.summands(), theta, None)

    if isinstance(space, Product):
        return _blockwise_np(space, space.blocks, theta, "finite-product")

    if isinstance(space, (Subspace, Quotient)):
        inner = _derive_np(space.of, theta)
        if inner.status is Status.HOLDS:
            rule = "subspace" if isinstance(space, Subspace) else "quotient"
            return _decided(_node(rule, space, "np", Status.HOLDS, [inner.derivation], theta))
        return _unknown(f"{space_label(space.of)} does not have the {_np_name(theta)} by the rules; "
                        f"{space_label(space)} is undecided")

    if isinstance(space, CountableDirectLimit):
        if not countable:
            return _unknown("countable direct limits are only known to have the cnp")
        steps = [_derive_np(step, ALEPH_0) for step in space.blocks]
        if all(v.status is Status.HOLDS for v in steps):
            return _decided(_node("countable-direct-limit", space, "np", Status.HOLDS,
                                  [v.derivation for v in steps], theta))
        return _unknown("some step of the direct limit is not known to have the cnp")

    if isinstance(space, FinSupp):
        if not countable:
            return _unknown("finitely supported sequences are only known to have the cnp")
        inner = _derive_np(REAL_SEQUENCES, ALEPH_0)
        return _decided(_node("finite-support-sequences", space, "np", inner.status, [inner.derivation], theta))

    if isinstance(space, KOmegaFlagged):
        if not countable:
            return _unknown("k_omega spaces are only known to have the cnp")
        flag = _node("k-omega-flag", space, "k-omega", Status.HOLDS)
        return _decided(_node("k-omega", space, "np", Status.HOLDS, [flag], theta))

    if isinstance(space, (DFFlagged, GDFFlagged)):
        if not countable:
            return _unknown("DF and gDF spaces are only known to have the cnp")
        prop = "df" if isinstance(space, DFFlagged) else "gdf"
        flag = _node("df-flag", space, prop, Status.HOLDS)
        return _decided(_node("df-space", space, "np", Status.HOLDS, [flag], theta))

    if isinstance(space, EllInftyTheta):
        order = compare(theta, space.theta)
        if order is Order.EQUAL:
            return _decided(_node("ell-infinity-axiom", space, "np", Status.HOLDS, (), theta))
        if order is Order.LESS:
            axiom = _node("ell-infinity-axiom", space, "np", Status.HOLDS, (), space.theta)
            return _decided(_node("monotonicity", space, "np", Status.HOLDS, [axiom], theta))
        if order is Order.GREATER:
            return _decided(_node("ell-infinity-axiom", space, "np", Status.FAILS, (), theta))
        return _unknown(f"the order of {theta} and {space.theta} is undecided")

    if isinstance(space, RFinSuppUncountable):
        return _unknown("no neighbourhood rule covers finitely supported functions on an uncountable set")

    raise InputError(f"Unsupported presentation node: {type(space).__name__}")


def _derive_norm(space: Any) -> Verdict:
    if isinstance(space, (Normed, FrechetSeq)):
        normable = _normable_leaf(space)
        if normable.status is Status.HOLDS:
            return _decided(_node("norm-from-normable", space, "continuous-norm", Status.HOLDS, [normable]))
        return _unknown("a non-normable Frechet space may or may not admit a continuous norm")

    if isinstance(space, (DirectSum, Product)):
        blocks = space.summands() if isinstance(space, DirectSum) else space.blocks
        verdicts = [_derive_norm(block) for block in blocks]
        for verdict in verdicts:
            if verdict.status is Status.FAILS:
                return _decided(_node("complemented-block", space, "continuous-norm", Status.FAILS,
                                      [verdict.derivation]))
        if all(v.status is Status.HOLDS for v in verdicts):
            return _decided(_node("block-norm", space, "continuous-norm", Status.HOLDS,
                                  [v.derivation for v in verdicts]))
        return _unknown(f"some block of {space_label(space)} is undecided")

    if isinstance(space, Subspace):
        inner = _derive_norm(space.of)
        if inner.status is Status.HOLDS:
            return _decided(_node("subspace", space, "continuous-norm", Status.HOLDS, [inner.derivation]))
        return _unknown("a subspace of a space without a known continuous norm is undecided")

    if isinstance(space, FinSupp):
        inner = _derive_norm(REAL_SEQUENCES)
        return _decided(_node("finite-support-sequences", space, "continuous-norm", inner.status,
                              [inner.derivation]))

    if isinstance(space, RFinSuppUncountable):
        return _decided(_node("countable-support-axiom", space, "continuous-norm", Status.FAILS))

    return _unknown(f"no continuous-norm rule covers {space_label(space)}")


def derive(space: Any, query: PropertyQuery) -> Verdict:
    """Verdict on ``query`` for ``space`` with a replayable derivation."""
    if query.kind is QueryKind.CONTINUOUS_NORM:
        verdict = _derive_norm(space)
    else:
        verdict = _derive_np(space, query.effective_theta)
    log_debug(f"derive {space_label(space)} {query.kind.value}: {verdict.status.value}", LogCategory.ENGINE)
    return verdict


def product_estimates_verdict(e1: Any, e2: Any, f: Any) -> Verdict:
    """Whether every continuous bilinear map ``e1 x e2 -> f`` admits product estimates.

    Holds when both domains or the target have the cnp; Unknown otherwise.
    """
    subject = (e1, e2, f)
    left, right = _derive_np(e1, ALEPH_0), _derive_np(e2, ALEPH_0)
    if left.status is Status.HOLDS and right.status is Status.HOLDS:
        return _decided(_node("domain-cnp", subject, "product-estimates", Status.HOLDS,
                              [left.derivation, right.derivation]))
    target = _derive_np(f, ALEPH_0)
    if target.status is Status.HOLDS:
        return _decided(_node("target-cnp", subject, "product-estimates", Status.HOLDS, [target.derivation]))
    return _unknown("neither both domains nor the target are known to have the cnp")


# --- replay and rendering --------------------------------------------------

def replay(derivation: Derivation) -> bool:
    """Re-check every node: its rule must accept its premises and conclusion."""
    rule = RULES.get(derivation.rule)
    if rule is None:
        log_warning(f"Unknown rule id in derivation: {derivation.rule}", LogCategory.ENGINE)
        return False
    if rule.leaf and derivation.premises:
        log_warning(f"Leaf rule {rule.rule_id} carries premises", LogCategory.ENGINE)
        return False
    expected = _conclusion(derivation.subject, derivation.prop, derivation.theta, derivation.status)
    if derivation.conclusion != expected or not rule.check(derivation):
        log_warning(f"Derivation node does not replay: [{rule.rule_id}] {derivation.conclusion}",
                    LogCategory.ENGINE)
        return False
    return all(replay(premise) for premise in derivation.premises)


def leaves(derivation: Derivation) -> List[Derivation]:
    if not derivation.premises:
        return [derivation]
    return [leaf for premise in derivation.premises for leaf in leaves(premise)]


def render_text(derivation: Derivation, indent: int = 0) -> str:
    lines = [f"{'  ' * indent}[{derivation.rule}] {derivation.conclusion}"]
    for premise in derivation.premises:
        lines.append(render_text(premise, indent + 1))
    return "\n".join(lines)


def to_json(derivation: Derivation) -> Dict[str, Any]:
    document: Dict[str, Any] = {
        "rule": derivation.rule,
        "conclusion": derivation.conclusion,
        "status": derivation.status.value,
        "statement": RULES[derivation.rule].statement,
        "citation": RULES[derivation.rule].citation,
        "premises": [to_json(p) for p in derivation.premises],
    }
    if derivation.theta is not None:
        document["theta"] = derivation.theta.to_json()
    return document


def verdict_to_json(verdict: Verdict) -> Dict[str, Any]:
    return {
        "status": verdict.status.value,
        "derivation": to_json(verdict.derivation) if verdict.derivation is not None else None,
        "note": verdict.note,
    }


# --- scalar multiplication on test-function spaces -------------------------

@dataclass(frozen=True)
class PsiVerdict:
    continuous: Verdict
    hypocontinuous: Verdict
    theta: Cardinal


def parse_degree(value: Any) -> float:
    """Smoothness degree in N_0 or ``inf``."""
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("inf", "infinity", "∞"):
            return INF
        try:
            value = int(lowered)
        except ValueError as exc:
            raise InputError(f"Not a smoothness degree: {value!r}") from exc
    if value == INF:
        return INF
    if isinstance(value, bool) or not float(value).is_integer() or value < 0:
        raise InputError(f"Smoothness degree must be a nonnegative integer or inf, got {value!r}")
    return int(value)


def psi_continuity(M: BaseSpaceDesc, E: Any, r: Any = 0) -> PsiVerdict:
    """Continuity of ``C^r_c(M) x E -> C^r_c(M,E)``, ``(gamma, v) -> gamma*v``."""
    if M.compact:
        log_warning("psi_continuity called with a compact base space", LogCategory.ENGINE)
        raise CompactBase("Base space must be non-compact")
    r = parse_degree(r)
    if r != 0 and M.kind == LOCALLY_COMPACT_PARACOMPACT:
        raise InputError("Positive smoothness degree needs a manifold base space")

    theta = covering_number(M)
    hypo = _decided(_node("psi-hypocontinuous", E, "psi-hypocontinuous", Status.HOLDS, (), theta))

    if isinstance(E, FrechetSeq):
        normable = _normable_leaf(E)
        metrizable = _node("frechet-metrizable", E, "metrizable", Status.HOLDS)
        continuous = _decided(_node("psi-continuity-metrizable", E, "psi-continuous", normable.status,
                                    [normable, metrizable], theta))
    else:
        inner = _derive_np(E, theta)
        if inner.status is Status.UNKNOWN:
            continuous = _unknown(f"{_np_name(theta)} of {space_label(E)} is undecided: {inner.note}")
        else:
            continuous = _decided(_node("psi-continuity", E, "psi-continuous", inner.status,
                                        [inner.derivation], theta))

    log_debug(f"psi continuity for {space_label(E)} over theta(M)={theta}: {continuous.status.value}",
              LogCategory.ENGINE)
    return PsiVerdict(continuous=continuous, hypocontinuous=hypo, theta=theta)


# --- convolution of test functions -----------------------------------------

GROUP_KINDS = ("finite", "infiniteDiscrete", "infiniteCompact", "nonCompactNonDiscrete")


@dataclass(frozen=True)
class GroupClass:
    kind: str
    countable: Optional[bool] = None
    sigma_compact: Optional[bool] = None

    def __post_init__(self) -> None:
        if self.kind not in GROUP_KINDS:
            raise InputError(f"Unknown group class {self.kind!r}; expected one of {', '.join(GROUP_KINDS)}")
        if self.kind == "infiniteDiscrete" and self.countable is None:
            raise InputError("infiniteDiscrete groups need the countable flag")
        if self.kind == "nonCompactNonDiscrete" and self.sigma_compact is None:
            raise InputError("nonCompactNonDiscrete groups need the sigmaCompact flag")


@dataclass(frozen=True)
class ConvolutionVerdict:
    continuous: Verdict
    product_estimates: Verdict


def _flag(prop: str, holds: bool) -> Derivation:
    return _node("input-flag", None, prop, Status.HOLDS if holds else Status.FAILS)


def _conjunction(rule: str, prop: str, facts: Sequence[Tuple[Optional[Derivation], Status]]) -> Verdict:
    status = all_of([s for _, s in facts])
    if status is Status.HOLDS:
        return _decided(_node(rule, None, prop, status, [d for d, _ in facts]))
    if status is Status.FAILS:
        failing = [d for d, s in facts if s is Status.FAILS]
        return _decided(_node(rule, None, prop, status, failing))
    return _unknown("b has undecided product estimates")


def classify_convolution(group: GroupClass, r: Any, s: Any, t: Any, b_product_estimates: Any) -> ConvolutionVerdict:
    """Continuity and product estimates of ``C^r_c(G,E1) x C^s_c(G,E2) -> C^t_c(G,F)``."""
    r, s, t = parse_degree(r), parse_degree(s), parse_degree(t)
    if t > r + s:
        raise DegreeViolation(f"t={t} exceeds r+s={r + s}")
    b_pe = Status.parse(b_product_estimates)

    b_fact = (_node("input-flag", None, "b-product-estimates", b_pe) if b_pe is not Status.UNKNOWN else None, b_pe)
    degree_ok = t != INF or (r == INF and s == INF)
    degree = _node("degree-check", None, "degree-condition", Status.HOLDS if degree_ok else Status.FAILS,
                   r=r, s=s, t=t)
    degree_fact = (degree, degree.status)

    if group.kind == "finite":
        finite = _flag("group-finite", True)
        continuous = _conjunction("finite-group", "beta-continuous", [(finite, Status.HOLDS)])
        estimates = _conjunction("finite-group", "beta-product-estimates", [b_fact])
    elif group.kind == "infiniteDiscrete":
        countable = _flag("group-countable", group.countable)
        facts = [(countable, countable.status), b_fact]
        continuous = _conjunction("infinite-discrete-group", "beta-continuous", facts)
        estimates = _conjunction("infinite-discrete-group", "beta-product-estimates", facts)
    elif group.kind == "infiniteCompact":
        compact = _flag("group-compact", True)
        continuous = _conjunction("infinite-compact-group", "beta-continuous", [(compact, Status.HOLDS)])
        estimates = _conjunction("infinite-compact-group", "beta-product-estimates", [degree_fact, b_fact])
    else:
        sigma = _flag("group-sigma-compact", group.sigma_compact)
        facts = [(sigma, sigma.status), degree_fact, b_fact]
        continuous = _conjunction("non-compact-non-discrete-group", "beta-continuous", facts)
        estimates = _conjunction("non-compact-non-discrete-group", "beta-product-estimates", facts)

    log_debug(f"convolution on {group.kind} group (r={r}, s={s}, t={t}, b={b_pe.value}): "
              f"continuous={continuous.status.value}, product estimates={estimates.status.value}",
              LogCategory.ENGINE)
    return ConvolutionVerdict(continuous=continuous, product_estimates=estimates)
