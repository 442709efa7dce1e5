"""Presentations, seminorm expressions and the domination pre-order."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from cardinal import ALEPH_0, CONTINUUM, Aleph, Finite
from errors import InputError, MismatchedSpace, NonPositiveEntry, ShapeMismatch, UncountableIndex
from models import ModelSpace, evaluate
from seminorms import (AttachedSeminorm, Base, BlockMax, BlockSum, DirectSum, FinSupp, FrechetSeq, MaxOf,
                       Normed, PrefixSup, Scale, SumOf, WeightedSup, describe, dominates, dump,
                       parse_seminorm, parse_space, scaled, upper_bound_direct_sum)


class TestDominates:
    def test_prefix_monotone(self):
        cert = dominates(PrefixSup(n=2), PrefixSup(n=5))
        assert cert.C == 1.0
        assert cert.rule == "prefix-monotone"

    def test_scaled_prefix(self):
        cert = dominates(Scale(c=3.0, inner=PrefixSup(n=2)), PrefixSup(n=5))
        assert cert.C == pytest.approx(3.0)

    def test_larger_prefix_is_not_dominated(self):
        assert dominates(PrefixSup(n=5), PrefixSup(n=2)) is None

    def test_reflexive_wins_ties(self):
        p = PrefixSup(n=4)
        cert = dominates(p, p)
        assert (cert.C, cert.rule) == (1.0, "reflexive")

    def test_weighted_support(self):
        p = WeightedSup(weights={1: 2.0, 3: 6.0})
        q = WeightedSup(weights={1: 1.0, 2: 1.0, 3: 3.0})
        cert = dominates(p, q)
        assert cert.C == pytest.approx(2.0)
        assert dominates(q, p) is None

    def test_prefix_against_weights(self):
        assert dominates(PrefixSup(n=2), WeightedSup(weights={1: 0.5, 2: 4.0})).C == pytest.approx(2.0)
        assert dominates(WeightedSup(weights={2: 5.0}), PrefixSup(n=3)).C == pytest.approx(5.0)

    def test_max_and_sum(self):
        p = MaxOf(terms=(PrefixSup(n=1), Scale(c=2.0, inner=PrefixSup(n=3))))
        assert dominates(p, PrefixSup(n=3)).C == pytest.approx(2.0)
        q = SumOf(weights=(1.0, 4.0), terms=(PrefixSup(n=1), PrefixSup(n=3)))
        assert dominates(PrefixSup(n=2), q).C == pytest.approx(0.25)

    def test_block_forms(self):
        blocks = (PrefixSup(n=1), PrefixSup(n=2))
        block_max = BlockMax(blocks=blocks)
        block_sum = BlockSum(weights=(1.0, 2.0), blocks=blocks)
        assert dominates(block_max, block_sum).C == pytest.approx(1.0)
        assert dominates(block_sum, block_max).C == pytest.approx(3.0)

    def test_abstract_seminorms_only_reflexive(self):
        assert dominates(Base(id="a"), Base(id="a")).C == 1.0
        assert dominates(Base(id="a"), Base(id="b")) is None

    def test_mismatched_presentations(self):
        p = AttachedSeminorm(PrefixSup(n=1), FinSupp())
        q = AttachedSeminorm(PrefixSup(n=2), Normed())
        with pytest.raises(MismatchedSpace):
            dominates(p, q)
        assert dominates(p, AttachedSeminorm(PrefixSup(n=2), FinSupp())).C == 1.0


scaled_prefix = st.tuples(st.floats(min_value=0.01, max_value=100.0), st.integers(min_value=1, max_value=8))


@given(st.lists(scaled_prefix, min_size=3, max_size=3))
def test_domination_transitive_with_multiplied_constants(triple):
    (a, n), (b, m), (c, l) = sorted(triple, key=lambda pair: pair[1])
    p, q, r = (Scale(c=a, inner=PrefixSup(n=n)), Scale(c=b, inner=PrefixSup(n=m)),
               Scale(c=c, inner=PrefixSup(n=l)))
    pq, qr, pr = dominates(p, q), dominates(q, r), dominates(p, r)
    assert pq is not None and qr is not None and pr is not None
    assert pr.C <= pq.C * qr.C * (1 + 1e-12)


@settings(max_examples=50)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=1, max_value=6),
       st.floats(min_value=0.1, max_value=10.0), st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_certificates_hold_numerically(n, m, c, seed):
    p = Scale(c=c, inner=PrefixSup(n=min(n, m)))
    q = MaxOf(terms=(PrefixSup(n=max(n, m)), WeightedSup(weights={1: 2.0})))
    cert = dominates(p, q)
    assert cert is not None
    space = ModelSpace(8)
    X = np.random.Generator(np.random.PCG64(seed)).standard_normal((1000, 8))
    assert np.all(evaluate(p, X, space) <= cert.C * evaluate(q, X, space) * (1 + 1e-12))


class TestUpperBound:
    def test_max_form(self):
        result = upper_bound_direct_sum([Base(id="a"), Base(id="b")], Finite(2))
        assert result == BlockMax(blocks=(Base(id="a"), Base(id="b")))

    def test_single_block(self):
        p = PrefixSup(n=3)
        assert upper_bound_direct_sum([p], Finite(1)).blocks == (p,)

    def test_sum_form_with_weights(self):
        family = [PrefixSup(n=1), PrefixSup(n=2), PrefixSup(n=3)]
        result = upper_bound_direct_sum(family, Finite(3), form="sum", weights=(1, 2, 3))
        assert result == BlockSum(weights=(1.0, 2.0, 3.0), blocks=tuple(family))

    def test_uncountable_max_rejected(self):
        with pytest.raises(UncountableIndex):
            upper_bound_direct_sum([Base(id="a")], Aleph(1))
        assert upper_bound_direct_sum([Base(id="a")], Aleph(1), form="sum").weights == (1.0,)

    def test_bad_inputs(self):
        with pytest.raises(ShapeMismatch):
            upper_bound_direct_sum([], ALEPH_0)
        with pytest.raises(ShapeMismatch):
            upper_bound_direct_sum([Base(id="a")], Finite(2))
        with pytest.raises(NonPositiveEntry):
            upper_bound_direct_sum([Base(id="a")], Finite(1), form="sum", weights=[0.0])
        with pytest.raises(InputError):
            upper_bound_direct_sum([Base(id="a")], Finite(1), form="median")


class TestDocuments:
    def test_space_round_trip(self):
        document = {"node": "direct_sum", "index": {"aleph": 0},
                    "block": {"node": "frechet", "declaredNormable": False}}
        space = parse_space(document)
        assert space == DirectSum(index=ALEPH_0, block=FrechetSeq(declared_normable=False))
        assert dump(space) == {"node": "direct_sum", "index": {"aleph": 0},
                               "block": {"node": "frechet", "declaredNormable": False, "name": "A"}}

    def test_weighted_sup_document(self):
        expr = parse_seminorm({"node": "weighted_sup", "weights": {"3": 2.0, "1": 0.5, "7": 0.0}})
        assert expr.weights == ((1, 0.5), (3, 2.0))
        assert dump(expr) == {"node": "weighted_sup", "weights": {"1": 0.5, "3": 2.0}}

    @pytest.mark.parametrize("document", [
        {"node": "direct_sum", "index": "continuum", "block": {"node": "normed"}},
        {"node": "direct_sum", "index": {"finite": 2}, "blocks": [{"node": "normed"}]},
        {"node": "direct_sum", "index": {"finite": 1}},
        {"node": "product", "blocks": []},
        {"node": "ell_infinity", "theta": {"finite": 3}},
        {"node": "finsupp_uncountable", "mSize": {"aleph": 0}},
        {"node": "frechet"},
        {"node": "banach"},
    ])
    def test_invalid_spaces(self, document):
        with pytest.raises(ValidationError):
            parse_space(document)

    @pytest.mark.parametrize("document", [
        {"node": "scale", "c": 0.0, "inner": {"node": "prefix_sup", "n": 1}},
        {"node": "prefix_sup", "n": 0},
        {"node": "sum", "weights": [1.0], "terms": [{"node": "ck", "k": 1}, {"node": "ck", "k": 2}]},
        {"node": "block_sum", "weights": [-1.0], "blocks": [{"node": "ck", "k": 0}]},
        {"node": "weighted_sup", "weights": {"0": 1.0}},
    ])
    def test_invalid_seminorms(self, document):
        with pytest.raises(ValidationError):
            parse_seminorm(document)

    def test_presentations_are_hashable_values(self):
        assert hash(parse_space({"node": "finsupp"})) == hash(FinSupp())
        assert parse_space({"node": "ell_infinity", "theta": "continuum"}).theta == CONTINUUM


def test_scaled_merges_factors():
    p = PrefixSup(n=2)
    assert scaled(1.0, p) is p
    assert scaled(2.0, scaled(3.0, p)) == Scale(c=6.0, inner=p)
    assert scaled(0.5, Scale(c=2.0, inner=p)) == p
    with pytest.raises(NonPositiveEntry):
        scaled(0.0, p)


def test_describe():
    assert describe(Scale(c=2.0, inner=PrefixSup(n=3))) == "2*||.||_3"
    assert describe(WeightedSup(weights={2: 1.5})) == "p_v{2:1.5}"
    assert describe(BlockMax(blocks=(Base(id="a"), Base(id="b")))) == "max_i(a, b)"
