"""Constant schedules and product-estimate witness builders."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import InputError, MismatchedSpace, MissingCert, NonPositiveEntry, ShapeMismatch
from falsify import Pass, SampleConfig, check
from models import block_pointwise, finsupp_pointwise
from seminorms import Base, BlockSum, PrefixSup, Scale, WeightedSup, dump
from witness import (LinearMapCert, base_certificates, bisgaard_split, cnp_product_estimates,
                     countable_support_witness, direct_sum_combine, exponent_schedule, pull_back,
                     schedule_constants, target_cnp_product_estimates, transport)

P, Q = Base(id="p"), Base(id="q")


def positive_matrix(seed, rows, cols):
    rng = np.random.Generator(np.random.PCG64(seed))
    return np.exp(rng.uniform(-3.0, 3.0, size=(rows, cols)))


class TestScheduleConstants:
    def test_unit_entries(self):
        result = schedule_constants(np.ones((2, 2)), np.ones((2, 2)))
        assert result.a == (1.0, 1.0)
        assert result.b == (1.0, 1.0)

    def test_small_example(self):
        result = schedule_constants([[2, 3], [5, 7]], np.ones((2, 2)))
        assert result.a == (2.0, 7.0)
        assert result.b == (1.0, 3.0)

    def test_large_random_table(self):
        r, s = positive_matrix(1, 200, 200), positive_matrix(2, 200, 200)
        result = schedule_constants(r, s)
        a, b = np.asarray(result.a), np.asarray(result.b)
        assert np.all(a >= 1.0) and np.all(b >= 1.0)
        assert np.all(np.outer(a, b) >= r * s)

    def test_rejects_bad_input(self):
        with pytest.raises(ShapeMismatch):
            schedule_constants(np.ones((2, 2)), np.ones((2, 3)))
        with pytest.raises(ShapeMismatch):
            schedule_constants([1.0, 2.0], [1.0, 2.0])
        with pytest.raises(NonPositiveEntry):
            schedule_constants([[1.0, 0.0]], [[1.0, 1.0]])
        with pytest.raises(NonPositiveEntry):
            schedule_constants([[1.0, np.inf]], [[1.0, 1.0]])


class TestBisgaardSplit:
    def test_unit_entries(self):
        result = bisgaard_split(np.ones((3, 3)))
        assert result.d == (1.0, 1.0, 1.0)
        assert result.c == (1.0, 1.0, 1.0)

    def test_small_example(self):
        result = bisgaard_split([[4, 2], [8, 3]])
        assert result.d == (4.0, 8.0)
        assert result.c == pytest.approx((0.25, 0.125))

    def test_large_random_table(self):
        C = positive_matrix(3, 200, 200)
        d = np.asarray(bisgaard_split(C).d)
        assert np.all(np.outer(d, d) >= C)

    def test_needs_square_positive_input(self):
        with pytest.raises(ShapeMismatch):
            bisgaard_split(np.ones((2, 3)))
        with pytest.raises(NonPositiveEntry):
            bisgaard_split([[1.0, -1.0], [1.0, 1.0]])


class TestExponentSchedule:
    def test_zero_matrix(self):
        result = exponent_schedule(np.zeros((3, 3)))
        assert result.r == (0, 0, 0)
        assert result.s == (0, 0, 0)

    def test_small_example(self):
        result = exponent_schedule([[1, 5], [2, 0]])
        assert result.r == (1, 2)
        assert result.s == (1, 5)
        assert all(isinstance(v, int) for v in result.r + result.s)

    def test_large_random_table(self):
        t = np.random.Generator(np.random.PCG64(4)).integers(0, 51, size=(100, 100))
        result = exponent_schedule(t)
        assert np.all(np.add.outer(np.asarray(result.r), np.asarray(result.s)) >= t)

    def test_rectangular_input(self):
        result = exponent_schedule([[3, 1, 4], [1, 5, 9]])
        assert result.r == (3, 5)
        assert result.s == (3, 5, 9)

    @pytest.mark.parametrize("t", [[[-1, 0], [0, 0]], [[0.5, 0], [0, 0]]])
    def test_rejects_non_integer_exponents(self, t):
        with pytest.raises(ShapeMismatch):
            exponent_schedule(t)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_triangular_schedules_are_streaming_consistent(n, seed):
    r, s = positive_matrix(seed, n + 1, n + 1), positive_matrix(seed + 1, n + 1, n + 1)
    full, head = schedule_constants(r, s), schedule_constants(r[:n, :n], s[:n, :n])
    assert full.a[:n] == head.a and full.b[:n] == head.b

    assert bisgaard_split(r).d[:n] == bisgaard_split(r[:n, :n]).d

    t = np.floor(r * 3)
    assert exponent_schedule(t).r[:n] == exponent_schedule(t[:n, :n]).r
    assert exponent_schedule(t).s[:n] == exponent_schedule(t[:n, :n]).s


class TestDomainSideWitness:
    def test_unit_constants(self):
        witness = cnp_product_estimates(base_certificates(np.ones((2, 2)), P, "P"),
                                        base_certificates(np.ones((2, 2)), Q, "Q"))
        assert witness.p_family == (P, P)
        assert witness.q_family == (Q, Q)

    def test_scheduled_constants(self):
        witness = cnp_product_estimates(base_certificates([[2, 3], [5, 7]], P, "P"),
                                        base_certificates(np.ones((2, 2)), Q, "Q"))
        assert witness.p(1) == Scale(c=2.0, inner=P)
        assert witness.p(2) == Scale(c=7.0, inner=P)
        assert witness.q(1) == Q
        assert witness.q(2) == Scale(c=3.0, inner=Q)
        assert witness.constants == {"a": [2.0, 7.0], "b": [1.0, 3.0]}
        assert any("continuity of beta" in step for step in witness.provenance)

    def test_missing_certificate(self):
        certs = base_certificates(np.ones((2, 2)), P, "P")
        certs[1][0] = None
        with pytest.raises(MissingCert):
            cnp_product_estimates(certs, base_certificates(np.ones((2, 2)), Q, "Q"))

    def test_certificates_must_share_a_bound(self):
        certs = base_certificates(np.ones((1, 2)), P, "P")
        certs[0][1] = base_certificates([[1.0]], Base(id="other"), "P")[0][0]
        with pytest.raises(InputError):
            cnp_product_estimates(certs, base_certificates(np.ones((1, 2)), Q, "Q"))

    def test_shapes_must_agree(self):
        with pytest.raises(ShapeMismatch):
            cnp_product_estimates(base_certificates(np.ones((2, 2)), P, "P"),
                                  base_certificates(np.ones((2, 3)), Q, "Q"))

    def test_json_form(self):
        witness = cnp_product_estimates(base_certificates([[2.0]], P, "P"),
                                        base_certificates([[1.0]], Q, "Q"))
        document = witness.to_json()
        assert document["p_family"] == [{"node": "scale", "c": 2.0, "inner": {"node": "base", "id": "p"}}]
        assert document["targets"] is None
        assert "p_1 = 2*p" in witness.render_text()


class TestTargetSideWitness:
    def test_unit_constants(self):
        p, q = PrefixSup(n=2), PrefixSup(n=3)
        witness = target_cnp_product_estimates(PrefixSup(n=4), np.ones((2, 2)), p, q)
        assert witness.p_family == (p, p)
        assert witness.q_family == (q, q)

    def test_split_constants(self):
        witness = target_cnp_product_estimates(P, [[4, 2], [8, 3]], P, Q)
        assert witness.p_family == (Scale(c=4.0, inner=P), Scale(c=8.0, inner=P))
        assert witness.q_family == (Scale(c=4.0, inner=Q), Scale(c=8.0, inner=Q))
        assert witness.constants["d"] == [4.0, 8.0]
        assert any("C_ij" in step and "p_i(x) q_j(y)" in step for step in witness.provenance)

    def test_rejects_nonpositive_constants(self):
        with pytest.raises(NonPositiveEntry):
            target_cnp_product_estimates(P, [[0.0]], P, Q)

    def test_numeric_sweep_passes(self):
        C = np.array([[4.0, 2.0], [8.0, 3.0]])
        prefix = PrefixSup(n=4)
        targets = [[Scale(c=C[i, j], inner=prefix) for j in range(2)] for i in range(2)]
        witness = target_cnp_product_estimates(prefix, C, prefix, prefix, targets=targets)
        outcome = check(finsupp_pointwise(4), None, witness, SampleConfig(seed=7, count=2000))
        assert isinstance(outcome, Pass)


class TestDirectSum:
    def test_unit_constants(self):
        P_blocks = [[PrefixSup(n=1)], [PrefixSup(n=2)]]
        witness = direct_sum_combine(np.ones((2, 2, 1, 1)), P_blocks, P_blocks)
        assert witness.p_family == (BlockSum(weights=(1.0, 1.0), blocks=(PrefixSup(n=1), PrefixSup(n=2))),)
        assert witness.constants["u"] == [1.0, 1.0]

    def test_exponential_constants(self):
        i, j = np.meshgrid([1, 2], [1, 2], indexing="ij")
        C = np.broadcast_to((2.0 ** (i + j))[:, :, None, None], (2, 2, 2, 2))
        blocks = [[Base(id=f"P{a}{b}") for b in (1, 2)] for a in (1, 2)]
        witness = direct_sum_combine(C, blocks, blocks)
        assert witness.constants["D"] == [[4.0, 8.0], [8.0, 16.0]]
        u, v = np.asarray(witness.constants["u"]), np.asarray(witness.constants["v"])
        assert u.tolist() == [4.0, 16.0]
        assert np.all(np.outer(u, v)[:, :, None, None] >= C)
        assert len(witness.p_family) == 2
        assert witness.p_family[1].blocks == (blocks[0][1], blocks[1][1])

    def test_bad_shapes(self):
        blocks = [[P], [P]]
        with pytest.raises(ShapeMismatch):
            direct_sum_combine(np.ones((2, 2)), blocks, blocks)
        with pytest.raises(ShapeMismatch):
            direct_sum_combine(np.ones((2, 2, 1, 1)), [[P]], blocks)
        with pytest.raises(NonPositiveEntry):
            direct_sum_combine(-np.ones((2, 2, 1, 1)), blocks, blocks)

    def test_block_multiplication_sweep(self):
        coefficients = np.array([[1.0, 3.0], [0.5, 6.0]])
        sup = PrefixSup(n=2)
        witness = direct_sum_combine(coefficients[:, :, None, None], [[sup], [sup]], [[sup], [sup]],
                                     targets=[[sup]])
        outcome = check(block_pointwise(coefficients, 2), None, witness, SampleConfig(seed=11, count=3000))
        assert isinstance(outcome, Pass)


class TestTransport:
    def witness(self, targets=None):
        return cnp_product_estimates(base_certificates([[2, 3], [5, 7]], P, "P"),
                                     base_certificates(np.ones((2, 2)), Q, "Q"), targets=targets)

    def test_identity_maps(self):
        witness = self.witness()
        moved = transport(witness)
        assert moved.p_family == witness.p_family
        assert moved.q_family == witness.q_family

    def test_target_scaling_folds_into_p(self):
        witness = self.witness()
        Lambda = [[LinearMapCert(Base(id=f"y{i}{j}"), 2.0) for j in (1, 2)] for i in (1, 2)]
        moved = transport(witness, Lambda=Lambda)
        assert moved.p_family == (Scale(c=4.0, inner=P), Scale(c=14.0, inner=P))
        assert moved.q_family == witness.q_family
        assert moved.targets[1][0] == Base(id="y21")

    def test_domain_maps_replace_families(self):
        witness = self.witness()
        lambda1 = [LinearMapCert(PrefixSup(n=1), 3.0), LinearMapCert(PrefixSup(n=2), 1.0)]
        moved = transport(witness, lambda1=lambda1)
        assert moved.p_family == (Scale(c=3.0, inner=PrefixSup(n=1)), PrefixSup(n=2))

    def test_missing_certificates(self):
        witness = self.witness()
        with pytest.raises(MissingCert):
            transport(witness, lambda2=[LinearMapCert(Q, 1.0)])
        with pytest.raises(MissingCert):
            transport(witness, Lambda=[[LinearMapCert(Q, 1.0), None], [LinearMapCert(Q, 1.0)] * 2])

    def test_certificate_constant_must_be_positive(self):
        with pytest.raises(NonPositiveEntry):
            LinearMapCert(Q, 0.0)

    def test_domain_links_name_the_replaced_seminorm(self):
        witness = self.witness()
        lambda1 = [LinearMapCert(PrefixSup(n=1), 3.0), LinearMapCert(PrefixSup(n=2), 1.0)]
        links = transport(witness, lambda1=lambda1).to_json()["constants"]["links"]
        assert [(link["map"], link["index"]) for link in links] == [("lambda1", [1]), ("lambda1", [2])]
        assert links[0]["source"] == dump(witness.p(1))
        assert links[1]["source"] == dump(witness.p(2))
        assert links[0]["seminorm"] == {"node": "prefix_sup", "n": 1}
        assert links[0]["constant"] == 3.0

    def test_target_links_name_each_old_target(self):
        targets = [[Base(id=f"p{i}{j}") for j in (1, 2)] for i in (1, 2)]
        witness = self.witness(targets=targets)
        Lambda = [[LinearMapCert(Base(id=f"y{i}{j}"), float(i + j), source=Base(id=f"p{i}{j}")) for j in (1, 2)]
                  for i in (1, 2)]
        moved = transport(witness, Lambda=Lambda)
        links = moved.constants["links"]
        assert len(links) == 4
        assert links[2] == {"map": "Lambda", "index": [2, 1], "seminorm": {"node": "base", "id": "y21"},
                            "source": {"node": "base", "id": "p21"}, "constant": 3.0}
        assert moved.constants["a"] == witness.constants["a"]

    def test_certificate_for_another_seminorm_is_rejected(self):
        witness = self.witness()
        wrong = [LinearMapCert(PrefixSup(n=1), 1.0, source=Base(id="elsewhere"))] * 2
        with pytest.raises(MismatchedSpace):
            transport(witness, lambda1=wrong)

    def test_pull_back_appends_embedding_links(self):
        targets = [[Base(id=f"y{i}{j}") for j in (1, 2)] for i in (1, 2)]
        witness = self.witness(targets=targets)
        moved = transport(witness, lambda2=[LinearMapCert(Q, 1.0), LinearMapCert(Q, 2.0)])
        embedding = [[LinearMapCert(Base(id=f"t{i}{j}"), 1.0) for j in (1, 2)] for i in (1, 2)]
        links = pull_back(moved, embedding).constants["links"]
        assert [link["map"] for link in links] == ["lambda2"] * 2 + ["embedding"] * 4
        assert links[-1]["source"] == {"node": "base", "id": "y22"}
        assert links[-1]["seminorm"] == {"node": "base", "id": "t22"}

    def test_pull_back_along_embedding(self):
        witness = self.witness()
        embedding = [[LinearMapCert(Base(id=f"t{i}{j}"), float(i * j)) for j in (1, 2)] for i in (1, 2)]
        pulled = pull_back(witness, embedding)
        assert pulled.p_family == (Scale(c=4.0, inner=P), Scale(c=28.0, inner=P))
        assert pulled.q_family == witness.q_family
        assert pulled.provenance[-2].startswith("Lambda is a topological embedding")


class TestCountableSupport:
    def test_rank_one_weight(self):
        witness = countable_support_witness([[{1: 1.0}]])
        assert witness.p_family == (WeightedSup(weights={1: 1.0}),)
        assert witness.q_family == (WeightedSup(weights={1: 1.0}),)
        assert witness.constants["support"] == [1]

    def test_overlapping_supports(self):
        weights = [[{1: 1.0, 2: 2.0}, {2: 1.0, 3: 3.0}]]
        witness = countable_support_witness(weights)
        assert witness.constants["support"] == [1, 2, 3]
        assert witness.provenance[0].startswith("C = union of the supports")
        outcome = check(finsupp_pointwise(3), None, witness, SampleConfig(seed=5, count=2000))
        assert isinstance(outcome, Pass)

    def test_ragged_table(self):
        with pytest.raises(ShapeMismatch):
            countable_support_witness([[{1: 1.0}], []])
