"""Acceptance-scale sweeps: random schedules, large witness checks and the smooth blow-up."""
import numpy as np
import pytest
from scipy.stats import loguniform

from falsify import Pass, SampleConfig, check, reproduce_smooth_blowup
from models import (CircleGrid, CyclicZ, block_pointwise, convolve, finsupp_pointwise, l_norm, r_norm,
                    rl_norm, support_measure)
from seminorms import Base, PrefixSup, Scale, dominates
from witness import (bisgaard_split, cnp_product_estimates, countable_support_witness, direct_sum_combine,
                     exponent_schedule, schedule_constants, target_cnp_product_estimates)

SCALES = (1 / 8, 1 / 16, 1 / 32, 1 / 64, 1 / 128)
SAMPLES = 100_000


def rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def test_random_schedules_satisfy_their_inequalities():
    generator = rng(2024)
    for _ in range(1000):
        n = int(generator.integers(1, 201))
        r = loguniform.rvs(1e-3, 1e3, size=(n, n), random_state=generator)
        s = loguniform.rvs(1e-3, 1e3, size=(n, n), random_state=generator)
        schedule = schedule_constants(r, s)
        assert np.all(np.outer(schedule.a, schedule.b) >= r * s)
        d = np.asarray(bisgaard_split(r).d)
        assert np.all(np.outer(d, d) >= r)
        t = generator.integers(0, 51, size=(n, n))
        exponents = exponent_schedule(t)
        assert np.all(np.add.outer(exponents.r, exponents.s) >= t)


def test_random_direct_sum_weights_cover_every_block_constant():
    generator = rng(4242)
    for _ in range(1000):
        n_i, n_j, n_s, n_t = (int(v) for v in generator.integers(1, 9, size=4))
        C = loguniform.rvs(1e-3, 1e3, size=(n_i, n_j, n_s, n_t), random_state=generator)
        P_blocks = [[Base(id=f"P_{i}{s}") for s in range(n_s)] for i in range(n_i)]
        Q_blocks = [[Base(id=f"Q_{j}{t}") for t in range(n_t)] for j in range(n_j)]
        witness = direct_sum_combine(C, P_blocks, Q_blocks)
        u, v = np.asarray(witness.constants["u"]), np.asarray(witness.constants["v"])
        assert u.shape == (n_i,) and v.shape == (n_j,)
        assert np.all(np.outer(u, v)[:, :, None, None] >= C)
        assert len(witness.p_family) == n_s and len(witness.q_family) == n_t


def test_streaming_prefixes_up_to_one_hundred():
    generator = rng(7)
    r = loguniform.rvs(1e-2, 1e2, size=(101, 101), random_state=generator)
    s = loguniform.rvs(1e-2, 1e2, size=(101, 101), random_state=generator)
    t = generator.integers(0, 51, size=(101, 101))
    full_schedule, full_split, full_exponents = schedule_constants(r, s), bisgaard_split(r), exponent_schedule(t)
    for n in range(1, 101):
        schedule = schedule_constants(r[:n, :n], s[:n, :n])
        assert schedule.a == full_schedule.a[:n] and schedule.b == full_schedule.b[:n]
        assert bisgaard_split(r[:n, :n]).d == full_split.d[:n]
        exponents = exponent_schedule(t[:n, :n])
        assert exponents.r == full_exponents.r[:n] and exponents.s == full_exponents.s[:n]


def domain_side_witness(size):
    c = loguniform.rvs(0.1, 10.0, size=(3, 3), random_state=rng(11))
    p = PrefixSup(n=size)
    targets = [[Scale(c=float(c[i, j]), inner=PrefixSup(n=min(i + j + 2, size))) for j in range(3)]
               for i in range(3)]
    P_bound = [[dominates(target, p) for target in row] for row in targets]
    Q_bound = [[dominates(PrefixSup(n=min(i + j + 2, size)), p) for j in range(3)] for i in range(3)]
    return cnp_product_estimates(P_bound, Q_bound, targets=targets)


def target_side_witness(size):
    C = loguniform.rvs(0.1, 10.0, size=(3, 3), random_state=rng(12))
    prefix = PrefixSup(n=size)
    targets = [[Scale(c=float(C[i, j]), inner=prefix) for j in range(3)] for i in range(3)]
    return target_cnp_product_estimates(prefix, C, prefix, prefix, targets=targets)


@pytest.mark.parametrize("size", [8, 64])
@pytest.mark.parametrize("build", [domain_side_witness, target_side_witness], ids=["domain", "target"])
def test_witnesses_hold_on_one_hundred_thousand_samples(build, size):
    witness = build(size)
    cfg = SampleConfig(seed=99, count=SAMPLES)
    assert isinstance(check(finsupp_pointwise(size), None, witness, cfg), Pass)


@pytest.mark.parametrize("block_dim", [2, 16])
def test_direct_sum_witness_end_to_end(block_dim):
    coefficients = loguniform.rvs(0.1, 10.0, size=(4, 4), random_state=rng(13))
    sup = PrefixSup(n=block_dim)
    blocks = [[sup] for _ in range(4)]
    witness = direct_sum_combine(coefficients[:, :, None, None], blocks, blocks, targets=[[sup]])
    cfg = SampleConfig(seed=5, count=SAMPLES)
    assert isinstance(check(block_pointwise(coefficients, block_dim), None, witness, cfg), Pass)


@pytest.mark.parametrize("truncation,weights,support", [
    (8, [[{1: 1.0, 4: 2.5}, {2: 0.5}], [{3: 4.0, 4: 1.0}, {1: 2.0, 2: 2.0, 5: 1.0}]], [1, 2, 3, 4, 5]),
    (64, [[{1: 1.0, 40: 2.5}, {17: 0.5, 64: 3.0}], [{3: 4.0, 64: 1.0}, {1: 2.0, 2: 2.0, 50: 1.0}]],
     [1, 2, 3, 17, 40, 50, 64]),
])
def test_countable_support_witness_end_to_end(truncation, weights, support):
    witness = countable_support_witness(weights)
    assert witness.constants["support"] == support
    cfg = SampleConfig(seed=17, count=SAMPLES)
    assert isinstance(check(finsupp_pointwise(truncation), None, witness, cfg), Pass)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_smooth_blowup(k):
    report = reproduce_smooth_blowup(k, SCALES)
    assert report.bounded
    assert report.blowup
    assert all(1.8 <= q <= 2.2 for q in report.quotients)


def test_young_bound_on_cyclic_groups():
    generator = rng(31)
    for _ in range(1000):
        m = int(generator.integers(2, 65))
        gamma = generator.standard_normal(m) * (generator.random(m) < 0.3)
        eta = generator.standard_normal(m)
        G = CyclicZ(m)
        lhs = np.abs(convolve(G, gamma, eta)).max()
        assert lhs <= np.abs(gamma).max() * np.abs(eta).max() * support_measure(G, gamma) * (1 + 1e-12)


@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("l", [0, 1, 2])
def test_young_bound_on_the_circle(k, l):
    n = 1024
    x = np.arange(n) / n
    G = CircleGrid(n)
    generator = rng(37)
    for _ in range(20):
        a, b = generator.standard_normal((2, 8))
        gamma = 3.0 + sum(a[d] * np.cos(2 * np.pi * (d + 1) * x) / (d + 1) ** 2 for d in range(8)) / 4
        eta = sum(b[d] * np.sin(2 * np.pi * (d + 1) * x) for d in range(8))
        lhs = rl_norm(G, convolve(G, gamma, eta), k, l)
        rhs = r_norm(G, gamma, k) * l_norm(G, eta, l) * support_measure(G, gamma)
        assert lhs <= rhs * (1 + 1e-6)
