import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from covertmac import qlinalg as ql
from covertmac.channel import CqTable
from covertmac.infomeasures import (
    InputDistribution,
    count_distinct,
    cq_sandwiched_renyi,
    cq_state,
    eigen_groups,
    holevo_cmi,
    pinching_map,
    quantum_rel_entropy,
    region_bounds,
    sandwiched_renyi,
    shannon_entropy,
    von_neumann_entropy,
)
from covertmac.testbeds import classical_table, constant_channel, pure_qubit, warden_blind_channel

from conftest import random_probs, random_state

seeds = st.integers(0, 2**32 - 1)


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


# classical oracle: joint law P[x1, x2, x3, y], I(S; Y | T) = H(S,T) + H(Y,T) - H(T) - H(S,T,Y)

def _h_marg(P, keep):
    axes = tuple(a for a in range(P.ndim) if a not in keep)
    m = P.sum(axis=axes) if axes else P
    m = m[m > 0]
    return float(-(m * np.log2(m)).sum())


def classical_cmi(px, channel, s, t):
    P = px[..., None] * channel
    S = {i - 1 for i in s}
    T = {i - 1 for i in t}
    return _h_marg(P, S | T) + _h_marg(P, T | {3}) - _h_marg(P, T) - _h_marg(P, S | T | {3})


def random_channel_law(sizes, out, rng):
    return rng.dirichlet(np.ones(out) * 0.7, size=sizes)


def random_dist(rng, sizes):
    k1, k2, k3 = sizes
    p3 = np.array([[random_probs(k3, rng) for _ in range(k2)] for _ in range(k1)])
    return InputDistribution(random_probs(k1, rng), random_probs(k2, rng), p3)


# entropies

def test_entropy_examples():
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0)
    assert von_neumann_entropy(pure_qubit(0.4)) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(np.diag([0.25, 0.75])) == pytest.approx(h2(0.25), abs=1e-12)
    assert shannon_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.5)


@given(seeds, st.integers(2, 6))
def test_entropy_range(seed, d):
    rho = random_state(d, np.random.default_rng(seed))
    assert -1e-12 <= von_neumann_entropy(rho) <= math.log2(d) + 1e-12


# holevo_cmi

SETS = [({1}, set()), ({2}, set()), ({3}, set()), ({1, 3}, {2}), ({2, 3}, {1}), ({1, 2, 3}, set()),
        ({1}, {2, 3}), ({3}, {1, 2}), ({1, 2}, {3})]


def test_product_table_zero(rng):
    t = constant_channel(random_state(2, rng), random_state(2, rng))
    d = random_dist(rng, (2, 2, 2))
    for s, c in SETS:
        for target in "BE":
            assert holevo_cmi(t, d, target, s, c) == pytest.approx(0.0, abs=1e-9)


def test_binary_adder_mac():
    # y = x1 + x2 in {0, 1, 2}; helper silent
    law = np.zeros((2, 2, 1, 3))
    for x1, x2 in np.ndindex(2, 2):
        law[x1, x2, 0, x1 + x2] = 1
    t = classical_table(law, np.ones((2, 2, 1, 1)), [1.0])
    d = InputDistribution(np.array([0.5, 0.5]), np.array([0.5, 0.5]), np.ones((2, 2, 1)))
    px = d.joint()
    assert holevo_cmi(t, d, "B", {1, 2, 3}) == pytest.approx(1.5, abs=1e-12)
    assert holevo_cmi(t, d, "B", {1, 3}, {2}) == pytest.approx(1.0, abs=1e-12)
    for s, c in SETS:
        assert holevo_cmi(t, d, "B", s, c) == pytest.approx(classical_cmi(px, law, s, c), abs=1e-9)


def test_pure_table_full_information(rng):
    t = warden_blind_channel(0.4)
    d = random_dist(rng, (2, 2, 2))
    rho_b = np.tensordot(d.joint(), t.b_states, axes=3)
    assert holevo_cmi(t, d, "B", {1, 2, 3}) == pytest.approx(von_neumann_entropy(rho_b), abs=1e-12)


def test_overlapping_sets_rejected(rng):
    t = warden_blind_channel()
    with pytest.raises(ValueError):
        holevo_cmi(t, InputDistribution.uniform(2, 2, 2), "B", {1, 2}, {2})


def test_region_bounds_warden_blind():
    b = region_bounds(warden_blind_channel(), InputDistribution.uniform(2, 2, 2))
    assert b.e1 == b.e2 == b.e12 == 0.0
    assert b.b12 > 0.5


def test_region_bounds_point_mass(rng):
    js = np.empty((2, 2, 2, 4, 4), dtype=complex)
    for idx in np.ndindex(2, 2, 2):
        js[idx] = random_state(4, rng)
    t = CqTable(js, 2, 2, np.eye(2) / 2)
    b = region_bounds(t, InputDistribution.point_mass((2, 2, 2), (0, 1, 1)))
    assert all(v == pytest.approx(0.0, abs=1e-12) for v in b.as_dict().values())


@given(seeds, st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3)), st.integers(2, 3), st.integers(2, 3))
def test_region_bounds_classical_oracle(seed, sizes, d_b, d_e):
    rng = np.random.default_rng(seed)
    law_b = random_channel_law(sizes, d_b, rng)
    law_e = random_channel_law(sizes, d_e, rng)
    t = classical_table(law_b, law_e, random_probs(d_e, rng))
    d = random_dist(rng, sizes)
    px = d.joint()
    b = region_bounds(t, d)
    assert b.b1 == pytest.approx(classical_cmi(px, law_b, {1, 3}, {2}), abs=1e-9)
    assert b.b2 == pytest.approx(classical_cmi(px, law_b, {2, 3}, {1}), abs=1e-9)
    assert b.b12 == pytest.approx(classical_cmi(px, law_b, {1, 2, 3}, set()), abs=1e-9)
    assert b.e1 == pytest.approx(classical_cmi(px, law_e, {1}, set()), abs=1e-9)
    assert b.e2 == pytest.approx(classical_cmi(px, law_e, {2}, set()), abs=1e-9)
    assert b.e12 == pytest.approx(classical_cmi(px, law_e, {1, 2, 3}, set()), abs=1e-9)


@given(seeds)
def test_holevo_nonnegative(seed):
    rng = np.random.default_rng(seed)
    js = np.empty((2, 2, 2, 4, 4), dtype=complex)
    for idx in np.ndindex(2, 2, 2):
        js[idx] = random_state(4, rng, rank=1 + int(rng.integers(4)))
    t = CqTable(js, 2, 2, np.eye(2) / 2)
    d = random_dist(rng, (2, 2, 2))
    for s, c in SETS:
        for target in "BE":
            assert holevo_cmi(t, d, target, s, c) >= -1e-9


# relative entropies

def test_rel_entropy_examples(rng):
    rho = random_state(3, rng)
    assert quantum_rel_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert quantum_rel_entropy(pure_qubit(0.3), np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)
    assert quantum_rel_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])) == math.inf


def test_rel_entropy_kl_oracle(rng):
    p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
    kl = float(np.sum(p * np.log2(p / q)))
    assert quantum_rel_entropy(np.diag(p), np.diag(q)) == pytest.approx(kl, abs=1e-10)
    u = ql.random_unitary(4, rng)
    rot = lambda m: u @ m @ u.conj().T  # noqa: E731
    assert quantum_rel_entropy(rot(np.diag(p)), rot(np.diag(q))) == pytest.approx(kl, abs=1e-10)


@given(seeds, st.integers(2, 5))
def test_rel_entropy_nonnegative(seed, d):
    rng = np.random.default_rng(seed)
    assert quantum_rel_entropy(random_state(d, rng), random_state(d, rng)) >= 0


def test_sandwiched_examples(rng):
    rho = random_state(3, rng)
    assert sandwiched_renyi(rho, rho, 0.5) == pytest.approx(0.0, abs=1e-10)
    assert sandwiched_renyi(np.eye(2) / 2, np.diag([1.0, 0.0]), 0.5) == math.inf
    with pytest.raises(ValueError):
        sandwiched_renyi(rho, rho, 0.0)


@given(seeds, st.sampled_from([0.1, 0.3, 0.5, 0.9, 1.0]))
def test_sandwiched_classical_oracle(seed, alpha):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
    oracle = math.log2(np.sum(p ** (1 + alpha) * q ** (-alpha))) / alpha
    u = ql.random_unitary(3, rng)
    val = sandwiched_renyi(u @ np.diag(p) @ u.conj().T, u @ np.diag(q) @ u.conj().T, alpha)
    assert val == pytest.approx(oracle, abs=1e-10)


@given(seeds)
def test_sandwiched_small_alpha_limit(seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(2)) * 0.9 + 0.05
    q = rng.dirichlet(np.ones(2)) * 0.9 + 0.05
    assert abs(sandwiched_renyi(np.diag(p), np.diag(q), 1e-4) - quantum_rel_entropy(np.diag(p), np.diag(q))) <= 0.01


def test_cq_sandwiched_matches_block_state(rng):
    probs = random_probs(3, rng)
    conds = [random_state(2, rng) for _ in range(3)]
    sigma = random_state(2, rng)
    joint = cq_state(probs, conds)
    ref = np.kron(np.diag(probs), sigma)
    for alpha in (0.2, 0.7):
        assert cq_sandwiched_renyi(probs, conds, sigma, alpha) == pytest.approx(
            sandwiched_renyi(joint, ref, alpha), abs=1e-10)


# pinching

def test_pinching_maximally_mixed(rng):
    rho = random_state(3, rng)
    out, v = pinching_map(np.eye(3) / 3, rho)
    assert v == 1 and np.allclose(out, rho)


def test_pinching_nondegenerate(rng):
    rho = random_state(3, rng)
    out, v = pinching_map(np.diag([0.5, 0.3, 0.2]), rho)
    assert v == 3 and np.allclose(out, np.diag(np.diag(rho)))


def test_pinching_inequality_qubit(rng):
    rho, sigma = random_state(2, rng), random_state(2, rng)
    out, v = pinching_map(sigma, rho)
    assert ql.min_eig(v * out - rho) >= -1e-10


def degenerate_state(d, rng):
    levels = rng.random(int(rng.integers(1, d + 1))) + 0.05
    lam = rng.choice(levels, size=d)
    u = ql.random_unitary(d, rng)
    return (u * (lam / lam.sum())) @ u.conj().T


def test_pinching_inequality_many(rng):
    for _ in range(500):
        d = int(rng.integers(2, 9))
        rho = random_state(d, rng)
        sigma = degenerate_state(d, rng) if rng.random() < 0.5 else random_state(d, rng)
        out, v = pinching_map(sigma, rho)
        assert ql.min_eig(v * out - rho) >= -1e-9


@given(seeds, st.integers(2, 6))
def test_pinching_properties(seed, d):
    rng = np.random.default_rng(seed)
    rho, sigma, tau = random_state(d, rng), degenerate_state(d, rng), random_state(d, rng)
    out, v = pinching_map(sigma, rho)
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(out @ sigma - sigma @ out)) <= 1e-10
    assert v == len(eigen_groups(sigma)) == count_distinct(np.linalg.eigvalsh(sigma))
    # trace identity tr[E(rho) tau] = tr[rho E(tau)]
    lhs = np.trace(out @ tau)
    rhs = np.trace(rho @ pinching_map(sigma, tau)[0])
    assert abs(lhs - rhs) <= 1e-10
    # data processing under pinching
    for alpha in (0.3, 1.0):
        after = sandwiched_renyi(out, pinching_map(sigma, tau)[0], alpha)
        assert after <= sandwiched_renyi(rho, tau, alpha) + 1e-9


@given(seeds, st.integers(2, 6))
def test_commuting_power_subadditivity(seed, d):
    rng = np.random.default_rng(seed)
    u = ql.random_unitary(d, rng)
    a = (u * rng.random(d)) @ u.conj().T
    b = (u * rng.random(d)) @ u.conj().T
    for s in np.arange(0.1, 1.01, 0.1):
        gap = ql.mpow(a, s) + ql.mpow(b, s) - ql.mpow(a + b, s)
        assert ql.min_eig(gap) >= -1e-9


def test_scalar_step_inequality_grid():
    for x in np.logspace(-6, 6, 121):
        for alpha in np.arange(0.1, 1.01, 0.1):
            # log(1+x) <= log(1 + x^a) / a <= x^a / a, natural log
            assert math.log1p(x) <= math.log1p(x ** alpha) / alpha + 1e-12
            assert math.log1p(x ** alpha) / alpha <= x ** alpha / alpha + 1e-12


# additivity on tensor powers

@given(seeds, st.integers(1, 3))
def test_additivity(seed, n):
    rng = np.random.default_rng(seed)
    rho, sigma = random_state(2, rng), random_state(2, rng)
    assert von_neumann_entropy(ql.tensor_power(rho, n)) == pytest.approx(n * von_neumann_entropy(rho), abs=1e-9)
    assert quantum_rel_entropy(ql.tensor_power(rho, n), ql.tensor_power(sigma, n)) == pytest.approx(
        n * quantum_rel_entropy(rho, sigma), abs=1e-9)


def test_distribution_validation():
    with pytest.raises(ValueError):
        InputDistribution(np.array([0.5, 0.6]), np.array([1.0]), np.ones((2, 1, 1)))
    with pytest.raises(ValueError):
        InputDistribution(np.array([1.0]), np.array([1.0]), np.full((1, 1, 2), 0.4))
    d = InputDistribution.uniform(2, 3, 2)
    assert InputDistribution.from_dict(d.to_dict()).total_variation(d) == 0.0
