import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from covertmac import qlinalg as ql

from conftest import random_state

seeds = st.integers(0, 2**32 - 1)


# tensor_product

def test_tensor_identities():
    assert np.allclose(ql.tensor_product(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_basis_bookkeeping():
    out = ql.tensor_product(np.diag([1, 0]), np.diag([0, 1]))
    assert np.allclose(out, np.diag([0, 1, 0, 0]))


def test_tensor_trace_multiplicative(rng):
    a, b = random_state(3, rng) * 2.0, random_state(3, rng) * 0.5
    assert np.trace(ql.tensor_product(a, b)) == pytest.approx(np.trace(a) * np.trace(b), abs=1e-12)


def test_tensor_index_convention(rng):
    a, b = rng.standard_normal((2, 3)), rng.standard_normal((4, 5))
    out = ql.tensor_product(a, b)
    for ia, ja, ib, jb in itertools.product(range(2), range(3), range(4), range(5)):
        assert out[ia * 4 + ib, ja * 5 + jb] == pytest.approx(a[ia, ja] * b[ib, jb])


# partial_trace (0-based keep indices)

def test_partial_trace_product(rng):
    rho, sigma = random_state(2, rng), random_state(3, rng)
    assert np.allclose(ql.partial_trace(np.kron(rho, sigma), [2, 3], [0]), rho, atol=1e-12)
    assert np.allclose(ql.partial_trace(np.kron(rho, sigma), [2, 3], [1]), sigma, atol=1e-12)


def test_partial_trace_bell_state():
    psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    bell = np.outer(psi, psi)
    for keep in ([0], [1]):
        assert np.allclose(ql.partial_trace(bell, [2, 2], keep), np.eye(2) / 2, atol=1e-12)


def test_partial_trace_against_loops(rng):
    rho = random_state(4, rng)
    t = rho.reshape(2, 2, 2, 2)
    oracle = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                oracle[i, j] += t[k, i, k, j]
    assert np.allclose(ql.partial_trace(rho, [2, 2], [1]), oracle, atol=1e-12)


def test_partial_trace_three_factors_keeps_order(rng):
    a, b, c = random_state(2, rng), random_state(3, rng), random_state(2, rng)
    out = ql.partial_trace(ql.tensor_product(a, b, c), [2, 3, 2], [0, 2])
    assert np.allclose(out, np.kron(a, c), atol=1e-12)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ql.DimensionError):
        ql.partial_trace(np.eye(4), [2, 3], [0])


@given(seeds)
def test_partial_trace_trace_preserving_and_linear(seed):
    rng = np.random.default_rng(seed)
    r1, r2 = random_state(6, rng), random_state(6, rng)
    a, b = rng.standard_normal(2)
    for keep in ([0], [1], [0, 1], []):
        out = ql.partial_trace(r1, [2, 3], keep)
        assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
        lhs = ql.partial_trace(a * r1 + b * r2, [2, 3], keep)
        rhs = a * out + b * ql.partial_trace(r2, [2, 3], keep)
        assert np.allclose(lhs, rhs, atol=1e-12)


# hermitian_eig

def test_eig_diagonal():
    spec = ql.hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(spec.eigenvalues, [3, 2, 1])


def test_eig_pauli_x():
    spec = ql.hermitian_eig(np.array([[0, 1], [1, 0]]))
    assert np.allclose(spec.eigenvalues, [1, -1])


def test_eig_rejects_non_hermitian():
    with pytest.raises(ql.NotHermitianError):
        ql.hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_eig_deterministic_ties():
    a = ql.hermitian_eig(np.eye(3))
    b = ql.hermitian_eig(np.eye(3))
    assert np.array_equal(a.eigenvectors, b.eigenvectors)
    assert np.allclose(a.eigenvectors, np.eye(3))


@given(seeds, st.integers(1, 64))
def test_eig_reconstruction(seed, d):
    rng = np.random.default_rng(seed)
    h = ql.random_hermitian(d, rng)
    spec = ql.hermitian_eig(h)
    assert np.max(np.abs(spec.reconstruct() - h)) <= 1e-10 * max(1.0, np.abs(h).max())
    v = spec.eigenvectors
    assert np.max(np.abs(v.conj().T @ v - np.eye(d))) <= 1e-10
    assert np.all(np.diff(spec.eigenvalues) <= 1e-12)


# matrix_function

def test_matrix_function_square():
    assert np.allclose(ql.matrix_function(np.diag([2.0, 3.0]), np.square), np.diag([4, 9]))


def test_matrix_function_log_on_support():
    out = ql.matrix_function(np.diag([1.0, 0.0]), np.log2, support_only=True)
    assert np.allclose(out, np.zeros((2, 2)))


def test_matrix_function_undefined_raises():
    with pytest.raises(ValueError):
        ql.matrix_function(np.diag([1.0, -0.5]), np.log2, support_only=False)


def test_sqrt_twice_is_identity_map(rng):
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    p = g @ g.conj().T
    half = ql.mpow(p, 0.5)
    assert np.max(np.abs(half @ half - p)) <= 1e-10


@given(seeds, st.integers(2, 6))
def test_function_and_inverse_give_support(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_state(d, rng, rank=max(1, d - 2))
    back = ql.matrix_function(ql.matrix_function(rho, np.log, support_only=True), np.exp)
    # exp undoes log on the support; the kernel maps to exp(0) = 1 and is projected away
    proj = ql.support_projector(rho)
    assert np.allclose(proj @ back @ proj, rho, atol=1e-9)
    sq = ql.mpow(rho, 2.0)
    assert np.allclose(ql.mpow(sq, 0.5), rho, atol=1e-9)


# trace_norm

def test_trace_norm_of_state(rng):
    assert ql.trace_norm(random_state(5, rng)) == pytest.approx(1.0, abs=1e-12)


def test_trace_norm_diag():
    assert ql.trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)


def test_trace_norm_vs_svd(rng):
    r, s = random_state(2, rng), random_state(2, rng)
    oracle = np.linalg.svd(r - s, compute_uv=False).sum()
    assert ql.trace_norm(r - s) == pytest.approx(oracle, abs=1e-12)


@given(seeds, st.integers(2, 6))
def test_trace_norm_triangle_and_unitary_invariance(seed, d):
    rng = np.random.default_rng(seed)
    a, b = ql.random_hermitian(d, rng), ql.random_hermitian(d, rng)
    u = ql.random_unitary(d, rng)
    assert ql.trace_norm(a + b) <= ql.trace_norm(a) + ql.trace_norm(b) + 1e-10
    assert ql.trace_norm(u @ a @ u.conj().T) == pytest.approx(ql.trace_norm(a), abs=1e-10)


# fidelity

def test_fidelity_self(rng):
    rho = random_state(3, rng)
    assert ql.fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)


def test_fidelity_orthogonal():
    assert ql.fidelity(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(0.0, abs=1e-12)


def test_fidelity_commuting_bhattacharyya(rng):
    p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
    assert ql.fidelity(np.diag(p), np.diag(q)) == pytest.approx(np.sum(np.sqrt(p * q)), abs=1e-12)


def test_fidelity_dimension_mismatch():
    with pytest.raises(ql.DimensionError):
        ql.fidelity(np.eye(2) / 2, np.eye(3) / 3)


@given(seeds, st.integers(2, 5))
def test_fidelity_symmetric_and_bounded(seed, d):
    rng = np.random.default_rng(seed)
    r, s = random_state(d, rng), random_state(d, rng)
    f = ql.fidelity(r, s)
    assert f == pytest.approx(ql.fidelity(s, r), abs=1e-10)
    assert 0.0 <= f <= 1.0 + 1e-10
    # distinct random states are not identical, and fidelity stays away from 1
    assert (f >= 1 - 1e-10) == (ql.trace_norm(r - s) <= 1e-8)


# psd_project

def test_psd_project_identity_on_valid(rng):
    rho = random_state(3, rng)
    assert np.allclose(ql.psd_project(rho), rho, atol=1e-12)


def test_psd_project_clips():
    out = ql.psd_project(np.diag([1 + 1e-13, -1e-13]))
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-15)


def test_psd_project_rejects_real_negativity():
    with pytest.raises(ql.NotPhysicalError):
        ql.psd_project(np.diag([1.1, -0.1]))


def test_chained_partial_traces_stay_physical(rng):
    rho = random_state(2, rng)
    for _ in range(10):
        big = ql.tensor_product(rho, random_state(2, rng), random_state(2, rng))
        rho = ql.psd_project(ql.partial_trace(big, [2, 2, 2], [0]))
        ql.check_density_matrix(rho)


# validation helpers

def test_density_matrix_checks():
    assert ql.is_density_matrix(np.eye(2) / 2)
    assert not ql.is_density_matrix(np.eye(2))
    assert not ql.is_density_matrix(np.diag([1.1, -0.1]))
    assert not ql.is_density_matrix(np.array([[0.5, 0.5], [0, 0.5]]))
    with pytest.raises(ql.NotPhysicalError):
        ql.check_density_matrix(np.diag([1.001, -0.001]))


def test_projector_check(rng):
    u = ql.random_unitary(4, rng)
    p = u[:, :2] @ u[:, :2].conj().T
    assert ql.is_projector(p)
    assert not ql.is_projector(p * 0.9)


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        ql.as_matrix([[np.nan, 0], [0, 1]])


def test_projector_intersection():
    p = np.diag([1.0, 1.0, 0.0])
    q = np.diag([0.0, 1.0, 1.0])
    assert np.allclose(ql.projector_intersection(p, q), np.diag([0, 1.0, 0]))
