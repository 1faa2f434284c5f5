import warnings

import numpy as np
import pytest

from svdstream.cauchy import BackendChoice
from svdstream.errors import DimensionMismatch, NegativeEigenvalue, ZeroMatrix
from svdstream.jacobi import jacobi_svd
from svdstream.linalg import DiagRect, SVDFactors, orthogonality_defect
from svdstream.update import (align_signs, rank_one_sym_update, reconstruction_error,
                              update_svd)

NAIVE, FMM = BackendChoice("naive"), BackendChoice("fmm")


def test_rank_one_noop():
    U = np.linalg.qr(np.random.default_rng(0).standard_normal((4, 4)))[0]
    D = np.array([3.0, 1.0, 2.0, 0.0])
    for rho, a1 in ((0.0, np.ones(4)), (1.0, np.zeros(4))):
        Un, Dn = rank_one_sym_update(U, D, a1, rho)
        assert np.array_equal(Dn, np.sort(D))
        assert np.array_equal(Un, U[:, np.argsort(D)])


def test_rank_one_two_by_two():
    s = 2 ** -0.5
    Un, Dn = rank_one_sym_update(np.eye(2), [0.0, 1.0], [s, s], 1.0)
    assert np.allclose(Dn, [1 - s, 1 + s], atol=1e-15)
    _, ref = np.linalg.eigh([[0.5, 0.5], [0.5, 1.5]])
    assert np.allclose(np.abs(Un), np.abs(ref), atol=1e-15)


@pytest.mark.parametrize("backend", [NAIVE, FMM])
@pytest.mark.parametrize("rho", [1.7, -0.6])
def test_rank_one_reconstructs(backend, rho, rng):
    n = 32
    U = np.linalg.qr(rng.standard_normal((n, n)))[0]
    D = rng.uniform(-1, 1, n)
    a1 = rng.standard_normal(n)
    Un, Dn = rank_one_sym_update(U, D, a1, rho, backend)
    target = U @ np.diag(D) @ U.T + rho * np.outer(a1, a1)
    assert np.max(np.abs(Un @ np.diag(Dn) @ Un.T - target)) <= 1e-9 * np.abs(target).max()
    assert orthogonality_defect(Un) <= 1e-10
    assert np.all(np.diff(Dn) >= 0)


def test_rank_one_with_repeated_and_decoupled(rng):
    n = 20
    U = np.linalg.qr(rng.standard_normal((n, n)))[0]
    D = np.zeros(n)
    D[:8] = rng.uniform(1, 2, 8)
    a1 = U @ np.concatenate([rng.standard_normal(15), np.zeros(5)])
    Un, Dn = rank_one_sym_update(U, D, a1, 0.9)
    target = U @ np.diag(D) @ U.T + 0.9 * np.outer(a1, a1)
    assert np.max(np.abs(Un @ np.diag(Dn) @ Un.T - target)) <= 1e-12
    assert orthogonality_defect(Un) <= 1e-12


def test_rank_one_tiny_weight_is_passed_through():
    # the weight survives deflation but cannot move its root off the pole
    d = np.array([0.0, 1.0, 2.0])
    z = np.array([1.0, 1e-9, 1.0])
    Un, Dn = rank_one_sym_update(np.eye(3), d, z, 1.0)
    target = np.diag(d) + np.outer(z, z)
    assert np.max(np.abs(Un @ np.diag(Dn) @ Un.T - target)) <= 1e-12
    assert orthogonality_defect(Un) <= 1e-12


def test_update_zero_vector_is_identity(rng):
    A = rng.uniform(1, 9, (6, 8))
    svd = jacobi_svd(A)
    new, rep = update_svd(svd, np.zeros(6), rng.uniform(1, 9, 8), A=A)
    assert rep.error <= 1e-12
    assert np.array_equal(new.S.diag, svd.S.diag)


def test_update_identity_example():
    I = np.eye(2)
    new, rep = update_svd(SVDFactors(I, DiagRect(2, 2, [1.0, 1.0]), I), [1.0, 0.0], [1.0, 0.0],
                          A=I)
    assert np.allclose(new.S.diag, [2.0, 1.0], atol=1e-15)
    assert np.allclose(np.abs(new.U), I, atol=1e-15) and np.allclose(np.abs(new.V), I, atol=1e-15)
    assert rep.error <= 1e-15


@pytest.mark.parametrize("shape", [(16, 24), (24, 16), (12, 12), (1, 5), (5, 1)])
def test_update_random_fmm(shape, rng):
    A = rng.uniform(1, 9, shape)
    a, b = rng.uniform(1, 9, shape[0]), rng.uniform(1, 9, shape[1])
    new, rep = update_svd(jacobi_svd(A), a, b, FMM, A=A)
    assert rep.error <= 1e-6
    assert rep.orth_u <= 1e-7 and rep.orth_v <= 1e-7
    ref = np.linalg.svd(A + np.outer(a, b), compute_uv=False)
    assert np.allclose(new.S.diag, ref, rtol=1e-8)


def test_update_properties_random(rng):
    # reconstruction, orthogonality, consistency and oracle agreement on many shapes
    for _ in range(100):
        m = int(rng.integers(8, 65))
        n = int(rng.integers(m, 65))
        A = rng.uniform(1, 9, (m, n))
        a, b = rng.uniform(1, 9, m), rng.uniform(1, 9, n)
        svd = jacobi_svd(A)
        for backend, tol in ((NAIVE, 1e-8), (FMM, 1e-6)):
            new, rep = update_svd(svd, a, b, backend, A=A)
            assert rep.error <= tol
            assert max(rep.orth_u, rep.orth_v) <= 1e-7
            assert rep.sigma_consistency <= 1e-8
        oracle = jacobi_svd(A + np.outer(a, b)).S.diag
        assert np.max(np.abs(new.S.diag - oracle)) <= 1e-8 * oracle[0]


def test_update_then_noop_keeps_error(rng):
    A = rng.uniform(1, 9, (10, 10))
    a, b = rng.uniform(1, 9, 10), rng.uniform(1, 9, 10)
    new, rep = update_svd(jacobi_svd(A), a, b, A=A)
    A2 = A + np.outer(a, b)
    new2, rep2 = update_svd(new, np.zeros(10), b, A=A2)
    new3, rep3 = update_svd(new2, a, np.zeros(10), A=A2)
    assert abs(rep3.error - reconstruction_error(A2, new)) <= 1e-12


def test_update_dimension_checks(rng):
    svd = jacobi_svd(rng.uniform(1, 9, (3, 4)))
    with pytest.raises(DimensionMismatch):
        update_svd(svd, np.ones(4), np.ones(4))


def test_negative_clamp_flag():
    # A = diag(1, 0) with update -e1 e1^T gives the zero matrix; round-off may go negative
    I = np.eye(2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NegativeEigenvalue)
        new, rep = update_svd(SVDFactors(I, DiagRect(2, 2, [1.0, 0.0]), I), [1.0, 0.0],
                              [-1.0, 0.0], metrics=False)
    assert np.all(new.S.diag >= 0)
    assert np.allclose(new.S.diag, 0.0, atol=1e-7)


def test_align_signs_examples(rng):
    A = rng.uniform(1, 9, (5, 7))
    f = jacobi_svd(A)
    U, V = align_signs(f.U, f.S, f.V, A)
    assert np.array_equal(V, f.V)
    bad = f.V.copy()
    bad[:, 2] *= -1
    _, fixed = align_signs(f.U, f.S, bad, A)
    assert np.array_equal(fixed, f.V)
    before = reconstruction_error(A, SVDFactors(f.U, f.S, bad))
    after = reconstruction_error(A, SVDFactors(f.U, f.S, fixed))
    assert after <= before


def test_reconstruction_error_examples(rng):
    A = rng.uniform(1, 9, (6, 6))
    f = jacobi_svd(A)
    assert reconstruction_error(A, f) <= 1e-14
    smax = np.linalg.svd(A, compute_uv=False)[0]
    zeroed = SVDFactors(np.zeros((6, 6)), f.S, f.V)
    assert reconstruction_error(A, zeroed) == pytest.approx(np.abs(A).max() / smax, rel=1e-11)
    with pytest.raises(ZeroMatrix):
        reconstruction_error(np.zeros((2, 2)), SVDFactors(np.eye(2), DiagRect(2, 2, [0, 0]), np.eye(2)))


def test_update_is_deterministic(rng):
    A = rng.uniform(1, 9, (12, 12))
    a, b = rng.uniform(1, 9, 12), rng.uniform(1, 9, 12)
    svd = jacobi_svd(A)
    x, _ = update_svd(svd, a, b, FMM, metrics=False)
    y, _ = update_svd(svd, a, b, FMM, metrics=False)
    assert np.array_equal(x.U, y.U) and np.array_equal(x.V, y.V)
