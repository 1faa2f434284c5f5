import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import interlaced
from svdstream.cauchy import (BackendChoice, CauchySystem, apply_ctilde, build_cauchy,
                              cauchy_matvec_naive, column_norms)
from svdstream.errors import PoleCollision, ZeroColumn
from svdstream.linalg import orthogonality_defect
from svdstream.secular import SecularProblem, solve_secular


def test_build_cauchy_examples():
    assert np.allclose(build_cauchy([4, 5], [1, 2]), [[1 / 3, 1 / 2], [1 / 4, 1 / 3]])
    assert np.array_equal(build_cauchy([1.0], [0.0]), [[1.0]])
    with pytest.raises(PoleCollision):
        build_cauchy([0.0], [0.0])


def test_naive_matvec_examples():
    assert np.allclose(cauchy_matvec_naive([4, 5], [1, 2], [1, 1]), [7 / 12, 5 / 6])
    assert cauchy_matvec_naive([1.0], [0.0], [3.0])[0] == 3.0
    assert not cauchy_matvec_naive([4, 5], [1, 2], [0, 0]).any()


def test_naive_matches_explicit_matrix(rng):
    lam, mu = interlaced(50, rng)
    U = rng.standard_normal((7, 50))
    assert np.allclose(cauchy_matvec_naive(lam, mu, U), U @ build_cauchy(lam, mu), rtol=1e-13)


def test_naive_collision():
    with pytest.raises(PoleCollision):
        cauchy_matvec_naive([1.0, 2.0], [2.0], [1.0, 1.0])


def test_column_norm_examples():
    assert column_norms([1, 1], [4, 5], [1])[0] == pytest.approx(5 / 12)
    assert column_norms([1.0], [1.0], [0.0])[0] == 1.0
    with pytest.raises(ZeroColumn):
        column_norms([0.0, 0.0], [4, 5], [1])


def test_column_norms_match_explicit(rng):
    lam, mu = interlaced(30, rng)
    abar = rng.standard_normal(30)
    ref = np.linalg.norm(abar[:, None] * build_cauchy(lam, mu), axis=0)
    got = column_norms(abar, lam, mu)
    assert np.max(np.abs(got / ref - 1)) <= 1e-12
    assert np.allclose(column_norms(2 * abar, lam, mu), 2 * got, rtol=1e-15)


def test_apply_ctilde_scalar():
    sys = CauchySystem.build([1.0], [0.0], [1.0])
    assert apply_ctilde(sys, [[1.0]])[0, 0] == 1.0


def test_apply_ctilde_two_by_two():
    s = 2 ** -0.5
    roots = solve_secular(SecularProblem([0.0, 1.0], [s, s], 1.0))
    sys = CauchySystem.build([0.0, 1.0], roots.mu, [s, s])
    Q = apply_ctilde(sys, np.eye(2))
    _, ref = np.linalg.eigh([[0.5, 0.5], [0.5, 1.5]])
    assert np.allclose(np.abs(Q), np.abs(ref), atol=1e-15)
    assert np.allclose(np.abs(Q[:, 0]), [0.923880, 0.382683], atol=1e-6)


def eigen_system(n, rng, gap_floor=1e-6):
    d = np.sort(rng.uniform(0, 1, n))
    while np.min(np.diff(d)) < gap_floor:
        d = np.sort(rng.uniform(0, 1, n))
    z = rng.standard_normal(n)
    roots = solve_secular(SecularProblem(d, z, 1.0))
    return CauchySystem.build(d, roots.mu, z)


@pytest.mark.parametrize("kind", ["naive", "fmm"])
def test_output_is_orthogonal(kind, rng):
    for n in (8, 32, 128):
        sys = eigen_system(n, rng)
        Q = apply_ctilde(sys, np.eye(n), BackendChoice(kind))
        assert orthogonality_defect(Q) <= 1e-8


FAST_LIMIT = ("monomial-basis evaluation of h/g near the poles loses about n*log10(4) "
              "digits plus the pole-proximity factor; see the decisions ledger")


@pytest.mark.xfail(strict=True, reason=FAST_LIMIT)
def test_fast_output_is_orthogonal(rng):
    for n in (6, 16, 64):
        sys = eigen_system(n, rng)
        assert orthogonality_defect(apply_ctilde(sys, np.eye(n), BackendChoice("fast"))) <= 1e-8


def test_fast_output_is_orthogonal_tiny(rng):
    # a well separated 3x3 problem stays within reach of the monomial basis
    sys = CauchySystem.build([0.0, 1.0, 2.0], *_roots_3x3())
    assert orthogonality_defect(apply_ctilde(sys, np.eye(3), BackendChoice("fast"))) <= 1e-8


def _roots_3x3():
    z = np.array([0.6, 0.5, 0.62])
    return solve_secular(SecularProblem([0.0, 1.0, 2.0], z, 1.0)).mu, z


def test_naive_vs_fmm_n256(rng):
    sys = eigen_system(256, rng)
    U = np.linalg.qr(rng.standard_normal((256, 256)))[0]
    a = apply_ctilde(sys, U, BackendChoice("naive"))
    b = apply_ctilde(sys, U, BackendChoice("fmm"))
    assert np.max(np.abs(a - b)) <= 1e-9


def test_backend_equivalence_fmm_many(rng):
    # fmm tolerance: 10 * 5^-p relative to the input scale
    tol = 10 * 5.0 ** -20
    for _ in range(100):
        n = int(rng.integers(2, 64))
        sys = eigen_system(n, rng)
        U = rng.standard_normal((n, n))
        a = apply_ctilde(sys, U, BackendChoice("naive"))
        b = apply_ctilde(sys, U, BackendChoice("fmm"))
        assert np.max(np.abs(a - b)) <= tol * max(1.0, np.abs(U).max()) * n


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(-1e3, 1e3).filter(lambda c: abs(c) > 1e-3))
def test_scale_invariance(seed, c):
    r = np.random.default_rng(seed)
    sys = eigen_system(10, r)
    Q1 = apply_ctilde(sys, np.eye(10))
    Q2 = apply_ctilde(CauchySystem.build(sys.lam, sys.mu, c * sys.abar), np.eye(10))
    assert np.allclose(Q1, Q2, atol=1e-12)


def test_column_signs_convention(rng):
    sys = eigen_system(12, rng)
    Q = apply_ctilde(sys, np.eye(12))
    assert np.all(Q[np.argmax(np.abs(Q), axis=0), np.arange(12)] > 0)


def test_backend_choice_validation():
    with pytest.raises(ValueError):
        BackendChoice("bogus")
    with pytest.raises(ValueError):
        BackendChoice("fmm", 1.5)
    assert BackendChoice("fmm").order == 20
    assert BackendChoice("naive").order is None
