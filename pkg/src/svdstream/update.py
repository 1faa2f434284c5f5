"""SVD of ``A + a b^T`` from the SVD of ``A``.

``Â Â^T = A A^T + [a, A b] [[beta, 1], [1, 0]] [a, A b]^T`` and similarly for
``Â^T Â``.  Diagonalizing the 2x2 middle factor turns each side into two
symmetric rank-one updates of a known eigendecomposition; each of those
costs one secular solve and one Cauchy product with the old basis.
"""
from dataclasses import dataclass, field
import time
import warnings

import numpy as np

from .cauchy import BackendChoice, CauchySystem, apply_ctilde, normalize_signs
from .errors import DimensionMismatch, NegativeEigenvalue, SingularInput, ZeroMatrix
from .linalg import (DiagRect, SVDFactors, as_matrix, as_vector, orthogonality_defect,
                     prepare_update, schur_sym_2x2)
from .secular import SecularProblem, deflate, solve_secular

NEGATIVE_RTOL = 1e-8
POWER_RTOL = 1e-12
POWER_MAX_ITER = 20000
_PROBE_SEED = 20240601
_PROBES = 4


@dataclass
class UpdateReport:
    error: float = float("nan")
    orth_u: float = float("nan")
    orth_v: float = float("nan")
    sigma_consistency: float = float("nan")
    negative_clamped: bool = False
    # nanoseconds per phase: prepare, secular, matvec, total
    timings: dict = field(default_factory=lambda: dict.fromkeys(
        ("prepare", "secular", "matvec", "total"), 0))


def _tick(timings, key, t0):
    if timings is not None:
        timings[key] = timings.get(key, 0) + time.perf_counter_ns() - t0


def _columns_near_poles(Q, d, z, roots, hit):
    """Eigenvector columns for roots that sit on their pole in floating point.

    The Cauchy kernel would divide by ``d_k - mu = 0`` for such a root, but
    the offset ``tau`` from the pole is known accurately, so the differences
    ``(d_k - d_origin) - tau`` are formed directly.  Only a handful of roots
    qualify, so the ``O(n^2)`` cost per column does not matter.
    """
    org = roots.origin[hit]
    delta = (d[:, None] - d[org][None, :]) - roots.tau[hit][None, :]
    W = z[:, None] / delta
    W /= np.linalg.norm(W, axis=0)
    return normalize_signs(Q @ W)


def rank_one_sym_update(U, D, a1, rho, backend: BackendChoice = BackendChoice(),
                        timings: dict = None):
    """Eigendecomposition of ``U diag(D) U^T + rho a1 a1^T``.

    Returns ``(U_new, D_new)`` with ``D_new`` ascending and the columns of
    ``U_new`` in matching order.  Pairs left untouched by deflation keep
    their old eigenvector.
    """
    t0 = time.perf_counter_ns()
    U = as_matrix(U, "U")
    D = as_vector(D, "D")
    a1 = as_vector(a1, "a1")
    n = D.size
    if U.shape != (n, n) or a1.size != n:
        raise DimensionMismatch(f"U {U.shape}, D ({n},) and a1 ({a1.size},) disagree")
    if not np.isfinite(rho):
        raise SingularInput("rho must be finite")
    perm = np.argsort(D, kind="stable")
    if rho == 0 or not a1.any():
        return U[:, perm].copy(), D[perm].copy()

    Q = U[:, perm]
    d = D[perm]
    abar = Q.T @ a1
    info, reduced = deflate(SecularProblem(d, abar, rho))
    info.apply_rotations(Q)
    roots = solve_secular(reduced) if reduced.n else None
    _tick(timings, "secular", t0)

    t0 = time.perf_counter_ns()
    vals = np.empty(n)
    vecs = np.empty((n, n))
    passthrough = np.array([i for i, _ in info.deflated_eigs], dtype=np.intp)
    active = info.active
    k = active.size
    if k:
        Qa = Q[:, active]
        near = roots.mu - reduced.d[roots.origin]
        hit = np.abs(near) <= 2 * np.spacing(np.maximum(np.abs(roots.mu),
                                                        np.abs(reduced.d[roots.origin])))
        good = ~hit
        if good.any():
            sys = CauchySystem.build(reduced.d, roots.mu[good], reduced.z)
            vecs[:, :k][:, good] = apply_ctilde(sys, Qa, backend)
        if hit.any():
            vecs[:, :k][:, hit] = _columns_near_poles(Qa, reduced.d, reduced.z, roots, hit)
        vals[:k] = roots.mu
    vals[k:] = d[passthrough]
    vecs[:, k:] = Q[:, passthrough]
    order = np.argsort(vals, kind="stable")
    out = vecs[:, order], vals[order]
    _tick(timings, "matvec", t0)
    return out


def _descending(Q, w):
    order = np.argsort(-w, kind="stable")
    return Q[:, order], w[order]


def align_signs(U, S: DiagRect, V, A_hat):
    """Flip columns of V so that ``u_i^T Â v_i >= 0`` for every nonzero sigma_i."""
    U = np.asarray(U, dtype=np.float64)
    V = np.array(V, dtype=np.float64)
    A_hat = as_matrix(A_hat, "A_hat")
    k = S.diag.size
    if k == 0:
        return U, V
    tol = max(A_hat.shape) * np.finfo(float).eps * S.diag.max()
    proj = np.einsum("ij,ij->j", U[:, :k], A_hat @ V[:, :k])
    flip = (S.diag > tol) & (proj < 0)
    V[:, :k][:, flip] *= -1.0
    return U, V


def _align_signs_factored(U, S, V, old: SVDFactors, a, b):
    """Same as :func:`align_signs` without forming ``Â``: ``O(n^2)`` work.

    With ``Â = U' Σ' E V'^T`` where ``E`` holds the unknown signs,
    ``V'^T Â^T Y = Σ'^T E U'^T Y`` for any probe block ``Y``, and ``Â^T Y``
    is cheap from the old factors and the update vectors.
    """
    k = S.diag.size
    m = U.shape[0]
    Y = np.random.default_rng(_PROBE_SEED).standard_normal((m, _PROBES))
    AtY = old.V @ np.vstack([old.S.diag[:, None] * (old.U.T @ Y)[:k],
                             np.zeros((old.S.cols - k, _PROBES))])
    AtY += np.outer(b, a @ Y)
    lhs = (V[:, :k].T @ AtY)
    coef = U[:, :k].T @ Y
    best = np.argmax(np.abs(coef), axis=1)
    rows = np.arange(k)
    ratio = lhs[rows, best] * coef[rows, best]
    tol = max(U.shape[0], V.shape[0]) * np.finfo(float).eps * (S.diag.max() if k else 0.0)
    flip = (S.diag > tol) & (ratio < 0)
    V[:, :k][:, flip] *= -1.0
    return V


def update_svd(svd: SVDFactors, a, b, backend: BackendChoice = BackendChoice(),
               A=None, metrics: bool = True):
    """Factors of ``A + a b^T`` and an :class:`UpdateReport`.

    ``A`` (the matrix the factors describe) is only used for the error
    metric; it is rebuilt from the factors when omitted.  ``metrics=False``
    skips the ``O(n^3)`` report fields.
    """
    t_start = time.perf_counter_ns()
    m, n = svd.shape
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.size != m or b.size != n:
        raise DimensionMismatch(
            f"update vectors have lengths ({a.size}, {b.size}), expected ({m}, {n})")
    if m > n:
        flipped = SVDFactors(svd.V, DiagRect(n, m, svd.S.diag), svd.U)
        At = None if A is None else np.asarray(A).T
        res, report = update_svd(flipped, b, a, backend, At, metrics)
        return SVDFactors(res.V, DiagRect(m, n, res.S.diag), res.U), report

    report = UpdateReport()
    timings = report.timings
    if not a.any() or not b.any():
        new = SVDFactors(svd.U.copy(), svd.S, svd.V.copy())
        Dl = Dr = svd.S.diag ** 2
    else:
        t0 = time.perf_counter_ns()
        ing = prepare_update(svd, a, b)
        su = schur_sym_2x2([[ing.beta, 1.0], [1.0, 0.0]])
        sv = schur_sym_2x2([[ing.alpha, 1.0], [1.0, 0.0]])
        a1, b1 = (np.column_stack([a, ing.b_tilde]) @ su.Q).T
        a2, b2 = (np.column_stack([b, ing.a_tilde]) @ sv.Q).T
        _tick(timings, "prepare", t0)

        Ul, Dl = rank_one_sym_update(svd.U, ing.Du, a1, su.rho1, backend, timings)
        Ul, Dl = rank_one_sym_update(Ul, Dl, b1, su.rho2, backend, timings)
        Vr, Dr = rank_one_sym_update(svd.V, ing.Dv, a2, sv.rho1, backend, timings)
        Vr, Dr = rank_one_sym_update(Vr, Dr, b2, sv.rho2, backend, timings)

        t0 = time.perf_counter_ns()
        Ul, Dl = _descending(Ul, Dl)
        Vr, Dr = _descending(Vr, Dr)
        scale = max(Dl.max(initial=0.0), 0.0)
        if np.any(Dl < -NEGATIVE_RTOL * scale):
            report.negative_clamped = True
            warnings.warn("updated eigenvalue clearly negative; clamped to zero",
                          NegativeEigenvalue, stacklevel=2)
        S = DiagRect(m, n, np.sqrt(np.maximum(Dl, 0.0)))
        Vr = _align_signs_factored(Ul, S, Vr, svd, a, b)
        new = SVDFactors(Ul, S, Vr)
        _tick(timings, "prepare", t0)
    timings["total"] = time.perf_counter_ns() - t_start

    if metrics:
        A_old = svd.reconstruct() if A is None else as_matrix(A, "A")
        A_hat = A_old + np.outer(a, b)
        report.error = reconstruction_error(A_hat, new) if A_hat.any() else 0.0
        report.orth_u = orthogonality_defect(new.U)
        report.orth_v = orthogonality_defect(new.V)
    report.sigma_consistency = sigma_consistency(Dl, Dr[:m])
    return new, report


def sigma_consistency(left, right) -> float:
    """Largest gap between left- and right-side eigenvalues relative to the largest one."""
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    if left.size == 0:
        return 0.0
    top = np.max(np.abs(left))
    gap = np.max(np.abs(left - right))
    return float(gap / top) if top > 0 else float(gap)


def largest_singular_value(A) -> float:
    """Power iteration on ``A^T A`` until the estimate settles to ``POWER_RTOL``."""
    A = as_matrix(A, "A")
    if not A.any():
        return 0.0
    x = np.random.default_rng(0).standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(POWER_MAX_ITER):
        y = A.T @ (A @ x)
        new = float(np.linalg.norm(y))
        if new == 0.0:
            # start vector in the null space; restart from a fixed basis vector
            x = np.zeros(A.shape[1])
            x[int(np.argmax(np.abs(A).sum(axis=0)))] = 1.0
            continue
        x = y / new
        if abs(new - est) <= POWER_RTOL * new:
            return float(np.sqrt(new))
        est = new
    return float(np.sqrt(est))


def reconstruction_error(A_hat, factors: SVDFactors) -> float:
    """``max |Â - U S V^T| / sigma_max(Â)``."""
    A_hat = as_matrix(A_hat, "A_hat")
    if A_hat.shape != factors.shape:
        raise DimensionMismatch(f"A_hat is {A_hat.shape}, factors are {factors.shape}")
    smax = largest_singular_value(A_hat)
    if smax == 0.0:
        raise ZeroMatrix("Â is the zero matrix; the error metric is undefined")
    return float(np.max(np.abs(A_hat - factors.reconstruct())) / smax)
