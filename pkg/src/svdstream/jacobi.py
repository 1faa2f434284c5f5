"""Dense Jacobi methods: the slow, accurate references.

Both solvers sweep pairs in round-robin (tournament) order so that each
round rotates n/2 disjoint pairs at once with vectorized numpy; disjoint
rotations commute, so a round is exactly a sequence of classical Jacobi
rotations.
"""
from functools import lru_cache

import numpy as np

from .errors import NoConvergence, NonSquare, NonSymmetric
from .linalg import DiagRect, SVDFactors, as_matrix

EPS = np.finfo(np.float64).eps
MAX_SWEEPS = 60


@lru_cache(maxsize=64)
def round_robin(n: int):
    """Rounds of disjoint index pairs covering every pair ``p < q`` once."""
    if n < 2:
        return ()
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            p, q = players[k], players[m - 1 - k]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _rotation(theta):
    # smaller root of t^2 + 2 theta t - 1 = 0, safe for huge theta
    t = np.sign(theta) / (np.abs(theta) + np.hypot(1.0, theta))
    t = np.where(theta == 0, 1.0, t)
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c


def jacobi_eigh(A):
    """Eigenvalues (ascending) and eigenvectors of a symmetric matrix."""
    A = as_matrix(A, "A").copy()
    n = A.shape[0]
    if A.shape != (n, n):
        raise NonSquare(f"jacobi_eigh needs a square matrix, got {A.shape}")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if np.max(np.abs(A - A.T), initial=0.0) > 1e-12 * max(scale, 1e-300):
        raise NonSymmetric("jacobi_eigh needs a symmetric matrix")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    floor = EPS * EPS * max(scale, 1e-300)
    for _ in range(MAX_SWEEPS):
        rotated = False
        for P, Q in round_robin(n):
            apq = A[P, Q]
            app = A[P, P]
            aqq = A[Q, Q]
            act = np.abs(apq) > np.maximum(EPS * np.sqrt(np.abs(app * aqq)), floor)
            if not act.any():
                continue
            rotated = True
            P, Q, apq, app, aqq = P[act], Q[act], apq[act], app[act], aqq[act]
            c, s = _rotation((aqq - app) / (2.0 * apq))
            Ap, Aq = A[:, P].copy(), A[:, Q]
            A[:, P] = c * Ap - s * Aq
            A[:, Q] = s * Ap + c * Aq
            Ap, Aq = A[P, :].copy(), A[Q, :]
            A[P, :] = c[:, None] * Ap - s[:, None] * Aq
            A[Q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            Vp, Vq = V[:, P].copy(), V[:, Q]
            V[:, P] = c * Vp - s * Vq
            V[:, Q] = s * Vp + c * Vq
        if not rotated:
            break
    else:
        raise NoConvergence(-1, None, "two-sided Jacobi did not converge")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _one_sided(W):
    """Orthogonalize the columns of W in place; returns the accumulated rotation."""
    n = W.shape[1]
    J = np.eye(n)
    for _ in range(MAX_SWEEPS):
        rotated = False
        for P, Q in round_robin(n):
            Wp, Wq = W[:, P], W[:, Q]
            alpha = np.einsum("ij,ij->j", Wp, Wp)
            beta = np.einsum("ij,ij->j", Wq, Wq)
            gamma = np.einsum("ij,ij->j", Wp, Wq)
            act = np.abs(gamma) > EPS * np.sqrt(alpha * beta)
            if not act.any():
                continue
            rotated = True
            P, Q = P[act], Q[act]
            c, s = _rotation((beta[act] - alpha[act]) / (2.0 * gamma[act]))
            Wp, Wq = W[:, P], W[:, Q]
            W[:, P] = c * Wp - s * Wq
            W[:, Q] = s * Wp + c * Wq
            Jp, Jq = J[:, P].copy(), J[:, Q]
            J[:, P] = c * Jp - s * Jq
            J[:, Q] = s * Jp + c * Jq
        if not rotated:
            return J
    raise NoConvergence(-1, None, "one-sided Jacobi did not converge")


def _complete(B, sigma):
    """Normalize the columns of B and complete them to a square orthogonal matrix."""
    rows, k = B.shape
    smax = sigma.max() if sigma.size else 0.0
    good = sigma > max(rows, 1) * EPS * smax if smax > 0 else np.zeros(k, bool)
    Q = np.zeros((rows, rows))
    Q[:, :k][:, good] = B[:, good] / sigma[good]
    basis = Q[:, :k][:, good]
    # orthonormal complement of the well-defined columns
    full, _ = np.linalg.qr(np.column_stack([basis, np.eye(rows)]), mode="complete")
    comp = full[:, basis.shape[1]:]
    fill = np.flatnonzero(~good).tolist() + list(range(k, rows))
    Q[:, fill] = comp[:, :len(fill)]
    return Q


def jacobi_svd(A) -> SVDFactors:
    """Full SVD of a dense matrix by one-sided (Hestenes) Jacobi."""
    A = as_matrix(A, "A")
    m, n = A.shape
    if m <= n:
        W = A.T.copy()              # n x m, columns indexed like U
        U = _one_sided(W)
        sigma = np.sqrt(np.einsum("ij,ij->j", W, W))
        order = np.argsort(-sigma, kind="stable")
        sigma, U, W = sigma[order], U[:, order], W[:, order]
        V = _complete(W, sigma)
    else:
        W = A.copy()
        V = _one_sided(W)
        sigma = np.sqrt(np.einsum("ij,ij->j", W, W))
        order = np.argsort(-sigma, kind="stable")
        sigma, V, W = sigma[order], V[:, order], W[:, order]
        U = _complete(W, sigma)
    return SVDFactors(U, DiagRect(m, n, sigma), V)
