"""Cauchy structure of the eigenvector update.

For ``B = diag(lam) + rho * abar abar^T`` with eigenvalues ``mu``, the
eigenvector belonging to ``mu_j`` is proportional to the column
``abar_i / (lam_i - mu_j)``.  Updating a basis ``U`` therefore costs one
product with the Cauchy matrix ``C[i, j] = 1 / (lam_i - mu_j)`` followed by
a column scaling.  This module holds the naive kernel, the column norms, and
the dispatch to the faster backends.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, PoleCollision, ZeroColumn

BACKENDS = ("naive", "fast", "fmm")
DEFAULT_EPSILON = 5.0 ** -20
_BLOCK_ELEMS = 1 << 21


@dataclass(frozen=True)
class BackendChoice:
    kind: str = "naive"
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.kind not in BACKENDS:
            raise ValueError(f"unknown backend {self.kind!r}; choose from {BACKENDS}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")

    @property
    def order(self):
        """Chebyshev order used by the fmm backend (None otherwise)."""
        if self.kind != "fmm":
            return None
        from .fmm import order_for_epsilon
        return order_for_epsilon(self.epsilon)


@dataclass(frozen=True)
class CauchySystem:
    lam: np.ndarray       # poles: old eigenvalues
    mu: np.ndarray        # nodes: new eigenvalues
    abar: np.ndarray      # projected update vector
    col_norms: np.ndarray

    @classmethod
    def build(cls, lam, mu, abar):
        lam = np.asarray(lam, dtype=np.float64)
        mu = np.asarray(mu, dtype=np.float64)
        abar = np.asarray(abar, dtype=np.float64)
        return cls(lam, mu, abar, column_norms(abar, lam, mu))


def _check_poles(diff, lam, mu_blk, col0):
    spacing = np.spacing(np.maximum(np.abs(lam)[:, None], np.abs(mu_blk)[None, :]))
    bad = np.abs(diff) < spacing
    if bad.any():
        i, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise PoleCollision(int(col0 + j), int(i))


def _column_blocks(n_rows, n_cols):
    step = max(1, _BLOCK_ELEMS // max(n_rows, 1))
    for start in range(0, n_cols, step):
        yield start, min(n_cols, start + step)


def build_cauchy(lam, mu) -> np.ndarray:
    """Dense ``C[i, j] = 1 / (lam_i - mu_j)``; meant for tests and oracles."""
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    mu = np.asarray(mu, dtype=np.float64).reshape(-1)
    diff = lam[:, None] - mu[None, :]
    _check_poles(diff, lam, mu, 0)
    return 1.0 / diff


def cauchy_matvec_naive(lam, mu, u) -> np.ndarray:
    """``out[..., i] = sum_j u[..., j] / (lam_j - mu_i)`` by direct summation.

    ``u`` may be a single vector or a stack of row vectors.
    """
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    mu = np.asarray(mu, dtype=np.float64).reshape(-1)
    u = np.asarray(u, dtype=np.float64)
    if u.shape[-1] != lam.size:
        raise DimensionMismatch(f"u has {u.shape[-1]} entries per row, expected {lam.size}")
    out = np.empty(u.shape[:-1] + (mu.size,))
    for a, b in _column_blocks(lam.size, mu.size):
        diff = lam[:, None] - mu[None, a:b]
        _check_poles(diff, lam, mu[a:b], a)
        out[..., a:b] = u @ (1.0 / diff)
    return out


def column_norms(abar, lam, mu) -> np.ndarray:
    """Euclidean norms of the columns of ``diag(abar) @ C``."""
    abar = np.asarray(abar, dtype=np.float64).reshape(-1)
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    mu = np.asarray(mu, dtype=np.float64).reshape(-1)
    if abar.size != lam.size:
        raise DimensionMismatch("abar and lam differ in length")
    a2 = abar * abar
    out = np.empty(mu.size)
    for a, b in _column_blocks(lam.size, mu.size):
        diff = lam[:, None] - mu[None, a:b]
        _check_poles(diff, lam, mu[a:b], a)
        out[a:b] = np.sqrt(a2 @ (1.0 / (diff * diff)))
    zero = np.flatnonzero(out == 0)
    if zero.size:
        raise ZeroColumn(f"column {int(zero[0])} of diag(abar) C vanishes")
    return out


def cauchy_product(lam, mu, U1, backend: BackendChoice) -> np.ndarray:
    """``U1 @ C`` through the selected Trummer's-problem backend."""
    if backend.kind == "naive":
        return cauchy_matvec_naive(lam, mu, U1)
    if backend.kind == "fast":
        from .fast import fast_matvec
        return fast_matvec(lam, mu, U1)
    from .fmm import fmm_matvec
    return fmm_matvec(lam, mu, U1, epsilon=backend.epsilon)


def normalize_signs(Q: np.ndarray) -> np.ndarray:
    """Flip columns in place so each one's largest-magnitude entry is positive."""
    if Q.size == 0:
        return Q
    rows = np.argmax(np.abs(Q), axis=0)
    neg = Q[rows, np.arange(Q.shape[1])] < 0
    Q[:, neg] *= -1.0
    return Q


def apply_ctilde(sys: CauchySystem, U, backend: BackendChoice = BackendChoice()) -> np.ndarray:
    """``U @ diag(abar) @ C @ diag(1 / col_norms)`` with normalized column signs."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or U.shape[1] != sys.lam.size:
        raise DimensionMismatch(
            f"U has shape {U.shape}, expected {sys.lam.size} columns")
    U1 = U * sys.abar
    U2 = cauchy_product(sys.lam, sys.mu, U1, backend)
    U2 /= sys.col_norms
    return normalize_signs(U2)
