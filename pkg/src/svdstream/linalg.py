"""Small dense linear algebra kernels used by the update machinery.

Matrices are plain C-ordered ``float64`` numpy arrays.  Only the handful of
structured pieces the rank-one update needs live here: the rectangular
diagonal ``Sigma``, the closed-form 2x2 symmetric eigendecomposition, and
the preparatory products of the update.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NonFinite, NonSquare, NonSymmetric


def as_matrix(a, name="matrix") -> np.ndarray:
    """Return ``a`` as a finite, row-major 2-D float64 array."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite(f"{name} has non-finite entries")
    return m


def as_vector(v, name="vector") -> np.ndarray:
    x = np.ascontiguousarray(v, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise NonFinite(f"{name} has non-finite entries")
    return x


@dataclass(frozen=True)
class DiagRect:
    """``rows x cols`` matrix that is zero off the main diagonal."""

    rows: int
    cols: int
    diag: np.ndarray

    def __post_init__(self):
        d = as_vector(self.diag, "diag")
        if d.size != min(self.rows, self.cols):
            raise DimensionMismatch(
                f"diag has {d.size} entries, expected {min(self.rows, self.cols)}")
        if np.any(d < 0):
            raise ValueError("singular values must be nonnegative")
        object.__setattr__(self, "diag", d)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols))
        k = self.diag.size
        out[np.arange(k), np.arange(k)] = self.diag
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """``Sigma @ x`` for x of length ``cols``."""
        out = np.zeros(self.rows)
        k = self.diag.size
        out[:k] = self.diag * x[:k]
        return out

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        """``Sigma.T @ y`` for y of length ``rows``."""
        out = np.zeros(self.cols)
        k = self.diag.size
        out[:k] = self.diag * y[:k]
        return out


@dataclass(frozen=True)
class SVDFactors:
    """Full SVD ``A = U @ S @ V.T`` with ``U`` m x m and ``V`` n x n."""

    U: np.ndarray
    S: DiagRect
    V: np.ndarray

    @property
    def shape(self):
        return self.S.rows, self.S.cols

    def reconstruct(self) -> np.ndarray:
        k = self.S.diag.size
        return (self.U[:, :k] * self.S.diag) @ self.V[:, :k].T


class Schur2x2(NamedTuple):
    Q: np.ndarray
    rho1: float
    rho2: float


@dataclass(frozen=True)
class UpdateIngredients:
    b_tilde: np.ndarray
    a_tilde: np.ndarray
    beta: float
    alpha: float
    Du: np.ndarray
    Dv: np.ndarray


def _fix_sign(v):
    # largest-magnitude entry positive; ties resolved toward the first entry
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def schur_sym_2x2(M) -> Schur2x2:
    """Closed-form eigendecomposition ``M = Q diag(rho1, rho2) Q.T``, rho1 >= rho2."""
    M = np.asarray(M, dtype=np.float64)
    if M.shape != (2, 2):
        raise DimensionMismatch(f"expected a 2x2 matrix, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NonFinite("2x2 input has non-finite entries")
    scale = np.max(np.abs(M))
    if abs(M[0, 1] - M[1, 0]) > 1e-14 * scale:
        raise NonSymmetric("2x2 input is not symmetric")
    a, c = M[0, 0], M[1, 1]
    b = 0.5 * (M[0, 1] + M[1, 0])
    if b == 0.0:
        if a >= c:
            return Schur2x2(np.eye(2), float(a), float(c))
        return Schur2x2(np.array([[0.0, 1.0], [1.0, 0.0]]), float(c), float(a))

    mean = 0.5 * (a + c)
    radius = np.hypot(0.5 * (a - c), b)
    det = a * c - b * b
    # compute the larger-magnitude eigenvalue first, the other from the determinant
    if mean >= 0:
        rho1 = mean + radius
        rho2 = det / rho1
    else:
        rho2 = mean - radius
        rho1 = det / rho2
    # nearly equal eigenvalues can come out an ulp out of order
    rho2 = min(rho1, rho2)

    # eigenvector of rho1 from whichever row of (M - rho1 I) is better scaled
    v1 = np.array([b, rho1 - a])
    v2 = np.array([rho1 - c, b])
    v = v1 if np.hypot(*v1) >= np.hypot(*v2) else v2
    v = _fix_sign(v / np.hypot(*v))
    w = _fix_sign(np.array([-v[1], v[0]]))
    return Schur2x2(np.column_stack([v, w]), float(rho1), float(rho2))


def prepare_update(svd: SVDFactors, a, b) -> UpdateIngredients:
    """Products needed to split ``A + a b^T`` into symmetric rank-one updates."""
    m, n = svd.shape
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.size != m or b.size != n:
        raise DimensionMismatch(
            f"update vectors have lengths ({a.size}, {b.size}), expected ({m}, {n})")
    if m > n:
        raise DimensionMismatch("prepare_update expects m <= n")
    U, S, V = svd.U, svd.S, svd.V
    b_tilde = U @ S.matvec(V.T @ b)
    a_tilde = V @ S.rmatvec(U.T @ a)
    sig2 = S.diag ** 2
    Du = np.zeros(m)
    Du[:sig2.size] = sig2
    Dv = np.zeros(n)
    Dv[:sig2.size] = sig2
    return UpdateIngredients(b_tilde, a_tilde, float(b @ b), float(a @ a), Du, Dv)


def orthogonality_defect(M) -> float:
    """``max |M^T M - I|`` over all entries."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSquare(f"orthogonality defect needs a square matrix, got {M.shape}")
    if M.size == 0:
        return 0.0
    G = M.T @ M
    G[np.diag_indices_from(G)] -= 1.0
    return float(np.max(np.abs(G)))
