"""Cauchy products through polynomial arithmetic in the monomial basis.

``f(x) = sum_j u_j / (lam_j - x)`` is written as ``h(x) / g(x)`` with
``g(x) = prod_j (lam_j - x)``.  Since ``g(lam_j) = 0`` the numerator is
pinned down by its values at the poles, ``h(lam_j) = -u_j g'(lam_j)``, and
is recovered by interpolation.

Monomial coefficients of a degree-n polynomial with roots spread over
[-1, 1] lose roughly ``n log10(4)`` digits, so this path is only accurate
for small n.  Inputs are rescaled into [-1, 1] first and sizes above
``MAX_N`` are refused.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DuplicateNode, PoleCollision, UnsupportedSize

MAX_N = 512
FFT_THRESHOLD = 32


@dataclass(frozen=True)
class Poly:
    """Polynomial with ascending coefficients: ``coeffs[k]`` multiplies ``x**k``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=np.float64))
        nz = np.flatnonzero(c)
        c = c[:nz[-1] + 1] if nz.size else np.zeros(1)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, x):
        return multipoint_eval(self, x)


def _mul_schoolbook(a, b):
    return np.convolve(a, b)


def _mul_fft(a, b):
    size = a.size + b.size - 1
    nfft = 1 << (size - 1).bit_length()
    return np.fft.irfft(np.fft.rfft(a, nfft) * np.fft.rfft(b, nfft), nfft)[:size]


def _mul(a, b, fft_threshold):
    if min(a.size, b.size) - 1 >= fft_threshold:
        return _mul_fft(a, b)
    return _mul_schoolbook(a, b)


def poly_product_tree(lam, fft_threshold: int = FFT_THRESHOLD) -> Poly:
    """Coefficients of ``prod_j (lam_j - x)`` by balanced pairwise products."""
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    if lam.size == 0:
        return Poly(np.ones(1))
    level = [np.array([v, -1.0]) for v in lam]
    while len(level) > 1:
        nxt = [_mul(level[k], level[k + 1], fft_threshold)
               for k in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return Poly(level[0])


def poly_derivative(g: Poly) -> Poly:
    if g.degree == 0:
        return Poly(np.zeros(1))
    return Poly(g.coeffs[1:] * np.arange(1, g.coeffs.size))


def multipoint_eval(g: Poly, points) -> np.ndarray:
    """Horner's rule at every point."""
    x = np.asarray(points, dtype=np.float64)
    out = np.full(x.shape, g.coeffs[-1])
    for c in g.coeffs[-2::-1]:
        out = out * x + c
    return out


def _leja_order(xs):
    order = [int(np.argmax(np.abs(xs)))]
    dist = np.abs(xs - xs[order[0]])
    logprod = np.log(np.where(dist > 0, dist, 1.0))
    taken = np.zeros(xs.size, dtype=bool)
    taken[order[0]] = True
    for _ in range(xs.size - 1):
        score = np.where(taken, -np.inf, logprod)
        k = int(np.argmax(score))
        order.append(k)
        taken[k] = True
        d = np.abs(xs - xs[k])
        logprod += np.log(np.where(d > 0, d, 1.0))
    return np.array(order, dtype=np.intp)


def _newton_to_monomial(xs, Y):
    """Monomial coefficients (one row per right-hand side) of a Newton form."""
    k = xs.size
    P = np.zeros((Y.shape[0], k))
    P[:, 0] = Y[:, k - 1]
    for i in range(k - 2, -1, -1):
        # P <- P * (x - xs[i]) + Y[:, i]
        P[:, 1:] = P[:, :-1] - xs[i] * P[:, 1:]
        P[:, 0] = -xs[i] * P[:, 0] + Y[:, i]
    return P


def _interpolate_rows(xs, Y):
    if np.unique(xs).size != xs.size:
        raise DuplicateNode("interpolation nodes must be pairwise distinct")
    order = _leja_order(xs)
    xs = xs[order]
    D = Y[:, order].copy()
    # divided differences in place: D[:, j] becomes f[x_0, ..., x_j]
    for level in range(1, xs.size):
        D[:, level:] = (D[:, level:] - D[:, level - 1:-1]) / (xs[level:] - xs[:-level])
    return _newton_to_monomial(xs, D)


def interpolate(xs, ys) -> Poly:
    """The polynomial of degree < k through the k points ``(xs, ys)``."""
    xs = np.asarray(xs, dtype=np.float64).reshape(-1)
    ys = np.asarray(ys, dtype=np.float64).reshape(-1)
    if xs.size == 0:
        raise ValueError("interpolation needs at least one point")
    if xs.size != ys.size:
        raise DimensionMismatch("xs and ys differ in length")
    return Poly(_interpolate_rows(xs, ys[None, :])[0])


def fast_matvec(lam, mu, u) -> np.ndarray:
    """``out[..., i] = sum_j u[..., j] / (lam_j - mu_i)`` via ``h(mu) / g(mu)``."""
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    mu = np.asarray(mu, dtype=np.float64).reshape(-1)
    u = np.asarray(u, dtype=np.float64)
    single = u.ndim == 1
    U = np.atleast_2d(u)
    if U.shape[-1] != lam.size:
        raise DimensionMismatch(f"u has {U.shape[-1]} entries per row, expected {lam.size}")
    if lam.size > MAX_N:
        raise UnsupportedSize(f"the fast backend supports n <= {MAX_N}, got {lam.size}")
    if lam.size == 0:
        out = np.zeros((U.shape[0], mu.size))
        return out[0] if single else out
    if np.unique(lam).size != lam.size:
        raise DuplicateNode("poles must be pairwise distinct (deflate repeated values)")
    diff = lam[:, None] - mu[None, :]
    spacing = np.spacing(np.maximum(np.abs(lam)[:, None], np.abs(mu)[None, :]))
    bad = np.abs(diff) < spacing
    if bad.any():
        j, i = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise PoleCollision(int(i), int(j))

    both = np.concatenate([lam, mu])
    center = 0.5 * (both.max() + both.min())
    half = 0.5 * (both.max() - both.min())
    half = half if half > 0 else 1.0
    ls = (lam - center) / half
    ms = (mu - center) / half

    g = poly_product_tree(ls)
    dg = multipoint_eval(poly_derivative(g), ls)
    H = _interpolate_rows(ls, -U * dg)
    hv = np.zeros((U.shape[0], ms.size))
    for c in H.T[::-1]:
        hv = hv * ms + c[:, None]
    out = hv / multipoint_eval(g, ms) / half
    return out[0] if single else out
