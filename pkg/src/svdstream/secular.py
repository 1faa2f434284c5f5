"""Eigenvalues of a diagonal matrix plus a symmetric rank-one term.

The eigenvalues of ``diag(d) + rho * z z^T`` are the zeros of the secular
function ``w(mu) = 1 + rho * sum(z_i^2 / (d_i - mu))``.  After deflation
(zero weights and repeated poles removed) there is exactly one zero between
consecutive poles, plus one beyond the last pole in the direction of
``rho``.

Each zero is located in a variable shifted to its nearest pole,
``mu = d[origin] + tau``, so that the differences ``d_j - mu`` used by the
iteration are formed without cancellation.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NonFinite, PoleHit

EPS = np.finfo(np.float64).eps
MAX_ITER = 100
DEFLATION_RTOL = 1e-12
# matrix entries handled per block while iterating many roots at once
_BLOCK_ELEMS = 1 << 21


@dataclass(frozen=True)
class SecularProblem:
    d: np.ndarray
    z: np.ndarray
    rho: float

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64).reshape(-1)
        z = np.asarray(self.z, dtype=np.float64).reshape(-1)
        if d.shape != z.shape:
            raise DimensionMismatch(f"d and z differ in length ({d.size} vs {z.size})")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(z)) and np.isfinite(self.rho)):
            raise NonFinite("secular problem has non-finite data")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def n(self) -> int:
        return self.d.size

    def dense(self) -> np.ndarray:
        """The matrix ``diag(d) + rho z z^T`` (for checks only)."""
        return np.diag(self.d) + self.rho * np.outer(self.z, self.z)


@dataclass(frozen=True)
class DeflatedProblem:
    """Bookkeeping of :func:`deflate`; all indices refer to the input problem."""

    active: np.ndarray
    deflated_eigs: list = field(default_factory=list)
    rotations: list = field(default_factory=list)
    permutation: np.ndarray = None

    def apply_rotations(self, Q: np.ndarray) -> None:
        """Rotate the columns of Q in place the way deflation rotated z."""
        for i, j, c, s in self.rotations:
            qi = Q[:, i].copy()
            qj = Q[:, j]
            Q[:, i] = c * qi - s * qj
            Q[:, j] = s * qi + c * qj


@dataclass(frozen=True)
class SecularRoots:
    mu: np.ndarray
    residuals: np.ndarray
    origin: np.ndarray = None   # index of the pole each root is measured from
    tau: np.ndarray = None      # mu - d[origin], computed without cancellation


def secular_eval(p: SecularProblem, mu: float) -> float:
    """``1 + rho * sum(z_i^2 / (d_i - mu))`` evaluated as written."""
    diff = p.d - mu
    live = p.z != 0
    spacing = np.spacing(np.maximum(np.abs(p.d), abs(mu)))
    hit = live & (np.abs(diff) < spacing)
    if hit.any():
        raise PoleHit(f"mu={mu!r} coincides with pole d[{int(np.argmax(hit))}]")
    return float(1.0 + p.rho * np.sum(p.z[live] ** 2 / diff[live]))


def default_deflation_tol(p: SecularProblem) -> float:
    if p.n == 0:
        return 0.0
    scale = max(np.max(np.abs(p.d)), abs(p.rho) * float(p.z @ p.z))
    return DEFLATION_RTOL * scale


def deflate(p: SecularProblem, tol: float = None):
    """Split off eigenpairs the rank-one term leaves untouched.

    A weight deflates when its coupling to the rest of the matrix,
    ``|rho z_i| * ||z||``, is at most ``tol``; poles closer than ``tol``
    are merged by a Givens rotation that moves all weight onto the later
    pole.  Returns ``(DeflatedProblem, reduced SecularProblem)``.
    """
    if tol is None:
        tol = default_deflation_tol(p)
    if tol < 0:
        raise ValueError("deflation tolerance must be nonnegative")
    perm = np.argsort(p.d, kind="stable")
    d = p.d[perm]
    z = p.z[perm].copy()
    znorm = float(np.sqrt(z @ z))
    small = np.abs(p.rho * z) * znorm <= tol

    active, deflated, rotations = [], [], []
    rep = None
    for k in range(d.size):
        if small[k]:
            deflated.append((int(perm[k]), float(d[k])))
            continue
        if rep is None:
            rep = k
            continue
        if d[k] - d[rep] <= tol:
            r = float(np.hypot(z[rep], z[k]))
            c, s = z[k] / r, z[rep] / r
            rotations.append((int(perm[rep]), int(perm[k]), float(c), float(s)))
            z[k], z[rep] = r, 0.0
            deflated.append((int(perm[rep]), float(d[rep])))
        else:
            active.append(rep)
        rep = k
    if rep is not None:
        active.append(rep)

    active = np.array(active, dtype=np.intp)
    info = DeflatedProblem(perm[active], deflated, rotations, perm)
    return info, SecularProblem(d[active], z[active], p.rho)


def solve_secular(p: SecularProblem) -> SecularRoots:
    """All zeros of the secular function of an already-deflated problem."""
    if p.rho == 0:
        raise ValueError("rho must be nonzero (a zero update is handled upstream)")
    n = p.n
    if n == 0:
        empty = np.zeros(0)
        return SecularRoots(empty, empty, np.zeros(0, np.intp), empty)
    if np.any(np.diff(p.d) <= 0):
        raise ValueError("solve_secular needs strictly increasing d (deflate first)")
    if np.any(p.z == 0):
        raise ValueError("solve_secular needs nonzero weights (deflate first)")
    if p.rho > 0:
        origin, tau, resid = _solve_positive(p.d, p.z * p.z, p.rho)
        mu = p.d[origin] + tau
        return SecularRoots(mu, resid, origin, tau)
    # reflect d -> -d to turn a negative rho into a positive one
    origin, tau, resid = _solve_positive(-p.d[::-1], (p.z * p.z)[::-1], -p.rho)
    origin = (n - 1 - origin)[::-1]
    tau = -tau[::-1]
    mu = p.d[origin] + tau
    return SecularRoots(mu, resid[::-1].copy(), origin, tau)


def _solve_positive(d, z2, rho):
    n = d.size
    origin = np.empty(n, dtype=np.intp)
    tau = np.empty(n)
    resid = np.empty(n)
    rows = max(1, _BLOCK_ELEMS // n)
    for start in range(0, n, rows):
        idx = np.arange(start, min(n, start + rows))
        origin[idx], tau[idx], resid[idx] = _solve_block(d, z2, rho, idx)
    return origin, tau, resid


def _solve_block(d, z2, rho, idx):
    """Safeguarded two-pole rational iteration for the roots ``idx``."""
    n = d.size
    k = idx.size
    last = idx == n - 1
    nxt = np.minimum(idx + 1, n - 1)
    gap = np.where(last, rho * z2.sum(), d[nxt] - d[idx])

    # decide which pole the root sits closer to from the sign at mid-interval
    half = 0.5 * gap
    delta_left = d[None, :] - d[idx][:, None]
    w_mid = 1.0 + rho * np.sum(z2 / (delta_left - half[:, None]), axis=1)
    use_right = (~last) & (w_mid < 0)

    org = np.where(use_right, nxt, idx)
    delta = np.where(use_right[:, None], d[None, :] - d[nxt][:, None], delta_left)
    del delta_left
    # pole positions bracketing the root, in the shifted variable
    pole_l = np.where(use_right, -gap, 0.0)
    pole_r = np.where(use_right, 0.0, gap)
    lo = np.where(use_right, -half, 0.0)
    hi = np.where(use_right, 0.0, np.where(last, gap, half))
    t = np.where(use_right, -half, np.where(last, gap, half))
    done = np.zeros(k, dtype=bool)
    resid = np.full(k, np.inf)
    for _ in range(MAX_ITER):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        ta = t[act]
        diff = (delta if act.size == k else delta[act]) - ta[:, None]
        terms = z2 / diff
        dterms = terms / diff
        # left part: poles at or below the root's own interval
        pos = idx[act]
        rr = np.arange(act.size)
        cs = np.cumsum(terms, axis=1)
        psi = rho * cs[rr, pos]
        phi = rho * cs[:, -1] - psi
        cs = np.cumsum(dterms, axis=1, out=cs)
        dpsi = rho * cs[rr, pos]
        dphi = rho * cs[:, -1] - dpsi
        del diff, terms, dterms, cs
        w = 1.0 + psi + phi
        # left terms are negative and right terms positive, so phi - psi = rho*sum|terms|
        bound = 1e-13 * (1.0 + phi - psi)
        resid[act] = np.abs(w)
        ok = np.abs(w) <= bound

        lo_a, hi_a = lo[act], hi[act]
        lo_a = np.where(w < 0, ta, lo_a)
        hi_a = np.where(w >= 0, ta, hi_a)
        lo[act], hi[act] = lo_a, hi_a

        x = _rational_step(ta, psi, dpsi, phi, dphi, pole_l[act], pole_r[act], last[act])
        inside = np.isfinite(x) & (x > lo_a) & (x < hi_a)
        x = np.where(inside, x, 0.5 * (lo_a + hi_a))
        tiny_step = np.abs(x - ta) <= 4 * EPS * np.abs(ta)
        collapsed = (hi_a - lo_a) <= 4 * EPS * np.maximum(np.abs(lo_a), np.abs(hi_a))
        finished = ok | tiny_step | collapsed
        t[act] = np.where(ok, ta, x)
        done[act] = finished
    if not done.all():
        bad = int(np.flatnonzero(~done)[0])
        raise NoConvergence(int(idx[bad]), (float(lo[bad]), float(hi[bad])))
    return org, t, resid


def _rational_step(t, psi, dpsi, phi, dphi, pole_l, pole_r, last):
    """Zero of the model ``c + b1/(pole_l - x) + b2/(pole_r - x)``.

    Each side of the secular sum is replaced by a single pole plus a constant
    that matches its value and slope at the current iterate.
    """
    el = pole_l - t
    er = pole_r - t
    b1 = dpsi * el * el
    b2 = np.where(last, 0.0, dphi * er * er)
    c = 1.0 + (psi - dpsi * el) + np.where(last, phi, phi - dphi * er)
    with np.errstate(divide="ignore", invalid="ignore"):
        # only the left pole exists for the outermost root
        x_last = pole_l + b1 / c
        A = c
        B = -c * (pole_l + pole_r) - b1 - b2
        C = c * pole_l * pole_r + b1 * pole_r + b2 * pole_l
        disc = np.sqrt(np.maximum(B * B - 4 * A * C, 0.0))
        q = -0.5 * (B + np.where(B >= 0, disc, -disc))
        r1 = q / A
        r2 = C / q
        inside1 = (r1 > pole_l) & (r1 < pole_r)
        x_two = np.where(inside1, r1, r2)
        x_lin = -C / B
        x_two = np.where(A == 0, x_lin, x_two)
    return np.where(last, np.where(c > 0, x_last, np.nan), x_two)
