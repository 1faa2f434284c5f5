"""One-dimensional fast multipole method for ``f(y) = sum_k alpha_k / (y - x_k)``.

The tree is a uniform binary subdivision of one interval that holds both
sources and targets.  Internally every coordinate is mapped so that a leaf
has unit width; since the kernel is homogeneous of degree -1 the far-field
part is rescaled once on output.

Expansions are Chebyshev values on ``t_i = cos((2i - 1) pi / (2p))``:

* far field of a cell (center ``x0``, half-width ``r``):
  ``Phi(t) = sum alpha t / (3r - t (x - x0))``, i.e. ``f`` sampled at
  ``x0 + 3r / t``;
* local field of a cell (center ``y0``): ``Psi(t) = f(y0 + r t)`` restricted
  to well-separated sources.

All shift and translation operators are Lagrange basis evaluations
``u_j(s(t_i))`` for the appropriate change of variable ``s``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InvalidOrder, PoleCollision

DEFAULT_EPSILON = 5.0 ** -20
# cached near-field kernel entries; larger plans rebuild blocks on the fly
_NEAR_CACHE_ELEMS = 1 << 24
# rows of charges pushed through the tree at once
_ROW_BLOCK_ELEMS = 1 << 22


def order_for_epsilon(epsilon: float) -> int:
    """Expansion order ``ceil(log_5(1/epsilon))``, at least 1."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    # the small slack keeps exact powers of 5 from rounding up
    return max(1, math.ceil(math.log(1.0 / epsilon, 5) - 1e-9))


@dataclass(frozen=True)
class ChebyshevGrid:
    p: int
    nodes: np.ndarray
    weights: np.ndarray   # barycentric weights

    def basis(self, t) -> np.ndarray:
        """Matrix ``B[k, j] = u_j(t_k)`` of Lagrange basis values."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        diff = t[:, None] - self.nodes[None, :]
        exact = diff == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            q = self.weights / diff
            B = q / q.sum(axis=1, keepdims=True)
        hit = exact.any(axis=1)
        if hit.any():
            B[hit] = exact[hit].astype(np.float64)
        return B


def chebyshev_grid(p: int) -> ChebyshevGrid:
    if p < 1:
        raise InvalidOrder(f"expansion order must be >= 1, got {p}")
    theta = (2 * np.arange(1, p + 1) - 1) * np.pi / (2 * p)
    w = np.sin(theta) * (-1.0) ** np.arange(p)
    return ChebyshevGrid(p, np.cos(theta), w)


@dataclass(frozen=True)
class FMMPlan:
    p: int
    s: int
    nlevs: int
    root_interval: tuple
    grid: ChebyshevGrid
    ML: np.ndarray
    MR: np.ndarray
    SL: np.ndarray
    SR: np.ndarray
    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    T4: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    src_order: np.ndarray      # sources sorted by leaf
    src_offsets: np.ndarray    # leaf c owns src_order[off[c]:off[c+1]]
    tgt_order: np.ndarray
    tgt_offsets: np.ndarray
    _far: list = field(repr=False)     # per leaf: sources -> Phi weights
    _local: list = field(repr=False)   # per leaf: Psi -> target values
    _near: list = field(repr=False)    # per leaf: cached near kernel or None
    _collision: tuple = field(default=None, repr=False)

    @property
    def ncells(self) -> int:
        return 1 << self.nlevs

    @property
    def leaf_width(self) -> float:
        lo, hi = self.root_interval
        return (hi - lo) / self.ncells

    def to_plan_coords(self, x):
        """Map original coordinates into the unit-leaf frame."""
        return (np.asarray(x, dtype=np.float64) - self.root_interval[0]) / self.leaf_width

    def cell_center(self, level: int, i: int) -> float:
        width = float(1 << (self.nlevs - level))
        return (i + 0.5) * width

    def cell_radius(self, level: int) -> float:
        return 0.5 * float(1 << (self.nlevs - level))

    def translation(self, offset: int) -> np.ndarray:
        """Far-to-local operator for a source cell ``offset`` cells away."""
        return {3: self.T1, 2: self.T2, -2: self.T3, -3: self.T4}[offset]

    @property
    def source_cells(self):
        """Per level, per cell arrays of source indices."""
        out = []
        for level in range(self.nlevs + 1):
            step = 1 << (self.nlevs - level)
            off = self.src_offsets
            out.append([self.src_order[off[c * step]:off[(c + 1) * step]]
                        for c in range(1 << level)])
        return out


def _leaf_sort(xi, ncells):
    leaf = np.clip(np.floor(xi).astype(np.intp), 0, ncells - 1)
    order = np.argsort(leaf, kind="stable")
    offsets = np.searchsorted(leaf[order], np.arange(ncells + 1))
    return order, offsets


def build_plan(sources, targets, epsilon: float = DEFAULT_EPSILON, p: int = None) -> FMMPlan:
    """Tree, expansion operators and per-leaf interaction blocks.

    ``p`` overrides the order derived from ``epsilon``.
    """
    x = np.asarray(sources, dtype=np.float64).reshape(-1)
    y = np.asarray(targets, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise EmptyInput("the FMM needs at least one source")
    if p is None:
        p = order_for_epsilon(epsilon)
    grid = chebyshev_grid(p)
    s = 2 * p
    nlevs = max(0, math.ceil(math.log2(x.size / s))) if x.size > s else 0

    both = np.concatenate([x, y])
    lo, hi = float(both.min()), float(both.max())
    margin = 1e-12 * max(hi - lo, abs(lo), abs(hi), 1e-300)
    lo, hi = lo - margin, hi + margin
    ncells = 1 << nlevs
    width = (hi - lo) / ncells

    t = grid.nodes
    B = grid.basis
    ML, MR = B(3 * t / (6 + t)), B(3 * t / (6 - t))
    SL, SR = B((t - 1) / 2), B((t + 1) / 2)
    T1, T2, T3, T4 = (B(3.0 / (t - 2 * d)) for d in (3, 2, -2, -3))

    xi = (x - lo) / width
    eta = (y - lo) / width
    src_order, src_off = _leaf_sort(xi, ncells)
    tgt_order, tgt_off = _leaf_sort(eta, ncells)

    near_total = 0
    for c in range(ncells):
        a, b = src_off[max(c - 1, 0)], src_off[min(c + 2, ncells)]
        near_total += (tgt_off[c + 1] - tgt_off[c]) * (b - a)
    cache_near = near_total <= _NEAR_CACHE_ELEMS

    far, local, near = [], [], []
    collision = None
    for c in range(ncells):
        si = src_order[src_off[c]:src_off[c + 1]]
        ti = tgt_order[tgt_off[c]:tgt_off[c + 1]]
        # leaf cells have center c + 1/2 and half-width 1/2 in plan units
        far.append(t[None, :] / (1.5 - t[None, :] * (xi[si] - (c + 0.5))[:, None])
                   if si.size else None)
        local.append(B(2.0 * (eta[ti] - (c + 0.5))) if ti.size else None)
        K = None
        if ti.size:
            nb = src_order[src_off[max(c - 1, 0)]:src_off[min(c + 2, ncells)]]
            if nb.size:
                diff = y[ti][:, None] - x[nb][None, :]
                spacing = np.spacing(np.maximum(np.abs(y[ti])[:, None], np.abs(x[nb])[None, :]))
                bad = np.abs(diff) < spacing
                if bad.any() and collision is None:
                    r, k = np.unravel_index(int(np.argmax(bad)), bad.shape)
                    collision = (int(ti[r]), int(nb[k]))
                if cache_near:
                    with np.errstate(divide="ignore"):
                        K = 1.0 / diff
        near.append(K)

    return FMMPlan(p, s, nlevs, (lo, hi), grid, ML, MR, SL, SR, T1, T2, T3, T4,
                   x, y, src_order, src_off, tgt_order, tgt_off, far, local, near,
                   collision)


@dataclass
class ExpansionSet:
    """Far-field (``phi``) and local (``psi``) expansions indexed by level.

    Each entry has shape ``(rows, 2**level, p)``; levels that carry no
    expansion are ``None``.
    """

    phi: list
    psi: list


def _as_rows(plan, alpha):
    a = np.asarray(alpha, dtype=np.float64)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    if a.ndim != 2 or a.shape[1] != plan.sources.size:
        raise DimensionMismatch(
            f"charges have shape {np.shape(alpha)}, expected (..., {plan.sources.size})")
    return a, single


def leaf_far_field(plan: FMMPlan, alpha) -> np.ndarray:
    """Leaf far-field expansions, shape ``(rows, ncells, p)``."""
    a, _ = _as_rows(plan, alpha)
    sorted_a = a[:, plan.src_order]
    off = plan.src_offsets
    phi = np.zeros((a.shape[0], plan.ncells, plan.p))
    for c, W in enumerate(plan._far):
        if W is not None:
            phi[:, c, :] = sorted_a[:, off[c]:off[c + 1]] @ W
    return phi


def upward_pass(plan: FMMPlan, phi_leaves) -> list:
    """Far-field expansions on every level, coarsest first."""
    phi = [None] * (plan.nlevs + 1)
    phi[plan.nlevs] = phi_leaves
    for level in range(plan.nlevs - 1, -1, -1):
        child = phi[level + 1]
        phi[level] = child[:, 0::2, :] @ plan.ML.T + child[:, 1::2, :] @ plan.MR.T
    return phi


def downward_pass(plan: FMMPlan, phi: list) -> list:
    """Local expansions from level 2 down to the leaves.

    A child collects its parent's local field plus the far fields of the
    children of its parent's neighbours that are not its own neighbours:
    offsets (-2, +2, +3) for a left child and (-3, -2, +2) for a right one.
    Cells outside the root contribute nothing.
    """
    psi = [None] * (plan.nlevs + 1)
    if plan.nlevs < 2:
        return psi
    rows = phi[plan.nlevs].shape[0]
    for level in range(2, plan.nlevs + 1):
        n = 1 << level
        cur = np.zeros((rows, n, plan.p))
        parent = psi[level - 1]
        if parent is not None:
            cur[:, 0::2, :] = parent @ plan.SL.T
            cur[:, 1::2, :] = parent @ plan.SR.T
        src = phi[level]
        for parity, offsets in ((0, (-2, 2, 3)), (1, (-3, -2, 2))):
            for d in offsets:
                first = parity
                while first + d < 0:
                    first += 2
                last = n - 1 if (n - 1) % 2 == parity else n - 2
                while last + d > n - 1:
                    last -= 2
                if first > last:
                    continue
                cells = slice(first, last + 1, 2)
                srcs = slice(first + d, last + d + 1, 2)
                cur[:, cells, :] += src[:, srcs, :] @ plan.translation(d).T
        psi[level] = cur
    return psi


def _evaluate_block(plan, a):
    rows = a.shape[0]
    phi = upward_pass(plan, leaf_far_field(plan, a))
    psi = downward_pass(plan, phi)
    leaf_psi = psi[plan.nlevs]
    scale = 1.0 / plan.leaf_width
    sorted_a = a[:, plan.src_order]
    soff, toff = plan.src_offsets, plan.tgt_offsets
    n = plan.ncells
    out_sorted = np.zeros((rows, plan.targets.size))
    for c in range(n):
        t0, t1 = toff[c], toff[c + 1]
        if t0 == t1:
            continue
        if leaf_psi is not None:
            out_sorted[:, t0:t1] = (leaf_psi[:, c, :] @ plan._local[c].T) * scale
        s0, s1 = soff[max(c - 1, 0)], soff[min(c + 2, n)]
        if s0 == s1:
            continue
        K = plan._near[c]
        if K is None:
            y = plan.targets[plan.tgt_order[t0:t1]]
            x = plan.sources[plan.src_order[s0:s1]]
            K = 1.0 / (y[:, None] - x[None, :])
        out_sorted[:, t0:t1] += sorted_a[:, s0:s1] @ K.T
    out = np.empty_like(out_sorted)
    out[:, plan.tgt_order] = out_sorted
    return out


def fmm_evaluate(plan: FMMPlan, alpha) -> np.ndarray:
    """``f(y_j) = sum_k alpha_k / (y_j - x_k)`` at every target of the plan.

    ``alpha`` may be one charge vector or a stack of them (one per row).
    """
    if plan._collision is not None:
        raise PoleCollision(*plan._collision)
    a, single = _as_rows(plan, alpha)
    rows = max(1, _ROW_BLOCK_ELEMS // max(plan.sources.size + plan.targets.size, 1))
    out = np.empty((a.shape[0], plan.targets.size))
    for start in range(0, a.shape[0], rows):
        out[start:start + rows] = _evaluate_block(plan, a[start:start + rows])
    return out[0] if single else out


def fmm_matvec(lam, mu, U1, epsilon: float = DEFAULT_EPSILON, p: int = None) -> np.ndarray:
    """Row-wise ``sum_j U1[r, j] / (lam_j - mu_i)`` with a single shared plan."""
    plan = build_plan(lam, mu, epsilon, p)
    return fmm_evaluate(plan, -np.asarray(U1, dtype=np.float64))
