"""Randomized invariant checks behind the ``verify`` command."""
from dataclasses import dataclass

import numpy as np

from .cauchy import BackendChoice
from .errors import SvdStreamError
from .jacobi import jacobi_eigh, jacobi_svd
from .secular import SecularProblem, deflate, solve_secular
from .update import update_svd


@dataclass
class Check:
    name: str
    tol: float
    worst: float = 0.0
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.worst <= self.tol

    def see(self, value, note=""):
        if not value <= self.worst:   # also catches NaN
            self.worst = value if np.isfinite(value) else np.inf
            self.note = note


def random_secular_problem(n, rng):
    """Rank-one problem with some zero weights and some repeated poles."""
    d = rng.uniform(-1.0, 1.0, n)
    z = rng.standard_normal(n)
    if n >= 3:
        k = rng.integers(0, max(1, n // 4) + 1)
        z[rng.choice(n, size=k, replace=False)] = 0.0
        j = rng.choice(n, size=2, replace=False)
        d[j[1]] = d[j[0]]
    rho = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 2.0)
    return SecularProblem(np.sort(d), z, rho)


def check_secular(p: SecularProblem, checks):
    info, red = deflate(p)
    roots = solve_secular(red) if red.n else None
    mu = roots.mu if roots is not None else np.zeros(0)
    d = red.d
    znorm2 = float(red.z @ red.z)
    if mu.size:
        if p.rho > 0:
            upper = np.append(d[1:], d[-1] + p.rho * znorm2)
            bad = np.sum(mu <= d) + np.sum(mu >= upper)
        else:
            lower = np.insert(d[:-1], 0, d[0] + p.rho * znorm2)
            bad = np.sum(mu >= d) + np.sum(mu <= lower)
        checks["interlacing"].see(float(bad))
    eigs = np.sort(np.concatenate([mu, [e for _, e in info.deflated_eigs]]))
    total = p.d.sum() + p.rho * float(p.z @ p.z)
    scale = p.n + abs(p.rho) * float(p.z @ p.z)
    checks["trace"].see(abs(eigs.sum() - total) / scale)
    ref, _ = jacobi_eigh(p.dense())
    top = max(np.max(np.abs(ref)), 1e-300)
    checks["secular_oracle"].see(float(np.max(np.abs(eigs - ref)) / top))


def check_update(n, backend, rng, checks):
    A = rng.uniform(1.0, 9.0, (n, n))
    a = rng.uniform(1.0, 9.0, n)
    b = rng.uniform(1.0, 9.0, n)
    svd = jacobi_svd(A)
    try:
        new, report = update_svd(svd, a, b, backend, A=A)
    except SvdStreamError as exc:
        checks["reconstruction"].see(np.inf, f"update raised {type(exc).__name__}: {exc}")
        return
    checks["orthogonality"].see(max(report.orth_u, report.orth_v))
    checks["reconstruction"].see(report.error)
    checks["sigma_consistency"].see(report.sigma_consistency)
    ref = jacobi_svd(A + np.outer(a, b)).S.diag
    checks["singular_values"].see(float(np.max(np.abs(new.S.diag - ref)) / ref[0]))


def run_verify(n, trials, backend: BackendChoice, seed):
    """Run the invariant suite; returns the list of :class:`Check` results in order."""
    recon_tol = 1e-8 if backend.kind == "naive" else 1e-6
    checks = {c.name: c for c in (
        Check("interlacing", 0.0),
        Check("trace", 1e-10),
        Check("secular_oracle", 1e-9),
        Check("orthogonality", 1e-7),
        Check("reconstruction", recon_tol),
        Check("sigma_consistency", 1e-8),
        Check("singular_values", 1e-8),
    )}
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        check_secular(random_secular_problem(n, rng), checks)
        check_update(n, backend, rng, checks)
    return list(checks.values())
