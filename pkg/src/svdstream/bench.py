"""Timing and accuracy records for the benchmark command.

Each trial builds an exactly known SVD ``A = H_u diag(sigma) H_v`` from two
Householder reflectors, so no dense factorization is needed even at large
``n``.  Singular values are ``sqrt`` of uniform draws, which spreads the
eigenvalues ``sigma^2`` evenly over [0, 1].
"""
from dataclasses import dataclass, fields
import time

import numpy as np

from .cauchy import BackendChoice, cauchy_product
from .errors import UnsupportedSize
from .linalg import DiagRect, SVDFactors
from .update import update_svd

CSV_COLUMNS = ("n", "m", "backend", "p", "t_prepare_ns", "t_secular_ns", "t_matvec_ns",
               "t_total_ns", "error", "orth_u", "orth_v", "sigma_consistency")
CSV_HEADER = ",".join(CSV_COLUMNS)


@dataclass
class BenchRecord:
    n: int
    m: int
    backend: str
    p: int = None
    t_prepare_ns: int = None
    t_secular_ns: int = None
    t_matvec_ns: int = None
    t_total_ns: int = None
    error: float = None
    orth_u: float = None
    orth_v: float = None
    sigma_consistency: float = None

    def csv_row(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                out.append("")
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        return ",".join(out)


def record_from_report(m, n, backend: BackendChoice, report) -> BenchRecord:
    t = report.timings

    def num(x):
        return None if x is None or np.isnan(x) else float(x)

    return BenchRecord(n, m, backend.kind, backend.order, t["prepare"], t["secular"],
                       t["matvec"], t["total"], num(report.error), num(report.orth_u),
                       num(report.orth_v), num(report.sigma_consistency))


def _reflector(n, rng):
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    H = -2.0 * np.outer(v, v)
    H[np.diag_indices(n)] += 1.0
    return H


def synthetic_problem(n, rng):
    """``(svd, a, b)`` with known factors and update vectors of unit scale."""
    U = _reflector(n, rng)
    V = _reflector(n, rng)
    sigma = np.sort(np.sqrt(rng.uniform(0.0, 1.0, n)))[::-1]
    a = rng.standard_normal(n) / np.sqrt(n)
    b = rng.standard_normal(n) / np.sqrt(n)
    return SVDFactors(U, DiagRect(n, n, sigma), V), a, b


def interlaced_nodes(lam, rng):
    """Targets placed strictly inside each gap of the sorted poles (and one past the end)."""
    lam = np.sort(lam)
    gaps = np.diff(lam)
    last = gaps.mean() if gaps.size else 1.0
    gaps = np.append(gaps, last)
    return lam, lam + gaps * rng.uniform(0.1, 0.9, lam.size)


def time_matvec(lam, mu, u, backend: BackendChoice) -> int:
    """Nanoseconds for one Trummer product of length n, plan building included."""
    t0 = time.perf_counter_ns()
    cauchy_product(lam, mu, u[None, :], backend)
    return time.perf_counter_ns() - t0


def run_trial(n, backend: BackendChoice, seed, repeat, max_update_n=1024,
              max_error_n=512) -> BenchRecord:
    """One CSV row: a single Cauchy product plus (for small n) a full update."""
    rng = np.random.default_rng([seed, n, repeat])
    svd, a, b = synthetic_problem(n, rng)
    lam, mu = interlaced_nodes(svd.S.diag ** 2, rng)
    u = rng.standard_normal(n)
    rec = BenchRecord(n, n, backend.kind, backend.order)
    try:
        rec.t_matvec_ns = time_matvec(lam, mu, u, backend)
        if n <= max_update_n:
            _, report = update_svd(svd, a, b, backend, metrics=n <= max_error_n)
            full = record_from_report(n, n, backend, report)
            full.t_matvec_ns = rec.t_matvec_ns
            rec = full
    except UnsupportedSize:
        rec = BenchRecord(n, n, backend.kind, backend.order)
    return rec


def run_bench(sizes, backends, repeat, seed, max_update_n=1024, max_error_n=512):
    """Yield one record per (size, backend, repeat)."""
    for n in sizes:
        for be in backends:
            for r in range(repeat):
                yield run_trial(n, be, seed, r, max_update_n, max_error_n)
