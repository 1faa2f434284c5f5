"""Rank-one updates of a singular value decomposition.

The update reduces to symmetric rank-one eigenproblems whose eigenvectors
are Cauchy-matrix products; those products run through a naive, a
polynomial (FAST) or a fast-multipole backend.
"""
from .cauchy import BackendChoice, CauchySystem, apply_ctilde, build_cauchy, cauchy_matvec_naive, column_norms
from .errors import *  # noqa: F401,F403
from .fast import fast_matvec
from .fmm import build_plan, fmm_evaluate, fmm_matvec
from .jacobi import jacobi_eigh, jacobi_svd
from .linalg import DiagRect, SVDFactors, orthogonality_defect, prepare_update, schur_sym_2x2
from .secular import SecularProblem, deflate, solve_secular
from .update import UpdateReport, align_signs, rank_one_sym_update, reconstruction_error, update_svd

__version__ = "0.1.0"
