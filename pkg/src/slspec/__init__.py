"""Spectra of Sturm-Liouville operators with regular but not strongly regular
boundary conditions: classification, eigenvalues, asymptotics and Riesz-basis
diagnostics."""

__version__ = "0.1.0"

from .asymptotics import (AsymptoticPrediction, Discriminant, Regime, SpectralReport, auto_regime,
                          discriminant, predict, residual_table, simplicity_report)
from .bc_model import (AdjointBC, BCCase, CanonicalBC, Family, GeneralBC, ThetaTriple, adjoint_of,
                       classify, classify_case, compute_theta, is_regular, is_regular_not_strongly,
                       reduce_to_canonical)
from .config import RunConfig, load_config
from .contour import Rect, count_zeros_rect, find_zeros
from .determinant import (DeterminantContext, DeterminantKind, Form, delta_closed, delta_exact,
                          delta_perturbation)
from .eig_solver import (Eigenpair, SearchWindow, SolverOptions, SpectralProblem, count_zeros,
                         eigenfunction, solve_window)
from .errors import *  # noqa: F401,F403
from .oracle import PencilProblem, build_pencil, oracle_eigs, pencil_det
from .potential import (Potential, Smoothness, Verdict, endpoint_condition, normalize_mean,
                        sine_decay_condition, trig_moments)
from .riesz_diag import RieszVerdict, pair_angle, riesz_verdict
