"""Exact classification tools for graphed hypersurfaces with rank-1 Hessian.

Truncated power series, jet completion from the rank-1 minors, affine
normalization of graphs, infinitesimal symmetry solving, and scripted
classification trees over dimensions 2, 3 and 4.
"""

__version__ = "0.1.0"

from .affine import VectorField, lie_bracket, tangency_residual
from .branch import (BranchScript, ReplayReport, ScriptError,
                     load_branch_script, parse_branch_script,
                     run_branch_script)
from .equivalence import BookkeepingError, NormalizationState
from .hessian import HessianReport, check_hessian_rank1, rank1_complete
from .models import (ModelError, ModelSpec, ModelUsageError,
                     VerificationReport, get_model, load_catalog,
                     model_series, verify_model)
from .poly import ParamPoly, SolveError
from .series import JetTable, TruncatedSeries, jet_of, read_series, write_series
from .symmetry import (PropagationOutcome, SymmetryReport,
                       propagate_homogeneity, solve_symmetry)

__all__ = [
    "BookkeepingError",
    "BranchScript",
    "HessianReport",
    "JetTable",
    "ModelError",
    "ModelSpec",
    "ModelUsageError",
    "NormalizationState",
    "ParamPoly",
    "PropagationOutcome",
    "ReplayReport",
    "ScriptError",
    "SolveError",
    "SymmetryReport",
    "TruncatedSeries",
    "VectorField",
    "VerificationReport",
    "check_hessian_rank1",
    "get_model",
    "jet_of",
    "lie_bracket",
    "load_branch_script",
    "load_catalog",
    "model_series",
    "parse_branch_script",
    "propagate_homogeneity",
    "rank1_complete",
    "read_series",
    "run_branch_script",
    "solve_symmetry",
    "tangency_residual",
    "verify_model",
    "write_series",
]
