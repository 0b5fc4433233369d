"""Linear and eventual linear ranking functions for single-path linear constraint loops."""

from .detect import (
    Case,
    Certificate,
    IncSpace,
    Kind,
    detect_affine,
    detect_elrf,
    detect_elrf_given_f,
    detect_lrf,
    inc_space,
    lrf_space,
)
from .errors import ElrfError, PreconditionError, ResourceError, SolverError, StructuralError
from .fm import equivalent, fm_project, remove_redundant
from .linear import Constraint, LinExpr, Polyhedron, Rel
from .loop import CandidateFn, SlcLoop, affine_lift, body_satisfiable, canonicalize
from .lp import LpStatus, lp_solve
from .oracle import check_certificate_on_traces, random_loop
from .verify import find_threshold, verify_certificate, verify_elrf, verify_increasing, verify_lrf

__all__ = [
    "Case", "Certificate", "IncSpace", "Kind", "detect_affine", "detect_elrf",
    "detect_elrf_given_f", "detect_lrf", "inc_space", "lrf_space", "ElrfError",
    "PreconditionError", "ResourceError", "SolverError", "StructuralError", "equivalent",
    "fm_project", "remove_redundant", "Constraint", "LinExpr", "Polyhedron", "Rel",
    "CandidateFn", "SlcLoop", "affine_lift", "body_satisfiable", "canonicalize",
    "LpStatus", "lp_solve", "check_certificate_on_traces", "random_loop", "find_threshold",
    "verify_certificate", "verify_elrf", "verify_increasing", "verify_lrf",
]
