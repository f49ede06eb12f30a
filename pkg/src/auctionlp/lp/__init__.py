"""Exact-rational linear programming with verified certificates."""

from ._kernel import KERNEL
from .program import (
    INFEASIBLE,
    MAX,
    MIN,
    OPTIMAL,
    UNBOUNDED,
    CertificateError,
    LinearProgram,
    LpCertificate,
    dual_of,
    export_lp_text,
    make_lp,
    recheck_certificate,
)
from .simplex import BACKEND, BLAND, DANTZIG, solve

__all__ = [
    "BACKEND",
    "BLAND",
    "DANTZIG",
    "INFEASIBLE",
    "KERNEL",
    "MAX",
    "MIN",
    "OPTIMAL",
    "UNBOUNDED",
    "CertificateError",
    "LinearProgram",
    "LpCertificate",
    "dual_of",
    "export_lp_text",
    "make_lp",
    "recheck_certificate",
    "solve",
]
