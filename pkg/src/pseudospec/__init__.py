"""Non-Hermitian Schrodinger operators with real spectra from a generating function."""

from .eigen import SpectrumReport, eigenvalues, eigenvector, spectrum_report
from .expr import Expr, differentiate, evaluate, parse
from .grid import ComplexField, Grid, cumulative_integral, l2_norm_growth
from .model import (
    Classification,
    ModelSpec,
    Verdict,
    candidate_eigenfunction,
    check_identities,
    classify,
    fsq_minus_fprime,
    potential,
    superpotential_f,
)

__version__ = "0.1.0"

__all__ = [
    "Classification", "ComplexField", "Expr", "Grid", "ModelSpec", "SpectrumReport",
    "Verdict", "candidate_eigenfunction", "check_identities", "classify",
    "cumulative_integral", "differentiate", "eigenvalues", "eigenvector", "evaluate",
    "fsq_minus_fprime", "l2_norm_growth", "parse", "potential", "spectrum_report",
    "superpotential_f",
]
