"""Representing measures of t -> Tr exp(A - tB) for Hermitian pairs (A, B)."""

from bmv.config_manager import ConfigurationManager, RunConfig
from bmv.laplace_verify import (
    VerificationReport,
    bmv_poly_coeffs,
    laplace_of_measure,
    trace_exp,
    verify,
)
from bmv.matrix_core import HermitianPair, ReducedPair, reduce_pair, validate_hermitian
from bmv.measure import MeasureRepresentation, assemble_measure, atoms, density_w
from bmv.spectral_curve import SpectralContour, choose_radius, label_branches, track_branches

__version__ = "0.1.0"

__all__ = [
    "ConfigurationManager",
    "RunConfig",
    "HermitianPair",
    "ReducedPair",
    "reduce_pair",
    "validate_hermitian",
    "SpectralContour",
    "choose_radius",
    "track_branches",
    "label_branches",
    "MeasureRepresentation",
    "assemble_measure",
    "atoms",
    "density_w",
    "VerificationReport",
    "trace_exp",
    "laplace_of_measure",
    "verify",
    "bmv_poly_coeffs",
]
