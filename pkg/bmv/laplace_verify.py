"""f(t) = Tr exp(A - tB) computed directly and rebuilt from the measure, plus the
polynomial form of the positivity statement."""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import linalg

from bmv.config_manager import RunConfig
from bmv.errors import (
    BMVError,
    EigenSolverError,
    LabelingError,
    MonodromyError,
    ParameterError,
    PreconditionError,
    RadiusSearchError,
    TrackingError,
)
from bmv.matrix_core import HermitianPair, ReducedPair, reduce_pair
from bmv.measure import (
    MeasureRepresentation,
    assemble_measure,
    lemma1_residual,
    support_residual,
)
from bmv.spectral_curve import branch_diagnostics

logger = logging.getLogger(__name__)

PSD_TOL = 1e-12
MAX_POWER = 20
LEMMA1_POINTS = 5

Pair = Union[HermitianPair, ReducedPair]


@dataclass
class VerificationReport:
    t_grid: list
    f_direct: list
    f_from_measure: list
    max_rel_error: float
    lemma1_points: list
    lemma1_values: list
    lemma1_max: float
    min_density: float
    max_density: float
    positivity_pass: bool
    laplace_pass: bool
    lemma1_pass: bool
    tolerances: dict
    radius: Optional[float] = None
    nodes_count: Optional[int] = None
    precision: str = "double"
    shift: float = 0.0
    perturbation: float = 0.0
    derivative_error: float = 0.0
    support_residual: float = 0.0
    mass_error: float = 0.0
    monotonicity: list = field(default_factory=list)
    branch: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return self.positivity_pass and self.laplace_pass and self.lemma1_pass


def _hermitian_parts(pair: Pair) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(pair, ReducedPair):
        return pair.a_red, np.diag(pair.b_eigs)
    return pair.a, pair.b


def _spectrum(matrix: np.ndarray, vectors: bool = False):
    try:
        if vectors:
            return linalg.eigh(matrix)
        return linalg.eigvalsh(matrix)
    except linalg.LinAlgError as exc:
        raise EigenSolverError(f"Hermitian eigensolver failed: {exc}") from exc


def trace_exp(pair: Pair, t: float) -> float:
    """Tr exp(A - tB) from the spectrum of the Hermitian matrix A - tB."""
    a, b = _hermitian_parts(pair)
    nu = _spectrum(a - t * b)
    return float(np.sum(np.exp(nu)))


def trace_exp_derivative(pair: Pair, t: float) -> float:
    """d/dt Tr exp(A - tB) = -Tr(B exp(A - tB))."""
    a, b = _hermitian_parts(pair)
    nu, v = _spectrum(a - t * b, vectors=True)
    diag_b = np.real(np.einsum("ij,ik,kj->j", v.conj(), b, v))
    return float(-np.sum(np.exp(nu) * diag_b))


def derivative_from_measure(
    measure: MeasureRepresentation, t: float, order: int = 0, original: bool = False
) -> float:
    """f^(k)(t) = integral of (-s)^k exp(-s t) d mu(s).

    ``original`` measures s from the unshifted B, i.e. uses s - sigma.
    """
    if order < 0:
        raise ParameterError(f"derivative order must be >= 0, got {order}")
    offset = measure.shift if original and measure.coordinates == "reduced" else 0.0
    loc = measure.locations - offset
    s = measure.s_values - offset
    discrete = np.sum(measure.weights * (-loc) ** order * np.exp(-loc * t))
    continuous = np.sum(measure.quad_weights * measure.w_values * (-s) ** order * np.exp(-s * t))
    return float(discrete + continuous)


def laplace_of_measure(measure: MeasureRepresentation, t: float, original: bool = False) -> float:
    """sum_j weight_j exp(-b_j t) + integral of exp(-s t) w(s) ds on the stored samples."""
    return derivative_from_measure(measure, t, 0, original)


def absolute_monotonicity(
    measure: MeasureRepresentation,
    t_values,
    max_order: int = 4,
    original: bool = True,
) -> list:
    """Minimum over t of (-1)^k f^(k)(t), normalized by the same integral of |.|, per k.

    Non-negative entries mean f is absolutely monotone up to ``max_order`` on the grid.
    """
    offset = measure.shift if original and measure.coordinates == "reduced" else 0.0
    loc = measure.locations - offset
    s = measure.s_values - offset
    density = measure.quad_weights * measure.w_values
    minima = []
    for k in range(max_order + 1):
        worst = math.inf
        for t in t_values:
            signed = np.sum(measure.weights * loc**k * np.exp(-loc * t)) + np.sum(
                density * s**k * np.exp(-s * t)
            )
            scale = np.sum(measure.weights * np.abs(loc) ** k * np.exp(-loc * t)) + np.sum(
                np.abs(density) * np.abs(s) ** k * np.exp(-s * t)
            )
            worst = min(worst, float(signed / scale) if scale > 0 else 0.0)
        minima.append(worst)
    return minima


def t_grid(config: Optional[RunConfig] = None) -> np.ndarray:
    config = config or RunConfig()
    if config.t_spacing == "log":
        return np.logspace(math.log10(config.t_min), math.log10(config.t_max), config.t_count)
    return np.linspace(config.t_min, config.t_max, config.t_count)


def _lemma1_points(pair: ReducedPair) -> np.ndarray:
    b = pair.b_eigs
    if pair.n == 1:
        return b[0] * np.array([0.5, 0.75, 1.0, 1.25, 1.5])
    return np.linspace(b[0], b[-1], LEMMA1_POINTS + 2)[1:-1]


def _stage_of(exc: BMVError) -> str:
    if isinstance(exc, RadiusSearchError):
        return "radius"
    if isinstance(exc, (TrackingError, MonodromyError, EigenSolverError)):
        return "track"
    if isinstance(exc, LabelingError):
        return "label"
    return "density"


def verify(pair: HermitianPair, config: Optional[RunConfig] = None) -> VerificationReport:
    """Reduce, build the measure and compare both sides of the Laplace identity.

    Values are in reduced coordinates, i.e. for Tr exp(A - t(B + sigma)).
    """
    config = config or RunConfig()
    try:
        reduced = reduce_pair(pair, config.eps_split)
    except BMVError as exc:
        raise exc.with_stage("reduce")
    try:
        measure = assemble_measure(reduced, config)
    except BMVError as exc:
        raise exc.with_stage(_stage_of(exc))

    try:
        grid = t_grid(config)
        direct = np.array([trace_exp(reduced, t) for t in grid])
        rebuilt = np.array([laplace_of_measure(measure, t) for t in grid])
        max_rel = float(np.max(np.abs(direct - rebuilt) / direct))
        d_direct = np.array([trace_exp_derivative(reduced, t) for t in grid])
        d_rebuilt = np.array([derivative_from_measure(measure, t, 1) for t in grid])
        derivative_error = float(np.max(np.abs(d_direct - d_rebuilt) / np.abs(d_direct)))
        mass_error = abs(measure.total_mass() - trace_exp(reduced, 0.0)) / trace_exp(reduced, 0.0)
        monotonicity = absolute_monotonicity(measure, grid, max_order=4, original=False)
    except BMVError as exc:
        raise exc.with_stage("laplace")

    contour = measure.contour
    points = _lemma1_points(reduced)
    residuals = [lemma1_residual(contour, reduced, s) for s in points]
    lemma1_max = max(residuals)
    outside = support_residual(contour, reduced, float(reduced.b_eigs[-1]) + 1.0)

    min_w = measure.min_density()
    max_w = measure.max_density()
    positivity = min_w >= -config.tau_positivity * max(1.0, max_w)
    report = VerificationReport(
        t_grid=grid.tolist(),
        f_direct=direct.tolist(),
        f_from_measure=rebuilt.tolist(),
        max_rel_error=max_rel,
        lemma1_points=points.tolist(),
        lemma1_values=residuals,
        lemma1_max=lemma1_max,
        min_density=min_w,
        max_density=max_w,
        positivity_pass=bool(positivity),
        laplace_pass=bool(max_rel < config.tau_laplace),
        lemma1_pass=bool(lemma1_max < config.tau_lemma1),
        tolerances={
            "tau_laplace": config.tau_laplace,
            "tau_lemma1": config.tau_lemma1,
            "tau_positivity": config.tau_positivity,
            "tau_quad": config.tau_quad,
        },
        radius=measure.radius,
        nodes_count=measure.nodes_count,
        precision=measure.precision,
        shift=reduced.shift,
        perturbation=reduced.perturbation,
        derivative_error=derivative_error,
        support_residual=outside,
        mass_error=mass_error,
        monotonicity=monotonicity,
        branch=branch_diagnostics(contour, reduced).to_dict(),
        config=config.to_dict(),
    )
    if not report.all_passed:
        logger.warning(
            "verification failed: laplace %.3e, lemma1 %.3e, min density %.3e",
            max_rel,
            lemma1_max,
            min_w,
        )
    return report


def bmv_poly_coeffs(pair: HermitianPair, p: int) -> list:
    """Coefficients c_0..c_p of t -> Tr (A + tB)^p, lowest degree first.

    Expands (A + tB)^p one factor at a time: C_k <- C_k A + C_{k-1} B.
    """
    if not isinstance(p, (int, np.integer)) or not 1 <= p <= MAX_POWER:
        raise ParameterError(f"p must be an integer in [1, {MAX_POWER}], got {p!r}")
    lowest = float(_spectrum(pair.b)[0])
    if lowest < -PSD_TOL:
        raise PreconditionError(f"B is not positive semidefinite (lowest eigenvalue {lowest:.3e})")

    n = pair.n
    coeffs = [np.eye(n, dtype=complex)]
    for _ in range(p):
        nxt = [c @ pair.a for c in coeffs] + [np.zeros((n, n), dtype=complex)]
        for k in range(1, len(nxt)):
            nxt[k] = nxt[k] + coeffs[k - 1] @ pair.b
        coeffs = nxt
    return [float(np.real(np.trace(c))) for c in coeffs]


@dataclass
class PolynomialResult:
    """Coefficients of Tr (A + tB)^p and whether they passed the sign check."""

    p: int
    coefficients: list
    tolerance: float
    nonnegative: bool
    config: dict = field(default_factory=dict)


def coefficients_nonnegative(coeffs: list, tol: float = 1e-10) -> bool:
    scale = max(abs(c) for c in coeffs)
    return all(c >= -tol * scale for c in coeffs)


def report_to_dict(report: VerificationReport) -> dict:
    return {
        "t_grid": report.t_grid,
        "f_direct": report.f_direct,
        "f_from_measure": report.f_from_measure,
        "max_rel_error": report.max_rel_error,
        "lemma1_points": report.lemma1_points,
        "lemma1_values": report.lemma1_values,
        "lemma1_max": report.lemma1_max,
        "min_density": report.min_density,
        "max_density": report.max_density,
        "positivity_pass": report.positivity_pass,
        "laplace_pass": report.laplace_pass,
        "lemma1_pass": report.lemma1_pass,
        "all_passed": report.all_passed,
        "tolerances": report.tolerances,
        "radius": report.radius,
        "nodes_count": report.nodes_count,
        "precision": report.precision,
        "shift": report.shift,
        "perturbation": report.perturbation,
        "derivative_error": report.derivative_error,
        "support_residual": report.support_residual,
        "mass_error": report.mass_error,
        "monotonicity": report.monotonicity,
        "branch": report.branch,
        "config": report.config,
    }
