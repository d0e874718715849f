"""The representing measure: atoms at the eigenvalues of B plus a density on [b_1, b_n].

The density is

    w(s) = (1 / 2 pi i) sum_{j: b_j < s} contour_integral exp(lambda_j(zeta) + s zeta) d zeta

over a circle enclosing every branch point. Each integral is a trapezoidal sum on the
contour nodes. The sum over all n branches vanishes, so the same value is also minus the
sum over {j: b_j > s}; the side with the smaller dynamic range is evaluated.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from bmv.config_manager import RunConfig
from bmv.errors import AccuracyError, DomainError, HermitianError, NumericError, ParameterError
from bmv.matrix_core import ReducedPair
from bmv.quadrature import circle_trapezoid, interval_rule
from bmv.spectral_curve import SpectralContour, lift_precision, search_contour

logger = logging.getLogger(__name__)

DOUBLE_DIGITS = 4.0
TARGET_DIGITS = 14
GUARD_DIGITS = 6
MIN_DPS = 30


@dataclass(frozen=True, eq=False)
class MeasureRepresentation:
    """Atoms, density samples and the bookkeeping needed to map back to the input B.

    ``s_values`` are the Chebyshev points of every interval (b_k, b_{k+1}) and
    ``quad_weights`` the matching Fejer weights, so the density integral of any smooth
    g is ``sum(quad_weights * g(s_values) * w_values)``.
    """

    atoms: list
    support: tuple
    s_values: np.ndarray
    w_values: np.ndarray
    quad_weights: np.ndarray
    shift: float
    points_per_interval: int = 0
    radius: Optional[float] = None
    nodes_count: Optional[int] = None
    precision: str = "double"
    perturbation: float = 0.0
    convergence: list = field(default_factory=list)
    coordinates: str = "reduced"
    contour: Optional[SpectralContour] = field(default=None, repr=False)

    @property
    def density_grid(self) -> list:
        return list(zip(self.s_values.tolist(), self.w_values.tolist()))

    @property
    def locations(self) -> np.ndarray:
        return np.array([loc for loc, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([weight for _, weight in self.atoms])

    def min_density(self) -> float:
        return float(np.min(self.w_values)) if self.w_values.size else 0.0

    def max_density(self) -> float:
        return float(np.max(np.abs(self.w_values))) if self.w_values.size else 0.0

    def total_mass(self) -> float:
        """mu([b_1, b_n]) = sum of atom weights + integral of w."""
        return float(np.sum(self.weights) + np.sum(self.quad_weights * self.w_values))

    def in_original_coordinates(self) -> "MeasureRepresentation":
        """The same measure with every location moved back by the shift sigma."""
        if self.coordinates == "original":
            return self
        sigma = self.shift
        return replace(
            self,
            atoms=[(loc - sigma, weight) for loc, weight in self.atoms],
            support=(self.support[0] - sigma, self.support[1] - sigma),
            s_values=self.s_values - sigma,
            coordinates="original",
        )


def atoms(pair: ReducedPair) -> list:
    """[(b_j, exp(a_jj))] in ascending b_j."""
    diag = np.diag(pair.a_red)
    if np.any(np.abs(diag.imag) >= 1e-12):
        raise HermitianError(
            "diagonal of the conjugated A is not real", float(np.max(np.abs(diag.imag)))
        )
    return [(float(b), float(math.exp(a))) for b, a in zip(pair.b_eigs, diag.real)]


def atoms_only(pair: ReducedPair) -> MeasureRepresentation:
    """The discrete part of the measure, with no contour work and no density samples."""
    empty = np.empty(0)
    return MeasureRepresentation(
        atoms=atoms(pair),
        support=(float(pair.b_eigs[0]), float(pair.b_eigs[-1])),
        s_values=empty,
        w_values=empty,
        quad_weights=empty,
        shift=pair.shift,
        perturbation=pair.perturbation,
    )


def _exponents(contour: SpectralContour, rows: np.ndarray, s: float) -> np.ndarray:
    return contour.branches[rows] + s * contour.nodes[np.newaxis, :]


def _scaled_mean(exps: np.ndarray, nodes: np.ndarray) -> tuple[complex, float]:
    """(1/N) sum_jk zeta_k exp(E_jk) as (sum, peak) with exp(peak) factored out."""
    peak = float(np.max(exps.real))
    total = np.sum(circle_trapezoid(np.exp(exps - peak), nodes)) / (2j * np.pi)
    return complex(total), peak


def _side(contour: SpectralContour, pair: ReducedPair, s: float) -> tuple[np.ndarray, float, float]:
    """Branch rows, sign and peak exponent of the cheaper of the two equivalent sums."""
    k = int(np.searchsorted(pair.b_eigs, s, side="left"))
    lower = np.arange(k)
    upper = np.arange(k, pair.n)
    peak_lower = float(np.max(_exponents(contour, lower, s).real)) if k else -math.inf
    peak_upper = float(np.max(_exponents(contour, upper, s).real)) if k < pair.n else -math.inf
    if peak_lower <= peak_upper:
        return lower, 1.0, peak_lower
    return upper, -1.0, peak_upper


def _cancellation_digits(contour: SpectralContour, pair: ReducedPair, s: float) -> float:
    _, _, peak = _side(contour, pair, s)
    return peak / math.log(10.0) + math.log10(contour.radius * (1.0 + contour.scale))


def working_precision(
    contour: SpectralContour,
    pair: ReducedPair,
    s_values: Sequence[float],
    precision: str = "auto",
) -> Optional[int]:
    """Decimal digits needed for the density sums, or None when double precision will do.

    The terms of a sum reach exp(peak) * R while the result is O(1), so about
    peak / ln 10 + log10(R (1 + max |lambda|)) digits are lost to cancellation.
    """
    if precision not in ("auto", "double", "mp"):
        raise ParameterError(f"precision must be auto, double or mp, got {precision!r}")
    if precision == "double" or len(s_values) == 0:
        return None
    digits = max(_cancellation_digits(contour, pair, float(s)) for s in s_values)
    if precision == "auto" and digits <= DOUBLE_DIGITS:
        return None
    return max(MIN_DPS, int(math.ceil(digits)) + TARGET_DIGITS + GUARD_DIGITS)


def _check_interior(pair: ReducedPair, s: float) -> None:
    if pair.n < 2 or not (pair.b_eigs[0] < s < pair.b_eigs[-1]):
        raise DomainError(
            f"s={s!r} is outside the open support ({pair.b_eigs[0]:.17g}, {pair.b_eigs[-1]:.17g})"
        )
    if np.any(pair.b_eigs == s):
        raise DomainError(f"s={s!r} coincides with an atom; the density is one-sided there")


class DensityEvaluator:
    """Evaluates w(s) on one labeled contour, in double or extended precision."""

    def __init__(
        self,
        contour: SpectralContour,
        pair: ReducedPair,
        s_values: Sequence[float],
        tau_im: float = 1e-8,
        precision: str = "auto",
    ):
        if not contour.is_labeled:
            raise ParameterError("density evaluation needs a labeled contour")
        self.contour = contour
        self.pair = pair
        self.tau_im = tau_im
        self.dps = working_precision(contour, pair, s_values, precision)
        self._lifted = None
        self._terms = None
        if self.dps is not None:
            self._lifted = lift_precision(contour, pair, self.dps)
            ctx = self._lifted.ctx
            self._terms = [
                [z * ctx.exp(lam) for z, lam in zip(self._lifted.nodes, row)]
                for row in self._lifted.values
            ]
            logger.debug("density sums in %d-digit arithmetic", self.dps)

    @property
    def precision_tag(self) -> str:
        return "double" if self.dps is None else f"mp{self.dps}"

    def _sum_double(self, rows: np.ndarray, s: float) -> complex:
        total, peak = _scaled_mean(_exponents(self.contour, rows, s), self.contour.nodes)
        return math.exp(peak) * total

    def _sum_mp(self, rows: np.ndarray, s: float) -> complex:
        ctx = self._lifted.ctx
        s_mp = ctx.mpf(s)
        factors = [ctx.exp(s_mp * z) for z in self._lifted.nodes]
        total = ctx.fsum(ctx.fdot(self._terms[j], factors) for j in rows)
        return complex(total / self.contour.nodes_count)

    def __call__(self, s: float) -> float:
        s = float(s)
        _check_interior(self.pair, s)
        rows, sign, _ = _side(self.contour, self.pair, s)
        value = sign * (self._sum_double(rows, s) if self._lifted is None else self._sum_mp(rows, s))
        if abs(value.imag) > self.tau_im * max(1.0, abs(value.real)):
            raise AccuracyError(
                f"density at s={s:.17g} has imaginary part {value.imag:.3e} "
                f"with {self.contour.nodes_count} nodes"
            )
        return value.real


def density_w(
    contour: SpectralContour,
    pair: ReducedPair,
    s: float,
    tau_im: float = 1e-8,
    precision: str = "auto",
) -> float:
    """w(s) for b_1 < s < b_n, s not an atom."""
    _check_interior(pair, float(s))
    return DensityEvaluator(contour, pair, [s], tau_im, precision)(s)


def sample_points(pair: ReducedPair, points_per_interval: int) -> tuple[np.ndarray, np.ndarray]:
    """Chebyshev points of each interval (b_k, b_{k+1}) and their Fejer weights."""
    if points_per_interval < 2:
        raise ParameterError(f"points_per_interval must be >= 2, got {points_per_interval}")
    nodes, weights = [], []
    for lo, hi in zip(pair.b_eigs[:-1], pair.b_eigs[1:]):
        x, q = interval_rule(float(lo), float(hi), points_per_interval)
        nodes.append(x)
        weights.append(q)
    if not nodes:
        return np.empty(0), np.empty(0)
    return np.concatenate(nodes), np.concatenate(weights)


def density_grid(
    contour: SpectralContour,
    pair: ReducedPair,
    points_per_interval: int,
    tau_im: float = 1e-8,
    precision: str = "auto",
) -> list:
    """[(s, w(s))] at the Chebyshev points of every interval between consecutive atoms."""
    s_values, _ = sample_points(pair, points_per_interval)
    if s_values.size == 0:
        return []
    evaluate = DensityEvaluator(contour, pair, s_values, tau_im, precision)
    return [(float(s), evaluate(s)) for s in s_values]


def _all_branch_sum(contour: SpectralContour, s: float) -> float:
    rows = np.arange(contour.n)
    total, _ = _scaled_mean(_exponents(contour, rows, s), contour.nodes)
    # |(1/N) sum zeta e^E| / (e^peak R) with e^peak cancelled
    return abs(total) / contour.radius


def lemma1_residual(contour: SpectralContour, pair: ReducedPair, s: float) -> float:
    """Normalized size of (1 / 2 pi i) sum over all branches of the contour integral.

    The exact value is 0 for every real s; the result is relative to the largest
    integrand magnitude times R.
    """
    if not contour.is_labeled:
        raise ParameterError("lemma1_residual needs a labeled contour")
    return _all_branch_sum(contour, float(s))


def support_residual(contour: SpectralContour, pair: ReducedPair, s: float) -> float:
    """The density formula evaluated outside (b_1, b_n), normalized like lemma1_residual."""
    s = float(s)
    if s <= pair.b_eigs[0]:
        return 0.0
    if s < pair.b_eigs[-1]:
        raise DomainError(f"s={s!r} lies inside the support")
    return _all_branch_sum(contour, s)


def _contour_for(
    pair: ReducedPair, config: RunConfig, nodes_count: int, radius: Optional[float]
) -> SpectralContour:
    return search_contour(
        pair,
        nodes_count,
        tau_closure=config.tau_closure,
        max_doublings=config.max_doublings,
        max_refinement=config.max_refinement,
        workers=config.workers,
        radius=radius,
    )


def assemble_measure(
    pair: ReducedPair,
    config: Optional[RunConfig] = None,
    radius: Optional[float] = None,
) -> MeasureRepresentation:
    """Atoms plus density, with the node count doubled until the density settles.

    Successive density grids must differ by less than tau_quad * max(1, max |w|).
    ``radius`` pins the contour instead of searching for one.
    """
    config = config or RunConfig()
    nodes_count = config.n_nodes_initial
    contour = _contour_for(pair, config, nodes_count, radius)
    base = dict(
        atoms=atoms(pair),
        support=(float(pair.b_eigs[0]), float(pair.b_eigs[-1])),
        shift=pair.shift,
        points_per_interval=config.points_per_interval,
        radius=contour.radius,
        perturbation=pair.perturbation,
    )
    if pair.n == 1:
        empty = np.empty(0)
        return MeasureRepresentation(
            s_values=empty,
            w_values=empty,
            quad_weights=empty,
            nodes_count=contour.nodes_count,
            contour=contour,
            **base,
        )

    s_values, quad_weights = sample_points(pair, config.points_per_interval)
    trace: list = []
    previous: Optional[np.ndarray] = None
    while True:
        current: Optional[np.ndarray] = None
        try:
            evaluate = DensityEvaluator(contour, pair, s_values, config.tau_im, config.precision)
            current = np.array([evaluate(s) for s in s_values])
        except AccuracyError as exc:
            logger.debug("N=%d: %s", nodes_count, exc)
            trace.append(math.inf)

        if current is not None and previous is not None:
            delta = float(np.max(np.abs(current - previous)))
            trace.append(delta)
            logger.debug("N=%d: max |dw| = %.3e", nodes_count, delta)
            if delta < config.tau_quad * max(1.0, float(np.max(np.abs(current)))):
                break
        previous = current

        if 2 * nodes_count > config.n_nodes_max:
            raise AccuracyError(
                f"density did not converge with up to {nodes_count} nodes "
                f"(changes per doubling: {trace})",
                trace,
            )
        nodes_count *= 2
        try:
            contour = _contour_for(pair, config, nodes_count, contour.radius)
        except NumericError as exc:
            raise exc.with_stage("track")

    return MeasureRepresentation(
        s_values=s_values,
        w_values=current,
        quad_weights=quad_weights,
        nodes_count=nodes_count,
        precision=evaluate.precision_tag,
        convergence=trace,
        contour=contour,
        **base,
    )
