"""Eigenvalue branches of the pencil A - zeta B along a circle.

The branches lambda_j(zeta) solve det(lambda I - A + zeta B) = 0. Outside a disc that
holds all branch points they are single valued with
lambda_j(zeta) = -b_j zeta + a_jj + O(1/zeta). This module finds such a circle,
continues the n branches around it and labels them by their slope.
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np
from mpmath.ctx_mp import MPContext
from scipy.optimize import linear_sum_assignment

from bmv.errors import (
    EigenSolverError,
    LabelingError,
    MonodromyError,
    NumericError,
    ParameterError,
    RadiusSearchError,
    TrackingError,
)
from bmv.matrix_core import ReducedPair
from bmv.quadrature import circle_nodes, is_power_of_two

logger = logging.getLogger(__name__)

DEFAULT_NODES = 256
MIN_NODES = 64
TAU_CLOSURE = 1e-10
POLISH_TOL = 1e-14
POLISH_ITERATIONS = 5
MAX_REFINEMENT = 10
MAX_DOUBLINGS = 20
AMBIGUITY_RATIO = 2.0


@dataclass(frozen=True, eq=False)
class SpectralContour:
    """Branch values on the circle of the given radius.

    ``branches[j, k]`` is lambda_j(nodes[k]). Once labeled, row j is the branch whose
    slope is -b_j, ``labels[i]`` is the b-index of the i-th tracked branch and
    ``diag_estimates[j]`` the recovered a_jj.
    """

    radius: float
    nodes: np.ndarray
    branches: np.ndarray
    derivatives: np.ndarray
    closure_residual: float = 0.0
    labels: Optional[np.ndarray] = None
    slopes: Optional[np.ndarray] = None
    diag_estimates: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.branches.shape[0]

    @property
    def nodes_count(self) -> int:
        return self.nodes.shape[0]

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    @property
    def scale(self) -> float:
        """max |lambda| on the contour, at least 1."""
        return max(1.0, float(np.max(np.abs(self.branches))))

    def min_separation(self) -> float:
        if self.n < 2:
            return math.inf
        diff = np.abs(self.branches[:, None, :] - self.branches[None, :, :])
        idx = np.arange(self.n)
        diff[idx, idx, :] = np.inf
        return float(np.min(diff))


@dataclass(frozen=True)
class BranchDiagnostics:
    """Relative residuals of the branch invariants on one contour."""

    trace: float
    conjugate: float
    closure: float
    multiset: float
    determinant: float

    def to_dict(self) -> dict:
        return {
            "trace": self.trace,
            "conjugate": self.conjugate,
            "closure": self.closure,
            "multiset": self.multiset,
            "determinant": self.determinant,
        }


def pencil_eigenvalues(pair: ReducedPair, zeta: complex) -> np.ndarray:
    """The n eigenvalues of a_red - zeta diag(b_eigs), unordered."""
    try:
        values = np.linalg.eigvals(pair.pencil(zeta))
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigenvalue solver failed at zeta={zeta}: {exc}", node=zeta) from exc
    if not np.all(np.isfinite(values)):
        raise EigenSolverError(f"non-finite eigenvalues at zeta={zeta}", node=zeta)
    return values


def _eigen_block(pair: ReducedPair, zetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and their zeta-derivatives at a batch of nodes, shape (len(zetas), n)."""
    b = pair.b_eigs
    stack = pair.a_red[np.newaxis, :, :] - zetas[:, np.newaxis, np.newaxis] * np.diag(b)
    try:
        values, vectors = np.linalg.eig(stack)
        left = np.linalg.inv(vectors)
    except np.linalg.LinAlgError as exc:
        for zeta in zetas:
            pencil_eigenvalues(pair, zeta)
        raise EigenSolverError(f"eigenvector basis is singular on the arc: {exc}") from exc
    # d lambda_j / d zeta = -(V^-1 B V)_jj for the pencil A - zeta B
    derivatives = -np.einsum("kji,i,kij->kj", left, b, vectors)
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(derivatives))):
        bad = int(np.argmax(~np.all(np.isfinite(values), axis=1)))
        raise EigenSolverError("non-finite eigen-decomposition", node=complex(zetas[bad]))
    return values, derivatives


def _eigensystem(
    pair: ReducedPair, zetas: np.ndarray, workers: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    if workers <= 1 or len(zetas) < 2 * workers:
        return _eigen_block(pair, zetas)
    chunks = np.array_split(zetas, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda chunk: _eigen_block(pair, chunk), chunks))
    return (
        np.concatenate([p[0] for p in parts], axis=0),
        np.concatenate([p[1] for p in parts], axis=0),
    )


def _match(predicted: np.ndarray, candidates: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    cost = np.abs(predicted[:, np.newaxis] - candidates[np.newaxis, :])
    rows, cols = linear_sum_assignment(cost)
    order = np.empty_like(cols)
    order[rows] = cols
    return order, float(cost[rows, cols].sum()), cost


def _is_ambiguous(cost: np.ndarray, order: np.ndarray, best: float) -> bool:
    """True when the second-best assignment costs less than AMBIGUITY_RATIO x best."""
    n = len(order)
    if n < 2:
        return False
    idx = np.arange(n)
    chosen = cost[idx, order]
    masked = cost.copy()
    masked[idx, order] = np.inf
    gains = np.sort(masked.min(axis=1) - chosen)
    # any other assignment moves at least two rows
    bound = best + gains[0] + gains[1] + np.minimum(gains[2:], 0.0).sum()
    if bound >= AMBIGUITY_RATIO * best:
        return False

    second = math.inf
    for i in range(n):
        forbidden = cost.copy()
        forbidden[i, order[i]] = np.inf
        rows, cols = linear_sum_assignment(forbidden)
        second = min(second, float(forbidden[rows, cols].sum()))
    return second < AMBIGUITY_RATIO * best


class _Tracker:
    """Sequential continuation sweep with local midpoint refinement."""

    def __init__(self, pair: ReducedPair, radius: float, max_refinement: int):
        self.pair = pair
        self.radius = radius
        self.max_refinement = max_refinement
        self.refinements = 0

    def advance(
        self,
        values: np.ndarray,
        derivatives: np.ndarray,
        theta0: float,
        theta1: float,
        zeta0: complex,
        zeta1: complex,
        target: tuple[np.ndarray, np.ndarray],
        level: int = 0,
    ) -> tuple[np.ndarray, np.ndarray]:
        predicted = values + derivatives * (zeta1 - zeta0)
        order, best, cost = _match(predicted, target[0])
        if not _is_ambiguous(cost, order, best):
            return target[0][order], target[1][order]

        if level >= self.max_refinement:
            raise TrackingError(
                f"ambiguous branch matching on arc theta in [{theta0:.6g}, {theta1:.6g}] "
                f"after {level} refinements",
                arc=(theta0, theta1),
            )
        self.refinements += 1
        theta_mid = 0.5 * (theta0 + theta1)
        zeta_mid = self.radius * complex(math.cos(theta_mid), math.sin(theta_mid))
        mid_values, mid_derivatives = _eigen_block(self.pair, np.array([zeta_mid]))
        mid = (mid_values[0], mid_derivatives[0])
        values, derivatives = self.advance(
            values, derivatives, theta0, theta_mid, zeta0, zeta_mid, mid, level + 1
        )
        return self.advance(
            values, derivatives, theta_mid, theta1, zeta_mid, zeta1, target, level + 1
        )


def polish_branches(
    pair: ReducedPair,
    nodes: np.ndarray,
    branches: np.ndarray,
    max_iter: int = POLISH_ITERATIONS,
    tol: float = POLISH_TOL,
) -> np.ndarray:
    """Newton refinement of every branch value on det(lambda I - A + zeta B).

    p'/p = Tr((lambda I - M)^-1), so each step is lambda -= 1 / Tr((lambda I - M)^-1).
    A step larger than a quarter of the distance to the nearest other branch is rejected.
    """
    n = branches.shape[0]
    lam = branches.T.copy()
    stack = pair.a_red[np.newaxis, :, :] - nodes[:, np.newaxis, np.newaxis] * np.diag(pair.b_eigs)
    eye = np.eye(n)
    if n > 1:
        diff = np.abs(lam[:, :, np.newaxis] - lam[:, np.newaxis, :])
        diff[:, np.arange(n), np.arange(n)] = np.inf
        guard = 0.25 * diff.min(axis=2)
    else:
        guard = np.full(lam.shape, np.inf)

    active = np.ones(lam.shape, dtype=bool)
    for _ in range(max_iter):
        shifted = lam[:, :, np.newaxis, np.newaxis] * eye - stack[:, np.newaxis, :, :]
        with np.errstate(all="ignore"):
            traces = _inverse_traces(shifted)
            step = 1.0 / traces
        accept = active & np.isfinite(step) & (np.abs(step) <= guard)
        lam = np.where(accept, lam - step, lam)
        active = accept & (np.abs(step) > tol * np.maximum(1.0, np.abs(lam)))
        if not active.any():
            break
    return lam.T


def _inverse_traces(shifted: np.ndarray) -> np.ndarray:
    try:
        return np.trace(np.linalg.inv(shifted), axis1=-2, axis2=-1)
    except np.linalg.LinAlgError:
        pass
    # an exactly singular shift means the value is already an exact eigenvalue
    flat = shifted.reshape((-1,) + shifted.shape[-2:])
    out = np.full(flat.shape[0], np.nan, dtype=complex)
    for i, m in enumerate(flat):
        try:
            out[i] = np.trace(np.linalg.inv(m))
        except np.linalg.LinAlgError:
            continue
    return out.reshape(shifted.shape[:-2])


def track_branches(
    pair: ReducedPair,
    radius: float,
    nodes_count: int = DEFAULT_NODES,
    tau_closure: float = TAU_CLOSURE,
    max_refinement: int = MAX_REFINEMENT,
    workers: int = 1,
) -> SpectralContour:
    """Continue the n branches once around the circle |zeta| = radius (unlabeled)."""
    if radius <= 0 or not math.isfinite(radius):
        raise ParameterError(f"radius must be positive, got {radius}")
    if nodes_count < MIN_NODES or not is_power_of_two(nodes_count):
        raise ParameterError(f"nodes_count must be a power of two >= {MIN_NODES}, got {nodes_count}")

    nodes = circle_nodes(radius, nodes_count)
    values, derivatives = _eigensystem(pair, nodes, workers)

    # deterministic start: sort by the slope estimate -lambda / zeta at zeta = R
    start = np.argsort(np.real(-values[0] / nodes[0]), kind="stable")
    current = values[0][start]
    current_der = derivatives[0][start]
    branches = np.empty((pair.n, nodes_count), dtype=complex)
    branch_der = np.empty((pair.n, nodes_count), dtype=complex)
    branches[:, 0] = current
    branch_der[:, 0] = current_der

    tracker = _Tracker(pair, radius, max_refinement)
    step = 2.0 * math.pi / nodes_count
    for k in range(1, nodes_count + 1):
        idx = k % nodes_count
        current, current_der = tracker.advance(
            current,
            current_der,
            (k - 1) * step,
            k * step,
            nodes[k - 1],
            nodes[idx],
            (values[idx], derivatives[idx]),
        )
        if idx:
            branches[:, idx] = current
            branch_der[:, idx] = current_der

    scale = max(1.0, float(np.max(np.abs(branches))))
    closure = float(np.max(np.abs(current - branches[:, 0]))) / scale
    if tracker.refinements:
        logger.debug("radius %.6g: %d local refinements", radius, tracker.refinements)
    if closure > tau_closure:
        raise MonodromyError(
            f"branches do not close on |zeta|={radius:.6g} (residual {closure:.3e}); "
            "radius is too small"
        )

    branches = polish_branches(pair, nodes, branches)
    return SpectralContour(
        radius=float(radius),
        nodes=nodes,
        branches=branches,
        derivatives=branch_der,
        closure_residual=closure,
    )


def label_branches(contour: SpectralContour, pair: ReducedPair) -> SpectralContour:
    """Attach each branch to the b_j of its slope and reorder rows by j.

    The slope estimate m_i = mean_k(-lambda_i(zeta_k) / zeta_k) is exactly the constant
    Laurent coefficient b_j for a branch analytic outside the circle.
    """
    b = pair.b_eigs
    slopes = np.real(np.mean(-contour.branches / contour.nodes[np.newaxis, :], axis=1))
    labels = np.argmin(np.abs(slopes[:, np.newaxis] - b[np.newaxis, :]), axis=1)
    if len(set(labels.tolist())) != contour.n:
        raise LabelingError(f"branch slopes {slopes.tolist()} do not map one-to-one onto b")
    gaps = np.abs(slopes - b[labels])
    if np.any(gaps >= pair.min_gap / 4.0):
        raise LabelingError(
            f"branch slopes {slopes.tolist()} are not within min_gap/4 of b; radius is too small"
        )

    order = np.argsort(labels)
    branches = contour.branches[order]
    derivatives = contour.derivatives[order]
    diag_estimates = np.real(
        np.mean(branches + b[:, np.newaxis] * contour.nodes[np.newaxis, :], axis=1)
    )
    a_scale = max(1.0, float(np.max(np.abs(pair.a_red))))
    if np.any(np.abs(diag_estimates - pair.diag_a) > a_scale / 2.0):
        logger.warning(
            "recovered diagonal %s is far from a_jj %s",
            diag_estimates.tolist(),
            pair.diag_a.tolist(),
        )
    return replace(
        contour,
        branches=branches,
        derivatives=derivatives,
        labels=labels,
        slopes=slopes[order],
        diag_estimates=diag_estimates,
    )


def initial_radius(pair: ReducedPair) -> float:
    """Start of the radius search: R0 = 4 (1 + ||A||) / min_gap.

    The start is raised, never lowered, to 1.25 R_enc where
    R_enc = max_{i<j} (|a_ii - a_jj| + 2 ||A - diag A||) / |b_i - b_j|: outside it the
    Bauer-Fike discs of radius ||A - diag A|| around a_jj - zeta b_j are disjoint, so no
    branch point lies there.
    """
    a_norm = float(np.linalg.norm(pair.a_red, 2))
    if pair.n == 1:
        return 4.0 * (1.0 + a_norm) / float(pair.b_eigs[0])
    base = 4.0 * (1.0 + a_norm) / pair.min_gap
    d = pair.diag_a
    off = pair.a_red - np.diag(np.diag(pair.a_red))
    off_norm = float(np.linalg.norm(off, 2))
    db = np.abs(pair.b_eigs[:, np.newaxis] - pair.b_eigs[np.newaxis, :])
    da = np.abs(d[:, np.newaxis] - d[np.newaxis, :])
    upper = np.triu_indices(pair.n, k=1)
    enclosure = float(np.max((da[upper] + 2.0 * off_norm) / db[upper]))
    return max(base, 1.25 * enclosure)


def search_contour(
    pair: ReducedPair,
    nodes_count: int = DEFAULT_NODES,
    tau_closure: float = TAU_CLOSURE,
    max_doublings: int = MAX_DOUBLINGS,
    max_refinement: int = MAX_REFINEMENT,
    workers: int = 1,
    radius: Optional[float] = None,
) -> SpectralContour:
    """Tracked and labeled contour at the first radius passing all checks.

    With an explicit ``radius`` only that radius is tried.
    """
    r = initial_radius(pair) if radius is None else float(radius)
    limit = 0 if radius is not None else max_doublings
    attempts: list[tuple[float, str]] = []
    for _ in range(limit + 1):
        try:
            contour = track_branches(pair, r, nodes_count, tau_closure, max_refinement, workers)
            contour = label_branches(contour, pair)
            separation = contour.min_separation()
            if separation <= 10.0 * POLISH_TOL * contour.scale:
                raise TrackingError(f"branches only {separation:.3e} apart on |zeta|={r:.6g}")
            logger.debug("accepted radius %.6g after %d attempts", r, len(attempts))
            return contour
        except (TrackingError, MonodromyError, LabelingError, EigenSolverError) as exc:
            attempts.append((r, str(exc)))
            logger.debug("radius %.6g rejected: %s", r, exc)
            r *= 2.0
    detail = "; ".join(f"R={radius_:.4g}: {reason}" for radius_, reason in attempts)
    raise RadiusSearchError(f"no acceptable radius found ({detail})", attempts)


def choose_radius(pair: ReducedPair, nodes_count: int = DEFAULT_NODES, **kwargs) -> float:
    """Smallest radius R0 * 2^k passing closure, labeling and separation checks."""
    return search_contour(pair, nodes_count, **kwargs).radius


def branch_diagnostics(contour: SpectralContour, pair: ReducedPair) -> BranchDiagnostics:
    branches = contour.branches
    nodes = contour.nodes
    scale = contour.scale
    count = contour.nodes_count

    expected = np.trace(pair.a_red) - nodes * np.sum(pair.b_eigs)
    trace_scale = max(1.0, float(np.max(np.sum(np.abs(branches), axis=0))))
    trace = float(np.max(np.abs(branches.sum(axis=0) - expected))) / trace_scale

    mirror = (-np.arange(count)) % count
    conjugate = float(np.max(np.abs(branches[:, mirror] - np.conj(branches)))) / scale

    stack = pair.a_red[np.newaxis, :, :] - nodes[:, np.newaxis, np.newaxis] * np.diag(pair.b_eigs)
    fresh = np.linalg.eigvals(stack)
    multiset = 0.0
    for k in range(count):
        order, _, cost = _match(branches[:, k], fresh[k])
        multiset = max(multiset, float(cost[np.arange(contour.n), order].max()))
    multiset /= scale

    n = contour.n
    eye = np.eye(n)
    lam = branches.T
    dets = np.linalg.det(lam[:, :, np.newaxis, np.newaxis] * eye - stack[:, np.newaxis, :, :])
    if n > 1:
        gaps = np.abs(lam[:, :, np.newaxis] - lam[:, np.newaxis, :])
        gaps[:, np.arange(n), np.arange(n)] = 1.0
        products = np.prod(gaps, axis=2)
    else:
        products = np.ones(lam.shape)
    determinant = float(np.max(np.abs(dets) / products)) / scale

    return BranchDiagnostics(
        trace=trace,
        conjugate=conjugate,
        closure=contour.closure_residual,
        multiset=multiset,
        determinant=determinant,
    )


def dump_contour_csv(contour: SpectralContour, path: Union[str, Path]) -> Path:
    """Debug dump: k, Re zeta, Im zeta, then Re/Im of every branch."""
    path = Path(path)
    header = ["k", "re_zeta", "im_zeta"]
    for j in range(contour.n):
        header += [f"re_lambda_{j + 1}", f"im_lambda_{j + 1}"]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for k, zeta in enumerate(contour.nodes):
            row = [str(k), f"{zeta.real:.17g}", f"{zeta.imag:.17g}"]
            for value in contour.branches[:, k]:
                row += [f"{value.real:.17g}", f"{value.imag:.17g}"]
            writer.writerow(row)
    return path


@dataclass(frozen=True, eq=False)
class HighPrecisionBranches:
    """Branch values polished to ``dps`` digits; ``values[j][k]`` pairs with ``nodes[k]``."""

    ctx: MPContext
    dps: int
    nodes: list
    values: list


class PencilPolynomial:
    """det(lambda I - A + zeta B) as sum_p c_p(zeta) lambda^p at working precision.

    Coefficients come from an exact 2D discrete Fourier interpolation of the determinant
    on scaled roots of unity (degree <= n in each variable).
    """

    def __init__(self, pair: ReducedPair, ctx: MPContext, lam_scale: float, zeta_scale: float):
        self.ctx = ctx
        n = pair.n
        m = n + 1
        a = ctx.matrix(n, n)
        for i in range(n):
            for j in range(n):
                a[i, j] = ctx.mpc(complex(pair.a_red[i, j]))
        b = [ctx.mpf(float(x)) for x in pair.b_eigs]
        roots = [ctx.expjpi(ctx.mpf(2 * u) / m) for u in range(m)]
        rho_l = ctx.mpf(lam_scale)
        rho_z = ctx.mpf(zeta_scale)

        samples = [[None] * m for _ in range(m)]
        for u in range(m):
            lam = rho_l * roots[u]
            for v in range(m):
                zeta = rho_z * roots[v]
                mat = -a
                for i in range(n):
                    mat[i, i] += lam + zeta * b[i]
                samples[u][v] = ctx.det(mat)

        # c[p][q] multiplies lambda^p zeta^q
        self.coeffs = []
        for p in range(n + 1):
            row = []
            for q in range(n + 1 - p):
                total = ctx.fsum(
                    samples[u][v] * roots[(-p * u) % m] * roots[(-q * v) % m]
                    for u in range(m)
                    for v in range(m)
                )
                row.append(total / (m * m) / (rho_l**p * rho_z**q))
            self.coeffs.append(row)

    def lambda_coefficients(self, zeta) -> list:
        """Coefficients of the monic polynomial in lambda at zeta, highest degree first."""
        ctx = self.ctx
        out = []
        for row in self.coeffs:
            acc = ctx.mpc(0)
            for c in reversed(row):
                acc = acc * zeta + c
            out.append(acc)
        return out[::-1]


def lift_precision(
    contour: SpectralContour, pair: ReducedPair, dps: int, max_iter: int = 8
) -> HighPrecisionBranches:
    """Polish every labeled branch value to ``dps`` significant digits with mpmath."""
    if not contour.is_labeled:
        raise ParameterError("contour must be labeled before lifting precision")
    ctx = MPContext()
    ctx.dps = dps + 10
    count = contour.nodes_count
    radius = ctx.mpf(contour.radius)

    nodes = [None] * count
    for k in range(count // 2 + 1):
        nodes[k] = radius * ctx.expjpi(ctx.mpf(2 * k) / count)
    nodes[0] = ctx.mpc(radius)
    nodes[count // 2] = ctx.mpc(-radius)
    for k in range(1, count // 2):
        nodes[count - k] = ctx.conj(nodes[k])

    poly = PencilPolynomial(pair, ctx, contour.scale, contour.radius)
    stop = ctx.mpf(10) ** (-(dps + 2))
    values = [[None] * count for _ in range(contour.n)]
    for k in range(count):
        coeffs = poly.lambda_coefficients(nodes[k])
        for j in range(contour.n):
            lam = ctx.mpc(complex(contour.branches[j, k]))
            for _ in range(max_iter):
                p, dp = ctx.polyval(coeffs, lam, derivative=True)
                if dp == 0:
                    break
                step = p / dp
                if abs(step) > 1e-6 * max(1.0, abs(complex(lam))):
                    raise NumericError(
                        f"extended-precision polish diverged at node {k}, branch {j + 1}"
                    )
                lam -= step
                if abs(step) <= stop * max(1, abs(lam)):
                    break
            values[j][k] = lam
    ctx.dps = dps
    logger.debug("lifted %d x %d branch values to %d digits", contour.n, count, dps)
    return HighPrecisionBranches(ctx=ctx, dps=dps, nodes=nodes, values=values)
