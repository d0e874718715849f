"""
Tests for atoms, the contour-integral density and measure assembly.

The 2 x 2 pair A = [[0, theta], [theta, 0]], B = diag(1, 2) has the closed-form density
w(s) = 2 theta I1(theta sqrt(1 - u^2)) / sqrt(1 - u^2), u = 2s - 3 (see conftest).
"""

import math

import numpy as np
import pytest

from bmv.config_manager import RunConfig
from bmv.errors import AccuracyError, DomainError, ParameterError
from bmv.laplace_verify import trace_exp
from bmv.matrix_core import HermitianPair, random_pair, reduce_pair
from bmv.measure import (
    assemble_measure,
    atoms,
    atoms_only,
    density_grid,
    density_w,
    lemma1_residual,
    sample_points,
    support_residual,
    working_precision,
)
from bmv.spectral_curve import search_contour
from tests.conftest import bessel_density, swap_pair


def _reduced(a, b):
    return reduce_pair(HermitianPair.from_arrays(np.asarray(a, float), np.asarray(b, float)))


@pytest.fixture(scope="module")
def swap_setup():
    pair = reduce_pair(swap_pair(1.0))
    return pair, search_contour(pair, 256)


@pytest.mark.unit
def test_atoms_examples():
    """Weights are exp(a_jj); off-diagonal entries of A do not matter."""
    zero = _reduced(np.zeros((2, 2)), np.diag([1.0, 2.0]))
    assert atoms(zero) == [(pytest.approx(b), pytest.approx(1.0)) for b in zero.b_eigs]

    diag = _reduced(np.diag([1.0, math.log(2.0)]), np.diag([1.0, 2.0]))
    weights = [w for _, w in atoms(diag)]
    assert weights == [pytest.approx(math.e), pytest.approx(2.0)]

    swap = reduce_pair(swap_pair())
    assert [w for _, w in atoms(swap)] == [pytest.approx(1.0), pytest.approx(1.0)]
    assert [s for s, _ in atoms(swap)] == pytest.approx([1.0 + swap.shift, 2.0 + swap.shift])


@pytest.mark.unit
def test_density_vanishes_for_diagonal_a():
    """The integrand exp(a - b zeta + s zeta) is entire for every branch."""
    pair = _reduced(np.diag([1.0, 2.0]), np.diag([1.0, 3.0]))
    contour = search_contour(pair, 256)
    assert abs(density_w(contour, pair, 2.0 + pair.shift)) < 1e-10


@pytest.mark.unit
@pytest.mark.parametrize("s", [1.25, 1.5, 1.75])
def test_density_matches_bessel_form(swap_setup, s):
    pair, contour = swap_setup
    assert density_w(contour, pair, s + pair.shift) == pytest.approx(bessel_density(s), abs=1e-8)


@pytest.mark.unit
def test_density_at_midpoint_value(swap_setup):
    """w(1.5) = 2 I1(1)."""
    pair, contour = swap_setup
    assert density_w(contour, pair, 1.5 + pair.shift) == pytest.approx(1.1303182079849700, abs=1e-8)


@pytest.mark.unit
def test_density_near_support_edges(swap_setup):
    pair, contour = swap_setup
    for s in (1.0 + 1e-3, 2.0 - 1e-3):
        assert density_w(contour, pair, s + pair.shift) == pytest.approx(
            bessel_density(s), abs=1e-8
        )


@pytest.mark.unit
def test_density_domain_errors(swap_setup):
    pair, contour = swap_setup
    for s in (0.5, pair.b_eigs[0], pair.b_eigs[1], 3.0):
        with pytest.raises(DomainError):
            density_w(contour, pair, s)


@pytest.mark.unit
def test_extended_precision_agrees_with_double(swap_setup):
    pair, contour = swap_setup
    s = 1.3 + pair.shift
    fast = density_w(contour, pair, s, precision="double")
    slow = density_w(contour, pair, s, precision="mp")
    assert slow == pytest.approx(fast, abs=1e-11)


@pytest.mark.unit
def test_quadrature_error_shrinks_geometrically():
    """On a fixed circle each doubling of N at least halves the error once it is below 1e-3.

    At R = 40 the integrand at s = 1.5 grows like exp(20), so 64 nodes are still visibly
    short of convergence while 256 are not.
    """
    pair = reduce_pair(swap_pair(1.0))
    s = 1.5 + pair.shift
    exact = bessel_density(1.5)
    errors = {
        count: abs(density_w(search_contour(pair, count, radius=40.0), pair, s, tau_im=1.0) - exact)
        for count in (64, 128, 256, 512)
    }
    checked = 0
    for count in (64, 128, 256):
        if 1e-13 < errors[count] < 1e-3:
            assert errors[2 * count] < 0.5 * errors[count]
            checked += 1
    assert checked >= 1
    assert errors[512] < 1e-10


@pytest.mark.unit
def test_working_precision(swap_setup):
    pair, contour = swap_setup
    s = [1.5 + pair.shift]
    assert working_precision(contour, pair, s, "double") is None
    assert working_precision(contour, pair, s, "mp") >= 30
    with pytest.raises(ParameterError):
        working_precision(contour, pair, s, "quad")


@pytest.mark.unit
def test_working_precision_grows_with_radius():
    """Doubling R squares the dynamic range of the integrand."""
    pair = reduce_pair(swap_pair(3.0))
    small = search_contour(pair, 256)
    large = search_contour(pair, 256, radius=8 * small.radius)
    s = [1.5 + pair.shift]
    assert working_precision(large, pair, s, "auto") is not None
    assert working_precision(large, pair, s, "mp") > working_precision(small, pair, s, "mp")


@pytest.mark.unit
def test_density_grid_layout():
    """points_per_interval = 2 and n = 3 gives 4 samples, none at an atom."""
    pair = _reduced(np.diag([0.2, -0.1, 0.4]), np.diag([1.0, 2.0, 3.0]))
    contour = search_contour(pair, 64)
    grid = density_grid(contour, pair, 2)
    assert len(grid) == 4
    s_values = [s for s, _ in grid]
    assert all(b not in s_values for b in pair.b_eigs)
    assert all(abs(w) < 1e-10 for _, w in grid)
    with pytest.raises(ParameterError):
        sample_points(pair, 1)


@pytest.mark.unit
def test_density_grid_swap_pair_non_negative(swap_setup):
    pair, contour = swap_setup
    grid = density_grid(contour, pair, 10)
    assert len(grid) == 10
    assert min(w for _, w in grid) >= -1e-8


@pytest.mark.unit
def test_lemma1_residuals():
    """The sum over all branches vanishes for any s."""
    diagonal = _reduced(np.diag([0.5, -0.5]), np.diag([1.0, 2.0]))
    contour = search_contour(diagonal, 128)
    for s in (-1.0, 0.0, 1.7, 4.0):
        assert lemma1_residual(contour, diagonal, s) < 1e-12

    pair = reduce_pair(random_pair(3, seed=21))
    contour = search_contour(pair, 256)
    assert lemma1_residual(contour, pair, 0.0) < 1e-8

    swap = reduce_pair(swap_pair())
    contour = search_contour(swap, 256)
    assert lemma1_residual(contour, swap, 1.5) < 1e-8


@pytest.mark.unit
def test_support_residual(swap_setup):
    pair, contour = swap_setup
    assert support_residual(contour, pair, pair.b_eigs[-1] + 1.0) < 1e-8
    assert support_residual(contour, pair, 0.5) == 0.0
    with pytest.raises(DomainError):
        support_residual(contour, pair, 1.5)


@pytest.mark.integration
def test_assemble_diagonal_pair():
    pair = _reduced(np.diag([1.0, 2.0]), np.diag([1.0, 2.0]))
    measure = assemble_measure(pair)
    assert [w for _, w in measure.atoms] == [pytest.approx(math.e), pytest.approx(math.e**2)]
    assert measure.max_density() < 1e-10
    assert measure.s_values.size == 20
    assert measure.precision == "double"


@pytest.mark.integration
def test_assemble_single_atom():
    pair = _reduced([[0.7]], [[3.0]])
    measure = assemble_measure(pair)
    assert measure.atoms == [(pytest.approx(3.0 + pair.shift), pytest.approx(math.exp(0.7)))]
    assert measure.density_grid == []
    assert measure.total_mass() == pytest.approx(math.exp(0.7))


@pytest.mark.integration
def test_assemble_swap_pair():
    """Density matches the closed form; total mass is Tr e^A = 2 cosh 1."""
    pair = reduce_pair(swap_pair())
    measure = assemble_measure(pair)
    assert len(measure.convergence) >= 1
    assert measure.convergence[-1] < 1e-9
    for s, w in measure.density_grid:
        assert w == pytest.approx(bessel_density(s - pair.shift), abs=1e-8)
    assert measure.total_mass() == pytest.approx(2 * math.cosh(1.0), rel=1e-8)
    assert measure.total_mass() == pytest.approx(trace_exp(pair, 0.0), rel=1e-8)


@pytest.mark.integration
def test_assemble_node_ceiling_raises():
    pair = reduce_pair(swap_pair())
    config = RunConfig(n_nodes_initial=256, n_nodes_max=256)
    with pytest.raises(AccuracyError) as exc_info:
        assemble_measure(pair, config)
    assert exc_info.value.exit_code == 3


@pytest.mark.integration
def test_contour_independence():
    """Densities on circles of radius R and 2R agree."""
    pair = reduce_pair(random_pair(3, seed=31))
    config = RunConfig()
    first = assemble_measure(pair, config)
    second = assemble_measure(pair, config, radius=2 * first.radius)
    scale = max(1.0, first.max_density())
    assert np.max(np.abs(first.w_values - second.w_values)) < 2 * config.tau_quad * scale


@pytest.mark.integration
@pytest.mark.parametrize("offset", [0.5, 2.0])
def test_shift_equivariance(offset):
    """Adding offset * I to B moves every location by offset."""
    base = random_pair(3, seed=41)
    moved = HermitianPair.from_arrays(base.a, base.b + offset * np.eye(3))
    first = assemble_measure(reduce_pair(base))
    second = assemble_measure(reduce_pair(moved))
    assert np.allclose(second.locations, first.locations + offset, atol=1e-12)
    assert np.allclose(second.weights, first.weights, rtol=1e-12)
    assert np.allclose(second.s_values, first.s_values + offset, atol=1e-12)
    assert np.allclose(second.w_values, first.w_values, atol=1e-8)


@pytest.mark.integration
def test_original_coordinates():
    pair = reduce_pair(swap_pair())
    measure = atoms_only(pair).in_original_coordinates()
    assert measure.coordinates == "original"
    assert measure.locations == pytest.approx([1.0, 2.0])
    assert measure.support == pytest.approx((1.0, 2.0))
