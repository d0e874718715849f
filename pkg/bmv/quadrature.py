"""Quadrature rules: Chebyshev interior nodes with Fejer/Clenshaw-Curtis weights,
and uniform nodes on a circle for the trapezoidal contour rule."""

import numpy as np


def chebyshev_nodes(m: int) -> np.ndarray:
    """Chebyshev points of the first kind on (-1, 1), ascending.

    Nodes x_i = -cos((2i + 1) pi / 2m) never touch the endpoints and cluster near them.
    """
    if m < 1:
        raise ValueError("at least one node is required")
    theta = (2.0 * np.arange(m) + 1.0) * np.pi / (2.0 * m)
    return -np.cos(theta)


def fejer_weights(m: int) -> np.ndarray:
    """Weights of Fejer's first rule (the Clenshaw-Curtis rule on interior Chebyshev
    points) for :func:`chebyshev_nodes`; they sum to 2.

    Follows the closed form in Waldvogel (2003):
    w_i = 2/m * (1 - 2 * sum_{l=1}^{m//2} cos(2 l theta_i) / (4 l^2 - 1)).
    """
    if m < 1:
        raise ValueError("at least one node is required")
    theta = (2.0 * np.arange(m) + 1.0) * np.pi / (2.0 * m)
    l = np.arange(1, m // 2 + 1)[:, np.newaxis]
    terms = np.cos(2.0 * l * theta[np.newaxis, :]) / (4.0 * l**2 - 1.0)
    # node order reversed by the minus sign in chebyshev_nodes; weights are symmetric
    return (2.0 / m) * (1.0 - 2.0 * np.sum(terms, axis=0))


def interval_rule(lo: float, hi: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the m-point interior rule mapped to (lo, hi)."""
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo) + half * chebyshev_nodes(m)
    return nodes, half * fejer_weights(m)


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def circle_nodes(radius: float, count: int) -> np.ndarray:
    """Uniform nodes radius * exp(2 pi i k / count), k = 0..count-1.

    The set is exactly closed under conjugation: node count-k is the conjugate of node k,
    and nodes 0 and count/2 are real.
    """
    theta = 2.0 * np.pi * np.arange(count) / count
    nodes = radius * np.exp(1j * theta)
    half = count // 2
    nodes[0] = radius
    if count % 2 == 0:
        nodes[half] = -radius
    k = np.arange(1, (count + 1) // 2)
    nodes[count - k] = np.conj(nodes[k])
    return nodes


def circle_trapezoid(values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Trapezoidal rule for the closed integral of g over the circle through ``nodes``.

    With zeta = R exp(i theta), d zeta = i zeta d theta, so the integral is
    (2 pi i / N) * sum_k zeta_k g(zeta_k). ``values`` holds g on the last axis.
    """
    count = nodes.shape[-1]
    return (2j * np.pi / count) * np.sum(values * nodes, axis=-1)
