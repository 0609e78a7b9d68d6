"""Small numerical helpers shared by the modules: summation, grids, finite differences."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np


class CompensatedSum:
    """Neumaier summation for complex vectors, accumulated in call order.

    Real and imaginary parts are compensated independently, which is exact
    because complex addition is componentwise.
    """

    def __init__(self, dim: int):
        self._s = np.zeros(2 * dim)
        self._c = np.zeros(2 * dim)

    def add(self, value: np.ndarray) -> None:
        x = np.ascontiguousarray(value, dtype=complex).view(float)
        s = self._s
        t = s + x
        big = np.abs(s) >= np.abs(x)
        self._c += np.where(big, (s - t) + x, (x - t) + s)
        self._s = t

    @property
    def value(self) -> np.ndarray:
        return (self._s + self._c).view(complex).copy()


def chebyshev_grid(n_points: int, t_max: float = 2.0) -> np.ndarray:
    """Chebyshev-Lobatto points on ``[0, t_max]``, both endpoints included."""
    if n_points < 2:
        return np.array([0.0])
    k = np.arange(n_points)
    grid = 0.5 * t_max * (1.0 - np.cos(np.pi * k / (n_points - 1)))
    grid[0] = 0.0
    grid[-1] = t_max
    return grid


def _fd_weights(offsets: np.ndarray, m: int) -> np.ndarray:
    # weights w with sum_i w_i f(x + o_i h) = h^m f^(m)(x) + O(h^{len - m})
    n = len(offsets)
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[m] = math.factorial(m)
    return np.linalg.solve(vander, rhs)


def fd_derivative(
    func: Callable[[float], np.ndarray],
    m: int,
    t: float,
    h: float = 1e-2,
    levels: int = 2,
) -> np.ndarray:
    """``m``-th derivative of ``func`` at ``t`` by finite differences.

    Uses a 4th-order central stencil when ``t - half_width * h >= 0`` and a
    4th-order forward stencil otherwise (the domain is ``t >= 0``).  The
    result is refined by ``levels`` rounds of Richardson extrapolation on
    ``h, h/2, h/4, ...``.
    """
    if m == 0:
        return np.asarray(func(t), dtype=complex)
    accuracy = 4
    half = (m - 1) // 2 + accuracy // 2
    central = t - half * h >= 0.0
    if central:
        offsets = np.arange(-half, half + 1, dtype=float)
        step_order = 2
    else:
        offsets = np.arange(m + accuracy, dtype=float)
        step_order = 1
    weights = _fd_weights(offsets, m)

    def estimate(step: float) -> np.ndarray:
        acc = CompensatedSum(np.atleast_1d(func(t)).size)
        for w, o in zip(weights, offsets):
            if w != 0.0:
                acc.add(w * np.atleast_1d(np.asarray(func(t + o * step), dtype=complex)))
        return acc.value / step**m

    table = [estimate(h / 2**i) for i in range(levels + 1)]
    order = accuracy
    for _ in range(levels):
        factor = 2.0**order
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0) for i in range(len(table) - 1)]
        order += step_order
    return table[0]


def poly_coefficients(func: Callable[[float], np.ndarray], degree: int, scale: float = 1.0) -> np.ndarray:
    """Monomial coefficients of a vector polynomial of known degree.

    Interpolates at ``degree + 1`` Chebyshev points on ``[0, scale]``.
    Returns an array of shape ``(degree + 1, dim)``.
    """
    if degree == 0:
        return np.atleast_2d(np.asarray(func(0.0), dtype=complex))
    nodes = chebyshev_grid(degree + 1, scale)
    values = np.array([np.atleast_1d(np.asarray(func(float(s)), dtype=complex)) for s in nodes])
    vander = np.vander(nodes / scale, degree + 1, increasing=True)
    coeffs = np.linalg.solve(vander, values)
    return coeffs / (scale ** np.arange(degree + 1))[:, None]


def falling_factorial(n: int, m: int) -> float:
    """``n (n-1) ... (n-m+1)``; zero when ``m > n``."""
    if m > n:
        return 0.0
    return float(math.perm(n, m))
