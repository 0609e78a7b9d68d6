"""Classical symbols in a flat, translation-invariant model.

A symbol is a finite sum of homogeneous layers

    a(x, xi) = sum_j f_j(x) * Y_j(xi / |xi|) * |xi|**(k - j) * chi(|xi|)

on the n-torus.  Each layer contributes

    Phi_j(lam, x, t) = f_j(x) (2 pi)**-n (int_{S^{n-1}} Y_j) t**j A(k - j, lam)

to the diagonal cocycle, with the radial factor

    A(sigma, lam) = int_0^inf r**(sigma + n - 1) (chi(lam r) - chi(r)) dr.

The result obeys the cocycle relation with exponent ``K = k + n``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec

from .cocycle_core import DEFAULT_LAMBDAS, CocycleProvider, extract_v_at_zero
from .errors import (
    EvaluationError,
    InvalidInputError,
    NotTraceClassError,
    OrderDomainError,
    QuadratureError,
)

QUAD_ABS_TOL = 1e-12
QUAD_REL_TOL = 1e-13
QUAD_ACCEPT = 1e-10
SIGMA_TOL = 1e-12


# ---------------------------------------------------------------------------
# cutoff


@dataclass(frozen=True)
class CutoffProfile:
    """Radial excision function: 0 on ``[0, r0]``, 1 on ``[rho, inf)``.

    ``profile`` is ``"piecewise-linear"`` or ``"smoothstep"``; the latter uses
    the odd-degree polynomial smoothstep of the given ``degree`` (5 is the
    classic ``6x^5 - 15x^4 + 10x^3``).
    """

    r0: float = 1.0
    rho: float = 2.0
    profile: str = "piecewise-linear"
    degree: int = 5

    def __post_init__(self):
        if not 0 < self.r0 < self.rho:
            raise InvalidInputError(f"need 0 < r0 < rho, got r0={self.r0}, rho={self.rho}")
        if self.profile not in ("piecewise-linear", "smoothstep"):
            raise InvalidInputError(f"unknown cutoff profile {self.profile!r}")
        if self.profile == "smoothstep" and (self.degree < 1 or self.degree % 2 == 0):
            raise InvalidInputError("smoothstep degree must be odd and positive")

    @functools.cached_property
    def _smooth_coeffs(self) -> np.ndarray:
        # S_N(x) = x^(N+1) sum_{i=0}^N C(N+i, i) C(2N+1, N-i) (-x)^i, degree 2N+1
        N = (self.degree - 1) // 2
        coeffs = np.zeros(self.degree + 1)
        for i in range(N + 1):
            coeffs[N + 1 + i] = math.comb(N + i, i) * math.comb(2 * N + 1, N - i) * (-1) ** i
        return coeffs

    def __call__(self, r):
        x = np.clip((np.asarray(r, dtype=float) - self.r0) / (self.rho - self.r0), 0.0, 1.0)
        if self.profile == "piecewise-linear" or self.degree == 1:
            return x
        return np.polynomial.polynomial.polyval(x, self._smooth_coeffs)


DEFAULT_CUTOFF = CutoffProfile()


# ---------------------------------------------------------------------------
# angular and spatial parts


@dataclass(frozen=True)
class ConstantAngular:
    value: complex = 1.0

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        return np.full(len(omega), complex(self.value))


@dataclass(frozen=True)
class PairAngular:
    """Angular part in one dimension: values at ``xi/|xi| = +1`` and ``-1``."""

    plus: complex
    minus: complex

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        return np.where(np.asarray(omega)[:, 0] > 0, complex(self.plus), complex(self.minus))


@dataclass(frozen=True)
class TrigAngular:
    """Trigonometric polynomial on the circle.

    ``Y(theta) = sum_{m>=0} cos[m] cos(m theta) + sum_{m>=1} sin[m-1] sin(m theta)``.
    """

    cos: tuple = (1.0,)
    sin: tuple = ()

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        omega = np.asarray(omega)
        theta = np.arctan2(omega[:, 1], omega[:, 0])
        out = np.zeros(len(theta), dtype=complex)
        for m, a in enumerate(self.cos):
            out += a * np.cos(m * theta)
        for m, b in enumerate(self.sin, start=1):
            out += b * np.sin(m * theta)
        return out


@dataclass(frozen=True)
class ConstantWeight:
    value: complex = 1.0

    def __call__(self, x) -> complex:
        return complex(self.value)


@dataclass(frozen=True)
class CosineWeight:
    """``f(x) = 1 + amplitude * cos(x_1)``."""

    amplitude: float = 0.5

    def __call__(self, x) -> complex:
        return complex(1.0 + self.amplitude * math.cos(float(np.atleast_1d(x)[0])))


def _sphere_rule(n: int, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        theta = 2 * np.pi * np.arange(nodes) / nodes
        return np.column_stack([np.cos(theta), np.sin(theta)]), np.full(nodes, 2 * np.pi / nodes)
    if n == 3:
        mu, wmu = np.polynomial.legendre.leggauss(nodes)
        n_phi = 2 * nodes
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        M, P = np.meshgrid(mu, phi, indexing="ij")
        s = np.sqrt(1.0 - M**2)
        pts = np.column_stack([(s * np.cos(P)).ravel(), (s * np.sin(P)).ravel(), M.ravel()])
        w = np.outer(wmu, np.full(n_phi, 2 * np.pi / n_phi)).ravel()
        return pts, w
    raise InvalidInputError(f"dimension must be 1, 2 or 3, got {n}")


def angular_integral(Y: Callable[[np.ndarray], np.ndarray], n: int, nodes: int = 64) -> complex:
    """Integral of ``Y`` over the unit sphere ``S^{n-1}``.

    n=1: the two-point sum; n=2: trapezoid with ``nodes`` points (exact for
    trigonometric polynomials of degree < nodes); n=3: Gauss-Legendre in
    ``cos(theta)`` times trapezoid in azimuth.
    """
    pts, w = _sphere_rule(n, nodes)
    vals = np.asarray(Y(pts), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("angular part is not finite at a quadrature node")
    return complex(np.dot(w, vals))


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class HomogeneousLayer:
    """Layer ``j`` of a classical symbol, homogeneous of degree ``k - j``."""

    j: int
    angular: Callable = ConstantAngular(1.0)
    weight: Callable = ConstantWeight(1.0)

    def __post_init__(self):
        if int(self.j) != self.j or self.j < 0:
            raise InvalidInputError(f"layer index must be a nonnegative integer, got {self.j}")


@dataclass(frozen=True)
class ClassicalSymbolModel:
    n: int
    k: complex
    layers: tuple = ()
    cutoff: CutoffProfile = DEFAULT_CUTOFF
    angular_nodes: int = 64

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise InvalidInputError(f"dimension must be 1, 2 or 3, got {self.n}")
        object.__setattr__(self, "k", complex(self.k))
        object.__setattr__(self, "layers", tuple(self.layers))
        idx = [layer.j for layer in self.layers]
        if len(set(idx)) != len(idx):
            raise InvalidInputError(f"layer indices must be distinct, got {idx}")

    @property
    def K(self) -> complex:
        """Order of the generated cocycle, ``k + n``."""
        return self.k + self.n

    def sigma(self, layer: HomogeneousLayer) -> complex:
        return self.k - layer.j

    @property
    def max_j(self) -> int:
        return max(layer.j for layer in self.layers)

    def angular_integrals(self) -> list[complex]:
        return [angular_integral(layer.angular, self.n, self.angular_nodes) for layer in self.layers]

    def critical_layer(self) -> HomogeneousLayer | None:
        """The layer of homogeneity ``-n``, if present."""
        for layer in self.layers:
            if abs(self.sigma(layer) + self.n) <= SIGMA_TOL:
                return layer
        return None

    def with_cutoff(self, cutoff: CutoffProfile) -> "ClassicalSymbolModel":
        return ClassicalSymbolModel(self.n, self.k, self.layers, cutoff, self.angular_nodes)

    def with_order(self, k: complex) -> "ClassicalSymbolModel":
        return ClassicalSymbolModel(self.n, k, self.layers, self.cutoff, self.angular_nodes)


def torus_grid(n: int, nodes: int) -> np.ndarray:
    """Uniform periodic grid on ``[0, 2 pi)^n``, shape ``(nodes**n, n)``."""
    axis = 2 * np.pi * np.arange(nodes) / nodes
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _as_points(x_grid, n: int) -> np.ndarray:
    pts = np.asarray(x_grid, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if n == 1 else pts.reshape(1, -1)
    if pts.shape[1] != n or len(pts) == 0:
        raise InvalidInputError(f"x grid must have shape (P, {n}) with P >= 1")
    return pts


# ---------------------------------------------------------------------------
# radial integrals


def _integrate(func, a: float, b: float, points: Sequence[float]) -> complex:
    inner = sorted({p for p in points if a < p < b})
    res, err, info = quad_vec(
        func, a, b, epsabs=QUAD_ABS_TOL, epsrel=QUAD_REL_TOL, quadrature="gk15",
        points=inner or None, full_output=True, limit=2000,
    )
    # status 2 means roundoff stopped refinement; fine if the estimate is tiny
    if info.status != 0 and not (info.status == 2 and err <= QUAD_ACCEPT * max(1.0, abs(res))):
        raise QuadratureError(f"radial quadrature failed on [{a}, {b}] (error estimate {err:.3g})")
    return complex(res)


@functools.lru_cache(maxsize=4096)
def _radial_difference(power: complex, cutoff: CutoffProfile, lam: float) -> complex:
    a = min(cutoff.r0, cutoff.r0 / lam)
    b = max(cutoff.rho, cutoff.rho / lam)
    marks = (cutoff.r0, cutoff.rho, cutoff.r0 / lam, cutoff.rho / lam)

    def f(r):
        return r**power * (complex(cutoff(lam * r)) - complex(cutoff(r)))

    return _integrate(f, a, b, marks)


def radial_difference_integral(sigma: complex, cutoff: CutoffProfile, lam: float, n: int = 1) -> complex:
    """``int_0^inf r**(sigma + n - 1) (chi(lam r) - chi(r)) dr`` on its exact support."""
    if not lam > 0:
        raise InvalidInputError(f"lambda must be positive, got {lam}")
    if lam == 1.0:
        return 0j
    return _radial_difference(complex(sigma) + n - 1, cutoff, float(lam))


def clear_caches() -> None:
    _radial_difference.cache_clear()


def convergent_radial_integral(sigma: complex, cutoff: CutoffProfile, n: int = 1) -> complex:
    """``int_0^inf r**(sigma + n - 1) chi(r) dr`` for ``Re(sigma + n) < 0``.

    Quadrature on ``[r0, rho]`` plus the closed-form tail ``-rho**(sigma+n)/(sigma+n)``.
    """
    s = complex(sigma) + n
    if s.real >= 0:
        raise NotTraceClassError(f"radial integral diverges for Re(sigma + n) = {s.real} >= 0")
    body = _integrate(lambda r: r ** (s - 1) * complex(cutoff(r)), cutoff.r0, cutoff.rho, ())
    return body - cutoff.rho**s / s


def finite_part_radial(
    sigma: complex, cutoff: CutoffProfile, n: int = 1, lambdas: Sequence[float] = DEFAULT_LAMBDAS
) -> complex:
    """Finite part of ``int_0^inf r**(sigma + n - 1) chi(r) dr``.

    Obtained as the ``v`` with ``A(sigma, lam) = (lam**-(sigma+n) - 1) v``.
    """
    s = complex(sigma) + n
    if abs(s) <= SIGMA_TOL:
        raise OrderDomainError(
            "sigma + n = 0 is the logarithmic (Wodzicki) layer; its coefficient is "
            "read off as c, use extract_c_at_zero or wodzicki_density"
        )
    provider = CocycleProvider(
        lambda lam, t: radial_difference_integral(sigma, cutoff, lam, n), s, 1, poly_degree_hint=0,
        name="radial",
    )
    return complex(extract_v_at_zero(provider, lambdas).v[0])


# ---------------------------------------------------------------------------
# cocycle providers


def layer_phi(layer: HomogeneousLayer, symbol: ClassicalSymbolModel, lam: float, t: float, x) -> complex:
    """Contribution of one layer to the diagonal cocycle at ``(lam, x, t)``."""
    n = symbol.n
    ang = angular_integral(layer.angular, n, symbol.angular_nodes)
    A = radial_difference_integral(symbol.sigma(layer), symbol.cutoff, lam, n)
    return complex(layer.weight(x)) * (2 * np.pi) ** (-n) * ang * t**layer.j * A


def layer_coefficients(symbol: ClassicalSymbolModel, x_grid) -> np.ndarray:
    """``f_j(x) (2 pi)^-n int Y_j`` per layer and grid point, shape ``(layers, P)``."""
    pts = _as_points(x_grid, symbol.n)
    angs = symbol.angular_integrals()
    norm = (2 * np.pi) ** (-symbol.n)
    return np.array(
        [[norm * a * complex(layer.weight(x)) for x in pts] for layer, a in zip(symbol.layers, angs)]
    )


def symbol_phi_provider(symbol: ClassicalSymbolModel, x_grid) -> CocycleProvider:
    """Cocycle of the symbol's diagonal, vector-valued over ``x_grid``.

    Polynomial in ``t`` of degree ``max j`` with exact t-derivatives.
    """
    if not symbol.layers:
        raise InvalidInputError("symbol has no layers")
    coeffs = layer_coefficients(symbol, x_grid)
    js = [layer.j for layer in symbol.layers]
    sigmas = [symbol.sigma(layer) for layer in symbol.layers]
    n, cutoff = symbol.n, symbol.cutoff
    rows_at: dict[float, list[np.ndarray]] = {}

    def rows(lam: float) -> list[np.ndarray]:
        r = rows_at.get(lam)
        if r is None:
            r = rows_at[lam] = [
                row * radial_difference_integral(s, cutoff, lam, n) for row, s in zip(coeffs, sigmas)
            ]
        return r

    def t_derivative(m: int, lam: float, t: float) -> np.ndarray:
        out = np.zeros(coeffs.shape[1], dtype=complex)
        for row, j in zip(rows(lam), js):
            if j >= m:
                out += math.perm(j, m) * t ** (j - m) * row
        return out

    return CocycleProvider(
        lambda lam, t: t_derivative(0, lam, t),
        symbol.K,
        coeffs.shape[1],
        t_derivative=t_derivative,
        poly_degree_hint=max(js),
        name="symbol",
    )


def direct_symbol_integral(symbol: ClassicalSymbolModel, x) -> complex:
    """``(2 pi)^-n int a(x, xi) d xi`` for a trace-class symbol (``Re k < -n``)."""
    if symbol.k.real >= -symbol.n:
        raise NotTraceClassError(f"symbol of order {symbol.k} is not integrable in dimension {symbol.n}")
    coeffs = layer_coefficients(symbol, [np.atleast_1d(x)])[:, 0]
    total = 0j
    for c, layer in zip(coeffs, symbol.layers):
        total += c * convergent_radial_integral(symbol.sigma(layer), symbol.cutoff, symbol.n)
    return total
