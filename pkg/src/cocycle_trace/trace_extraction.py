"""Wodzicki residue and Kontsevich-Vishik trace densities of a flat-model symbol.

For ``K = k + n`` a nonnegative integer the residue density is the
constant ``c`` of the diagonal cocycle; otherwise the KV density is the
regularized diagonal value ``psi(x, 1)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cocycle_core import (
    DEFAULT_LAMBDAS,
    CocycleOrder,
    c_by_derivative,
    decompose,
)
from .errors import BranchError, InvalidInputError
from .symbol_model import (
    ClassicalSymbolModel,
    _as_points,
    _integrate,
    angular_integral,
    direct_symbol_integral,
    layer_coefficients,
    symbol_phi_provider,
)


class TraceKind(enum.Enum):
    WODZICKI = "wodzicki"
    KV = "kv"


@dataclass
class TraceReport:
    """Per-point densities, their integral over the torus, and oracle comparison."""

    kind: TraceKind
    x_grid: np.ndarray
    per_point: np.ndarray
    integrated: complex
    order: CocycleOrder
    oracle_per_point: np.ndarray | None = None
    oracle_gap: float | None = None
    l: int | None = None
    diagnostics: dict = field(default_factory=dict)


def integrate_density(per_point, n: int = 1) -> complex:
    """Rectangle rule on a uniform periodic grid of ``[0, 2 pi)^n``."""
    values = np.asarray(per_point, dtype=complex).ravel()
    if values.size == 0:
        raise InvalidInputError("cannot integrate over an empty grid")
    return complex(np.mean(values) * (2 * np.pi) ** n)


def wodzicki_oracle(symbol: ClassicalSymbolModel, x) -> complex:
    """Classical residue density ``f(x) (2 pi)^-n int_{S^{n-1}} a_{-n}``."""
    layer = symbol.critical_layer()
    if layer is None:
        return 0j
    ang = angular_integral(layer.angular, symbol.n, symbol.angular_nodes)
    return complex(layer.weight(x)) * (2 * np.pi) ** (-symbol.n) * ang


def _gap(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def wodzicki_density(
    symbol: ClassicalSymbolModel,
    x_grid,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    tol: float = 1e-9,
    two_route: bool = True,
) -> TraceReport:
    """Residue density at each grid point from the ``K``-th t-derivative at 0.

    With ``two_route`` the constant is also obtained through the full
    decomposition (order reductions down to ``K = 0``) and the gap between
    the routes is recorded in ``diagnostics["two_route_gap"]``.
    """
    order = CocycleOrder(symbol.K)
    if not order.is_nonneg_integer:
        raise BranchError(
            f"k + n = {symbol.K} is not a nonnegative integer; the residue vanishes, use kv_density"
        )
    pts = _as_points(x_grid, symbol.n)
    provider = symbol_phi_provider(symbol, pts)
    ext = c_by_derivative(provider, lambdas, tol, full_output=True)
    oracle = np.array([wodzicki_oracle(symbol, x) for x in pts])
    diagnostics = {"lambda_spread": ext.spread}
    if two_route:
        dec = decompose(provider, lambdas, spread_tol=tol)
        diagnostics["two_route_gap"] = _gap(dec.c, ext.v)
        diagnostics["reconstruction_residual"] = dec.diagnostics["reconstruction_residual"]
    return TraceReport(
        kind=TraceKind.WODZICKI,
        x_grid=pts,
        per_point=ext.v,
        integrated=integrate_density(ext.v, symbol.n),
        order=order,
        oracle_per_point=oracle,
        oracle_gap=_gap(ext.v, oracle),
        l=order.as_int(),
        diagnostics=diagnostics,
    )


def kv_density(
    symbol: ClassicalSymbolModel,
    x_grid,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    tol: float = 1e-8,
    t: float = 1.0,
) -> TraceReport:
    """KV density ``psi(x, 1)`` at each grid point.

    When the symbol is trace class (``Re k < -n``) the direct integral of
    the symbol is used as an oracle.
    """
    order = CocycleOrder(symbol.K)
    if order.is_nonneg_integer:
        raise BranchError(f"k + n = {symbol.K} lies on the pole locus of the KV trace")
    pts = _as_points(x_grid, symbol.n)
    dec = decompose(symbol_phi_provider(symbol, pts), lambdas, tol=tol)
    values = dec.psi(t)
    oracle = gap = None
    if symbol.k.real < -symbol.n:
        oracle = np.array([direct_symbol_integral(symbol, x) for x in pts])
        gap = _gap(values, oracle)
    return TraceReport(
        kind=TraceKind.KV,
        x_grid=pts,
        per_point=values,
        integrated=integrate_density(values, symbol.n),
        order=order,
        oracle_per_point=oracle,
        oracle_gap=gap,
        diagnostics=dict(dec.diagnostics),
    )


def cutoff_difference_integral(symbol: ClassicalSymbolModel, other_cutoff, x) -> complex:
    """``(2 pi)^-n sum (int Y) int r^(sigma+n-1) (chi_1 - chi_2) dr`` at ``x``.

    The integrand is compactly supported, so this converges for every order.
    """
    chi1, chi2 = symbol.cutoff, other_cutoff
    a = min(chi1.r0, chi2.r0)
    b = max(chi1.rho, chi2.rho)
    marks = (chi1.r0, chi1.rho, chi2.r0, chi2.rho)
    coeffs = layer_coefficients(symbol, [np.atleast_1d(x)])[:, 0]
    total = 0j
    for c, layer in zip(coeffs, symbol.layers):
        power = symbol.sigma(layer) + symbol.n - 1
        total += c * _integrate(
            lambda r: r**power * (complex(chi1(r)) - complex(chi2(r))), a, b, marks
        )
    return total
