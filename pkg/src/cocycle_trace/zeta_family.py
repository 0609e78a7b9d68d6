"""Holomorphic families of cocycles of order ``z`` and the poles of ``psi(z, t)``.

Off the nonnegative integers each member has a unique ``psi(z, .)``; as a
function of ``z`` it is meromorphic with simple poles at ``m = 0, 1, ...``
and residue ``-c(m)``.  Residues are measured with the trapezoid rule on a
small circle around ``m``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .cocycle_core import (
    DEFAULT_LAMBDAS,
    CocycleOrder,
    CocycleProvider,
    Decomposition,
    c_by_derivative,
    decompose,
    extract_v_at_zero,
    reconstruct_phi,
)
from .errors import InvalidInputError, PoleLocusError
from .symbol_model import ClassicalSymbolModel, CutoffProfile, DEFAULT_CUTOFF, symbol_phi_provider


@dataclass(frozen=True)
class Domain:
    """Open rectangle ``re_min < Re z < re_max``, ``im_min < Im z < im_max``."""

    re_min: float = -2.5
    re_max: float = 3.5
    im_min: float = -1.0
    im_max: float = 1.0

    def __contains__(self, z) -> bool:
        z = complex(z)
        return self.re_min < z.real < self.re_max and self.im_min < z.imag < self.im_max

    def integers(self) -> list[int]:
        if self.im_min >= 0 or self.im_max <= 0:
            return []
        lo = max(0, math.floor(self.re_min) + 1)
        return [m for m in range(lo, math.ceil(self.re_max)) if m in self]


class HolomorphicFamily:
    """``z -> provider_at(z)``, a cocycle of order ``z`` for every ``z`` in ``domain``."""

    kind = "abstract"

    def __init__(self, domain: Domain = Domain(), lambdas: Sequence[float] = DEFAULT_LAMBDAS):
        self.domain = domain
        self.lambdas = tuple(lambdas)

    def _provider(self, z: complex) -> CocycleProvider:
        raise NotImplementedError

    def provider_at(self, z) -> CocycleProvider:
        if z not in self.domain:
            raise InvalidInputError(f"z={z} lies outside the family's domain {self.domain}")
        return self._provider(complex(z))


class SymbolFamily(HolomorphicFamily):
    """Symbols with layer degrees ``sigma_j(z) = z - n - j`` (order ``k = z - n``)."""

    kind = "symbol"

    def __init__(
        self,
        n: int,
        layers: Sequence,
        cutoff: CutoffProfile = DEFAULT_CUTOFF,
        x_grid=(0.0,),
        domain: Domain = Domain(),
        lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    ):
        super().__init__(domain, lambdas)
        self.template = ClassicalSymbolModel(n, 0.0, tuple(layers), cutoff)
        self.x_grid = x_grid

    def symbol_at(self, z: complex) -> ClassicalSymbolModel:
        return self.template.with_order(complex(z) - self.template.n)

    def _provider(self, z: complex) -> CocycleProvider:
        return symbol_phi_provider(self.symbol_at(z), self.x_grid)


def _log_ratio(a: complex, log_lam: float) -> complex:
    # (lam**a - 1) / a, continuous through a = 0
    x = a * log_lam
    if abs(x) < 1e-3:
        return log_lam * (1 + x / 2 + x * x / 6 + x**3 / 24 + x**4 / 120)
    return (cmath.exp(x) - 1) / a


class SyntheticFamily(HolomorphicFamily):
    """Family with a prescribed holomorphic part and planted poles.

    ``psi(z, t) = hol(z)(t) + sum_m planted[m] * t**m / (m - z)``, so the residue
    at ``m`` is ``-planted[m] * t**m`` and ``c(m) = planted[m]``.  The pole
    terms are realized by the cocycles ``(lam**(m-z) - 1)/(m - z) * t**m * w``,
    which stay holomorphic through ``z = m`` (value ``log(lam) t**m w``).

    ``hol(z)`` must return a function of ``t`` with a ``derivative(m, t)``
    method, e.g. :class:`~cocycle_trace.cocycle_core.ExpPolynomial`.
    """

    kind = "synthetic"

    def __init__(
        self,
        hol: Callable[[complex], Callable],
        planted: Mapping[int, np.ndarray] | None = None,
        dim: int = 1,
        domain: Domain = Domain(),
        lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    ):
        super().__init__(domain, lambdas)
        self.hol = hol
        self.dim = dim
        self.planted = {int(m): np.broadcast_to(np.asarray(w, dtype=complex), (dim,)).copy()
                        for m, w in (planted or {}).items()}

    def _provider(self, z: complex) -> CocycleProvider:
        base = reconstruct_phi(self.hol(z), 0.0, z)
        poles = list(self.planted.items())

        def deriv(p: int, lam: float, t: float) -> np.ndarray:
            out = base.derivative(p, lam, t)
            log_lam = math.log(lam)
            for m, w in poles:
                if p <= m:
                    out = out + _log_ratio(m - z, log_lam) * math.perm(m, p) * t ** (m - p) * w
            return out

        return CocycleProvider(lambda lam, t: deriv(0, lam, t), z, self.dim, t_derivative=deriv,
                               name="synthetic")

    def exact_psi(self, z: complex, t: float) -> np.ndarray:
        out = np.asarray(self.hol(z)(t), dtype=complex)
        for m, w in self.planted.items():
            out = out + w * t**m / (m - z)
        return out


# ---------------------------------------------------------------------------
# operations


def decomposition_at(family: HolomorphicFamily, z, **kwargs) -> Decomposition:
    """Decomposition of the member of order ``z`` (``z`` off the pole lattice)."""
    if CocycleOrder(z).is_nonneg_integer:
        raise PoleLocusError(f"z={z} is on the pole lattice Z>=0; psi(z, .) is not defined there")
    return decompose(family.provider_at(z), family.lambdas, **kwargs)


def psi_of_z(family: HolomorphicFamily, z, t: float = 1.0, **kwargs) -> np.ndarray:
    """``psi(z, t)`` for ``z`` not a nonnegative integer."""
    kwargs.setdefault("t_grid", (t,))
    return decomposition_at(family, z, **kwargs).psi(t)


def c_of_family(family: HolomorphicFamily, m: int) -> np.ndarray:
    """``c(m)`` of the member of integer order ``m``, by differentiation at ``t = 0``."""
    if int(m) != m or m < 0:
        raise InvalidInputError(f"m must be a nonnegative integer, got {m}")
    if m not in family.domain:
        raise InvalidInputError(f"m={m} lies outside the family's domain")
    return c_by_derivative(family.provider_at(int(m)), family.lambdas)


def top_level_value(family: HolomorphicFamily, z) -> np.ndarray:
    """``v(z)`` with ``phi(z, lam, 0) = (lam**-z - 1) v(z)``; simple pole at 0 with residue ``-c(0)``."""
    return extract_v_at_zero(family.provider_at(z), family.lambdas).v


@dataclass
class PoleReport:
    m: int
    residue_estimate: np.ndarray
    c_value: np.ndarray
    gap: float
    contour: dict
    second_moment: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=complex))


def _contour_nodes(center: complex, radius: float, nodes: int) -> np.ndarray:
    return center + radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)


def _check_contour(family: HolomorphicFamily, center: complex, radius: float) -> None:
    if not 0 < radius:
        raise InvalidInputError("contour radius must be positive")
    d = family.domain
    c = complex(center)
    if not (d.re_min < c.real - radius and c.real + radius < d.re_max
            and d.im_min < c.imag - radius and c.imag + radius < d.im_max):
        raise InvalidInputError(f"contour of radius {radius} around {center} leaves the domain")


def _contour_values(family, center: complex, radius: float, nodes: int, t: float):
    zs = _contour_nodes(center, radius, nodes)
    values = []
    for i, z in enumerate(zs):
        if abs(z.imag) < 1e-14:
            zs[i] = z = complex(z.real, 0.0)
        near = round(z.real)
        if near >= 0 and abs(z - near) < 1e-12:
            raise PoleLocusError(f"contour node {z} touches the pole lattice")
        values.append(psi_of_z(family, z, t))
    return zs - center, np.array(values)


def contour_moment(
    family: HolomorphicFamily, center: complex, power: int, radius: float, nodes: int, t: float
) -> np.ndarray:
    """``(1 / 2 pi i) * contour integral of (z - center)**(power - 1) psi(z, t) dz``.

    Trapezoid rule: the mean over equispaced nodes of ``(z - center)**power psi``.
    """
    offsets, values = _contour_values(family, complex(center), radius, nodes, t)
    return np.mean(offsets[:, None] ** power * values, axis=0)


def residue_at(
    family: HolomorphicFamily, m: int, radius: float = 0.1, nodes: int = 16, t: float = 1.0
) -> PoleReport:
    """Residue of ``psi(., t)`` at ``m`` by the contour rule, compared with ``-c(m)``."""
    if radius >= 1.0:
        raise InvalidInputError("contour must exclude the neighbouring integers (radius < 1)")
    _check_contour(family, m, radius)
    offsets, values = _contour_values(family, complex(m), radius, nodes, t)
    residue = np.mean(offsets[:, None] * values, axis=0)
    second = np.mean(offsets[:, None] ** 2 * values, axis=0)
    c = c_of_family(family, m)
    gap = float(np.max(np.abs(residue + c * t**m)))
    return PoleReport(m, residue, c, gap, {"radius": radius, "nodes": nodes}, second)


def circle_mean(family: HolomorphicFamily, z0, radius: float = 0.05, nodes: int = 16, t: float = 1.0) -> np.ndarray:
    """Mean of ``psi(., t)`` on a circle; equals the center value where ``psi`` is holomorphic."""
    _check_contour(family, z0, radius)
    return contour_moment(family, complex(z0), 0, radius, nodes, t)


def scan(
    family: HolomorphicFamily,
    re_values: Sequence[float],
    im_values: Sequence[float],
    t: float = 1.0,
    exclusion: float = 0.05,
) -> tuple[list[tuple[complex, np.ndarray]], list[complex]]:
    """``psi(z, t)`` over a rectangular z-grid.

    Points closer than ``exclusion`` to the pole lattice are skipped and
    returned separately.
    """
    rows, skipped = [], []
    for re in re_values:
        for im in im_values:
            z = complex(re, im)
            near = max(0, round(re))
            if abs(z - near) < exclusion:
                skipped.append(z)
                continue
            rows.append((z, psi_of_z(family, z, t)))
    return rows, skipped
