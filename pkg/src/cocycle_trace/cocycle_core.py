"""Scaling cocycles and their decomposition.

A cocycle of order ``K`` is a smooth map ``phi(lam, t)`` (``lam > 0``,
``t >= 0``) with values in ``C^d`` satisfying

    phi(l1 * l2, t) = l2**(-K) * phi(l1, t * l2) + phi(l2, t).

Every such map can be written as

    phi(lam, t) = lam**(-K) * psi(lam * t) - psi(t) + t**K * log(lam) * c

with ``c = 0`` (and ``psi`` unique) unless ``K`` is a nonnegative integer.
This module computes ``psi`` and ``c`` constructively: a geometric series
handles ``Re K < 0`` and repeated division by ``t`` lowers the order until
the series applies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._numerics import CompensatedSum, chebyshev_grid, fd_derivative, poly_coefficients
from .errors import (
    ConvergenceError,
    DecompositionError,
    DegenerateLambdaError,
    EvaluationError,
    InconsistencyError,
    InvalidInputError,
    OrderDomainError,
    SubtractionError,
)

INTEGER_TOL = 1e-12
DEFAULT_LAMBDAS = (2.0, math.e, 3.0)
LOG_GUARD = 0.1
POWER_GUARD = 0.05
BASE_LAMBDA = 0.5

VERIFY_LAMBDAS = (0.5, 0.8, 1.25, 2.0, 3.0)
VERIFY_TS = (0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5)
HELDOUT_LAMBDAS = (0.6, 1.7, 2.5)
HELDOUT_TS = (0.0, 0.15, 0.55, 1.05, 1.6)

_LOG2 = math.log(2.0)


class OrderClass(enum.Enum):
    NEGATIVE = "negative"
    INTEGER_NONNEG = "integer_nonneg"
    OTHER = "other"


@dataclass(frozen=True)
class CocycleOrder:
    """Complex order ``K`` of a cocycle, with its case classification."""

    K: complex

    def __post_init__(self):
        value = complex(self.K)
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise InvalidInputError(f"cocycle order must be finite, got {value!r}")
        object.__setattr__(self, "K", value)

    @property
    def kind(self) -> OrderClass:
        if self.is_nonneg_integer:
            return OrderClass.INTEGER_NONNEG
        if self.K.real < 0:
            return OrderClass.NEGATIVE
        return OrderClass.OTHER

    @property
    def is_nonneg_integer(self) -> bool:
        k = self.K
        nearest = round(k.real)
        return abs(k.imag) <= INTEGER_TOL and abs(k.real - nearest) <= INTEGER_TOL and nearest >= 0

    def as_int(self) -> int:
        if not self.is_nonneg_integer:
            raise OrderDomainError(f"order {self.K} is not a nonnegative integer")
        return int(round(self.K.real))

    @property
    def reduction_rounds(self) -> int:
        """Number of order reductions needed to reach ``Re K < 0``."""
        return max(0, math.floor(self.K.real) + 1)

    def shifted(self, m: int) -> "CocycleOrder":
        return CocycleOrder(self.K - m)


def as_order(order: CocycleOrder | complex | float) -> CocycleOrder:
    return order if isinstance(order, CocycleOrder) else CocycleOrder(order)


def _sup(x: np.ndarray) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


class CocycleProvider:
    """Black-box evaluator of a vector-valued cocycle.

    Parameters
    ----------
    func : callable
        ``func(lam, t)`` returning an array of shape ``(dim,)`` (scalars are
        promoted).
    order : complex or CocycleOrder
        The exponent ``K`` in the cocycle relation.
    dim : int
        Dimension of the value space.
    t_derivative : callable, optional
        ``t_derivative(m, lam, t)``, the exact ``m``-th t-derivative.
    poly_degree_hint : int, optional
        Set when ``func(lam, .)`` is a polynomial in ``t`` of at most this degree.
    fd_step : float
        Initial step for the finite-difference fallback.
    func_many : callable, optional
        ``func_many(lam, ts)`` returning shape ``(len(ts), dim)``; a batched
        form of ``func`` used by :meth:`eval_many`.
    """

    def __init__(
        self,
        func: Callable[[float, float], np.ndarray],
        order: CocycleOrder | complex,
        dim: int,
        t_derivative: Callable[[int, float, float], np.ndarray] | None = None,
        poly_degree_hint: int | None = None,
        name: str = "",
        fd_step: float = 1e-2,
        func_many: Callable[[float, np.ndarray], np.ndarray] | None = None,
    ):
        if dim < 1:
            raise InvalidInputError("value dimension must be at least 1")
        self._func = func
        self.order = as_order(order)
        self.dim = int(dim)
        self.t_derivative = t_derivative
        self.poly_degree_hint = poly_degree_hint
        self.name = name
        self.fd_step = fd_step
        self._func_many = func_many
        self._poly_cache: dict[float, np.ndarray] = {}
        self._taylor_cache: dict[float, np.ndarray] = {}

    @property
    def K(self) -> complex:
        return self.order.K

    @property
    def exact_derivatives(self) -> bool:
        return self.t_derivative is not None or self.poly_degree_hint is not None

    def _check(self, value, lam: float, t: float, what: str = "value") -> np.ndarray:
        out = np.asarray(value, dtype=complex)
        if out.ndim == 0:
            out = np.full(self.dim, out)
        if out.shape != (self.dim,):
            raise EvaluationError(
                f"provider {self.name!r} returned shape {out.shape}, expected ({self.dim},)", lam, t
            )
        if not np.all(np.isfinite(out)):
            raise EvaluationError(
                f"provider {self.name!r} returned a non-finite {what} at lam={lam!r}, t={t!r}", lam, t
            )
        return out

    def eval(self, lam: float, t: float) -> np.ndarray:
        if not lam > 0 or t < 0:
            raise InvalidInputError(f"need lam > 0 and t >= 0, got lam={lam!r}, t={t!r}")
        return self._check(self._func(lam, t), lam, t)

    __call__ = eval

    def eval_many(self, lam: float, ts: Sequence[float]) -> np.ndarray:
        """Values at several ``t`` for one ``lam``, shape ``(len(ts), dim)``."""
        if self._func_many is not None:
            out = np.asarray(self._func_many(lam, np.asarray(ts, dtype=float)), dtype=complex)
        else:
            rows = [np.asarray(self._func(lam, t), dtype=complex) for t in ts]
            out = np.array([np.full(self.dim, r) if r.ndim == 0 else r for r in rows])
        if out.shape != (len(ts), self.dim):
            raise EvaluationError(f"provider {self.name!r} returned inconsistent shapes", lam, None)
        bad = ~np.all(np.isfinite(out), axis=1)
        if np.any(bad):
            t_bad = ts[int(np.flatnonzero(bad)[0])]
            raise EvaluationError(
                f"provider {self.name!r} returned a non-finite value at lam={lam!r}, t={t_bad!r}", lam, t_bad
            )
        return out

    def _poly(self, lam: float) -> np.ndarray:
        coeffs = self._poly_cache.get(lam)
        if coeffs is None:
            coeffs = poly_coefficients(lambda s: self.eval(lam, s), self.poly_degree_hint)
            self._poly_cache[lam] = coeffs
        return coeffs

    def derivative(self, m: int, lam: float, t: float) -> np.ndarray:
        """``m``-th t-derivative: exact hook, then polynomial route, then finite differences."""
        if m == 0:
            return self.eval(lam, t)
        if self.t_derivative is not None:
            return self._check(self.t_derivative(m, lam, t), lam, t, "derivative")
        if self.poly_degree_hint is not None:
            if m > self.poly_degree_hint:
                return np.zeros(self.dim, dtype=complex)
            coeffs = self._poly(lam)
            powers = np.arange(m, len(coeffs))
            factors = np.array([math.perm(int(p), m) for p in powers], dtype=float)
            return (factors * t ** (powers - m).astype(float)) @ coeffs[m:]
        return fd_derivative(lambda s: self.eval(lam, s), m, t, h=self.fd_step)

    def taylor_coefficients(self, lam: float, count: int) -> np.ndarray:
        """First ``count`` Taylor coefficients of ``phi(lam, .)`` at ``t = 0``."""
        cached = self._taylor_cache.get(lam)
        if cached is None or len(cached) < count:
            rows = [self.derivative(p, lam, 0.0) / math.factorial(p) for p in range(count)]
            cached = np.array(rows).reshape(count, self.dim)
            self._taylor_cache[lam] = cached
        return cached[:count]


# ---------------------------------------------------------------------------
# cocycle residuals


@dataclass
class CocycleResidual:
    max: float
    mean: float
    worst: tuple[float, float, float]
    points: int


def verify_cocycle(
    phi: CocycleProvider,
    lambdas1: Sequence[float] = VERIFY_LAMBDAS,
    lambdas2: Sequence[float] | None = None,
    ts: Sequence[float] = VERIFY_TS,
) -> CocycleResidual:
    """Defect of the cocycle relation over a ``(lam1, lam2, t)`` grid."""
    lambdas2 = lambdas1 if lambdas2 is None else lambdas2
    if not len(lambdas1) or not len(lambdas2) or not len(ts):
        raise InvalidInputError("cocycle grid must be nonempty")
    K = phi.K
    worst, worst_at, total, count = 0.0, (float("nan"),) * 3, 0.0, 0
    for l1 in lambdas1:
        for l2 in lambdas2:
            scale = l2 ** (-K)
            for t in ts:
                defect = phi.eval(l1 * l2, t) - scale * phi.eval(l1, t * l2) - phi.eval(l2, t)
                d = _sup(defect)
                total += d
                count += 1
                if d > worst or count == 1:
                    worst, worst_at = d, (l1, l2, t)
    return CocycleResidual(max=worst, mean=total / count, worst=worst_at, points=count)


# ---------------------------------------------------------------------------
# base case: Re K < 0


@dataclass
class SeriesResult:
    value: np.ndarray
    terms_used: int
    tail_bound: float
    partial_sums: list[np.ndarray] | None = None


def series_psi_negative(
    phi: CocycleProvider,
    t: float,
    tol: float = 1e-13,
    max_terms: int = 20000,
    min_terms: int = 4,
    full_output: bool = False,
    block: int = 64,
):
    """Geometric series for ``psi`` when ``Re K < 0``.

    ``psi(t) = -sum_j phi(1/2, t / 2**j) * 2**(j K)``, truncated at the first
    ``J`` whose tail bound ``M 2**((J+1) Re K) / (1 - 2**Re K)`` is below
    ``tol``.  ``M`` is the sup of the sampled terms together with
    ``|phi(1/2, 0)|``.  Terms are evaluated in blocks; each block is summed
    exactly (``math.fsum``) and blocks are accumulated with compensation,
    always in index order.
    """
    K = phi.K
    if K.real >= 0:
        raise OrderDomainError(f"series base case needs Re K < 0, got K={K}")
    ratio = 2.0 ** K.real
    denom = 1.0 - ratio
    acc = CompensatedSum(phi.dim)
    partials: list[np.ndarray] | None = [] if full_output else None
    M = _sup(phi.eval(BASE_LAMBDA, 0.0))
    bound = math.inf
    j0 = 0
    while j0 < max_terms:
        js = np.arange(j0, min(j0 + block, max_terms))
        terms = phi.eval_many(BASE_LAMBDA, [math.ldexp(t, -int(j)) for j in js])
        running = np.maximum.accumulate(np.maximum(np.max(np.abs(terms), axis=1), M))
        bounds = running * ratio ** (js + 1.0) / denom
        done = np.flatnonzero((bounds <= tol) & (js + 1 >= min_terms))
        stop = int(done[0]) + 1 if done.size else len(js)
        weighted = -terms[:stop] * np.exp(js[:stop] * (K * _LOG2))[:, None]
        if partials is not None:
            base = acc.value
            partials.extend(base + np.cumsum(weighted, axis=0))
        view = weighted.view(float)
        acc.add(np.array([math.fsum(view[:, i]) for i in range(view.shape[1])]).view(complex))
        M = float(running[stop - 1])
        bound = float(bounds[stop - 1])
        if done.size:
            result = SeriesResult(acc.value, j0 + stop, bound, partials)
            return result if full_output else result.value
        j0 += len(js)
    raise ConvergenceError(
        f"series did not reach tail bound {tol:g} in {max_terms} terms (K={K})", achieved=bound
    )


def measured_decay_ratio(partial_sums: Sequence[np.ndarray], start: int = 4, noise: float = 1e-11) -> float:
    """Median ratio of successive partial-sum deviations from the final sum.

    Deviations below ``noise * max(1, |limit|)`` are treated as rounding
    noise and excluded.
    """
    limit = partial_sums[-1]
    floor = noise * max(1.0, _sup(limit))
    dev = np.array([_sup(s - limit) for s in partial_sums])
    idx = [j for j in range(start, len(dev) - 1) if dev[j] > floor and dev[j + 1] > floor]
    if not idx:
        raise InvalidInputError("too few partial sums above the noise floor to measure a ratio")
    return float(np.median([dev[j + 1] / dev[j] for j in idx]))


# ---------------------------------------------------------------------------
# values at t = 0


@dataclass
class ZeroValueExtraction:
    """Constant extracted from ``phi(lam, 0)`` with its lambda spread."""

    v: np.ndarray
    lambdas_used: list[float]
    spread: float
    valid: bool = True


def _spread(values: list[np.ndarray]) -> float:
    return max((_sup(a - b) for a in values for b in values), default=0.0)


def _finish_extraction(samples, used, tol, what) -> ZeroValueExtraction:
    mean = np.mean(np.array(samples), axis=0)
    spread = _spread(samples)
    if spread > tol * max(1.0, _sup(mean)):
        raise InconsistencyError(
            f"{what} varies with lambda (spread {spread:.3g}); provider violates the cocycle relation",
            spread,
        )
    return ZeroValueExtraction(mean, list(used), spread)


def extract_c_at_zero(
    phi: CocycleProvider,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    tol: float = 1e-9,
    full_output: bool = False,
):
    """``c`` from ``phi(lam, 0) = c log(lam)`` for an order-zero cocycle."""
    if not (phi.order.is_nonneg_integer and phi.order.as_int() == 0):
        raise OrderDomainError(f"c-extraction at t=0 needs K = 0, got K={phi.K}")
    used = [lam for lam in lambdas if abs(math.log(lam)) >= LOG_GUARD]
    if not used:
        raise DegenerateLambdaError("every lambda has |log lambda| < 0.1")
    samples = [phi.eval(lam, 0.0) / math.log(lam) for lam in used]
    result = _finish_extraction(samples, used, tol, "phi(lam, 0) / log(lam)")
    return result if full_output else result.v


def extract_v_at_zero(
    phi: CocycleProvider,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    tol: float = 1e-9,
) -> ZeroValueExtraction:
    """``v`` from ``phi(lam, 0) = (lam**(-K) - 1) v`` for ``K != 0``."""
    K = phi.K
    if abs(K) <= INTEGER_TOL:
        raise OrderDomainError("v-extraction needs K != 0; use extract_c_at_zero")
    used, samples = [], []
    for lam in lambdas:
        denom = lam ** (-K) - 1.0
        if abs(denom) >= POWER_GUARD:
            used.append(lam)
            samples.append(phi.eval(lam, 0.0) / denom)
    if not used:
        raise DegenerateLambdaError(f"every lambda has |lam**(-K) - 1| < {POWER_GUARD} (K={K})")
    return _finish_extraction(samples, used, tol, "phi(lam, 0) / (lam**-K - 1)")


# ---------------------------------------------------------------------------
# order reduction


@dataclass(frozen=True)
class Subtraction:
    """Term removed before dividing by ``t``.

    ``kind="c"``: ``value * log(lam)`` (order zero).
    ``kind="v"``: ``(lam**(-K) - 1) * value``, the cocycle of a constant psi.
    """

    kind: str
    value: np.ndarray

    def __post_init__(self):
        if self.kind not in ("c", "v"):
            raise InvalidInputError(f"subtraction kind must be 'c' or 'v', got {self.kind!r}")

    def at(self, lam: float, K: complex) -> np.ndarray:
        if self.kind == "c":
            return self.value * math.log(lam)
        return (lam ** (-K) - 1.0) * self.value


def reduce_order(
    phi: CocycleProvider,
    subtraction: Subtraction,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    tol: float = 1e-9,
    taylor_radius: float = 0.05,
    taylor_terms: int = 24,
) -> CocycleProvider:
    """Divide ``phi - subtraction`` by ``t``; the result has order ``K - 1``.

    For ``0 < t < taylor_radius`` the quotient is evaluated from the Taylor
    coefficients of ``phi`` at 0 when exact derivatives are available, which
    avoids cancellation in the nested divisions.
    """
    K = phi.K
    value = np.asarray(subtraction.value, dtype=complex).reshape(phi.dim)
    sub = Subtraction(subtraction.kind, value)
    scale = max(1.0, _sup(value))
    for lam in lambdas:
        left = phi.eval(lam, 0.0) - sub.at(lam, K)
        if _sup(left) > tol * scale:
            raise SubtractionError(
                f"phi(lam, 0) does not vanish after subtraction: |.|={_sup(left):.3g} at lam={lam}"
            )

    exact = phi.exact_derivatives
    degree = phi.poly_degree_hint
    n_taylor = taylor_terms if degree is None else max(1, min(taylor_terms, degree))

    def taylor(lam: float) -> np.ndarray:
        # coefficients of the quotient: a_{p+1} of phi
        return phi.taylor_coefficients(lam, n_taylor + 1)[1:]

    def many(lam: float, ts: np.ndarray) -> np.ndarray:
        out = np.empty((len(ts), phi.dim), dtype=complex)
        zero = ts == 0.0
        small = (ts < taylor_radius) & ~zero if exact else np.zeros(len(ts), dtype=bool)
        direct = ~(zero | small)
        if np.any(zero):
            out[zero] = phi.derivative(1, lam, 0.0)
        if np.any(small):
            # Horner on the quotient's Taylor coefficients
            coeffs = taylor(lam)
            t_small = ts[small][:, None]
            acc = np.broadcast_to(coeffs[-1], (len(t_small), phi.dim)).astype(complex)
            for c in coeffs[-2::-1]:
                acc = acc * t_small + c
            out[small] = acc
        if np.any(direct):
            t_direct = ts[direct]
            out[direct] = (phi.eval_many(lam, t_direct) - sub.at(lam, K)) / t_direct[:, None]
        return out

    def func(lam: float, t: float) -> np.ndarray:
        return many(lam, np.array([float(t)]))[0]

    def zero_derivative(p: int, lam: float) -> np.ndarray:
        return phi.derivative(p + 1, lam, 0.0) / (p + 1)

    def t_derivative(m: int, lam: float, t: float) -> np.ndarray:
        if t == 0.0:
            return zero_derivative(m, lam)
        if t >= taylor_radius:
            g = func(lam, t)
            for p in range(1, m + 1):
                g = (phi.derivative(p, lam, t) - p * g) / t
            return g
        acc = CompensatedSum(phi.dim)
        for q in range(n_taylor):
            acc.add(zero_derivative(m + q, lam) * (t**q / math.factorial(q)))
        return acc.value

    return CocycleProvider(
        func,
        phi.order.shifted(1),
        phi.dim,
        t_derivative=t_derivative if exact else None,
        poly_degree_hint=None if degree is None else max(0, degree - 1),
        name=f"reduced({phi.name})",
        fd_step=phi.fd_step,
        func_many=many,
    )


# ---------------------------------------------------------------------------
# constant c by differentiation


def c_by_derivative(
    phi: CocycleProvider,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    tol: float = 1e-9,
    full_output: bool = False,
):
    """``c = phi^{(K)}(lam, 0) / (K! log lam)``, averaged over ``lambdas``."""
    if not phi.order.is_nonneg_integer:
        raise OrderDomainError(f"c by differentiation needs K in Z>=0, got K={phi.K}")
    k = phi.order.as_int()
    used = [lam for lam in lambdas if abs(math.log(lam)) >= LOG_GUARD]
    if not used:
        raise DegenerateLambdaError("every lambda has |log lambda| < 0.1")
    samples = [phi.derivative(k, lam, 0.0) / (math.factorial(k) * math.log(lam)) for lam in used]
    result = _finish_extraction(samples, used, tol, "K-th derivative / (K! log lam)")
    return result if full_output else result.v


# ---------------------------------------------------------------------------
# smooth test functions and reconstruction


@dataclass
class ExpPolynomial:
    """``psi(t) = sum_i p_i t**i + sum_k a_k exp(-b_k t)`` with vector coefficients.

    Both the values and all t-derivatives are exact.
    """

    poly: np.ndarray = field(default_factory=lambda: np.zeros((1, 1), dtype=complex))
    amplitudes: np.ndarray = field(default_factory=lambda: np.zeros((0, 1), dtype=complex))
    rates: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        self.poly = np.atleast_2d(np.asarray(self.poly, dtype=complex))
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1, self.poly.shape[1])
        self.rates = np.asarray(self.rates, dtype=complex).reshape(-1)
        if len(self.rates) != len(self.amplitudes):
            raise InvalidInputError("one rate per exponential amplitude")

    @property
    def dim(self) -> int:
        return self.poly.shape[1]

    @property
    def degree(self) -> int | None:
        return None if len(self.rates) else self.poly.shape[0] - 1

    def derivative(self, m: int, t: float) -> np.ndarray:
        out = np.zeros(self.dim, dtype=complex)
        for i in range(m, self.poly.shape[0]):
            out += math.perm(i, m) * t ** (i - m) * self.poly[i]
        for a, b in zip(self.amplitudes, self.rates):
            out += a * (-b) ** m * np.exp(-b * t)
        return out

    def __call__(self, t: float) -> np.ndarray:
        return self.derivative(0, t)


def reconstruct_phi(
    psi: Callable[[float], np.ndarray],
    c: np.ndarray | complex,
    K: CocycleOrder | complex,
) -> CocycleProvider:
    """Cocycle ``lam**(-K) psi(lam t) - psi(t) + t**K log(lam) c``.

    If ``psi`` has a ``derivative(m, t)`` method the provider gets exact
    t-derivatives; a ``degree`` attribute gives a polynomial hint.
    """
    order = as_order(K)
    dim = np.atleast_1d(np.asarray(psi(0.0))).size
    c = np.broadcast_to(np.asarray(c, dtype=complex), (dim,)).copy()
    has_c = bool(np.any(c != 0))
    if has_c and not order.is_nonneg_integer:
        raise InvalidInputError(
            f"c must vanish when K={order.K} is not a nonnegative integer (t**K log(lam) is not smooth)"
        )
    Kc = order.K
    kint = order.as_int() if order.is_nonneg_integer else None

    def value(m: int, lam: float, t: float) -> np.ndarray:
        if m == 0:
            out = lam ** (-Kc) * np.asarray(psi(lam * t), dtype=complex) - np.asarray(psi(t), dtype=complex)
        else:
            out = lam ** (m - Kc) * psi.derivative(m, lam * t) - psi.derivative(m, t)
        if has_c and m <= kint:
            out = out + math.perm(kint, m) * t ** (kint - m) * math.log(lam) * c
        return out

    derivative = getattr(psi, "derivative", None)
    degree = getattr(psi, "degree", None)
    if degree is not None and has_c:
        degree = max(degree, kint)
    return CocycleProvider(
        lambda lam, t: value(0, lam, t),
        order,
        dim,
        t_derivative=value if derivative is not None else None,
        poly_degree_hint=degree,
        name="reconstructed",
    )


# ---------------------------------------------------------------------------
# full decomposition


@dataclass
class Decomposition:
    """``psi``, ``c`` and diagnostics for one cocycle.

    ``level_constants[m]`` is the value ``v_m`` extracted after ``m``
    reductions (zero at the level where ``c`` is extracted), so that
    ``psi(t) = sum_m v_m t**m + t**N psi_base(t)``.
    """

    psi: Callable[[float], np.ndarray]
    t_grid: np.ndarray
    samples: np.ndarray
    c: np.ndarray
    order: CocycleOrder
    level_constants: list[np.ndarray]
    diagnostics: dict


class _AssembledPsi:
    def __init__(self, constants, base, series_tol):
        self.constants = constants
        self.base = base
        self.series_tol = series_tol
        self.max_terms_used = 0
        self._cache: dict[float, np.ndarray] = {}

    def __call__(self, t: float) -> np.ndarray:
        t = float(t)
        hit = self._cache.get(t)
        if hit is None:
            hit = self._cache[t] = self._evaluate(t)
        return hit.copy()

    def _evaluate(self, t: float) -> np.ndarray:
        n = len(self.constants)
        res = series_psi_negative(self.base, t, tol=self.series_tol, full_output=True)
        self.max_terms_used = max(self.max_terms_used, res.terms_used)
        acc = CompensatedSum(self.base.dim)
        for m, v in enumerate(self.constants):
            acc.add(v * t**m)
        acc.add(res.value * t**n)
        return acc.value


def decompose(
    phi: CocycleProvider,
    lambdas: Sequence[float] = DEFAULT_LAMBDAS,
    tol: float = 1e-8,
    spread_tol: float = 1e-9,
    series_tol: float = 1e-13,
    t_grid: np.ndarray | None = None,
    check_cocycle: bool = True,
    cocycle_tol: float = 1e-8,
) -> Decomposition:
    """Split ``phi`` into ``psi`` and ``c`` by reduction to negative order."""
    order = phi.order
    if check_cocycle:
        residual = verify_cocycle(phi, (0.5, 2.0), (0.5, 3.0), (0.0, 0.4, 1.3))
        scale = max(1.0, _sup(phi.eval(2.0, 1.0)))
        if residual.max > cocycle_tol * scale:
            raise DecompositionError(
                f"input violates the cocycle relation (residual {residual.max:.3g})",
                {"cocycle_residual": residual.max},
            )
    rounds = order.reduction_rounds
    current = phi
    constants: list[np.ndarray] = []
    c = np.zeros(phi.dim, dtype=complex)
    spread = 0.0
    for m in range(rounds):
        level = order.shifted(m)
        if level.is_nonneg_integer and level.as_int() == 0:
            ext = extract_c_at_zero(current, lambdas, spread_tol, full_output=True)
            c = ext.v
            constants.append(np.zeros(phi.dim, dtype=complex))
            sub = Subtraction("c", c)
        else:
            ext = extract_v_at_zero(current, lambdas, spread_tol)
            constants.append(ext.v)
            sub = Subtraction("v", ext.v)
        spread = max(spread, ext.spread)
        current = reduce_order(current, sub, lambdas, tol=max(spread_tol, 1e-9))

    psi = _AssembledPsi(constants, current, series_tol)
    grid = chebyshev_grid(33, 2.0) if t_grid is None else np.asarray(t_grid, dtype=float)
    samples = np.array([psi(float(t)) for t in grid])

    K = order.K
    kint = order.as_int() if order.is_nonneg_integer else None
    worst, scale = 0.0, 1.0
    for lam in HELDOUT_LAMBDAS:
        for t in HELDOUT_TS:
            target = phi.eval(lam, t)
            model = lam ** (-K) * psi(lam * t) - psi(t)
            if kint is not None:
                model = model + t**kint * math.log(lam) * c
            worst = max(worst, _sup(target - model))
            scale = max(scale, _sup(target))
    diagnostics = {
        "reconstruction_residual": worst,
        "lambda_independence_spread": spread,
        "series_terms_used": psi.max_terms_used,
        "reduction_rounds": rounds,
    }
    if worst > tol * scale:
        raise DecompositionError(
            f"reconstruction residual {worst:.3g} exceeds tolerance {tol:g}", diagnostics
        )
    return Decomposition(psi, grid, samples, c, order, constants, diagnostics)
