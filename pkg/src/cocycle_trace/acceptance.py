"""Acceptance checks run by ``cocycle-trace selftest`` and by the test suite.

Each check returns a :class:`CriterionResult`; expected values are closed
forms (``1/pi``, ``ln 2 / pi``, ...) or planted ground truth, never the
output of the path being checked.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .cocycle_core import (
    CocycleOrder,
    ExpPolynomial,
    c_by_derivative,
    decompose,
    extract_c_at_zero,
    measured_decay_ratio,
    reconstruct_phi,
    series_psi_negative,
    verify_cocycle,
)
from .config import PRESETS, preset
from .results import dumps, result_document
from .symbol_model import (
    ClassicalSymbolModel,
    CutoffProfile,
    HomogeneousLayer,
    TrigAngular,
    clear_caches,
    direct_symbol_integral,
    symbol_phi_provider,
    torus_grid,
)
from .trace_extraction import cutoff_difference_integral, kv_density, wodzicki_density
from .zeta_family import SymbolFamily, residue_at

NONINTEGER_ORDERS = (-1.5, -0.5 + 0.3j, 0.5, 2.5)
INTEGER_ORDERS = (0, 1, 2, 3)
SERIES_ORDERS = (-0.5, -1.0, -2.0)
CUTOFFS = (
    CutoffProfile(1.0, 2.0, "piecewise-linear"),
    CutoffProfile(0.5, 3.0, "piecewise-linear"),
    CutoffProfile(1.0, 2.0, "smoothstep"),
    CutoffProfile(0.5, 3.0, "smoothstep"),
)
INV_PI = 1.0 / math.pi
INV_2PI = 1.0 / (2.0 * math.pi)
LN2_OVER_PI = math.log(2.0) / math.pi


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name}: measured {self.measured:.3e} (tol {self.tolerance:.1e}) {self.detail}".rstrip()


def _sup(x) -> float:
    return float(np.max(np.abs(np.asarray(x))))


def random_psi(seed: int, dim: int = 2) -> ExpPolynomial:
    """Polynomial-plus-exponential test function with exact derivatives."""
    rng = np.random.default_rng(seed)
    poly = rng.uniform(-0.5, 0.5, (4, dim)) + 1j * rng.uniform(-0.2, 0.2, (4, dim))
    amps = rng.uniform(0.5, 1.0, (1, dim))
    rates = rng.uniform(0.5, 1.5, 1)
    return ExpPolynomial(poly, amps, rates)


def _layer(j=0, angular=None):
    return HomogeneousLayer(j) if angular is None else HomogeneousLayer(j, angular)


def _symbol(n, k, cutoff=CUTOFFS[0], layers=None):
    return ClassicalSymbolModel(n, k, tuple(layers or [_layer()]), cutoff)


# ---------------------------------------------------------------------------
# criteria


def criterion_1() -> CriterionResult:
    symbol_worst, recon_worst = 0.0, 0.0
    symbols = [preset(name).symbol for name in PRESETS]
    symbols += [s.with_cutoff(CUTOFFS[3]) for s in symbols[:2]]
    for sym in symbols:
        provider = symbol_phi_provider(sym, torus_grid(sym.n, 2))
        symbol_worst = max(symbol_worst, verify_cocycle(provider).max)
    for i, K in enumerate(NONINTEGER_ORDERS + INTEGER_ORDERS):
        c = 0.0 if i < len(NONINTEGER_ORDERS) else 1.0 + 0.5j
        recon_worst = max(recon_worst, verify_cocycle(reconstruct_phi(random_psi(i), c, K)).max)
    ok = symbol_worst <= 1e-8 and recon_worst <= 1e-11
    return CriterionResult(1, "cocycle fidelity", ok, max(symbol_worst, recon_worst), 1e-8,
                           f"symbol {symbol_worst:.2e} (<=1e-8), reconstructed {recon_worst:.2e} (<=1e-11)")


def criterion_2() -> CriterionResult:
    worst, structural = 0.0, True
    for i, K in enumerate(NONINTEGER_ORDERS):
        psi = random_psi(i)
        dec = decompose(reconstruct_phi(psi, 0.0, K))
        exact = np.array([psi(t) for t in dec.t_grid])
        worst = max(worst, _sup(dec.samples - exact))
        structural &= bool(np.all(dec.c == 0)) and len(dec.t_grid) == 33
    return CriterionResult(2, "round trip, non-integer K", worst <= 1e-8 and structural, worst, 1e-8,
                           "c == 0 structurally" if structural else "c not structurally zero")


def criterion_3() -> CriterionResult:
    c_gap, resid = 0.0, 0.0
    for i, K in enumerate(INTEGER_ORDERS):
        planted = np.array([1.0 + 0.5j, -0.75 + 0.1j * i])
        dec = decompose(reconstruct_phi(random_psi(10 + i), planted, K))
        c_gap = max(c_gap, _sup(dec.c - planted))
        resid = max(resid, dec.diagnostics["reconstruction_residual"])
    ok = c_gap <= 1e-8 and resid <= 1e-8
    return CriterionResult(3, "round trip, integer K", ok, max(c_gap, resid), 1e-8,
                           f"c gap {c_gap:.2e}, reconstruction residual {resid:.2e}")


def criterion_4() -> CriterionResult:
    spread = 0.0
    names = [name for name in PRESETS if CocycleOrder(preset(name).symbol.K).is_nonneg_integer]
    for name in names:
        sym = preset(name).symbol
        provider = symbol_phi_provider(sym, torus_grid(sym.n, 3 if sym.n == 1 else 2))
        values = [c_by_derivative(provider, (lam,)) for lam in (2.0, math.e, 3.0)]
        spread = max(spread, max(_sup(a - b) for a in values for b in values))
    return CriterionResult(4, "lambda independence of c", spread <= 1e-9, spread, 1e-9,
                           f"presets {', '.join(names)}")


def criterion_5(oracle_offset: float = 0.0) -> CriterionResult:
    worst = 0.0
    for n, expected in ((1, INV_PI + oracle_offset), (2, INV_2PI + oracle_offset)):
        for chi in CUTOFFS:
            report = wodzicki_density(_symbol(n, -n, chi), torus_grid(n, 2), two_route=False)
            worst = max(worst, _sup(report.per_point - expected))
    return CriterionResult(5, "Wodzicki oracle and cutoff invariance", worst <= 1e-9, worst, 1e-9,
                           "1/pi (n=1), 1/(2 pi) (n=2), 4 cutoffs each")


def criterion_6() -> CriterionResult:
    worst, oracle = 0.0, 0.0
    for n, expected in ((1, INV_PI), (2, INV_2PI)):
        provider = symbol_phi_provider(_symbol(n, -n), torus_grid(n, 2))
        by_value = extract_c_at_zero(provider)
        by_derivative = c_by_derivative(provider)
        by_decompose = decompose(provider).c
        worst = max(worst, _sup(by_value - by_derivative), _sup(by_decompose - by_derivative))
        oracle = max(oracle, _sup(by_value - expected))
    ok = worst <= 1e-9 and oracle <= 1e-9
    return CriterionResult(6, "order -dim M specialization (K=0 branch)", ok, max(worst, oracle), 1e-9,
                           f"two-route gap {worst:.2e}, oracle gap {oracle:.2e}")


def criterion_7() -> CriterionResult:
    sym = _symbol(1, -2)
    report = kv_density(sym, [0.0])
    value = report.per_point[0]
    direct = direct_symbol_integral(sym, 0.0)
    err = max(abs(value - LN2_OVER_PI), abs(value - direct))
    return CriterionResult(7, "KV trace-class consistency", err <= 1e-9, err, 1e-9,
                           f"psi(1) = {value.real:.10f}, ln2/pi = {LN2_OVER_PI:.10f}")


def criterion_8() -> CriterionResult:
    chi1, chi2 = CUTOFFS[0], CUTOFFS[3]
    symbols = [
        _symbol(1, -0.5),
        _symbol(2, -1.5, layers=[_layer(0, TrigAngular((1.0, 0.4))), _layer(1)]),
        _symbol(1, 0.3 + 0.2j, layers=[_layer(0), _layer(2)]),
    ]
    worst = 0.0
    for sym in symbols:
        grid = torus_grid(sym.n, 2)
        diff = kv_density(sym, grid).per_point - kv_density(sym.with_cutoff(chi2), grid).per_point
        expected = np.array([cutoff_difference_integral(sym.with_cutoff(chi1), chi2, x) for x in grid])
        worst = max(worst, _sup(diff - expected))
    return CriterionResult(8, "KV cutoff covariance", worst <= 1e-9, worst, 1e-9)


def criterion_9() -> CriterionResult:
    family = SymbolFamily(1, [_layer()])
    report = residue_at(family, 0)
    res = report.residue_estimate[0]
    oracle_gap = abs(res + INV_PI)
    second = _sup(report.second_moment)
    worst = max(oracle_gap, report.gap, second)
    return CriterionResult(9, "pole residue equals -c", worst <= 1e-6, worst, 1e-6,
                           f"residue {res.real:.10f}, gap to -c(0) {report.gap:.2e}, second moment {second:.2e}")


def criterion_10() -> CriterionResult:
    worst = 0.0
    detail = []
    for i, K in enumerate(SERIES_ORDERS):
        phi = reconstruct_phi(random_psi(20 + i, dim=1), 0.0, K)
        res = series_psi_negative(phi, 1.0, tol=1e-16, full_output=True)
        ratio = measured_decay_ratio(res.partial_sums)
        expected = 2.0**K
        rel = abs(ratio - expected) / expected
        worst = max(worst, rel)
        detail.append(f"K={K}: {ratio:.4f} vs {expected:.4f}")
    return CriterionResult(10, "series geometric decay", worst <= 0.1, worst, 0.1, "; ".join(detail))


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_criteria(oracle_offset: float = 0.0) -> list[CriterionResult]:
    clear_caches()
    results = []
    for number, check in CRITERIA.items():
        results.append(check(oracle_offset) if number == 5 else check())
    return results


def _document(results: list[CriterionResult]) -> dict:
    return result_document(
        "selftest",
        None,
        status="ok" if all(r.passed for r in results) else "failed",
        scalars={f"criterion_{r.number}": r.measured for r in results},
        tables={"criteria": [asdict(r) for r in results]},
    )


def selftest(oracle_offset: float = 0.0, echo: Callable[[str], None] | None = None) -> tuple[list[CriterionResult], dict]:
    """Run every criterion twice; the second pass must reproduce the first bit for bit."""
    start = time.perf_counter()
    first = run_criteria(oracle_offset)
    if echo:
        for r in first:
            echo(r.line())
    second = run_criteria(oracle_offset)
    same = dumps(_document(first)) == dumps(_document(second))
    determinism = CriterionResult(11, "determinism", same, 0.0 if same else 1.0, 0.0,
                                  "two runs bit-identical" if same else "documents differ")
    if echo:
        echo(determinism.line())
    if echo:
        echo(f"wall time {time.perf_counter() - start:.1f} s")
    results = first + [determinism]
    return results, _document(results)
