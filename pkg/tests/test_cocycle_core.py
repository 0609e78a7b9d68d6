import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cocycle_trace.acceptance import random_psi
from cocycle_trace.cocycle_core import (
    CocycleOrder,
    CocycleProvider,
    ExpPolynomial,
    OrderClass,
    Subtraction,
    c_by_derivative,
    decompose,
    extract_c_at_zero,
    extract_v_at_zero,
    measured_decay_ratio,
    reconstruct_phi,
    reduce_order,
    series_psi_negative,
    verify_cocycle,
)
from cocycle_trace.errors import (
    DecompositionError,
    DegenerateLambdaError,
    EvaluationError,
    InconsistencyError,
    InvalidInputError,
    OrderDomainError,
    SubtractionError,
)


def provider(func, K, dim=1, **kw):
    return CocycleProvider(func, K, dim, **kw)


ZERO = lambda lam, t: 0.0  # noqa: E731
EXP_PHI = lambda lam, t: lam * math.exp(-lam * t) - math.exp(-t)  # noqa: E731
MONO = ExpPolynomial(np.array([[0], [0], [0], [1.0]]))  # t**3


# --- order classification ---------------------------------------------------


@pytest.mark.parametrize(
    "K, kind",
    [(-1, OrderClass.NEGATIVE), (-0.5 + 2j, OrderClass.NEGATIVE), (0, OrderClass.INTEGER_NONNEG),
     (3, OrderClass.INTEGER_NONNEG), (1 + 1e-13, OrderClass.INTEGER_NONNEG), (0.5, OrderClass.OTHER),
     (1 + 1e-6j, OrderClass.OTHER), (2 + 0.3j, OrderClass.OTHER)],
)
def test_order_classification(K, kind):
    assert CocycleOrder(K).kind is kind


def test_reduction_rounds_matches_floor_plus_one():
    assert CocycleOrder(-0.5).reduction_rounds == 0
    assert CocycleOrder(0).reduction_rounds == 1
    assert CocycleOrder(2.5).reduction_rounds == 3
    assert CocycleOrder(3).reduction_rounds == 4


# --- provider ------------------------------------------------------------------


def test_provider_rejects_bad_shape_and_nonfinite():
    with pytest.raises(EvaluationError):
        provider(lambda lam, t: np.ones(3), -1, dim=2).eval(2.0, 0.0)
    with pytest.raises(EvaluationError):
        provider(lambda lam, t: float("nan"), -1).eval(2.0, 0.0)
    with pytest.raises(InvalidInputError):
        provider(ZERO, -1, dim=0)


def test_finite_difference_derivative_of_smooth_provider():
    p = provider(EXP_PHI, -1)
    # d/dt at t=0: -lam**2 + 1
    assert abs(p.derivative(1, 2.0, 0.0)[0] - (-3.0)) < 1e-8
    assert abs(p.derivative(2, 2.0, 0.5)[0] - (8 * math.exp(-1) - math.exp(-0.5))) < 1e-7


# --- verify_cocycle ---------------------------------------------------------------


def test_verify_zero_function():
    assert verify_cocycle(provider(ZERO, -1.3)).max == 0.0


def test_verify_exp_example():
    res = verify_cocycle(provider(EXP_PHI, -1), (0.5, 2.0), None, (0.0, 0.3, 1.0))
    assert res.max <= 1e-13


def test_verify_logarithm_additivity():
    assert verify_cocycle(provider(lambda lam, t: math.log(lam), 0)).max <= 1e-15


def test_verify_detects_violation():
    assert verify_cocycle(provider(lambda lam, t: lam - 1.0, -2)).max > 0.1


def test_verify_grid_is_five_by_five_by_seven():
    assert verify_cocycle(provider(ZERO, -1)).points == 5 * 5 * 7


# --- series base case -------------------------------------------------------------


def test_series_zero():
    assert np.all(series_psi_negative(provider(ZERO, -1), 1.0) == 0)


def test_series_exp_example():
    value = series_psi_negative(provider(EXP_PHI, -1), 1.0, tol=1e-14)
    assert abs(value[0] - math.exp(-1)) <= 1e-10


def test_series_constant_phi_agrees_with_v_extraction():
    p = provider(lambda lam, t: math.sqrt(lam) - 1.0, -0.5)
    series = series_psi_negative(p, 0.0, tol=1e-15)[0]
    v = extract_v_at_zero(p).v[0]
    assert abs(series - 1.0) <= 1e-10
    assert abs(series - v) <= 1e-10


def test_series_requires_negative_real_part():
    with pytest.raises(OrderDomainError):
        series_psi_negative(provider(ZERO, 0.5), 1.0)


def test_series_vanishes_when_half_scaling_vanishes():
    # phi(1/2, .) == 0 forces psi == 0 on the negative strip
    p = provider(lambda lam, t: 0.0 if lam == 0.5 else (lam - 1) * t, -1)
    assert np.all(series_psi_negative(p, 0.7) == 0)


@pytest.mark.parametrize("K", [-0.5, -1.0, -2.0])
def test_series_geometric_decay(K):
    phi = reconstruct_phi(random_psi(20, dim=1), 0.0, K)
    res = series_psi_negative(phi, 1.0, tol=1e-16, full_output=True)
    ratio = measured_decay_ratio(res.partial_sums)
    assert abs(ratio - 2.0**K) <= 0.1 * 2.0**K
    assert res.tail_bound <= 1e-15 * max(1.0, abs(res.value[0])) or res.terms_used > 10


# --- extraction at t = 0 -------------------------------------------------------------


def test_extract_c_log():
    ext = extract_c_at_zero(provider(lambda lam, t: 3 * math.log(lam), 0), full_output=True)
    assert abs(ext.v[0] - 3) <= 1e-15 and ext.spread <= 1e-15


def test_extract_c_zero():
    assert extract_c_at_zero(provider(ZERO, 0))[0] == 0


def test_extract_c_wrong_order():
    with pytest.raises(OrderDomainError):
        extract_c_at_zero(provider(ZERO, 1))


def test_extract_c_degenerate_lambdas():
    with pytest.raises(DegenerateLambdaError):
        extract_c_at_zero(provider(ZERO, 0), lambdas=(1.01, 0.99))


def test_extract_c_inconsistent_input():
    with pytest.raises(InconsistencyError):
        extract_c_at_zero(provider(lambda lam, t: lam, 0))


def test_extract_v_exact_form():
    ext = extract_v_at_zero(provider(lambda lam, t: (1 / lam - 1) * 7, 1))
    assert abs(ext.v[0] - 7) <= 1e-14 and ext.valid


def test_extract_v_rejects_order_zero():
    with pytest.raises(OrderDomainError):
        extract_v_at_zero(provider(ZERO, 0))


def test_extract_v_guard_skips_near_one_powers():
    # K tiny: lam**-K - 1 is below the guard for every default lambda
    with pytest.raises(DegenerateLambdaError):
        extract_v_at_zero(provider(ZERO, 0.01))


# --- reduce_order --------------------------------------------------------------------------


def test_reduce_monomial_shift():
    p = reconstruct_phi(MONO, 0.0, 2)
    reduced = reduce_order(p, Subtraction("v", extract_v_at_zero(p).v))
    assert reduced.K == 1
    for lam in (0.5, 2.0, 3.0):
        for t in (0.0, 0.01, 0.3, 1.2):
            assert abs(reduced.eval(lam, t)[0] - (lam - 1) * t**2) <= 1e-13


def test_reduce_twice_then_c_extraction():
    phi = reconstruct_phi(MONO, 5.0, 2)
    r1 = reduce_order(phi, Subtraction("v", extract_v_at_zero(phi).v))
    r2 = reduce_order(r1, Subtraction("v", extract_v_at_zero(r1).v))
    assert r2.K == 0
    assert abs(extract_c_at_zero(r2)[0] - 5) <= 1e-12


def test_reduce_zero():
    reduced = reduce_order(provider(ZERO, 1), Subtraction("v", np.zeros(1)))
    assert reduced.eval(2.0, 0.4)[0] == 0 and reduced.eval(3.0, 0.0)[0] == 0


def test_reduce_rejects_wrong_subtraction():
    phi = reconstruct_phi(MONO, 5.0, 2)
    with pytest.raises(SubtractionError):
        reduce_order(phi, Subtraction("v", np.array([1.0])))
    with pytest.raises(InvalidInputError):
        Subtraction("x", np.zeros(1))


def test_reduced_provider_is_a_cocycle_without_exact_derivatives():
    phi = provider(EXP_PHI, -1)  # finite-difference path
    phi1 = CocycleProvider(lambda lam, t: lam**-0.5 * math.exp(-lam * t) - math.exp(-t), 0.5, 1)
    v = extract_v_at_zero(phi1).v
    reduced = reduce_order(phi1, Subtraction("v", v))
    assert verify_cocycle(reduced).max <= 1e-8
    assert phi.K == -1


# --- c by differentiation -------------------------------------------------------------------


def test_c_by_derivative_monomial():
    p = provider(lambda lam, t: 5 * t**2 * math.log(lam), 2, poly_degree_hint=2)
    for lam in (2.0, 3.0):
        assert abs(c_by_derivative(p, (lam,))[0] - 5) <= 1e-12


def test_c_by_derivative_refuses_non_integer_order():
    with pytest.raises(OrderDomainError):
        c_by_derivative(provider(EXP_PHI, -1))


# --- reconstruct_phi -------------------------------------------------------------------------


def test_reconstruct_exp_value():
    psi = ExpPolynomial(np.zeros((1, 1)), np.ones((1, 1)), np.ones(1))
    value = reconstruct_phi(psi, 0.0, -1).eval(2.0, 1.0)[0]
    assert abs(value - (2 * math.exp(-2) - math.exp(-1))) <= 1e-15
    assert abs(value - (-0.0972088747)) <= 1e-10


def test_reconstruct_log():
    p = reconstruct_phi(ExpPolynomial(np.zeros((1, 1))), 1.0, 0)
    assert abs(p.eval(3.0, 0.7)[0] - math.log(3.0)) <= 1e-15


def test_reconstruct_cubic_with_c():
    p = reconstruct_phi(MONO, 5.0, 2)
    lam, t = 1.7, 0.9
    assert abs(p.eval(lam, t)[0] - ((lam - 1) * t**3 + 5 * t**2 * math.log(lam))) <= 1e-14


def test_reconstruct_rejects_c_off_integer_orders():
    with pytest.raises(InvalidInputError):
        reconstruct_phi(MONO, 1.0, 0.5)


# --- decompose ----------------------------------------------------------------------------------


def test_decompose_exp_example():
    dec = decompose(provider(EXP_PHI, -1))
    assert np.all(dec.c == 0)
    assert np.max(np.abs(dec.samples[:, 0] - np.exp(-dec.t_grid))) <= 1e-9


def test_decompose_cubic_with_c():
    dec = decompose(reconstruct_phi(MONO, 5.0, 2))
    assert abs(dec.c[0] - 5) <= 1e-9
    assert dec.diagnostics["reconstruction_residual"] <= 1e-10


@pytest.mark.parametrize("K", [-1.0, 0.0, 1.5, 2.0])
def test_decompose_zero(K):
    dec = decompose(provider(ZERO, K))
    assert np.all(dec.c == 0) and np.all(dec.samples == 0)


def test_decompose_rejects_non_cocycle():
    with pytest.raises(DecompositionError):
        decompose(provider(lambda lam, t: (lam - 1) * (1 + t), -1.0))


def test_decompose_default_grid_is_33_chebyshev_points():
    dec = decompose(provider(ZERO, -1))
    assert len(dec.t_grid) == 33 and dec.t_grid[0] == 0 and dec.t_grid[-1] == 2


@pytest.mark.parametrize("K", [-1.5, -0.5 + 0.3j, 0.5, 2.5])
def test_round_trip_non_integer(K):
    psi = random_psi(7)
    dec = decompose(reconstruct_phi(psi, 0.0, K))
    exact = np.array([psi(t) for t in dec.t_grid])
    assert np.max(np.abs(dec.samples - exact)) <= 1e-8
    assert np.all(dec.c == 0)


@pytest.mark.parametrize("K", [0, 1, 2, 3])
def test_round_trip_integer(K):
    c = np.array([0.3 - 1j, 2.0])
    dec = decompose(reconstruct_phi(random_psi(K + 3), c, K))
    assert np.max(np.abs(dec.c - c)) <= 1e-8
    assert dec.diagnostics["reconstruction_residual"] <= 1e-8


def test_decompose_is_deterministic():
    phi = reconstruct_phi(random_psi(5), 0.0, -0.5 + 0.3j)
    a, b = decompose(phi), decompose(phi)
    assert np.array_equal(a.samples, b.samples)


# --- properties --------------------------------------------------------------------------------

orders = st.one_of(
    st.integers(0, 3).map(complex),
    st.builds(complex, st.floats(-2.5, 3.0), st.floats(-0.8, 0.8)).filter(
        lambda K: abs(K.imag) > 0.05 or abs(K.real - round(K.real)) > 0.05
    ),
)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), K=orders, c=st.complex_numbers(max_magnitude=3))
def test_reconstructed_providers_close_the_cocycle(seed, K, c):
    if not CocycleOrder(K).is_nonneg_integer:
        c = 0.0
    assert verify_cocycle(reconstruct_phi(random_psi(seed), c, K)).max <= 1e-11


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), K=st.integers(0, 3), c=st.complex_numbers(max_magnitude=3))
def test_lambda_robustness_of_c(seed, K, c):
    phi = reconstruct_phi(random_psi(seed), c, K)
    values = [c_by_derivative(phi, (lam,)) for lam in (0.5, 2.0, math.e, 3.0)]
    assert max(np.max(np.abs(a - values[0])) for a in values) <= 1e-9


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), K=st.floats(0.2, 2.8).filter(lambda k: abs(k - round(k)) > 0.1))
def test_lambda_robustness_of_v(seed, K):
    phi = reconstruct_phi(random_psi(seed), 0.0, K)
    a = extract_v_at_zero(phi, (2.0, 3.0)).v
    b = extract_v_at_zero(phi, (0.5, 4.0)).v
    assert np.max(np.abs(a - b)) <= 1e-9
