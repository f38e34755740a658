import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oligopoly import market
from oligopoly.market import DomainError, MarketParams, OutputVector

from oracles import best_response_grid, best_response_roots

positive = st.floats(1e-4, 1e3, allow_nan=False, allow_infinity=False)
costs = st.floats(1e-3, 1e2, allow_nan=False, allow_infinity=False)


def test_price_and_profit_values():
    assert market.price([1.0, 3.0]) == 0.25
    assert market.profit([1.0, 3.0], 0, 0.5) == pytest.approx(0.25 - 0.5)
    # rivals / Q^2 - 2 c q_i
    assert market.marginal_profit([1.0, 3.0], 0, 0.5) == pytest.approx(3 / 16 - 1.0)


def test_frozen_best_responses():
    # S - 2c q (S+q)^2 = 0 at S=1, c=1/2 is q^3 + 2q^2 + q - 1 = 0
    assert market.best_response(1.0, 0.5) == pytest.approx(0.46557123187676802, rel=1e-14)
    assert market.best_response(0.0, 1.0) == 0.0
    # symmetric duopoly: BR(E) = E with E = 1/sqrt(8c)
    c = 2.0
    E = math.sqrt(1 / (8 * c))
    assert market.best_response(E, c) == pytest.approx(E, rel=1e-14)


def test_domain_errors():
    with pytest.raises(DomainError):
        market.price([0.0, 0.0])
    with pytest.raises(ValueError):
        market.best_response(-1.0, 1.0)
    with pytest.raises(ValueError):
        MarketParams(0.0)
    with pytest.raises(ValueError):
        OutputVector.of([1.0])
    with pytest.raises(ValueError):
        OutputVector.of([1.0, -0.1])
    with pytest.raises(ValueError):
        OutputVector.of([1.0, float("nan")])


def test_output_vector_total():
    v = OutputVector.of([0.1, 0.2, 0.3])
    assert v.Q == pytest.approx(0.6) and len(v) == 3 and v[2] == 0.3


@given(positive, costs)
@settings(max_examples=300, deadline=None)
def test_best_response_matches_cubic_roots(S, c):
    q = market.best_response(S, c)
    assert q == pytest.approx(best_response_roots(S, c), rel=1e-10, abs=1e-300)
    scale = S + 2 * c * q * (S + q) ** 2
    assert abs(market.best_response_residual(S, q, c)) <= 1e-12 * scale


@given(st.floats(0.01, 10), st.floats(0.05, 5))
@settings(max_examples=40, deadline=None)
def test_best_response_maximises_profit(S, c):
    q = market.best_response(S, c)
    grid_q = best_response_grid(S, c)
    prof = lambda x: x / (S + x) - c * x * x
    assert prof(q) >= prof(grid_q) - 1e-12
    step = 2 * (S / (2 * c)) ** (1 / 3) / 200000
    assert abs(q - grid_q) <= 2 * step


@given(positive, costs, positive)
@settings(max_examples=100, deadline=None)
def test_best_response_increasing_below_peak(S, c, factor):
    # BR peaks where S = q, i.e. at S = 1/sqrt(8c)
    peak = 1 / math.sqrt(8 * c)
    a, b = sorted([S, S * (1 + 1e-3)])
    if b < peak:
        assert market.best_response(a, c) <= market.best_response(b, c)
    elif a > peak:
        assert market.best_response(a, c) >= market.best_response(b, c)


def test_lma_response_formula():
    S, q, c = 0.3, 0.2, 1.5
    Q = S + q
    assert market.lma_response(S, q, c) == pytest.approx((2 * q + S) / (2 * (1 + c * Q * Q)))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_symmetric_output_is_fixed_by_best_response(n):
    c = 0.7
    q = market.symmetric_output(n, c)
    assert q == pytest.approx(math.sqrt((n - 1) / (2 * c * n * n)))
    assert market.best_response((n - 1) * q, c) == pytest.approx(q, rel=1e-13)
    assert market.marginal_profit([q] * n, 0, c) == pytest.approx(0.0, abs=1e-14)
