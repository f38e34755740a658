"""Isoelastic demand with identical quadratic costs.

Price is ``p(Q) = 1/Q`` for total supply ``Q`` and every firm pays
``C(q) = c*q**2``.  Each decision rule in :mod:`oligopoly.dynamics` is built
from the functions here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from . import _kernels

#: Relative residual bound promised by the response solvers.
RESPONSE_RTOL = 1e-12


class DomainError(ValueError):
    """Raised when a quantity is requested where the market is undefined."""


@dataclass(frozen=True)
class MarketParams:
    c: float

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError(f"cost coefficient c must be finite and > 0, got {self.c!r}")


@dataclass(frozen=True)
class OutputVector:
    """Per-firm quantities with the cached total ``Q``."""

    q: tuple
    Q: float

    @classmethod
    def of(cls, values: Iterable[float]) -> "OutputVector":
        q = tuple(float(v) for v in values)
        if not 2 <= len(q) <= 5:
            raise ValueError(f"an output vector holds 2 to 5 firms, got {len(q)}")
        for i, v in enumerate(q):
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"q[{i}] = {v!r} must be finite and nonnegative")
        return cls(q, math.fsum(q))

    def __len__(self):
        return len(self.q)

    def __getitem__(self, i):
        return self.q[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.q)


Market = Union[MarketParams, float]
State = Union[OutputVector, Sequence[float], np.ndarray]


def _c(m: Market) -> float:
    return m.c if isinstance(m, MarketParams) else MarketParams(float(m)).c


def _state(state: State) -> OutputVector:
    return state if isinstance(state, OutputVector) else OutputVector.of(state)


def _positive_total(s: OutputVector) -> float:
    if not s.Q > 0:
        raise DomainError("total supply must be positive; the market is undefined at the origin")
    return s.Q


def price(state: State) -> float:
    return 1.0 / _positive_total(_state(state))


def profit(state: State, i: int, m: Market) -> float:
    """Revenue ``q_i/Q`` minus cost ``c*q_i**2``."""
    s = _state(state)
    Q = _positive_total(s)
    qi = s[i]
    return qi / Q - _c(m) * qi * qi


def marginal_profit(state: State, i: int, m: Market) -> float:
    """Partial derivative of firm ``i``'s profit in its own output."""
    s = _state(state)
    Q = _positive_total(s)
    rivals = math.fsum(v for j, v in enumerate(s.q) if j != i)
    return rivals / (Q * Q) - 2.0 * _c(m) * s[i]


def best_response(S: float, m: Market) -> float:
    """Profit-maximising output against rivals' total supply ``S``.

    Solves ``S - 2*c*q*(S + q)**2 = 0`` for its unique nonnegative root by
    bisection on ``[0, (S/(2c))**(1/3) + S]`` followed by a Newton polish.

    Raises:
        ValueError: if ``S`` is negative or not finite.
    """
    S = float(S)
    if not (S >= 0 and math.isfinite(S)):
        raise ValueError(f"rivals' supply must be finite and >= 0, got {S!r}")
    return float(_kernels.best_response(S, _c(m)))


def best_response_residual(S: float, q: float, m: Market) -> float:
    c = _c(m)
    return S - 2.0 * c * q * (S + q) ** 2


def lma_response(S: float, q_self: float, m: Market) -> float:
    """Reply of a firm that linearises demand around the current point."""
    c = _c(m)
    Q = S + q_self
    return (2.0 * q_self + S) / (2.0 * (1.0 + c * Q * Q))


def symmetric_output(n: int, c: float) -> float:
    """Common output at the all-active symmetric equilibrium of ``n`` firms."""
    if n < 1:
        raise ValueError("n must be positive")
    return math.sqrt((n - 1) / (2.0 * c * n * n))
