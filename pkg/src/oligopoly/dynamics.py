"""Heterogeneous Cournot maps built from per-firm decision rules.

A :class:`ModelSpec` is an ordered list of :class:`Mechanism` objects sharing
one cost coefficient.  The state of a model is the vector of outputs of all
firms *except* a trailing rational firm, whose output is always the exact
best response to the others' current total and is recovered with
:func:`rational_output`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .market import MarketParams, symmetric_output

MAX_FIRMS = 5

#: simulate() detection settings
CONFIRM_STEPS = 10
MAX_CYCLE_PERIOD = 64
BLOWUP = 1e12


class Kind(enum.Enum):
    GRADIENT = "gradient"
    BEST_RESPONSE = "best_response"
    ADAPTIVE = "adaptive"
    LMA = "lma"
    RATIONAL = "rational"


_KERNEL_CODE = {
    Kind.GRADIENT: _kernels.GRADIENT,
    Kind.BEST_RESPONSE: _kernels.BEST_RESPONSE,
    Kind.ADAPTIVE: _kernels.ADAPTIVE,
    Kind.LMA: _kernels.LMA,
}

_ALIASES = {
    "g": Kind.GRADIENT, "gradient": Kind.GRADIENT,
    "b": Kind.BEST_RESPONSE, "best_response": Kind.BEST_RESPONSE,
    "naive": Kind.BEST_RESPONSE, "naive_best_response": Kind.BEST_RESPONSE,
    "a": Kind.ADAPTIVE, "adaptive": Kind.ADAPTIVE,
    "l": Kind.LMA, "lma": Kind.LMA,
    "r": Kind.RATIONAL, "rational": Kind.RATIONAL,
}


class InvalidState(ValueError):
    """The map is undefined at a state (nonpositive or non-finite supply)."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NoConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class Mechanism:
    kind: Kind
    k: Optional[float] = None
    l: Optional[float] = None

    def __post_init__(self):
        if self.kind is Kind.GRADIENT:
            if self.k is None or not (self.k > 0 and math.isfinite(self.k)):
                raise ValueError(f"gradient firm needs finite speed k > 0, got {self.k!r}")
        elif self.k is not None:
            raise ValueError(f"{self.kind.value} firm takes no k")
        if self.kind is Kind.ADAPTIVE:
            if self.l is None or not 0 < self.l <= 1:
                raise ValueError(f"adaptive firm needs weight l in (0, 1], got {self.l!r}")
        elif self.l is not None:
            raise ValueError(f"{self.kind.value} firm takes no l")

    @classmethod
    def parse(cls, name: str, k: Optional[float] = None, l: Optional[float] = None) -> "Mechanism":
        """Build from a name like ``"gradient"`` or ``"a"``, picking only the
        parameters that kind uses."""
        try:
            kind = _ALIASES[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown mechanism {name!r}") from None
        return cls(kind,
                   k=k if kind is Kind.GRADIENT else None,
                   l=l if kind is Kind.ADAPTIVE else None)


def gradient(k):
    return Mechanism(Kind.GRADIENT, k=float(k))


def naive_best_response():
    return Mechanism(Kind.BEST_RESPONSE)


def adaptive(l):
    return Mechanism(Kind.ADAPTIVE, l=float(l))


def lma():
    return Mechanism(Kind.LMA)


def rational():
    return Mechanism(Kind.RATIONAL)


@dataclass(frozen=True)
class ModelSpec:
    mechanisms: tuple
    market: MarketParams
    name: Optional[str] = None
    # kernel encodings, derived
    _kinds: np.ndarray = field(init=False, repr=False, compare=False)
    _k: np.ndarray = field(init=False, repr=False, compare=False)
    _l: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mechs = tuple(self.mechanisms)
        object.__setattr__(self, "mechanisms", mechs)
        if not 2 <= len(mechs) <= MAX_FIRMS:
            raise ValueError(f"a model has 2 to {MAX_FIRMS} firms, got {len(mechs)}")
        n_rational = sum(m.kind is Kind.RATIONAL for m in mechs)
        if n_rational > 1:
            raise ValueError("at most one rational firm is allowed")
        if n_rational and mechs[-1].kind is not Kind.RATIONAL:
            raise ValueError("the rational firm must be the last firm")
        if n_rational and len(mechs) < 2:
            raise ValueError("a rational firm needs at least one rival")
        state_mechs = mechs[:-1] if n_rational else mechs
        object.__setattr__(self, "_kinds", np.array([_KERNEL_CODE[m.kind] for m in state_mechs], dtype=np.int64))
        object.__setattr__(self, "_k", np.array([m.k or 0.0 for m in state_mechs]))
        object.__setattr__(self, "_l", np.array([m.l or 0.0 for m in state_mechs]))

    @property
    def c(self) -> float:
        return self.market.c

    @property
    def n_firms(self) -> int:
        return len(self.mechanisms)

    @property
    def has_rational(self) -> bool:
        return self.mechanisms[-1].kind is Kind.RATIONAL

    @property
    def dim(self) -> int:
        """Length of the state vector (rational firm excluded)."""
        return self.n_firms - self.has_rational

    def kernel_args(self):
        return self._kinds, self._k, self._l, self.market.c, self.has_rational


def build_model(mechanisms: Sequence[Mechanism], market, name: Optional[str] = None) -> ModelSpec:
    if not isinstance(market, MarketParams):
        market = MarketParams(float(market))
    return ModelSpec(tuple(mechanisms), market, name)


def gb(k, c):
    return build_model([gradient(k), naive_best_response()], c, "gb")


def gba(k, l, c):
    return build_model([gradient(k), naive_best_response(), adaptive(l)], c, "gba")


def gbal(k, l, c):
    return build_model([gradient(k), naive_best_response(), adaptive(l), lma()], c, "gbal")


def gbalr(k, l, c):
    return build_model([gradient(k), naive_best_response(), adaptive(l), lma(), rational()], c, "gbalr")


PRESETS = {"gb": gb, "gba": gba, "gbal": gbal, "gbalr": gbalr}
PRESET_ORDER = ("gb", "gba", "gbal", "gbalr")


def preset(name: str, k, l=None, c=1.0) -> ModelSpec:
    """Look up a preset by name; ``l`` is ignored by ``gb``."""
    name = name.lower()
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_ORDER)}")
    if name == "gb":
        return gb(k, c)
    if l is None:
        raise ValueError(f"preset {name} needs the adaptation weight l")
    return PRESETS[name](k, l, c)


def _as_state(model: ModelSpec, state) -> np.ndarray:
    x = np.array(state, dtype=float).reshape(-1)
    if x.shape[0] != model.dim:
        raise ValueError(f"state has {x.shape[0]} entries, model {model.name or ''} expects {model.dim}")
    return x


def step(model: ModelSpec, state) -> np.ndarray:
    """One period of the map.

    Raises:
        InvalidState: if the total supply is not positive, a rival total is
            negative, or a result is not finite.
    """
    x = _as_state(model, state)
    out = np.empty_like(x)
    status = _kernels.step_into(*model.kernel_args(), x, out)
    if status != _kernels.STEP_OK:
        raise InvalidState(_STEP_MESSAGES[status])
    return out


_STEP_MESSAGES = {
    _kernels.STEP_BAD_TOTAL: "total supply is not positive",
    _kernels.STEP_NEGATIVE_RIVALS: "rivals' total supply is negative",
    _kernels.STEP_NON_FINITE: "map produced a non-finite output",
}


def rational_output(model: ModelSpec, state) -> float:
    """Output of the rational firm facing the current state."""
    if not model.has_rational:
        raise ValueError("model has no rational firm")
    x = _as_state(model, state)
    total = math.fsum(x)
    if not total >= 0:
        raise InvalidState("rivals' total supply is negative")
    return float(_kernels.best_response(total, model.c))


def full_state(model: ModelSpec, state) -> np.ndarray:
    """State with the rational firm's output appended when there is one."""
    x = _as_state(model, state)
    if model.has_rational:
        return np.append(x, rational_output(model, x))
    return x


class Outcome(enum.Enum):
    CONVERGED = "ConvergedToFixedPoint"
    CYCLE = "Cycle"
    DIVERGENT = "Divergent"
    INVALID_STATE = "InvalidState"
    APERIODIC = "Aperiodic"


_OUTCOME = {
    _kernels.SIM_CONVERGED: Outcome.CONVERGED,
    _kernels.SIM_CYCLE: Outcome.CYCLE,
    _kernels.SIM_DIVERGENT: Outcome.DIVERGENT,
    _kernels.SIM_INVALID: Outcome.INVALID_STATE,
    _kernels.SIM_APERIODIC: Outcome.APERIODIC,
}


@dataclass
class Trajectory:
    """Iterates of a model.

    ``states`` has one row per period, starting with the initial state;
    ``confirmed`` is False when the step budget ran out before the detection
    rule held and ``classification`` reports the longest-held behaviour.
    For an invalid state, ``invalid_step`` is the step at which the map
    failed and ``states`` stops at the last valid state.
    """

    states: np.ndarray
    classification: Outcome
    period: int
    steps_used: int
    confirmed: bool = True
    invalid_step: Optional[int] = None

    @property
    def label(self) -> str:
        if self.classification is Outcome.CYCLE:
            return f"Cycle({self.period})"
        return self.classification.value

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def simulate(model: ModelSpec, state0, max_steps: int = 10_000, tol: float = 1e-10) -> Trajectory:
    """Iterate the map and classify the orbit.

    Converged: successive states within ``tol`` (max-norm) for 10
    consecutive steps.  Cycle(p): the state matches the one ``p`` steps
    earlier, ``2 <= p <= 64``, for 10 consecutive steps while differing by
    more than ``sqrt(tol)`` from the states 1..p-1 steps earlier.  Divergent: a
    coordinate exceeds 1e12 or the orbit leaves the nonnegative orthant.
    """
    x0 = _as_state(model, state0)
    if not np.all(np.isfinite(x0)) or np.any(x0 <= 0):
        raise ValueError("initial outputs must be finite and strictly positive")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    states = np.empty((max_steps + 1, x0.shape[0]))
    states[0] = x0
    code, period, used, confirmed = _kernels.simulate_into(
        *model.kernel_args(), states, float(tol), MAX_CYCLE_PERIOD, CONFIRM_STEPS, BLOWUP,
        math.sqrt(tol))
    outcome = _OUTCOME[int(code)]
    if outcome is Outcome.INVALID_STATE:
        return Trajectory(states[:used].copy(), outcome, 0, int(used), True, int(used))
    return Trajectory(states[:used + 1].copy(), outcome, int(period), int(used), bool(confirmed))


@dataclass
class EquilibriumSet:
    interior: np.ndarray
    boundary: list


def interior_equilibrium(model: ModelSpec) -> np.ndarray:
    """Symmetric positive fixed point, every output sqrt((n-1)/(2 c n^2))."""
    q = symmetric_output(model.n_firms, model.c)
    return np.full(model.dim, q)


def boundary_equilibria(model: ModelSpec) -> list:
    """Fixed points with one gradient firm shut down.

    The remaining ``n - 1`` firms sit at their own symmetric equilibrium.
    Empty when fewer than two firms would stay active.
    """
    grads = [i for i, m in enumerate(model.mechanisms) if m.kind is Kind.GRADIENT]
    if not grads:
        raise ValueError("model has no gradient firm")
    n = model.n_firms
    if n - 1 < 2:
        return []
    q = symmetric_output(n - 1, model.c)
    out = []
    for i in grads:
        x = np.full(model.dim, q)
        x[i] = 0.0
        out.append(x)
    return out


def equilibria(model: ModelSpec) -> EquilibriumSet:
    has_grad = any(m.kind is Kind.GRADIENT for m in model.mechanisms)
    return EquilibriumSet(interior_equilibrium(model), boundary_equilibria(model) if has_grad else [])


def _fd_jacobian(model, x, h):
    m = x.shape[0]
    J = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        J[:, j] = (step(model, x + e) - step(model, x - e)) / (2 * h)
    return J


def refine_fixed_point(model: ModelSpec, guess, tol: float = 1e-12, max_iter: int = 100) -> np.ndarray:
    """Damped Newton on ``step(x) - x = 0`` with a finite-difference Jacobian.

    Raises:
        NoConvergence: if the residual is not below ``tol`` within
            ``max_iter`` iterations or the iterate leaves the domain.
    """
    x = _as_state(model, guess)

    def residual(y):
        return step(model, y) - y

    try:
        F = residual(x)
    except InvalidState as err:
        raise NoConvergence(f"guess is outside the domain: {err}") from err
    for _ in range(max_iter):
        norm = np.max(np.abs(F))
        if norm < tol:
            return x
        h = 1e-7 * max(1.0, np.max(np.abs(x)))
        try:
            J = _fd_jacobian(model, x, h) - np.eye(x.shape[0])
            dx = np.linalg.solve(J, -F)
        except (InvalidState, np.linalg.LinAlgError):
            dx = F  # plain fixed-point step
        lam = 1.0
        while lam > 1e-6:
            y = x + lam * dx
            try:
                Fy = residual(y)
            except InvalidState:
                lam *= 0.5
                continue
            if np.max(np.abs(Fy)) < norm or np.max(np.abs(Fy)) < tol:
                x, F = y, Fy
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"line search stalled at residual {norm:.3g}")
    if np.max(np.abs(F)) < tol:
        return x
    raise NoConvergence(f"no convergence in {max_iter} iterations (residual {np.max(np.abs(F)):.3g})")
