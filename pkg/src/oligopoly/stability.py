"""Local stability of the interior equilibrium.

The characteristic polynomial, determinant and Schur-Cohn routines here are
written over nested sequences and only use ``+``, ``-``, ``*`` and division
by integers, so the same code evaluates Python floats, exact
:class:`fractions.Fraction` values, and whole numpy arrays of parameter
points at once.

Closed-form Jacobians come in two variants.  ``"printed"`` is the reference
set of closed forms that the condition blocks, sample tables and thresholds
are built on.  ``"derived"`` differentiates the map as implemented; it
differs only in the third row of the five-firm (``gbalr``) matrix, where the
printed row ``(0, 0, 1 - 25l/28, 0)`` drops the adaptive firm's dependence on
the rational firm's reply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .dynamics import ModelSpec, _fd_jacobian, _as_state

STABILITY_TOL = 1e-12

STABLE = _kernels.CLASS_STABLE
UNSTABLE = _kernels.CLASS_UNSTABLE
MARGINAL = _kernels.CLASS_MARGINAL
VERDICTS = {STABLE: "stable", UNSTABLE: "unstable", MARGINAL: "marginal"}

PRESETS = ("gb", "gba", "gbal", "gbalr")
VARIANTS = ("printed", "derived")

# multiple of sqrt(c) that each preset's closed-form Jacobian is written in
_RADICAND = {"gb": 2, "gba": 1, "gbal": 6, "gbalr": 2}


# -- generic polynomial / determinant machinery --------------------------------

def det(M):
    """Determinant by cofactor expansion along the first row."""
    n = len(M)
    if n == 0:
        return 1
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in (list(r) for r in M[1:])]
        term = M[0][j] * det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _matmul(A, B):
    n = len(A)
    return [[sum(A[i][t] * B[t][j] for t in range(n)) for j in range(n)] for i in range(n)]


def char_poly_coefficients(M):
    """Faddeev-LeVerrier.  Returns ``[a_0, ..., a_{n-1}, 1]`` for
    ``det(lam*I - M) = lam**n + a_{n-1} lam**(n-1) + ... + a_0``."""
    n = len(M)
    Mk = [[0] * n for _ in range(n)]
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    for kk in range(1, n + 1):
        AM = _matmul(M, Mk)
        Mk = [[AM[i][j] + (coeffs[n - kk + 1] if i == j else 0) for j in range(n)] for i in range(n)]
        trace = sum(M[i][t] * Mk[t][i] for i in range(n) for t in range(n))
        coeffs[n - kk] = -trace / kk
    return coeffs


def _determinant_indices(n):
    # even n: D1, D3, ..., D_{n-1};  odd n: D2, D4, ..., D_{n-1}
    return list(range(1, n, 2)) if n % 2 == 0 else list(range(2, n, 2))


def schur_cohn_labels(n):
    labels = ["A(1)", f"(-1)^{n}A(-1)"]
    for i in _determinant_indices(n):
        labels += [f"D{i}+", f"D{i}-"]
    return labels


def schur_cohn_values(coeffs):
    """Quantities that must all be positive for every root to lie in the
    open unit disk.  ``coeffs`` is ``[a_0, ..., a_{n-1}, 1]``."""
    n = len(coeffs) - 1
    A1 = sum(coeffs)
    Am1 = sum(a if i % 2 == 0 else -a for i, a in enumerate(coeffs))
    vals = [A1, Am1 if n % 2 == 0 else -Am1]
    for i in _determinant_indices(n):
        for sign in (1, -1):
            M = []
            for r in range(i):
                row = []
                for s in range(i):
                    upper = coeffs[n - (s - r)] if s >= r else 0
                    lower = coeffs[i - 1 - r - s] if r + s <= i - 1 else 0
                    row.append(upper + lower if sign > 0 else upper - lower)
                M.append(row)
            vals.append(det(M))
    return vals


def classify_values(values, tol=STABILITY_TOL):
    """STABLE if every value > tol, UNSTABLE if any < -tol, else MARGINAL.

    Scalars give an int; any numpy array input gives an int array.
    """
    if any(isinstance(v, np.ndarray) for v in values):
        V = np.stack(np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in values]))
        unstable = np.any(V < -tol, axis=0)
        marginal = np.any(V <= tol, axis=0)
        return np.where(unstable, UNSTABLE, np.where(marginal, MARGINAL, STABLE))
    if any(v < -tol for v in values):
        return UNSTABLE
    if any(v <= tol for v in values):
        return MARGINAL
    return STABLE


# -- public polynomial API -----------------------------------------------------

@dataclass(frozen=True)
class CharPoly:
    """Monic ``lam**n + a_{n-1} lam**(n-1) + ... + a_0``; ``coeffs`` holds
    ``a_0 .. a_{n-1}``."""

    coeffs: tuple

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    @property
    def full(self) -> list:
        return list(self.coeffs) + [1]

    def __call__(self, lam):
        acc = 1
        for a in reversed(self.coeffs):
            acc = acc * lam + a
        return acc

    def roots(self) -> np.ndarray:
        return np.roots([1.0] + [float(a) for a in reversed(self.coeffs)])


def char_poly(matrix) -> CharPoly:
    M = [list(row) for row in matrix]
    n = len(M)
    if not 1 <= n <= 5 or any(len(r) != n for r in M):
        raise ValueError("char_poly needs a square matrix of size 1..5")
    if isinstance(matrix, np.ndarray):
        M = [[float(v) for v in row] for row in M]
    return CharPoly(tuple(char_poly_coefficients(M)[:-1]))


@dataclass
class SchurCohnReport:
    degree: int
    boundary_checks: dict
    determinants: dict
    verdict: str

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"

    def values(self) -> list:
        return list(self.boundary_checks.values()) + list(self.determinants.values())


def schur_cohn(p: CharPoly, tol: float = STABILITY_TOL) -> SchurCohnReport:
    """Decide whether all roots of ``p`` lie strictly inside the unit disk.

    Any quantity within ``tol`` of zero (and none clearly negative) gives
    the verdict ``"marginal"``.
    """
    if not 1 <= p.degree <= 5:
        raise ValueError("schur_cohn supports degree 1..5")
    vals = schur_cohn_values(p.full)
    labels = schur_cohn_labels(p.degree)
    return SchurCohnReport(
        degree=p.degree,
        boundary_checks=dict(zip(labels[:2], vals[:2])),
        determinants=dict(zip(labels[2:], vals[2:])),
        verdict=VERDICTS[classify_values(vals, tol)],
    )


@dataclass
class ConditionBlock:
    """Named inequality values with the relation each must satisfy.

    ``margins`` are the same quantities rescaled so that every one of them
    must be positive; verdicts are computed from the margins.
    """

    tag: str
    names: tuple
    values: tuple
    relations: tuple
    margins: tuple
    tol: float = STABILITY_TOL

    @property
    def satisfied(self) -> tuple:
        return tuple(m > 0 for m in self.margins)

    @property
    def verdict(self) -> str:
        return VERDICTS[classify_values(list(self.margins), self.tol)]

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"


def _corollary_margins(a):
    if len(a) == 3:
        a0, a1, a2 = a
        return [1 + a2 + a1 + a0,
                1 - a2 + a1 - a0,
                -a0 ** 2 - a0 * a2 + a1 + 1,
                -a0 ** 2 + a0 * a2 - a1 + 1]
    if len(a) == 4:
        a0, a1, a2, a3 = a
        return [1 + a3 + a2 + a1 + a0,
                1 - a3 + a2 - a1 + a0,
                -a0 ** 3 - a0 ** 2 * a2 + a0 * a1 * a3 + a0 * a3 ** 2 - a0 ** 2 - a1 ** 2 - a1 * a3 + a0 + a2 + 1,
                a0 ** 3 - a0 ** 2 * a2 + a0 * a1 * a3 - a0 * a3 ** 2 - a0 ** 2 + 2 * a0 * a2 - a1 ** 2 + a1 * a3 - a0 - a2 + 1,
                1 + a0,
                1 - a0]
    raise ValueError(f"corollary blocks exist for degree 3 and 4, not {len(a)}")


def corollary_conditions(p: CharPoly, tol: float = STABILITY_TOL) -> ConditionBlock:
    """Explicit inequality blocks for cubic and quartic polynomials."""
    margins = _corollary_margins(list(p.coeffs))
    names = tuple(f"C{i + 1}" for i in range(len(margins)))
    return ConditionBlock(f"degree{p.degree}", names, tuple(margins),
                          (">",) * len(margins), tuple(margins), tol)


# -- Jacobians -----------------------------------------------------------------

def jacobian_fd(model: ModelSpec, point, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the one-step map at ``point``."""
    return _fd_jacobian(model, _as_state(model, point), h)


def _check(preset, variant):
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")


def radical_scale(preset: str, c):
    """``sqrt(r*c)`` such that the preset's Jacobian depends on ``k`` only
    through ``s = k * radical_scale(preset, c)``.  Exact when ``r*c`` is
    the square of a rational, else a float."""
    _check(preset, "printed")
    return rational_sqrt(_RADICAND[preset] * Fraction(c)) if isinstance(c, Fraction) else math.sqrt(_RADICAND[preset] * c)


def rational_sqrt(x: Fraction):
    """Exact square root of a rational, or ``None`` if it is irrational."""
    x = Fraction(x)
    if x < 0:
        return None
    rn, rd = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def scaled_jacobian(preset: str, s, l, variant: str = "printed"):
    """Closed-form Jacobian at the interior equilibrium as nested lists.

    ``s`` is ``k*sqrt(2c)`` for gb and gbalr, ``k*sqrt(c)`` for gba and
    ``k*sqrt(6c)`` for gbal.  Entries may be floats, Fractions or arrays.
    """
    _check(preset, variant)
    if isinstance(s, Fraction) and (preset == "gb" or isinstance(l, Fraction)):
        F = Fraction
    else:
        def F(a, b=1):
            return a / b
    if preset == "gb":
        return [[1 - s, 0 * s], [0 * s, 0 * s]]
    if preset == "gba":
        return [[1 - 10 * s / 9, -s / 9, -s / 9],
                [F(-1, 10) + 0 * s, 0 * s, F(-1, 10) + 0 * s],
                [-l / 10 + 0 * s, -l / 10 + 0 * s, 1 - l + 0 * s]]
    if preset == "gbal":
        z = 0 * s + 0 * l
        return [[1 - 3 * s / 8, -s / 24, -s / 24, -s / 24],
                [F(-1, 9) + z, z, F(-1, 9) + z, F(-1, 9) + z],
                [-l / 9 + z, -l / 9 + z, 1 - l + z, -l / 9 + z],
                [F(-1, 10) + z, F(-1, 10) + z, F(-1, 10) + z, F(1, 10) + z]]
    z = 0 * s + 0 * l
    if variant == "printed":
        row3 = [z, z, 1 - 25 * l / 28 + z, z]
    else:
        row3 = [-75 * l / 784 + z, -75 * l / 784 + z, 1 - 775 * l / 784 + z, -75 * l / 784 + z]
    return [[1 - 31 * s / 56, -3 * s / 56, -3 * s / 56, -3 * s / 56],
            [F(-75, 784) + z, F(9, 784) + z, F(-75, 784) + z, F(-75, 784) + z],
            row3,
            [F(-5, 56) + z, F(-5, 56) + z, F(-5, 56) + z, F(13, 168) + z]]


def _check_l(preset, l):
    if preset == "gb":
        return 0.0
    if l is None or not 0 < l <= 1:
        raise ValueError(f"l must lie in (0, 1], got {l!r}")
    return l


def jacobian_analytic(preset: str, k, l=None, c=1.0, variant: str = "printed") -> np.ndarray:
    """Closed-form Jacobian of a preset at its interior equilibrium."""
    _check(preset, variant)
    l = float(_check_l(preset, l))
    s = float(k) * math.sqrt(_RADICAND[preset] * float(c))
    return np.array([[float(v) for v in row] for row in scaled_jacobian(preset, s, l, variant)])


def spectral_radius(matrix) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(matrix, dtype=float)))))


# -- condition blocks ----------------------------------------------------------

# CD_i = factor_i * (i-th corollary margin) for the printed Jacobians.  The
# sign of each factor fixes the relation CD_i must satisfy.
CD_NORMALIZATION = {
    "gba": (Fraction(25, 27), Fraction(450), Fraction(-810000), Fraction(-90000)),
    "gbal": (Fraction(135, 32), Fraction(1620), Fraction(-68024448000),
             Fraction(-8503056000), Fraction(-12960), Fraction(12960)),
    "gbalr": (Fraction(131712, 23125), Fraction(658560), Fraction(-19041220716134400),
              Fraction(-761648828645376, 5), Fraction(-219520), Fraction(219520)),
}


def cd_relations(preset: str) -> tuple:
    return tuple(">" if f > 0 else "<" for f in CD_NORMALIZATION[preset])


def cd_block_scaled(preset: str, s, l, variant: str = "printed", tol: float = STABILITY_TOL) -> ConditionBlock:
    """Condition block from a scaled Jacobian (see :func:`scaled_jacobian`)."""
    if preset not in CD_NORMALIZATION:
        raise ValueError(f"no condition block for preset {preset!r}")
    margins = _corollary_margins(char_poly_coefficients(scaled_jacobian(preset, s, l, variant))[:-1])
    factors = CD_NORMALIZATION[preset]
    exact = all(isinstance(m, (Fraction, int)) for m in margins)
    values = tuple(f * m if exact else float(f) * m for f, m in zip(factors, margins))
    names = tuple(f"CD{i + 1}" for i in range(len(margins)))
    return ConditionBlock(preset, names, values, cd_relations(preset), tuple(margins), tol)


def cd_block(preset: str, k, l, c, variant: str = "printed") -> ConditionBlock:
    """Stability conditions for gba / gbal / gbalr at (k, l, c).

    The values carry the conventional normalisation of each CD polynomial;
    the block is stable iff every CD satisfies its relation.
    """
    if preset not in CD_NORMALIZATION:
        raise ValueError(f"no condition block for preset {preset!r}")
    _check(preset, variant)
    _check_l(preset, l)
    if all(isinstance(v, Fraction) for v in (k, l, c)):
        r = radical_scale(preset, c)
        if r is not None:
            return cd_block_scaled(preset, k * r, l, variant)
    s = float(k) * math.sqrt(_RADICAND[preset] * float(c))
    return cd_block_scaled(preset, s, float(l), variant)


# -- thresholds ----------------------------------------------------------------

SQRT2 = math.sqrt(2.0)
SQRT6 = math.sqrt(6.0)


def stability_threshold(preset: str, l=None, variant: str = "printed") -> float:
    """Upper bound on ``k*sqrt(c)`` below which the interior equilibrium is
    locally stable.  ``l`` is ignored for ``gb`` (and for printed ``gbalr``)."""
    _check(preset, variant)
    if preset == "gb":
        return SQRT2
    if preset == "gbalr" and variant == "printed":
        if l is not None:
            _check_l(preset, l)
        return 10172 * SQRT2 / 5737
    l = float(_check_l(preset, l))
    if preset == "gba":
        return 9 * (101 * l - 200) / (2 * (252 * l - 505))
    if preset == "gbal":
        return 2 * SQRT6 * (226 * l - 441) / (512 * l - 1017)
    return SQRT2 * (143425 * l - 284816) / (2 * (39925 * l - 80318))


@dataclass
class OrderingReport:
    l_values: list
    thresholds: dict
    violations: list = field(default_factory=list)

    @property
    def ordered(self) -> bool:
        return not self.violations

    @property
    def n_ordered(self) -> int:
        return len(self.l_values) - len({v[0] for v in self.violations})

    def min_margins(self) -> dict:
        """Smallest gap between consecutive presets over the grid."""
        out = {}
        for a, b in zip(PRESETS, PRESETS[1:]):
            out[f"{b}-{a}"] = min(y - x for x, y in zip(self.thresholds[a], self.thresholds[b]))
        return out


def threshold_ordering(l_grid: Sequence[float], variant: str = "printed") -> OrderingReport:
    """Check gb < gba < gbal < gbalr thresholds strictly at each ``l``."""
    ls = [float(l) for l in l_grid]
    th = {p: [stability_threshold(p, l, variant) for l in ls] for p in PRESETS}
    report = OrderingReport(ls, th)
    for idx, l in enumerate(ls):
        for a, b in zip(PRESETS, PRESETS[1:]):
            if not th[a][idx] < th[b][idx]:
                report.violations.append((l, a, b, th[a][idx], th[b][idx]))
    return report


def analytic_verdict(preset: str, k, l, c, variant: str = "printed") -> str:
    J = jacobian_analytic(preset, k, l, c, variant)
    return schur_cohn(char_poly(J)).verdict


def locate_flip(preset: str, l=None, variant: str = "printed", lo: float = 1e-6, hi: float = 10.0,
                width: float = 1e-10) -> float:
    """Bisect on ``k*sqrt(c)`` (with c = 1) for the stable/unstable switch."""
    def stable(t):
        return analytic_verdict(preset, t, l if preset != "gb" else None, 1.0, variant) == "stable"

    if not stable(lo) or stable(hi):
        raise ValueError("no stability switch inside the bracket")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
