"""Hot numeric loops: the cubic best-response solver, the one-step map,
trajectory iteration with fixed-point/cycle detection, and batched
Schur-Cohn classification of small Jacobians.

Every function here is written in the numba nopython subset and is compiled
when numba is available (see ``_accel``).  With numba off, the same source
runs under the interpreter, except ``_lag_distances`` and
``classify_batch`` which have vectorised numpy twins.
"""

import math

import numpy as np

from ._accel import NUMBA_ENABLED, jit

GRADIENT = 0
BEST_RESPONSE = 1
ADAPTIVE = 2
LMA = 3

STEP_OK = 0
STEP_BAD_TOTAL = 1
STEP_NEGATIVE_RIVALS = 2
STEP_NON_FINITE = 3

SIM_CONVERGED = 0
SIM_CYCLE = 1
SIM_DIVERGENT = 2
SIM_INVALID = 3
SIM_APERIODIC = 4

CLASS_STABLE = 0
CLASS_UNSTABLE = 1
CLASS_MARGINAL = 2

BISECT_RTOL = 1e-14


@jit
def best_response(S, c):
    """Unique root q >= 0 of S - 2*c*q*(S + q)**2 = 0."""
    if S <= 0.0:
        return 0.0
    lo = 0.0
    hi = (S / (2.0 * c)) ** (1.0 / 3.0) + S
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if S - 2.0 * c * mid * (S + mid) ** 2 > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECT_RTOL * hi:
            break
    q = 0.5 * (lo + hi)
    # Newton polish, never leaving the final bracket
    for _ in range(4):
        Q = S + q
        f = S - 2.0 * c * q * Q * Q
        df = -2.0 * c * Q * (Q + 2.0 * q)
        if df == 0.0:
            break
        qn = q - f / df
        if qn < lo or qn > hi or qn == q:
            break
        q = qn
    return q


@jit
def step_into(kinds, kvals, lvals, c, rational, x, out):
    """Apply one period of the map to ``x``, writing into ``out``.

    ``rational`` appends a fully informed firm whose output is the best
    response to the current total of ``x``; that firm is not part of the
    state.  Returns a STEP_* status code.
    """
    m = x.shape[0]
    r = 0.0
    base = 0.0
    for j in range(m):
        base += x[j]
    if not math.isfinite(base):
        return STEP_NON_FINITE
    if rational:
        if base < 0.0:
            return STEP_NEGATIVE_RIVALS
        r = best_response(base, c)
    total = base + r
    if not total > 0.0:
        return STEP_BAD_TOTAL
    for i in range(m):
        qi = x[i]
        S = r
        for j in range(m):
            if j != i:
                S += x[j]
        kind = kinds[i]
        if kind == GRADIENT:
            out[i] = qi + kvals[i] * qi * (S / (total * total) - 2.0 * c * qi)
        elif kind == LMA:
            out[i] = (2.0 * qi + S) / (2.0 * (1.0 + c * total * total))
        else:
            if S < 0.0:
                return STEP_NEGATIVE_RIVALS
            br = best_response(S, c)
            if kind == ADAPTIVE:
                out[i] = (1.0 - lvals[i]) * qi + lvals[i] * br
            else:
                out[i] = br
        if not math.isfinite(out[i]):
            return STEP_NON_FINITE
    return STEP_OK


if NUMBA_ENABLED:

    @jit
    def _lag_distances(states, t, pmax, dist):
        m = states.shape[1]
        for p in range(1, pmax + 1):
            d = 0.0
            for j in range(m):
                v = abs(states[t, j] - states[t - p, j])
                if v > d:
                    d = v
            dist[p] = d

else:

    def _lag_distances(states, t, pmax, dist):
        lagged = states[t - pmax:t][::-1]
        dist[1:pmax + 1] = np.max(np.abs(lagged - states[t]), axis=1)


@jit
def simulate_into(kinds, kvals, lvals, c, rational, states, tol, window,
                  confirm, blowup, separation):
    """Iterate from ``states[0]`` filling ``states[1:]``.

    Returns ``(code, period, steps_used, confirmed)``.  Stops early once a
    fixed point or a cycle of period <= ``window`` has held within ``tol``
    for ``confirm`` consecutive steps (a cycle's states must also differ by
    more than ``separation`` at every shorter lag), or once the orbit leaves
    the nonnegative orthant / exceeds ``blowup``.
    """
    max_steps = states.shape[0] - 1
    m = states.shape[1]
    runs = np.zeros(window + 1, dtype=np.int64)
    best = np.zeros(window + 1, dtype=np.int64)
    dist = np.empty(window + 1)
    for t in range(1, max_steps + 1):
        status = step_into(kinds, kvals, lvals, c, rational, states[t - 1], states[t])
        if status != STEP_OK:
            return SIM_INVALID, 0, t, True
        total = 0.0
        escaped = False
        for j in range(m):
            v = states[t, j]
            total += v
            if v < 0.0 or v > blowup:
                escaped = True
        if escaped or total <= 0.0:
            return SIM_DIVERGENT, 0, t, True
        pmax = min(window, t)
        _lag_distances(states, t, pmax, dist)
        for p in range(1, pmax + 1):
            if dist[p] < tol:
                runs[p] += 1
                if runs[p] > best[p]:
                    best[p] = runs[p]
            else:
                runs[p] = 0
        if runs[1] >= confirm:
            return SIM_CONVERGED, 1, t, True
        for p in range(2, pmax + 1):
            if runs[p] >= confirm:
                # a converging oscillation also revisits itself; a cycle's
                # points must stay apart
                apart = True
                for q in range(1, p):
                    if dist[q] <= separation:
                        apart = False
                        break
                if apart:
                    return SIM_CYCLE, p, t, True
    # budget exhausted: report the longest-held behaviour, unconfirmed
    p_best = 0
    for p in range(1, window + 1):
        if best[p] > 0 and (p_best == 0 or best[p] > best[p_best]):
            p_best = p
    if p_best == 0:
        return SIM_APERIODIC, 0, max_steps, False
    if p_best == 1:
        return SIM_CONVERGED, 1, max_steps, False
    return SIM_CYCLE, p_best, max_steps, False


@jit
def charpoly_into(J, coeffs):
    """Faddeev-LeVerrier: coeffs[i] = a_i of det(lam*I - J), a_n = 1."""
    n = J.shape[0]
    M = np.zeros((n, n))
    AM = np.empty((n, n))
    coeffs[n] = 1.0
    for kk in range(1, n + 1):
        for i in range(n):
            for j in range(n):
                s = 0.0
                for t in range(n):
                    s += J[i, t] * M[t, j]
                AM[i, j] = s
        for i in range(n):
            for j in range(n):
                M[i, j] = AM[i, j]
            M[i, i] += coeffs[n - kk + 1]
        tr = 0.0
        for i in range(n):
            for t in range(n):
                tr += J[i, t] * M[t, i]
        coeffs[n - kk] = -tr / kk


@jit
def _det3(a, b, c, d, e, f, g, h, i):
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


@jit
def det_small(M, m):
    """Cofactor expansion for m <= 4."""
    if m == 0:
        return 1.0
    if m == 1:
        return M[0, 0]
    if m == 2:
        return M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if m == 3:
        return _det3(M[0, 0], M[0, 1], M[0, 2], M[1, 0], M[1, 1], M[1, 2],
                     M[2, 0], M[2, 1], M[2, 2])
    total = 0.0
    sign = 1.0
    for col in range(4):
        cols = np.empty(3, dtype=np.int64)
        w = 0
        for cc in range(4):
            if cc != col:
                cols[w] = cc
                w += 1
        minor = _det3(M[1, cols[0]], M[1, cols[1]], M[1, cols[2]],
                      M[2, cols[0]], M[2, cols[1]], M[2, cols[2]],
                      M[3, cols[0]], M[3, cols[1]], M[3, cols[2]])
        total += sign * M[0, col] * minor
        sign = -sign
    return total


@jit
def schur_cohn_values(coeffs, vals):
    """Fill ``vals`` with A(1), (-1)^n A(-1), then D_i^+, D_i^- pairs.

    ``coeffs`` holds a_0..a_n with a_n = 1.  Returns the number of values.
    """
    n = coeffs.shape[0] - 1
    a1 = 0.0
    am1 = 0.0
    sgn = 1.0
    for i in range(n + 1):
        a1 += coeffs[i]
        am1 += sgn * coeffs[i]
        sgn = -sgn
    if n % 2 == 1:
        am1 = -am1
    vals[0] = a1
    vals[1] = am1
    w = 2
    start = 1 if n % 2 == 0 else 2
    M = np.empty((4, 4))
    for i in range(start, n, 2):
        for sg in (1.0, -1.0):
            for r in range(i):
                for s in range(i):
                    upper = 0.0
                    if s >= r:
                        upper = coeffs[n - (s - r)]
                    lower = 0.0
                    if r + s <= i - 1:
                        lower = coeffs[i - 1 - r - s]
                    M[r, s] = upper + sg * lower
            vals[w] = det_small(M, i)
            w += 1
    return w


if NUMBA_ENABLED:

    @jit
    def classify_batch(J, tol):
        """Classify each (n, n) matrix in ``J`` as CLASS_* by Schur-Cohn."""
        N = J.shape[0]
        n = J.shape[1]
        out = np.empty(N, dtype=np.int8)
        coeffs = np.empty(n + 1)
        vals = np.empty(2 + 2 * n)
        for node in range(N):
            charpoly_into(J[node], coeffs)
            w = schur_cohn_values(coeffs, vals)
            cls = CLASS_STABLE
            for v in range(w):
                if vals[v] < -tol:
                    cls = CLASS_UNSTABLE
                    break
                if vals[v] <= tol:
                    cls = CLASS_MARGINAL
            out[node] = cls
        return out

else:

    def classify_batch(J, tol):
        from .stability import char_poly_coefficients, classify_values, schur_cohn_values as sc

        n = J.shape[1]
        rows = [[J[:, i, j] for j in range(n)] for i in range(n)]
        values = sc(char_poly_coefficients(rows))
        return classify_values(values, tol).astype(np.int8)
