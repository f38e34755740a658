"""Independent reference computations used by the tests.

None of these call into the package; they re-derive quantities from the
model definitions with different numerical routes.
"""

import numpy as np


def best_response_roots(S, c):
    """Real nonnegative root of 2c q^3 + 4cS q^2 + 2cS^2 q - S via np.roots."""
    r = np.roots([2 * c, 4 * c * S, 2 * c * S * S, -S])
    real = [z.real for z in r if abs(z.imag) < 1e-9 and z.real >= -1e-15]
    assert len(real) == 1
    return max(real[0], 0.0)


def best_response_grid(S, c, n=200001):
    """Profit maximiser by brute force on a fine grid (coarse oracle)."""
    q = np.linspace(0, 2 * (S / (2 * c)) ** (1 / 3) + 1e-12, n)
    prof = q / (S + q) - c * q * q
    return q[np.argmax(prof)]


def map_step(kinds, k, l, c, x):
    """Straight transcription of the decision rules, rational firm last."""
    kinds = list(kinds)
    x = [float(v) for v in x]
    rational = kinds[-1] == "r"
    if rational:
        r = best_response_roots(sum(x), c)
        full = x + [r]
    else:
        full = list(x)
    Q = sum(full)
    out = []
    for i, kind in enumerate(kinds[:len(x)]):
        S = Q - full[i]
        qi = full[i]
        if kind == "g":
            out.append(qi + k * qi * (S / Q ** 2 - 2 * c * qi))
        elif kind == "b":
            out.append(best_response_roots(S, c))
        elif kind == "a":
            out.append((1 - l) * qi + l * best_response_roots(S, c))
        elif kind == "l":
            out.append((2 * qi + S) / (2 * (1 + c * Q * Q)))
    return np.array(out)


def numeric_jacobian(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    J = np.empty((x.size, x.size))
    for j in range(x.size):
        e = np.zeros(x.size)
        e[j] = h
        J[:, j] = (f(x + e) - f(x - e)) / (2 * h)
    return J


def unit_disk_stable(coeffs_low_to_high):
    """All roots of the monic polynomial strictly inside |z| < 1, by eigenvalues."""
    a = np.asarray(coeffs_low_to_high, dtype=float)
    n = a.size
    C = np.zeros((n, n))
    C[1:, :-1] = np.eye(n - 1)
    C[:, -1] = -a
    mod = np.abs(np.linalg.eigvals(C))
    return bool(np.all(mod < 1)), float(np.min(np.abs(mod - 1)))
