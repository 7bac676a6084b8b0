"""Pure-Python reference kernels (gmpy2 scalars, coefficients lowest degree first)."""

from __future__ import annotations


def horner(coeffs, x):
    acc = coeffs[-1]
    for k in range(len(coeffs) - 2, -1, -1):
        acc = acc * x + coeffs[k]
    return acc


def horner_d(coeffs, x):
    """Value and first derivative."""
    p = coeffs[-1]
    dp = 0 * p
    for k in range(len(coeffs) - 2, -1, -1):
        dp = dp * x + p
        p = p * x + coeffs[k]
    return p, dp


def aberth(coeffs, roots, tol, maxiter):
    """Simultaneous Aberth–Ehrlich refinement of all roots.

    Stops when every correction is below ``tol`` relative to ``max(1, |z|)``,
    or once corrections below ``sqrt(tol)`` stop shrinking (rounding noise
    of the polynomial values). Returns ``(roots, iterations, converged)``.
    """
    z = list(roots)
    n = len(z)
    floor = tol ** 0.5
    prev = float("inf")
    for it in range(1, maxiter + 1):
        worst = 0.0
        for i in range(n):
            p, dp = horner_d(coeffs, z[i])
            if p == 0:
                continue
            if dp == 0:
                ratio = p
            else:
                ratio = p / dp
            s = 0 * ratio
            zi = z[i]
            for j in range(n):
                if j != i:
                    d = zi - z[j]
                    if d != 0:
                        s += 1 / d
            w = ratio / (1 - ratio * s)
            z[i] = zi - w
            rel = abs(w) / max(1, abs(zi))
            if rel > worst:
                worst = rel
        if worst <= tol or (worst <= floor and worst > 0.5 * prev):
            return z, it, True
        prev = worst
    return z, maxiter, False
