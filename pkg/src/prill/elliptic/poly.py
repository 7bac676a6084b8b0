"""Dense univariate polynomials as coefficient lists, lowest degree first.

Coefficients may be any field-like scalars (Fraction, gmpy2 numbers,
CyclotomicNumber).
"""

from __future__ import annotations

from typing import Sequence


def trim(p: Sequence) -> list:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def add(p: Sequence, q: Sequence) -> list:
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def scale(p: Sequence, c) -> list:
    return [c * x for x in p]


def sub(p: Sequence, q: Sequence) -> list:
    return add(p, scale(q, -1))


def mul(p: Sequence, q: Sequence) -> list:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return trim(out)


def power(p: Sequence, n: int) -> list:
    out = [1]
    for _ in range(n):
        out = mul(out, p)
    return out


def deriv(p: Sequence) -> list:
    return trim([i * p[i] for i in range(1, len(p))]) if len(p) > 1 else [0]


def evaluate(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def taylor_shift(p: Sequence, x0) -> list:
    """Coefficients of ``p(x0 + s)`` in ``s`` (Taylor coefficients at ``x0``)."""
    c = list(p)
    n = len(c)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            c[j] = c[j] + x0 * c[j + 1]
    return c


def from_roots(roots: Sequence) -> list:
    out = [1]
    for r in roots:
        out = mul(out, [-r, 1])
    return out
