"""Polynomial roots: double-precision seeds from numpy, polished at working precision."""

from __future__ import annotations

from typing import Sequence

import gmpy2
import numpy as np

from .kernels import aberth


class RootFindingError(ArithmeticError):
    pass


def _seed(coeffs: Sequence) -> list:
    c = np.array([complex(x) for x in reversed(coeffs)], dtype=complex)
    return [gmpy2.mpc(complex(r)) for r in np.roots(c)]


def polish_roots(coeffs: Sequence, start: Sequence, maxiter: int = 200) -> list:
    """Refine approximate roots ``start`` of ``coeffs`` to the active precision."""
    bits = gmpy2.get_context().precision
    coeffs = [gmpy2.mpc(x) for x in coeffs]
    z, _, ok = aberth(coeffs, [gmpy2.mpc(x) for x in start], 2.0 ** (8 - bits), maxiter)
    if not ok:
        raise RootFindingError("Aberth iteration did not converge")
    return z


def poly_roots(coeffs: Sequence, maxiter: int = 200) -> list:
    """All complex roots, with multiplicity, of a polynomial (lowest degree first)."""
    coeffs = [gmpy2.mpc(x) for x in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        return []
    lead = coeffs[-1]
    monic = [c / lead for c in coeffs]
    return polish_roots(monic, _seed(monic), maxiter)
