"""Working-precision helpers around gmpy2 contexts."""

from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction

import gmpy2

DEFAULT_BITS = 212
MAX_BITS = 848


@contextmanager
def working_precision(bits: int):
    """Run the body with real and complex precision set to ``bits``."""
    with gmpy2.context(gmpy2.get_context(), precision=bits, real_prec=bits, imag_prec=bits):
        yield


def to_mpc(x):
    """Convert an int, Fraction, float, complex, decimal string or gmpy2 number."""
    if isinstance(x, Fraction):
        return gmpy2.mpc(gmpy2.mpq(x.numerator, x.denominator))
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            return to_mpc(Fraction(s))
        return gmpy2.mpc(s)
    return gmpy2.mpc(x)


def residual_tolerance(bits: int) -> float:
    """Relative residual bound ``10^(-bits/4)`` for accepted fiber points."""
    return 10.0 ** (-bits / 4)


def eps(bits: int) -> float:
    return 2.0 ** (-bits)
