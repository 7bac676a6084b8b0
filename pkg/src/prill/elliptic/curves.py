"""Short Weierstrass curves, the ×3 map, and quartic models with a marked point.

Points are ``(u, v)`` tuples; ``None`` is the point at infinity ``O``.
Scalars are generic: Fractions and CyclotomicNumbers give exact results,
gmpy2 ``mpc`` values compute at the active context precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Iterator, Optional, Sequence, Tuple

from . import poly

Point = Optional[Tuple[Any, Any]]


class SingularCurveError(ValueError):
    pass


class QuarticModelError(ValueError):
    pass


def _mag(x) -> float:
    return abs(complex(x))


@dataclass(frozen=True)
class WeierstrassCurve:
    """``v² = u³ + a·u + b``."""

    a: Any
    b: Any

    def __post_init__(self):
        if self.discriminant == 0:
            raise SingularCurveError("discriminant vanishes")

    @property
    def discriminant(self):
        return -16 * (4 * self.a ** 3 + 27 * self.b ** 2)

    @property
    def j_invariant(self):
        a3 = 4 * self.a ** 3
        return 1728 * a3 / (a3 + 27 * self.b ** 2)

    @cached_property
    def cubic(self) -> list:
        return [self.b, self.a, 0, 1]

    @cached_property
    def psi3(self) -> list:
        a, b = self.a, self.b
        return [-a * a, 12 * b, 6 * a, 0, 3]

    @cached_property
    def _psi4_cofactor(self) -> list:
        # ψ₄ = 4v·g(u)
        a, b = self.a, self.b
        return [-8 * b * b - a ** 3, -4 * a * b, -5 * a * a, 20 * b, 5 * a, 0, 1]

    @cached_property
    def phi3(self) -> list:
        """Numerator of the u-coordinate of [3]P: ``u·ψ₃² − ψ₂ψ₄`` (monic, degree 9)."""
        f, g = self.cubic, self._psi4_cofactor
        return poly.sub(poly.mul([0, 1], poly.mul(self.psi3, self.psi3)), poly.scale(poly.mul(f, g), 8))

    @cached_property
    def psi3_squared(self) -> list:
        return poly.mul(self.psi3, self.psi3)

    @cached_property
    def psi3_cubed(self) -> list:
        return poly.mul(self.psi3_squared, self.psi3)

    @cached_property
    def omega3_cofactor(self) -> list:
        """``N`` with ``v([3]P) = v·N(u)/ψ₃(u)³`` (from ω₃ = (ψ₅ψ₂² − ψ₁ψ₄²)/4v)."""
        f, g = self.cubic, self._psi4_cofactor
        ff = poly.mul(f, f)
        return poly.sub(
            poly.sub(poly.scale(poly.mul(ff, g), 32), self.psi3_cubed),
            poly.scale(poly.mul(g, g), 4),
        )

    def f(self, u):
        return poly.evaluate(self.cubic, u)

    def contains(self, p: Point, tol: float = 0.0) -> bool:
        if p is None:
            return True
        u, v = p
        r = v * v - self.f(u)
        return r == 0 if tol == 0 else _mag(r) <= tol * max(1.0, _mag(v) ** 2)

    def neg(self, p: Point) -> Point:
        return None if p is None else (p[0], -p[1])

    def add(self, p: Point, q: Point) -> Point:
        """Chord-tangent addition."""
        if p is None:
            return q
        if q is None:
            return p
        (u1, v1), (u2, v2) = p, q
        if u1 == u2:
            if v1 + v2 == 0:
                return None
            lam = (3 * u1 * u1 + self.a) / (2 * v1)
        else:
            lam = (v2 - v1) / (u2 - u1)
        u3 = lam * lam - u1 - u2
        return (u3, lam * (u1 - u3) - v1)

    def double(self, p: Point) -> Point:
        return self.add(p, p)


def division_polynomial(n: int, c: WeierstrassCurve) -> list:
    """Polynomial in ``u`` whose roots are u-coordinates of nonzero n-torsion.

    ``n = 2`` gives the cubic ``u³ + au + b``; ``n = 3`` gives
    ``3u⁴ + 6au² + 12bu − a²``.
    """
    if n == 2:
        return list(c.cubic)
    if n == 3:
        return list(c.psi3)
    raise ValueError(f"unsupported division polynomial index {n}")


def multiply_by_3(p: Point, c: WeierstrassCurve, tol: float = 0.0) -> Point:
    """``[3]p`` from ``φ₃/ψ₃²`` and the ω₃ formula.

    ``tol > 0`` treats ``|ψ₃(u)| <= tol`` as a 3-torsion point (result ``O``).
    """
    if p is None:
        return None
    u, v = p
    s = poly.evaluate(c.psi3, u)
    if s == 0 or (tol and _mag(s) <= tol):
        return None
    return (poly.evaluate(c.phi3, u) / (s * s), v * poly.evaluate(c.omega3_cofactor, u) / (s * s * s))


def triple_by_addition(p: Point, c: WeierstrassCurve) -> Point:
    return c.add(c.double(p), p)


@dataclass(frozen=True)
class QuarticModel:
    """``w² = q(t)`` with a marked point ``(t0, w0)``; ``coeffs`` lowest degree first."""

    coeffs: tuple
    t0: Any
    w0: Any

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(poly.trim(self.coeffs)))
        if len(self.coeffs) != 5:
            raise QuarticModelError("q must have degree exactly 4")

    @classmethod
    def from_roots(cls, roots: Sequence, t0, w0=None, sign: int = 1, sqrt: Callable | None = None):
        coeffs = poly.from_roots(roots)
        if w0 is None:
            if sqrt is None:
                raise QuarticModelError("need w0 or a sqrt function")
            w0 = sign * sqrt(poly.evaluate(coeffs, t0))
        return cls(tuple(coeffs), t0, w0)

    def q(self, t):
        return poly.evaluate(self.coeffs, t)

    def residual(self, t, w):
        return w * w - self.q(t)


@dataclass(frozen=True)
class QuarticWeierstrassMap:
    """Birational maps between a marked quartic and a short Weierstrass curve.

    With ``T = 1/(t − t0)`` and ``W = w·T²`` the quartic becomes
    ``W² = P(T)² + ℓT + m`` with ``P = αT² + βT + γ`` and ``α = w0``. Then
    ``X = W + P``, ``Y = 4αXT + 2βX + ℓ`` satisfy a cubic; a scaling and shift
    gives the short form. The marked point goes to ``O``.
    """

    model: QuarticModel
    curve: WeierstrassCurve
    alpha: Any
    beta: Any
    gamma: Any
    ell: Any
    m: Any
    shift: Any  # u = 8αX + shift

    def __iter__(self) -> Iterator:
        return iter((self.curve, self.forward, self.inverse))

    def _P(self, T):
        return (self.alpha * T + self.beta) * T + self.gamma

    def forward(self, pt) -> Point:
        t, w = pt
        t0, w0 = self.model.t0, self.model.w0
        al, be, ell = self.alpha, self.beta, self.ell
        if t == t0:
            if w == w0:
                return None
            if w == -w0:
                return (self.shift, -8 * al * ell)
            raise QuarticModelError("point not on the quartic")
        T = 1 / (t - t0)
        W = w * T * T
        P = self._P(T)
        plus, minus = W + P, W - P
        # (W + P)(W − P) = ℓT + m; pick the cancellation-free branch
        if minus == 0 or _mag(plus) >= _mag(minus):
            X = plus
        else:
            X = (ell * T + self.m) / minus
        Y = 4 * al * X * T + 2 * be * X + ell
        return (8 * al * X + self.shift, 8 * al * Y)

    def inverse_chart(self, p: Point):
        """``(T, W)`` with ``T = 1/(t − t0)`` and ``W = w·T²`` for a finite image point."""
        if p is None:
            raise QuarticModelError("O maps to the marked point, where T = ∞")
        u, v = p
        al, be, ga, ell, m = self.alpha, self.beta, self.gamma, self.ell, self.m
        X = (u - self.shift) / (8 * al)
        Y = v / (8 * al)
        if X == 0:
            if Y == -ell:
                raise QuarticModelError("point maps to the conjugate of the marked point")
            if ell == 0:
                raise QuarticModelError("degenerate chart (ℓ = 0)")
            T = -m / ell
        else:
            num_a = Y - 2 * be * X - ell
            num_b = Y + 2 * be * X + ell
            # the two roots of 2αX·T² + (2βX + ℓ)T + (2γX − X² + m) = 0
            if num_b == 0 or _mag(num_a) >= _mag(num_b):
                T = num_a / (4 * al * X)
            else:
                T = -2 * (2 * ga * X - X * X + m) / num_b
        return (T, X - self._P(T))

    def inverse(self, p: Point):
        t0, w0 = self.model.t0, self.model.w0
        if p is None:
            return (t0, w0)
        u, v = p
        if u == self.shift and v == -8 * self.alpha * self.ell:
            return (t0, -w0)
        T, W = self.inverse_chart(p)
        if T == 0:
            raise QuarticModelError("point maps to t = ∞")
        return (t0 + 1 / T, W / (T * T))


def quartic_to_weierstrass(q: QuarticModel) -> QuarticWeierstrassMap:
    """Send the marked point of ``q`` to ``O`` of a short Weierstrass curve.

    Raises
    ------
    QuarticModelError
        If the marked point is a branch point (``w0 = 0``) or off the curve.
    """
    w0 = q.w0
    if w0 == 0:
        raise QuarticModelError("marked point is a branch point of the quartic")
    res = q.residual(q.t0, w0)
    if res != 0 and _mag(res) > 1e-20 * max(1.0, _mag(w0) ** 2):
        raise QuarticModelError("marked point is not on the quartic")
    # T⁴·q(t0 + 1/T) = c0·T⁴ + c1·T³ + c2·T² + c3·T + c4
    c0, c1, c2, c3, c4 = poly.taylor_shift(q.coeffs, q.t0)
    c0 = w0 * w0
    al = w0
    be = c1 / (2 * al)
    ga = (c2 - be * be) / (2 * al)
    ell = c3 - 2 * be * ga
    m = c4 - ga * ga
    B = 4 * be * be - 16 * al * ga
    C = 4 * be * ell - 8 * al * m
    D = ell * ell
    # Y₁² = X₁³ + B·X₁² + 8αC·X₁ + 64α²D with X₁ = 8αX, then u = X₁ + B/3
    q1, r1 = 8 * al * C, 64 * al * al * D
    a = q1 - B * B / 3
    b = 2 * B ** 3 / 27 - B * q1 / 3 + r1
    return QuarticWeierstrassMap(q, WeierstrassCurve(a, b), al, be, ga, ell, m, B / 3)
