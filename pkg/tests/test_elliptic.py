import random
from fractions import Fraction as F

import gmpy2
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prill.elliptic import (
    INFINITY,
    ONE,
    ZETA3,
    CyclotomicNumber,
    DegenerateQuadrupleError,
    QuarticModel,
    QuarticModelError,
    SingularCurveError,
    WeierstrassCurve,
    all_ordering_js,
    cross_ratio,
    division_polynomial,
    hesse_isotriviality_check,
    j_from_four_points,
    j_from_lambda,
    multiply_by_3,
    quartic_to_weierstrass,
    three_torsion_branch_points,
    triple_by_addition,
)
from prill.elliptic import poly
from prill.numeric.precision import working_precision

BITS = 212
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=50)


# -- Q(ζ₃) ---------------------------------------------------------------------

def test_zeta_relations():
    assert ZETA3 ** 3 == ONE
    assert ONE + ZETA3 + ZETA3 * ZETA3 == 0
    assert ZETA3.conjugate() == ZETA3 * ZETA3
    assert abs(complex(ZETA3) - complex(-0.5, 3 ** 0.5 / 2)) < 1e-15


@given(rationals, rationals, rationals, rationals)
def test_field_operations_match_complex_embedding(a, b, c, d):
    x, y = CyclotomicNumber(a, b), CyclotomicNumber(c, d)
    for exact, approx in ((x + y, complex(x) + complex(y)), (x * y, complex(x) * complex(y)), (x - y, complex(x) - complex(y))):
        assert abs(complex(exact) - approx) <= 1e-9 * (1 + abs(approx))
    if y:
        assert (x / y) * y == x
        assert y * y.inverse() == ONE


# -- curves ---------------------------------------------------------------------

def test_singular_curve_rejected():
    with pytest.raises(SingularCurveError):
        WeierstrassCurve(F(-3), F(2))  # u³ − 3u + 2 = (u − 1)²(u + 2)


def test_division_polynomials():
    c = WeierstrassCurve(F(2), F(3))
    assert division_polynomial(2, c) == [3, 2, 0, 1]
    assert division_polynomial(3, c) == [-4, 36, 12, 0, 3]
    with pytest.raises(ValueError):
        division_polynomial(5, c)


def test_triple_exact_on_rational_point():
    # (3, 5) on v² = u³ − 2, independent of the ψ₃/φ₃ formulas
    c = WeierstrassCurve(F(0), F(-2))
    p = (F(3), F(5))
    assert c.contains(p)
    assert multiply_by_3(p, c) == triple_by_addition(p, c)
    assert c.contains(multiply_by_3(p, c))


def test_three_torsion_maps_to_identity():
    with working_precision(BITS):
        c = WeierstrassCurve(gmpy2.mpc(2), gmpy2.mpc(-1))
        for u in three_torsion_branch_points(c):
            v = gmpy2.sqrt(c.f(u))
            assert multiply_by_3((u, v), c, tol=1e-40) is None
            # 2P = −P on 3-torsion
            d = c.double((u, v))
            assert abs(d[0] - u) < 1e-40 and abs(d[1] + v) < 1e-40


def test_triple_agrees_with_addition_at_1000_points():
    rng = random.Random(11)
    worst = 0.0
    with working_precision(BITS):
        curves = [WeierstrassCurve(gmpy2.mpc(rng.uniform(-3, 3), rng.uniform(-3, 3)),
                                   gmpy2.mpc(rng.uniform(-3, 3), rng.uniform(-3, 3))) for _ in range(10)]
        for k in range(1000):
            c = curves[k % 10]
            u = gmpy2.mpc(rng.uniform(-4, 4), rng.uniform(-4, 4))
            p = (u, gmpy2.sqrt(c.f(u)))
            a, b = multiply_by_3(p, c), triple_by_addition(p, c)
            scale = max(1.0, float(abs(b[0])), float(abs(b[1])))
            worst = max(worst, float(max(abs(a[0] - b[0]), abs(a[1] - b[1]))) / scale)
    assert worst < 1e-20


def _quartic(rng):
    roots = [gmpy2.mpc(F(rng.randint(-9, 9), rng.randint(1, 5))) for _ in range(4)]
    while len({complex(r) for r in roots}) < 4:
        roots[rng.randrange(4)] += 1
    t0 = gmpy2.mpc(F(rng.randint(-20, 20), 7)) + gmpy2.mpc(0, F(1, 3))
    return roots, QuarticModel.from_roots(roots, t0, sqrt=gmpy2.sqrt)


def test_quartic_round_trip():
    rng = random.Random(5)
    worst = 0.0
    with working_precision(BITS):
        for _ in range(20):
            _, q = _quartic(rng)
            curve, fwd, inv = quartic_to_weierstrass(q)
            assert fwd((q.t0, q.w0)) is None
            assert inv(None) == (q.t0, q.w0)
            assert inv(fwd((q.t0, -q.w0))) == (q.t0, -q.w0)
            for _ in range(25):
                t = gmpy2.mpc(rng.uniform(-10, 10), rng.uniform(-10, 10))
                w = gmpy2.sqrt(q.q(t)) * rng.choice((1, -1))
                p = fwd((t, w))
                assert curve.contains(p, tol=1e-50)
                t2, w2 = inv(p)
                worst = max(worst, float(abs(t2 - t)) / max(1.0, float(abs(t))),
                            float(abs(w2 - w)) / max(1.0, float(abs(w))))
    assert worst < 1e-25


def test_quartic_j_matches_cross_ratio_j():
    rng = random.Random(9)
    with working_precision(BITS):
        for _ in range(10):
            roots, q = _quartic(rng)
            curve = quartic_to_weierstrass(q).curve
            assert abs(curve.j_invariant - j_from_four_points(roots)) < 1e-40 * max(1.0, abs(curve.j_invariant))


def test_quartic_errors():
    with pytest.raises(QuarticModelError):
        QuarticModel((1, 0, 1), 0, 1)
    roots = [0, 1, 2, 3]
    with pytest.raises(QuarticModelError):
        quartic_to_weierstrass(QuarticModel.from_roots(roots, 0, w0=0))
    with pytest.raises(QuarticModelError):
        quartic_to_weierstrass(QuarticModel.from_roots(roots, 5, w0=1))


# -- cross-ratio and j ---------------------------------------------------------------

def test_cross_ratio_normalization():
    lam = F(7, 3)
    assert cross_ratio(0, 1, lam, INFINITY) == lam
    with pytest.raises(DegenerateQuadrupleError):
        cross_ratio(0, 1, 1, 2)


@given(st.lists(rationals, min_size=4, max_size=4, unique=True), rationals, rationals, rationals)
def test_cross_ratio_mobius_invariant(pts, a, b, c):
    d = F(1)
    if a * d - b * c == 0 or any(c * x + d == 0 for x in pts):
        return
    moved = [(a * x + b) / (c * x + d) for x in pts]
    assert cross_ratio(*moved) == cross_ratio(*pts)


@given(st.lists(rationals, min_size=4, max_size=4, unique=True))
def test_six_orderings_give_one_j(pts):
    js = all_ordering_js(pts)
    assert len({j for j in js}) == 1
    assert js[0] == j_from_four_points(pts)


def test_j_from_lambda():
    assert j_from_lambda(F(-1)) == 1728
    assert j_from_lambda(-ZETA3) == 0
    with pytest.raises(DegenerateQuadrupleError):
        j_from_lambda(1)


def test_psi3_roots_are_equianharmonic_for_100_curves():
    rng = random.Random(2024)
    worst = 0.0
    with working_precision(BITS):
        for _ in range(100):
            c = WeierstrassCurve(gmpy2.mpc(rng.uniform(-5, 5), rng.uniform(-5, 5)),
                                 gmpy2.mpc(rng.uniform(-5, 5), rng.uniform(-5, 5)))
            worst = max(worst, float(abs(j_from_four_points(three_torsion_branch_points(c)))))
    assert worst < 1e-8


def test_hesse_check():
    h = hesse_isotriviality_check()
    assert h.j == 0
    assert set(h.images) == {-ONE, -ZETA3, -(ZETA3 * ZETA3), INFINITY}
    assert h.fiber_sizes == (2, 2, 2, 2)
    assert len(h.base_points) == 9 and h.identity in h.base_points


# -- polynomials ---------------------------------------------------------------

@settings(max_examples=50)
@given(st.lists(rationals, min_size=1, max_size=6), rationals)
def test_taylor_shift_and_roots(roots, x0):
    p = poly.from_roots(roots)
    shifted = poly.taylor_shift(p, x0)
    for r in roots:
        assert poly.evaluate(p, r) == 0
        assert poly.evaluate(shifted, r - x0) == 0
