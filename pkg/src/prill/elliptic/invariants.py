"""Cross-ratios, j-invariants of four branch points, and the Hesse pencil check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Sequence

from .curves import WeierstrassCurve
from .cyclotomic import ONE, ZETA3, CyclotomicNumber


class _Infinity:
    """The point ∞ of a projective line."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


class DegenerateQuadrupleError(ValueError):
    pass


class HesseConsistencyError(AssertionError):
    pass


def _is_inf(p) -> bool:
    return p is INFINITY


def _diff(p, q):
    # factors involving ∞ cancel pairwise in the cross-ratio; mark them with None
    if _is_inf(p) or _is_inf(q):
        return None
    return p - q


def cross_ratio(p1, p2, p3, p4):
    """Cross-ratio normalized so that ``(0, 1, λ, ∞) ↦ λ``.

    ``((p3 − p1)(p2 − p4)) / ((p3 − p4)(p2 − p1))``; a point may be
    ``INFINITY``, in which case the two factors containing it cancel.
    """
    pts = (p1, p2, p3, p4)
    for i, j in itertools.combinations(range(4), 2):
        a, b = pts[i], pts[j]
        if (_is_inf(a) and _is_inf(b)) or (not _is_inf(a) and not _is_inf(b) and a == b):
            raise DegenerateQuadrupleError("coincident points")
    num = [_diff(p3, p1), _diff(p2, p4)]
    den = [_diff(p3, p4), _diff(p2, p1)]
    out = 1
    for x in num:
        if x is not None:
            out = out * x
    for x in den:
        if x is not None:
            out = out / x
    return out


def j_from_lambda(lam):
    """``256(λ² − λ + 1)³ / (λ²(λ − 1)²)``."""
    if lam == 0 or lam == 1:
        raise DegenerateQuadrupleError("cross-ratio is 0 or 1")
    n = lam * lam - lam + 1
    return 256 * n * n * n / (lam * lam * (lam - 1) * (lam - 1))


def j_from_four_points(points: Sequence) -> Any:
    """j-invariant of the double cover of ℙ¹ branched at four points."""
    if len(points) != 4:
        raise ValueError("need exactly four points")
    return j_from_lambda(cross_ratio(*points))


def all_ordering_js(points: Sequence) -> list:
    """j computed from each of the six cross-ratio values of the quadruple."""
    seen = {}
    for perm in itertools.permutations(range(4)):
        lam = cross_ratio(*(points[i] for i in perm))
        key = complex(lam)
        key = (round(key.real, 9), round(key.imag, 9))
        seen.setdefault(key, j_from_lambda(lam))
    return list(seen.values())


def three_torsion_branch_points(c: WeierstrassCurve, min_gap: float = 1e-10) -> list:
    """The four roots of ψ₃ (u-coordinates of E[3] ∖ {O}), polished numerically.

    The coefficients are treated at the active gmpy2 precision. Roots are
    sorted by (real, imaginary) part.

    Raises
    ------
    DegenerateQuadrupleError
        If two roots, or a root and a 2-torsion u-value, are closer than
        ``min_gap`` relative to the root scale.
    """
    from ..numeric.roots import poly_roots

    psi = [x for x in c.psi3]
    roots = poly_roots(psi)
    scale = max(1.0, max(abs(complex(r)) for r in roots))
    for r1, r2 in itertools.combinations(roots, 2):
        if abs(complex(r1 - r2)) < min_gap * scale:
            raise DegenerateQuadrupleError("3-torsion roots not separated")
    for e in poly_roots(list(c.cubic)):
        for r in roots:
            if abs(complex(r - e)) < min_gap * scale:
                raise DegenerateQuadrupleError("3-torsion meets 2-torsion")
    return sorted(roots, key=lambda z: (float(complex(z).real), float(complex(z).imag)))


@dataclass(frozen=True)
class HesseResult:
    base_points: tuple  # 9 projective points [x:y:z] over Q(ζ₃)
    identity: tuple
    images: tuple  # 4 distinct images on ℙ¹ (INFINITY allowed)
    fiber_sizes: tuple  # number of non-identity base points over each image
    cross_ratio: CyclotomicNumber
    j: CyclotomicNumber


def _normalize(p: tuple) -> tuple:
    for c in p:
        if c:
            inv = ONE / c
            return tuple(x * inv for x in p)
    raise HesseConsistencyError("zero projective point")


def hesse_isotriviality_check() -> HesseResult:
    """Exact j of the quotient of the Hesse base locus, computed in Q(ζ₃).

    The base locus of ``x³ + y³ + z³ + λxyz`` is ``{xyz = 0, x³ + y³ + z³ = 0}``,
    independent of λ. Projecting from ``[1:−1:0]`` by ``[x:y:z] ↦ [x + y : z]``
    sends the other eight points two-to-one onto four points of ℙ¹.
    """
    zeta = ZETA3
    cube_roots_of_minus_one = [-(zeta ** k) for k in range(3)]
    pts = []
    for r in cube_roots_of_minus_one:
        pts.append((CyclotomicNumber(0), ONE, r))
        pts.append((ONE, CyclotomicNumber(0), r))
        pts.append((ONE, r, CyclotomicNumber(0)))
    pts = [_normalize(p) for p in pts]
    for x, y, z in pts:
        if x * y * z != 0 or x ** 3 + y ** 3 + z ** 3 != 0:
            raise HesseConsistencyError(f"not a base point: {(x, y, z)}")
    if len(set(pts)) != 9:
        raise HesseConsistencyError("base points not distinct")
    identity = _normalize((ONE, -ONE, CyclotomicNumber(0)))
    if identity not in pts:
        raise HesseConsistencyError("identity not in the base locus")

    fibers: dict = {}
    for p in pts:
        if p == identity:
            continue
        x, y, z = p
        img = INFINITY if z == 0 else (x + y) / z
        fibers.setdefault(img, []).append(p)
    if len(fibers) != 4 or any(len(v) != 2 for v in fibers.values()):
        raise HesseConsistencyError(f"projection is not 2-to-1 onto 4 points: {fibers}")

    # order as (−1, −ζ₃, ∞, −ζ₃²) when those are the images; j does not depend on it
    preferred = [-ONE, -zeta, INFINITY, -(zeta * zeta)]
    if set(fibers) == set(preferred):
        images = tuple(preferred)
    else:
        images = tuple(fibers)
    lam = cross_ratio(*images)
    j = j_from_lambda(lam)
    return HesseResult(
        base_points=tuple(pts),
        identity=identity,
        images=images,
        fiber_sizes=tuple(len(fibers[i]) for i in images),
        cross_ratio=lam,
        j=CyclotomicNumber.coerce(j),
    )
