"""Explicit fibers of the tower stages over the two projective lines.

First line (coordinate ``t``)::

    w² = q(t) = (t−s1)(t−s2)(t−s3)(t−s4)          E
    y² = (t−s1)···(t−s6)                             Y
    [3](u, v) = (X, Y)(t, w)                         C2 adds e′ = (u, v)
    z² = ψ₃(u)/3                                     X adds z

Second line (coordinate ``s``, with ``u = u_gen + 1/s`` so that ``s = 0`` is
``u = ∞``)::

    v² = u³ + a·u + b                                E
    ρ² = 1 + (s5 − s6)·T,  T = 1/(t − s5)            C2, with y = w·ρ·(t − s5)

where ``(t, w)`` is the quartic point under ``[3](u, v)``.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import gmpy2

from ..elliptic import poly
from ..elliptic.curves import QuarticModel, QuarticModelError, multiply_by_3, quartic_to_weierstrass
from .kernels import aberth, horner
from .precision import DEFAULT_BITS, residual_tolerance, to_mpc, working_precision
from .roots import RootFindingError, poly_roots

MIN_CANDIDATE_SEPARATION = 1e-8


class DegenerateInputError(ValueError):
    """Branch data too degenerate for the construction."""


class TrackingFailure(RuntimeError):
    """Numerical continuation could not be completed soundly."""


class ResidualError(TrackingFailure):
    pass


class StepRejected(Exception):
    """Internal: the proposed step must be subdivided."""


class Line(enum.Enum):
    P = "P"
    P_PRIME = "P'"


class Stage(enum.Enum):
    P = "P"
    Y = "Y"
    E = "E"
    C1 = "C1"
    C2_over_P = "C2_over_P"
    C2_over_Pprime = "C2_over_Pprime"
    X_over_P = "X_over_P"

    @property
    def degree(self) -> int:
        return _DEGREES[self]

    @property
    def line(self) -> Line:
        return Line.P_PRIME if self is Stage.C2_over_Pprime else Line.P

    @property
    def levels(self) -> tuple[str, ...]:
        return _LEVELS[self]


_DEGREES = {Stage.P: 1, Stage.Y: 2, Stage.E: 2, Stage.C1: 4, Stage.C2_over_P: 36, Stage.C2_over_Pprime: 4, Stage.X_over_P: 72}
_LEVELS = {
    Stage.P: (),
    Stage.Y: ("y",),
    Stage.E: ("w",),
    Stage.C1: ("w", "y"),
    Stage.C2_over_P: ("w", "e3", "y"),
    Stage.X_over_P: ("w", "e3", "y", "z"),
    Stage.C2_over_Pprime: ("v", "rho"),
}


def parse_exact(x) -> Fraction | None:
    """Exact rational value of an input when it has one."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            return None
    return None


@dataclass
class TowerData:
    """All curve data at one working precision."""

    branch_inputs: tuple
    w5_sign: int
    bits: int
    seed: int
    s: list
    quartic: QuarticModel
    wmap: Any
    q_coeffs: list
    y_coeffs: list
    cubic: list
    psi3: list
    psi3_sq: list
    phi3: list
    omega: list
    psi3_monic: list
    rho_const: Any
    u_gen: Any = None
    cache: dict = field(default_factory=dict)

    @property
    def curve(self):
        return self.wmap.curve

    @classmethod
    def build(cls, branch_points: Sequence, w5_sign: int = 1, bits: int = DEFAULT_BITS, seed: int = 0) -> "TowerData":
        """Validate the six branch points and set up E, (E, t5) and the polynomials.

        Raises
        ------
        DegenerateInputError
            Wrong count, coincident points, or ``s5`` among ``s1..s4``.
        """
        if len(branch_points) != 6:
            raise DegenerateInputError("need exactly six branch points")
        if w5_sign not in (1, -1):
            raise ValueError("w5_sign must be +1 or -1")
        exact = [parse_exact(x) for x in branch_points]
        with working_precision(bits):
            s = [to_mpc(x) for x in branch_points]
            for i, j in itertools.combinations(range(6), 2):
                same = exact[i] == exact[j] if exact[i] is not None and exact[j] is not None else s[i] == s[j]
                if same:
                    raise DegenerateInputError(f"branch points s{i + 1} and s{j + 1} coincide")
            q = poly.from_roots(s[:4])
            w0 = w5_sign * gmpy2.sqrt(poly.evaluate(q, s[4]))
            if w0 == 0:
                raise DegenerateInputError("s5 is a branch point of E")
            quartic = QuarticModel(tuple(q), s[4], w0)
            wmap = quartic_to_weierstrass(quartic)
            c = wmap.curve
            d = cls(
                branch_inputs=tuple(branch_points),
                w5_sign=w5_sign,
                bits=bits,
                seed=seed,
                s=s,
                quartic=quartic,
                wmap=wmap,
                q_coeffs=list(q),
                y_coeffs=poly.from_roots(s),
                cubic=list(c.cubic),
                psi3=list(c.psi3),
                psi3_sq=list(c.psi3_squared),
                phi3=list(c.phi3),
                omega=list(c.omega3_cofactor),
                psi3_monic=[x / 3 for x in c.psi3],
                rho_const=s[4] - s[5],
            )
        return d

    def at_precision(self, bits: int) -> "TowerData":
        return TowerData.build(self.branch_inputs, self.w5_sign, bits, self.seed)

    # -- first-line chart ---------------------------------------------------

    def e3_polynomial(self, X) -> list:
        """``φ₃(u) − X·ψ₃(u)²`` (monic, degree 9)."""
        out = list(self.phi3)
        for k, c in enumerate(self.psi3_sq):
            out[k] = out[k] - X * c
        return out

    def e3_roots(self, X) -> list:
        with working_precision(self.bits):
            return poly_roots(self.e3_polynomial(X))

    # -- candidates ---------------------------------------------------------

    def candidates(self, line: Line) -> list[tuple[str, Any]]:
        key = ("candidates", line)
        if key not in self.cache:
            with working_precision(self.bits):
                cands = self._p_candidates() if line is Line.P else self._pprime_candidates()
            _check_separation(cands)
            self.cache[key] = cands
        return self.cache[key]

    def _p_candidates(self) -> list:
        cands = [(f"s{k + 1}", x) for k, x in enumerate(self.s)]
        # t-images of E[2]: the u-solve has double roots there
        for k, e in enumerate(_sorted_points(poly_roots(self.cubic))):
            T, _ = self.wmap.inverse_chart((e, 0 * e))
            if T != 0:
                cands.append((f"e2_{k + 1}", self.quartic.t0 + 1 / T))
        return cands

    def u_candidates(self) -> list[tuple[str, Any]]:
        """Critical u-values of the second-line stage (``None`` for u = ∞)."""
        key = "u_candidates"
        if key in self.cache:
            return self.cache[key]
        with working_precision(self.bits):
            from ..elliptic.invariants import three_torsion_branch_points

            out = [(f"D{k + 1}", u) for k, u in enumerate(three_torsion_branch_points(self.curve))]
            out += [(f"f{k + 1}", u) for k, u in enumerate(_sorted_points(poly_roots(self.cubic)))]
            out.append(("inf", None))
            w0 = self.quartic.w0
            s6 = self.s[5]
            w6 = gmpy2.sqrt(poly.evaluate(self.q_coeffs, s6))
            targets = [
                ("t5c", self.wmap.forward((self.quartic.t0, -w0))),
                ("s6p", self.wmap.forward((s6, w6))),
                ("s6m", self.wmap.forward((s6, -w6))),
            ]
            for name, (X, _) in targets:
                for k, u in enumerate(_sorted_points(poly_roots(self.e3_polynomial(X)))):
                    out.append((f"{name}_{k + 1}", u))
        self.cache[key] = out
        return out

    def _pprime_candidates(self) -> list:
        uc = self.u_candidates()
        if self.u_gen is None:
            self.u_gen = _choose_u_gen([u for _, u in uc if u is not None], self.seed)
        return [(name, 0 * self.u_gen if u is None else 1 / (u - self.u_gen)) for name, u in uc]

    def u_of_s(self, s):
        return self.u_gen + 1 / s


def branch_candidates(stage: Stage, data: TowerData) -> list[tuple[str, Any]]:
    """Labelled candidate branch points of ``stage`` on its base line.

    Loop geometry always uses the full candidate set of the line (see
    ``TowerData.candidates``) so that stages over one line share loops.
    """
    if stage.degree == 1:
        return []
    cands = data.candidates(stage.line)
    if stage is Stage.E:
        return cands[:4]
    if stage in (Stage.Y, Stage.C1):
        return cands[:6]
    return cands


def _sorted_points(pts) -> list:
    return sorted(pts, key=lambda z: (float(z.real), float(z.imag)))


def _check_separation(cands) -> None:
    for (na, a), (nb, b) in itertools.combinations(cands, 2):
        if abs(complex(a - b)) < MIN_CANDIDATE_SEPARATION:
            raise DegenerateInputError(f"branch candidates {na} and {nb} collide")


def _choose_u_gen(ucands: list, seed: int):
    """A point of the u-line, away from candidates, that keeps the s-images spread.

    Scores trial points by (minimum pairwise gap)/(largest modulus) of the
    images ``1/(u − g)`` together with ``0`` (the image of ``u = ∞``).
    """
    rng = random.Random(seed)
    zs = [complex(u) for u in ucands]
    re = sorted(z.real for z in zs)
    im = sorted(z.imag for z in zs)
    centre = complex(re[len(re) // 2], im[len(im) // 2])
    radius = sorted(abs(z - centre) for z in zs)[len(zs) // 2] + 1.0
    best, best_score = None, -1.0
    for _ in range(256):
        g = centre + complex(rng.uniform(-2, 2), rng.uniform(-2, 2)) * radius
        # short decimals keep the choice exact and reproducible
        g = complex(round(g.real, 3), round(g.imag, 3))
        if min(abs(z - g) for z in zs) < 1e-3:
            continue
        images = [0j] + [1 / (z - g) for z in zs]
        gap = min(abs(a - b) for a, b in itertools.combinations(images, 2))
        score = gap / max(abs(a) for a in images)
        if score > best_score:
            best, best_score = g, score
    return gmpy2.mpc(gmpy2.mpq(Fraction(str(best.real))), gmpy2.mpq(Fraction(str(best.imag))))


# -- fiber levels -------------------------------------------------------------

def _sqrt_pair(x, ctx=None) -> list:
    r = gmpy2.sqrt(x)
    if ctx is not None:
        ctx.note(_rel_residual(r * r, x))
    return [(r,), (-r,)]


def _rel_residual(lhs, rhs) -> float:
    return float(abs(lhs - rhs)) / max(1.0, float(abs(rhs)))


class _Ctx:
    """Per-base-point values shared by the level solvers."""

    __slots__ = ("data", "base", "tol", "residual")

    def __init__(self, data: TowerData, base):
        self.data = data
        self.base = base
        self.tol = residual_tolerance(data.bits)
        self.residual = 0.0

    def note(self, r: float) -> None:
        if r > self.residual:
            self.residual = r
        if r > self.tol:
            raise ResidualError(f"residual {r:.3e} above {self.tol:.3e}")


def _level_w(ctx: _Ctx, prefix, hint):
    t = ctx.base
    qt = horner(ctx.data.q_coeffs, t)
    return _sqrt_pair(qt, ctx)


def _level_y(ctx: _Ctx, prefix, hint):
    return _sqrt_pair(horner(ctx.data.y_coeffs, ctx.base), ctx)


def _level_e3(ctx: _Ctx, prefix, hint):
    d = ctx.data
    t = ctx.base
    (w,) = prefix[0]
    image = d.wmap.forward((t, w))
    if image is None:
        raise StepRejected("base point at the marked point")
    X, Y = image
    F = d.e3_polynomial(X)
    roots = None
    if hint:
        z, _, ok = aberth(F, [h[0] for h in hint], 2.0 ** (8 - d.bits), 60)
        if ok:
            roots = z
    if roots is None:
        try:
            roots = poly_roots(F)
        except RootFindingError as exc:
            raise StepRejected(str(exc)) from None
    out = []
    ymag = max(1.0, float(abs(Y)))
    for u in roots:
        # polynomial residual, scaled by the size of the terms
        scale = max(1.0, float(abs(horner([abs(c) for c in F], abs(u)))))
        ctx.note(float(abs(horner(F, u))) / scale)
        v0 = gmpy2.sqrt(horner(d.cubic, u))
        s = horner(d.psi3, u)
        yv = v0 * horner(d.omega, u) / (s * s * s)
        rp, rm = float(abs(yv - Y)) / ymag, float(abs(yv + Y)) / ymag
        if min(rp, rm) * 1e6 > max(rp, rm) and max(rp, rm) > ctx.tol:
            raise StepRejected("v-sign of a ×3 preimage is ambiguous")
        if rp <= rm:
            out.append((u, v0))
        else:
            out.append((u, -v0))
        ctx.note(min(rp, rm))
    return out


def _level_z(ctx: _Ctx, prefix, hint):
    u = prefix[1][0]
    return _sqrt_pair(horner(ctx.data.psi3_monic, u), ctx)


def _level_v(ctx: _Ctx, prefix, hint):
    d = ctx.data
    u = d.u_of_s(ctx.base)
    return _sqrt_pair(horner(d.cubic, u), ctx)


def _level_rho(ctx: _Ctx, prefix, hint):
    d = ctx.data
    u = d.u_of_s(ctx.base)
    (v,) = prefix[0]
    image = multiply_by_3((u, v), d.curve)
    if image is None:
        raise StepRejected("base point on the 3-torsion")
    try:
        T, _ = d.wmap.inverse_chart(image)
    except QuarticModelError as exc:
        raise StepRejected(str(exc)) from None
    return _sqrt_pair(1 + d.rho_const * T, ctx)


LEVEL_SOLVERS: dict[str, Callable] = {
    "w": _level_w,
    "y": _level_y,
    "e3": _level_e3,
    "z": _level_z,
    "v": _level_v,
    "rho": _level_rho,
}


def value_distance(a: tuple, b: tuple) -> float:
    """Max-norm distance between two level values.

    Plain (not chordal) distances keep the matching ratio scale-free: near a
    pole both the motion and the separation grow like the value itself.
    """
    return max(abs(complex(x - y)) for x, y in zip(a, b))


def _value_key(v: tuple):
    return tuple(x for c in v for x in (float(c.real), float(c.imag)))


# -- fiber trees --------------------------------------------------------------

class Node:
    __slots__ = ("value", "children")

    def __init__(self, value, children):
        self.value = value
        self.children = children

    def leaves(self, prefix=()):
        if not self.children:
            yield prefix
            return
        for c in self.children:
            yield from c.leaves(prefix + (c.value,))


def solve_tree(data: TowerData, stage: Stage, base) -> tuple[Node, float]:
    """Fiber over ``base`` as a tree of level values, children in canonical order.

    Returns the tree and the largest relative residual met.
    """
    with working_precision(data.bits):
        ctx = _Ctx(data, to_mpc(base))
        levels = stage.levels

        def build(depth, prefix):
            if depth == len(levels):
                return []
            vals = LEVEL_SOLVERS[levels[depth]](ctx, prefix, None)
            vals = sorted(vals, key=_value_key)
            return [Node(v, build(depth + 1, prefix + (v,))) for v in vals]

        root = Node(None, build(0, ()))
    n = sum(1 for _ in root.leaves())
    if n != stage.degree:
        raise TrackingFailure(f"{stage.value}: fiber has {n} points, expected {stage.degree}")
    return root, ctx.residual


@dataclass(frozen=True)
class TowerPoint:
    """One point of a stage fiber; ``coords`` maps coordinate names to values."""

    stage: Stage
    coords: dict
    bits: int
    residual: float

    def __getitem__(self, key):
        return self.coords[key]


def _coords(data: TowerData, stage: Stage, base, leaf) -> dict:
    out = {}
    if stage.line is Line.P:
        out["t"] = base
    else:
        out["s"] = base
        out["u"] = data.u_of_s(base)
    for name, val in zip(stage.levels, leaf):
        if name == "e3":
            out["u"], out["v"] = val
        else:
            out[name] = val[0]
    if stage is Stage.C2_over_Pprime:
        with working_precision(data.bits):
            X, Y = multiply_by_3((out["u"], out["v"]), data.curve)
            t, w = data.wmap.inverse((X, Y))
            out["t"], out["w"] = t, w
            out["y"] = w * out["rho"] * (t - data.s[4])
    return out


def solve_fiber(stage: Stage, data: TowerData, base) -> list[TowerPoint]:
    """Exactly ``stage.degree`` fiber points over ``base``, in canonical order.

    Raises
    ------
    TrackingFailure
        Wrong point count or a residual above the precision-dependent bound.
    """
    root, residual = solve_tree(data, stage, base)
    with working_precision(data.bits):
        b = to_mpc(base)
        return [TowerPoint(stage, _coords(data, stage, b, leaf), data.bits, residual) for leaf in root.leaves()]


def point_residuals(p: TowerPoint, data: TowerData) -> dict:
    """Relative residual of each defining equation present in ``p``."""
    c = p.coords
    out = {}
    with working_precision(data.bits):
        if "w" in c and "t" in c:
            out["w"] = _rel_residual(c["w"] ** 2, horner(data.q_coeffs, c["t"]))
        if "y" in c and "t" in c:
            out["y"] = _rel_residual(c["y"] ** 2, horner(data.y_coeffs, c["t"]))
        if "u" in c and "v" in c:
            out["v"] = _rel_residual(c["v"] ** 2, horner(data.cubic, c["u"]))
            if "t" in c and "w" in c:
                img = multiply_by_3((c["u"], c["v"]), data.curve)
                X, Y = data.wmap.forward((c["t"], c["w"]))
                out["e3"] = max(_rel_residual(img[0], X), _rel_residual(img[1], Y))
        if "z" in c:
            out["z"] = _rel_residual(c["z"] ** 2, horner(data.psi3_monic, c["u"]))
    return out
