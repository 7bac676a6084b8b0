"""Branched covers of marked surfaces encoded as permutation tuples.

A cover of degree ``d`` over a base of genus ``g`` with marked points
``p_1..p_n`` is a tuple ``(A_1, B_1, ..., A_g, B_g, C_1, ..., C_n)`` of
permutations of ``0..d-1``. Loops are concatenated left to right in the
surface word ``[A_1,B_1]…[A_g,B_g]·C_1⋯C_n`` and the word must act trivially.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

from .perm import (
    CycleType,
    Permutation,
    compose,
    cycle_type,
    orbit_lengths,
    orbits,
    product_action,
)

Word = Sequence[tuple[int, int]]


class CoverError(ValueError):
    """Invalid cover data or an operation whose preconditions fail."""


class HomologyInvariantError(AssertionError):
    """Computed homology rank disagrees with twice the genus."""


@dataclass(frozen=True)
class MarkedBase:
    genus: int
    marked_points: tuple[Hashable, ...]

    def __post_init__(self):
        object.__setattr__(self, "marked_points", tuple(self.marked_points))
        if self.genus < 0:
            raise CoverError("negative genus")
        if len(set(self.marked_points)) != len(self.marked_points):
            raise CoverError(f"duplicate marked point labels: {self.marked_points}")

    @property
    def n_points(self) -> int:
        return len(self.marked_points)

    @property
    def n_generators(self) -> int:
        return 2 * self.genus + self.n_points

    def index(self, label: Hashable) -> int:
        return self.marked_points.index(label)

    def relation_word(self) -> list[tuple[int, int]]:
        """The surface relation as (generator index, ±1) letters in path order."""
        word = []
        for i in range(self.genus):
            a, b = 2 * i, 2 * i + 1
            word += [(a, 1), (b, 1), (a, -1), (b, -1)]
        word += [(2 * self.genus + k, 1) for k in range(self.n_points)]
        return word


@dataclass(frozen=True)
class Cover:
    base: MarkedBase
    degree: int
    monodromy: tuple[Permutation, ...]

    def __post_init__(self):
        object.__setattr__(self, "monodromy", tuple(self.monodromy))

    def local_monodromy(self, k: int) -> Permutation:
        """Permutation of the loop around marked point ``k``."""
        if not 0 <= k < self.base.n_points:
            raise IndexError(f"marked point index {k} out of range")
        return self.monodromy[2 * self.base.genus + k]

    def ramification_profile(self) -> list[CycleType]:
        return [cycle_type(self.local_monodromy(k)) for k in range(self.base.n_points)]

    def components(self) -> list[list[int]]:
        return orbits(self.monodromy, self.degree)

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def relation_product(self) -> Permutation:
        """Action of the surface word; the identity for a valid cover."""
        return apply_word(self, self.base.relation_word())


@dataclass(frozen=True)
class CoverMap:
    """Equivariant surjection of the source fiber onto the target fiber."""

    source: Cover
    target: Cover
    fiber_map: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "fiber_map", tuple(int(i) for i in self.fiber_map))

    @property
    def degree(self) -> int:
        return self.source.degree // self.target.degree

    def compose(self, other: "CoverMap") -> "CoverMap":
        """``self`` after ``other`` (other.target must equal self.source)."""
        if other.target != self.source:
            raise CoverError("maps are not composable")
        return CoverMap(other.source, self.target, tuple(self.fiber_map[i] for i in other.fiber_map))


@dataclass
class ValidationReport:
    ok: bool
    violation: str | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def apply_word(c: Cover, word: Word) -> Permutation:
    """Monodromy of a word of loops, letters applied in path order."""
    result = Permutation.identity(c.degree)
    for gen, exp in word:
        p = c.monodromy[gen]
        result = compose(p if exp > 0 else p.inverse(), result)
    return result


def validate_cover(c: Cover) -> ValidationReport:
    """Check well-formedness and the surface relation; never raises."""
    base = c.base
    if len(c.monodromy) != base.n_generators:
        return ValidationReport(
            False, "generator count", {"expected": base.n_generators, "found": len(c.monodromy)}
        )
    for k, p in enumerate(c.monodromy):
        if not isinstance(p, Permutation):
            return ValidationReport(False, "not a permutation", {"generator": k})
        if p.degree != c.degree:
            return ValidationReport(False, "degree mismatch", {"generator": k, "degree": p.degree})
    prod = c.relation_product()
    if not prod.is_identity():
        return ValidationReport(False, "surface relation", {"product": list(prod.images)})
    return ValidationReport(True)


def validate_cover_map(m: CoverMap) -> ValidationReport:
    """Surjectivity, equivariance at every generator, and equal fiber sizes."""
    src, tgt = m.source, m.target
    if src.base != tgt.base:
        return ValidationReport(False, "bases differ")
    if len(m.fiber_map) != src.degree:
        return ValidationReport(False, "fiber map length", {"found": len(m.fiber_map)})
    if any(not 0 <= j < tgt.degree for j in m.fiber_map):
        return ValidationReport(False, "fiber map out of range")
    sizes = np.bincount(np.asarray(m.fiber_map, dtype=int), minlength=tgt.degree)
    if tgt.degree * int(sizes[0]) != src.degree or not np.all(sizes == sizes[0]):
        return ValidationReport(False, "unequal fiber sizes", {"sizes": sizes.tolist()})
    for k, (ps, pt) in enumerate(zip(src.monodromy, tgt.monodromy)):
        for x in range(src.degree):
            if m.fiber_map[ps(x)] != pt(m.fiber_map[x]):
                return ValidationReport(False, "equivariance", {"generator": k, "point": x})
    return ValidationReport(True)


def riemann_hurwitz_genus(c: Cover) -> int:
    """Genus of a connected cover from ``χ = d·χ(base) − Σ (e − 1)``."""
    if not c.is_connected():
        raise CoverError("Riemann-Hurwitz requires a connected cover")
    chi = c.degree * (2 - 2 * c.base.genus) - sum(ct.ramification() for ct in c.ramification_profile())
    g = Fraction(2 - chi, 2)
    if g.denominator != 1 or g < 0:
        raise CoverError(f"non-integral or negative genus {g}: malformed monodromy")
    return int(g)


def euler_characteristic(c: Cover) -> int:
    return c.degree * (2 - 2 * c.base.genus) - sum(ct.ramification() for ct in c.ramification_profile())


def relative_ramification_ok(m: CoverMap, point_index: int) -> bool:
    """True iff every source point over marked point ``k`` keeps its image's local order."""
    ps = m.source.local_monodromy(point_index)
    pt = m.target.local_monodromy(point_index)
    ls, lt = orbit_lengths(ps), orbit_lengths(pt)
    return all(ls[x] == lt[m.fiber_map[x]] for x in range(m.source.degree))


def is_etale(m: CoverMap) -> bool:
    return all(relative_ramification_ok(m, k) for k in range(m.source.base.n_points))


def trivial_cover(base: MarkedBase) -> Cover:
    return Cover(base, 1, (Permutation.identity(1),) * base.n_generators)


def to_trivial(c: Cover) -> CoverMap:
    return CoverMap(c, trivial_cover(c.base), (0,) * c.degree)


def double_cover(base: MarkedBase, branched: Sequence[Hashable]) -> Cover:
    """Degree-2 cover of a genus-0 base swapping sheets over ``branched``."""
    if base.genus != 0:
        raise CoverError("double_cover expects a genus-0 base")
    swap, ident = Permutation((1, 0)), Permutation.identity(2)
    branched = set(branched)
    unknown = branched - set(base.marked_points)
    if unknown:
        raise CoverError(f"unknown labels {sorted(map(str, unknown))}")
    return Cover(base, 2, tuple(swap if lab in branched else ident for lab in base.marked_points))


def fiber_product(a: CoverMap, b: CoverMap) -> list[tuple[Cover, CoverMap, CoverMap]]:
    """Connected components of the normalized fiber product ``A ×_Z B``.

    Components are the orbits of the coordinatewise action on matched pairs,
    sorted by (degree, smallest pair).
    """
    if a.target != b.target:
        raise CoverError("fiber product needs maps into the same cover")
    A, B = a.source, b.source
    if A.base != B.base:
        raise CoverError("mismatched bases")
    pairs = [(i, j) for i in range(A.degree) for j in range(B.degree) if a.fiber_map[i] == b.fiber_map[j]]
    gens = [product_action(pairs, pa, pb) for pa, pb in zip(A.monodromy, B.monodromy)]
    out = []
    for block in orbits(gens, len(pairs)):
        local = {k: n for n, k in enumerate(block)}
        mono = tuple(Permutation(tuple(local[g(k)] for k in block)) for g in gens)
        comp = Cover(A.base, len(block), mono)
        to_a = CoverMap(comp, A, tuple(pairs[k][0] for k in block))
        to_b = CoverMap(comp, B, tuple(pairs[k][1] for k in block))
        for m in (to_a, to_b):
            report = validate_cover_map(m)
            if not report:
                raise AssertionError(f"fiber product projection invalid: {report}")
        out.append((comp, to_a, to_b, pairs[block[0]]))
    out.sort(key=lambda item: (item[0].degree, item[3]))
    return [item[:3] for item in out]


def refine_marked_points(c: Cover, extra: Sequence[Hashable]) -> Cover:
    """Append marked points with identity monodromy."""
    extra = tuple(extra)
    if set(extra) & set(c.base.marked_points) or len(set(extra)) != len(extra):
        raise CoverError("duplicate marked point label")
    base = MarkedBase(c.base.genus, c.base.marked_points + extra)
    ident = Permutation.identity(c.degree)
    return Cover(base, c.degree, c.monodromy + (ident,) * len(extra))


def forget_marked_points(c: Cover, labels: Sequence[Hashable]) -> Cover:
    """Drop marked points whose local monodromy is the identity."""
    drop = set(labels)
    keep = []
    for k, lab in enumerate(c.base.marked_points):
        if lab in drop:
            if not c.local_monodromy(k).is_identity():
                raise CoverError(f"cannot forget branched point {lab!r}")
        else:
            keep.append(k)
    g2 = 2 * c.base.genus
    base = MarkedBase(c.base.genus, tuple(c.base.marked_points[k] for k in keep))
    return Cover(base, c.degree, c.monodromy[:g2] + tuple(c.monodromy[g2 + k] for k in keep))


def align_base(c: Cover, base: MarkedBase) -> Cover:
    """Re-express ``c`` over a finer base whose extra points are unbranched.

    The existing marked points must appear in ``base`` in the same relative
    order; identity generators may sit anywhere in the relation.
    """
    if base.genus != c.base.genus:
        raise CoverError("genus mismatch")
    old = c.base.marked_points
    positions = [base.marked_points.index(lab) for lab in old if lab in base.marked_points]
    if len(positions) != len(old) or positions != sorted(positions):
        raise CoverError("target base does not refine the cover's base in order")
    ident = Permutation.identity(c.degree)
    g2 = 2 * c.base.genus
    lookup = dict(zip(old, c.monodromy[g2:]))
    mono = c.monodromy[:g2] + tuple(lookup.get(lab, ident) for lab in base.marked_points)
    return Cover(base, c.degree, mono)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


class SurfaceHomology:
    """First homology of the closed cover surface with ``Z/p`` coefficients.

    The cover surface is the lift of the base cell structure: one vertex per
    sheet, one edge ``(x, k)`` from sheet ``x`` to ``σ_k(x)`` per generator,
    one disk per cycle of each ``C_k`` and one relation disk per sheet.
    Cycles are coordinatized by the edges outside a BFS spanning tree rooted
    at ``basepoint``; homology is that space modulo all disk boundaries.
    """

    def __init__(self, c: Cover, modulus: int, basepoint: int = 0):
        if not _is_prime(modulus):
            raise CoverError("homology modulus must be prime")
        if not c.is_connected():
            raise CoverError("homology requires a connected cover")
        self.cover = c
        self.modulus = p = modulus
        self.basepoint = basepoint
        d, ngen = c.degree, len(c.monodromy)
        self._inv = [g.inverse() for g in c.monodromy]

        # BFS spanning tree; parent_letter[x] is the letter reaching x
        parent_letter: dict[int, tuple[int, int, int]] = {}
        seen = {basepoint}
        queue = [basepoint]
        tree_edges = set()
        for x in queue:
            for k in range(ngen):
                for y, edge, exp in ((c.monodromy[k](x), (x, k), 1), (self._inv[k](x), (self._inv[k](x), k), -1)):
                    if y not in seen:
                        seen.add(y)
                        parent_letter[y] = (x, k, exp)
                        tree_edges.add(edge)
                        queue.append(y)
        self._parent_letter = parent_letter
        self.nontree_edges = [(x, k) for x in range(d) for k in range(ngen) if (x, k) not in tree_edges]
        self._edge_index = {e: n for n, e in enumerate(self.nontree_edges)}

        rows = [self._chain_of_cycle(cyc, 2 * c.base.genus + k)
                for k in range(c.base.n_points) for cyc in c.local_monodromy(k).cycles()]
        relation = c.base.relation_word()
        rows += [self.word_vector(relation, start=x, check_closed=True) for x in range(d)]
        self._rref, self._pivots = _row_reduce(np.array(rows, dtype=np.int64).reshape(len(rows), -1) % p, p)
        self._free = [j for j in range(len(self.nontree_edges)) if j not in set(self._pivots)]
        self.rank = len(self._free)

        genus = riemann_hurwitz_genus(c)
        if self.rank != 2 * genus:
            raise HomologyInvariantError(f"rank {self.rank} != 2*genus {2 * genus}")

    def _chain_of_cycle(self, cyc: tuple[int, ...], gen: int) -> np.ndarray:
        vec = np.zeros(len(self.nontree_edges), dtype=np.int64)
        for x in cyc:
            j = self._edge_index.get((x, gen))
            if j is not None:
                vec[j] += 1
        return vec % self.modulus

    def word_vector(self, word: Word, start: int = 0, check_closed: bool = True) -> np.ndarray:
        """Cycle-space coordinates of the lift of ``word`` starting at sheet ``start``."""
        vec = np.zeros(len(self.nontree_edges), dtype=np.int64)
        cur = start
        for gen, exp in word:
            if exp > 0:
                edge, cur = (cur, gen), self.cover.monodromy[gen](cur)
            else:
                cur = self._inv[gen](cur)
                edge = (cur, gen)
            j = self._edge_index.get(edge)
            if j is not None:
                vec[j] += 1 if exp > 0 else -1
        if check_closed and cur != start:
            raise CoverError("word does not lift to a closed loop")
        return vec % self.modulus

    def reduce(self, vec: np.ndarray) -> tuple[int, ...]:
        """Homology coordinates of a cycle vector."""
        v = vec.copy() % self.modulus
        for row, piv in zip(self._rref, self._pivots):
            if v[piv]:
                v = (v - v[piv] * row) % self.modulus
        return tuple(int(v[j]) for j in self._free)

    def class_of_word(self, word: Word, start: int | None = None) -> tuple[int, ...]:
        start = self.basepoint if start is None else start
        return self.reduce(self.word_vector(word, start=start, check_closed=True))

    def transversal_word(self, x: int) -> list[tuple[int, int]]:
        """Tree path from the basepoint to sheet ``x`` as a word."""
        letters = []
        while x != self.basepoint:
            prev, k, exp = self._parent_letter[x]
            letters.append((k, exp))
            x = prev
        return letters[::-1]

    def schreier_class(self, x: int, gen: int) -> tuple[int, ...]:
        """Class of ``t_x · γ · t_{γx}^{-1}`` for the generator ``γ`` at sheet ``x``."""
        y = self.cover.monodromy[gen](x)
        back = [(k, -e) for k, e in reversed(self.transversal_word(y))]
        return self.class_of_word(self.transversal_word(x) + [(gen, 1)] + back)


def _row_reduce(m: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(p); returns nonzero rows and pivot columns."""
    m = m.copy() % p
    rows, cols = m.shape
    pivots = []
    r = 0
    for col in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, col])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        m[r] = (m[r] * pow(int(m[r, col]), -1, p)) % p
        others = np.nonzero(m[:, col])[0]
        for i in others:
            if i != r:
                m[i] = (m[i] - m[i, col] * m[r]) % p
        pivots.append(col)
        r += 1
    return m[:r], pivots


def closed_surface_homology(c: Cover, modulus: int, basepoint: int = 0) -> SurfaceHomology:
    return SurfaceHomology(c, modulus, basepoint)


def mul3_torsor_cover(e: Cover, basepoint: int = 0) -> tuple[Cover, CoverMap]:
    """The étale cover of a genus-1 cover killed by ``H_1 mod 3``.

    Fiber is ``e``-fiber × (Z/3)²: sheet ``(x, v)`` has index ``9x + 3v₀ + v₁``,
    and each generator acts by ``(x, v) -> (γx, v + h(x, γ))`` with ``h`` the
    Schreier cocycle in ``H_1(closed e; Z/3)``.
    """
    if not e.is_connected():
        raise CoverError("mul3_torsor_cover needs a connected cover")
    if riemann_hurwitz_genus(e) != 1:
        raise CoverError("mul3_torsor_cover needs a genus-1 cover")
    hom = closed_surface_homology(e, 3, basepoint)
    d = e.degree

    def index(x, v0, v1):
        return 9 * x + 3 * v0 + v1

    mono = []
    for k, g in enumerate(e.monodromy):
        images = [0] * (9 * d)
        for x in range(d):
            h0, h1 = hom.schreier_class(x, k)
            for v0 in range(3):
                for v1 in range(3):
                    images[index(x, v0, v1)] = index(g(x), (v0 + h0) % 3, (v1 + h1) % 3)
        mono.append(Permutation(tuple(images)))
    cover = Cover(e.base, 9 * d, tuple(mono))
    proj = CoverMap(cover, e, tuple(i // 9 for i in range(9 * d)))
    report = validate_cover_map(proj)
    if not report:
        raise AssertionError(f"torsor projection invalid: {report}")
    return cover, proj
