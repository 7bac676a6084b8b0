"""Exact permutation algebra on dense fiber indices ``0..d-1``.

Permutations act on the right when loops are concatenated: following loop
``a`` and then loop ``b`` moves sheet ``i`` to ``b(a(i))``, which is
``compose(b, a)``.
"""

from __future__ import annotations

import time
from collections import Counter, deque
from dataclasses import dataclass
from typing import Iterable, Sequence


class PermutationError(ValueError):
    """Malformed permutation data or incompatible degrees."""


class ClosureError(PermutationError):
    """A pair set is not closed under a coordinatewise action."""


class ConjugacySearchTimeout(RuntimeError):
    """Backtracking for a simultaneous conjugator ran out of time."""


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(len(images))):
            raise PermutationError(f"not a bijection on 0..{len(images) - 1}: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, degree: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        """Build a permutation from disjoint cycles, e.g. ``[(0, 1), (2, 3, 4)]``."""
        images = list(range(degree))
        seen: set[int] = set()
        for cyc in cycles:
            for k, i in enumerate(cyc):
                if i in seen:
                    raise PermutationError(f"point {i} appears in two cycles")
                seen.add(i)
                images[i] = cyc[(k + 1) % len(cyc)]
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __len__(self) -> int:
        return len(self.images)

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def cycles(self, include_fixed: bool = True) -> list[tuple[int, ...]]:
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.images[start]
            while j != start:
                cyc.append(j)
                seen[j] = True
                j = self.images[j]
            if include_fixed or len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def conjugate_by(self, r: "Permutation") -> "Permutation":
        """Return ``r∘self∘r⁻¹`` (relabel points through ``r``)."""
        return compose(compose(r, self), r.inverse())

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __repr__(self) -> str:
        cyc = self.cycles(include_fixed=False)
        body = "".join("(" + " ".join(map(str, c)) + ")" for c in cyc) or "()"
        return f"Permutation<{self.degree}>{body}"


@dataclass(frozen=True, order=True)
class CycleType:
    """Multiset of cycle lengths, stored in descending order."""

    lengths: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(sorted((int(x) for x in self.lengths), reverse=True)))
        if any(x <= 0 for x in self.lengths):
            raise PermutationError("cycle lengths must be positive")

    @property
    def degree(self) -> int:
        return sum(self.lengths)

    def counts(self) -> dict[int, int]:
        return dict(sorted(Counter(self.lengths).items()))

    def is_even(self) -> bool:
        """Every cycle has even length (every preimage has even ramification)."""
        return all(x % 2 == 0 for x in self.lengths)

    def ramification(self) -> int:
        return sum(x - 1 for x in self.lengths)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.lengths)) + "}"


def _check_degrees(perms: Sequence[Permutation]) -> int:
    degrees = {p.degree for p in perms}
    if len(degrees) > 1:
        raise PermutationError(f"degree mismatch: {sorted(degrees)}")
    return degrees.pop() if degrees else 0


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Return ``p∘q``, i.e. ``i -> p(q(i))``."""
    if p.degree != q.degree:
        raise PermutationError(f"degree mismatch: {p.degree} vs {q.degree}")
    return Permutation(tuple(p.images[j] for j in q.images))


def compose_path(perms: Iterable[Permutation]) -> Permutation:
    """Monodromy of traversing the loops in order: ``perms[-1]∘…∘perms[0]``."""
    result = None
    for p in perms:
        result = p if result is None else compose(p, result)
    if result is None:
        raise PermutationError("empty path")
    return result


def cycle_type(p: Permutation) -> CycleType:
    return CycleType(tuple(len(c) for c in p.cycles()))


def orbit_lengths(p: Permutation) -> list[int]:
    """Length of the cycle through each point, indexed by point."""
    out = [0] * p.degree
    for cyc in p.cycles():
        for i in cyc:
            out[i] = len(cyc)
    return out


def orbits(generators: Sequence[Permutation], degree: int | None = None) -> list[list[int]]:
    """Finest partition of ``0..d-1`` closed under all generators.

    With no generators every point is its own block; ``degree`` must then be
    given explicitly.
    """
    d = _check_degrees(generators) if generators else None
    if d is None:
        if degree is None:
            raise PermutationError("degree required when there are no generators")
        d = degree
    elif degree is not None and degree != d:
        raise PermutationError(f"degree mismatch: {degree} vs {d}")

    parent = list(range(d))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for g in generators:
        for i, j in enumerate(g.images):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    blocks: dict[int, list[int]] = {}
    for i in range(d):
        blocks.setdefault(find(i), []).append(i)
    return sorted(blocks.values(), key=lambda b: b[0])


def is_transitive(generators: Sequence[Permutation], degree: int | None = None) -> bool:
    return len(orbits(generators, degree)) == 1


def product_action(pairs: Sequence[tuple[int, int]], p: Permutation, q: Permutation) -> Permutation:
    """Coordinatewise action of ``(p, q)`` on an indexed set of pairs."""
    index = {tuple(pair): k for k, pair in enumerate(pairs)}
    if len(index) != len(pairs):
        raise PermutationError("duplicate pairs")
    images = []
    for i, j in pairs:
        try:
            images.append(index[(p(i), q(j))])
        except KeyError:
            raise ClosureError(f"pair ({i}, {j}) leaves the pair set") from None
    return Permutation(tuple(images))


def are_simultaneously_conjugate(
    tuple_a: Sequence[Permutation],
    tuple_b: Sequence[Permutation],
    timeout: float | None = 30.0,
) -> Permutation | None:
    """Find ``r`` with ``r∘A_k = B_k∘r`` for every ``k``, or ``None``.

    Orbits of ``A`` are matched to orbits of ``B`` by backtracking; inside an
    orbit the relabeling is forced once the image of one point is chosen.
    Candidate images are pruned by per-point cycle-length signatures.

    Raises
    ------
    ConjugacySearchTimeout
        If the search exceeds ``timeout`` seconds.
    """
    if len(tuple_a) != len(tuple_b):
        raise PermutationError("tuples of different lengths")
    if not tuple_a:
        return None
    d = _check_degrees(list(tuple_a) + list(tuple_b))
    if sorted(cycle_type(p) for p in tuple_a) != sorted(cycle_type(p) for p in tuple_b):
        return None
    if any(cycle_type(p) != cycle_type(q) for p, q in zip(tuple_a, tuple_b)):
        return None

    deadline = None if timeout is None else time.monotonic() + timeout
    sig_a = list(zip(*(orbit_lengths(p) for p in tuple_a)))
    sig_b = list(zip(*(orbit_lengths(p) for p in tuple_b)))
    a_inv = [p.inverse() for p in tuple_a]
    b_inv = [p.inverse() for p in tuple_b]
    orbs_a = orbits(tuple_a)
    orbs_b = orbits(tuple_b)
    if sorted(map(len, orbs_a)) != sorted(map(len, orbs_b)):
        return None

    def extend(r: list[int], used: list[bool], x: int, y: int) -> list[int] | None:
        # propagate r(x) = y through the orbit of x; returns the points assigned
        assigned = []
        r[x] = y
        used[y] = True
        assigned.append(x)
        queue = deque([x])
        while queue:
            i = queue.popleft()
            for gens_a, gens_b in ((tuple_a, tuple_b), (a_inv, b_inv)):
                for pa, pb in zip(gens_a, gens_b):
                    ni, nj = pa(i), pb(r[i])
                    if r[ni] == -1:
                        if used[nj] or sig_a[ni] != sig_b[nj]:
                            for k in assigned:
                                used[r[k]] = False
                                r[k] = -1
                            return None
                        r[ni] = nj
                        used[nj] = True
                        assigned.append(ni)
                        queue.append(ni)
                    elif r[ni] != nj:
                        for k in assigned:
                            used[r[k]] = False
                            r[k] = -1
                        return None
        return assigned

    r = [-1] * d
    used = [False] * d

    def search(k: int) -> bool:
        if deadline is not None and time.monotonic() > deadline:
            raise ConjugacySearchTimeout("simultaneous conjugacy search timed out")
        if k == len(orbs_a):
            return True
        x = orbs_a[k][0]
        for block in orbs_b:
            if len(block) != len(orbs_a[k]) or used[block[0]]:
                continue
            for y in block:
                if sig_a[x] != sig_b[y]:
                    continue
                assigned = extend(r, used, x, y)
                if assigned is None:
                    continue
                if search(k + 1):
                    return True
                for i in assigned:
                    used[r[i]] = False
                    r[i] = -1
        return False

    if not search(0):
        return None
    relabel = Permutation(tuple(r))
    for pa, pb in zip(tuple_a, tuple_b):
        if compose(relabel, pa) != compose(pb, relabel):
            raise AssertionError("conjugator failed verification")
    return relabel
