"""Carousel loops on a projective line with finitely many candidate points.

All loops start at a base point above and to the right of every candidate,
run left along a common horizontal, drop vertically to a small circle around
their target (detouring around candidates in the way) and retrace. Traversed
leftmost first, their product is the boundary loop of a disc containing every
candidate.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Sequence


class PathGeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def point(self, s: float) -> complex:
        if s <= 0.0:
            return self.start
        if s >= 1.0:
            return self.end
        return self.start + (self.end - self.start) * s

    def reversed(self) -> "Segment":
        return Segment(self.end, self.start)


@dataclass(frozen=True)
class Arc:
    """Circular arc from angle ``theta0`` to ``theta1`` (either direction)."""

    centre: complex
    radius: float
    theta0: float
    theta1: float
    start: complex
    end: complex

    @classmethod
    def make(cls, centre: complex, radius: float, theta0: float, theta1: float, start=None, end=None) -> "Arc":
        s = centre + radius * cmath.exp(1j * theta0) if start is None else start
        e = centre + radius * cmath.exp(1j * theta1) if end is None else end
        return cls(centre, radius, theta0, theta1, s, e)

    @property
    def length(self) -> float:
        return self.radius * abs(self.theta1 - self.theta0)

    def point(self, s: float) -> complex:
        if s <= 0.0:
            return self.start
        if s >= 1.0:
            return self.end
        th = self.theta0 + (self.theta1 - self.theta0) * s
        return self.centre + self.radius * cmath.exp(1j * th)

    def reversed(self) -> "Arc":
        return Arc(self.centre, self.radius, self.theta1, self.theta0, self.end, self.start)


@dataclass(frozen=True)
class LoopPath:
    """Closed path from ``base`` once counterclockwise around ``target``."""

    base: complex
    label: str
    target: complex
    pieces: tuple
    obstacles: tuple  # every candidate of the line, for step control

    @property
    def length(self) -> float:
        return sum(p.length for p in self.pieces)

    def clearance(self, z: complex) -> float:
        return min(abs(z - c) for c in self.obstacles)

    def sample(self, n_per_piece: int = 64) -> list[complex]:
        out = []
        for p in self.pieces:
            out.extend(p.point(k / n_per_piece) for k in range(n_per_piece + 1))
        return out


def min_separation(points: Sequence[complex]) -> float:
    if len(points) < 2:
        return math.inf
    return min(abs(a - b) for a, b in itertools.combinations(points, 2))


def carousel_order(labelled: Sequence[tuple[str, complex]]) -> list[tuple[str, complex]]:
    """Order of traversal: by real part, ties broken from the top down."""
    return sorted(labelled, key=lambda lc: (lc[1].real, -lc[1].imag))


def base_point(obstacles: Sequence[complex]) -> tuple[complex, float, float]:
    """``(base, delta, height)`` for a candidate set.

    The common horizontal sits half the spread of the set above its highest
    point (at least ``delta``), so steps along it stay long.
    """
    delta = min_separation(obstacles)
    if not math.isfinite(delta):
        delta = 1.0
    spread = max(
        max(c.real for c in obstacles) - min(c.real for c in obstacles),
        max(c.imag for c in obstacles) - min(c.imag for c in obstacles),
    )
    lift = max(delta, spread / 2)
    top = max(c.imag for c in obstacles) + lift
    right = max(c.real for c in obstacles) + delta
    return complex(right, top), delta, top


def _outbound(base: complex, target: complex, obstacles: Sequence[complex], delta: float, top: float) -> list:
    x = target.real
    pieces = [Segment(base, complex(x, top))]
    cur = complex(x, top)
    r_out = delta / 2
    blockers = [
        c for c in obstacles
        if c != target and c.imag > target.imag and abs(c.real - x) < r_out
    ]
    for c in sorted(blockers, key=lambda c: -c.imag):
        dx = x - c.real
        h = math.sqrt(max(r_out * r_out - dx * dx, 0.0))
        entry = complex(x, c.imag + h)
        exit_ = complex(x, c.imag - h)
        pieces.append(Segment(cur, entry))
        th_in = math.atan2(h, dx)
        if dx >= 0:
            # pass on the right: clockwise through angle 0
            th_out = -th_in
        else:
            th_out = 2 * math.pi - th_in
        pieces.append(Arc.make(c, r_out, th_in, th_out, entry, exit_))
        cur = exit_
    top_of_circle = complex(x, target.imag + delta / 4)
    pieces.append(Segment(cur, top_of_circle))
    return [p for p in pieces if p.length > 0]


def carousel_loops(
    targets: Sequence[tuple[str, complex]],
    obstacles: Sequence[complex],
) -> tuple[complex, list[LoopPath]]:
    """Base point and one loop per target, in carousel order.

    ``obstacles`` is the full candidate set of the line; ``targets`` a subset
    of it. Every path keeps at least half the minimal obstacle separation from
    obstacles other than its own target.
    """
    obstacles = [complex(c) for c in obstacles]
    if not obstacles:
        return 0j, []
    base, delta, top = base_point(obstacles)
    loops = []
    for label, c in carousel_order([(lab, complex(c)) for lab, c in targets]):
        out = _outbound(base, c, obstacles, delta, top)
        radius = delta / 4
        start = complex(c.real, c.imag + radius)
        circle = Arc.make(c, radius, math.pi / 2, math.pi / 2 + 2 * math.pi, start, start)
        pieces = tuple(out) + (circle,) + tuple(p.reversed() for p in reversed(out))
        loops.append(LoopPath(base, label, c, pieces, tuple(obstacles)))
    return base, loops


def path_clearance(loop: LoopPath, n_per_piece: int = 64) -> float:
    """Sampled minimum distance from the path to obstacles other than the target."""
    others = [c for c in loop.obstacles if c != loop.target]
    if not others:
        return math.inf
    return min(min(abs(z - c) for c in others) for z in loop.sample(n_per_piece))
