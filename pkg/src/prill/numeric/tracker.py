"""Continuation of tower fibers along carousel loops, and assembled monodromy."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from ..covers import Cover, MarkedBase, forget_marked_points, validate_cover
from ..perm import Permutation
from .paths import LoopPath, carousel_loops
from .precision import MAX_BITS, to_mpc, working_precision
from .tower import (
    LEVEL_SOLVERS,
    Node,
    Stage,
    StepRejected,
    TowerData,
    TowerPoint,
    TrackingFailure,
    _Ctx,
    branch_candidates,
    solve_fiber,
    solve_tree,
    value_distance,
)

MATCH_RATIO = 1.0 / 3.0
DEFAULT_KAPPA = 0.5
MAX_HALVINGS = 40
MAX_STEPS = 200_000


@dataclass
class LoopDiagnostics:
    label: str
    steps: int = 0
    rejected: int = 0
    max_match_ratio: float = 0.0
    min_separation: float = math.inf
    max_residual: float = 0.0
    bits: int = 0
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "steps": self.steps,
            "rejected": self.rejected,
            "max_match_ratio": self.max_match_ratio,
            "min_separation": self.min_separation,
            "max_residual": self.max_residual,
            "bits": self.bits,
            "seconds": self.seconds,
        }


def _nearest_gaps(vals) -> list[float]:
    """Distance from each value to its nearest sibling."""
    n = len(vals)
    gaps = [math.inf] * n
    for i in range(n):
        for j in range(i + 1, n):
            d = value_distance(vals[i], vals[j])
            if d < gaps[i]:
                gaps[i] = d
            if d < gaps[j]:
                gaps[j] = d
    return gaps


def _match(old_vals, new_vals, diag: LoopDiagnostics | None):
    """Nearest-neighbour bijection old → new under the ⅓-separation rule.

    Every value must move by less than a third of its distance to the
    nearest other value, in both the old and the new fiber. By the triangle
    inequality the nearest-neighbour assignment is then forced.
    """
    n = len(old_vals)
    if len(new_vals) != n:
        raise StepRejected("fiber size changed")
    if n == 1:
        return [0]
    gaps_old = _nearest_gaps(old_vals)
    gaps_new = _nearest_gaps(new_vals)
    perm = []
    worst = 0.0
    for i, o in enumerate(old_vals):
        ds = [value_distance(o, nv) for nv in new_vals]
        j = min(range(n), key=ds.__getitem__)
        perm.append(j)
        sep = min(gaps_old[i], gaps_new[j])
        if sep == 0.0:
            raise StepRejected("coincident fiber values")
        worst = max(worst, ds[j] / sep)
    if len(set(perm)) != n:
        raise StepRejected("matching is not a bijection")
    if worst >= MATCH_RATIO:
        raise StepRejected(f"matching ratio {worst:.3f}")
    if diag is not None:
        diag.max_match_ratio = max(diag.max_match_ratio, worst)
        diag.min_separation = min(diag.min_separation, min(gaps_old), min(gaps_new))
    return perm


def continue_tree(data: TowerData, stage: Stage, old: Node, base, diag: LoopDiagnostics | None = None) -> Node:
    """Solve the fiber at ``base`` and order it as the continuation of ``old``.

    Raises ``StepRejected`` if any level fails the matching rule.
    """
    levels = stage.levels
    ctx = _Ctx(data, base)
    stats = LoopDiagnostics("") if diag is not None else None

    def step(node: Node, depth: int, prefix) -> list:
        if depth == len(levels):
            return []
        hint = [c.value for c in node.children]
        new_vals = LEVEL_SOLVERS[levels[depth]](ctx, prefix, hint)
        perm = _match(hint, new_vals, stats)
        out = []
        for child, j in zip(node.children, perm):
            v = new_vals[j]
            out.append(Node(v, step(child, depth + 1, prefix + (v,))))
        return out

    root = Node(None, step(old, 0, ()))
    if diag is not None:
        diag.max_match_ratio = max(diag.max_match_ratio, stats.max_match_ratio)
        diag.min_separation = min(diag.min_separation, stats.min_separation)
        diag.max_residual = max(diag.max_residual, ctx.residual)
    return root


def _flat_leaves(node: Node) -> list[tuple]:
    return [tuple(x for v in leaf for x in v) for leaf in node.leaves()]


def leaf_permutation(start: Node, end: Node) -> Permutation:
    """``σ`` with ``σ(k) = j`` when leaf ``k`` of ``end`` sits on leaf ``j`` of ``start``."""
    a = _flat_leaves(start)
    b = _flat_leaves(end)
    try:
        perm = _match(b, a, None)
    except StepRejected as exc:
        raise TrackingFailure(f"loop did not close onto the base fiber: {exc}") from None
    return Permutation(tuple(perm))


def track_loop(
    stage: Stage,
    loop: LoopPath,
    data: TowerData,
    fiber: Node | None = None,
    kappa: float = DEFAULT_KAPPA,
) -> tuple[Permutation, LoopDiagnostics]:
    """Continue the base fiber once around ``loop`` at ``data.bits``.

    The maximal step from a point is ``kappa`` times its distance to the
    nearest candidate; a step is subdivided until every level matches.

    Raises
    ------
    TrackingFailure
        Step-size underflow, residual violation, or failure to close up.
    """
    t0 = time.perf_counter()
    diag = LoopDiagnostics(loop.label, bits=data.bits)
    if fiber is None:
        fiber, _ = solve_tree(data, stage, loop.base)
    tree = fiber
    with working_precision(data.bits):
        for piece in loop.pieces:
            if piece.length == 0:
                continue
            s = 0.0
            h = None
            halvings = 0
            while s < 1.0:
                z = piece.point(s)
                hmax = kappa * loop.clearance(z)
                h = hmax if h is None else min(h, hmax)
                ds = min(h / piece.length, 1.0 - s)
                s_new = 1.0 if ds >= 1.0 - s else s + ds
                before = diag.max_match_ratio
                probe = LoopDiagnostics(loop.label)
                try:
                    tree = continue_tree(data, stage, tree, to_mpc(piece.point(s_new)), probe)
                except StepRejected:
                    diag.rejected += 1
                    halvings += 1
                    if halvings > MAX_HALVINGS:
                        raise TrackingFailure(f"step size underflow near {z} on loop {loop.label}") from None
                    h = h / 2
                    continue
                diag.max_match_ratio = max(before, probe.max_match_ratio)
                diag.min_separation = min(diag.min_separation, probe.min_separation)
                diag.max_residual = max(diag.max_residual, probe.max_residual)
                taken = ds * piece.length
                s = s_new
                halvings = 0
                diag.steps += 1
                if diag.steps > MAX_STEPS:
                    raise TrackingFailure(f"too many steps on loop {loop.label}")
                # the matching ratio grows roughly linearly in the step: aim at 60% of the bound
                r = probe.max_match_ratio
                grow = 2.0 if r <= 0 else min(2.0, 0.6 * MATCH_RATIO / r)
                h = min(max(taken * grow, taken / 2), kappa * loop.clearance(piece.point(s)))
    perm = leaf_permutation(fiber, tree)
    diag.seconds = time.perf_counter() - t0
    return perm, diag


def _reindex(perm: Permutation, to_canonical: list[int]) -> Permutation:
    # perm acts on indices of a re-solved fiber; to_canonical[i] is the canonical index
    inv = [0] * len(to_canonical)
    for i, c in enumerate(to_canonical):
        inv[c] = i
    return Permutation(tuple(to_canonical[perm(inv[k])] for k in range(len(inv))))


def track_loop_escalating(
    stage: Stage,
    loop: LoopPath,
    data: TowerData,
    fiber: Node,
    kappa: float = DEFAULT_KAPPA,
    max_bits: int = MAX_BITS,
) -> tuple[Permutation, LoopDiagnostics]:
    """``track_loop``, doubling the precision after each failure up to ``max_bits``."""
    d, tree = data, fiber
    last = None
    while True:
        try:
            perm, diag = track_loop(stage, loop, d, tree, kappa)
            if d is not data:
                hi = _flat_leaves(tree)
                lo = _flat_leaves(fiber)
                to_canonical = _match(hi, lo, None)
                perm = _reindex(perm, to_canonical)
            return perm, diag
        except TrackingFailure as exc:
            last = exc
        if 2 * d.bits > max_bits:
            raise TrackingFailure(f"loop {loop.label} failed at {d.bits} bits: {last}")
        d = d.at_precision(2 * d.bits)
        tree, _ = solve_tree(d, stage, loop.base)


@dataclass
class MonodromyResult:
    stage: Stage
    cover: Cover  # spurious candidates dropped
    full_cover: Cover  # one generator per candidate, carousel order
    base: complex
    fiber: list[TowerPoint]
    diagnostics: list[LoopDiagnostics] = field(default_factory=list)
    bits: int = 0
    kappa: float = DEFAULT_KAPPA

    @property
    def dropped(self) -> list[str]:
        kept = set(self.cover.base.marked_points)
        return [lab for lab in self.full_cover.base.marked_points if lab not in kept]


def _worker(args):
    branch, sign, bits, seed, stage_name, loop, kappa, max_bits = args
    data = TowerData.build(branch, sign, bits, seed)
    stage = Stage(stage_name)
    data.candidates(stage.line)
    tree, _ = solve_tree(data, stage, loop.base)
    perm, diag = track_loop_escalating(stage, loop, data, tree, kappa, max_bits)
    return perm, diag


def thread_cap() -> int:
    env = os.environ.get("PRILL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def stage_loops(stage: Stage, data: TowerData) -> tuple[complex, list[LoopPath]]:
    """Carousel loops around the stage's candidates, geometry from the whole line."""
    line_cands = data.candidates(stage.line)
    targets = branch_candidates(stage, data)
    return carousel_loops(
        [(lab, complex(c)) for lab, c in targets],
        [complex(c) for _, c in line_cands],
    )


def monodromy(
    stage: Stage,
    data: TowerData,
    kappa: float = DEFAULT_KAPPA,
    max_bits: int = MAX_BITS,
    threads: int | None = None,
) -> MonodromyResult:
    """Monodromy of ``stage`` over its line as a validated genus-0 Cover.

    Raises
    ------
    TrackingFailure
        A loop failed at maximal precision, or the product relation fails.
    """
    base, loops = stage_loops(stage, data)
    labels = [lp.label for lp in loops]
    if stage.degree == 1 or not loops:
        mb = MarkedBase(0, tuple(labels))
        c = Cover(mb, stage.degree, (Permutation.identity(stage.degree),) * len(labels))
        return MonodromyResult(stage, c, c, base, solve_fiber(stage, data, base) if stage.degree > 1 else [], [], data.bits, kappa)
    tree, _ = solve_tree(data, stage, base)
    threads = thread_cap() if threads is None else max(1, threads)
    if threads > 1 and len(loops) > 1:
        jobs = [
            (data.branch_inputs, data.w5_sign, data.bits, data.seed, stage.value, lp, kappa, max_bits)
            for lp in loops
        ]
        with ProcessPoolExecutor(max_workers=min(threads, len(loops))) as pool:
            results = list(pool.map(_worker, jobs))
    else:
        results = [track_loop_escalating(stage, lp, data, tree, kappa, max_bits) for lp in loops]
    perms = tuple(p for p, _ in results)
    diags = [d for _, d in results]
    full = Cover(MarkedBase(0, tuple(labels)), stage.degree, perms)
    report = validate_cover(full)
    if not report:
        raise TrackingFailure(f"{stage.value}: assembled monodromy invalid ({report.violation})")
    spurious = [lab for lab, p in zip(labels, perms) if p.is_identity()]
    cover = forget_marked_points(full, spurious)
    return MonodromyResult(stage, cover, full, base, solve_fiber(stage, data, base), diags, data.bits, kappa)


def consistency_rerun(result: MonodromyResult, data: TowerData, kappa_factor: float = 0.5,
                      bits_factor: float = 1.0, max_bits: int = MAX_BITS, threads: int | None = None) -> bool:
    """Re-track with a scaled step bound and/or precision; True if permutations agree."""
    bits = int(round(data.bits * bits_factor))
    d = data if bits == data.bits else data.at_precision(bits)
    other = monodromy(result.stage, d, result.kappa * kappa_factor, max(max_bits, bits), threads)
    if other.full_cover.base != result.full_cover.base:
        return False
    if d is data:
        return other.full_cover.monodromy == result.full_cover.monodromy
    # re-solved fibers are in canonical order; confirm that the orders agree
    lo = [tuple(p.coords[k] for k in sorted(p.coords) if k not in ("t", "s")) for p in result.fiber]
    hi = [tuple(p.coords[k] for k in sorted(p.coords) if k not in ("t", "s")) for p in other.fiber]
    mapping = _match(hi, lo, None)
    if mapping != list(range(len(mapping))):
        relabel = Permutation(tuple(mapping))
        perms = tuple(relabel * p * relabel.inverse() for p in other.full_cover.monodromy)
        return perms == result.full_cover.monodromy
    return other.full_cover.monodromy == result.full_cover.monodromy


__all__ = [
    "LoopDiagnostics", "MonodromyResult", "consistency_rerun", "continue_tree", "leaf_permutation",
    "monodromy", "stage_loops", "thread_cap", "track_loop", "track_loop_escalating",
]
