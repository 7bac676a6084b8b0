"""``prill`` command line: certify a tower, print the Hesse check, draw the tower.

Exit status: 0 certified, 1 certificate FAILED, 2 degenerate input or bad
configuration, 3 tracking failure.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .covers import MarkedBase, double_cover, riemann_hurwitz_genus
from .numeric.precision import DEFAULT_BITS, MAX_BITS
from .numeric.tower import DegenerateInputError, Stage, TrackingFailure
from .pipeline import Certificate, TowerModel, TowerOptions, build_tower, certify, hesse_summary

SCHEMA = 1
MIN_PRECISION = 128
DEFAULT_BRANCH_POINTS = ("0", "1", "2", "3", "4", "6")

EXIT_OK, EXIT_FAILED, EXIT_DEGENERATE, EXIT_TRACKING = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _parse_point(text: str):
    text = text.strip()
    if not text:
        raise ConfigError("empty branch point")
    try:
        return Fraction(text)  # decimals too: "0.25" is exactly 1/4
    except ValueError:
        raise ConfigError(f"cannot parse branch point {text!r}") from None


@dataclass(frozen=True)
class RunConfig:
    branch_points: tuple[str, ...] = DEFAULT_BRANCH_POINTS
    w5_sign: int = 1
    precision_bits: int = DEFAULT_BITS
    max_precision_bits: int = MAX_BITS
    seed: int = 0
    out: Path | None = Path("cert.json")
    dot: Path | None = None
    consistency: bool = True

    def __post_init__(self):
        pts = tuple(p.strip() for p in self.branch_points)
        object.__setattr__(self, "branch_points", pts)
        if len(pts) != 6:
            raise ConfigError(f"expected 6 branch points, got {len(pts)}")
        values = [_parse_point(p) for p in pts]
        if len(set(values)) != 6:
            raise ConfigError("branch points must be distinct")
        if self.w5_sign not in (1, -1):
            raise ConfigError("w5 sign must be + or -")
        if self.precision_bits < MIN_PRECISION:
            raise ConfigError(f"precision must be at least {MIN_PRECISION} bits")
        if self.max_precision_bits < self.precision_bits:
            raise ConfigError("max precision below working precision")

    def options(self) -> TowerOptions:
        return TowerOptions(
            w5_sign=self.w5_sign,
            bits=self.precision_bits,
            max_bits=self.max_precision_bits,
            seed=self.seed,
            consistency=self.consistency,
        )


# -- serialization --------------------------------------------------------------

_INT_ARRAY = re.compile(r"\[\s*(-?\d+(?:,\s*-?\d+)*)\s*\]")


def dumps(obj) -> str:
    """Stable JSON: sorted keys, two-space indent, integer arrays on one line."""
    text = json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False)
    return _INT_ARRAY.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",")) + "]", text) + "\n"


def certificate_json(cert: Certificate) -> str:
    doc = {"schema": SCHEMA}
    doc.update(cert.as_dict())
    return dumps(doc)


# -- diagram --------------------------------------------------------------------

def emit_diagram(t: TowerModel) -> str:
    """DOT graph of the curves of the construction, labelled by genus and degree."""
    n = t.numeric
    genus = {
        "Y": riemann_hurwitz_genus(n[Stage.Y].cover),
        "C1": riemann_hurwitz_genus(n[Stage.C1].cover),
        "C2": riemann_hurwitz_genus(n[Stage.C2_over_P].cover),
        "X": riemann_hurwitz_genus(n[Stage.X_over_P].cover),
        "P": 0,
        "E": riemann_hurwitz_genus(n[Stage.E].cover),
        "Pprime": 0,
        "E0": riemann_hurwitz_genus(double_cover(MarkedBase(0, tuple(lab for lab, _ in t.D)), [lab for lab, _ in t.D])),
    }
    deg = {st: n[st].cover.degree for st in n}
    names = {"Y": "Y", "C1": "C1", "C2": "C2", "X": "X", "P": "P", "E": "E", "Pprime": "P'", "E0": "E0"}
    edges = [
        ("C1", "Y", deg[Stage.C1] // deg[Stage.Y], ""),
        ("C2", "C1", deg[Stage.C2_over_P] // deg[Stage.C1], ""),
        ("X", "C2", deg[Stage.X_over_P] // deg[Stage.C2_over_P], ""),
        ("Y", "P", deg[Stage.Y], ""),
        ("C1", "E", deg[Stage.C1] // deg[Stage.E], ""),
        ("E", "P", deg[Stage.E], "phi"),
        ("C2", "E", deg[Stage.C2_over_Pprime] // 2, ""),
        ("E", "E", deg[Stage.C2_over_P] // deg[Stage.C1], "[x3]"),
        ("E", "Pprime", 2, "alpha"),
        ("X", "E0", deg[Stage.C2_over_Pprime], ""),
        ("E0", "Pprime", 2, ""),
    ]
    lines = ["digraph tower {", "  rankdir=RL;", "  node [shape=box];"]
    for key in ("Y", "C1", "C2", "X", "P", "E", "Pprime", "E0"):
        lines.append(f'  {key} [label="{names[key]}\\ng = {genus[key]}"];')
    for a, b, d, name in edges:
        label = f"{name} ({d})" if name else str(d)
        lines.append(f'  {a} -> {b} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- commands -------------------------------------------------------------------

def run(config: RunConfig) -> int:
    """Build, certify and write outputs; returns the exit status."""
    try:
        tower = build_tower(list(config.branch_points), config.options())
        cert = certify(tower)
    except DegenerateInputError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except TrackingFailure as exc:
        print(f"tracking failure: {exc}", file=sys.stderr)
        return EXIT_TRACKING
    text = certificate_json(cert)
    if config.out is not None:
        Path(config.out).write_text(text)
    if config.dot is not None:
        Path(config.dot).write_text(emit_diagram(tower))
    print(f"{cert.status}: degree {cert.values['degree_X_over_Y']}, genus(X) {cert.values['genus']['X']}")
    for name in cert.failures:
        print(f"  failed: {name}")
    return EXIT_OK if cert.ok else EXIT_FAILED


def _hesse() -> int:
    h = hesse_summary()
    print(f"j = {h['j']}")
    print(f"cross-ratio = {h['cross_ratio']}")
    print("images: " + ", ".join(h["images_as_roots"]) + "  (" + ", ".join(h["images"]) + ")")
    return EXIT_OK


def _diagram(config: RunConfig) -> int:
    try:
        tower = build_tower(list(config.branch_points), config.options())
    except DegenerateInputError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except TrackingFailure as exc:
        print(f"tracking failure: {exc}", file=sys.stderr)
        return EXIT_TRACKING
    text = emit_diagram(tower)
    if config.dot is None:
        sys.stdout.write(text)
    else:
        Path(config.dot).write_text(text)
    return EXIT_OK


def _sign(text: str) -> int:
    if text in ("+", "+1", "1"):
        return 1
    if text in ("-", "-1"):
        return -1
    raise argparse.ArgumentTypeError("w5 sign must be + or -")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prill", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("certify", "build and certify the tower"), ("diagram", "emit the tower diagram")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--branch-points", default=",".join(DEFAULT_BRANCH_POINTS),
                       help="six comma-separated rationals or decimals")
        s.add_argument("--w5-sign", type=_sign, default=1, help="sheet over s5 carrying t5 (+ or -)")
        s.add_argument("--precision", type=int, default=DEFAULT_BITS, help="working precision in bits")
        s.add_argument("--max-precision", type=int, default=MAX_BITS, help="escalation cap in bits")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--dot", type=Path, default=None, help="write the DOT diagram here")
        if name == "certify":
            s.add_argument("--out", type=Path, default=Path("cert.json"), help="certificate JSON path")
            s.add_argument("--no-consistency", action="store_true",
                           help="skip the half-step and higher-precision reruns")
    sub.add_parser("hesse", help="exact j of the Hesse base-locus quotient")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "hesse":
        return _hesse()
    try:
        config = RunConfig(
            branch_points=tuple(args.branch_points.split(",")),
            w5_sign=args.w5_sign,
            precision_bits=args.precision,
            max_precision_bits=args.max_precision,
            seed=args.seed,
            out=getattr(args, "out", None),
            dot=args.dot,
            consistency=not getattr(args, "no_consistency", False),
        )
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    if args.command == "certify":
        return run(config)
    return _diagram(config)


if __name__ == "__main__":
    sys.exit(main())
