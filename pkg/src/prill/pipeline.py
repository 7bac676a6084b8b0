"""The full tower for one genus-2 curve, its certificate, and the two-engine check.

Symbolic engine: permutation covers over the t-line built from E and Y by
fiber products and the ×3 torsor. Numeric engine: monodromy tracked along
carousel loops. Every certificate verdict is decided on permutations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import gmpy2

from .covers import (
    Cover,
    CoverMap,
    MarkedBase,
    align_base,
    closed_surface_homology,
    double_cover,
    euler_characteristic,
    fiber_product,
    is_etale,
    mul3_torsor_cover,
    riemann_hurwitz_genus,
    to_trivial,
    validate_cover_map,
)
from .elliptic.curves import QuarticModel, WeierstrassCurve
from .elliptic.cyclotomic import ONE, ZETA3
from .elliptic.invariants import INFINITY, HesseResult, hesse_isotriviality_check, j_from_four_points
from .numeric.paths import carousel_order
from .numeric.precision import DEFAULT_BITS, MAX_BITS, working_precision
from .numeric.tower import DegenerateInputError, Line, Stage, TowerData, TrackingFailure
from .numeric.tracker import DEFAULT_KAPPA, MonodromyResult, consistency_rerun, monodromy
from .perm import ConjugacySearchTimeout, Permutation, are_simultaneously_conjugate, compose, cycle_type, orbit_lengths

NUMERIC_STAGES = (Stage.Y, Stage.E, Stage.C1, Stage.C2_over_P, Stage.C2_over_Pprime, Stage.X_over_P)
J_TOLERANCE = 1e-8
HOMOLOGY_MODULUS = 3


class CrossValidationError(AssertionError):
    """Symbolic and numeric monodromy are not simultaneously conjugate."""

    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class TowerOptions:
    w5_sign: int = 1
    bits: int = DEFAULT_BITS
    max_bits: int = MAX_BITS
    seed: int = 0
    kappa: float = DEFAULT_KAPPA
    threads: int | None = None
    consistency: bool = True


@dataclass
class TowerModel:
    branch_points: tuple
    options: TowerOptions
    data: TowerData
    symbolic: dict  # name -> Cover over the t-line, base s-labels in carousel order
    symbolic_maps: dict  # (source, target) -> CoverMap
    numeric: dict = field(default_factory=dict)  # Stage -> MonodromyResult

    @property
    def w5_sign(self) -> int:
        return self.options.w5_sign

    @property
    def quartic(self) -> QuarticModel:
        return self.data.quartic

    @property
    def curve(self) -> WeierstrassCurve:
        return self.data.curve

    @property
    def t5(self) -> tuple:
        return (self.data.quartic.t0, self.data.quartic.w0)

    @property
    def D(self) -> list[tuple[str, Any]]:
        """3-torsion u-values, the branch locus of E₀ on the second line."""
        return [(lab, u) for lab, u in self.data.u_candidates() if lab.startswith("D")]


# -- construction -------------------------------------------------------------

def _symbolic_tower(data: TowerData) -> tuple[dict, dict]:
    s_labels = [(f"s{k + 1}", complex(x)) for k, x in enumerate(data.s)]
    base = MarkedBase(0, tuple(lab for lab, _ in carousel_order(s_labels)))
    E = double_cover(base, ["s1", "s2", "s3", "s4"])
    Y = double_cover(base, ["s1", "s2", "s3", "s4", "s5", "s6"])
    comps = fiber_product(to_trivial(E), to_trivial(Y))
    if len(comps) != 1:
        raise AssertionError(f"C1 splits into {len(comps)} components")
    C1, c1_to_e, c1_to_y = comps[0]
    E18, mul3 = mul3_torsor_cover(E)
    comps = fiber_product(mul3, c1_to_e)
    if len(comps) != 1:
        raise AssertionError(f"C2 splits into {len(comps)} components")
    C2, c2_to_e18, c2_to_c1 = comps[0]
    covers = {"E": E, "Y": Y, "C1": C1, "E18": E18, "C2": C2}
    maps = {
        ("C1", "E"): c1_to_e,
        ("C1", "Y"): c1_to_y,
        ("E18", "E"): mul3,
        ("C2", "E18"): c2_to_e18,
        ("C2", "C1"): c2_to_c1,
    }
    return covers, maps


def build_tower(branch_points: Sequence, options: TowerOptions | None = None) -> TowerModel:
    """Construct every stage for six branch points ``s1..s6``.

    Raises
    ------
    DegenerateInputError
        Coincident points, ``s5`` among ``s1..s4``, or colliding candidates.
    TrackingFailure
        A loop could not be tracked at the maximal precision.
    """
    opts = options or TowerOptions()
    if len(branch_points) != 6:
        raise DegenerateInputError("need exactly six branch points")
    data = TowerData.build(list(branch_points), opts.w5_sign, opts.bits, opts.seed)
    data.candidates(Line.P)
    data.candidates(Line.P_PRIME)
    covers, maps = _symbolic_tower(data)
    t = TowerModel(tuple(branch_points), opts, data, covers, maps)
    for stage in NUMERIC_STAGES:
        t.numeric[stage] = monodromy(stage, data, opts.kappa, opts.max_bits, opts.threads)
    return t


# -- numeric cover maps -------------------------------------------------------

def _fiber_map(src: MonodromyResult, tgt: MonodromyResult, keys: Sequence[str]) -> tuple[int, ...]:
    """Send each source fiber point to the target point with the same coordinates."""
    out = []
    with working_precision(max(p.bits for p in src.fiber[:1] + tgt.fiber[:1])):
        for p in src.fiber:
            ds = []
            for q in tgt.fiber:
                ds.append(max(float(abs(p[k] - q[k])) / max(1.0, float(abs(q[k]))) for k in keys))
            j = min(range(len(ds)), key=ds.__getitem__)
            second = min((d for i, d in enumerate(ds) if i != j), default=math.inf)
            if ds[j] > 1e-20 or second < 1e6 * ds[j]:
                raise TrackingFailure(f"{src.stage.value} -> {tgt.stage.value}: fiber points do not match")
            out.append(j)
    return tuple(out)


def numeric_maps(t: TowerModel) -> dict:
    """Cover maps between numeric stages over the t-line, on one common base."""
    n = t.numeric
    base = n[Stage.X_over_P].full_cover.base
    cov = {st: align_base(n[st].full_cover, base) for st in (Stage.Y, Stage.E, Stage.C1, Stage.C2_over_P, Stage.X_over_P)}
    plan = {
        ("X", "C2"): (Stage.X_over_P, Stage.C2_over_P, ("w", "u", "v", "y")),
        ("C2", "C1"): (Stage.C2_over_P, Stage.C1, ("w", "y")),
        ("C1", "Y"): (Stage.C1, Stage.Y, ("y",)),
        ("C1", "E"): (Stage.C1, Stage.E, ("w",)),
        ("X", "Y"): (Stage.X_over_P, Stage.Y, ("y",)),
    }
    out = {}
    for key, (a, b, keys) in plan.items():
        m = CoverMap(cov[a], cov[b], _fiber_map(n[a], n[b], keys))
        report = validate_cover_map(m)
        if not report:
            raise TrackingFailure(f"{key[0]} -> {key[1]}: {report.violation} {report.details}")
        out[key] = m
    return out


# -- cross-validation ---------------------------------------------------------

def _images(p: Permutation) -> list[int]:
    return list(p.images)


def cross_validate(t: TowerModel, numeric_override: dict | None = None) -> dict:
    """Symbolic vs numeric C₁ and C₂-over-ℙ up to simultaneous conjugacy.

    ``numeric_override`` maps ``"C1"``/``"C2"`` to replacement Covers (used to
    inject faults). Returns a report with the relabeling witnesses.

    Raises
    ------
    CrossValidationError
        No conjugator exists; the report holds both tuples.
    """
    numeric = {"C1": t.numeric[Stage.C1].cover, "C2": t.numeric[Stage.C2_over_P].cover}
    numeric.update(numeric_override or {})
    report = {}
    for name in ("C1", "C2"):
        sym, num = t.symbolic[name], numeric[name]
        entry: dict = {"base": list(sym.base.marked_points), "degree": sym.degree}
        if sym.base != num.base:
            entry.update(conjugate=False, reason="bases differ", numeric_base=list(num.base.marked_points))
        else:
            try:
                r = are_simultaneously_conjugate(sym.monodromy, num.monodromy)
            except ConjugacySearchTimeout:
                r = None
            ok = r is not None and all(
                compose(r, a) == compose(b, r) for a, b in zip(sym.monodromy, num.monodromy)
            )
            entry.update(conjugate=ok, witness=_images(r) if ok else None)
        entry["cycle_types"] = {
            lab: [str(cycle_type(p)) for p in (sym.monodromy[k], num.monodromy[k])]
            for k, lab in enumerate(sym.base.marked_points)
        } if sym.base == num.base else None
        report[name] = entry
        if not entry["conjugate"]:
            entry["symbolic"] = [_images(p) for p in sym.monodromy]
            entry["numeric"] = [_images(p) for p in num.monodromy]
            raise CrossValidationError(f"{name}: symbolic and numeric monodromy disagree", report)
    return report


# -- certificate --------------------------------------------------------------

@dataclass
class Verdict:
    passed: bool
    witness: Any

    def as_dict(self) -> dict:
        return {"pass": bool(self.passed), "witness": self.witness}


@dataclass
class Certificate:
    input: dict
    stages: dict
    maps: dict
    verdicts: dict  # name -> Verdict
    values: dict
    cross_validation: dict
    consistency: dict
    homology: dict
    diagnostics: dict

    @property
    def ok(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    @property
    def status(self) -> str:
        return "CERTIFIED" if self.ok else "FAILED"

    @property
    def failures(self) -> list[str]:
        return sorted(k for k, v in self.verdicts.items() if not v.passed)

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "failures": self.failures,
            "input": self.input,
            "stages": self.stages,
            "maps": self.maps,
            "verdicts": {k: v.as_dict() for k, v in self.verdicts.items()},
            "values": self.values,
            "cross_validation": self.cross_validation,
            "consistency": self.consistency,
            "homology": self.homology,
            "diagnostics": self.diagnostics,
            "not_machine_checked": "h0(X, O(f^-1(y))) >= 2; follows from the isotrivial factor E0",
        }


def _cover_entry(c: Cover, engine: str, dropped: Sequence[str] = ()) -> dict:
    connected = c.is_connected()
    return {
        "engine": engine,
        "degree": c.degree,
        "base": list(c.base.marked_points),
        "components": len(c.components()),
        "genus": riemann_hurwitz_genus(c) if connected else None,
        "ramification": [str(ct) for ct in c.ramification_profile()],
        "monodromy": [_images(p) for p in c.monodromy],
        "dropped": list(dropped),
    }


def _decimal(z) -> str:
    # every digit carried at the value's own precision
    return str(z if isinstance(z, gmpy2.mpc) else gmpy2.mpc(z))


def _cyclo(c) -> str:
    if not hasattr(c, "x"):
        return "inf"
    if c.y == 0:
        return str(c.x)
    coef = {1: "", -1: "-"}.get(c.y, f"{c.y}*")
    head = "" if c.x == 0 else f"{c.x}" + ("+" if c.y > 0 else "")
    return f"{head}{coef}zeta3"


def hesse_summary(h: HesseResult | None = None) -> dict:
    h = h or hesse_isotriviality_check()
    z = ZETA3
    named = {-ONE: "-1", -z: "-zeta3", -(z * z): "-zeta3^2"}
    return {
        "images_as_roots": [named.get(p, _cyclo(p)) if p != INFINITY else "inf" for p in h.images],
        "j": _cyclo(h.j),
        "cross_ratio": _cyclo(h.cross_ratio),
        "images": [_cyclo(p) for p in h.images],
        "fiber_sizes": list(h.fiber_sizes),
    }


def numeric_j_E0(t: TowerModel):
    """j of the double cover of the u-line branched at the four 3-torsion u-values."""
    with working_precision(t.data.bits):
        return j_from_four_points([u for _, u in t.D])


def certify(t: TowerModel) -> Certificate:
    """Decide every verdict from stored permutations; never raises on a false verdict.

    Raises
    ------
    TrackingFailure
        Numeric fibers of different stages cannot be matched.
    """
    n = t.numeric
    X = n[Stage.X_over_P]
    maps = numeric_maps(t)
    mX_C2, mC2_C1, mC1_Y, mX_Y = maps[("X", "C2")], maps[("C2", "C1")], maps[("C1", "Y")], maps[("X", "Y")]
    Ycov = mX_Y.target
    verdicts: dict[str, Verdict] = {}

    chain = mC1_Y.compose(mC2_C1).compose(mX_C2)
    verdicts["stage_degrees_2_9_2"] = Verdict(
        (mX_C2.degree, mC2_C1.degree, mC1_Y.degree) == (2, 9, 2) and chain.fiber_map == mX_Y.fiber_map,
        {"degrees": [mX_C2.degree, mC2_C1.degree, mC1_Y.degree], "composite_equals_direct": chain.fiber_map == mX_Y.fiber_map},
    )
    fiber_sizes = [mX_Y.fiber_map.count(j) for j in range(Ycov.degree)]
    verdicts["degree_36"] = Verdict(mX_Y.degree == 36 and fiber_sizes == [36] * Ycov.degree,
                                    {"degree": mX_Y.degree, "fiber_sizes": fiber_sizes})
    comps = X.cover.components()
    verdicts["connected_X"] = Verdict(len(comps) == 1, {"orbit_sizes": [len(c) for c in comps]})

    etale_witness = {}
    for k, lab in enumerate(mX_Y.source.base.marked_points):
        etale_witness[lab] = {
            "X": sorted(set(orbit_lengths(mX_Y.source.local_monodromy(k)))),
            "Y": sorted(set(orbit_lengths(mX_Y.target.local_monodromy(k)))),
        }
    etale = is_etale(mX_Y)
    verdicts["etale_over_Y"] = Verdict(etale, etale_witness)

    g_rh = riemann_hurwitz_genus(X.cover) if len(comps) == 1 else None
    g_Y = riemann_hurwitz_genus(n[Stage.Y].cover)
    chi_X = mX_Y.degree * (2 - 2 * g_Y) if etale else None
    g_chi = (2 - chi_X) // 2 if chi_X is not None else None
    verdicts["genus_X_37"] = Verdict(
        g_rh == 37 and g_chi == 37 and euler_characteristic(X.cover) == chi_X,
        {"riemann_hurwitz": g_rh, "chi_multiplicativity": g_chi, "chi_X": chi_X, "genus_Y": g_Y,
         "ramification": [str(ct) for ct in X.cover.ramification_profile()]},
    )
    verdicts["degree_below_genus"] = Verdict(g_rh is not None and mX_Y.degree < g_rh,
                                             {"degree": mX_Y.degree, "genus": g_rh})

    pp = n[Stage.C2_over_Pprime].full_cover
    d_types = {lab: str(cycle_type(pp.local_monodromy(k)))
               for k, lab in enumerate(pp.base.marked_points) if lab.startswith("D")}
    verdicts["even_branching_over_D"] = Verdict(
        len(d_types) == 4 and all(v == "{2,2}" for v in d_types.values()), d_types)

    j_num = numeric_j_E0(t)
    hesse = hesse_isotriviality_check()
    verdicts["j_E0"] = Verdict(
        float(abs(j_num)) < J_TOLERANCE and hesse.j == 0,
        {"numeric": _decimal(j_num), "hesse": hesse_summary(hesse)},
    )

    g_c1 = (riemann_hurwitz_genus(t.symbolic["C1"]), riemann_hurwitz_genus(n[Stage.C1].cover))
    g_c2 = (riemann_hurwitz_genus(t.symbolic["C2"]), riemann_hurwitz_genus(n[Stage.C2_over_P].cover),
            riemann_hurwitz_genus(n[Stage.C2_over_Pprime].cover))
    verdicts["genus_C1_3"] = Verdict(g_c1 == (3, 3), {"symbolic": g_c1[0], "numeric": g_c1[1]})
    verdicts["genus_C2_19"] = Verdict(g_c2 == (19, 19, 19),
                                      {"symbolic": g_c2[0], "numeric_P": g_c2[1], "numeric_Pprime": g_c2[2]})

    try:
        cv = cross_validate(t)
        cv_ok = True
    except CrossValidationError as exc:
        cv, cv_ok = exc.report, False
    verdicts["cross_validation"] = Verdict(cv_ok, {k: v.get("witness") for k, v in cv.items()})

    relations = {st.value: n[st].full_cover.relation_product().is_identity() for st in NUMERIC_STAGES}
    verdicts["relation_products"] = Verdict(all(relations.values()), relations)

    consistency = {}
    if t.options.consistency:
        for st in NUMERIC_STAGES:
            half = consistency_rerun(n[st], t.data, kappa_factor=0.5, max_bits=t.options.max_bits,
                                     threads=t.options.threads)
            more = consistency_rerun(n[st], t.data, kappa_factor=1.0, bits_factor=1.5,
                                     max_bits=t.options.max_bits, threads=t.options.threads)
            consistency[st.value] = {"half_step": half, "precision_x1.5": more}
        verdicts["consistency_reruns"] = Verdict(
            all(all(v.values()) for v in consistency.values()), consistency)

    homology = {}
    for name, cov in (("E", t.symbolic["E"]), ("Y", t.symbolic["Y"]), ("C1", t.symbolic["C1"]),
                      ("C2", n[Stage.C2_over_P].cover), ("X", X.cover)):
        if cov.is_connected():
            rank = closed_surface_homology(cov, HOMOLOGY_MODULUS).rank
            homology[name] = {"rank": rank, "genus": riemann_hurwitz_genus(cov)}
    verdicts["homology_ranks"] = Verdict(
        all(h["rank"] == 2 * h["genus"] for h in homology.values()) and len(homology) == 5, homology)

    stages = {
        "symbolic": {name: _cover_entry(c, "symbolic") for name, c in t.symbolic.items()},
        "numeric": {st.value: _cover_entry(n[st].cover, "numeric", n[st].dropped) for st in NUMERIC_STAGES},
    }
    map_entries = {f"{a}->{b}": {"degree": m.degree, "fiber_map": list(m.fiber_map)} for (a, b), m in maps.items()}
    values = {
        "degree_X_over_Y": mX_Y.degree,
        "genus": {"Y": g_Y, "C1": g_c1[1], "C2": g_c2[1], "X": g_rh,
                  "E": riemann_hurwitz_genus(n[Stage.E].cover), "E0": 1 if len(d_types) == 4 else None},
        "j_E0_numeric": _decimal(j_num),
        "j_E0_exact": _cyclo(hesse.j),
        "D": {lab: _decimal(u) for lab, u in t.D},
        "t5": [_decimal(x) for x in t.t5],
    }
    inp = {
        "branch_points": [str(x) for x in t.branch_points],
        "w5_sign": "+" if t.options.w5_sign > 0 else "-",
        "precision_bits": t.options.bits,
        "max_precision_bits": t.options.max_bits,
        "seed": t.options.seed,
        "kappa": repr(t.options.kappa),
    }
    diagnostics = {
        st.value: [
            {k: (repr(v) if isinstance(v, float) else v) for k, v in d.as_dict().items() if k != "seconds"}
            for d in n[st].diagnostics
        ]
        for st in NUMERIC_STAGES
    }
    return Certificate(inp, stages, map_entries, verdicts, values, cv, consistency, homology, diagnostics)


__all__ = [
    "Certificate", "CrossValidationError", "DegenerateInputError", "NUMERIC_STAGES", "TowerModel",
    "TowerOptions", "TrackingFailure", "Verdict", "build_tower", "certify", "cross_validate",
    "hesse_summary", "numeric_j_E0", "numeric_maps",
]
