import gmpy2
import pytest

from prill.covers import riemann_hurwitz_genus, validate_cover
from prill.numeric.precision import working_precision
from prill.numeric.tower import (
    DegenerateInputError,
    Line,
    Stage,
    TowerData,
    branch_candidates,
    point_residuals,
    solve_fiber,
)
from prill.numeric.tracker import (
    TrackingFailure,
    consistency_rerun,
    leaf_permutation,
    monodromy,
    stage_loops,
    track_loop,
)
from prill.numeric.tower import solve_tree
from prill.perm import cycle_type

REF = ["0", "1", "2", "3", "4", "6"]


@pytest.fixture(scope="module")
def data():
    return TowerData.build(REF)


def test_degenerate_inputs():
    with pytest.raises(DegenerateInputError):
        TowerData.build(["0", "1", "2", "3", "4"])
    with pytest.raises(DegenerateInputError):
        TowerData.build(["0", "1", "2", "3", "3", "6"])
    with pytest.raises(DegenerateInputError):
        TowerData.build(["0", "1/2", "2", "3", "2/4", "6"])
    with pytest.raises(ValueError):
        TowerData.build(REF, w5_sign=0)


def test_candidates(data):
    p = data.candidates(Line.P)
    assert [lab for lab, _ in p[:6]] == ["s1", "s2", "s3", "s4", "s5", "s6"]
    assert {lab for lab, _ in p[6:]} == {"e2_1", "e2_2", "e2_3"}
    pp = data.candidates(Line.P_PRIME)
    labels = [lab for lab, _ in pp]
    assert len(pp) == 35 and labels[:4] == ["D1", "D2", "D3", "D4"] and "inf" in labels
    assert len(branch_candidates(Stage.E, data)) == 4
    assert len(branch_candidates(Stage.Y, data)) == 6
    assert len(branch_candidates(Stage.X_over_P, data)) == 9


@pytest.mark.parametrize("stage", [Stage.Y, Stage.E, Stage.C1, Stage.C2_over_P, Stage.X_over_P, Stage.C2_over_Pprime])
def test_fibers_have_full_size_and_small_residuals(data, stage):
    base = complex(0.37, 2.9) if stage.line is Line.P else complex(0.013, -0.021)
    pts = solve_fiber(stage, data, base)
    assert len(pts) == stage.degree
    for p in pts:
        for r in point_residuals(p, data).values():
            assert r < 1e-50


def test_fiber_points_are_distinct(data):
    pts = solve_fiber(Stage.X_over_P, data, complex(1.5, 1.0))
    keys = {tuple(complex(p[k]) for k in ("w", "u", "v", "y", "z")) for p in pts}
    assert len(keys) == 72


@pytest.mark.parametrize("stage,genus", [(Stage.Y, 2), (Stage.E, 1), (Stage.C1, 3)])
def test_small_stage_monodromy(data, stage, genus):
    r = monodromy(stage, data, threads=1)
    assert validate_cover(r.full_cover)
    assert r.cover.is_connected() and riemann_hurwitz_genus(r.cover) == genus
    assert r.dropped == []


def test_second_line_stage(data):
    r = monodromy(Stage.C2_over_Pprime, data, threads=1)
    assert riemann_hurwitz_genus(r.cover) == 19
    profile = {lab: str(cycle_type(p)) for lab, p in zip(r.cover.base.marked_points, r.cover.monodromy)}
    assert all(profile[f"D{k}"] == "{2,2}" for k in range(1, 5))
    assert profile["inf"] == "{4}"
    assert consistency_rerun(r, data, kappa_factor=0.5, threads=1)
    assert consistency_rerun(r, data, kappa_factor=1.0, bits_factor=2.0, threads=1)


def test_e2_candidates_are_spurious(data):
    r = monodromy(Stage.C2_over_P, data, threads=1)
    assert sorted(r.dropped) == ["e2_1", "e2_2", "e2_3"]
    assert riemann_hurwitz_genus(r.cover) == 19


def test_loop_permutation_invariant_under_smaller_steps(data):
    base, loops = stage_loops(Stage.C1, data)
    tree, _ = solve_tree(data, Stage.C1, base)
    for lp in loops:
        p1, d1 = track_loop(Stage.C1, lp, data, tree, kappa=0.5)
        p2, d2 = track_loop(Stage.C1, lp, data, tree, kappa=0.125)
        assert p1 == p2 and d2.steps > d1.steps
        assert d1.max_match_ratio < 1 / 3


def test_leaf_permutation_rejects_mismatched_fibers(data):
    a, _ = solve_tree(data, Stage.Y, complex(0.5, 1))
    b, _ = solve_tree(data, Stage.Y, complex(50, 1))
    with pytest.raises(TrackingFailure):
        leaf_permutation(a, b)


def test_w5_sign_changes_marked_point():
    plus = TowerData.build(REF, 1)
    minus = TowerData.build(REF, -1)
    with working_precision(212):
        assert plus.quartic.w0 == -minus.quartic.w0
        assert abs(plus.quartic.w0 ** 2 - 24) < gmpy2.mpfr("1e-60")
