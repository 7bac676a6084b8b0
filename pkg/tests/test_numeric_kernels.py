import os
import random
import subprocess
import sys

import gmpy2
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prill.numeric import _kernels_py as pure
from prill.numeric import kernels
from prill.numeric.precision import residual_tolerance, to_mpc, working_precision
from prill.numeric.roots import RootFindingError, poly_roots, polish_roots

try:
    from prill.numeric import _kernels as compiled
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def _rand_poly(rng, d):
    return [gmpy2.mpc(rng.uniform(-3, 3), rng.uniform(-3, 3)) for _ in range(d)] + [gmpy2.mpc(1)]


def test_backend_selected_at_import():
    assert kernels.BACKEND in ("compiled", "python")
    if compiled is not None:
        assert kernels.BACKEND == "compiled"


def test_env_forces_pure_python():
    env = dict(os.environ, PRILL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from prill.numeric.kernels import BACKEND; print(BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_horner_exact_on_fractions():
    from fractions import Fraction as F
    assert pure.horner([F(1), F(-3), F(2)], F(5, 2)) == F(1) - F(15, 2) + F(25, 2)
    assert pure.horner_d([1, -3, 2], 3) == (10, 9)


@needs_compiled
@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2 ** 32), st.sampled_from([128, 212, 424]))
def test_compiled_matches_pure(d, seed, bits):
    rng = random.Random(seed)
    with working_precision(bits):
        c = _rand_poly(rng, d)
        x = gmpy2.mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))
        scale = float(pure.horner([abs(a) for a in c], abs(x)))
        tol = 2.0 ** (16 - bits) * max(1.0, scale)
        assert abs(compiled.horner(c, x) - pure.horner(c, x)) <= tol
        pc, dc = compiled.horner_d(c, x)
        pp, dp = pure.horner_d(c, x)
        assert abs(pc - pp) <= tol and abs(dc - dp) <= tol * d


@needs_compiled
def test_compiled_aberth_matches_pure():
    rng = random.Random(3)
    with working_precision(212):
        for d in (3, 9, 36):
            c = _rand_poly(rng, d)
            start = [gmpy2.mpc(complex(r)) for r in poly_roots(c)]
            start = [s + gmpy2.mpc(1e-6, -1e-6) for s in start]
            zp, _, okp = pure.aberth(c, start, 2.0 ** -204, 200)
            zc, _, okc = compiled.aberth(c, start, 2.0 ** -204, 200)
            assert okp and okc
            assert max(abs(a - b) for a, b in zip(zp, zc)) < 1e-50


@needs_compiled
def test_compiled_accepts_non_mpc_inputs():
    with working_precision(128):
        assert compiled.horner([1, 2, 3], 2) == gmpy2.mpc(17)


def test_poly_roots_reconstruct_polynomial():
    rng = random.Random(1)
    with working_precision(212):
        for d in (1, 4, 9, 20):
            c = _rand_poly(rng, d)
            roots = poly_roots(c)
            assert len(roots) == d
            for r in roots:
                assert abs(kernels.horner(c, r)) < 1e-50


def test_poly_roots_handles_leading_zeros_and_scale():
    with working_precision(212):
        roots = poly_roots([gmpy2.mpc(-6), gmpy2.mpc(11), gmpy2.mpc(-6), gmpy2.mpc(1), gmpy2.mpc(0)])
        assert sorted(round(float(r.real), 12) for r in roots) == [1.0, 2.0, 3.0]
        assert poly_roots([gmpy2.mpc(5)]) == []


def test_double_root_noise_floor_still_converges():
    # (u - 1)² (u + 2): Aberth is linear at the double root, and must stop at the noise floor
    with working_precision(212):
        roots = poly_roots([gmpy2.mpc(2), gmpy2.mpc(-3), gmpy2.mpc(0), gmpy2.mpc(1)])
        assert sorted(round(float(r.real), 20) for r in roots) == [-2.0, 1.0, 1.0]


def test_polish_roots_reports_failure():
    with working_precision(212):
        with pytest.raises(RootFindingError):
            polish_roots([gmpy2.mpc(1), gmpy2.mpc(0), gmpy2.mpc(1)], [gmpy2.mpc(5), gmpy2.mpc(5)], maxiter=1)


def test_precision_helpers():
    with working_precision(300):
        x = to_mpc("-3/7")
        assert x.precision == (300, 300)
        assert abs(x * 7 + 3) < 1e-85
    assert residual_tolerance(212) == 10.0 ** -53
