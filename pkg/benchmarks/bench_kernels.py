"""Compiled vs pure-Python kernels: Horner evaluation and Aberth refinement.

    python benchmarks/bench_kernels.py [--repeat N] [--bits 212 424] [--stage C2_over_P]

Prints one row per (kernel, degree, precision) with the time per call of
each backend and the speedup. Both backends are checked to agree first.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time

import gmpy2

from prill.numeric import _kernels_py as pure
from prill.numeric.roots import _seed

try:
    from prill.numeric import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def _poly(rng: random.Random, degree: int) -> list:
    c = [gmpy2.mpc(rng.uniform(-4, 4), rng.uniform(-4, 4)) for _ in range(degree)]
    return c + [gmpy2.mpc(1)]


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def run(bits_list, degrees, repeat: int) -> list[tuple]:
    rng = random.Random(7)
    rows = []
    for bits in bits_list:
        with gmpy2.context(precision=bits, real_prec=bits, imag_prec=bits):
            tol = 2.0 ** (8 - bits)
            for d in degrees:
                c = _poly(rng, d)
                x = gmpy2.mpc(rng.random(), rng.random())
                seeds = _seed(c)
                zp, _, okp = pure.aberth(c, seeds, tol, 200)
                zc, _, okc = compiled.aberth(c, seeds, tol, 200)
                err = max(abs(a - b) for a, b in zip(zp, zc))
                if not (okp and okc) or err > 2.0 ** (32 - bits):
                    raise SystemExit(f"backends disagree at degree {d}, {bits} bits: {err}")
                for name, args, n in (
                    ("horner", (c, x), repeat * 20),
                    ("horner_d", (c, x), repeat * 20),
                    ("aberth", (c, seeds, tol, 200), repeat),
                ):
                    tp = _time(lambda: getattr(pure, name)(*args), n)
                    tc = _time(lambda: getattr(compiled, name)(*args), n)
                    rows.append((name, d, bits, tp, tc))
    return rows


_STAGE_SCRIPT = """
import time
from prill.numeric.kernels import BACKEND
from prill.numeric.tower import Stage, TowerData
from prill.numeric.tracker import monodromy
d = TowerData.build(["0", "1", "2", "3", "4", "6"])
t0 = time.perf_counter()
monodromy(Stage[{stage!r}], d, threads=1)
print(BACKEND, time.perf_counter() - t0)
"""


def stage_timing(stage: str) -> dict:
    """Seconds to track every loop of one stage, per backend (fresh process each)."""
    out = {}
    for pure_flag in ("0", "1"):
        env = dict(os.environ, PRILL_PURE_PYTHON=pure_flag)
        res = subprocess.run([sys.executable, "-c", _STAGE_SCRIPT.format(stage=stage)],
                             env=env, capture_output=True, text=True, check=True)
        backend, secs = res.stdout.split()
        out[backend] = float(secs)
    return out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--bits", type=int, nargs="+", default=[212, 424])
    ap.add_argument("--degrees", type=int, nargs="+", default=[4, 9, 36])
    ap.add_argument("--stage", default=None, help="also time tracking of one stage, e.g. C2_over_P")
    args = ap.parse_args(argv)
    if compiled is None:
        raise SystemExit("compiled kernels not available; build with `pip install -e . --no-build-isolation`")
    print(f"{'kernel':<10}{'deg':>5}{'bits':>6}{'python us':>12}{'compiled us':>13}{'speedup':>9}")
    for name, d, bits, tp, tc in run(args.bits, args.degrees, args.repeat):
        print(f"{name:<10}{d:>5}{bits:>6}{tp * 1e6:>12.1f}{tc * 1e6:>13.1f}{tp / tc:>9.2f}")
    if args.stage:
        t = stage_timing(args.stage)
        print(f"\n{args.stage}: python {t['python']:.1f} s, compiled {t['compiled']:.1f} s, "
              f"speedup {t['python'] / t['compiled']:.2f}")


if __name__ == "__main__":
    main()
