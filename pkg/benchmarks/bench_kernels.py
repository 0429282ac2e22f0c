"""Compare the compiled and pure-Python elimination kernels.

    python benchmarks/bench_kernels.py [--pairs N] [--vars N] [--repeat N]
"""

import argparse
import random
import timeit
from fractions import Fraction

from hullinv import _kernels_py
from hullinv.logic.formula import LinearTerm

try:
    from hullinv import _kernels
except ImportError:
    _kernels = None


def make_pairs(n: int, nvars: int, seed: int = 0):
    rng = random.Random(seed)
    names = [f"x{i}" for i in range(nvars)]

    def coef():
        return Fraction(rng.randint(-9, 9) or 1, rng.choice([1, 1, 2, 3]))

    pairs = []
    for _ in range(n):
        a = LinearTerm.make([(v, coef()) for v in names[1:]] + [("x0", abs(coef()))], coef())
        b = LinearTerm.make([(v, coef()) for v in names[1:]] + [("x0", -abs(coef()))], coef())
        pairs.append((a, b))
    return pairs


def bench(fn, pairs, repeat: int) -> float:
    def go():
        for a, b in pairs:
            fn(a, False, b, True, "x0")

    return min(timeit.repeat(go, number=1, repeat=repeat)) / len(pairs)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=5000)
    ap.add_argument("--vars", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    pairs = make_pairs(args.pairs, args.vars)
    py = bench(_kernels_py.fm_combine, pairs, args.repeat)
    print(f"python    {py * 1e6:8.2f} us/combine")
    if _kernels is None:
        print("compiled  (not built)")
        return
    for a, b in pairs[:200]:
        assert _kernels.fm_combine(a, False, b, True, "x0") == _kernels_py.fm_combine(a, False, b, True, "x0")
    cy = bench(_kernels.fm_combine, pairs, args.repeat)
    print(f"compiled  {cy * 1e6:8.2f} us/combine")
    print(f"speedup   {py / cy:8.2f}x")


if __name__ == "__main__":
    main()
