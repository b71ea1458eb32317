"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from mtobench import _kernels
from mtobench._kernels import _pykernels


def _cases(rng):
    for n in (100, 400, 1000):
        objs = rng.random((n, 2))
        yield "nondominated_ranks", n, (objs,)
    for n in (100, 1000, 10_000):
        f1 = np.sort(rng.random(n))
        yield "hv2d", n, (np.column_stack([f1, 1.0 - np.sqrt(f1)]), np.array([1.1, 1.1]))
    for n in (100, 500, 2000):
        yield "min_distances", n, (rng.random((1000, 2)), rng.random((n, 2)), True)


def run(repeat: int = 5) -> list[dict]:
    if _kernels.BACKEND != "cython":
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
    compiled = _kernels._impl
    rng = np.random.default_rng(0)
    rows = []
    for name, n, args in _cases(rng):
        py_fn, c_fn = getattr(_pykernels, name), getattr(compiled, name)
        np.testing.assert_allclose(np.asarray(py_fn(*args), float), np.asarray(c_fn(*args), float))
        number = max(1, int(0.2 / max(timeit.timeit(lambda: py_fn(*args), number=1), 1e-6)))
        t_py = min(timeit.repeat(lambda: py_fn(*args), number=number, repeat=repeat)) / number
        t_c = min(timeit.repeat(lambda: c_fn(*args), number=number, repeat=repeat)) / number
        rows.append({"kernel": name, "n": n, "python_s": t_py, "cython_s": t_c, "speedup": t_py / t_c})
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", help="also write the results here")
    args = parser.parse_args(argv)
    rows = run(args.repeat)
    print(f"{'kernel':<20}{'n':>7}{'python (ms)':>14}{'cython (ms)':>14}{'speedup':>10}")
    for r in rows:
        print(f"{r['kernel']:<20}{r['n']:>7}{1e3 * r['python_s']:>14.3f}{1e3 * r['cython_s']:>14.3f}"
              f"{r['speedup']:>9.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
