"""Compare the compiled and numpy elliptic kernels.

Run ``python benchmarks/bench_kernels.py [--n N] [--repeat R]``. Both backends
see the same random inputs; the script reports the best wall time per call,
the speedup and the largest absolute disagreement.
"""
import argparse
import timeit

import numpy as np

from pmcsurf import _pykernels

try:
    from pmcsurf import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _inputs(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.0, 0.999, n)
    phi = rng.uniform(-3.0, 3.0, n)
    u = rng.uniform(-10.0, 10.0, n)
    return m, phi, u


def _cases(m, phi, u):
    return {
        "complete_integrals": (m,),
        "ellipf": (phi, m),
        "ellipe": (phi, m),
        "am_dn": (u, m),
    }


def _max_diff(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(a, b))


def run(n=100_000, repeat=5, seed=0):
    """Return rows ``(kernel, python_s, compiled_s, speedup, max_abs_diff)``."""
    cases = _cases(*_inputs(n, seed))
    rows = []
    for name, args in cases.items():
        py_fn = getattr(_pykernels, name)
        py_time = min(timeit.repeat(lambda: py_fn(*args), number=1, repeat=repeat))
        if _ckernels is None:
            rows.append((name, py_time, float("nan"), float("nan"), float("nan")))
            continue
        c_fn = getattr(_ckernels, name)
        c_time = min(timeit.repeat(lambda: c_fn(*args), number=1, repeat=repeat))
        rows.append((name, py_time, c_time, py_time / c_time, _max_diff(py_fn(*args), c_fn(*args))))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    print(f"{'kernel':<20}{'numpy [s]':>12}{'compiled [s]':>14}{'speedup':>10}{'max |diff|':>13}")
    for name, py_t, c_t, speed, diff in run(args.n, args.repeat, args.seed):
        print(f"{name:<20}{py_t:>12.4f}{c_t:>14.4f}{speed:>10.1f}{diff:>13.2e}")


if __name__ == "__main__":
    main()
