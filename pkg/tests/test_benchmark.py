import importlib.util
import math
from pathlib import Path

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


def test_benchmark_runs_and_backends_agree():
    spec = importlib.util.spec_from_file_location("bench_kernels", BENCH)
    bench = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(bench)
    rows = bench.run(n=2000, repeat=1)
    assert [r[0] for r in rows] == ["complete_integrals", "ellipf", "ellipe", "am_dn"]
    for _, py_t, c_t, _, diff in rows:
        assert py_t > 0
        assert math.isnan(diff) or diff < 1e-12
