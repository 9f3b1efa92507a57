"""Compare the numba and numpy kernel backends on the package's hot loops.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--n 18]

Each kernel runs on identical inputs under both backends; the script prints
the best-of-``repeat`` wall time, the speedup and the largest disagreement
between the two outputs.  Numba compile time is excluded by a warm-up call.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pnormcut._kernels import _numpy

try:
    from pnormcut._kernels import _numba
except ImportError:  # pragma: no cover - depends on environment
    _numba = None

from pnormcut.gadget import gadget_matrix
from pnormcut.graph import incidence_matrix, random_connected_graph
from pnormcut.reduction import build_z


def _best(fn, repeat: int) -> tuple[float, object]:
    out = fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _diff(a, b) -> float:
    if isinstance(a, tuple):
        return _diff(a[1], b[1])  # ascent: compare the objective values
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(np.max(np.abs(a - b))) / scale


def cases(n: int) -> list[tuple[str, str, tuple]]:
    rng = np.random.default_rng(0)
    g = random_connected_graph(n, rng, density=0.5)
    eu, ev = g.edge_arrays()
    inc = np.ascontiguousarray(incidence_matrix(g).f)
    z = np.ascontiguousarray(build_z(random_connected_graph(8, rng), 3, 640).matrix.f)
    x0 = rng.standard_normal((z.shape[1], 200))
    y = rng.standard_normal((100_000, 8))
    gadget = np.ascontiguousarray(gadget_matrix(12).f)
    return [
        (f"cut_values n={n}", "cut_values", (n, eu, ev)),
        (f"sign_power_sums M(G) n={n}", "sign_power_sums", (inc, 3.0)),
        ("sign_power_sums gadget n=12", "sign_power_sums", (gadget, 2.5)),
        ("ascent_batch Z n=8, 200 starts", "ascent_batch", (z, x0, 3.0, 1e-12, 10_000, 3)),
        ("gadget_values 1e5 x 8", "gadget_values", (y, 3.0)),
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=18, help="graph size for the enumeration kernels")
    args = ap.parse_args()
    if _numba is None:
        print("numba is not installed; only the numpy backend is available")
    print(f"{'kernel':40s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s} {'max diff':>10s}")
    for label, name, kargs in cases(args.n):
        t_np, out_np = _best(lambda: getattr(_numpy, name)(*kargs), args.repeat)
        if _numba is None:
            print(f"{label:40s} {t_np:10.4f}")
            continue
        t_nb, out_nb = _best(lambda: getattr(_numba, name)(*kargs), args.repeat)
        print(f"{label:40s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f} "
              f"{_diff(out_np, out_nb):10.2e}")


if __name__ == "__main__":
    main()
