"""Timing harness for the two eigensolver lanes.

Runs the full tred2 -> accumulate_q -> tql2 pipeline from both the
compiled extension and the NumPy fallback on the same matrices, checks
they agree, and prints a comparison table. The sector Hamiltonian sizes
correspond to chains of roughly L = 32, 45, 64.

Usage: python3 benchmarks/bench_kernels.py [--sizes 500 1000 2000]
"""
import argparse
import time

import numpy as np

from mesondyn.basis import build_basis
from mesondyn.hamiltonian import build_sector_hamiltonian
from mesondyn.linalg import _kernels_py

try:
    from mesondyn.linalg import _core
except ImportError:
    _core = None


def solve(kernels, matrix):
    work = np.array(matrix, dtype=np.float64, order="C")
    start = time.perf_counter()
    d, e, hh = kernels.tred2(work)
    z = kernels.accumulate_q(work, hh)
    kernels.tql2(d, e, z)
    elapsed = time.perf_counter() - start
    order = np.argsort(d)
    return np.asarray(d)[order], np.asarray(z)[:, order], elapsed


def residual(matrix, w, v):
    return float(np.max(np.abs(matrix @ v - v * w)))


def bench_one(label, matrix):
    w_py, v_py, t_py = solve(_kernels_py, matrix)
    res = residual(matrix, w_py, v_py)
    line = f"{label:>18}  pure {t_py:8.3f}s"
    if _core is not None:
        w_c, v_c, t_c = solve(_core, matrix)
        gap = float(np.max(np.abs(w_c - w_py)))
        line += (f"  compiled {t_c:8.3f}s  speedup {t_py / t_c:5.2f}x"
                 f"  |dw| {gap:.2e}")
        res = max(res, residual(matrix, w_c, v_c))
    else:
        line += "  compiled lane unavailable"
    line += f"  residual {res:.2e}"
    print(line)


def sector_matrix(L):
    basis = build_basis(L)
    return build_sector_hamiltonian(basis, 1.0, 1.1).to_dense()


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[496, 990, 2016])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print("random dense symmetric:")
    for n in args.sizes:
        a = rng.standard_normal((n, n))
        bench_one(f"n={n}", (a + a.T) / 2.0)

    print("sector Hamiltonian (h/J = 1.1):")
    for L in (32, 45, 64):
        m = sector_matrix(L)
        bench_one(f"L={L} (n={m.shape[0]})", m)


if __name__ == "__main__":
    main()
