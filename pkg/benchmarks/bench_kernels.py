"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat N]

The numba column excludes compilation (one warm-up call per kernel).
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from strongtherm import kernels
from strongtherm._accel import HAS_NUMBA


def _cases(rng: np.random.Generator):
    d_s, d_b = 12, 144
    n = d_s * d_b
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    U, _ = np.linalg.qr(A)
    w = np.exp(-rng.uniform(0, 20, size=n))
    M = U @ np.diag(w) @ U.conj().T
    nx, ny, nq = 128, 3, 64
    nodes, weights = np.polynomial.hermite.hermgauss(nq)
    curv = rng.uniform(0.5, 2.0, size=(nx, ny))
    lin = rng.normal(size=(nx, ny))
    return {
        "ptrace_bipartite (1728^2 -> 12^2)": ("ptrace_bipartite", (M, d_s, d_b, True)),
        "reduced_boltzmann (d_s=12, d_b=144)": ("reduced_boltzmann", (U, w, d_s, d_b)),
        "conditional_gaussian_moments (128x3x64)": (
            "conditional_gaussian_moments",
            (curv, lin, 1.3, nodes, np.log(weights)),
        ),
    }


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':44} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>8}")
    for label, (name, argv) in _cases(rng).items():
        f_np = getattr(kernels, f"{name}_numpy")
        t_np = min(timeit.repeat(lambda: f_np(*argv), number=1, repeat=args.repeat))
        if HAS_NUMBA:
            f_nb = getattr(kernels, f"{name}_numba")
            f_nb(*argv)  # compile
            t_nb = min(timeit.repeat(lambda: f_nb(*argv), number=1, repeat=args.repeat))
            r_np, r_nb = f_np(*argv), f_nb(*argv)
            pairs = zip(r_np, r_nb) if isinstance(r_np, tuple) else [(r_np, r_nb)]
            err = max(float(np.max(np.abs(a - b))) for a, b in pairs)
            print(f"{label:44} {1e3 * t_np:12.3f} {1e3 * t_nb:12.3f} {t_np / t_nb:8.2f}   max|diff|={err:.1e}")
        else:
            print(f"{label:44} {1e3 * t_np:12.3f} {'n/a':>12}")


if __name__ == "__main__":
    main()
