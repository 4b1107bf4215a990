"""Benchmark: compiled integration kernels vs the NumPy fallback.

Times identical descriptor-field computations through both backends and
prints a table with speedups.  Usage:

    python benchmarks/bench_backends.py           # quick sizes
    python benchmarks/bench_backends.py --full    # includes a 201x201 grid

The fixed-step saddle rows double as a determinism check: both backends
must produce bit-identical values there (polynomial arithmetic only).
"""

import argparse
import time

import numpy as np

from ldesc import _kernels_py, expr
from ldesc.fields import SaddleParams, linear_saddle, separable_incompressible
from ldesc.integrate import IntegratorConfig
from ldesc.mfield import GridSpec

try:
    from ldesc import _kernels as compiled
except ImportError:
    compiled = None


def _grid_batch(n):
    grid = GridSpec(-1.0, 1.0, -1.0, 1.0, n, n)
    return grid.node_coords()


def _run(mod, field, xs, ys, tau, method, cfg):
    nsteps, h = cfg.resolve_steps(tau)
    out_m = np.zeros(len(xs))
    out_valid = np.zeros(len(xs), dtype=np.uint8)
    start = time.perf_counter()
    mod.compute_m_batch(*field.kernel_args(), xs, ys, 0.0, tau,
                        method, nsteps, h, cfg.rtol, cfg.atol,
                        cfg.escape_radius, out_m, out_valid)
    return time.perf_counter() - start, out_m


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--full", action="store_true",
                        help="also run the 201x201 reproduction-size grid")
    args = parser.parse_args()

    if compiled is None:
        print("compiled extension not available; nothing to compare")
        return

    saddle = linear_saddle(SaddleParams(1.0, 1.0))
    tanh_field = separable_incompressible(expr.parse("tanh(x)"))
    rk4 = IntegratorConfig()
    rk45 = IntegratorConfig(method="rk45-adaptive")

    cases = [
        ("saddle rk4   41x41 grid, tau=20", saddle, 41, 20.0, 0, rk4),
        ("saddle rk4  101x101 grid, tau=20", saddle, 101, 20.0, 0, rk4),
        ("saddle rk45  41x41 grid, tau=10", saddle, 41, 10.0, 1, rk45),
        ("tanh   rk4   41x41 grid, tau=10", tanh_field, 41, 10.0, 0, rk4),
    ]
    if args.full:
        cases.append(("saddle rk4  201x201 grid, tau=20", saddle, 201, 20.0, 0, rk4))

    name_w = max(len(name) for name, *_ in cases)
    print(f"{'case':<{name_w}}  {'compiled':>10}  {'python':>10}  {'speedup':>8}")
    for name, field, n, tau, method, cfg in cases:
        xs, ys = _grid_batch(n)
        t_c, m_c = _run(compiled, field, xs, ys, tau, method, cfg)
        t_p, m_p = _run(_kernels_py, field, xs, ys, tau, method, cfg)
        note = ""
        if method == 0 and field is saddle:
            note = "  (bitwise equal)" if np.array_equal(m_c, m_p) else "  (MISMATCH!)"
        print(f"{name:<{name_w}}  {t_c:>9.3f}s  {t_p:>9.3f}s  "
              f"{t_p / t_c:>7.1f}x{note}")


if __name__ == "__main__":
    main()
