"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from mesonloop import _kernels_py
from mesonloop.dynamic import DynamicConfig, solve_branch_ode
from mesonloop.trajectory import QuinticBumpHold

try:
    from mesonloop import _kernels as _compiled
except ImportError:
    _compiled = None


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_rk4(impl, n, repeat):
    rng = np.random.Generator(np.random.Philox(0))
    arrays = [np.ascontiguousarray(rng.normal(size=2 * n + 1)) for _ in range(4)]
    return _best(lambda: impl.rk4_forced_oscillator(3.0, 1e-3, *arrays, 0.0, 0.0), repeat)


def bench_phase(impl, n, steps, repeat):
    x = np.linspace(-20, 20, n)
    psi = np.exp(-x * x).astype(complex)

    def run():
        for _ in range(steps):
            impl.apply_quadratic_phase(psi, x, 0.3, 1e-3, 2e-4)

    return _best(run, repeat)


def bench_branch(repeat):
    from mesonloop import kernels

    cfg = DynamicConfig(m=1.0, omega=5.0, gamma=0.1, x0=10.0, T=20.0)
    traj = QuinticBumpHold(D=1.0, tau_r=5.0, T=20.0)
    saved = kernels.rk4_forced_oscillator
    out = {}
    for name, impl in (("cython", _compiled), ("python", _kernels_py)):
        if impl is None:
            continue
        # dynamic looks the kernel up on the module at call time
        kernels.rk4_forced_oscillator = impl.rk4_forced_oscillator
        out[name] = _best(lambda: solve_branch_ode(cfg, traj, 1e-3 / cfg.omega), repeat)
    kernels.rk4_forced_oscillator = saved
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _compiled is None:
        print("compiled extension not built; only the fallback is timed")
    cases = [
        ("rk4, 10^5 steps", lambda impl: bench_rk4(impl, 100_000, args.repeat)),
        ("phase, 2048 pts x 1000", lambda impl: bench_phase(impl, 2048, 1000, args.repeat)),
    ]
    print(f"{'kernel':<28}{'cython [s]':>12}{'python [s]':>12}{'speed-up':>10}")
    for label, fn in cases:
        t_py = fn(_kernels_py)
        t_c = fn(_compiled) if _compiled is not None else float("nan")
        print(f"{label:<28}{t_c:>12.4f}{t_py:>12.4f}{t_py / t_c:>10.1f}")
    branch = bench_branch(args.repeat)
    t_c = branch.get("cython", float("nan"))
    t_py = branch["python"]
    print(f"{'solve_branch_ode, standard':<28}{t_c:>12.4f}{t_py:>12.4f}{t_py / t_c:>10.1f}")


if __name__ == "__main__":
    main()
