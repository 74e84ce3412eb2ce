"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--steps N] [--points N] [--repeat R]
"""
import argparse
import time

import numpy as np

from hamext._kernels import implementations
from hamext.extension import construct
from hamext.symexpr.numeric import compile_laurent
from hamext.systems import three_sphere
from hamext.verify import integrate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=2000, help="RK4 steps")
    ap.add_argument("--points", type=int, default=20000, help="evaluation points")
    ap.add_argument("--repeat", type=int, default=3)
    ns = ap.parse_args(argv)

    system = three_sphere()
    c = construct(system, system.spec(3, 2))
    cs = compile_laurent(c.K.poly)
    rng = np.random.default_rng(0)
    win = system.sampling_windows()
    pts = {name: w.sample(rng, ns.points) for name, w in win.items()}
    start = system.default_start(0)
    dt = 1e-3

    backends = implementations()
    print(f"K_3,2 on sphere3: {len(c.K)} terms; H: {len(c.H)} terms")
    print(f"{'backend':<8} {'eval (s)':>10} {'rk4 (s)':>10}")
    rows = {}
    for name, k in backends.items():
        ev = best_of(lambda: cs.evaluate(pts, kernels=k), ns.repeat)
        rk = best_of(lambda: integrate(c.H, start, ns.steps * dt, dt, kernels=k, halving=False),
                     ns.repeat)
        rows[name] = (ev, rk)
        print(f"{name:<8} {ev:>10.4f} {rk:>10.4f}")
    if "cython" in rows:
        (pe, pr), (ce, cr) = rows["python"], rows["cython"]
        print(f"speedup: eval x{pe / ce:.1f}, rk4 x{pr / cr:.1f}")
    else:
        print("compiled backend not available")


if __name__ == "__main__":
    main()
