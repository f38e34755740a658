"""Compare the numba backend with the plain numpy/Python backend.

Each backend runs in its own interpreter (the switch is read at import):

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKLOAD = textwrap.dedent("""
    import json, sys, time
    import numpy as np
    from oligopoly import backend_name, dynamics, region

    repeat = int(sys.argv[1])

    def best(fn):
        fn()  # warm-up (includes compilation for numba)
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return min(times)

    grid = region.GridDef(ksqrtc_steps=200, l_steps=100)
    big = region.GridDef(ksqrtc_steps=800, l_steps=400)
    m = dynamics.gbal(2.3, 0.5, 1.0)
    E = dynamics.interior_equilibrium(m)
    chaotic = dynamics.gbal(3.0, 0.9, 1.0)  # aperiodic: uses the whole budget
    Ec = dynamics.interior_equilibrium(chaotic)

    t_compile = time.perf_counter()
    dynamics.simulate(m, 1.01 * E, 100)
    t_compile = time.perf_counter() - t_compile

    out = {
        "backend": backend_name(),
        "first_call_s": t_compile,
        "scan_200x100_x4_s": best(lambda: region.scan_all(grid)),
        "scan_800x400_x4_s": best(lambda: region.scan_all(big)),
        "simulate_converging_s": best(lambda: dynamics.simulate(m, 1.01 * E, 100_000)),
        "simulate_aperiodic_100k_s": best(lambda: dynamics.simulate(chaotic, 1.01 * Ec, 100_000)),
    }
    print(json.dumps(out))
""")


def run(flag, repeat):
    env = dict(os.environ, OLIGOPOLY_NUMBA=flag)
    proc = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rows = [run("1", args.repeat), run("0", args.repeat)]
    keys = [k for k in rows[0] if k != "backend"]
    print(f"{'workload':28s} " + " ".join(f"{r['backend']:>10s}" for r in rows) + "   speedup")
    for k in keys:
        a, b = rows[0][k], rows[1][k]
        speed = f"{b / a:8.1f}x" if k != "first_call_s" else ""
        print(f"{k:28s} {a:10.4f} {b:10.4f} {speed}")


if __name__ == "__main__":
    main()
