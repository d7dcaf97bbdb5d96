"""Time the numba and pure-numpy simulation kernels on the same workloads.

Usage: python benchmarks/bench_kernels.py [--trials N] [--repeat R] [--json PATH]

Both backends produce identical samples, which the script asserts before
reporting; the first numba call (compilation) is excluded from timing.
"""

import argparse
import json
import math
import platform
import time

import numpy as np

from mtcap.model import NetworkConfig
from mtcap.montecarlo import SimOptions, simulate

WORKLOADS = {
    "sparse-k20": (NetworkConfig(2, 4.0, 1.0, 5.0, 0.01, 20 / (25 * math.pi), 1, 2, 0.05), SimOptions()),
    "dense-field": (NetworkConfig(2, 4.0, 1e-3, 3.0, 1.0, 20 / (9 * math.pi), 1, 1, 0.05), SimOptions(r_sim=20.0)),
    "nakagami-fixed": (NetworkConfig(2, 4.0, 1.0, 5.0, 0.05, 20 / (25 * math.pi), 3, 4, 0.05),
                       SimOptions(mode="fixed", r_sim=15.0)),
    "per-receiver": (NetworkConfig(2, 4.0, 1.0, 5.0, 0.05, 20 / (25 * math.pi), 1, 2, 0.05),
                     SimOptions(interference_at="receiver", r_sim=15.0)),
}


def _time(cfg, opts, backend, trials, repeat):
    opts = SimOptions(**{**opts.__dict__, "backend": backend})
    simulate(cfg, 256, 0, opts)  # warm-up / compile
    best = math.inf
    res = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = simulate(cfg, trials, 1, opts)
        best = min(best, time.perf_counter() - t0)
    return best, res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)

    rows = []
    print(f"{'workload':<16}{'numba s':>10}{'numpy s':>10}{'speedup':>9}")
    for name, (cfg, opts) in WORKLOADS.items():
        t_nb, r_nb = _time(cfg, opts, "numba", args.trials, args.repeat)
        t_np, r_np = _time(cfg, opts, "numpy", args.trials, args.repeat)
        np.testing.assert_array_equal(r_nb.outage, r_np.outage)
        np.testing.assert_allclose(r_nb.interference, r_np.interference, rtol=1e-12)
        rows.append({"workload": name, "trials": args.trials, "numba_s": t_nb, "numpy_s": t_np,
                     "speedup": t_np / t_nb})
        print(f"{name:<16}{t_nb:>10.3f}{t_np:>10.3f}{t_np / t_nb:>9.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"python": platform.python_version(), "machine": platform.machine(), "rows": rows}, fh,
                      indent=2)


if __name__ == "__main__":
    main()
