"""Time the compiled and pure-Python simulation kernels on the same workload.

    python benchmarks/bench_simulate.py [--arrivals 50000] [--replications 2] [--repeat 3]

Both kernels consume identical random streams, so the script also checks that
their outputs agree bit for bit before reporting timings.
"""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from gixq import SimConfig, simulate  # noqa: E402
from gixq.simulator import BACKENDS  # noqa: E402
from models import table1_params  # noqa: E402


def best_time(cfg, backend, repeat):
    times, result = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = simulate(cfg, backend)
        times.append(time.perf_counter() - t0)
    return min(times), result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--arrivals", type=int, default=50_000, help="batch arrivals per replication")
    ap.add_argument("--replications", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3, help="keep the best of this many runs")
    ap.add_argument("--families", nargs="+", default=["M", "D", "E4"])
    args = ap.parse_args(argv)

    if "compiled" not in BACKENDS:
        print("compiled kernel not built; only the Python kernel is available", file=sys.stderr)
        return 1

    print(f"{'family':<8}{'compiled s':>12}{'python s':>12}{'speedup':>10}{'arrivals/s (compiled)':>24}  identical")
    for fam in args.families:
        cfg = SimConfig(
            table1_params(fam), batch_arrivals_target=args.arrivals, replications=args.replications, seed=1
        )
        t_c, r_c = best_time(cfg, "compiled", args.repeat)
        t_p, r_p = best_time(cfg, "python", max(1, args.repeat // 2))
        same = np.array_equal(r_c.prearrival_counts, r_p.prearrival_counts) and np.array_equal(
            r_c.timeavg_pmf, r_p.timeavg_pmf
        )
        rate = args.arrivals * args.replications / t_c
        print(f"{fam:<8}{t_c:>12.4f}{t_p:>12.4f}{t_p / t_c:>9.1f}x{rate:>24,.0f}  {same}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
