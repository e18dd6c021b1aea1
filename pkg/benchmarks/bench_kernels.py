"""Time the numba kernels against the plain-Python fallback.

Each path runs in a fresh interpreter because the env flag is read at import.
The workload is a batch of ladder games; both paths must report the same mean.

    python benchmarks/bench_kernels.py --d 40 --runs 200
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = """
import json, sys, time
from stochclock import _jit
from stochclock.clock import make_ladder
from stochclock.game import GameConfig, estimate_score
d, runs, delta = int(sys.argv[1]), int(sys.argv[2]), float(sys.argv[3])
c = make_ladder(d, delta)
cfg = GameConfig(c, c, z0=d // 2, seed=0, runs=runs)
estimate_score(GameConfig(c, c, z0=d // 2, seed=1, runs=2))  # compile or load the cache
t = time.perf_counter()
est = estimate_score(cfg)
elapsed = time.perf_counter() - t
print(json.dumps({"numba": _jit.USE_NUMBA, "seconds": elapsed, "mean": est.mean,
                  "rounds": float(est.applications.sum())}))
"""


def run_path(disable, args):
    env = dict(os.environ, STOCHCLOCK_DISABLE_NUMBA="1" if disable else "0")
    cmd = [sys.executable, "-c", WORKLOAD, str(args.d), str(args.runs), str(args.delta)]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--d", type=int, default=40)
    parser.add_argument("--runs", type=int, default=200)
    parser.add_argument("--delta", type=float, default=0.05)
    args = parser.parse_args(argv)

    fast = run_path(False, args)
    slow = run_path(True, args)
    if fast["mean"] != slow["mean"]:
        print(f"paths disagree: {fast['mean']} vs {slow['mean']}", file=sys.stderr)
        return 1
    for name, r in (("numba", fast), ("python", slow)):
        rate = r["rounds"] / r["seconds"]
        print(f"{name:>6}: {r['seconds']:8.3f} s  {rate:12.0f} rounds/s  mean score {r['mean']:.4f}")
    print(f"speedup: {slow['seconds'] / fast['seconds']:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
