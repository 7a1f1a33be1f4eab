"""Compare the LP-enumeration and multistart-ascent oracles with a dense grid.

    python3 scripts/oracle_accuracy.py --instances 50 --step 0.005

Prints, per response model, the largest and mean gap (grid value minus oracle
value; negative means the oracle beat the grid) and mean solve time.
"""
import argparse
import time

import numpy as np

from repstack.game import random_game
from repstack.oracle import OracleRequest, grid_oracle, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=50)
    ap.add_argument("--step", type=float, default=0.005)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    for mode in ("br", "qr"):
        gaps, secs = [], []
        for _ in range(args.instances):
            K = int(rng.integers(1, 4))
            g = random_game(3, 3, K, float(rng.uniform(0.5, 5)), int(rng.integers(1 << 30)))
            w = rng.uniform(0, 5, size=K)
            start = time.perf_counter()
            res = solve(OracleRequest(g, w, mode, 1e-4))
            secs.append(time.perf_counter() - start)
            gaps.append(grid_oracle(g, w, mode, args.step)[1] - res.value)
        print(f"{mode}: max gap {max(gaps):+.2e}, mean gap {np.mean(gaps):+.2e}, "
              f"mean solve {1e3 * np.mean(secs):.1f} ms")


if __name__ == "__main__":
    main()
