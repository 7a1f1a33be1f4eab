"""Run every benchmark preset on the 3x3 six-type game and summarize final regret.

    python3 scripts/reproduce_experiments.py --runs 50 --out results/

Writes one CSV/SVG pair (plus per-run CSVs) per preset and prints a table of
mean final regret, its standard deviation, the bound and the mean commitment
drift ||x^{t+1} - x^t||_1.
"""
import argparse
import time

from repstack.cli import BENCH_PRESETS, bench_config
from repstack.sim import run_batch, stability_diagnostic, write_outputs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=sorted(BENCH_PRESETS), help="subset of presets")
    args = ap.parse_args()

    print(f"{'preset':<12} {'regret':>10} {'std':>9} {'bound':>11} {'ratio':>7} {'drift':>7} {'secs':>6}")
    for name in args.only or list(BENCH_PRESETS):
        game, cfg = bench_config(name)
        start = time.time()
        batch = run_batch(game, cfg, args.runs, args.seed, args.threads)
        write_outputs(args.out, name, batch)
        final, bound = batch.mean_regret[-1], batch.bound[-1]
        print(f"{name:<12} {final:>10.3f} {batch.std_regret[-1]:>9.3f} {bound:>11.2f} {final / bound:>7.4f} "
              f"{stability_diagnostic(batch.ledgers):>7.4f} {time.time() - start:>6.0f}")


if __name__ == "__main__":
    main()
