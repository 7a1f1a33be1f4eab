"""Tabulate the memory drag theta_H for window and discounted followers.

    python3 scripts/memory_drag.py --H 200

For windows the direct double sum is compared with (B-1)(2H-B)/4 and with
the shorter (B-1)(H-B+2)/4, which undercounts whenever B >= 2 and H > 2.
For discounting the sum is compared with its closed-form upper bound.
"""
import argparse

from repstack.memory import (
    MemoryModel,
    theta_discounted_upper,
    theta_finite_closed_form,
    theta_finite_exact,
    theta_H,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--H", type=int, default=200)
    args = ap.parse_args()
    H = args.H

    print(f"window memory, H={H}")
    print(f"{'B':>5} {'direct sum':>12} {'(B-1)(2H-B)/4':>14} {'(B-1)(H-B+2)/4':>15}")
    for B in (1, 2, 3, 5, 10, 20, 50, H):
        if B <= H:
            print(f"{B:>5} {theta_H(MemoryModel('finite', B=B), H):>12.2f} {theta_finite_exact(B, H):>14.2f} "
                  f"{theta_finite_closed_form(B, H):>15.2f}")

    print(f"\ndiscounted memory, H={H}")
    print(f"{'gamma':>6} {'direct sum':>12} {'upper bound':>12}")
    for gamma in (0.5, 0.8, 0.9, 0.95, 0.99):
        print(f"{gamma:>6} {theta_H(MemoryModel('discounted', gamma=gamma), H):>12.2f} "
              f"{theta_discounted_upper(gamma, H):>12.2f}")


if __name__ == "__main__":
    main()
