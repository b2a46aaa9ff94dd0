"""Plug the smooth-optimal step size into the online excess-risk expression.

Compares the exact value with the simplified rate L* + sqrt(2xL*) + 8x and
with L* + sqrt(8xL*) + 8x, where x = H W^2 / n.
"""
import argparse
import itertools
import math

import numpy as np

from ranklip.bounds import online_excess_risk


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    worst_printed, worst_corrected = (0.0, None), (0.0, None)
    for _ in range(args.samples):
        H, W, L = 10 ** rng.uniform(-1, 2), 10 ** rng.uniform(-1, 1.5), 10 ** rng.uniform(-3, 2)
        n = int(10 ** rng.uniform(0, 6)) + 1
        rep = online_excess_risk(L, W, H, n)
        exact, x = rep.intermediates["exact"], rep.intermediates["x"]
        corrected = L + math.sqrt(8 * x * L) + 8 * x
        r1, r2 = exact / rep.value - 1, exact / corrected - 1
        if r1 > worst_printed[0]:
            worst_printed = (r1, (H, W, L, n))
        if r2 > worst_corrected[0]:
            worst_corrected = (r2, (H, W, L, n))
    print(f"exact above L*+sqrt(2xL*)+8x by up to {worst_printed[0]:.2%} at (H, W, L*, n) = {worst_printed[1]}")
    print(f"exact above L*+sqrt(8xL*)+8x by up to {worst_corrected[0]:.2e}")

    print("\nexample rows")
    for H, W, L, n in itertools.product((2.0,), (1.0,), (0.0, 0.1, 1.0), (100, 10_000)):
        rep = online_excess_risk(L, W, H, n)
        print(f"  L*={L:<4} n={n:<6} printed={rep.value:.6f} exact={rep.intermediates['exact']:.6f}")


if __name__ == "__main__":
    main()
