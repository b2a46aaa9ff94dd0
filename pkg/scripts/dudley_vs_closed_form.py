"""Numeric entropy integral vs the closed-form Rademacher bound for the l2 class.

Prints the ratio table over (m, n) and the same table with the integral
truncated at G W R, where the covering ceiling stops flooring at 1.
"""
import argparse
import itertools

from ranklip.bounds import BoundInputs, covering_lipschitz, dudley_bound, rademacher_closed_form
from ranklip.classes import ClassSpec
from ranklip.loss import LISTNET_G, uniform_loss_bound


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", type=int, nargs="+", default=[2, 10, 100])
    parser.add_argument("--n", type=int, nargs="+", default=[100, 1000, 10000])
    parser.add_argument("--B", type=float, help="override the uniform loss bound")
    args = parser.parse_args()

    G = LISTNET_G
    print(f"{'m':>5} {'n':>7} {'B':>7} {'closed':>9} {'numeric':>9} {'ratio':>7} {'trunc':>9} {'ratio':>7}")
    for m, n in itertools.product(args.m, args.n):
        spec = ClassSpec("l2", 1.0, 1.0, 10, m)
        B = args.B or uniform_loss_bound(spec)
        cover = lambda e: covering_lipschitz(spec, e, n, G)  # noqa: E731
        closed = rademacher_closed_form(spec, BoundInputs(n, 0.01, G=G, B=B))
        full = dudley_bound(cover, B, n)
        trunc = dudley_bound(cover, B, n, upper=min(B, G * spec.W * spec.R))
        print(f"{m:5d} {n:7d} {B:7.3f} {closed:9.4f} {full:9.4f} {full / closed:7.3f} {trunc:9.4f} {trunc / closed:7.3f}")


if __name__ == "__main__":
    main()
