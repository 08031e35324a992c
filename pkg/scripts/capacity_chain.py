"""Capacity chain table for the exceptional sets of a gap construction.

For each truncation N this prints the certified upper bound on the
capacity of the exceptional set F_N against the capacity floor of the
ambient set; once the bound drops below the floor the chain closes and
fine-membership witnesses become available.
"""

import argparse

from finehull.cantor import CRule, build_cantor_spec, condition_sum
from finehull.errors import PreconditionFailure
from finehull.potential import cantor_fine_sets, leja_points, sample_E


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--slope", type=float, default=5.0)
    ap.add_argument("--offset", type=float, default=0.0)
    ap.add_argument("--depth", type=int, default=16)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--sample-depth", type=int, default=6)
    args = ap.parse_args()

    rule = CRule("affine", slope=args.slope, offset=args.offset)
    spec = build_cantor_spec(0.0, 1.0, rule, N=args.depth)
    cs = condition_sum(spec)
    print(f"condition sum: {cs.total:.7f}  certified < 1/2: {cs.satisfied}")

    print(f"{'N':>3} {'bound(F_N)':>12} {'floor':>10} {'closes':>7}")
    closing = None
    for N in range(1, args.max_n + 1):
        try:
            fs = cantor_fine_sets(spec, N)
        except PreconditionFailure as e:
            print(f"{N:3d}  {e}")
            continue
        print(f"{N:3d} {fs.fn_bound.bound:12.5f} "
              f"{fs.cap_ambient_floor:10.5f} {str(fs.chain_closes):>7}")
        if fs.chain_closes and closing is None:
            closing = N

    if closing is None:
        print("chain does not close in range")
        return
    fs = cantor_fine_sets(spec, closing)
    model_F = leja_points(fs.FN)
    model_J = leja_points(fs.JN)
    print(f"log capacity gap J/F: "
          f"{model_J.log_cap_estimate - model_F.log_cap_estimate:.4f}")
    rows = sample_E(spec, args.sample_depth)
    print(f"{'x':>14} {'u':>10} {'certified':>10}")
    for r in rows:
        print(f"{r.x:14.9f} {r.u:10.4f} {str(r.in_EN):>10}")


if __name__ == "__main__":
    main()
