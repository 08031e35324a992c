"""Dip depth of the fiber potential as the truncation deepens.

For a factorial construction the weighted potential over the w-plane
develops sharper wells at the two square roots of the graph value as M
grows; this prints the certified depth bound and the measured dips.
"""

import argparse

from finehull.cantor import CRule, build_cantor_spec
from finehull.hull import fiber_scan, graph_depth_bound, make_hull_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--z", type=complex, default=2.0 + 0.0j)
    ap.add_argument("--res", type=int, default=96)
    ap.add_argument("--max-depth", type=int, default=8)
    args = ap.parse_args()

    spec = build_cantor_spec(0.0, 1.0, CRule("factorial", shift=2), N=16)
    wrect = (-1.5, 1.5, -1.5, 1.5)
    print(f"{'M':>3} {'K(M) bound':>12} {'measured':>10} {'dips':>5}")
    for M in range(2, args.max_depth + 1):
        hps = make_hull_spec(spec, M)
        grid = fiber_scan(hps, args.z, wrect, args.res, sq=True, delta=1.0)
        depth = min((d.depth for d in grid.dips), default=float("nan"))
        print(f"{M:3d} {graph_depth_bound(hps):12.3f} {depth:10.3f} "
              f"{len(grid.dips):5d}")
    grid = fiber_scan(make_hull_spec(spec, args.max_depth), args.z, wrect,
                      args.res, sq=True, delta=1.0)
    for d in grid.dips:
        print(f"dip at w = {d.w.real:+.6f}{d.w.imag:+.6f}i  "
              f"depth {d.depth:.2f}")


if __name__ == "__main__":
    main()
