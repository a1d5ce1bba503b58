"""Chart the degenerate-Hopf locus across growth-rate ratios.

Scans a grid of delta values, finds every vanishing point of the first
focal quantity on the Hopf section, chains them into branches, and
reports the branch count together with the sign of the second focal
quantity at each root (expected negative everywhere).

Usage:
    python3 scripts/gh_locus.py --deltas 50
"""

import argparse
import sys
import time

from hlbif.bifcurves import gh_branches, gh_points


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deltas", type=int, default=50,
                    help="delta grid size over (0.02, 0.92)")
    args = ap.parse_args()

    t0 = time.time()
    grid = [0.02 + (0.92 - 0.02) * i / (args.deltas - 1)
            for i in range(args.deltas)]

    worst_l2 = None
    n_roots = 0
    for d in grid:
        for g in gh_points(d):
            n_roots += 1
            if worst_l2 is None or g.l2 > worst_l2:
                worst_l2 = g.l2
            flag = "  <-- NONNEGATIVE" if g.l2 >= 0 else ""
            print(f"delta={d:.4f} tau={g.x0:.6f} a={g.params.a:.6f} "
                  f"beta={g.params.beta:.6f} l2={g.l2:.4g}{flag}")

    branches = gh_branches(grid)
    print(f"\n{n_roots} roots on {args.deltas} slices -> "
          f"{len(branches)} connected branch(es)")
    for i, br in enumerate(branches):
        d_lo = min(q[0] for q in br)
        d_hi = max(q[0] for q in br)
        print(f"  branch {i}: {len(br)} points, delta in "
              f"[{d_lo:.4f}, {d_hi:.4f}]")
    print(f"largest second focal quantity seen: {worst_l2:.4g}")
    print(f"({time.time() - t0:.1f} s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
