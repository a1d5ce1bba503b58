"""Seed and trace the two continued nonlocal curves of one slice.

Seeds the separatrix-loop curve near its double-zero organizing center
(or by cross-slice tracking below delta = 1/2) and the fold-of-cycles
curve at its degenerate-Hopf anchor, reports seed quality, then traces
both curves and prints their endpoints.

Usage:
    python3 scripts/nonlocal_anchors.py --delta 0.55
    python3 scripts/nonlocal_anchors.py --delta 0.25 --arc-step 0.01
"""

import argparse
import math
import sys
import time

from hlbif.bifcurves import bt_curve, gh_points
from hlbif.nonlocal_curves import (
    double_cycle_section,
    loop_section,
    seed_double_cycle_curve,
    seed_loop_curve,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, default=0.55)
    ap.add_argument("--arc-step", type=float, default=0.02)
    ap.add_argument("--max-points", type=int, default=400)
    args = ap.parse_args()
    d = args.delta

    t0 = time.time()
    seed_l = seed_loop_curve(d)
    print(f"loop seed: a={seed_l.a:.8f} beta={seed_l.beta:.8f}")
    if 0.5 < d < 1.0:
        bt = bt_curve(1.0 - d)
        print(f"  organizing double-zero at a={bt.a:.8f} beta={bt.beta:.8f} "
              f"(seed distance {math.hypot(seed_l.a - bt.a, seed_l.beta - bt.beta):.3e})")

    seed_c = seed_double_cycle_curve(d)
    ghs = gh_points(d)
    near = min(ghs, key=lambda g: math.hypot(g.params.a - seed_c.a,
                                             g.params.beta - seed_c.beta))
    print(f"fold-of-cycles seed: a={seed_c.a:.8f} beta={seed_c.beta:.8f} "
          f"(distance {math.hypot(near.params.a - seed_c.a, near.params.beta - seed_c.beta):.3e} "
          f"from its degenerate-Hopf anchor)")

    for name, fn in (("saddle loop", loop_section),
                     ("fold of cycles", double_cycle_section)):
        t1 = time.time()
        curve = fn(d, arc_step=args.arc_step, max_points=args.max_points)
        pts = curve.ab_polyline()
        res = max(q.residual for q in curve.points)
        print(f"{name}: {len(pts)} points in {time.time() - t1:.1f} s, "
              f"worst residual {res:.2e}")
        print(f"  ends: ({pts[0][0]:.5f}, {pts[0][1]:.5f}) .. "
              f"({pts[-1][0]:.5f}, {pts[-1][1]:.5f})")

    print(f"total {time.time() - t0:.1f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
