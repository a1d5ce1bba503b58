"""Measure the cycle-amplitude growth law across a supercritical Hopf
crossing.

Picks a Hopf point with negative first focal quantity, walks a
transversal path into the cycle-bearing side, measures the detected
limit-cycle radius at each distance, and fits the growth exponent
(square-root expected).

Usage:
    python3 scripts/hopf_amplitude.py --delta 0.25 --tau 0.4
"""

import argparse
import math
import sys

from hlbif.bifcurves import hopf_curve
from hlbif.dynamics import find_limit_cycles
from hlbif.lyapunov import canonicalize, first_focal_value
from hlbif.model import Params, solve_equilibria


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, default=0.25)
    ap.add_argument("--tau", type=float, default=0.4)
    ap.add_argument("--dists", type=int, default=6,
                    help="number of crossing distances")
    args = ap.parse_args()

    got = hopf_curve(args.tau, args.delta)
    if got is None:
        print(f"tau={args.tau} inadmissible at delta={args.delta}")
        return 1
    p0, x0 = got
    eqs = solve_equilibria(p0)
    e0 = min(eqs, key=lambda q: abs(q.x0 - x0))
    l1 = first_focal_value(canonicalize(p0, e0).coeffs)
    print(f"Hopf point: a={p0.a:.6f} beta={p0.beta:.6f} "
          f"delta={p0.delta:g} x0={x0:.6f} l1={l1:.4g}")
    if l1 >= 0:
        print("first focal quantity is nonnegative here; pick another tau")
        return 1

    rows = []
    for k in range(args.dists):
        dist = 2e-4 * 2.0 ** k
        p = Params(a=p0.a * (1.0 - dist), beta=p0.beta, delta=p0.delta)
        eq = min(solve_equilibria(p), key=lambda q: abs(q.x0 - x0))
        cycles = find_limit_cycles(p, eq, r_max=0.2, n_scan=64)
        if not cycles:
            print(f"  dist={dist:.2e}: no cycle found")
            continue
        amp = cycles[0].radius
        rows.append((dist, amp))
        print(f"  dist={dist:.2e}  amplitude={amp:.6e}")

    if len(rows) >= 3:
        xs = [math.log(d) for d, _ in rows]
        ys = [math.log(a) for _, a in rows]
        n = len(xs)
        sx, sy = sum(xs), sum(ys)
        sxx = sum(x * x for x in xs)
        sxy = sum(x * y for x, y in zip(xs, ys))
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
        print(f"fitted exponent: {slope:.4f} (square-root law = 0.5)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
