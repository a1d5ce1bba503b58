"""Build one fixed-delta parameter-plane diagram and write it to SVG.

Traces the closed-form curve sections, optionally the continued
saddle-loop and fold-of-cycles curves, optionally the region census with
its transition audit, and saves the figure next to a CSV of the curve
samples.

Usage:
    python3 scripts/draw_slice.py --delta 0.25 --out slice25
    python3 scripts/draw_slice.py --delta 0.05 --nonlocal --regions 20
"""

import argparse
import sys
import time
import warnings

from hlbif.atlas import build_slice, default_window, transition_audit
from hlbif.bifcurves import slice_section
from hlbif.nonlocal_curves import nonlocal_sections
from hlbif.svgplot import render_curves


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, required=True)
    ap.add_argument("--out", default=None, help="output stem (default slice<delta>)")
    ap.add_argument("--nonlocal", action="store_true", dest="nonlocal_",
                    help="include continued nonlocal curves (minutes)")
    ap.add_argument("--regions", type=int, default=None, metavar="N",
                    help="also classify portraits on an N x N grid and audit")
    ap.add_argument("--samples", type=int, default=400)
    args = ap.parse_args()

    stem = args.out or f"slice{args.delta:g}".replace(".", "p")
    window = default_window(args.delta)
    t0 = time.time()

    if args.regions:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            diagram = build_slice(
                args.delta, window=window, resolution=args.regions,
                curve_samples=args.samples,
                include_nonlocal=args.nonlocal_)
        curves = diagram.curves
        print(f"regions: {len(diagram.regions)}")
        for rid, (sample, sig) in enumerate(diagram.regions):
            print(f"  {rid:3d} {sig.region_label:9s} at a={sample.a:.5f} "
                  f"beta={sample.beta:.5f}  eqs={sig.equilibria} "
                  f"cycles={sig.cycles}")
        for w in diagram.warnings:
            print(f"  warning: {w}")
        violations = transition_audit(diagram)
        print(f"transition audit: {len(violations)} violations")
        for v in violations:
            print(f"  {v}")
    else:
        curves = slice_section(args.delta, window[0], window[1],
                               n=args.samples)
        if args.nonlocal_:
            warn: list[str] = []
            curves += nonlocal_sections(args.delta, window=window,
                                        warnings_out=warn)
            for w in warn:
                print(f"  warning: {w}")

    svg = render_curves(curves, window,
                        title=f"parameter slice, delta = {args.delta:g}")
    with open(f"{stem}.svg", "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {stem}.svg  "
          f"({sum(len(c.points) for c in curves)} curve points, "
          f"{time.time() - t0:.1f} s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
