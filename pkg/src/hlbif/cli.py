"""Command-line surface: one subcommand per analysis, deterministic file
emission.

Subcommands: equilibria, curves, lyapunov, cycles, loop, slice, classify,
sweep.  Output formats: csv, structured (JSON lines), svg (where a figure
makes sense).  Floats are printed with 17 significant digits so every
emitted value round-trips exactly.

Configuration can come from a ``key = value`` file (``--config``); flags
given on the command line override file entries.  The worker count
resolves as: ``--workers`` flag, else the HLBIF_WORKERS environment
variable, else the config file, else 1.

Exit codes: 0 success, 1 domain errors (invalid parameter regions,
non-rough points), 2 numerical failures (seeding, continuation, or
convergence breakdowns).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .atlas import (
    NonRoughParameters,
    build_slice,
    classify_portrait,
    default_window,
    transition_audit,
)
from .bifcurves import (
    BifCurve,
    BifKind,
    gh_points,
    hopf_curve,
    slice_section,
)
from .lyapunov import (
    OracleInconclusive,
    canonicalize,
    first_focal_value,
    hopf_stability_poly,
)
from .model import (
    DomainError,
    Params,
    classify_equilibrium,
    jacobian_entries,
    solve_equilibria,
    solve_equilibria_exact,
)
from .nonlocal_curves import (
    ContinuationStall,
    MeasureFailure,
    SeedFailure,
    double_cycle_section,
    loop_section,
    nonlocal_sections,
)
from .svgplot import SvgCanvas, render_curves

__all__ = ["main"]

NUMERICAL_FAILURES = (
    SeedFailure,
    ContinuationStall,
    MeasureFailure,
    OracleInconclusive,
    ArithmeticError,
)


# ----------------------------------------------------------------------
# deterministic formatting


def fmt17(v) -> str:
    """17-significant-digit decimal: parses back to the identical float."""
    return f"{float(v):.17g}"


def _field(v) -> str:
    """One CSV/structured field: floats via fmt17, None empty, rest str."""
    if v is None:
        return ""
    if isinstance(v, float):
        return fmt17(v)
    return str(v)


def emit_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_field(v) for v in r])
    return buf.getvalue()


def emit_structured(records: Sequence[Sequence[tuple]]) -> str:
    """JSON lines; each record is an ordered (key, value) sequence.

    Numbers are emitted through the same 17-significant-digit rule as
    CSV so both formats round-trip identically.
    """
    lines = []
    for rec in records:
        parts = []
        for k, v in rec:
            if isinstance(v, float):
                sv = fmt17(v)
                if sv in ("inf", "-inf", "nan"):
                    sv = json.dumps(sv)
            elif isinstance(v, bool) or v is None:
                sv = json.dumps(v)
            elif isinstance(v, int):
                sv = str(v)
            elif isinstance(v, (list, tuple)):
                sv = json.dumps([str(x) for x in v])
            else:
                sv = json.dumps(str(v))
            parts.append(f"{json.dumps(k)}: {sv}")
        lines.append("{" + ", ".join(parts) + "}")
    return "\n".join(lines) + ("\n" if lines else "")


# ----------------------------------------------------------------------
# argument plumbing


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = float(lo_s), float(hi_s)
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"expected lo..hi, got {text!r}") from e
    if not hi > lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _parse_exact(text: str) -> Fraction:
    """Rational from 'p/q' verbatim, or the nearest denominator<=1000
    rational to a decimal literal (so 0.6667 means 2/3)."""
    try:
        if "/" in text:
            return Fraction(text)
        return Fraction(text).limit_denominator(1000)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from e


def _parse_kinds(text: str) -> list[BifKind]:
    by_value = {k.value: k for k in BifKind}
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok not in by_value:
            raise argparse.ArgumentTypeError(
                f"unknown curve kind {tok!r}; choices: "
                + ",".join(sorted(by_value)))
        out.append(by_value[tok])
    return out


def _read_config(path: str) -> dict[str, str]:
    """Simple key = value file; # starts a comment; blank lines ignored."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(
                    f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, val = line.split("=", 1)
            values[key.strip().replace("_", "-")] = val.strip()
    return values


_FLAG_ONLY = {"exact", "nonlocal", "audit"}  # boolean config keys


def _config_argv(values: dict[str, str]) -> list[str]:
    """Config entries as synthetic flags, prepended so real flags win."""
    argv: list[str] = []
    for key, val in values.items():
        if key == "workers":  # handled separately (env override ordering)
            continue
        if key in _FLAG_ONLY:
            if val.lower() in ("1", "true", "yes", "on"):
                argv.append(f"--{key}")
            elif val.lower() not in ("0", "false", "no", "off"):
                raise DomainError(f"config key {key}: boolean expected, got {val!r}")
        else:
            argv.extend([f"--{key}", val])
    return argv


def _resolve_workers(flag_value: Optional[int],
                     config: dict[str, str]) -> int:
    if flag_value is not None:
        n = flag_value
    elif os.environ.get("HLBIF_WORKERS"):
        try:
            n = int(os.environ["HLBIF_WORKERS"])
        except ValueError:
            raise DomainError(
                f"HLBIF_WORKERS must be an integer, got "
                f"{os.environ['HLBIF_WORKERS']!r}")
    elif "workers" in config:
        try:
            n = int(config["workers"])
        except ValueError:
            raise DomainError(
                f"config key workers must be an integer, got "
                f"{config['workers']!r}")
    else:
        n = 1
    if n < 1:
        raise DomainError(f"worker count must be >= 1, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="hlbif",
        description="Bifurcation-structure toolkit for a scaled "
                    "Holling-Leslie predator-prey model.",
    )
    top.add_argument("--config", help="key = value configuration file")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, formats=("csv", "structured")):
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--output", default="-",
                       help="output path ('-' = stdout)")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: HLBIF_WORKERS "
                            "environment variable, else 1)")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for quasi-random sampling")

    p = sub.add_parser("equilibria", help="interior steady states at one "
                                          "parameter point")
    p.add_argument("--a", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--delta", required=True)
    p.add_argument("--exact", action="store_true",
                   help="rational-arithmetic multiple-root report "
                        "(decimal inputs snap to denominator <= 1000)")
    common(p)

    p = sub.add_parser("curves", help="closed-form bifurcation curve "
                                      "sections of a fixed-delta slice")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--kind", type=_parse_kinds, default=None,
                   help="comma-separated curve kinds (default: all local)")
    p.add_argument("--a", type=_parse_range, default=None, metavar="LO..HI")
    p.add_argument("--beta", type=_parse_range, default=None,
                   metavar="LO..HI")
    p.add_argument("--res", type=int, default=400,
                   help="samples per curve")
    common(p, formats=("csv", "structured", "svg"))

    p = sub.add_parser("lyapunov", help="first focal quantity along the "
                                        "Hopf locus")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--scan-tau", type=_parse_range, required=True,
                   metavar="LO..HI")
    p.add_argument("--res", type=int, default=200,
                   help="scan samples")
    common(p, formats=("csv", "structured", "svg"))

    p = sub.add_parser("cycles", help="limit cycles at one parameter point")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--n-scan", type=int, default=64,
                   help="radial scan density per focus")
    common(p)

    p = sub.add_parser("loop", help="nonlocal curve (saddle loop or fold "
                                    "of cycles) by continuation")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--kind", choices=("L", "C"), default="L",
                   help="L = saddle loop, C = fold of cycles")
    p.add_argument("--arc-step", type=float, default=0.02)
    p.add_argument("--max-points", type=int, default=400)
    p.add_argument("--a", type=_parse_range, default=None, metavar="LO..HI")
    p.add_argument("--beta", type=_parse_range, default=None,
                   metavar="LO..HI")
    common(p, formats=("csv", "structured", "svg"))

    p = sub.add_parser("slice", help="complete fixed-delta parameter-plane "
                                     "diagram")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--a", type=_parse_range, default=None, metavar="LO..HI")
    p.add_argument("--beta", type=_parse_range, default=None,
                   metavar="LO..HI")
    p.add_argument("--res", type=int, default=400,
                   help="samples per curve")
    p.add_argument("--nonlocal", action="store_true", dest="nonlocal_",
                   help="include the continued saddle-loop and "
                        "fold-of-cycles sections")
    p.add_argument("--regions", type=int, default=None, metavar="N",
                   help="classify portraits on an N x N cell grid and "
                        "audit region transitions")
    common(p, formats=("csv", "structured", "svg"))

    p = sub.add_parser("classify", help="rough phase-portrait signature at "
                                        "one parameter point")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--n-scan", type=int, default=40)
    common(p)

    p = sub.add_parser("sweep", help="portrait census over quasi-random "
                                     "parameter samples")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--a", type=_parse_range, required=True, metavar="LO..HI")
    p.add_argument("--beta", type=_parse_range, required=True,
                   metavar="LO..HI")
    p.add_argument("--n", type=int, default=64, help="sample count")
    p.add_argument("--n-scan", type=int, default=40)
    common(p)

    return top


# ----------------------------------------------------------------------
# quasi-random sampling


def _halton(i: int, base: int) -> float:
    f, r = 1.0, 0.0
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


def halton_points(
    n: int, seed: int,
    a_range: tuple[float, float], b_range: tuple[float, float],
) -> list[tuple[float, float]]:
    """Low-discrepancy (a, beta) samples; the seed rotates the sequence
    (same seed = same points, independent of how work is distributed)."""
    import random

    rng = random.Random(seed)
    sx, sy = rng.random(), rng.random()
    out = []
    for i in range(n):
        ux = (_halton(i + 1, 2) + sx) % 1.0
        uy = (_halton(i + 1, 3) + sy) % 1.0
        out.append((
            a_range[0] + ux * (a_range[1] - a_range[0]),
            b_range[0] + uy * (b_range[1] - b_range[0]),
        ))
    return out


# ----------------------------------------------------------------------
# curve row emission (shared by curves / loop / slice)

CURVE_HEADER = ("kind", "tau", "a", "beta", "delta", "x0", "residual")


def _curve_rows(curves: Sequence[BifCurve]) -> list[tuple]:
    rows = []
    for c in curves:
        for q in c.points:
            rows.append((
                c.kind.value,
                None if q.tau is None else float(q.tau),
                float(q.params.a), float(q.params.beta),
                float(q.params.delta),
                None if q.x0 is None else float(q.x0),
                float(q.residual),
            ))
    return rows


def _curve_records(curves: Sequence[BifCurve]) -> list[list[tuple]]:
    recs = []
    for c in curves:
        for q in c.points:
            recs.append([
                ("record", "curve-point"), ("kind", c.kind.value),
                ("label", c.label),
                ("tau", None if q.tau is None else float(q.tau)),
                ("a", float(q.params.a)), ("beta", float(q.params.beta)),
                ("delta", float(q.params.delta)),
                ("x0", None if q.x0 is None else float(q.x0)),
                ("residual", float(q.residual)),
            ])
    return recs


def _window_for(args, delta: float) -> tuple:
    if args.a is not None and args.beta is not None:
        return (args.a, args.beta)
    win = default_window(delta)
    return (args.a or win[0], args.beta or win[1])


# ----------------------------------------------------------------------
# subcommand implementations (each returns the output text)


def _run_equilibria(args, workers: int) -> str:
    if args.exact:
        return _run_equilibria_exact(args)
    p = Params(a=float(args.a), beta=float(args.beta),
               delta=float(args.delta))
    eqs = solve_equilibria(p)
    if args.format == "csv":
        rows = [(p.a, p.beta, p.delta, e.x0, e.y0, e.multiplicity,
                 e.det_j, e.tr_j, e.classification.value) for e in eqs]
        return emit_csv(("a", "beta", "delta", "x0", "y0", "multiplicity",
                         "det", "tr", "class"), rows)
    recs = [[("record", "equilibrium"), ("a", p.a), ("beta", p.beta),
             ("delta", p.delta), ("x0", e.x0), ("y0", e.y0),
             ("multiplicity", e.multiplicity), ("det", e.det_j),
             ("tr", e.tr_j), ("class", e.classification.value)]
            for e in eqs]
    return emit_structured(recs)


def _run_equilibria_exact(args) -> str:
    a, beta, delta = (_parse_exact(args.a), _parse_exact(args.beta),
                      _parse_exact(args.delta))
    if a <= 0 or beta <= 0 or delta <= 0:
        raise DomainError("exact mode needs positive a, beta, delta")
    roots = solve_equilibria_exact(a, beta, delta)
    records: list[list[tuple]] = []
    rows: list[tuple] = []
    if roots is None:
        # all roots simple: no rational multiple-root structure; report
        # the float solution tagged with the snapped rationals
        p = Params(a=float(a), beta=float(beta), delta=float(delta))
        for e in solve_equilibria(p):
            records.append([
                ("record", "equilibrium"), ("exact", False),
                ("a", str(a)), ("beta", str(beta)), ("delta", str(delta)),
                ("x0", e.x0), ("y0", e.y0),
                ("multiplicity", e.multiplicity), ("det", e.det_j),
                ("tr", e.tr_j), ("class", e.classification.value)])
            rows.append((float(a), float(beta), float(delta), e.x0, e.y0,
                         e.multiplicity, e.det_j, e.tr_j,
                         e.classification.value))
    else:
        for x0, mult in roots:
            y0 = delta * x0 / beta
            j11, j12, j21, j22 = jacobian_entries(a, beta, delta, x0, y0)
            det = j11 * j22 - j12 * j21
            tr = j11 + j22
            curvature = 6 * x0 - 2  # F'' of the equilibrium cubic
            cls = classify_equilibrium(float(det), float(tr),
                                       float(curvature))
            records.append([
                ("record", "equilibrium"), ("exact", True),
                ("a", str(a)), ("beta", str(beta)), ("delta", str(delta)),
                ("x0", str(x0)), ("y0", str(y0)),
                ("multiplicity", mult), ("det", str(det)), ("tr", str(tr)),
                ("class", cls.value)])
            rows.append((float(a), float(beta), float(delta), float(x0),
                         float(y0), mult, float(det), float(tr),
                         cls.value))
    if args.format == "csv":
        return emit_csv(("a", "beta", "delta", "x0", "y0", "multiplicity",
                         "det", "tr", "class"), rows)
    return emit_structured(records)


def _run_curves(args, workers: int) -> str:
    window = _window_for(args, args.delta)
    curves = slice_section(args.delta, window[0], window[1], n=args.res)
    if args.kind is not None:
        wanted = set(args.kind)
        curves = [c for c in curves if c.kind in wanted]
    if args.format == "svg":
        return render_curves(
            curves, window,
            title=f"bifurcation curves, delta = {args.delta:g}")
    if args.format == "structured":
        return emit_structured(_curve_records(curves))
    return emit_csv(CURVE_HEADER, _curve_rows(curves))


def _run_lyapunov(args, workers: int) -> str:
    lo, hi = args.scan_tau
    delta = args.delta
    samples = []
    for i in range(args.res):
        tau = lo + (hi - lo) * i / max(args.res - 1, 1)
        got = hopf_curve(tau, delta)
        if got is None:
            continue
        p, x0 = got
        eqs = solve_equilibria(p)
        e = min(eqs, key=lambda q: abs(q.x0 - x0))
        try:
            l1 = float(first_focal_value(canonicalize(p, e).coeffs))
        except DomainError:
            continue
        samples.append((tau, p.a, p.beta, delta, x0, l1,
                        float(hopf_stability_poly(delta, x0))))
    roots = [g for g in gh_points(delta) if lo <= g.x0 <= hi]
    if args.format == "svg":
        if not samples:
            raise DomainError(
                f"no admissible Hopf points for delta={delta} in "
                f"tau range {lo}..{hi}")
        ys = [s[5] for s in samples]
        pad = 0.1 * (max(ys) - min(ys) or 1.0)
        canvas = SvgCanvas((lo, hi), (min(ys) - pad, max(ys) + pad))
        canvas.axes(xlabel="tau (equilibrium abscissa)",
                    ylabel="first focal quantity")
        if min(ys) < 0 < max(ys):
            canvas.polyline([(lo, 0.0), (hi, 0.0)], "#bbbbbb",
                            stroke_width=1.0)
        canvas.polyline([(s[0], s[5]) for s in samples], "#d62728")
        for g in roots:
            canvas.marker(g.x0, 0.0, "circle", "#d62728")
        canvas.legend([("#d62728", None, None, "l1",
                        "first focal quantity"),
                       ("#d62728", None, "circle", "GH",
                        "degenerate Hopf root")])
        return canvas.render(
            title=f"focal quantity along the Hopf locus, delta = {delta:g}")
    if args.format == "structured":
        recs = [[("record", "hopf-sample"), ("tau", s[0]), ("a", s[1]),
                 ("beta", s[2]), ("delta", s[3]), ("x0", s[4]),
                 ("l1", s[5]), ("stability_poly", s[6])] for s in samples]
        recs += [[("record", "degenerate-hopf"), ("tau", g.x0),
                  ("a", g.params.a), ("beta", g.params.beta),
                  ("delta", delta), ("l2", g.l2)] for g in roots]
        return emit_structured(recs)
    return emit_csv(("tau", "a", "beta", "delta", "x0", "l1",
                     "stability_poly"), samples)


CYCLE_HEADER = ("a", "beta", "delta", "center_x0", "radius", "period",
                "multiplier", "stability")


def _run_cycles(args, workers: int) -> str:
    from .atlas import _collect_cycles

    p = Params(a=args.a, beta=args.beta, delta=args.delta)
    eqs = solve_equilibria(p)
    found = _collect_cycles(p, eqs, args.n_scan, neutral_tol=1e-6)
    rows = []
    for enclosed, cyc in found:
        center = eqs[enclosed[0]].x0 if enclosed else None
        rows.append((p.a, p.beta, p.delta, center, cyc.radius, cyc.period,
                     cyc.floquet_multiplier, cyc.stability.name.lower()))
    if args.format == "structured":
        recs = []
        for (enclosed, cyc), row in zip(found, rows):
            recs.append([
                ("record", "limit-cycle"), ("a", row[0]), ("beta", row[1]),
                ("delta", row[2]), ("center_x0", row[3]),
                ("radius", row[4]), ("period", row[5]),
                ("multiplier", row[6]), ("stability", row[7]),
                ("encloses", list(enclosed))])
        return emit_structured(recs)
    return emit_csv(CYCLE_HEADER, rows)


def _run_loop(args, workers: int) -> str:
    window = None
    if args.a is not None and args.beta is not None:
        window = (args.a, args.beta)
    if args.kind == "L":
        curve = loop_section(args.delta, window=window,
                             arc_step=args.arc_step,
                             max_points=args.max_points)
    else:
        curve = double_cycle_section(args.delta, window=window,
                                     arc_step=args.arc_step,
                                     max_points=args.max_points)
    if args.format == "svg":
        win = window or default_window(args.delta)
        base = slice_section(args.delta, win[0], win[1], n=400)
        return render_curves(
            base + [curve], win,
            title=f"continued nonlocal curve ({args.kind}), "
                  f"delta = {args.delta:g}")
    if args.format == "structured":
        return emit_structured(_curve_records([curve]))
    return emit_csv(CURVE_HEADER, _curve_rows([curve]))


def _signature_fields(sig) -> list[tuple]:
    return [
        ("region_label", sig.region_label),
        ("equilibria", ["{}:{}".format(*e) for e in sig.equilibria]),
        ("cycles", ["{}:{}".format(*c) for c in sig.cycles]),
        ("connections", list(sig.connections)),
    ]


def _run_classify(args, workers: int) -> str:
    p = Params(a=args.a, beta=args.beta, delta=args.delta)
    sig = classify_portrait(p, n_scan=args.n_scan)
    if args.format == "csv":
        row = (p.a, p.beta, p.delta, sig.region_label,
               ";".join("{}:{}".format(*e) for e in sig.equilibria),
               ";".join("{}:{}".format(*c) for c in sig.cycles),
               ";".join(sig.connections))
        return emit_csv(("a", "beta", "delta", "region_label", "equilibria",
                         "cycles", "connections"), [row])
    rec = [("record", "portrait"), ("a", p.a), ("beta", p.beta),
           ("delta", p.delta)] + _signature_fields(sig)
    return emit_structured([rec])


def _run_slice(args, workers: int) -> str:
    delta = args.delta
    window = _window_for(args, delta)
    if args.regions is not None:
        import warnings as _warnings

        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore")
            diagram = build_slice(
                delta, window=window, resolution=args.regions,
                curve_samples=args.res,
                include_nonlocal=args.nonlocal_, workers=workers)
        violations = transition_audit(diagram)
        if args.format == "svg":
            return render_curves(
                diagram.curves, window,
                title=f"parameter slice, delta = {delta:g} "
                      f"({len(diagram.regions)} regions)")
        if args.format == "structured":
            recs = []
            for rid, (sample, sig) in enumerate(diagram.regions):
                recs.append([("record", "region"), ("id", rid),
                             ("a", sample.a), ("beta", sample.beta),
                             ("delta", delta)] + _signature_fields(sig))
            for v in violations:
                recs.append([("record", "transition-violation"),
                             ("cell_a", str(v.cell_a)),
                             ("cell_b", str(v.cell_b)), ("kind", v.kind),
                             ("expected", v.expected),
                             ("observed", v.observed)])
            for w in diagram.warnings:
                recs.append([("record", "warning"), ("message", w)])
            recs.append([("record", "audit"),
                         ("regions", len(diagram.regions)),
                         ("violations", len(violations))])
            return emit_structured(recs)
        rows = []
        for rid, (sample, sig) in enumerate(diagram.regions):
            rows.append((rid, sample.a, sample.beta, delta,
                         sig.region_label,
                         ";".join("{}:{}".format(*e) for e in sig.equilibria),
                         ";".join("{}:{}".format(*c) for c in sig.cycles),
                         ";".join(sig.connections)))
        return emit_csv(("id", "a", "beta", "delta", "region_label",
                         "equilibria", "cycles", "connections"), rows)
    curves = slice_section(delta, window[0], window[1], n=args.res)
    if args.nonlocal_:
        warn: list[str] = []
        curves += nonlocal_sections(delta, window=window, warnings_out=warn)
        for w in warn:
            print(f"warning: {w}", file=sys.stderr)
    if args.format == "svg":
        return render_curves(curves, window,
                             title=f"parameter slice, delta = {delta:g}")
    if args.format == "structured":
        return emit_structured(_curve_records(curves))
    return emit_csv(CURVE_HEADER, _curve_rows(curves))


def _sweep_worker(job) -> str:
    a, beta, delta, n_scan = job
    import warnings as _warnings

    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")
        try:
            return classify_portrait(
                Params(a=a, beta=beta, delta=delta),
                n_scan=n_scan).region_label
        except NonRoughParameters:
            return "nonrough"
        except (DomainError, RuntimeError, ArithmeticError) as e:
            return f"failed:{type(e).__name__}"


def _run_sweep(args, workers: int) -> str:
    pts = halton_points(args.n, args.seed, args.a, args.beta)
    jobs = [(a, b, args.delta, args.n_scan) for a, b in pts]
    labels: list[str]
    if workers > 1:
        import concurrent.futures

        try:
            with concurrent.futures.ProcessPoolExecutor(
                max_workers=workers
            ) as pool:
                labels = list(pool.map(_sweep_worker, jobs))
        except (OSError, concurrent.futures.process.BrokenProcessPool):
            labels = [_sweep_worker(j) for j in jobs]
    else:
        labels = [_sweep_worker(j) for j in jobs]
    rows = [(a, b, args.delta, lab)
            for (a, b), lab in zip(pts, labels)]
    if args.format == "structured":
        recs = [[("record", "sweep-sample"), ("a", r[0]), ("beta", r[1]),
                 ("delta", r[2]), ("region_label", r[3])] for r in rows]
        return emit_structured(recs)
    return emit_csv(("a", "beta", "delta", "region_label"), rows)


_HANDLERS = {
    "equilibria": _run_equilibria,
    "curves": _run_curves,
    "lyapunov": _run_lyapunov,
    "cycles": _run_cycles,
    "loop": _run_loop,
    "slice": _run_slice,
    "classify": _run_classify,
    "sweep": _run_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    # two-pass parse: pull --config (valid before or after the
    # subcommand) first, fold its entries in as synthetic flags
    # prepended after the subcommand, so real flags win
    cfg_path: Optional[str] = None
    while "--config" in argv:
        at = argv.index("--config")
        if at + 1 >= len(argv):
            parser.error("argument --config: expected one argument")
        cfg_path = argv[at + 1]
        del argv[at: at + 2]

    try:
        config: dict[str, str] = {}
        if cfg_path is not None:
            try:
                config = _read_config(cfg_path)
            except OSError as e:
                raise DomainError(f"cannot read config file: {e}") from e
        if config:
            cmd_at = next(
                (i for i, t in enumerate(argv) if not t.startswith("-")
                 and (i == 0 or argv[i - 1] != "--config")), None)
            if cmd_at is None:
                raise DomainError("config file given but no subcommand")
            synthetic = _config_argv(config)
            argv = argv[: cmd_at + 1] + synthetic + argv[cmd_at + 1:]
        args = parser.parse_args(argv)
        workers = _resolve_workers(getattr(args, "workers", None), config)
        text = _HANDLERS[args.command](args, workers)
    except DomainError as e:
        print(f"error (domain): {e}", file=sys.stderr)
        return 1
    except NUMERICAL_FAILURES as e:
        print(f"error (numerical): {type(e).__name__}: {e}",
              file=sys.stderr)
        return 2

    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
