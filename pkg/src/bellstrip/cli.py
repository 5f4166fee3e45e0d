"""Command-line front end: regime scans, foliation export, evaluation, verification, SVG."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .boundary import BoundaryPair, DiscriminantClass, canonicalize
from .patches import HerringboneLeaf, NotEvaluable, RectLeaf, SimpleLeaf
from .regimes import Foliation, Regime, build_foliation, critical_epsilons, find_epsilon2
from .verify import Tolerances, VerifyConfig, corrupt_foliation, verify_foliation, zero_level_heights

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_SCOPE = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- config parsing ------------------------------------------------------------------


def parse_boundary(arg: str) -> BoundaryPair:
    """A JSON file path, inline JSON {"f_plus": [...], "f_minus": [...]}, or 'a3,a2,a1,a0;b3,b2,b1,b0'."""
    text = arg
    p = Path(arg)
    try:
        if p.is_file():
            text = p.read_text()
    except OSError:
        pass
    text = text.strip()
    try:
        if text.startswith("{"):
            pair = BoundaryPair.from_json(text)
        else:
            plus, minus = text.split(";")
            pair = BoundaryPair.from_coeffs([float(v) for v in plus.split(",")], [float(v) for v in minus.split(",")])
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"invalid boundary {arg!r}: {exc}") from None
    coeffs = pair.plus.coeffs() + pair.minus.coeffs()
    if not all(math.isfinite(c) for c in coeffs):
        raise UsageError("boundary coefficients must be finite")
    return pair


def parse_eps_range(arg: str) -> list[float]:
    try:
        a, b, step = (float(v) for v in arg.split(":"))
    except ValueError:
        raise UsageError(f"--eps-range expects a:b:step, got {arg!r}") from None
    if not (a > 0 and a < b and step > 0):
        raise UsageError("--eps-range needs 0 < a < b and step > 0")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    # trim binary noise so file names and tables stay readable
    return [float(f"{a + k * step:.12g}") for k in range(n)]


def eps_values(args) -> list[float]:
    if getattr(args, "eps_range", None):
        return parse_eps_range(args.eps_range)
    if args.eps is None:
        raise UsageError("one of --eps or --eps-range is required")
    if not args.eps > 0:
        raise UsageError("--eps must be positive")
    return [args.eps]


def thread_cap() -> int:
    raw = os.environ.get("BELLMAN_STRIP_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def fan_out(fn, items: list):
    """Order-preserving map over a process pool bounded by the thread cap."""
    workers = min(thread_cap(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def tolerances(args) -> Tolerances:
    base = Tolerances()
    kw = {}
    for name in ("value", "gradient", "concavity", "ordering", "fd"):
        v = getattr(args, f"tol_{name}", None)
        kw[name] = getattr(base, name) if v is None else v
    return Tolerances(**kw)


def _write(out_dir: Path | None, name: str, text: str):
    if out_dir is None:
        sys.stdout.write(text)
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)


# -- regimes ---------------------------------------------------------------------------


def _regime_job(job):
    text, eps = job
    return build_foliation(BoundaryPair.from_json(text), eps).regime.value


def timeline(pair: BoundaryPair) -> tuple[list[dict], list[dict], list[str]]:
    """Critical widths with their names, and the regime on each interval between them."""
    canon, _ = canonicalize(pair)
    ce = critical_epsilons(canon)
    notes = list(ce.flags)
    if canon.equal_leading:
        reg = build_foliation(pair, 1.0).regime.value
        notes.append("equal leading coefficients: no critical widths")
        return [], [{"from": 0.0, "to": math.inf, "regime": reg}], notes
    if canon.discriminant_class() is DiscriminantClass.ZERO and canon.minus.a3 < 0:
        notes.append("zero discriminant: rectangle regime for all eps")
        return [], [{"from": 0.0, "to": math.inf, "regime": Regime.ZERO_DISC_RECT.value}], notes
    rows = []
    names = {
        "eps0_plus": "pocket birth on the upper boundary",
        "eps1_plus": "upper node to spiral",
        "eps0_minus": "pocket birth on the lower boundary",
        "eps1_minus": "lower node to spiral",
    }
    for key, label in names.items():
        v = getattr(ce, key)
        if v is not None:
            rows.append({"name": key, "eps": v, "event": label})
    eps2 = find_epsilon2(canon)
    if eps2 is not None and eps2 > 0:
        rows.append({"name": "eps2", "eps": eps2, "event": "pockets merge into a rectangle"})
    rows.sort(key=lambda r: (r["eps"], r["name"]))
    cuts = sorted({r["eps"] for r in rows if r["eps"] > 0})
    if not cuts:
        return rows, [{"from": 0.0, "to": math.inf, "regime": _regime_job((pair.to_json(), 1.0))}], notes
    edges = [0.0] + cuts + [math.inf]
    probes = [0.5 * (a + b) if math.isfinite(b) else 2.0 * a for a, b in zip(edges[:-1], edges[1:])]
    regs = fan_out(_regime_job, [(pair.to_json(), e) for e in probes])
    intervals = [{"from": lo, "to": hi, "regime": r} for lo, hi, r in zip(edges[:-1], edges[1:], regs)]
    merged = []
    for iv in intervals:
        if merged and merged[-1]["regime"] == iv["regime"]:
            merged[-1]["to"] = iv["to"]
        else:
            merged.append(dict(iv))
    return rows, merged, notes


def cmd_regimes(args) -> int:
    pair = parse_boundary(args.boundary)
    out = Path(args.out) if args.out else None
    if args.eps is not None or args.eps_range:
        eps = eps_values(args)
        regs = fan_out(_regime_job, [(pair.to_json(), e) for e in eps])
        if args.format == "json":
            _write(out, "regimes.json", json.dumps([{"eps": e, "regime": r} for e, r in zip(eps, regs)], indent=2) + "\n")
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["eps", "regime"])
            w.writerows([[repr(e), r] for e, r in zip(eps, regs)])
            _write(out, "regimes.csv", buf.getvalue())
        return EXIT_OK
    rows, intervals, notes = timeline(pair)
    if args.format == "json":
        clean = [{**iv, "to": None if math.isinf(iv["to"]) else iv["to"]} for iv in intervals]
        _write(out, "timeline.json", json.dumps({"criticals": rows, "intervals": clean, "notes": notes}, indent=2) + "\n")
        return EXIT_OK
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "name", "eps_from", "eps_to", "label"])
        for r in rows:
            w.writerow(["critical", r["name"], repr(r["eps"]), "", r["event"]])
        for iv in intervals:
            w.writerow(["interval", "", repr(iv["from"]), repr(iv["to"]), iv["regime"]])
        _write(out, "timeline.csv", buf.getvalue())
        return EXIT_OK
    lines = [f"# {n}" for n in notes]
    if not rows:
        lines.append("no critical widths")
    for r in rows:
        lines.append(f"{r['name']:<11} = {r['eps']:.12g}  ({r['event']})")
    for iv in intervals:
        lines.append(f"eps in ({iv['from']:.9g}, {iv['to']:.9g}): {iv['regime']}")
    _write(out, "timeline.txt", "\n".join(lines) + "\n")
    return EXIT_OK


# -- foliate / eval ----------------------------------------------------------------------


def _foliate_job(job):
    text, eps = job
    fol = build_foliation(BoundaryPair.from_json(text), eps)
    data = fol.to_dict()
    data["boundary"] = json.loads(text)
    curves = {name: c.to_csv() for name, c in sorted(fol.curves.items())}
    return eps, json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n", curves


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def cmd_foliate(args) -> int:
    pair = parse_boundary(args.boundary)
    eps = eps_values(args)
    out = Path(args.out) if args.out else None
    results = fan_out(_foliate_job, [(pair.to_json(), e) for e in eps])
    for e, text, curves in results:
        tag = f"eps={e!r}"
        _write(out, f"foliation_{tag}.json", text)
        if out is not None:
            for name, body in curves.items():
                _write(out, f"spine_{name}_{tag}.csv", body)
    return EXIT_OK


def read_points(args) -> np.ndarray:
    text = ""
    if args.points_file:
        text = Path(args.points_file).read_text()
    elif args.points:
        text = args.points.replace(";", "\n")
    else:
        text = sys.stdin.read()
    pts = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line[0].isalpha():
            continue
        try:
            a, b = (float(v) for v in line.replace(" ", "").split(",")[:2])
        except ValueError:
            raise UsageError(f"bad point {line!r}") from None
        pts.append((a, b))
    return np.array(pts, dtype=float).reshape(-1, 2)


def cmd_eval(args) -> int:
    pair = parse_boundary(args.boundary)
    if args.eps is None or not args.eps > 0:
        raise UsageError("eval needs a positive --eps")
    fol = build_foliation(pair, args.eps)
    pts = read_points(args)
    if not fol.regime.evaluable:
        print(f"regime {fol.regime.value} is outside the evaluation scope", file=sys.stderr)
        return EXIT_SCOPE
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x1", "x2", "value", "d_x1", "d_x2", "status"])
    inside = np.abs(pts[:, 1]) <= fol.eps * (1 + 1e-12) if len(pts) else np.zeros(0, bool)
    vals = np.full(len(pts), np.nan)
    g1 = np.full(len(pts), np.nan)
    g2 = np.full(len(pts), np.nan)
    if inside.any():
        vals[inside] = fol.value(pts[inside, 0], pts[inside, 1])
        a, b = fol.gradient(pts[inside, 0], pts[inside, 1])
        g1[inside], g2[inside] = a, b
    for k, (x1, x2) in enumerate(pts.tolist()):
        if inside[k]:
            w.writerow([repr(x1), repr(x2), repr(float(vals[k])), repr(float(g1[k])), repr(float(g2[k])), "ok"])
        else:
            w.writerow([repr(x1), repr(x2), "", "", "", "outside_strip"])
    _write(Path(args.out) if args.out else None, f"eval_eps={args.eps!r}.csv", buf.getvalue())
    return EXIT_OK


# -- verify --------------------------------------------------------------------------------


def _verify_job(job):
    text, eps, tol, seed, corrupt = job
    fol = build_foliation(BoundaryPair.from_json(text), eps)
    if corrupt:
        fol = corrupt_foliation(fol, corrupt)
    return verify_foliation(fol, VerifyConfig(tol=tol, seed=seed))


def cmd_verify(args) -> int:
    pair = parse_boundary(args.boundary)
    eps = eps_values(args)
    tol = tolerances(args)
    reports = fan_out(_verify_job, [(pair.to_json(), e, tol, args.seed, args.corrupt) for e in eps])
    if args.format == "json":
        text = json.dumps([r.to_dict() for r in reports], indent=2, default=_json_default) + "\n"
        name = "verify.json"
    else:
        text = "\n".join(r.to_text() for r in reports) + "\n"
        name = "verify.txt"
    _write(Path(args.out) if args.out else None, name, text)
    if any(r.regime in (Regime.FISSURE_OPAQUE.value, Regime.UNCLASSIFIED.value) for r in reports):
        return EXIT_SCOPE
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


# -- plot ------------------------------------------------------------------------------------

_COLORS = {
    "simple_right": "#cfe3f7",
    "simple_left": "#f7e3cf",
    "herringbone_left": "#d7f0d0",
    "herringbone_right": "#f0d0e6",
    "rect": "#f3efb5",
    "fissure": "#dddddd",
}


def _plot_window(fol: Foliation):
    W = 3.0 * max(1.0, fol.eps)
    lo, hi = fol.center - W, fol.center + W
    for leaf in fol.leaves:
        if isinstance(leaf, HerringboneLeaf):
            x, _ = leaf.spine_points()
            lo, hi = min(lo, x.min() - 2 * fol.eps), max(hi, x.max() + 2 * fol.eps)
    return lo, hi


def _leaf_segments(leaf, eps, lo, hi, n=24):
    """Chords of a leaf as canonical-frame segments clipped to [lo, hi]."""
    segs, poly = [], None
    if isinstance(leaf, SimpleLeaf):
        a, b = max(leaf.lo, lo), min(leaf.hi, hi)
        if a < b:
            for m in np.linspace(a, b, n):
                if leaf.orientation == "right":
                    segs.append(((m - eps, -eps), (m + eps, eps)))
                else:
                    segs.append(((m + eps, -eps), (m - eps, eps)))
            if leaf.orientation == "right":
                poly = [(a - eps, -eps), (b - eps, -eps), (b + eps, eps), (a + eps, eps)]
            else:
                poly = [(a + eps, -eps), (b + eps, -eps), (b - eps, eps), (a - eps, eps)]
    elif isinstance(leaf, HerringboneLeaf):
        u = np.linspace(leaf.u_lo, leaf.u_hi, n)
        T = leaf.curve.height(u)
        sg = -1.0 if leaf.mirrored else 1.0
        for ui, Ti in zip(u, T):
            s = (sg * (ui + eps), Ti)
            segs.append((s, (sg * (ui + Ti), eps)))
            segs.append((s, (sg * (ui - Ti), -eps)))
        top = [(sg * (ui + Ti), eps) for ui, Ti in zip(u, T)]
        bot = [(sg * (ui - Ti), -eps) for ui, Ti in zip(u, T)]
        poly = top + bot[::-1]
    elif isinstance(leaf, RectLeaf):
        poly = [tuple(v) for v in leaf.patch.vertices()]
    return segs, poly


def render_svg(fol: Foliation, overlay: bool = False, width: int = 900) -> str:
    eps = fol.eps
    lo, hi = _plot_window(fol)
    scale = width / (hi - lo)
    height = int(round(2 * eps * scale)) + 40
    to_user = fol.symmetry.point_from_canonical

    def xy(p):
        a, b = to_user(np.array(p[0]), np.array(p[1]))
        return f"{(float(a) - lo) * scale:.3f},{(eps - float(b)) * scale + 20:.3f}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<title>foliation eps={eps!r} regime={fol.regime.value}</title>',
        f'<rect class="strip" x="0" y="20" width="{width}" height="{2 * eps * scale:.3f}" fill="none" stroke="black"/>',
    ]
    for k, leaf in enumerate(fol.leaves):
        color = _COLORS.get(leaf.name, "#eeeeee")
        out.append(f'<g class="leaf" data-index="{k}" data-type="{leaf.name}">')
        segs, poly = _leaf_segments(leaf, eps, lo - 2 * eps, hi + 2 * eps)
        if poly:
            out.append(f'<polygon points="{" ".join(xy(p) for p in poly)}" fill="{color}" stroke="none"/>')
        for p, q in segs:
            out.append(f'<polyline points="{xy(p)} {xy(q)}" stroke="#666666" stroke-width="0.5" fill="none"/>')
        if isinstance(leaf, HerringboneLeaf):
            x, y = leaf.spine_points()
            pts = " ".join(xy((a, b)) for a, b in zip(x[:: max(1, len(x) // 400)], y[:: max(1, len(y) // 400)]))
            out.append(f'<polyline class="spine" points="{pts}" stroke="#b00000" stroke-width="1.5" fill="none"/>')
        out.append("</g>")
    if overlay:
        xs = np.linspace(lo, hi, 200)
        h = zero_level_heights(fol.pair, eps, xs)
        for name, row, col in zip(("X0", "X1", "Xinf"), h, ("#0050c0", "#00a000", "#c08000")):
            ok = np.isfinite(row)
            if ok.sum() > 1:
                pts = " ".join(xy((a, b)) for a, b in zip(xs[ok], row[ok]))
                out.append(f'<polyline class="level-{name}" points="{pts}" stroke="{col}" stroke-dasharray="4 2" fill="none"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot(args) -> int:
    pair = parse_boundary(args.boundary)
    if args.eps is None or not args.eps > 0:
        raise UsageError("plot needs a positive --eps")
    fol = build_foliation(pair, args.eps)
    _write(Path(args.out) if args.out else None, f"foliation_eps={args.eps!r}.svg", render_svg(fol, args.overlay))
    return EXIT_OK


# -- entry point -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bellstrip", description="Diagonally concave minimal functions on a strip with cubic boundary data.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=("json", "csv", "svg"), default="json"):
        sp.add_argument("--boundary", required=True, help="JSON path, inline JSON, or 'a3,a2,a1,a0;b3,b2,b1,b0'")
        sp.add_argument("--eps", type=float)
        sp.add_argument("--eps-range", dest="eps_range", help="a:b:step")
        sp.add_argument("--out", help="output directory (stdout if omitted)")
        sp.add_argument("--format", choices=fmt, default=default)
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("regimes", help="critical widths and regime timeline")
    common(sp, ("text", "json", "csv"), "text")
    sp.set_defaults(func=cmd_regimes)

    sp = sub.add_parser("foliate", help="build foliations, export JSON and spine CSVs")
    common(sp)
    sp.set_defaults(func=cmd_foliate)

    sp = sub.add_parser("eval", help="evaluate value and gradient at points")
    common(sp, ("csv",), "csv")
    sp.add_argument("--points", help="'x1,x2;x1,x2;...'")
    sp.add_argument("--points-file", dest="points_file")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("verify", help="run the numerical property suite")
    common(sp, ("text", "json"), "text")
    for name in ("value", "gradient", "concavity", "ordering", "fd"):
        sp.add_argument(f"--tol-{name}", dest=f"tol_{name}", type=float)
    sp.add_argument("--corrupt", type=float, default=0.0, help="shift every spine by this amount before checking")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("plot", help="SVG of leaves and spines")
    common(sp, ("svg",), "svg")
    sp.add_argument("--overlay", action="store_true", help="draw the X0/X1/Xinf zero-level curves")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotEvaluable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCOPE


if __name__ == "__main__":
    sys.exit(main())
