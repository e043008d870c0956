"""Command-line front end.

Subcommands build spaces from inline specs or JSON files, run the
samplers, realizers, certifiers, tripod scans and homology checks, and
emit CSV/JSON/SVG.  Exit codes: 0 on success or a passing check, 2 when
a check fails or a counterexample is found, 1 on usage or I/O errors.
All randomized commands are reproducible given --seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys

import numpy as np

from . import cone, homology, plotting, tripods
from .explorer import certify_degenerate_bound, realize, sample_k3
from .graphs import GraphFormatError, UnreachableError, Vertex, graph_from_json
from .spaces import (
    CoverSpec,
    GraphSpec,
    HalfLineSpec,
    LineSpec,
    PlaneSpec,
    ProductSpec,
    SpaceMismatchError,
    StripSpec,
    TripodSpec,
    build_space,
    space_spec_from_json,
)

__all__ = ["run", "main"]

_SPACE_HELP = """\
inline space grammar:
  line | halfline | plane
  tripod:L            equal legs L          (tripodN also accepted)
  tripod:L1,L2,L3     individual legs
  strip:r1=A,r2=B[,closed=1]
  cover:N=6,Imax=30[,index=standard|no2]
  square:(SPEC)       the l2 product SPEC x SPEC
  graph:FILE.json     metric graph in the JSON interchange format
or pass --spec FILE.json with {"type": ...} (see the space JSON schema).
"""


class UsageError(ValueError):
    pass


def _parse_kv(text: str) -> dict:
    out = {}
    for part in text.split(","):
        if not part:
            continue
        if "=" not in part:
            raise UsageError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip().lower()] = v.strip()
    return out


def parse_space_arg(text: str):
    """Parse the inline space grammar into a space spec."""
    text = text.strip()
    low = text.lower()
    if low == "line":
        return LineSpec()
    if low == "halfline":
        return HalfLineSpec()
    if low == "plane":
        return PlaneSpec()
    m = re.fullmatch(r"tripod(\d+(?:\.\d+)?)", low)
    if m:
        leg = float(m.group(1))
        return TripodSpec((leg, leg, leg))
    if low.startswith("tripod:"):
        vals = [float(v) for v in text[len("tripod:"):].split(",")]
        if len(vals) == 1:
            vals = vals * 3
        if len(vals) != 3:
            raise UsageError("tripod needs 1 or 3 leg lengths")
        return TripodSpec(tuple(vals))
    if low.startswith("strip:"):
        kv = _parse_kv(text[len("strip:"):])
        try:
            return StripSpec(
                float(kv["r1"]),
                float(kv["r2"]),
                kv.get("closed", "0") in ("1", "true", "yes"),
            )
        except KeyError as exc:
            raise UsageError(f"strip spec needs {exc}") from exc
    if low.startswith("cover:"):
        kv = _parse_kv(text[len("cover:"):])
        try:
            return CoverSpec(
                int(kv.get("n", kv.get("levels", ""))),
                int(kv.get("imax", kv.get("i_max", ""))),
                kv.get("index", "standard"),
            )
        except ValueError as exc:
            raise UsageError(f"bad cover spec: {exc}") from exc
    if low.startswith("square:"):
        inner = text[len("square:"):]
        if inner.startswith("(") and inner.endswith(")"):
            inner = inner[1:-1]
        spec = parse_space_arg(inner)
        return ProductSpec(spec, spec)
    if low.startswith("graph:"):
        path = text[len("graph:"):]
        with open(path) as fh:
            return GraphSpec(graph_from_json(json.load(fh)))
    raise UsageError(f"cannot parse space {text!r}")


def _space_from_args(args):
    if getattr(args, "spec", None):
        with open(args.spec) as fh:
            return build_space(space_spec_from_json(json.load(fh)))
    if getattr(args, "space", None):
        return build_space(parse_space_arg(args.space))
    raise UsageError("need --space or --spec")


def _parse_triple(text: str) -> cone.SideTriple:
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 3:
        raise UsageError("triple must be a,b,c")
    return cone.SideTriple(*vals)


def _default_threads(value):
    if value is not None:
        return value
    env = os.environ.get("K3LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"bad K3LAB_THREADS value {env!r}")
    return 1


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- subcommands ---------------------------------------------------------------


def _cmd_sample(args) -> int:
    space = _space_from_args(args)
    rng = np.random.default_rng(args.seed)
    records = sample_k3(space, args.n, args.bounds, rng)
    lines = ["a,b,c,defect,point1,point2,point3"]
    for rec in records:
        vals = [format(v, ".17g") for v in rec.triple.as_tuple()] + [format(rec.defect, ".17g")]
        pts = [space.serialize_point(p) for p in rec.points]
        lines.append(",".join(vals + pts))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_realize(args) -> int:
    space = _space_from_args(args)
    rng = np.random.default_rng(args.seed)
    target = _parse_triple(args.target)
    result = realize(
        space,
        target,
        tol=args.tol,
        budget=args.budget,
        restarts=args.restarts,
        rng=rng,
        bounds=args.bounds,
    )
    _emit(_json_text(result.to_json(space)), args.out)
    return 0 if result.found else 2


def _cmd_certify(args) -> int:
    space = _space_from_args(args)
    rng = np.random.default_rng(args.seed)
    threads = _default_threads(args.threads)
    report = certify_degenerate_bound(
        space,
        mode=args.mode,
        threshold=args.threshold,
        tol=args.tol,
        samples=args.samples,
        rng=rng,
        bounds=args.bounds,
        threads=threads,
        refine_top=args.refine_top,
    )
    if args.out:
        _emit(_json_text(report.to_json(space)), args.out)
    n = len(report.counterexamples)
    print(f"{n} counterexamples (mode={args.mode}, threshold={args.threshold:g}, tol={args.tol:g})")
    return 0 if report.ok else 2


def _cmd_tripod_scan(args) -> int:
    space = _space_from_args(args)
    if not hasattr(space, "graph"):
        raise UsageError("tripod-scan needs a graph space")
    g = space.graph
    dm = np.asarray(g.distance_matrix())
    labels = g.vertex_labels
    xi, yi = np.unravel_index(int(np.argmax(dm)), dm.shape)
    x, y = Vertex(labels[xi]), Vertex(labels[yi])
    mu = tripods.GraphPath.shortest(g, x, y)
    on_mu = {space.serialize_point(g.normalize(mu.point_at(t))) for t in mu.breakpoints()}
    best = None
    for lab in labels:
        z = Vertex(lab)
        if space.serialize_point(z) in on_mu:
            continue
        w = tripods.tripod_from_graph_points(space, x, y, z)
        report = tripods.verify_tripod(w, h=args.h)
        if not report.ok:
            continue
        if best is None or report.measured_r > best[1].measured_r:
            best = (w, report, lab)
    if best is None:
        print("no verified tripod found")
        return 2
    w, report, lab = best
    out = report.to_json()
    out["mu"] = [space.serialize_point(x), space.serialize_point(y)]
    out["z"] = space.serialize_point(Vertex(lab))
    out["eps"] = args.eps
    _emit(_json_text(out), args.out)
    return 0


def _cmd_lambda_check(args) -> int:
    model = tripods.ModelTripod((args.r, args.r, args.r))
    loop = tripods.build_lambda(model, args.m)
    kappa = _parse_triple(args.kappa)
    report = tripods.check_lambda(loop, model, eps=args.eps, kappa=kappa, metric="dmod")
    _emit(_json_text(report.to_json()), args.out)
    return 0 if report.ok else 2


def _cmd_homology_check(args) -> int:
    s = homology.build_s_complex()
    h1_full = homology.h1_dim(s)
    removed = homology.diagonal_faces(s)
    h1_w = homology.h1_dim(s, removed)
    g1, g2, g3 = homology.corner_cycles(s)
    b1, b2 = homology.mixed_face_chains(s)
    identity_ok = homology.boundary(s, b1 + b2) == g1 + g2 + g3
    glue_ok = homology.homologous(g1, g2, s, removed)
    print(f"H1(S) dim = {h1_full}")
    line = f"H1(W) dim = {h1_w}; chain identity {'OK' if identity_ok else 'FAILED'}"
    print(line)
    print(f"corner cycles homologous in W: {glue_ok}")
    ok = h1_full == 0 and h1_w == 0 and identity_ok and glue_ok
    return 0 if ok else 2


def _cmd_plot(args) -> int:
    path = args.infile
    triples = []
    defects = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                vals = [float(v) for v in row[:4] if v != ""]
            except ValueError:
                if i == 0:
                    continue
                raise UsageError(f"{path}:{i + 1}: malformed CSV row")
            if len(vals) < 3:
                raise UsageError(f"{path}:{i + 1}: need at least 3 columns")
            t = cone.SideTriple(vals[0], vals[1], vals[2])
            triples.append(t)
            defects.append(vals[3] if len(vals) >= 4 else cone.defect(t))
    svg = plotting.render_slice_svg(triples, defects, tol=args.tol)
    _emit(svg, args.out)
    return 0


# -- parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_space_args(p):
    p.add_argument("--space", help="inline space spec (see grammar below)")
    p.add_argument("--spec", help="JSON space spec file")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="k3lab",
        description="Side-length spectra of path metric spaces: sample, realize, certify.",
        epilog=_SPACE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="sample random triangles and emit CSV records")
    _add_space_args(sp)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--bounds", type=float, default=10.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_sample)

    rp = sub.add_parser("realize", help="find points realizing a target triple")
    _add_space_args(rp)
    rp.add_argument("--target", required=True, help="a,b,c")
    rp.add_argument("--tol", type=float, default=1e-9)
    rp.add_argument("--budget", type=int, default=100_000)
    rp.add_argument("--restarts", type=int, default=32)
    rp.add_argument("--bounds", type=float, default=None)
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--out")
    rp.set_defaults(func=_cmd_realize)

    cp = sub.add_parser("certify", help="search for degenerate triangles with long legs")
    _add_space_args(cp)
    cp.add_argument("--mode", choices=["vertex", "sampled"], default="vertex")
    cp.add_argument("--threshold", type=float, required=True)
    cp.add_argument("--tol", type=float, default=1e-9)
    cp.add_argument("--samples", type=int, default=10_000)
    cp.add_argument("--bounds", type=float, default=10.0)
    cp.add_argument("--refine-top", type=int, default=20)
    cp.add_argument("--seed", type=int, default=0)
    cp.add_argument("--threads", type=int, default=None, help="default: K3LAB_THREADS or 1")
    cp.add_argument("--out")
    cp.set_defaults(func=_cmd_certify)

    tp = sub.add_parser("tripod-scan", help="find and verify the largest tripod in a graph space")
    _add_space_args(tp)
    tp.add_argument("--eps", type=float, default=0.0)
    tp.add_argument("--h", type=float, default=0.25)
    tp.add_argument("--out")
    tp.set_defaults(func=_cmd_tripod_scan)

    lp = sub.add_parser("lambda-check", help="certify the seven-segment degenerate loop")
    lp.add_argument("--r", type=float, default=100.0)
    lp.add_argument("--eps", type=float, default=0.0)
    lp.add_argument("--m", type=int, default=64)
    lp.add_argument("--kappa", default="3,4,5", help="target triple a,b,c")
    lp.add_argument("--out")
    lp.set_defaults(func=_cmd_lambda_check)

    hp = sub.add_parser("homology-check", help="verify the configuration-complex chain facts")
    hp.set_defaults(func=_cmd_homology_check)

    pp = sub.add_parser("plot", help="scatter CSV triples on the cone slice as SVG")
    pp.add_argument("--in", dest="infile", required=True)
    pp.add_argument("--out", required=True)
    pp.add_argument("--tol", type=float, default=1e-9)
    pp.set_defaults(func=_cmd_plot)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, GraphFormatError, SpaceMismatchError, UnreachableError, cone.InvalidTripleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
