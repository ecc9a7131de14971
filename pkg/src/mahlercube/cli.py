"""``mahlercube`` command line.

Exit status: 0 success, 1 anomaly (failed postcondition or dichotomy),
2 input validation error or bad usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from . import io
from .contact import (ContactError, canonicalize_with_map, contact_pair, contact_pairs,
                      facet_touch_certificate)
from .differential import Perturbation, kernel_residual, orthogonal_directions
from .experiments import (CSV_COLUMNS, AnomalyError, TrialConfig, config_to_json,
                          report_csv_row, report_to_json, run_trials)
from .flags import (AlphaWeights, base_dual_points, base_points, enumerate_faces,
                    enumerate_flags, face_dim, lemma7_gap)
from .geometry import (GeometryError, HPolytope, VPolytope, polar, polar_h, volume,
                       vertices_from_halfspaces)
from .linalg import BackendError

EXIT_OK, EXIT_ANOMALY, EXIT_INVALID = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _load_polytope(path: str) -> VPolytope:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise io.ValidationError(f"{path}: not JSON: {exc}") from None
    K = io.polytope_from_json(doc)
    if isinstance(K, HPolytope):
        K = vertices_from_halfspaces(K.irredundant())
    return K


def _emit(args, doc):
    text = io.dumps(doc) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def cmd_product(args):
    K = _load_polytope(args.inp)
    v = volume(K)
    pv = volume(polar(K))
    _emit(args, {"volume": io.scalar_out(v), "polar_volume": io.scalar_out(pv),
                 "product": io.scalar_out(v * pv)})


def cmd_volume(args):
    K = _load_polytope(args.inp)
    _emit(args, {"volume": io.scalar_out(volume(K))})


def cmd_polar(args):
    K = _load_polytope(args.inp)
    if args.form == "h":
        _emit(args, io.polytope_to_json(polar_h(K)))
    else:
        _emit(args, io.polytope_to_json(polar(K)))


def cmd_flags(args):
    n = args.dim
    faces = enumerate_faces(n)
    doc = {"dim": n, "faces": len(faces), "flags": len(enumerate_flags(n)),
           "faces_by_dim": [sum(1 for F in faces if face_dim(F) == k) for k in range(n)]}
    if args.points:
        X = base_points(n) if args.points == "cube" else base_dual_points(n)
        doc = io.flagpoints_to_json(X)
    _emit(args, doc)


def cmd_lemma7(args):
    n = args.dim
    rng = np.random.default_rng(args.alpha_seed)
    faces = enumerate_faces(n)
    gaps = []
    for _ in range(args.count):
        w = AlphaWeights(n, {F: Fraction(int(rng.integers(1, 1001)), int(rng.integers(1, 1001)))
                             for F in faces})
        gaps.append(lemma7_gap(w))
    witnesses = []
    for value in (Fraction(1), Fraction(2), Fraction(1, 3)):
        witnesses.append({"alpha": io.scalar_out(value),
                          "gap": io.scalar_out(lemma7_gap(AlphaWeights.constant(n, value)))})
    doc = {"dim": n, "count": args.count, "seed": args.alpha_seed,
           "min_gap": io.scalar_out(min(gaps)) if gaps else None,
           "negative": sum(1 for g in gaps if g < 0),
           "equality_witnesses": witnesses}
    _emit(args, doc)
    return EXIT_ANOMALY if doc["negative"] else EXIT_OK


def cmd_kernel(args):
    n = args.dim
    a = [Fraction(1)] * n if args.a is None else [_parse_fraction(x) for x in args.a.split(",")]
    if len(a) != n or any(x <= 0 for x in a):
        raise io.ValidationError("--a needs n positive rationals")
    X0 = base_points(n, a)
    rows = []
    nonzero = 0
    for F in enumerate_faces(n):
        for d in orthogonal_directions(F):
            r = kernel_residual(X0, Perturbation({F: d}))
            nonzero += r != 0
            rows.append({"face": list(F), "direction": io.vector_out(d),
                         "residual": io.scalar_out(r)})
    _emit(args, {"dim": n, "a": io.vector_out(a), "directions": len(rows),
                 "nonzero": nonzero, "residuals": rows if args.verbose else None})
    return EXIT_ANOMALY if nonzero else EXIT_OK


def cmd_canonicalize(args):
    K = _load_polytope(args.inp)
    if not K.symmetric:
        raise io.ValidationError("canonicalize needs an origin-symmetric body")
    Khat, delta, T = canonicalize_with_map(K)
    touch = facet_touch_certificate(K, T)
    _emit(args, {"body": io.polytope_to_json(Khat), "delta": io.scalar_out(delta),
                 "bm_upper_bound": io.scalar_out(1 / (1 - delta)),
                 "T": [io.vector_out(r) for r in T.matrix], "touch": touch})
    return EXIT_OK if all(touch) else EXIT_ANOMALY


def cmd_contact(args):
    K = _load_polytope(args.inp)
    if args.canonicalize:
        K, _, _ = canonicalize_with_map(K)
    if args.face:
        F = tuple(int(s) for s in args.face.split(","))
        if len(F) != K.dim or not any(F) or any(s not in (-1, 0, 1) for s in F):
            raise io.ValidationError(f"bad face {args.face!r}")
        _emit(args, io.contact_to_json(contact_pair(K, F)))
    else:
        pairs = contact_pairs(K)
        _emit(args, {"dim": K.dim, "pairs": [io.contact_to_json(p) for p in pairs.values()]})


def cmd_trials(args):
    cfg = TrialConfig(n=args.dim, delta_max=args.delta, trials=args.trials, seed=args.seed,
                      backend=args.backend, c_probe=args.c, generator=args.generator)
    try:
        reports, agg = run_trials(cfg, workers=args.threads)
    except AnomalyError as exc:
        sys.stderr.write(f"anomaly: {exc}\n")
        repro = io.dumps(exc.repro) + "\n"
        if args.repro:
            with open(args.repro, "w") as fh:
                fh.write(repro)
        else:
            sys.stderr.write(repro)
        return EXIT_ANOMALY
    lines = "".join(io.dumps(report_to_json(r)) + "\n" for r in reports)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in reports:
                w.writerow(report_csv_row(r))
    agg["config"] = config_to_json(cfg)
    agg["argv"] = args.argv
    if not args.deterministic:
        agg["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(io.dumps(agg) + "\n")
    else:
        sys.stderr.write(io.dumps(agg) + "\n")
    bad = agg["outcomes"]["neither"] or (cfg.backend == "exact" and
                                         any(r["mahler_excess"] < 0 for r in reports))
    return EXIT_ANOMALY if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mahlercube", description="Mahler volume product near the cube.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_io(sp):
        sp.add_argument("--in", dest="inp", required=True, help="polytope JSON")
        sp.add_argument("--out", help="output path (default: stdout)")
        return sp

    with_io(sub.add_parser("product", help="volume, polar volume and their product")
            ).set_defaults(func=cmd_product)
    with_io(sub.add_parser("volume", help="volume of a polytope")).set_defaults(func=cmd_volume)
    sp = with_io(sub.add_parser("polar", help="polar body"))
    sp.add_argument("--form", choices=("v", "h"), default="v")
    sp.set_defaults(func=cmd_polar)

    sp = sub.add_parser("flags", help="face and flag counts of the cube")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--points", choices=("cube", "cross"), help="emit base flag points")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_flags)

    sp = sub.add_parser("lemma7", help="random weight sweep of vol(Q) vol(Q') - P(cube)")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--alpha-seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_lemma7)

    sp = sub.add_parser("kernel", help="exact first-order coefficients along orthogonal directions")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--a", help="comma-separated scales a_0..a_{n-1}")
    sp.add_argument("--verbose", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_kernel)

    with_io(sub.add_parser("canonicalize", help="minimal parallelepiped position and delta")
            ).set_defaults(func=cmd_canonicalize)

    sp = with_io(sub.add_parser("contact", help="contact pairs of a canonical body"))
    sp.add_argument("--face", help="comma-separated sign vector; default: all faces")
    sp.add_argument("--canonicalize", action="store_true", help="canonicalize the input first")
    sp.set_defaults(func=cmd_contact)

    sp = sub.add_parser("trials", help="run the local-minimality experiment")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--delta", type=_parse_fraction, default=Fraction(1, 100))
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--backend", choices=("exact", "float"), default="exact")
    sp.add_argument("--c", type=_parse_fraction, default=None, help="dichotomy probe constant")
    sp.add_argument("--generator", choices=("corner", "pull", "halfspace"))
    sp.add_argument("--threads", type=int, default=1, help="worker processes")
    sp.add_argument("--out", help="JSON-lines report path (default: stdout)")
    sp.add_argument("--csv", help="CSV summary path")
    sp.add_argument("--summary", help="aggregate JSON path (default: stderr)")
    sp.add_argument("--repro", help="where to write a failing case")
    sp.add_argument("--deterministic", action="store_true", help="omit the timestamp")
    sp.set_defaults(func=cmd_trials)
    return p


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        status = args.func(args)
    except (io.ValidationError, BackendError, GeometryError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except ContactError as exc:
        sys.stderr.write(f"anomaly: {exc}\n")
        return EXIT_ANOMALY
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK if status is None else status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
