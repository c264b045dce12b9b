"""Command-line front end: families | roots | kak | density | verify.

Every subcommand is side-effect-free except for its declared output files,
and rerunning with an identical configuration reproduces those files byte for
byte (reports carry no timestamps; all randomness is seed-derived).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .density import jacobian, log_jacobian, psi_det_check
from .exceptions import KakintError
from .kak import kak_decompose, recompose
from .liecore import FAMILY_TAGS, cartan_frame, make_family, realify, roots_to_json
from .reduction import VerifyConfig, default_suite, verify

_FAMILY_ROWS = [
    {"tag": "GL-real", "compact": "O(n)", "d_G": "n^2", "d_K": "n(n-1)/2", "min_n": 2},
    {"tag": "SL-real", "compact": "SO(n)", "d_G": "n^2-1", "d_K": "n(n-1)/2", "min_n": 2},
    {"tag": "GL-complex-as-real", "compact": "U(n)", "d_G": "2n^2", "d_K": "n^2", "min_n": 2},
    {"tag": "LorentzSO0", "compact": "SO(n)", "d_G": "n(n+1)/2", "d_K": "n(n-1)/2", "min_n": 1},
]


def _dump_json(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_families(args) -> int:
    rows = [r for r in _FAMILY_ROWS if not args.family or r["tag"] == args.family]
    if args.format == "json":
        _dump_json({"schema": 1, "families": rows}, args.out)
        return 0
    for r in rows:
        print(f"{r['tag']:<20} K = {r['compact']:<6} dim G = {r['d_G']:<10} "
              f"dim K = {r['d_K']:<10} n >= {r['min_n']}")
    return 0


def cmd_roots(args) -> int:
    family = make_family(args.family, args.n)
    frame, system = cartan_frame(family)
    _dump_json(roots_to_json(family, frame, system), args.out)
    return 0


def _read_matrix(family, path: str) -> np.ndarray:
    with open(path) as fh:
        rows = json.load(fh)
    arr = np.asarray(rows, dtype=float)
    if family.tag == "GL-complex-as-real":
        n = family.n
        if arr.shape != (n, 2 * n):
            raise KakintError(
                f"complex input must be {n} rows of {2 * n} interleaved re/im entries")
        z = arr[:, 0::2] + 1j * arr[:, 1::2]
        return realify(z)
    if arr.shape != (family.size, family.size):
        raise KakintError(f"expected a {family.size}x{family.size} matrix, got {arr.shape}")
    return arr


def cmd_kak(args) -> int:
    family = make_family(args.family, args.n)
    frame, system = cartan_frame(family)
    g = _read_matrix(family, args.matrix)
    factors = kak_decompose(family, frame, system, g)
    rec = recompose(family, frame, factors)
    residual = float(np.linalg.norm(rec - g) / max(np.linalg.norm(g), 1e-300))
    doc = {
        "schema": 1,
        "family": family.tag,
        "n": family.n,
        "k1": factors.k1.tolist(),
        "H": factors.H.tolist(),
        "k2": factors.k2.tolist(),
        "residual": residual,
    }
    if factors.warning:
        doc["warning"] = factors.warning
    _dump_json(doc, args.out)
    return 0


def cmd_density(args) -> int:
    family = make_family(args.family, args.n)
    frame, system = cartan_frame(family)
    h = np.asarray(json.loads(args.coords), dtype=float)
    if h.shape != (frame.rank,):
        raise KakintError(f"coords must have length {frame.rank}")
    log_j = float(log_jacobian(system, h))
    doc = {
        "schema": 1,
        "family": family.tag,
        "n": family.n,
        "H": h.tolist(),
        "logJ": log_j if np.isfinite(log_j) else None,  # null marks -infinity
        "J": float(jacobian(system, h)),
    }
    try:
        det_abs, _, ratio = psi_det_check(family, frame, system, h)
        doc["psiDet"] = float(det_abs)
        doc["ratio"] = float(ratio)
    except KakintError:
        doc["psiDet"] = None
        doc["ratio"] = None
        doc["note"] = "singular element: determinant check skipped"
    _dump_json(doc, args.out)
    return 0


def _write_verify_csv(report, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["function", "kind", "direct", "sigma_direct",
                         "reduced", "sigma_reduced", "C", "z", "rel_gap", "passed"])
        for r in report.functions:
            writer.writerow([r.name, r.kind, repr(r.direct), repr(r.sigma_direct),
                             repr(r.reduced), repr(r.sigma_reduced),
                             repr(report.calibration.constant), repr(r.z),
                             repr(r.rel_gap), r.passed])


def cmd_verify(args) -> int:
    family = make_family(args.family, args.n)
    frame, system = cartan_frame(family)
    config = VerifyConfig(
        n_samples=args.samples,
        orbit_samples=args.orbit_samples,
        order=args.order,
        truncation=args.trunc,
        proposal_scale=args.scale,
        seed=args.seed,
        z_threshold=args.z_threshold,
        rel_floor=args.rel_floor,
        corruption=args.corrupt_jacobian,
    )
    report = verify(family, frame, system, default_suite(), config)
    doc = report.to_dict()
    if args.out:
        _dump_json(doc, args.out + ".json")
        _write_verify_csv(report, args.out + ".csv")
    else:
        _dump_json(doc, None)
    if report.degraded:
        print("DEGRADED: a sub-estimate carries a poor-proposal warning", file=sys.stderr)
        return 3
    if not report.passed:
        print("FAILED: agreement criteria not met", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kakint",
        description="KAK-reduced integration on reductive matrix groups")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("families", help="list supported group families")
    p.add_argument("--family", choices=FAMILY_TAGS, default=None)
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_families)

    def common(p):
        p.add_argument("--family", choices=FAMILY_TAGS, required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--out", default=None)

    p = sub.add_parser("roots", help="restricted root table as JSON")
    common(p)
    p.set_defaults(fn=cmd_roots)

    p = sub.add_parser("kak", help="KAK-factor a matrix from a JSON file")
    common(p)
    p.add_argument("--matrix", required=True,
                   help="JSON array of rows (interleaved re/im pairs for the complex family)")
    p.set_defaults(fn=cmd_kak)

    p = sub.add_parser("density", help="Jacobian and determinant check at given coordinates")
    common(p)
    p.add_argument("--coords", required=True, help="JSON list of abelian-slice coordinates")
    p.set_defaults(fn=cmd_density)

    p = sub.add_parser("verify", help="direct-vs-reduced integration verification")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--orbit-samples", type=int, default=2_000)
    p.add_argument("--order", type=int, default=16)
    p.add_argument("--trunc", type=float, default=None)
    p.add_argument("--scale", type=float, default=0.7)
    p.add_argument("--z-threshold", type=float, default=3.0)
    p.add_argument("--rel-floor", type=float, default=0.02)
    p.add_argument("--corrupt-jacobian", choices=("drop-root", "linear-sinh"), default=None)
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except KakintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
