"""Command-line interface: ``maskriesz <subcommand> [options]``.

Exit status: 0 when the object is verified or constructed, 1 when it is
refuted, classified as neither, inconclusive or fails verification, and 2
for usage and internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .certificates import (
    Certificate,
    build_certificate,
    cells_to_bits,
    jsonable,
    make_provenance,
    verify_certificate,
)
from .errors import InvalidInput, MaskRieszError, VerificationError
from .grid import as_fraction, format_fraction
from .parallel import resolve_workers

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(v, 0) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise InvalidInput(f"expected comma-separated integers, got {text!r}") from None


def parse_offsets(text: str) -> list:
    return [as_fraction(v) for v in text.replace(" ", "").split(",") if v]


def mask_int_to_cells(value: int, n: int) -> frozenset:
    if value < 0 or value >> n:
        raise InvalidInput(f"mask {value:#b} does not fit in {n} cells")
    return frozenset(i for i in range(n) if value >> i & 1)


def read_masks_file(path) -> list[list[int]]:
    """One mask per line written as '0'/'1' characters; character i is cell i."""
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if set(line) - {"0", "1"}:
            raise InvalidInput(f"mask line {line!r} may contain only '0' and '1'")
        rows.append([int(ch) for ch in line])
    if not rows:
        raise InvalidInput(f"no masks in {path}")
    return rows


def masks_from_args(args, n: int) -> list[list[int]]:
    if args.masks_file:
        rows = read_masks_file(args.masks_file)
        if any(len(r) != n for r in rows):
            raise InvalidInput(f"every mask line must have {n} characters")
        return rows
    if not args.masks:
        raise InvalidInput("give --masks or --masks-file")
    return [cells_to_bits(n, mask_int_to_cells(v, n)) for v in parse_int_list(args.masks)]


def parse_membership(text: str) -> list[list[int]]:
    """``"1,2;2,3;1,3"`` -> [[1,2],[2,3],[1,3]]."""
    return [parse_int_list(part) for part in text.split(";")]


def parse_groups(text: str) -> list[list[str]]:
    return [[v for v in part.replace(" ", "").split(",") if v] for part in text.split(";")]


# ---------------------------------------------------------------------------
# output


def emit(cert: Certificate, args, headline: str) -> None:
    print(headline)
    if args.out:
        path = cert.write(args.out)
        print(f"certificate written to {path}")


def _verdict_exit(verdict: str) -> int:
    return EXIT_FAIL if verdict == "neither" else EXIT_OK


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args, workers: int) -> int:
    n = args.n
    offsets = parse_offsets(args.offsets)
    params = {"N": n, "offsets": [format_fraction(c) for c in offsets],
              "masks": masks_from_args(args, n), "exact": bool(args.exact)}
    cert = build_certificate("classification", params, workers)
    r = cert.results
    lb = "n/a" if r["lower_bound"] is None else f"{r['lower_bound']:.6g}"
    emit(cert, args, f"verdict: {r['verdict']}  sigma_min: {r['sigma_min']:.6g}  lower bound: {lb}  "
                     f"exact_singular: {r['exact_singular']}")
    return _verdict_exit(r["verdict"])


def cmd_construct(args, workers: int) -> int:
    n = args.n
    masks = masks_from_args(args, n)
    cells = parse_int_list(args.cells) if args.cells else list(range(len(masks)))
    params = {"mode": "theorem1", "N": n, "cells": cells, "masks": masks, "search": args.search,
              "rho": parse_int_list(args.rho) if args.rho else None}
    cert = build_certificate("construction", params, workers)
    r = cert.results
    if params["rho"] is None:
        # record the found permutation so verification re-checks it explicitly
        params["rho"] = r["rho"]
        cert = build_certificate("construction", params, workers)
        r = cert.results
    claimed = r["claimed"]["verdict"]
    emit(cert, args, f"searched rho (1-based): {tuple(r['rho'])}  offsets: {tuple(r['offsets'])}  "
                     f"|det|: {r['det_modulus']:.6g}  guarantee: {r['guarantee']:.6g}  verdict: {r['search_verdict']}\n"
                     f"checked rho {tuple(params['rho'])}: {claimed}")
    return _verdict_exit(claimed)


def cmd_corollary(args, workers: int) -> int:
    if not args.sets:
        raise InvalidInput("give at least one set, e.g. '0/1..1/2'")
    sets = [[c.strip() for c in s.split(",") if c.strip()] for s in args.sets]
    params = {"mode": "corollary", "sets": sets, "search": args.search, "rho": None}
    cert = build_certificate("construction", params, workers)
    params["rho"] = cert.results["rho"]
    cert = build_certificate("construction", params, workers)
    r = cert.results
    def show(f):
        return "{" + ",".join(c.removesuffix("/1") for c in f) + "}" if f else "empty"

    freq = "; ".join(f"L{k + 1}={show(f)}" for k, f in enumerate(r["frequencies"]))
    emit(cert, args, f"N: {r['N']}  assignment: {r['assignment']}  frequencies (offsets mod N): {freq}  "
                     f"verdict: {r['claimed']['verdict']}")
    return _verdict_exit(r["claimed"]["verdict"])


def cmd_lemma(args, workers: int) -> int:
    if args.masks_file:
        mask = read_masks_file(args.masks_file)
    else:
        k = len(parse_int_list(args.masks or ""))
        mask = [cells_to_bits(k, mask_int_to_cells(v, k)) for v in parse_int_list(args.masks or "")]
    if not mask or any(len(row) != len(mask) for row in mask):
        raise InvalidInput("lemma-search needs a square K x K mask")
    params = {"mode": "lemma", "N": args.n, "mask": mask, "search": args.search}
    cert = build_certificate("construction", params, workers)
    r = cert.results
    emit(cert, args, f"rho (1-based): {tuple(r['rho'])}  |det|: {r['det_modulus']:.6g}  "
                     f"guarantee R|det A|/K!: {r['guarantee']:.6g}  R: {r['R']}")
    return EXIT_OK if r["meets_guarantee"] else EXIT_FAIL


def _scan_cert(params: dict, verdict, workers: int) -> Certificate:
    return Certificate("conjecture_scan", jsonable(params), jsonable(verdict.results_json()),
                       make_provenance(verdict.wall_time, workers))


def _scan_headline(v) -> str:
    parts = [f"N={v.N} conjecture {v.conjecture}: {v.status}"]
    if v.witness_rho is not None:
        parts.append(f"witness rho: {tuple(v.witness_rho)}")
    if v.refutation:
        parts.append(f"{len(v.refutation)} refutation(s)")
    parts.append(", ".join(f"{k}={val}" for k, val in sorted(v.stats.items())))
    return "  ".join(parts)


def _scan_exit(v) -> int:
    return EXIT_OK if v.status == "pass" else EXIT_FAIL


def _checkpoint_path(args, tag: str) -> Optional[Path]:
    if args.checkpoint:
        return Path(args.checkpoint)
    if args.out:
        return Path(str(args.out) + ".ckpt")
    if args.resume:
        raise InvalidInput("--resume needs --checkpoint or --out")
    return None


def cmd_conjecture1(args, workers: int) -> int:
    from .conjectures import conjecture1_scan

    rho = parse_int_list(args.rho) if args.rho else None
    ck = _checkpoint_path(args, "one") if args.strategy == "exhaustive" else None
    v = conjecture1_scan(args.n, rho, strategy=args.strategy, seed=args.seed, workers=workers,
                         max_batches=args.max_batches, checkpoint=ck, resume=args.resume,
                         stop_after=args.stop_after)
    params = {"conjecture": "one", "N": args.n, "rho": rho, "strategy": args.strategy,
              "seed": args.seed, "max_batches": args.max_batches}
    print(_scan_headline(v))
    if v.status == "inconclusive":
        print("scan interrupted; rerun with --resume to continue" if ck else "scan inconclusive")
        return EXIT_FAIL
    cert = _scan_cert(params, v, workers)
    if args.out:
        print(f"certificate written to {cert.write(args.out)}")
    return _scan_exit(v)


def cmd_conjecture2(args, workers: int) -> int:
    from .conjectures import conjecture2_scan

    rho = parse_int_list(args.rho) if args.rho else None
    ck = _checkpoint_path(args, "two") if rho is None else None
    v = conjecture2_scan(args.n, rho, workers=workers, checkpoint=ck, resume=args.resume)
    params = {"conjecture": "two", "N": args.n, "rho": rho}
    print(_scan_headline(v))
    cert = _scan_cert(params, v, workers)
    if args.out:
        print(f"certificate written to {cert.write(args.out)}")
    return _scan_exit(v)


def cmd_hierarchy(args, workers: int) -> int:
    params = {"conjecture": "hierarchy", "N": args.n, "P": args.p}
    cert = build_certificate("conjecture_scan", params, workers)
    r = cert.results
    emit(cert, args, f"N={args.n} P={args.p}: {r['status']}  subsets tested: {r['stats']['subsets_tested']}")
    return EXIT_OK if r["status"] == "pass" else EXIT_FAIL


def cmd_tri_classify(args, workers: int) -> int:
    from .tri_interval import case_table_csv, case_table_text

    if args.table:
        print(case_table_csv() if args.csv else case_table_text(), end="")
        if args.out:
            cert = build_certificate("tri_interval", {"mode": "table"}, workers)
            print(f"certificate written to {cert.write(args.out)}")
        return EXIT_OK
    if not args.membership:
        raise InvalidInput("give --membership (e.g. '1,2;2,3;1,3') or --table")
    params = {"mode": "classify", "membership": parse_membership(args.membership),
              "alphas": [float(a) for a in args.alphas.split(",")] if args.alphas else None,
              "empty": parse_int_list(args.empty) if args.empty else []}
    cert = build_certificate("tri_interval", params, workers)
    r = cert.results
    label = r["case"] + (f"({r['k']})" if r["k"] is not None else "")
    extra = f"  lambda: {r['lambda']:.6g}" if "lambda" in r else ""
    emit(cert, args, f"case: {label}  branch: {r['branch']}{extra}")
    return EXIT_OK


def cmd_cross_check(args, workers: int) -> int:
    n = args.n
    intervals = [cells_to_bits(n, mask_int_to_cells(v, n)) for v in parse_int_list(args.intervals)]
    freqs = parse_groups(args.freqs)
    params = {"mode": "cross_check", "N": n, "intervals": intervals,
              "freqs": [[format_fraction(as_fraction(c)) for c in f] for f in freqs],
              "membership": parse_membership(args.membership)}
    cert = build_certificate("tri_interval", params, workers)
    r = cert.results
    emit(cert, args, f"verdict: {r['verdict']}  sigma_min: {r['sigma_min']:.6g}  alphas: {r['alphas']}")
    return _verdict_exit(r["verdict"])


def cmd_sampling(args, workers: int) -> int:
    from .sampling import EXAMPLE1_MASKS

    n = args.n
    if args.masks or args.masks_file:
        masks = masks_from_args(args, n)
    elif n == 4:
        masks = [cells_to_bits(4, m) for m in EXAMPLE1_MASKS]
    else:
        masks = [[1] * n for _ in range(n)]
    params = {"N": n, "masks": masks, "rho": parse_int_list(args.rho) if args.rho else None,
              "grid": args.grid, "seed": args.seed, "mtruncs": parse_int_list(args.truncation)}
    cert = build_certificate("sampling_report", params, workers)
    r = cert.results
    print(f"channel offsets rho: {tuple(r['rho'])}")
    print("mtrunc,relative_error")
    for row in r["errors"]:
        print(f"{row['mtrunc']},{row['relative_error']:.6e}")
    if args.out:
        print(f"certificate written to {cert.write(args.out)}")
    return EXIT_OK


def cmd_reproduce(args, workers: int) -> int:
    from .fixtures import REGISTRY, reproduce_known

    if args.list or not (args.ids or args.all):
        for fx in REGISTRY.values():
            print(f"{fx.id:28s} {fx.description}")
        return EXIT_OK
    ids = list(REGISTRY) if args.all else args.ids
    ok = True
    out_dir = Path(args.out) if args.out else None
    for fid in ids:
        cert = reproduce_known(fid, workers)
        match = cert.results["matches_published"]
        ok &= bool(match)
        print(f"{fid:28s} {'reproduced' if match else 'MISMATCH'}")
        if out_dir is not None:
            target = out_dir / f"{fid}.json" if (args.all or len(ids) > 1 or out_dir.suffix != ".json") else out_dir
            cert.write(target)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args, workers: int) -> int:
    try:
        report = verify_certificate(args.certificate, workers=workers, rtol=args.tolerance)
    except VerificationError as exc:
        print(f"verification error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="maskriesz", description="Masked Fourier matrices and exponential Riesz bases.")
    p.add_argument("--version", action="version", version=f"maskriesz {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker processes (default: $MASKRIESZ_THREADS or CPU count)")
    common.add_argument("--out", default=None, help="write the certificate to this path")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(func=fn)
        return sp

    def mask_opts(sp):
        sp.add_argument("--masks", help="comma-separated integers, bit i = cell i (e.g. 0b0101 = cells {0,2})")
        sp.add_argument("--masks-file", help="file with one mask per line as '0'/'1' characters")

    sp = add("classify", cmd_classify, "classify a coset system with masked supports")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--offsets", required=True, help="comma-separated offsets, integers or p/q")
    mask_opts(sp)
    sp.add_argument("--exact", action="store_true", help="confirm the verdict in exact cyclotomic arithmetic")

    sp = add("construct", cmd_construct, "choose coset offsets that make the masked system a Riesz basis")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--cells", help="cell owned by each mask (default 0..K-1)")
    mask_opts(sp)
    sp.add_argument("--rho", help="check this 1-based permutation instead of only the searched one")
    sp.add_argument("--search", choices=["exhaustive", "first_feasible"], default=None)

    sp = add("corollary", cmd_corollary, "disjoint coset frequencies for unions of rational intervals")
    sp.add_argument("sets", nargs="*", help="one set per argument, e.g. '0/1..1/4, 1/2..3/4'")
    sp.add_argument("--search", choices=["exhaustive", "first_feasible"], default=None)

    sp = add("lemma-search", cmd_lemma, "row permutation with a large masked determinant of Fourier rows 1..K")
    sp.add_argument("--n", type=int, required=True)
    mask_opts(sp)
    sp.add_argument("--search", choices=["exhaustive", "first_feasible"], default="exhaustive")

    for name, fn, text in (("conjecture1", cmd_conjecture1, "masks with all-ones diagonal"),
                           ("conjecture2", cmd_conjecture2, "principal submatrices")):
        sp = add(name, fn, f"scan permuted Fourier matrices: {text}")
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--rho", help="fixed 0-based permutation, e.g. 0,2,1,3")
        sp.add_argument("--resume", action="store_true")
        sp.add_argument("--checkpoint", help="checkpoint file (default: <out>.ckpt)")
        if name == "conjecture1":
            sp.add_argument("--strategy", choices=["exhaustive", "randomized_refute"], default="exhaustive")
            sp.add_argument("--seed", type=int, default=0)
            sp.add_argument("--max-batches", type=int, default=256)
            sp.add_argument("--stop-after", type=int, default=None, help=argparse.SUPPRESS)

    sp = add("hierarchy", cmd_hierarchy, "minors for frequencies N Z + k N / P")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)

    sp = add("tri-classify", cmd_tri_classify, "case of a three-interval membership")
    sp.add_argument("--membership", help="L_1;L_2;L_3 as 1-based lists, e.g. '1,2;2,3;1,3'")
    sp.add_argument("--alphas", help="three lower Riesz bounds in (0,1]")
    sp.add_argument("--empty", help="indices of empty intervals")
    sp.add_argument("--table", action="store_true", help="print the full 64-row case table")
    sp.add_argument("--csv", action="store_true", help="with --table, print CSV")

    sp = add("cross-check", cmd_cross_check, "classify a periodic interval instance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--intervals", required=True, help="cell masks of the base intervals, e.g. 0b0011,0b0100,0b1000")
    sp.add_argument("--freqs", required=True, help="coset offsets per interval, e.g. '0,2;1;3'")
    sp.add_argument("--membership", required=True, help="e.g. '1,2;2,3;1,3'")

    sp = add("sampling-demo", cmd_sampling, "reconstruction error of the multi-channel sampling series")
    sp.add_argument("--n", type=int, default=4)
    mask_opts(sp)
    sp.add_argument("--rho", help="0-based channel offsets (default: searched)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--grid", type=int, default=4, help="subcells per grid cell of the random spectrum")
    sp.add_argument("--truncation", default="2048,8192", help="comma-separated truncation levels")

    sp = add("reproduce", cmd_reproduce, "rebuild registered published instances")
    sp.add_argument("ids", nargs="*")
    sp.add_argument("--all", action="store_true")
    sp.add_argument("--list", action="store_true")

    sp = add("verify", cmd_verify, "regenerate a certificate and compare")
    sp.add_argument("certificate")
    sp.add_argument("--tolerance", type=float, default=1e-8, help="relative tolerance for real values")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_ERROR
    workers = resolve_workers(args.threads)
    try:
        return args.func(args, workers)
    except MaskRieszError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
