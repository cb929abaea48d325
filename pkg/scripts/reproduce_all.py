#!/usr/bin/env python3
"""Rebuild every registered instance and write one certificate per id."""

import argparse
import sys
from pathlib import Path

from maskriesz.fixtures import REGISTRY, reproduce_known


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/fixtures", help="output directory")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    failures = 0
    for fid in REGISTRY:
        cert = reproduce_known(fid, args.threads)
        ok = cert.results["matches_published"]
        failures += not ok
        path = cert.write(out / f"{fid}.json")
        print(f"{fid:28s} {'ok' if ok else 'MISMATCH':9s} {cert.provenance['wall_time']:8.3f}s  {path}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
