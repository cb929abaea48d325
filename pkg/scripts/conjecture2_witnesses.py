#!/usr/bin/env python3
"""Principal-minor witnesses: the first rho with all minors of P_rho W_N nonzero, per N."""

import argparse
import time

from maskriesz.conjectures import conjecture2_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=8)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    print("N,identity_status,identity_failures,witness_rho,rhos_rejected,seconds")
    for n in range(1, args.max_n + 1):
        t = time.perf_counter()
        ident = conjecture2_scan(n, tuple(range(n)))
        v = conjecture2_scan(n, workers=args.threads)
        wit = " ".join(map(str, v.witness_rho)) if v.witness_rho else ""
        print(f"{n},{ident.status},{len(ident.refutation)},{wit},{len(v.rejected)},{time.perf_counter() - t:.2f}")


if __name__ == "__main__":
    main()
