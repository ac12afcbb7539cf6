"""The X = 1e9 checkpoint: D_{3,3}(1e9, 1) exactly, the main terms there and the error.

    python scripts/extended_d33.py [--x 1000000000] [--threads 0]

Runs for several minutes on one core.
"""

import argparse
import time

import mpmath

from divcorr import mainterms, sieve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--x", type=int, default=10**9)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()
    t = time.perf_counter()
    D = sieve.correlate(3, 3, args.x, 1, threads=args.threads).value
    print(f"D_33({args.x}, 1) = {D}   ({time.perf_counter() - t:.0f}s)")
    M = mainterms.m33_eval(args.x).value
    m = mainterms.delta_m3_eval(args.x).value
    print(f"M_33 = {mpmath.nstr(M, 25)}")
    print(f"m_3  = {mpmath.nstr(m, 25)}")
    print(f"E_33 = {mpmath.nstr(D - M, 12)}  (relative {mpmath.nstr((D - M) / D, 4)})")


if __name__ == "__main__":
    main()
