"""Print every named constant and the three main-term polynomials at a chosen precision.

    python scripts/constants_table.py [--digits 90]
"""

import argparse

from divcorr import mainterms


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--digits", type=int, default=90)
    args = ap.parse_args()
    for name in mainterms.CONSTANT_NAMES:
        print(f"{name:12s} {mainterms.named_constant(name, args.digits)}")
    for label, poly in (("M22(h=1)", mainterms.m22_coefficients(1, args.digits)),
                        ("M33", mainterms.m33_coefficients(args.digits)),
                        ("m3 (delta)", mainterms.delta_m3_coefficients(args.digits))):
        print(label)
        for j, c in enumerate(poly.coefficient_strings()):
            print(f"  log^{j}: {c}")


if __name__ == "__main__":
    main()
