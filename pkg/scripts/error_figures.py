"""Write the error-term plot data as CSV, plus the fits as JSON.

    python scripts/error_figures.py [--out results] [--xmax 1000000]

Files written:
  e22_dense.csv        E_{2,2}(X, 1) at every integer X <= xmax with +-7 X^0.51
  e33_dense.csv        E_{3,3}(X, 1) at every integer X <= xmax with +-1050 X^0.501
  e22_loglog.csv       record points of |E_{2,2}| with the fitted line
  fits.json            record-points and least-squares fits, bound checks
  ap_probe_k2.csv      summed progression remainders for k = 2, X in [1e3, 1e6]
  ap_probe_k3.csv      the same for k = 3, X in [1e3, 1e5]
"""

import argparse
import json
import os

import numpy as np

from divcorr import analysis


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--xmax", type=int, default=10**6)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    grid = np.arange(1, args.xmax + 1, dtype=np.int64)
    report = {}
    for (k, ell), (C, alpha) in {(2, 2): (7.0, 0.51), (3, 3): (1050.0, 0.501)}.items():
        s = analysis.error_series(k, ell, 1, grid)
        with open(os.path.join(args.out, f"e{k}{ell}_dense.csv"), "w") as fh:
            fh.write(s.to_csv(C, alpha))
        fits = {m: json.loads(analysis.loglog_fit(s, m).to_json()) for m in ("record-points", "least-squares")}
        report[f"E{k}{ell}"] = {"fits": fits, "bound": {"C": C, "alpha": alpha,
                                                       **json.loads(analysis.bound_check(s, C, alpha).to_json())}}
        if (k, ell) == (2, 2):
            idx = analysis.record_points(s.grid, np.abs(s.E))
            rp = analysis.ErrorSeries(k, ell, 1, s.grid[idx], s.D[idx], np.abs(s.E[idx]))
            f = fits["record-points"]
            with open(os.path.join(args.out, "e22_loglog.csv"), "w") as fh:
                fh.write(rp.to_csv(f["C"], f["alpha"]))
        print(f"E{k}{ell}:", json.dumps(report[f"E{k}{ell}"]))
    for k, top in ((2, 6), (3, 5)):
        grid_ap = np.unique(np.round(np.logspace(3, top, 4 * (top - 3) + 1)).astype(np.int64))
        probe = analysis.ap_exponent_probe(k, 1, grid_ap)
        with open(os.path.join(args.out, f"ap_probe_k{k}.csv"), "w") as fh:
            fh.write(probe.to_csv())
        report[f"AP_k{k}"] = json.loads(probe.fit.to_json())
        print(f"AP k={k}:", probe.fit.to_json())
    with open(os.path.join(args.out, "fits.json"), "w") as fh:
        json.dump(report, fh, indent=1)


if __name__ == "__main__":
    main()
