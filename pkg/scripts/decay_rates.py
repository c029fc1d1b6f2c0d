"""Fitted decay rate of single-mode data against omega0 |k|^(1+alpha), for several orders."""

import argparse
import csv
import sys

from fracflow.verify import VerifyConfig, decay_rate_run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    ap.add_argument("--modes", type=int, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--amplitude", type=float, default=1e-2)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["alpha", "k", "predicted", "fitted", "relative_error", "r2"])
    for alpha in args.alphas:
        cfg = VerifyConfig(alpha=alpha, decay_amplitude=args.amplitude)
        for k in args.modes:
            r = decay_rate_run(cfg, k)
            w.writerow([alpha, k, r["predicted"], r.get("rate"), r.get("relative_error"), r.get("r2")])
            out.flush()


if __name__ == "__main__":
    main()
