"""Gap between the two curvature evaluators as the grid and lattice size vary."""

import argparse
import time

import numpy as np

from fracflow.kernel import GRADIENT, PRINCIPAL, FlowParams, default_scheme, h_alpha
from fracflow.torus import GridSpec, random_band_limited


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--grids", type=int, nargs="+", default=None)
    ap.add_argument("--cells", type=int, nargs="+", default=[1, 2, 4])
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--fields", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    grids = args.grids or ([32, 64, 128, 256] if args.dim == 1 else [16, 32])
    params = FlowParams(args.alpha, dim=args.dim)
    print("m,cells,worst_gap,seconds_per_field")
    for m in grids:
        g = GridSpec(args.dim, m)
        for M in args.cells:
            rng = np.random.default_rng(args.seed)
            worst, t0 = 0.0, time.perf_counter()
            for _ in range(args.fields):
                u = random_band_limited(g, rng)
                s = default_scheme(u, M)
                gap = np.abs(h_alpha(u, params, s, GRADIENT).values - h_alpha(u, params, s, PRINCIPAL).values)
                worst = max(worst, float(gap.max()))
            print(f"{m},{M},{worst:.3e},{(time.perf_counter() - t0) / args.fields:.3f}", flush=True)


if __name__ == "__main__":
    main()
