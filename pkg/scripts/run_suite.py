"""Run the full property suite for several orders and the reduced n = 2 fixture; write JSON."""

import argparse
import json
import time

from fracflow.verify import VerifyConfig, run_all


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    ap.add_argument("--with-2d", action="store_true", help="also run the reduced n = 2 fixture (slow)")
    ap.add_argument("--json", default="suite_results.json")
    args = ap.parse_args(argv)
    configs = [VerifyConfig(alpha=a) for a in args.alphas]
    if args.with_2d:
        configs.append(VerifyConfig.reduced_2d())
    results = []
    for cfg in configs:
        t0 = time.perf_counter()
        _, summary = run_all(cfg, progress=lambda r, a=cfg.alpha, d=cfg.dim: print(f"n={d} alpha={a} {r.line()}",
                                                                                  flush=True))
        summary["seconds"] = time.perf_counter() - t0
        results.append(summary)
    with open(args.json, "w") as fh:
        json.dump(results, fh, indent=2, default=float)
    failed = [f for s in results for f in s["failed"]]
    print("all passed" if not failed else f"failed: {failed}")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
