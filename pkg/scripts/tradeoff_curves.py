"""Tradeoff sweeps (fix one fidelity, maximize the other) with an optional plot.

    python3 scripts/tradeoff_curves.py --profile relaxed --restarts 8 --plot
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from qdeletion import optimizer, signaling
from qdeletion.cli import SWEEP_COLUMNS, fmt


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", default="relaxed")
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--step", type=float, default=0.05)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--plot", action="store_true", help="also write a PNG (needs matplotlib)")
    args = ap.parse_args()

    grid = list(np.round(np.arange(0.5, 1.0 + 1e-9, args.step), 10))
    cfg = optimizer.OptimizerConfig(profile=args.profile, restarts=args.restarts, seed=args.seed, workers=args.workers)
    args.outdir.mkdir(parents=True, exist_ok=True)
    curves = {}
    for kind in ("deletion", "preservation"):
        points = optimizer.sweep(cfg, grid, kind)
        curves[kind] = points
        path = args.outdir / f"tradeoff_{args.profile}_{kind}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SWEEP_COLUMNS + ("helstrom_success",))
            for pt in points:
                p = pt.params
                row = [pt.fixed_kind, pt.fixed_value, pt.max_other, pt.sum, p.eta1, p.eta2, p.txx, p.tzz, p.tzy,
                       pt.ns_norm, pt.min_eigenvalue, pt.restarts_used, pt.converged]  # fmt: skip
                w.writerow([fmt(v) for v in row] + [fmt(signaling.helstrom_success(p))])
        for pt in points:
            print(f"fix {kind} = {pt.fixed_value:.2f}: max other = {pt.max_other:.4f}, sum = {pt.sum:.4f}")
        print(f"wrote {path}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, 2, figsize=(9, 3.8), sharey=True)
        for ax, (kind, points) in zip(axes, curves.items()):
            xs = [pt.fixed_value for pt in points]
            ax.plot(xs, [pt.max_other for pt in points], "o-", label="max of the other fidelity")
            ax.plot(xs, [pt.sum for pt in points], "s--", label="sum")
            ax.axhline(1.5, color="grey", lw=0.8)
            ax.set_xlabel(f"fixed F_{'d' if kind == 'deletion' else 'p'}")
            ax.legend(fontsize=8)
        fig.suptitle(f"profile: {args.profile}")
        fig.tight_layout()
        png = args.outdir / f"tradeoff_{args.profile}.png"
        fig.savefig(png, dpi=120)
        print(f"wrote {png}")


if __name__ == "__main__":
    main()
