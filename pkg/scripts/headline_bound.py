"""Maximum F_p + F_d under each constraint profile, side by side.

    python3 scripts/headline_bound.py --restarts 64 --out results/headline.csv
"""

import argparse
import csv
import time
from pathlib import Path

from qdeletion import constraints, optimizer, signaling
from qdeletion.constraints import ConstraintProfile
from qdeletion.errors import NoFeasiblePoint


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--restarts", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/headline.csv"))
    args = ap.parse_args()

    rows = []
    for profile in ConstraintProfile:
        cfg = optimizer.OptimizerConfig(profile=profile, restarts=args.restarts, seed=args.seed, workers=args.workers)
        start = time.perf_counter()
        try:
            res = optimizer.maximize_sum(cfg)
        except NoFeasiblePoint as exc:
            res = exc.result
        elapsed = time.perf_counter() - start
        p = res.params
        row = {
            "profile": profile.value,
            "objective": res.objective,
            "eta1": p.eta1,
            "eta2": p.eta2,
            "txx": p.txx,
            "ns_norm": res.report.ns_norm,
            "matrix_residual": constraints.ns_residual_matrix(p),
            "helstrom_success": signaling.helstrom_success(p),
            "feasible_restarts": sum(s.feasible for s in res.restarts),
            "seconds": elapsed,
        }
        rows.append(row)
        print(f"{profile.value:>10}: F_p + F_d = {res.objective:.6f}  helstrom = {row['helstrom_success']:.6f}  ({elapsed:.1f}s)")

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
