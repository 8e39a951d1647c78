"""Monte Carlo signaling game at the optimum and at a corrupted machine.

    python3 scripts/signaling_game.py --trials 1000000
"""

import argparse

from qdeletion import constraints, signaling
from qdeletion.machine import MachineParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    best = MachineParams.optimum()
    cases = {
        "optimum": best,
        "phi' moved to |01>": best.replace(p=(1, 0, 0, 0, 0, 1, 0, 0)),
        "eta2 = 0.5 with optimum amplitudes": best.replace(eta2=0.5),
    }
    for name, params in cases.items():
        stats = signaling.simulate_game(params, args.trials, args.seed, workers=args.workers)
        print(
            f"{name:>36}: residual {constraints.ns_residual_matrix(params):.3f}  "
            f"analytic {stats.analytic_rate:.5f}  empirical {stats.empirical_rate:.5f}  z = {stats.z_score:+.2f}"
        )


if __name__ == "__main__":
    main()
