"""Pilot run for the desk-scale ML reliability check (N=20, K=2, delta=0.2)."""
import argparse

from sgt.design import DesignParams
from sgt.harness import ExperimentConfig, run_sweep, worker_count


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()
    cfg = ExperimentConfig(DesignParams(20, 2, 8, 0.2), (8, 16, 32, 64), trials=args.trials,
                           master_seed=args.seed, decoders={"ml", "dnd"})
    for rec in run_sweep(cfg, worker_count(args.workers)).records:
        print(f"T={rec.T:3d} M={rec.M:4d} ml={rec.ml_success:.3f} +/- {rec.ml_ci:.3f} "
              f"dnd={rec.dnd_success:.3f} survivors={rec.mean_survivors:.2f}")


if __name__ == "__main__":
    main()
