"""DND success vs T at N=500 and an ML/DND comparison at N=50.

Writes two sweep CSVs ready for plotting elsewhere.
"""
import argparse
import math

from sgt import bounds
from sgt.design import DesignParams
from sgt.harness import ExperimentConfig, emit_csv, run_sweep, worker_count


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=8000)
    ap.add_argument("--ml-trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--prefix", default="figure")
    args = ap.parse_args()
    workers = worker_count(args.workers)

    big = ExperimentConfig(DesignParams(500, 3, 40, 0.1), tuple(range(40, 281, 20)),
                           trials=args.trials, master_seed=args.seed, eps=0.5)
    result = run_sweep(big, workers)
    emit_csv(result, f"{args.prefix}_dnd_n500.csv")
    thr = bounds.t_threshold_dnd(500, 3, 0.1, 0.5)
    print(f"N=500 DND threshold (eps=0.5): {thr:.1f}")
    for rec in result.records:
        print(f"  T={rec.T:3d} M={rec.M:5d} success={rec.dnd_success:.4f} +/- {rec.dnd_ci:.4f}")

    small = ExperimentConfig(DesignParams(50, 3, 10, 0.1), (10, 15, 20, 25, 30, 40, 50, 60),
                             trials=args.ml_trials, master_seed=args.seed, decoders={"ml", "dnd"})
    result = run_sweep(small, workers)
    emit_csv(result, f"{args.prefix}_ml_dnd_n50.csv")
    print("N=50 ML vs DND:")
    for rec in result.records:
        print(f"  T={rec.T:3d} M={rec.M:3d} ml={rec.ml_success:.3f} dnd={rec.dnd_success:.3f}")
    print(f"ML threshold at N=50: {bounds.t_threshold_ml(50, 3, 0.1, 0.0).value:.1f}; "
          f"converse: {bounds.t_converse(50, 3, 0.1, 0.0):.1f}; log2 C(50,3)={math.log2(math.comb(50, 3)):.2f}")


if __name__ == "__main__":
    main()
