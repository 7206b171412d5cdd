"""Threshold table over N, K and delta, plus the ML error bound at a few T."""
import argparse

from sgt import bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.0)
    args = ap.parse_args()
    print(f"{'N':>5} {'K':>2} {'delta':>5} {'converse':>9} {'ml':>9} {'i*':>2} {'corollary':>9} {'dnd':>9}")
    for n in (50, 100, 500):
        for k in (2, 3, 5):
            for d in (0.0, 0.1, 0.25, 0.45):
                ml = bounds.t_threshold_ml(n, k, d, args.eps)
                try:
                    dnd = f"{bounds.t_threshold_dnd(n, k, d, args.eps):9.2f}"
                except bounds.DomainError:
                    dnd = f"{'-':>9}"
                print(f"{n:5d} {k:2d} {d:5.2f} {bounds.t_converse(n, k, d, 0.0):9.2f} {ml.value:9.2f} "
                      f"{ml.argmax:2d} {bounds.t_threshold_corollary(n, k, d, args.eps):9.2f} {dnd}")
    print("\nML error bound, N=500, K=3, M=4:")
    for t in (40, 65, 100, 150):
        b = bounds.ml_error_bound(500, 3, t, 4, 1, 0.5)
        print(f"  T={t:3d} total={b.total:.3e} best rho per i={b.best_rho}")


if __name__ == "__main__":
    main()
