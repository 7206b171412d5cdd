"""Eavesdropper leakage as a function of bin size and tap probability."""
import argparse
import sys

from sgt.design import DesignParams, generate_codebook
from sgt.harness import leakage_csv_rows
from sgt.secrecy import empirical_leakage


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--k", type=int, default=1)
    ap.add_argument("--t", type=int, default=12)
    ap.add_argument("--deltas", default="0,0.25,0.5,0.75")
    ap.add_argument("--sizes", default="1,4,16,64,512")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    rows = []
    for delta in (float(x) for x in args.deltas.split(",")):
        params = DesignParams(args.n, args.k, args.t, delta, secrecy_mode="strong")
        for m in (int(x) for x in args.sizes.split(",")):
            cb = generate_codebook(params, args.seed, m=m)
            est = empirical_leakage(cb, delta, args.trials, args.seed)
            rows.append((args.n, args.k, args.t, m, delta, args.trials, est))
            print(f"delta={delta:.2f} M={m:4d} I={est.mi_bits:.4f} +/- {est.std_err:.4f} bits", file=sys.stderr)
    text = leakage_csv_rows(rows)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)


if __name__ == "__main__":
    main()
