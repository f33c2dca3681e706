#!/usr/bin/env python3
"""Diversity-multiplexing curves for every scheme at k=2, with crossings.

Writes a long-format CSV (scheme, r, d_low, d_high); --plot additionally
renders a figure when matplotlib is importable.
"""

import argparse
import csv
import sys
from fractions import Fraction

from relaylab.tradeoff import SCHEMES, crossings, curve, rtda_band


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta1", type=Fraction, default=Fraction(3, 4),
                    help="whole-period ratio for the repetition band")
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--out", default="", help="CSV path (default stdout)")
    ap.add_argument("--plot", default="", help="optional PNG path")
    args = ap.parse_args()

    rows = []
    for scheme in SCHEMES:
        if scheme == "rtda":
            low, high = rtda_band(2, args.delta1)
        else:
            low = high = curve(scheme, 2)
        lo, hi = low.domain
        for i in range(args.points):
            r = lo + (hi - lo) * Fraction(i, args.points)
            rows.append((scheme, float(r), float(low.d(r)), float(high.d(r))))

    dest = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(dest, lineterminator="\n")
    w.writerow(("scheme", "r", "d_low", "d_high"))
    w.writerows(rows)
    if args.out:
        dest.close()

    for a, b in (("maf", "ddf"), ("maf", "naf"), ("stc", "naf")):
        rep = crossings(a, b, 2)
        for p in rep.points:
            print(f"# crossing {a}/{b}: r={p.r} d={p.d} exact={p.exact}",
                  file=sys.stderr)

    if args.plot:
        try:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            print("# matplotlib unavailable, skipping plot", file=sys.stderr)
            return
        fig, ax = plt.subplots(figsize=(6, 4.5))
        for scheme in SCHEMES:
            pts = [(r, dl, dh) for s, r, dl, dh in rows if s == scheme]
            rs = [p[0] for p in pts]
            if scheme == "rtda":
                ax.fill_between(rs, [p[1] for p in pts], [p[2] for p in pts],
                                alpha=0.2, label="rtda band")
            else:
                ax.plot(rs, [p[1] for p in pts], label=scheme)
        ax.set_xlabel("multiplexing gain r")
        ax.set_ylabel("diversity gain d(r)")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)


if __name__ == "__main__":
    main()
