"""Integrated order powers and asymmetries for the default grating.

    python3 scripts/fig3_table.py [--m 0 1 -1] [--orders 7]
"""

import argparse
import dataclasses

from forkoam import intensity_difference, load_scenario, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs="+", default=[0, 1, -1])
    ap.add_argument("--orders", type=int, default=7, help="largest |n| to measure")
    args = ap.parse_args()

    cfg = load_scenario("fig3")
    cfg = dataclasses.replace(cfg, beam=dataclasses.replace(cfg.beam, m=tuple(args.m)),
                              analysis=dataclasses.replace(cfg.analysis, n_min=-args.orders, n_max=args.orders))
    report = run_scenario(cfg, keep_fields=False)

    print("   n  " + "".join(f"{'m=' + str(m):>13}" for m in args.m))
    for n in range(-args.orders, args.orders + 1):
        print(f"{n:4d}  " + "".join(f"{r.orders.power(n):13.4e}" for r in report.runs))
    print()
    for r in report.runs:
        diffs = "  ".join(f"{n}: {intensity_difference(r.orders, n):.3%}" for n in range(1, args.orders + 1, 2))
        print(f"m={r.m:+d} intensity difference  {diffs}")


if __name__ == "__main__":
    main()
