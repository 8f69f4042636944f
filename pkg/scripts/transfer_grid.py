"""Winding and dominant mode of each order over a grid of charges and Burgers vectors.

    python3 scripts/transfer_grid.py [--m -3 3] [--b 1 2] [--orders -3 -1 1 3]
"""

import argparse

from forkoam import (BeamSpec, ForkedGratingSpec, GridSpec, PropagationPlan, apply_mask, diffraction_report,
                     electron_wavelength, make_beam, propagate, render_forked_grating)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs=2, default=[-3, 3], metavar=("LO", "HI"))
    ap.add_argument("--b", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--orders", type=int, nargs="+", default=[-3, -1, 1, 3])
    ap.add_argument("--n", type=int, default=1024, help="grid size")
    args = ap.parse_args()

    grid = GridSpec(args.n, args.n, 10e-9, electron_wavelength(200e3))
    period, aperture = 16 * grid.pitch, args.n / 8 * grid.pitch
    mismatches = 0
    for b in args.b:
        mask = render_forked_grating(ForkedGratingSpec(period, b, aperture), grid)
        for m in range(args.m[0], args.m[1] + 1):
            beam = make_beam(grid, BeamSpec(m, "uniform-disk", aperture))
            out = propagate(apply_mask(beam, mask), PropagationPlan("lens-fourier", 1.0))
            q_max = abs(m) + max(map(abs, args.orders)) * abs(b) + 3
            rep = diffraction_report(out, period, 1.0, args.orders, q_range=(-q_max, q_max))
            row = []
            for o in rep.orders:
                ok = o.winding == o.dominant_q == m + o.n * b
                mismatches += not ok
                row.append(f"n={o.n:+d}: {o.winding}/{o.dominant_q}{'' if ok else ' !'}")
            print(f"b={b} m={m:+d}  " + "  ".join(row))
    print(f"{mismatches} mismatches")


if __name__ == "__main__":
    main()
