"""Sorter estimate and confidence versus input charge and pinhole size.

    python3 scripts/sorter_sweep.py [--fractions 0.1 0.2 0.3]
"""

import argparse
import dataclasses

from forkoam import AmbiguousSortError, load_scenario, sort_oam
from forkoam.scenarios import scenario_grid, scenario_sorter, scenario_source


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fractions", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.4])
    ap.add_argument("--m", type=int, nargs="+", default=list(range(-5, 6)))
    args = ap.parse_args()

    base = load_scenario("sorter-demo")
    grid = scenario_grid(base)
    beams = {m: scenario_source(base, grid, m, []) for m in args.m}
    print("fraction  " + "".join(f"{m:>11d}" for m in args.m))
    for frac in args.fractions:
        cfg = dataclasses.replace(base, sorter=dataclasses.replace(base.sorter, pinhole_fraction=frac))
        sorter = scenario_sorter(cfg)
        cells = []
        for m, beam in beams.items():
            try:
                res = sort_oam(beam, sorter)
                cells.append(f"{res.m_hat:+d} ({res.confidence:.2f})")
            except AmbiguousSortError:
                cells.append("ambiguous")
        print(f"{frac:8.2f}  " + "".join(f"{c:>11}" for c in cells))


if __name__ == "__main__":
    main()
