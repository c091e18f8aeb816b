"""Richardson pair energies as functions of the coupling, written as CSV.

Each weak-coupling configuration is continued from G ~ 0 to a grid of
couplings; roots that collide on the real axis turn into complex-conjugate
pairs, which the complex detour of the continuation path handles.

    python scripts/richardson_flow.py --levels 4 --omega 2 --pairs 2 > flow.csv
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from gaudin_pair.bethe import track_richardson
from gaudin_pair.hilbert import Level, LevelScheme


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--omega", type=int, default=2)
    ap.add_argument("--pairs", type=int, default=2)
    ap.add_argument("--g-max", type=float, default=2.0)
    ap.add_argument("--points", type=int, default=20)
    args = ap.parse_args(argv)

    levels = tuple(Level(args.omega, float(k)) for k in range(args.levels))
    scheme = LevelScheme(levels, 1.0, "reduced")
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["g", "configuration", "root_index", "root_re", "root_im", "energy"])
    for g in np.linspace(args.g_max / args.points, args.g_max, args.points):
        for path in track_richardson(scheme, args.pairs, float(g)):
            if not path.success:
                continue
            config = "-".join(str(c) for c in path.config)
            energy = float(np.sum(path.end).real)
            for k, root in enumerate(sorted(path.end, key=lambda z: (z.real, z.imag))):
                out.writerow([f"{g:.6g}", config, k, f"{root.real:.12g}", f"{root.imag:.12g}", f"{energy:.12g}"])


if __name__ == "__main__":
    main()
