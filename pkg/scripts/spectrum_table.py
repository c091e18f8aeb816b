"""Energy table of a degenerate scheme, grouped by eigenstate class.

For each sector the Bethe records are listed next to the closed-form
energy they should have (0 for generic states, -|G| sum c^2 Omega + |G| sum 2/z
for zero-class states) and checked against exact diagonalization.

    python scripts/spectrum_table.py configs/two_level.toml
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from gaudin_pair.cli import parse_config
from gaudin_pair.hilbert import Mode
from gaudin_pair.spectrum import RecordClass, assemble_spectrum


def predicted_energy(scheme, rec) -> float:
    base = -scheme.g * float(np.sum(scheme.cs**2 * scheme.omegas))
    if rec.cls is RecordClass.EMPTY:
        return 0.0
    if rec.cls is RecordClass.GENERIC:
        return 0.0
    roots = np.asarray(rec.roots, dtype=complex)
    if rec.cls is RecordClass.TALMI_ZERO:
        return base + scheme.g * float(np.sum(2.0 / roots).real)
    # Hole states share eigenvalues with their particle partner.
    return float(scheme.g * np.sum(scheme.cs**2 * np.asarray(rec.invariant_eigenvalues)))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    args = ap.parse_args(argv)
    scheme = parse_config(args.config).scheme
    if scheme.mode is not Mode.DEGENERATE:
        print("the table is defined for mode=degenerate", file=sys.stderr)
        return 3
    report = assemble_spectrum(scheme)
    print(f"{'N':>3}  {'class':<10}  {'energy':>20}  {'closed form':>20}  {'residual':>9}  roots")
    for rec in report.records:
        roots = " ".join(f"{z.real:.6g}{z.imag:+.3g}j" for z in rec.roots) or "-"
        print(
            f"{rec.sector:>3}  {rec.cls.value:<10}  {rec.energy:>20.12f}  {predicted_energy(scheme, rec):>20.12f}"
            f"  {rec.max_residual:>9.1e}  {roots}"
        )
    for n, cmp in sorted(report.comparison.items()):
        print(f"sector {n}: {cmp.covered}/{cmp.oracle_dim} oracle states reproduced, {len(cmp.unmatched_bethe)} unmatched")
    print(f"total coverage {report.coverage:.1%}")
    return 0 if report.all_matched else 1


if __name__ == "__main__":
    sys.exit(main())
