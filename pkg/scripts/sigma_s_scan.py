"""Diagonal weight of the radial d=5 and azimuthal d=11 states against the phase-matching width."""
import argparse
import sys

from lgent.formats import csv_bytes
from lgent.lgcore import BasisSpec, enumerate_basis
from lgent.spdc import OpticsConfig, lg_coefficients


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--widths", type=float, nargs="+", default=[0.02, 0.05, 0.1, 0.2, 0.5, 1.0])
    args = ap.parse_args()
    radial = enumerate_basis(BasisSpec.radial(4))
    azim = enumerate_basis(BasisSpec.azimuthal(-5, 5))
    rows = []
    for s in args.widths:
        cfg = OpticsConfig(phase_matching_width=s)
        rows.append((s, lg_coefficients(cfg, radial, radial).diag_fraction(),
                     lg_coefficients(cfg, azim, azim).diag_fraction()))
    sys.stdout.write(csv_bytes(("sigma_s_rad_per_um", "radial_diag_fraction", "azimuthal_diag_fraction"),
                               rows).decode())


if __name__ == "__main__":
    main()
