"""Freeze the d=5 radial phase-only overlap matrices used as regression fixtures."""
import argparse
import json
from pathlib import Path

from lgent.lgcore import BasisSpec, TransverseGrid, enumerate_basis, max_mode_group, sample_mode, superpose
from lgent.mub import mub_matrix, phase_only_overlaps

MUB_R = 1


def compute(n_rho=256, n_phi=256):
    modes = enumerate_basis(BasisSpec.radial(4))
    grid = TransverseGrid.for_modes(1.0, max_mode_group(modes), n_rho, n_phi)
    fields = [sample_mode(m, 1.0, grid) for m in modes]
    M = mub_matrix(len(modes), MUB_R)
    mubs = [superpose(M[:, j], fields) for j in range(len(modes))]
    return {
        "grid": {"n_rho": n_rho, "n_phi": n_phi, "waist": 1.0},
        "mub_r": MUB_R,
        "standard": phase_only_overlaps(fields).values.tolist(),
        "mub": phase_only_overlaps(mubs).values.tolist(),
        "cross": phase_only_overlaps(fields, mubs).values.tolist(),
    }


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).parents[1] / "tests/fixtures/phase_only_d5.json")
    args = ap.parse_args()
    args.out.write_text(json.dumps(compute(), indent=2) + "\n")
    print(f"wrote {args.out}")
