import json

import pytest

from lgent.cli import EXIT_CONFIG, EXIT_DATA, main, run_pipeline
from lgent.config import from_dict

SMALL = {
    "basis": {"kind": "azimuthal", "ell_range": [-3, 3], "p_range": [0, 0], "dimension": None},
    "measurement": {"pairs_budget": 50000},
    "certification": {"trials": 100},
    "cgh": {"grid_px": 128, "scale_px": 12.0, "modes": [[1, 0]], "mub_states": [[1, 2]]},
    "sweep": {"gammas": [1.0, 5.26]},
}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(SMALL))
    return p


def test_simulate_then_certify_ideal(tmp_path):
    doc = from_dict({**SMALL, "state": {"source": "maximal"}})
    run_pipeline(doc, "simulate", out_dir=tmp_path)
    run_pipeline(doc, "certify", out_dir=tmp_path)
    cert = json.loads((tmp_path / "certification.json").read_text())
    assert cert["d_ent"] == 7 and cert["method"] == "exact-complete-MUB"


def test_manifest_lists_every_file(tmp_path):
    man = run_pipeline(from_dict(SMALL), "simulate", out_dir=tmp_path)
    listed = {f["path"] for f in man["files"]}
    on_disk = {str(p.relative_to(tmp_path)) for p in tmp_path.rglob("*") if p.is_file()}
    assert on_disk - listed == {"manifest_simulate.json"}


def test_subset_certify_uses_lower_bound(tmp_path, cfg_path):
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out), "--mubs", "3"]) == 0
    assert main(["certify", "--config", str(cfg_path), "--out", str(out)]) == 0
    cert = json.loads((out / "certification.json").read_text())
    assert cert["method"] == "lower-bound-k-MUB" and len(cert["bases_used"]) == 4


def test_reference_fixture(tmp_path):
    assert main(["certify", "--fidelities", "reference", "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "certification_table.json").read_text())
    assert [r["d_ent"] for r in rows[:4]] == [7, 11, 18, 26]


@pytest.mark.parametrize("cmd", ["mub", "cgh", "sweep-gamma", "phase-only", "oracle"])
def test_other_subcommands(tmp_path, cmd):
    doc = from_dict({**SMALL, "basis": {"kind": "radial", "p_range": [0, 4], "ell_range": [0, 0]}})
    man = run_pipeline(doc, cmd, out_dir=tmp_path)
    assert man["files"]


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"optics": {"pump_waist_um": -1}}')
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["certify", "--out", str(tmp_path / "empty")]) == EXIT_DATA
    assert main(["certify", "--target", "tilted", "--out", str(tmp_path)]) == EXIT_DATA


def test_failure_cleans_partial_outputs(tmp_path):
    doc = from_dict(SMALL)
    with pytest.raises(Exception):
        run_pipeline(doc, "simulate", out_dir=tmp_path, bases=["standard", "mub_r=99"])
    assert not [p for p in tmp_path.rglob("*") if p.is_file()]
