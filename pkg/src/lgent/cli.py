"""Command-line pipeline: simulate -> measure -> certify -> report."""
from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .certify import (DataError, UnsupportedEstimatorError, bound_curve, certify_dimension,
                      exact_fidelity, fidelity_lower_bound, monte_carlo_errors, oracle_fidelity,
                      parse_mub_label)
from .cgh import reconstruct_first_order, slm_field, synthesize_type1
from .config import ConfigDocument, ConfigError, parse_config
from .formats import (atomic_write, csv_bytes, dumps_json, matrix_csv, modes_csv, pgm_bytes, read_record,
                      record_csv, record_json, sha256, singles_csv, tensor_to_dict)
from .lgcore import LGIndex, TransverseGrid, enumerate_basis, max_mode_group, sample_mode, superpose
from .mub import family_to_dict, is_prime, mub_family, mub_matrix, phase_only_overlaps, tilted_family
from .spdc import CoefficientTensor, QuadratureError, lg_coefficients, schmidt_analysis, sweep_gamma
from .tomo import (EfficiencyModel, JointState, LossCorrectionError, TargetState, loss_correct, nominate_target,
                   simulate_counts)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
SUBCOMMANDS = ("simulate", "certify", "mub", "cgh", "sweep-gamma", "phase-only", "oracle")


class _Outputs:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.files: list[Path] = []

    def write(self, rel: str, data: bytes):
        self.files.append(atomic_write(self.root / rel, data))

    def cleanup(self):
        for f in self.files:
            if f.exists():
                f.unlink()
        self.files.clear()


def build_state(doc: ConfigDocument) -> JointState:
    modes = enumerate_basis(doc.basis)
    if doc["state"]["source"] == "spdc":
        tensor = lg_coefficients(doc.optics, modes, modes)
    else:
        tensor = CoefficientTensor.maximally_entangled(modes)
    n = doc["noise"]
    return JointState(tensor, n["visibility"], n["eps_ell"], n["eps_p"])


def _efficiency(doc: ConfigDocument, d: int) -> EfficiencyModel:
    e = doc["efficiency"]
    if e["rule"] == "uniform":
        return EfficiencyModel.uniform(d)
    if e["rule"] == "geometric":
        return EfficiencyModel.geometric(d, e["ratio"])
    if len(e["signal"]) != d or len(e["idler"]) != d:
        raise ConfigError(f"explicit efficiencies must have length {d}", "/efficiency")
    return EfficiencyModel(np.asarray(e["signal"]), np.asarray(e["idler"]))


def _basis_labels(doc: ConfigDocument, d: int, mubs=None, bases=None, target="maximal") -> list[str]:
    if bases:
        labels = list(bases)
    else:
        k = mubs if mubs is not None else doc["measurement"]["mubs"]
        sel = doc["measurement"]["bases"]
        if sel != "all" and k is None:
            labels = list(sel)
        else:
            k = d if k is None else k
            if not is_prime(d):
                k = 0
            if k > d:
                raise ConfigError(f"cannot select {k} MUBs in dimension {d}", "/measurement/mubs")
            labels = ["standard"] + [f"mub_r={r}" for r in range(k)]
        if target == "tilted":
            labels += [lab.replace("mub_", "tilted_") for lab in labels if lab.startswith("mub_")]
    for lab in labels:
        if lab == "standard":
            continue
        kind, _, r = lab.partition("_r=")
        if kind not in ("mub", "tilted") or not r.isdigit() or int(r) >= d:
            raise ConfigError(f"unknown basis label {lab!r}", "/measurement/bases")
        if not is_prime(d):
            raise ConfigError(f"MUB bases need a prime dimension, got d={d}", "/basis/dimension")
    if "standard" not in labels:
        labels.insert(0, "standard")
    return labels


def _simulate(doc, out: _Outputs, seed, mubs, target, bases):
    state = build_state(doc)
    t = state.tensor
    d = t.dim
    eff = _efficiency(doc, d)
    budget = doc["measurement"]["pairs_budget"]
    chash = doc.hash()
    out.write("modes.csv", modes_csv(t.signal_modes))
    out.write("tensor.json", dumps_json(tensor_to_dict(t)))
    out.write("tensor_probabilities.csv", matrix_csv(t.probabilities()))
    rep = schmidt_analysis(t)
    out.write("optics.json", dumps_json({
        "optics": doc.optics_report(),
        "schmidt_number": rep.schmidt_number,
        "schmidt_coefficients": rep.coefficients.tolist(),
        "diag_fraction": t.diag_fraction(),
    }))
    labels = _basis_labels(doc, d, mubs, bases, target)
    records = {}
    tilted = None
    for lab in labels:
        if lab.startswith("tilted_"):
            if tilted is None:
                lam = nominate_target(loss_correct(records["standard"])).lam
                tilted = tilted_family(lam)
            M = tilted.matrix(int(lab.split("=")[1]))
        elif lab == "standard":
            M = np.eye(d)
        else:
            M = mub_matrix(d, int(lab.split("=")[1]))
        rec = simulate_counts(state, M, M, eff, budget, seed, lab, lab, chash)
        records[lab] = rec
        out.write(f"records/{lab}.json", record_json(rec))
        out.write(f"records/{lab}.csv", record_csv(rec))
        out.write(f"records/{lab}_singles.csv", singles_csv(rec))


def _load_records(path: Path) -> dict:
    if not path.is_dir():
        raise DataError(f"record directory {path} not found")
    recs = {}
    for f in sorted(path.glob("*.json")):
        rec = read_record(f)
        recs[rec.basis_s] = rec
    if not recs:
        raise DataError(f"no coincidence records in {path}")
    return recs


def _certify_fidelities(out: _Outputs, path):
    entries = json.loads(Path(path).read_text()) if path != "reference" else json.loads(
        resources.files("lgent").joinpath("data/reference_fidelities.json").read_text())
    rows = []
    for e in entries:
        d = int(e["d"])
        res = certify_dimension(float(e["fidelity"]), np.full(d, d**-0.5))
        rows.append({"name": e.get("name", ""), "d": d, "fidelity": float(e["fidelity"]),
                     "d_ent": res.d_ent, "bound": res.bound, "margin": res.margin})
    out.write("certification_table.json", dumps_json(rows))
    out.write("certification_table.csv", csv_bytes(("name", "d", "fidelity", "d_ent", "bound", "margin"),
                                                   [tuple(r.values()) for r in rows]))


def _certify(doc, out: _Outputs, seed, mubs, target, records_dir):
    if target == "tilted":
        raise UnsupportedEstimatorError(
            "fidelity to a tilted target cannot be bounded from counts; run the 'oracle' subcommand")
    recs = _load_records(Path(records_dir) if records_dir else out.root / "records")
    if "standard" not in recs:
        raise DataError("standard-basis record missing")
    d = recs["standard"].d
    avail = sorted(r for r in (parse_mub_label(k) for k in recs) if r is not None)
    consecutive = 0
    while consecutive in avail:
        consecutive += 1
    k = mubs if mubs is not None else doc["measurement"]["mubs"]
    k = consecutive if k is None else k
    if k < 1 or k > consecutive:
        raise DataError(f"need MUB records r=0..{k - 1}, found r={avail}")
    use = {lab: recs[lab] for lab in ["standard"] + [f"mub_r={r}" for r in range(k)]}
    if k == d and is_prime(d):
        est, estimator = exact_fidelity(use), lambda s: exact_fidelity(s)
    else:
        est, estimator = fidelity_lower_bound(use), lambda s: fidelity_lower_bound(s)
    trials = doc["certification"]["trials"]
    _, err = monte_carlo_errors(use, estimator, trials, seed)
    lam = np.full(d, d**-0.5)
    res = certify_dimension(est, lam)
    out.write("certification.json", dumps_json({
        "fidelity": est.value,
        "error": err,
        "method": est.method,
        "bases_used": list(est.bases),
        "d": d,
        "target": "maximal",
        "bound_table": {str(r): b for r, b in res.table.items()},
        "d_ent": res.d_ent,
        "margin": res.margin,
        "monte_carlo_trials": trials,
    }))
    out.write("bound_table.csv", csv_bytes(("r", "B_r"), sorted(res.table.items())))
    curve = bound_curve(recs, range(1, consecutive + 1), lam)
    out.write("bound_curve.csv", csv_bytes(("k", "fidelity_bound", "d_ent"), curve))


def _mub(doc, out: _Outputs):
    modes = enumerate_basis(doc.basis)
    d = len(modes)
    if not is_prime(d):
        raise ConfigError(f"MUB families need a prime dimension, got d={d}", "/basis/dimension")
    out.write("modes.csv", modes_csv(modes))
    out.write(f"mub_family_d{d}.json", dumps_json(family_to_dict(mub_family(d))))


def _cgh(doc, out: _Outputs):
    c = doc["cgh"]
    modes = enumerate_basis(doc.basis)
    d = len(modes)
    chosen = modes if c["modes"] == "all" else [LGIndex(*m) for m in c["modes"]]
    jobs = [(f"lg_l{m.ell}_p{m.p}", [m], [1.0]) for m in chosen]
    for r, j in c["mub_states"]:
        if not is_prime(d):
            raise ConfigError("MUB holograms need a prime dimension", "/cgh/mub_states")
        jobs.append((f"mub_r{r}_j{j}", modes, mub_matrix(d, r)[:, j]))
    rows = []
    for label, ms, coeffs in jobs:
        fld = slm_field(ms, coeffs, c["grid_px"], c["scale_px"])
        holo = synthesize_type1(fld, c["period_px"], c["pitch_um"], label)
        score = reconstruct_first_order(holo).overlap
        out.write(f"holograms/{label}.pgm", pgm_bytes(holo.phase))
        out.write(f"holograms/{label}.json", dumps_json({
            "label": label, "pitch_um": c["pitch_um"], "period_px": c["period_px"],
            "grid_px": c["grid_px"], "scale_px": c["scale_px"], "first_order_overlap": score}))
        rows.append((label, score))
    out.write("cgh_overlaps.csv", csv_bytes(("label", "overlap"), rows))


def _sweep(doc, out: _Outputs):
    modes = enumerate_basis(doc.basis)
    rows = sweep_gamma(doc.optics, doc["sweep"]["gammas"], modes)
    out.write("sweep.csv", csv_bytes(("gamma", "schmidt_K", "diag_fraction"),
                                     [(r.gamma, r.schmidt_K, r.diag_fraction) for r in rows]))


def _phase_only(doc, out: _Outputs):
    modes = enumerate_basis(doc.basis)
    d = len(modes)
    r = doc["phase_only"]["mub_r"]
    if not is_prime(d) or r >= d:
        raise ConfigError("phase-only MUB comparison needs a prime dimension and r < d", "/phase_only")
    grid = TransverseGrid.for_modes(1.0, max_mode_group(modes))
    fields = [sample_mode(m, 1.0, grid) for m in modes]
    M = mub_matrix(d, r)
    mubs = [superpose(M[:, j], fields) for j in range(d)]
    out.write("modes.csv", modes_csv(modes))
    out.write("phase_only_standard.csv", matrix_csv(phase_only_overlaps(fields).values))
    out.write("phase_only_mub.csv", matrix_csv(phase_only_overlaps(mubs).values))
    out.write("phase_only_cross.csv", matrix_csv(phase_only_overlaps(fields, mubs).values))


def _oracle(doc, out: _Outputs):
    state = build_state(doc)
    d = state.tensor.dim
    tgt = nominate_target(state.tensor.probabilities())
    report = {}
    for name, target in (("maximal", TargetState.uniform(d)), ("tilted", tgt)):
        est = oracle_fidelity(state, target)
        res = certify_dimension(est, target.lam)
        report[name] = {"fidelity": est.value, "method": est.method, "target_lambda": target.lam.tolist(),
                        "d_ent": res.d_ent, "margin": res.margin,
                        "bound_table": {str(k): v for k, v in res.table.items()}}
    report["d"] = d
    out.write("oracle.json", dumps_json(report))


def run_pipeline(doc: ConfigDocument, subcommand: str, seed: int | None = None, out_dir=None, mubs=None,
                 target=None, bases=None, records_dir=None, fidelities=None) -> dict:
    """Run one subcommand, write its files atomically, and return the manifest."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    seed = doc["seed"] if seed is None else seed
    target = target or doc["certification"]["target"]
    out = _Outputs(Path(out_dir or doc["output_dir"]))
    t0 = time.perf_counter()
    try:
        if subcommand == "simulate":
            _simulate(doc, out, seed, mubs, target, bases)
        elif subcommand == "certify":
            if fidelities:
                _certify_fidelities(out, fidelities)
            else:
                _certify(doc, out, seed, mubs, target, records_dir)
        elif subcommand == "mub":
            _mub(doc, out)
        elif subcommand == "cgh":
            _cgh(doc, out)
        elif subcommand == "sweep-gamma":
            _sweep(doc, out)
        elif subcommand == "phase-only":
            _phase_only(doc, out)
        else:
            _oracle(doc, out)
    except BaseException:
        out.cleanup()
        raise
    manifest = {
        "subcommand": subcommand,
        "config": doc.data,
        "config_hash": doc.hash(),
        "seed": seed,
        "versions": {"lgent": __version__, "numpy": np.__version__},
        "files": [{"path": str(f.relative_to(out.root)), "sha256": sha256(f), "bytes": f.stat().st_size}
                  for f in out.files],
        "timing_s": round(time.perf_counter() - t0, 3),
    }
    atomic_write(out.root / f"manifest_{subcommand}.json", dumps_json(manifest))
    return manifest


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lgent", description="Full-field LG entanglement simulation and certification")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", type=Path, help="JSON configuration file (defaults used if omitted)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", type=Path, help="output directory")
    ap.add_argument("--mubs", type=int, help="use MUBs r = 0..k-1")
    ap.add_argument("--target", choices=("maximal", "tilted"))
    ap.add_argument("--bases", help="comma-separated basis labels, e.g. standard,mub_r=0")
    ap.add_argument("--records", type=Path, help="directory of coincidence JSON records (certify)")
    ap.add_argument("--fidelities", help="JSON list of {name, d, fidelity} to certify, or 'reference' for the bundled set")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text() if args.config else "{}"
        doc = parse_config(text)
        bases = [b.strip() for b in args.bases.split(",") if b.strip()] if args.bases else None
        manifest = run_pipeline(doc, args.subcommand, args.seed, args.out, args.mubs, args.target, bases,
                                args.records, args.fidelities)
    except (ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, UnsupportedEstimatorError, LossCorrectionError, ValueError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except QuadratureError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for f in manifest["files"]:
        print(f["path"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
