"""On-disk formats: JSON/CSV exports, PGM holograms, atomic writes."""
from __future__ import annotations

import hashlib
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lgcore import LGIndex, mode_group
from .spdc import CoefficientTensor
from .tomo import CoincidenceRecord


def atomic_write(path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dumps_json(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode()


def csv_bytes(header: Sequence[str] | None, rows: Iterable[Sequence]) -> bytes:
    buf = io.StringIO()
    if header:
        buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue().encode()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def matrix_csv(M) -> bytes:
    return csv_bytes(None, np.asarray(M).tolist())


def modes_csv(modes: Sequence[LGIndex]) -> bytes:
    return csv_bytes(("ell", "p", "mode_group"), [(m.ell, m.p, mode_group(m)) for m in modes])


def read_modes_csv(text: str) -> list[LGIndex]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if lines[0].split(",")[:2] != ["ell", "p"]:
        raise ValueError("mode list CSV must start with an ell,p header")
    return [LGIndex(int(a), int(b)) for a, b, *_ in (ln.split(",") for ln in lines[1:])]


def tensor_to_dict(t: CoefficientTensor) -> dict:
    M = t.matrix
    inter = np.stack([M.real, M.imag], axis=-1)
    return {
        "signal_modes": [[m.ell, m.p] for m in t.signal_modes],
        "idler_modes": [[m.ell, m.p] for m in t.idler_modes],
        "matrix_re_im": inter.tolist(),
        "raw_norm": t.raw_norm,
        "quadrature_residual": t.residual,
        "meta": t.meta,
    }


def tensor_from_dict(data: dict) -> CoefficientTensor:
    arr = np.asarray(data["matrix_re_im"], dtype=float)
    return CoefficientTensor(
        tuple(LGIndex(*m) for m in data["signal_modes"]),
        tuple(LGIndex(*m) for m in data["idler_modes"]),
        arr[..., 0] + 1j * arr[..., 1],
        data.get("raw_norm", 1.0),
        data.get("quadrature_residual", 0.0),
        data.get("meta", {}),
    )


def record_json(rec: CoincidenceRecord) -> bytes:
    return dumps_json(rec.to_dict())


def read_record(path) -> CoincidenceRecord:
    return CoincidenceRecord.from_dict(json.loads(Path(path).read_text()))


def record_csv(rec: CoincidenceRecord) -> bytes:
    return matrix_csv(rec.counts)


def singles_csv(rec: CoincidenceRecord) -> bytes:
    return csv_bytes(("index", "singles_s", "singles_i"),
                     [(k, int(a), int(b)) for k, (a, b) in enumerate(zip(rec.singles_s, rec.singles_i))])


def pgm_bytes(phase: np.ndarray) -> bytes:
    """8-bit binary PGM with [0, 2 pi) mapped linearly onto 0..255."""
    levels = np.clip(np.floor(np.mod(phase, 2 * np.pi) / (2 * np.pi) * 256), 0, 255).astype(np.uint8)
    h, w = levels.shape
    return f"P5\n{w} {h}\n255\n".encode() + levels.tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError("only 8-bit PGM is supported")
    body = data[pos + 1:pos + 1 + w * h]
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w)
