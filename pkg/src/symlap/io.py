"""File formats: mesh JSON, Matrix Market operators, spectrum CSV, report JSON."""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
from pathlib import Path

import numpy as np
import scipy.io

from . import __version__
from .core import OperatorPair
from .discretization.mesh import IntrinsicMesh, MeshError, require_valid
from .spectral import SpectrumResult

TOOL = "symlap"


class InputError(ValueError):
    """Malformed or missing input file."""


def config_checksum(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def provenance(config: dict) -> dict:
    return {"tool": TOOL, "version": __version__, "config_checksum": config_checksum(config)}


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


# -- meshes ----------------------------------------------------------------


def mesh_to_dict(mesh: IntrinsicMesh) -> dict:
    doc = {
        "vertices": int(mesh.n_vertices),
        "triangles": mesh.faces.tolist(),
        "edge_lengths": [[int(i), int(j), float(l)] for (i, j), l in zip(mesh.edges, mesh.lengths)],
        "meta": mesh.meta,
    }
    if mesh.positions is not None:
        doc["positions"] = mesh.positions.tolist()
    return doc


def mesh_from_dict(doc: dict) -> IntrinsicMesh:
    try:
        n = int(doc["vertices"])
        faces = np.asarray(doc["triangles"], dtype=np.int64).reshape(-1, 3)
        table = {}
        for i, j, l in doc["edge_lengths"]:
            key = (min(int(i), int(j)), max(int(i), int(j)))
            if key in table:
                raise InputError(f"edge {key} listed twice")
            table[key] = float(l)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed mesh document: {exc}") from None
    positions = doc.get("positions")
    positions = None if positions is None else np.asarray(positions, dtype=float)

    def length_of(i, j):
        try:
            return table[(i, j)]
        except KeyError:
            raise InputError(f"edge ({i}, {j}) has no length") from None

    mesh = IntrinsicMesh.from_faces(n, faces, length_of, positions, doc.get("meta") or {})
    if len(mesh.edges) != len(table):
        raise InputError("edge_lengths lists edges that belong to no triangle")
    try:
        return require_valid(mesh)
    except MeshError as exc:
        raise InputError(str(exc)) from None


def write_mesh(path, mesh: IntrinsicMesh, config: dict | None = None) -> None:
    doc = mesh_to_dict(mesh)
    doc["provenance"] = provenance(config or {"recipe": mesh.meta.get("recipe")})
    Path(path).write_text(_dump(doc), encoding="utf-8")


def read_mesh(path) -> IntrinsicMesh:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InputError(f"no such mesh file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return mesh_from_dict(doc)


# -- operators ---------------------------------------------------------------


def write_operator(path, op: OperatorPair, config: dict) -> tuple[Path, Path]:
    """Stiffness to ``path`` and mass to ``<stem>.mass.mtx`` (Matrix Market coordinate)."""
    path = Path(path)
    mass_path = path.with_name(path.stem + ".mass.mtx")
    p = provenance(config)
    for target, A, what in ((path, op.K, "stiffness"), (mass_path, op.M, "mass")):
        comment = f" {TOOL} {p['version']} config {p['config_checksum']} {op.label} {what} basis {op.basis.value}"
        buf = _io.BytesIO()
        scipy.io.mmwrite(buf, A.tocoo(), comment=comment, field="real", symmetry="general")
        target.write_bytes(buf.getvalue())
    return path, mass_path


# -- spectra -----------------------------------------------------------------


def write_spectrum_csv(path, spec: SpectrumResult, config: dict) -> None:
    p = provenance(config)
    ids = spec.cluster_ids()
    buf = _io.StringIO()
    buf.write(f"# {TOOL} {p['version']}\n# config_checksum {p['config_checksum']}\n")
    buf.write("# config " + json.dumps(config, sort_keys=True, separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "lambda", "residual", "cluster"])
    for i, (lam, res) in enumerate(zip(spec.values, spec.residuals)):
        w.writerow([i, repr(float(lam)), repr(float(res)), int(ids[i])])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_spectrum_csv(path) -> tuple[dict, list[dict]]:
    """Return ``(config, rows)`` of a spectrum file written by ``write_spectrum_csv``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"no such spectrum file: {path}") from None
    config, body = {}, []
    for line in text.splitlines():
        if line.startswith("# config "):
            config = json.loads(line[len("# config ") :])
        elif not line.startswith("#"):
            body.append(line)
    try:
        rows = [
            {"index": int(r["index"]), "lambda": float(r["lambda"]), "residual": float(r["residual"]), "cluster": int(r["cluster"])}
            for r in csv.DictReader(body)
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed spectrum CSV ({exc})") from None
    return config, rows


# -- reports -----------------------------------------------------------------


def write_json(path, doc: dict, config: dict) -> None:
    doc = dict(doc)
    doc["provenance"] = provenance(config)
    Path(path).write_text(_dump(doc), encoding="utf-8")
