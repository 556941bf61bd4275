"""JSON and CSV serialization for GDMs, CI vectors, curves and trajectories."""

from __future__ import annotations

import csv
import json
import platform
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

from .basis import Configuration
from .errors import DomainError
from .gdm import GDM, CIVector

FLOAT_FORMAT = ".16e"  # 17 significant digits, round-trips every double


def _number(x) -> str:
    return format(float(x), FLOAT_FORMAT)


def gdm_to_dict(D: GDM) -> dict:
    return {
        "n_electrons": D.n_electrons,
        "basis_size": D.G,
        "basis_tag": D.basis_tag,
        "matrix": [[float(z.real), float(z.imag)] for z in D.matrix.ravel()],
    }


def gdm_from_dict(data: dict) -> GDM:
    try:
        G = int(data["basis_size"])
        entries = np.asarray(data["matrix"], dtype=float)
        N = int(data["n_electrons"])
        tag = str(data.get("basis_tag", "site"))
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed GDM document: {exc}") from None
    if entries.shape != (G * G, 2):
        raise DomainError(f"GDM matrix holds {entries.shape[0]} entries, expected {G * G} [re, im] pairs")
    return GDM((entries[:, 0] + 1j * entries[:, 1]).reshape(G, G), N, tag)


def civector_to_dict(psi: CIVector) -> dict:
    return {
        "n_electrons": psi.n_electrons,
        "n_orbitals": psi.n_orbitals,
        "coefficients": [
            [list(c.orbitals), float(z.real), float(z.imag)]
            for c, z in zip(psi.configurations, psi.coefficients)
            if z != 0
        ],
    }


def civector_from_dict(data: dict) -> CIVector:
    try:
        N, K = int(data["n_electrons"]), int(data["n_orbitals"])
        amplitudes = {}
        for config, re, im in data["coefficients"]:
            amplitudes[Configuration(tuple(int(o) for o in config))] = complex(float(re), float(im))
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed CI vector document: {exc}") from None
    psi = CIVector.from_configurations(amplitudes, K)
    if psi.n_electrons != N:
        raise DomainError(f"configurations hold {psi.n_electrons} electrons, header says {N}")
    return psi


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc})") from None


def write_json(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return path


def load_gdm(path) -> GDM:
    return gdm_from_dict(read_json(path))


def save_gdm(path, D: GDM) -> Path:
    return write_json(path, gdm_to_dict(D))


def load_civector(path) -> CIVector:
    return civector_from_dict(read_json(path))


def save_civector(path, psi: CIVector) -> Path:
    return write_json(path, civector_to_dict(psi))


def write_csv(path, header, rows, integer_columns=()) -> Path:
    """Write rows with floats in fixed 17-significant-digit notation."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ints = set(integer_columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([str(int(v)) if i in ints else _number(v) for i, v in enumerate(row)])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader])
    return header, data


def write_trajectory(path, trajectory) -> Path:
    header, table = trajectory.columns()
    return write_csv(path, header, table)


def write_curves(path, curves, n_curves: int | None = None) -> Path:
    return write_csv(path, ["lambda", "tracked_index", "energy", "crossing_flag"], curves.rows(n_curves), integer_columns=(1, 3))


def versions() -> dict:
    out = {"python": platform.python_version(), "numpy": np.__version__}
    for name in ("scipy", "artifact"):
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = None
    return out


def write_manifest(directory, command: str, inputs: dict, outputs: list, tolerances: dict | None = None, seed=None, argv=None) -> Path:
    """Record everything needed to re-run a job beside its outputs.

    ``argv`` defaults to the process arguments; pass it explicitly when the
    command line did not come from ``sys.argv``.
    """
    manifest = {
        "command": command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "inputs": inputs,
        "seed": seed,
        "tolerances": tolerances or {},
        "outputs": [str(Path(p).name) for p in outputs],
        "versions": versions(),
    }
    return write_json(Path(directory) / "manifest.json", manifest)
