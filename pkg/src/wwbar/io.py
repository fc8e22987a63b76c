"""JSON state files and CSV statistics rows.

A state file looks like::

    {"kind": "pure", "n_qubits": 3, "data": [[re, im], ...], "metadata": {...}}

``data`` holds ``2**n`` amplitudes for pure states and ``4**n`` row-major
entries for density matrices. Floats are written with ``repr`` precision,
which round-trips doubles exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Union

import numpy as np

from .states import DensityMatrix, StateVector

State = Union[StateVector, DensityMatrix]


class StateFileError(ValueError):
    """Unreadable or malformed state file."""


def _pairs(values) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values).reshape(-1)]


def state_to_dict(state: State, metadata: dict | None = None) -> dict:
    kind = "pure" if isinstance(state, StateVector) else "density"
    return {
        "kind": kind,
        "n_qubits": state.n_qubits,
        "data": _pairs(state.data),
        "metadata": dict(metadata or {}),
    }


def state_from_dict(d: dict) -> tuple[State, dict]:
    try:
        kind = d["kind"]
        n = int(d["n_qubits"])
        raw = np.array(d["data"], dtype=float)
    except (KeyError, TypeError, ValueError) as ex:
        raise StateFileError(f"not a state file: {ex}") from None
    if raw.ndim != 2 or raw.shape[1] != 2:
        raise StateFileError("data must be a list of [re, im] pairs")
    values = raw[:, 0] + 1j * raw[:, 1]
    try:
        if kind == "pure":
            if values.size != 2**n:
                raise StateFileError(f"pure state on {n} qubits needs {2**n} amplitudes, got {values.size}")
            state: State = StateVector(values)
        elif kind == "density":
            if values.size != 4**n:
                raise StateFileError(f"density matrix on {n} qubits needs {4**n} entries, got {values.size}")
            state = DensityMatrix(values.reshape(2**n, 2**n))
        else:
            raise StateFileError(f"unknown kind {kind!r}")
    except StateFileError:
        raise
    except ValueError as ex:
        raise StateFileError(f"invalid state: {ex}") from None
    return state, dict(d.get("metadata") or {})


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as ex:
        raise StateFileError(f"cannot read {path}: {ex}") from None


def save_state(path, state: State, metadata: dict | None = None) -> None:
    write_json(path, state_to_dict(state, metadata))


def load_state(path) -> tuple[State, dict]:
    return state_from_dict(read_json(path))


def write_csv(path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
