"""JSON readers and writers for tables, channels, models and ensembles.

Complex matrices are nested lists of ``[re, im]`` pairs; plain real
numbers are accepted as well.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import Channel, Distribution, ProbabilityTable, validate_table
from .errors import ShapeMismatch
from .quantum import CqEnsemble, DensityMatrix, Povm, QuantumModel


def load_json(path) -> dict:
    with open(Path(path), encoding="utf-8") as fh:
        return json.load(fh)


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2)


def read_table(path) -> ProbabilityTable:
    return validate_table(load_json(path))


def matrix_from_json(rows) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ShapeMismatch("matrix entries must be numbers or [re, im] pairs") from exc
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise ShapeMismatch(f"cannot read a square matrix from an array of shape {arr.shape}")


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def model_from_json(d: dict) -> QuantumModel:
    states = tuple(DensityMatrix(matrix_from_json(s)) for s in d["states"])
    povms = tuple(Povm(tuple(matrix_from_json(e) for e in p)) for p in d["povms"])
    return QuantumModel(states, povms)


def model_to_json(model: QuantumModel) -> dict:
    return {
        "states": [matrix_to_json(s.data) for s in model.states],
        "povms": [[matrix_to_json(e) for e in p.elements] for p in model.povms],
    }


def _label_from_json(lab):
    return tuple(lab) if isinstance(lab, list) else lab


def label_key(lab) -> str:
    if isinstance(lab, tuple):
        parts = [str(a) for a in lab]
        return "".join(parts) if all(len(p) == 1 for p in parts) else ",".join(parts)
    return str(lab)


def ensemble_from_json(d: dict) -> CqEnsemble:
    labels = tuple(_label_from_json(l) for l in d["labels"])
    prior = d.get("prior")
    if prior is None:
        mass = np.full(len(labels), 1.0 / len(labels))
    elif isinstance(prior, dict):
        try:
            mass = np.array([prior[label_key(l)] for l in labels], dtype=float)
        except KeyError as exc:
            raise ShapeMismatch(f"prior has no entry for label {exc}") from exc
    else:
        mass = np.asarray(prior, dtype=float)
    states = tuple(DensityMatrix(matrix_from_json(s)) for s in d["states"])
    return CqEnsemble(labels, mass, states)


def ensemble_to_json(e: CqEnsemble) -> dict:
    return {
        "labels": [list(l) if isinstance(l, tuple) else l for l in e.labels],
        "prior": {label_key(l): float(p) for l, p in zip(e.labels, e.prior)},
        "states": [matrix_to_json(s.data) for s in e.states],
    }


def channel_from_json(d: dict) -> Channel:
    mat = np.asarray(d["matrix"], dtype=float)
    if mat.ndim != 2:
        raise ShapeMismatch("channel matrix must be two-dimensional")
    inputs = tuple(d.get("inputs", range(mat.shape[0])))
    outputs = tuple(d.get("outputs", range(mat.shape[1])))
    return Channel(inputs, outputs, mat)


def distribution_from_json(d: dict) -> Distribution:
    return Distribution(tuple(_label_from_json(l) for l in d["labels"]), np.asarray(d["mass"], float))


def distribution_to_json(d: Distribution) -> dict:
    return {"labels": [list(l) if isinstance(l, tuple) else l for l in d.labels],
            "mass": d.mass.tolist()}
