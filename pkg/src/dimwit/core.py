"""Probability tables, classical distributions and Shannon entropies.

All logarithms are base 2 and ``0 log 0`` is taken to be 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

import numpy as np

from .errors import (
    AlphabetTooSmall,
    NegativeEntry,
    OutOfRange,
    RowSumViolation,
    ShapeMismatch,
)

TOL = 1e-9

# A string x in A^m, stored as a tuple of alphabet labels.
DitString = tuple


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_simplex(mass: np.ndarray, what: str, tol: float = TOL) -> np.ndarray:
    if not np.all(np.isfinite(mass)):
        raise OutOfRange(f"{what}: non-finite entry")
    if mass.size and mass.min() < -tol:
        raise NegativeEntry(f"{what}: entry {mass.min():.3g} is negative")
    total = mass.sum()
    if abs(total - 1.0) > tol:
        raise RowSumViolation(f"{what}: total mass {total:.12g} != 1")
    return np.clip(mass, 0.0, None) / np.clip(mass, 0.0, None).sum()


@dataclass(frozen=True)
class Distribution:
    labels: tuple
    mass: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        mass = np.asarray(self.mass, dtype=float).ravel()
        if len(labels) != mass.size:
            raise ShapeMismatch(f"{len(labels)} labels but {mass.size} masses")
        if len(set(labels)) != len(labels):
            raise ShapeMismatch("duplicate labels in distribution support")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "mass", _readonly(_check_simplex(mass, "distribution")))

    @classmethod
    def uniform(cls, labels: Sequence[Hashable]) -> "Distribution":
        labels = tuple(labels)
        return cls(labels, np.full(len(labels), 1.0 / len(labels)))

    @classmethod
    def from_dict(cls, d: dict) -> "Distribution":
        return cls(tuple(d), np.array(list(d.values()), dtype=float))

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.mass.tolist()))

    def __getitem__(self, label) -> float:
        try:
            return float(self.mass[self.labels.index(label)])
        except ValueError:
            return 0.0


@dataclass(frozen=True)
class JointDistribution:
    """Joint law of an input X (rows) and an observation Z (columns)."""

    rows: tuple
    cols: tuple
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (len(self.rows), len(self.cols)):
            raise ShapeMismatch(f"matrix shape {mat.shape} does not match labels")
        flat = _check_simplex(mat.ravel(), "joint distribution")
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        object.__setattr__(self, "matrix", _readonly(flat.reshape(mat.shape)))

    @classmethod
    def from_channel(cls, prior: Distribution, channel: "Channel") -> "JointDistribution":
        if tuple(prior.labels) != channel.inputs:
            raise ShapeMismatch("prior support must match the channel inputs")
        return cls(channel.inputs, channel.outputs, prior.mass[:, None] * channel.matrix)

    def input_marginal(self) -> Distribution:
        return Distribution(self.rows, self.matrix.sum(axis=1))

    def output_marginal(self) -> Distribution:
        return Distribution(self.cols, self.matrix.sum(axis=0))


@dataclass(frozen=True)
class Channel:
    """Row-stochastic matrix W[x, z] = W(z|x)."""

    inputs: tuple
    outputs: tuple
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (len(self.inputs), len(self.outputs)):
            raise ShapeMismatch(f"channel matrix shape {mat.shape} does not match labels")
        rows = [_check_simplex(row, f"channel row {i}") for i, row in enumerate(mat)]
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "matrix", _readonly(np.array(rows).reshape(mat.shape)))

    @classmethod
    def from_matrix(cls, matrix) -> "Channel":
        matrix = np.asarray(matrix, dtype=float)
        return cls(tuple(range(matrix.shape[0])), tuple(range(matrix.shape[1])), matrix)


@dataclass(frozen=True)
class ProbabilityTable:
    """Observed statistics p(a|j,r), stored as ``probs[j, r, a]``.

    Attributes
    ----------
    alphabet : tuple
        Outcome labels shared by every measurement.
    probs : np.ndarray
        Array of shape ``(m, l, |A|)``; read-only.
    adjustments : tuple
        ``(j, r, deviation)`` for each row that was renormalized on load.
    """

    alphabet: tuple
    probs: np.ndarray
    adjustments: tuple = field(default=(), compare=False)

    @property
    def num_measurements(self) -> int:
        return self.probs.shape[0]

    @property
    def num_preparations(self) -> int:
        return self.probs.shape[1]

    @property
    def alphabet_size(self) -> int:
        return len(self.alphabet)

    def p(self, a, j: int, r: int) -> float:
        return float(self.probs[j, r, self.alphabet.index(a)])


def validate_table(raw: Any, tol: float = TOL) -> ProbabilityTable:
    """Check and normalize raw table data.

    ``raw`` is either a mapping in the JSON table format
    (``alphabet``, ``measurements``, ``preparations``, ``probs``) or an
    ``(alphabet, probs)`` pair. Rows shorter than the alphabet are padded
    with zeros; rows whose sum is off by at most ``tol`` are renormalized
    and recorded in ``adjustments``.
    """
    if isinstance(raw, ProbabilityTable):
        raw = {"alphabet": list(raw.alphabet), "probs": raw.probs.tolist()}
    if isinstance(raw, dict):
        alphabet = raw.get("alphabet")
        nested = raw.get("probs")
        m_decl = raw.get("measurements")
        l_decl = raw.get("preparations")
    else:
        alphabet, nested = raw
        m_decl = l_decl = None
    if alphabet is None or nested is None:
        raise ShapeMismatch("table needs 'alphabet' and 'probs'")
    alphabet = tuple(alphabet)
    k = len(alphabet)
    if k == 0 or len(set(alphabet)) != k:
        raise ShapeMismatch("alphabet must be a non-empty list of distinct labels")

    try:
        m = len(nested)
        ells = {len(block) for block in nested}
    except TypeError as exc:
        raise ShapeMismatch("probs must be nested as [measurement][preparation][outcome]") from exc
    if m == 0 or len(ells) != 1:
        raise ShapeMismatch("every measurement needs the same number of preparations")
    ell = ells.pop()
    if ell == 0:
        raise ShapeMismatch("table has no preparations")
    if m_decl is not None and m_decl != m:
        raise ShapeMismatch(f"declared {m_decl} measurements, found {m}")
    if l_decl is not None and l_decl != ell:
        raise ShapeMismatch(f"declared {l_decl} preparations, found {ell}")

    probs = np.zeros((m, ell, k))
    for j, block in enumerate(nested):
        for r, row in enumerate(block):
            row = np.asarray(row, dtype=float).ravel()
            if row.size > k:
                raise ShapeMismatch(f"row (j={j}, r={r}) has {row.size} outcomes for alphabet of {k}")
            probs[j, r, : row.size] = row

    if not np.all(np.isfinite(probs)):
        raise OutOfRange("table contains non-finite entries")
    if probs.min() < -tol:
        j, r, a = np.unravel_index(np.argmin(probs), probs.shape)
        raise NegativeEntry(f"p({alphabet[a]!r}|j={j}, r={r}) = {probs[j, r, a]:.6g} < 0")
    if probs.max() > 1 + tol:
        j, r, a = np.unravel_index(np.argmax(probs), probs.shape)
        raise OutOfRange(f"p({alphabet[a]!r}|j={j}, r={r}) = {probs[j, r, a]:.6g} > 1")
    probs = np.clip(probs, 0.0, 1.0)

    sums = probs.sum(axis=2)
    dev = np.abs(sums - 1.0)
    if dev.max() > tol:
        j, r = np.unravel_index(np.argmax(dev), dev.shape)
        raise RowSumViolation(f"row (j={j}, r={r}) sums to {sums[j, r]:.12g}")
    adjustments = tuple(
        (int(j), int(r), float(sums[j, r] - 1.0)) for j, r in zip(*np.nonzero(dev > 0))
    )
    probs = probs / sums[:, :, None]
    return ProbabilityTable(alphabet, _readonly(probs), adjustments)


def table_to_json(table: ProbabilityTable) -> dict:
    return {
        "alphabet": list(table.alphabet),
        "measurements": table.num_measurements,
        "preparations": table.num_preparations,
        "probs": table.probs.tolist(),
    }


# --- entropies --------------------------------------------------------------


def _entropy_bits(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def shannon_entropy(d: Distribution | Sequence[float]) -> float:
    mass = d.mass if isinstance(d, Distribution) else _check_simplex(np.asarray(d, float), "distribution")
    return max(0.0, _entropy_bits(mass))


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"binary entropy needs p in [0, 1], got {p}")
    return _entropy_bits(np.array([p, 1.0 - p]))


def conditional_entropy(j: JointDistribution) -> float:
    """H(X|Z) = H(X, Z) - H(Z), rows being X."""
    h = _entropy_bits(j.matrix) - _entropy_bits(j.matrix.sum(axis=0))
    return max(0.0, h)


def mutual_information(j: JointDistribution) -> float:
    h = _entropy_bits(j.matrix.sum(axis=1)) - conditional_entropy(j)
    return max(0.0, h)


def fano_penalty(p: float, alphabet_size: int) -> float:
    """Fano upper bound h(p) + (1 - p) log(|A| - 1) on H(X|Z)."""
    if alphabet_size < 2:
        raise AlphabetTooSmall(f"Fano's inequality needs |A| >= 2, got {alphabet_size}")
    # p slightly outside [0, 1] from float round-off
    if -TOL <= p < 0.0:
        p = 0.0
    elif 1.0 < p <= 1.0 + TOL:
        p = 1.0
    return binary_entropy(p) + (1.0 - p) * float(np.log2(alphabet_size - 1))
