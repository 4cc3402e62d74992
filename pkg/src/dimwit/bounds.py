"""Entropic dimension lower bounds for a fixed encoding/decoding assignment.

An :class:`Assignment` reads the table as a random access code: string
``R[i]`` is encoded in preparation ``g[i]``, and entry ``j`` of the string is
decoded by measurement ``e[j]`` whose outcome ``c[j][z]`` is reported as
symbol ``z``. For any prior over ``R`` the exponent

    C = H(X) - sum_j H(X_j | Z_j)

satisfies ``dim >= 2**C`` for every quantum model reproducing the table.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    TOL,
    Channel,
    Distribution,
    JointDistribution,
    ProbabilityTable,
    _entropy_bits,
    fano_penalty,
)
from .errors import AssignmentInvalid

PRIOR_MODES = ("uniform", "product_optimize", "full_gradient")


@dataclass(frozen=True)
class Assignment:
    """Encoding/decoding configuration, all entries as integer indices.

    Attributes
    ----------
    T : tuple of int
        Preparations used, sorted.
    R : tuple of tuple of int
        Strings used (alphabet indices), sorted lexicographically.
    g : tuple of int
        ``g[i]`` is the preparation encoding ``R[i]``.
    e : tuple of int
        ``e[j]`` is the measurement decoding position ``j``.
    c : tuple of tuple of int
        ``c[j]`` is a permutation of the alphabet; symbol ``z`` at position
        ``j`` is read from outcome ``c[j][z]``.
    """

    T: tuple
    R: tuple
    g: tuple
    e: tuple
    c: tuple

    def key(self) -> tuple:
        return (self.T, self.R, self.g, self.e, self.c)

    def validate(self, table: ProbabilityTable) -> "Assignment":
        m, ell, k = table.probs.shape
        n = min(ell, k**m)
        if len(self.T) != n or len(self.R) != n or len(self.g) != n:
            raise AssignmentInvalid(f"|T|, |R|, |g| must all equal min(l, |A|^m) = {n}")
        if len(set(self.T)) != n or not all(0 <= t < ell for t in self.T):
            raise AssignmentInvalid("T must be distinct preparation indices")
        if len(set(self.R)) != n:
            raise AssignmentInvalid("R contains repeated strings")
        for x in self.R:
            if len(x) != m or not all(0 <= a < k for a in x):
                raise AssignmentInvalid(f"string {x} is not in A^{m}")
        if sorted(self.g) != sorted(self.T):
            raise AssignmentInvalid("g must be a bijection from R onto T")
        if len(self.e) != m or not all(0 <= j < m for j in self.e):
            raise AssignmentInvalid("e must map each position to a measurement")
        if len(self.c) != m or any(sorted(cj) != list(range(k)) for cj in self.c):
            raise AssignmentInvalid("each c[j] must be a permutation of the alphabet")
        return self

    @classmethod
    def identity(cls, table: ProbabilityTable, strings: Sequence | None = None,
                 e: Sequence[int] | None = None) -> "Assignment":
        """Encode the given strings (labels or indices) into preparations 0, 1, ... in order.

        Without ``strings``, the first ``min(l, |A|^m)`` strings of ``A^m``
        are used in lexicographic order.
        """
        m, ell, k = table.probs.shape
        n = min(ell, k**m)
        if strings is None:
            idx = list(itertools.islice(itertools.product(range(k), repeat=m), n))
        else:
            idx = [string_indices(table, s) for s in strings]
        order = sorted(range(len(idx)), key=lambda i: idx[i])
        asg = cls(
            T=tuple(range(len(idx))),
            R=tuple(idx[i] for i in order),
            g=tuple(order),
            e=tuple(range(m)) if e is None else tuple(e),
            c=tuple(tuple(range(k)) for _ in range(m)),
        )
        return asg.validate(table)

    def to_json(self, alphabet: Sequence) -> dict:
        return {
            "T": list(self.T),
            "R": [format_string(x, alphabet) for x in self.R],
            "g": {format_string(x, alphabet): t for x, t in zip(self.R, self.g)},
            "e": list(self.e),
            "c": [[alphabet[a] for a in cj] for cj in self.c],
        }

    @classmethod
    def from_json(cls, d: dict, table: ProbabilityTable) -> "Assignment":
        alphabet = table.alphabet
        strings = [string_indices(table, parse_string(s, alphabet)) for s in d["R"]]
        order = sorted(range(len(strings)), key=lambda i: strings[i])
        g_map = d["g"]
        R = tuple(strings[i] for i in order)
        g = tuple(int(g_map[format_string(x, alphabet)]) for x in R)
        c = tuple(tuple(alphabet.index(a) for a in cj) for cj in d["c"])
        asg = cls(tuple(sorted(d["T"])), R, g, tuple(d["e"]), c)
        return asg.validate(table)


def format_string(x: Sequence, alphabet: Sequence) -> str:
    """Render a string of alphabet indices; labels are concatenated if all are one character."""
    labels = [str(alphabet[a]) for a in x]
    if all(len(str(a)) == 1 for a in alphabet):
        return "".join(labels)
    return ",".join(labels)


def parse_string(s, alphabet: Sequence) -> tuple:
    if not isinstance(s, str):
        return tuple(s)
    names = [str(a) for a in alphabet]
    parts = list(s) if all(len(a) == 1 for a in names) else s.split(",")
    try:
        return tuple(alphabet[names.index(p)] for p in parts)
    except ValueError as exc:
        raise AssignmentInvalid(f"string {s!r} uses labels outside the alphabet") from exc


def string_indices(table: ProbabilityTable, s: Sequence) -> tuple:
    """Convert a string of labels to alphabet indices (index tuples pass through)."""
    s = tuple(s)
    if len(s) != table.num_measurements:
        raise AssignmentInvalid(f"string {s} does not have length {table.num_measurements}")
    if all(a in table.alphabet for a in s):
        return tuple(table.alphabet.index(a) for a in s)
    if all(isinstance(a, (int, np.integer)) and 0 <= a < table.alphabet_size for a in s):
        return tuple(int(a) for a in s)
    raise AssignmentInvalid(f"string {s} is not over the alphabet {table.alphabet}")


@dataclass(frozen=True)
class BoundReport:
    """Outcome of a bound computation; ``dim_bound`` is derived from ``exponent``."""

    exponent: float
    method: str
    witness: Assignment | None
    prior: Distribution | None
    per_position: tuple = ()
    converged: bool = True
    alphabet: tuple = ()
    notes: tuple = field(default=(), compare=False)

    @property
    def dim_bound(self) -> int:
        return dim_from_exponent(self.exponent)

    def to_json(self) -> dict:
        witness = None
        if self.witness is not None:
            witness = self.witness.to_json(self.alphabet)
            if self.prior is not None:
                witness["prior"] = {
                    format_string(_label_indices(x, self.alphabet), self.alphabet): float(p)
                    for x, p in zip(self.prior.labels, self.prior.mass)
                }
        elif self.prior is not None:
            witness = {"prior": {_render_label(x): float(p)
                                 for x, p in zip(self.prior.labels, self.prior.mass)}}
        return {
            "method": self.method,
            "exponent": float(self.exponent),
            "dim_bound": self.dim_bound,
            "witness": witness,
            "per_position": [float(v) for v in self.per_position],
            "converged": bool(self.converged),
            "notes": list(self.notes),
        }


def _label_indices(x, alphabet) -> tuple:
    return tuple(alphabet.index(a) for a in x)


def _render_label(x) -> str:
    if isinstance(x, tuple):
        return "".join(map(str, x)) if all(len(str(a)) == 1 for a in x) else ",".join(map(str, x))
    return str(x)


def dim_from_exponent(C: float) -> int:
    if not math.isfinite(C):
        raise ValueError(f"exponent must be finite, got {C}")
    if C > 60:
        raise OverflowError(f"exponent {C} too large for an integer dimension")
    return max(1, math.ceil(2.0**C - 1e-9))


# --- evaluation on arrays -----------------------------------------------------


def decoding_channels(table: ProbabilityTable, asg: Assignment) -> np.ndarray:
    """W[j, i, z] = probability that position ``j`` of string ``R[i]`` is decoded as ``z``."""
    probs = table.probs
    g = np.asarray(asg.g)
    return np.stack([probs[ej][g][:, list(cj)] for ej, cj in zip(asg.e, asg.c)])


def prior_array(table: ProbabilityTable, asg: Assignment, prior) -> np.ndarray:
    """Align a prior with ``asg.R``; ``None`` means uniform."""
    n = len(asg.R)
    if prior is None:
        return np.full(n, 1.0 / n)
    if isinstance(prior, Distribution):
        out = np.zeros(n)
        pos = {x: i for i, x in enumerate(asg.R)}
        for label, p in zip(prior.labels, prior.mass):
            i = pos.get(string_indices(table, label))
            if i is None:
                if p > 0:
                    raise AssignmentInvalid(f"prior puts mass on {label}, which is not in R")
                continue
            out[i] += p
        return out
    out = np.asarray(prior, dtype=float)
    if out.shape != (n,) or out.min() < -TOL or abs(out.sum() - 1) > TOL:
        raise AssignmentInvalid("prior array must be a distribution aligned with R")
    return np.clip(out, 0, None) / np.clip(out, 0, None).sum()


def prior_distribution(table: ProbabilityTable, asg: Assignment, prior: np.ndarray) -> Distribution:
    labels = tuple(tuple(table.alphabet[a] for a in x) for x in asg.R)
    return Distribution(labels, prior)


def joint_matrices(R: np.ndarray, W: np.ndarray, prior: np.ndarray, k: int) -> np.ndarray:
    """J[j, v, z] = P(X_j = v, Z_j = z) for strings ``R`` (n, m) and channels ``W`` (m, n, k)."""
    m = R.shape[1]
    J = np.zeros((m, k, k))
    weighted = prior[None, :, None] * W
    for j in range(m):
        np.add.at(J[j], R[:, j], weighted[j])
    return J


def cond_entropies(J: np.ndarray) -> np.ndarray:
    return np.array([
        max(0.0, _entropy_bits(Jj) - _entropy_bits(Jj.sum(axis=0))) for Jj in J
    ])


def exponent_terms(table: ProbabilityTable, asg: Assignment, prior: np.ndarray):
    """Return ``(C, H(X), [H(X_j|Z_j)])`` for a prior aligned with ``asg.R``."""
    R = np.asarray(asg.R, dtype=int)
    J = joint_matrices(R, decoding_channels(table, asg), prior, table.alphabet_size)
    hx = _entropy_bits(prior)
    hc = cond_entropies(J)
    return hx - hc.sum(), hx, hc


def recovery_probs(table: ProbabilityTable, asg: Assignment, prior: np.ndarray) -> np.ndarray:
    R = np.asarray(asg.R, dtype=int)
    W = decoding_channels(table, asg)
    n = R.shape[0]
    return np.array([(prior * W[j, np.arange(n), R[:, j]]).sum() for j in range(R.shape[1])])


# --- public operations ----------------------------------------------------------


def decoding_joint(table: ProbabilityTable, asg: Assignment, prior, j: int) -> JointDistribution:
    """Joint law of (X_j, Z_j) under ``prior``, averaged over the other positions."""
    asg.validate(table)
    if not 0 <= j < table.num_measurements:
        raise AssignmentInvalid(f"position {j} out of range")
    P = prior_array(table, asg, prior)
    J = joint_matrices(np.asarray(asg.R, dtype=int), decoding_channels(table, asg), P,
                       table.alphabet_size)
    return JointDistribution(table.alphabet, table.alphabet, J[j])


def avg_recovery_prob(table: ProbabilityTable, asg: Assignment, prior, j: int) -> float:
    asg.validate(table)
    if not 0 <= j < table.num_measurements:
        raise AssignmentInvalid(f"position {j} out of range")
    p = recovery_probs(table, asg, prior_array(table, asg, prior))[j]
    return float(min(1.0, max(0.0, p)))


def proto_bound(table: ProbabilityTable, asg: Assignment, prior=None) -> BoundReport:
    """Exponent H(X) - sum_j H(X_j|Z_j)."""
    asg.validate(table)
    P = prior_array(table, asg, prior)
    C, _, hc = exponent_terms(table, asg, P)
    return BoundReport(C, "proto", asg, prior_distribution(table, asg, P), tuple(hc),
                       alphabet=table.alphabet)


def fano_bound(table: ProbabilityTable, asg: Assignment, prior=None) -> BoundReport:
    """Exponent H(X) - sum_j [h(p_j) + (1 - p_j) log(|A| - 1)] from recovery probabilities alone."""
    asg.validate(table)
    P = prior_array(table, asg, prior)
    p = np.clip(recovery_probs(table, asg, P), 0.0, 1.0)
    k = table.alphabet_size
    if k < 2:
        C = _entropy_bits(P)  # one symbol: strings and decoding are trivial
    else:
        C = _entropy_bits(P) - sum(fano_penalty(float(pj), k) for pj in p)
    return BoundReport(C, "fano", asg, prior_distribution(table, asg, P), tuple(p),
                       alphabet=table.alphabet)


# --- channel capacity -------------------------------------------------------------


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    prior: Distribution
    iterations: int
    converged: bool
    lower: float
    upper: float
    lower_history: tuple = field(default=(), repr=False)

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def _divergences(W: np.ndarray, r: np.ndarray) -> np.ndarray:
    """D(W(.|x) || rW) in bits for every input x."""
    q = r @ W
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(W > 0, W / q[None, :], 1.0)
        return (W * np.log2(ratio)).sum(axis=1)


def blahut_arimoto(ch: Channel | np.ndarray, tol: float = 1e-9, max_iter: int = 100_000,
                   init: np.ndarray | None = None) -> CapacityResult:
    """Capacity of a discrete memoryless channel by alternating maximization.

    Each iterate carries the bracket ``I(r) <= C <= max_x D(W(.|x) || rW)``;
    iteration stops once the bracket is narrower than ``tol``. The lower
    value is returned as the capacity, so it is always achievable by the
    reported prior. ``converged`` is False when ``max_iter`` is reached first.
    """
    if not isinstance(ch, Channel):
        ch = Channel.from_matrix(ch)
    W = ch.matrix
    nx = W.shape[0]
    r = np.full(nx, 1.0 / nx) if init is None else np.asarray(init, float) / np.sum(init)
    history = []
    best_r, best_lower, upper = r, -np.inf, np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        D = _divergences(W, r)
        lower = float(r @ D)
        upper = min(upper, float(D.max()))
        history.append(lower)
        if lower >= best_lower:
            best_lower, best_r = lower, r
        if upper - best_lower <= tol:
            converged = True
            break
        r = r * np.exp2(D - D.max())
        r = r / r.sum()
    best_lower = max(0.0, best_lower)
    return CapacityResult(best_lower, Distribution(ch.inputs, best_r), it, converged,
                          best_lower, max(upper, best_lower), tuple(history))


def _restricted_product(R: np.ndarray, factors: list) -> np.ndarray:
    w = np.ones(R.shape[0])
    for j, f in enumerate(factors):
        w = w * f[R[:, j]]
    s = w.sum()
    return w / s if s > 0 else np.full(R.shape[0], 1.0 / R.shape[0])


def capacity_bound(table: ProbabilityTable, asg: Assignment, config=None) -> BoundReport:
    """Coordinate-wise capacity sweeps over product priors restricted to ``R``.

    For position ``j`` the decoding channel from X_j to Z_j, given the
    current factors on the other positions, is fed to Blahut-Arimoto and
    the ``j``-th factor is replaced by its optimal input law if that raises
    the exponent. Sweeps repeat until the exponent improves by less than
    ``config.tol``. When ``R`` is the full product set the reported
    exponent equals ``sum_j I(X_j; Z_j)``; in every case it is the exponent
    of the prior actually reached, which is returned as the witness.
    """
    from .search import SearchConfig

    config = config or SearchConfig()
    asg.validate(table)
    R = np.asarray(asg.R, dtype=int)
    m, k = R.shape[1], table.alphabet_size
    W = decoding_channels(table, asg)
    factors = [np.full(k, 1.0 / k) for _ in range(m)]
    prior = _restricted_product(R, factors)
    best, _, _ = exponent_terms(table, asg, prior)
    converged = True

    for _ in range(config.max_sweeps):
        start = best
        for j in range(m):
            # channel from X_j to Z_j with the other positions averaged under the current factors
            seen = np.zeros(k, dtype=bool)
            seen[np.unique(R[:, j])] = True
            inputs = np.nonzero(seen)[0]
            rows = []
            for v in inputs:
                mask = R[:, j] == v
                other = np.ones(mask.sum())
                for i in range(m):
                    if i != j:
                        other = other * factors[i][R[mask, i]]
                if other.sum() <= 0:
                    other = np.ones(mask.sum())
                rows.append((other / other.sum()) @ W[j][mask])
            if len(inputs) < 2:
                continue
            res = blahut_arimoto(np.array(rows), tol=config.ba_tol, max_iter=config.ba_max_iter)
            converged &= res.converged
            trial = list(factors)
            new = np.zeros(k)
            new[inputs] = res.prior.mass
            trial[j] = new
            cand = _restricted_product(R, trial)
            val, _, _ = exponent_terms(table, asg, cand)
            if val > best:
                best, factors, prior = val, trial, cand
        if best - start < config.tol:
            break
    else:
        converged = False

    C, _, hc = exponent_terms(table, asg, prior)
    notes = () if _is_product_set(R, k) else ("R is not a product set; exponent is that of the restricted prior",)
    return BoundReport(C, "capacity", asg, prior_distribution(table, asg, prior), tuple(hc),
                       converged=converged, alphabet=table.alphabet, notes=notes)


def _is_product_set(R: np.ndarray, k: int) -> bool:
    sizes = [len(np.unique(R[:, j])) for j in range(R.shape[1])]
    return math.prod(sizes) == R.shape[0]
