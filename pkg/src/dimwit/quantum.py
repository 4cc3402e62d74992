"""Small dense quantum states and measurements.

Covers realization checks of probability tables, von Neumann entropies of
cq-states, certified guessing probabilities (primal POVM plus dual operator
``Y``), conditional min-entropies and the two counterexamples built on the
BB84 encoding of two bits into one qubit.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import TOL, ProbabilityTable, _entropy_bits, validate_table
from .errors import (
    DimensionMismatch,
    EpsilonTooLarge,
    InvalidState,
    LabelShapeError,
    ShapeMismatch,
)

MAX_DIM = 16
HERM_TOL = 1e-10


def _as_matrix(a) -> np.ndarray:
    if isinstance(a, DensityMatrix):
        return a.data
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise DimensionMismatch(f"dimension {m.shape[0]} exceeds the supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(m)):
        raise InvalidState("matrix has non-finite entries")
    return m


def hermitian_eigvals(a) -> np.ndarray:
    m = _as_matrix(a)
    return np.linalg.eigvalsh((m + m.conj().T) / 2)


def psd_sqrt(a, inverse: bool = False, floor: float = 1e-300) -> np.ndarray:
    m = _as_matrix(a)
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    if inverse:
        w = np.where(w > floor, 1.0 / np.sqrt(np.maximum(w, floor)), 0.0)
    else:
        w = np.sqrt(w)
    return (v * w) @ v.conj().T


def trace_norm(a) -> float:
    return float(np.abs(hermitian_eigvals(a)).sum())


@dataclass(frozen=True)
class DensityMatrix:
    data: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.data).copy()
        if np.abs(m - m.conj().T).max() > HERM_TOL:
            raise InvalidState("density matrix is not Hermitian")
        m = (m + m.conj().T) / 2
        if abs(np.trace(m).real - 1) > HERM_TOL:
            raise InvalidState(f"trace {np.trace(m).real:.12g} != 1")
        if np.linalg.eigvalsh(m)[0] < -HERM_TOL:
            raise InvalidState("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "data", m)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def pure(cls, ket) -> "DensityMatrix":
        v = np.asarray(ket, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls(np.eye(d) / d)


@dataclass(frozen=True)
class Povm:
    elements: tuple

    def __post_init__(self):
        els = [_as_matrix(e).copy() for e in self.elements]
        if not els:
            raise ShapeMismatch("POVM needs at least one element")
        d = els[0].shape[0]
        if any(e.shape != (d, d) for e in els):
            raise DimensionMismatch("POVM elements have different dimensions")
        for i, e in enumerate(els):
            if np.abs(e - e.conj().T).max() > HERM_TOL:
                raise InvalidState(f"POVM element {i} is not Hermitian")
            if np.linalg.eigvalsh((e + e.conj().T) / 2)[0] < -HERM_TOL:
                raise InvalidState(f"POVM element {i} is not positive semidefinite")
        if np.abs(sum(els) - np.eye(d)).max() > HERM_TOL:
            raise InvalidState("POVM elements do not sum to the identity")
        els = tuple((e + e.conj().T) / 2 for e in els)
        for e in els:
            e.setflags(write=False)
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def probabilities(self, rho) -> np.ndarray:
        r = _as_matrix(rho)
        return np.array([np.trace(e @ r).real for e in self.elements])

    @classmethod
    def projective(cls, basis) -> "Povm":
        """Rank-one projectors onto the columns of ``basis``."""
        B = np.asarray(basis, dtype=complex)
        return cls(tuple(np.outer(B[:, i], B[:, i].conj()) for i in range(B.shape[1])))


@dataclass(frozen=True)
class QuantumModel:
    states: tuple
    povms: tuple

    def __post_init__(self):
        states = tuple(s if isinstance(s, DensityMatrix) else DensityMatrix(s) for s in self.states)
        povms = tuple(p if isinstance(p, Povm) else Povm(tuple(p)) for p in self.povms)
        dims = {s.dim for s in states} | {p.dim for p in povms}
        if len(dims) != 1:
            raise DimensionMismatch(f"states and measurements have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "povms", povms)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def table(self) -> ProbabilityTable:
        k = max(len(p) for p in self.povms)
        probs = [[list(p.probabilities(s)) + [0.0] * (k - len(p)) for s in self.states]
                 for p in self.povms]
        return validate_table((tuple(range(k)), probs))


@dataclass(frozen=True)
class CqEnsemble:
    """Classical labels with prior weights, each attached to a quantum state."""

    labels: tuple
    prior: np.ndarray
    states: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        prior = np.asarray(self.prior, dtype=float).ravel()
        states = tuple(s if isinstance(s, DensityMatrix) else DensityMatrix(s) for s in self.states)
        if not (len(labels) == prior.size == len(states)) or not labels:
            raise ShapeMismatch("labels, prior and states must have equal non-zero length")
        if len(set(labels)) != len(labels):
            raise ShapeMismatch("duplicate labels in ensemble")
        if prior.min() < -TOL or abs(prior.sum() - 1) > TOL:
            raise InvalidState("prior is not a probability distribution")
        if len({s.dim for s in states}) != 1:
            raise DimensionMismatch("ensemble states have different dimensions")
        prior = np.clip(prior, 0, None) / np.clip(prior, 0, None).sum()
        prior.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def average_state(self) -> np.ndarray:
        return sum(p * s.data for p, s in zip(self.prior, self.states))

    def weighted(self) -> list:
        return [p * s.data for p, s in zip(self.prior, self.states)]

    def marginal(self, position: int) -> "CqEnsemble":
        """Ensemble for entry ``position`` of tuple labels, other entries averaged out."""
        self._check_tuple_labels()
        groups: dict = {}
        for lab, p, s in zip(self.labels, self.prior, self.states):
            acc = groups.setdefault(lab[position], [0.0, 0.0])
            acc[0] += p
            acc[1] = acc[1] + p * s.data
        labels = sorted(groups, key=lambda v: [l[position] for l in self.labels].index(v))
        prior = np.array([groups[v][0] for v in labels])
        states = []
        for v in labels:
            w, op = groups[v]
            states.append(op / w if w > 0 else np.eye(self.dim) / self.dim)
        return CqEnsemble(tuple(labels), prior, tuple(states))

    def _check_tuple_labels(self):
        lengths = {len(l) if isinstance(l, tuple) else -1 for l in self.labels}
        if len(lengths) != 1 or -1 in lengths:
            raise LabelShapeError("labels must be tuples of equal length")
        return lengths.pop()

    def tensor(self, other: "CqEnsemble") -> "CqEnsemble":
        """Independent product: labels are concatenated, states tensored."""
        labels, prior, states = [], [], []
        for (la, pa, sa), (lb, pb, sb) in itertools.product(
                zip(self.labels, self.prior, self.states), zip(other.labels, other.prior, other.states)):
            la = la if isinstance(la, tuple) else (la,)
            lb = lb if isinstance(lb, tuple) else (lb,)
            labels.append(la + lb)
            prior.append(pa * pb)
            states.append(np.kron(sa.data, sb.data))
        return CqEnsemble(tuple(labels), np.array(prior), tuple(states))


# --- realization and entropies ----------------------------------------------------


@dataclass(frozen=True)
class VerifyReport:
    deviations: tuple
    max_deviation: float

    @property
    def verified(self) -> bool:
        return not self.deviations


def verify_model(model: QuantumModel, table: ProbabilityTable, tol: float = 1e-9) -> VerifyReport:
    """Every (j, r, a) where Tr(M_j^a rho_r) differs from p(a|j, r) by more than ``tol``."""
    m, ell, k = table.probs.shape
    if len(model.povms) != m or len(model.states) != ell:
        raise DimensionMismatch(
            f"model has {len(model.povms)} measurements and {len(model.states)} states, "
            f"table has {m} and {ell}")
    if any(len(p) > k for p in model.povms):
        raise DimensionMismatch("a POVM has more outcomes than the table alphabet")
    devs = []
    worst = 0.0
    for j, povm in enumerate(model.povms):
        for r, rho in enumerate(model.states):
            pr = povm.probabilities(rho)
            for a in range(k):
                q = pr[a] if a < len(pr) else 0.0
                d = abs(q - table.probs[j, r, a])
                worst = max(worst, d)
                if d > tol:
                    devs.append((j, r, table.alphabet[a], float(q), float(table.probs[j, r, a])))
    return VerifyReport(tuple(devs), worst)


def von_neumann_entropy(rho) -> float:
    w = hermitian_eigvals(rho)
    w = np.where((w < 0) & (w >= -HERM_TOL), 0.0, w)
    return max(0.0, _entropy_bits(np.clip(w, 0, None)))


def joint_entropy(e: CqEnsemble) -> float:
    """H(XQ) of the block-diagonal cq-state."""
    w = np.concatenate([p * hermitian_eigvals(s) for p, s in zip(e.prior, e.states)])
    return max(0.0, _entropy_bits(np.clip(w, 0, None)))


def conditional_vn_entropy(e: CqEnsemble) -> float:
    """H(X|Q) = H(XQ) - H(Q)."""
    return max(0.0, joint_entropy(e) - von_neumann_entropy(e.average_state()))


def rank_entropy(rho, threshold: float = 1e-9) -> float:
    w = hermitian_eigvals(rho)
    return float(np.log2(max(1, int((w > threshold).sum()))))


@dataclass(frozen=True)
class ChainReport:
    """Quantities and slacks of each inequality in the entropic chain."""

    log_dim: float
    H_Q: float
    holevo: float
    H_X: float
    H_X_given_Q: float
    H_Xj_given_Q: tuple
    H_Xj_given_Zj: tuple
    bound: float
    slacks: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(v >= -1e-8 for v in self.slacks.values())


def lemma1_vn_chain_check(e: CqEnsemble, decodings: Sequence[Povm]) -> ChainReport:
    """Evaluate log d >= H(Q) >= H(X) - H(X|Q) >= H(X) - sum_j H(X_j|Q) >= H(X) - sum_j H(X_j|Z_j).

    Labels must be tuples; ``decodings[j]`` reads entry ``j`` and its outcome
    ``z`` is compared with the ``z``-th distinct value seen at that entry.
    """
    m = e._check_tuple_labels()
    if len(decodings) != m:
        raise ShapeMismatch(f"need {m} decoding measurements, got {len(decodings)}")
    if any(p.dim != e.dim for p in decodings):
        raise ShapeMismatch("decoding measurements do not match the ensemble dimension")

    log_dim = float(np.log2(e.dim))
    H_Q = von_neumann_entropy(e.average_state())
    H_X = _entropy_bits(e.prior)
    H_XQ = joint_entropy(e)
    mixed = sum(p * von_neumann_entropy(s) for p, s in zip(e.prior, e.states))
    holevo = H_Q - mixed
    H_X_Q = H_XQ - H_Q

    hq, hz = [], []
    for j, povm in enumerate(decodings):
        hq.append(conditional_vn_entropy(e.marginal(j)))
        values = sorted({l[j] for l in e.labels}, key=[l[j] for l in e.labels].index)
        if len(povm) < len(values):
            raise ShapeMismatch(f"decoding {j} has fewer outcomes than entry {j} has values")
        J = np.zeros((len(values), len(povm)))
        for lab, p, s in zip(e.labels, e.prior, e.states):
            J[values.index(lab[j])] += p * np.clip(povm.probabilities(s), 0, None)
        hz.append(max(0.0, _entropy_bits(J) - _entropy_bits(J.sum(axis=0))))

    bound = H_X - sum(hz)
    slacks = {
        "log_dim - H(Q)": log_dim - H_Q,
        "H(Q) - holevo": H_Q - holevo,
        "holevo identity": -abs(holevo - (H_X - H_X_Q)),
        "sum H(Xj|Q) - H(X|Q)": sum(hq) - H_X_Q,
        "log_dim - bound": log_dim - bound,
    }
    for j in range(m):
        slacks[f"H(X{j}|Z{j}) - H(X{j}|Q)"] = hz[j] - hq[j]
    return ChainReport(log_dim, H_Q, holevo, H_X, H_X_Q, tuple(hq), tuple(hz), bound, slacks)


# --- guessing probability ------------------------------------------------------------


@dataclass(frozen=True)
class GuessReport:
    """Certified guessing probability.

    ``p_guess`` is achieved by ``optimal_povm``; ``Y`` satisfies
    ``Y >= P(x) rho_x`` for every label, so ``Tr Y`` is an upper bound and
    ``gap = Tr Y - p_guess``.
    """

    p_guess: float
    optimal_povm: Povm
    dual_certificate: np.ndarray
    gap: float
    iterations: int
    converged: bool

    @property
    def upper(self) -> float:
        return self.p_guess + self.gap


def _dual_from_povm(weighted, M):
    d = weighted[0].shape[0]
    Y = sum(w @ m for w, m in zip(weighted, M))
    Y = (Y + Y.conj().T) / 2
    deficit = max(0.0, max(-np.linalg.eigvalsh(Y - w)[0] for w in weighted))
    return Y + deficit * np.eye(d)


def guessing_probability(e: CqEnsemble, tol: float = 1e-8, max_iter: int = 100_000) -> GuessReport:
    """Maximum probability of guessing the label by measuring the state.

    Works on the support of the average state. Starts from the pretty-good
    measurement and applies the fixed-point update
    ``M_x <- G^{-1} w_x M_x w_x G^{-1}``, ``G = (sum_x w_x M_x w_x)^{1/2}``
    with ``w_x = P(x) rho_x``, which keeps the POVM complete. After every
    step the dual operator ``Y = herm(sum_x w_x M_x)`` is shifted by the
    smallest multiple of the identity making it feasible; iteration stops
    when ``Tr Y`` and the primal value agree to ``tol``.
    """
    d = e.dim
    lam, vecs = np.linalg.eigh(e.average_state())
    V = vecs[:, lam > 1e-12 * max(1.0, lam.max())]
    weighted = [V.conj().T @ w @ V for w in e.weighted()]
    r = V.shape[1]
    likeliest = int(np.argmax(e.prior))

    # always answering the likeliest label is feasible and seeds the primal
    best_primal = float(e.prior[likeliest])
    best_M = [np.zeros((r, r), dtype=complex) for _ in weighted]
    best_M[likeliest] = np.eye(r, dtype=complex)
    best_Y = None

    inv = psd_sqrt(sum(weighted), inverse=True)
    M = _renormalize([inv @ w @ inv for w in weighted])
    converged = False
    it = 0
    for it in range(max_iter + 1):
        primal = float(sum(np.trace(m @ w).real for m, w in zip(M, weighted)))
        Y = _dual_from_povm(weighted, M)
        if primal > best_primal:
            best_primal, best_M = primal, list(M)
        if best_Y is None or np.trace(Y).real < np.trace(best_Y).real:
            best_Y = Y
        if float(np.trace(best_Y).real) - best_primal <= tol:
            converged = True
            break
        if it == max_iter:
            break
        G = psd_sqrt(sum(w @ m @ w for w, m in zip(weighted, M)), inverse=True, floor=1e-30)
        M = _renormalize([G @ w @ m @ w @ G for w, m in zip(weighted, M)])

    # lift back; the kernel of the average state is never populated
    lifted = [V @ m @ V.conj().T for m in best_M]
    lifted[likeliest] = lifted[likeliest] + (np.eye(d) - V @ V.conj().T)
    lifted = [(m + m.conj().T) / 2 for m in lifted]
    Y = V @ best_Y @ V.conj().T
    gap = max(0.0, float(np.trace(Y).real) - best_primal)
    return GuessReport(min(1.0, best_primal), Povm(tuple(lifted)), Y, gap, it, converged)


def _renormalize(M):
    """Hermitize, clip to PSD and restore sum_x M_x = I exactly."""
    out = []
    for m in M:
        m = (m + m.conj().T) / 2
        w, v = np.linalg.eigh(m)
        out.append((v * np.clip(w, 0, None)) @ v.conj().T)
    inv = psd_sqrt(sum(out), inverse=True, floor=1e-30)
    return [(inv @ m @ inv + (inv @ m @ inv).conj().T) / 2 for m in out]


def helstrom(p0: float, rho0, p1: float, rho1) -> float:
    """Optimal success probability for two hypotheses, (1 + ||p0 rho0 - p1 rho1||_1) / 2."""
    if abs(p0 + p1 - 1) > TOL or min(p0, p1) < -TOL:
        raise InvalidState("p0 and p1 must form a probability distribution")
    return 0.5 * (1.0 + trace_norm(p0 * _as_matrix(rho0) - p1 * _as_matrix(rho1)))


@dataclass(frozen=True)
class MinEntropyReport:
    value: float
    p_guess: float
    lam: float
    sigma: np.ndarray
    guess: GuessReport

    @property
    def lower(self) -> float:
        """Certified lower bound, -log Tr Y."""
        return float(-np.log2(self.guess.upper))

    @property
    def upper(self) -> float:
        """Certified upper bound, -log of the achieved success probability."""
        return float(-np.log2(self.p_guess))


def min_entropy(e: CqEnsemble, tol: float = 1e-8, max_iter: int = 100_000) -> float:
    return min_entropy_report(e, tol, max_iter).value


def min_entropy_report(e: CqEnsemble, tol: float = 1e-8, max_iter: int = 100_000) -> MinEntropyReport:
    """H_min(X|E) = -log P_g, with the operator-inequality witness ``lam * I (x) sigma >= rho_XE``.

    ``sigma = Y / Tr Y`` and ``lam = Tr Y`` come from the dual certificate.
    """
    g = guessing_probability(e, tol, max_iter)
    lam = float(np.trace(g.dual_certificate).real)
    sigma = g.dual_certificate / lam
    return MinEntropyReport(float(-np.log2(g.p_guess)), g.p_guess, lam, sigma, g)


def smooth_min_entropy_upper(e: CqEnsemble, eps: float, p_guess: float | None = None) -> float:
    """Upper bound -log(P_g - eps) on the eps-smooth conditional min-entropy."""
    if p_guess is None:
        p_guess = guessing_probability(e).p_guess
    if eps < 0:
        raise EpsilonTooLarge(f"epsilon must be non-negative, got {eps}")
    if eps >= p_guess:
        raise EpsilonTooLarge(f"epsilon {eps} is not below P_g = {p_guess:.6g}")
    return float(-np.log2(p_guess - eps))


# --- counterexamples -----------------------------------------------------------------


@dataclass(frozen=True)
class AdditivityReport:
    eps: float
    singles_upper: tuple
    joint_lower: float
    classical_joint: float
    log_dim: float
    rank_entropy: float
    hypothetical_bound: float
    violated: bool
    contradiction: bool

    @property
    def sum_singles(self) -> float:
        return float(sum(self.singles_upper))

    @property
    def conclusive(self) -> bool:
        return self.violated and self.contradiction


def _two_part(e: CqEnsemble):
    if e._check_tuple_labels() != 2:
        raise LabelShapeError("labels must be pairs (x1, x2)")


def additivity_check(e2: CqEnsemble, eps: float = 0.0, tol: float = 1e-8) -> AdditivityReport:
    """Test H^eps(X1|E) + H^eps(X2|E) >= H^(eps^4)(X1X2|E) on a ccq ensemble.

    Only certified bounds are used: each single term is bounded above by
    ``-log(P_g - eps)`` and the joint term below by the unsmoothed
    ``-log Tr Y``. ``violated`` is True only when the upper sum is below the
    lower joint value. If the inequality held, the chain rule would give
    ``log dim E >= H_min(X1X2) - [sum of single terms]``; ``contradiction``
    reports whether that hypothetical bound exceeds the actual ``log dim E``.
    """
    _two_part(e2)
    singles = []
    for pos in (0, 1):
        g = guessing_probability(e2.marginal(pos), tol)
        singles.append(smooth_min_entropy_upper(e2.marginal(pos), eps, g.p_guess))
    joint = guessing_probability(e2, tol)
    joint_lower = float(-np.log2(joint.upper))
    classical = float(-np.log2(e2.prior.max()))
    log_dim = float(np.log2(e2.dim))
    hypothetical = classical - sum(singles)
    return AdditivityReport(
        eps=eps,
        singles_upper=tuple(singles),
        joint_lower=joint_lower,
        classical_joint=classical,
        log_dim=log_dim,
        rank_entropy=rank_entropy(e2.average_state()),
        hypothetical_bound=hypothetical,
        violated=sum(singles) < joint_lower - 1e-9,
        contradiction=hypothetical > log_dim + 1e-9,
    )


@dataclass(frozen=True)
class SplittingReport:
    eps: float
    alpha: float
    singles_upper: tuple
    holds: bool | None

    @property
    def best_single(self) -> float:
        return max(self.singles_upper)


def splitting_check(e2: CqEnsemble, eps: float = 0.0, tol: float = 1e-8) -> SplittingReport:
    """Does some entry X_D keep half of alpha = H_min(X1X2|E)?

    ``alpha`` is the certified lower value of the joint min-entropy, and each
    single entry is bounded above by ``-log(P_g - eps)``. ``holds`` is False
    when every upper bound is below ``alpha / 2`` (splitting refuted), True
    when the exact values (``eps == 0``) reach it, and None when smoothing
    leaves the question open.
    """
    _two_part(e2)
    joint = guessing_probability(e2, tol)
    alpha = float(-np.log2(joint.upper))
    singles = []
    exact = []
    for pos in (0, 1):
        g = guessing_probability(e2.marginal(pos), tol)
        singles.append(smooth_min_entropy_upper(e2.marginal(pos), eps, g.p_guess))
        exact.append(float(-np.log2(g.upper)))
    if max(singles) < alpha / 2 - 1e-9:
        holds = False
    elif eps == 0 and max(exact) >= alpha / 2 - 1e-9:
        holds = True
    else:
        holds = None
    return SplittingReport(eps, alpha, tuple(singles), holds)


# --- fixtures and random models -------------------------------------------------------


def bb84_states() -> dict:
    """|0>, |->, |+>, |1> keyed by the two-bit strings they encode."""
    s = 1 / np.sqrt(2)
    kets = {(0, 0): [1, 0], (0, 1): [s, -s], (1, 0): [s, s], (1, 1): [0, 1]}
    return {x: DensityMatrix.pure(k) for x, k in kets.items()}


def bb84_ensemble() -> CqEnsemble:
    states = bb84_states()
    labels = tuple(sorted(states))
    return CqEnsemble(labels, np.full(4, 0.25), tuple(states[x] for x in labels))


def bb84_marginal() -> CqEnsemble:
    """First bit of the BB84 encoding: rho_0 = (|0><0| + |-><-|)/2, rho_1 = (|1><1| + |+><+|)/2."""
    return bb84_ensemble().marginal(0)


def bloch_projector(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    Yp = np.array([[0, -1j], [1j, 0]])
    return (np.eye(2) + n[0] * X + n[1] * Yp + n[2] * Z) / 2


def bb84_decodings() -> tuple:
    """Measurements along the bisectors of the Z and X axes, reading the first and second bit."""
    out = []
    for n in ((-1, 0, 1), (1, 0, 1)):
        P = bloch_projector(n)
        out.append(Povm((P, np.eye(2) - P)))
    return tuple(out)


def bb84_model() -> QuantumModel:
    states = bb84_states()
    return QuantumModel(tuple(states[x] for x in sorted(states)), bb84_decodings())


def two_state_model() -> QuantumModel:
    """Computational-basis states; the second measurement coarse-grains the first with a fair coin."""
    P0 = np.diag([1.0, 0.0]).astype(complex)
    P1 = np.diag([0.0, 1.0]).astype(complex)
    M1 = Povm((P0, P1))
    M2 = Povm((P0 + P1 / 2, P1 / 2))
    return QuantumModel((DensityMatrix(P0), DensityMatrix(P1)), (M1, M2))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = rank or int(rng.integers(1, dim + 1))
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_povm(dim: int, outcomes: int, rng: np.random.Generator) -> Povm:
    ranks = [int(rng.integers(1, dim + 1)) for _ in range(outcomes)]
    # the last element fills in whatever rank is missing so the sum is invertible
    ranks[-1] = max(ranks[-1], dim - sum(ranks[:-1]))
    els = []
    for r in ranks:
        G = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
        els.append(G @ G.conj().T)
    inv = psd_sqrt(sum(els), inverse=True)
    els = [_clip_psd(inv @ e @ inv) for e in els]
    # absorb round-off so the elements sum to the identity
    els[-1] = els[-1] + (np.eye(dim) - sum(els))
    return Povm(tuple(els))


def _clip_psd(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return (v * np.maximum(w, 0.0)) @ v.conj().T


def random_model(dim: int, m: int, ell: int, alphabet_size: int, seed: int):
    """Random states and POVMs with the exact table they induce."""
    if min(dim, m, ell, alphabet_size) < 1:
        raise ShapeMismatch("dim, m, l and |A| must all be positive")
    rng = np.random.default_rng(seed)
    states = tuple(DensityMatrix(random_density_matrix(dim, rng)) for _ in range(ell))
    povms = tuple(random_povm(dim, alphabet_size, rng) for _ in range(m))
    model = QuantumModel(states, povms)
    return model, model.table()
