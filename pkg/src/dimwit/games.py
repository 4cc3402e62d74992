"""Two-player non-local games viewed as random access codes.

When Bob measures setting ``t`` and sees ``b`` he steers Alice's system
into a state that, for a unique game, encodes the string

    x = f(b, s_1, t), ..., f(b, s_|S|, t)

of Alice's winning answers. Alice answering setting ``s`` correctly is then
decoding entry ``x_s``, and the Fano form of the entropic bound applies with
her per-setting success probabilities.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .bounds import Assignment, BoundReport
from .core import TOL, Distribution, ProbabilityTable, _entropy_bits, fano_penalty, validate_table
from .errors import NotUnique, NoWinningAnswer, OutOfRange, ShapeMismatch


@dataclass(frozen=True, eq=False)
class Game:
    """Questions ``S`` (Alice) and ``T`` (Bob), answers ``A`` and ``B``.

    ``pi[s, t]`` is the question distribution and ``V[a, b, s, t]`` the
    0/1 predicate. ``answer_sets[s]`` lists the answer indices available to
    Alice for setting ``s`` (all of ``A`` unless the game was merged).
    """

    S: tuple
    T: tuple
    A: tuple
    B: tuple
    pi: np.ndarray
    V: np.ndarray
    answer_sets: tuple | None = None
    merged: bool = field(default=False, compare=False)

    def __post_init__(self):
        for name in ("S", "T", "A", "B"):
            vals = tuple(getattr(self, name))
            if not vals or len(set(vals)) != len(vals):
                raise ShapeMismatch(f"{name} must be a non-empty list of distinct labels")
            object.__setattr__(self, name, vals)
        pi = np.asarray(self.pi, dtype=float)
        if pi.shape != (len(self.S), len(self.T)):
            raise ShapeMismatch(f"pi has shape {pi.shape}, expected {(len(self.S), len(self.T))}")
        if pi.min() < -TOL or abs(pi.sum() - 1) > TOL:
            raise OutOfRange("pi must be a probability distribution over S x T")
        V = np.asarray(self.V).astype(bool)
        if V.shape != (len(self.A), len(self.B), len(self.S), len(self.T)):
            raise ShapeMismatch(f"V has shape {V.shape}")
        sets = self.answer_sets
        if sets is None:
            sets = tuple(tuple(range(len(self.A))) for _ in self.S)
        sets = tuple(tuple(int(a) for a in s) for s in sets)
        if len(sets) != len(self.S):
            raise ShapeMismatch("need one answer set per setting of Alice")
        for s, allowed in enumerate(sets):
            mask = np.ones(len(self.A), dtype=bool)
            mask[list(allowed)] = False
            if V[mask, :, s, :].any():
                raise ShapeMismatch(f"V accepts answers outside the answer set of setting {self.S[s]!r}")
        pi = np.clip(pi, 0, None) / np.clip(pi, 0, None).sum()
        pi.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "answer_sets", sets)

    def __eq__(self, other):
        if not isinstance(other, Game):
            return NotImplemented
        return ((self.S, self.T, self.A, self.B, self.answer_sets)
                == (other.S, other.T, other.A, other.B, other.answer_sets)
                and np.array_equal(self.pi, other.pi) and np.array_equal(self.V, other.V))

    __hash__ = None

    @property
    def pi_A(self) -> np.ndarray:
        return self.pi.sum(axis=1)

    @property
    def pi_B(self) -> np.ndarray:
        return self.pi.sum(axis=0)

    @classmethod
    def from_predicate(cls, S, T, A, B, pi, predicate) -> "Game":
        """Build ``V`` by evaluating ``predicate(a, b, s, t)`` on labels."""
        V = np.array([[[[bool(predicate(a, b, s, t)) for t in T] for s in S] for b in B] for a in A])
        return cls(S, T, A, B, pi, V)

    def to_json(self) -> dict:
        wins = [[self.A[a], self.B[b], self.S[s], self.T[t]] for a, b, s, t in zip(*np.nonzero(self.V))]
        out = {"S": list(self.S), "T": list(self.T), "A": list(self.A), "B": list(self.B),
               "pi": self.pi.tolist(), "V": wins}
        if any(len(s) != len(self.A) for s in self.answer_sets):
            out["answer_sets"] = [[self.A[a] for a in s] for s in self.answer_sets]
        return out

    @classmethod
    def from_json(cls, d: dict) -> "Game":
        S, T, A, B = (tuple(d[k]) for k in ("S", "T", "A", "B"))
        V = np.zeros((len(A), len(B), len(S), len(T)), dtype=bool)
        try:
            for a, b, s, t in d["V"]:
                V[A.index(a), B.index(b), S.index(s), T.index(t)] = True
        except ValueError as exc:
            raise ShapeMismatch(f"winning tuple uses an unknown label: {exc}") from exc
        sets = None
        if "answer_sets" in d:
            sets = tuple(tuple(A.index(a) for a in s) for s in d["answer_sets"])
        return cls(S, T, A, B, np.asarray(d["pi"], dtype=float), V, sets)


@dataclass(frozen=True)
class ObservedStats:
    """``bob_marginals[t, b] = Pr[b|t]`` and ``alice_success[s] = p_s``."""

    bob_marginals: np.ndarray
    alice_success: np.ndarray

    def __post_init__(self):
        bm = np.asarray(self.bob_marginals, dtype=float)
        ps = np.asarray(self.alice_success, dtype=float).ravel()
        if bm.ndim != 2:
            raise ShapeMismatch("bob_marginals must be a |T| x |B| matrix")
        if bm.min() < -TOL or np.abs(bm.sum(axis=1) - 1).max() > TOL:
            raise OutOfRange("each Pr[.|t] must be a probability distribution")
        if ps.min() < -TOL or ps.max() > 1 + TOL:
            raise OutOfRange("success probabilities must lie in [0, 1]")
        bm = np.clip(bm, 0, None)
        bm = bm / bm.sum(axis=1, keepdims=True)
        ps = np.clip(ps, 0, 1)
        bm.setflags(write=False)
        ps.setflags(write=False)
        object.__setattr__(self, "bob_marginals", bm)
        object.__setattr__(self, "alice_success", ps)

    def check(self, game: Game) -> "ObservedStats":
        if self.bob_marginals.shape != (len(game.T), len(game.B)):
            raise ShapeMismatch(f"bob_marginals must have shape {(len(game.T), len(game.B))}")
        if self.alice_success.shape != (len(game.S),):
            raise ShapeMismatch(f"need {len(game.S)} success probabilities")
        return self

    def to_json(self) -> dict:
        return {"bob_marginals": self.bob_marginals.tolist(),
                "alice_success": self.alice_success.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "ObservedStats":
        return cls(np.asarray(d["bob_marginals"], dtype=float),
                   np.asarray(d["alice_success"], dtype=float))


def check_unique(game: Game) -> bool:
    return bool((game.V.sum(axis=0) == 1).all())


def merge_outcomes(game: Game) -> Game:
    """Coarse-grain Alice's answers so that every context has exactly one winner.

    For each setting ``s`` the winning answers of every ``(b, t)`` are merged
    into one class (union-find over all contexts); each class is represented
    by its smallest answer index and wins whenever any member did.
    """
    winners = game.V.sum(axis=0)
    if (winners == 0).any():
        b, s, t = np.argwhere(winners == 0)[0]
        raise NoWinningAnswer(f"no winning answer for b={game.B[b]!r}, s={game.S[s]!r}, t={game.T[t]!r}")
    if check_unique(game):
        return game

    nA = len(game.A)
    V = np.zeros_like(game.V)
    sets = []
    for s in range(len(game.S)):
        parent = list(range(nA))
        find = partial(_find, parent)
        for b in range(len(game.B)):
            for t in range(len(game.T)):
                win = np.nonzero(game.V[:, b, s, t])[0]
                for a in win[1:]:
                    ra, rb = find(int(win[0])), find(int(a))
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
        allowed = [a for a in game.answer_sets[s]]
        rep = {a: min(x for x in allowed if find(x) == find(a)) for a in allowed}
        for b in range(len(game.B)):
            for t in range(len(game.T)):
                for a in np.nonzero(game.V[:, b, s, t])[0]:
                    V[rep[int(a)], b, s, t] = True
        sets.append(tuple(sorted(set(rep.values()))))
    return Game(game.S, game.T, game.A, game.B, game.pi, V, tuple(sets), merged=True)


def _find(parent: list, a: int) -> int:
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@dataclass(frozen=True)
class WinningAnswerMap:
    """``f[b, s, t]`` is the index of Alice's unique winning answer."""

    game: Game
    f: np.ndarray

    def __call__(self, b, s, t):
        g = self.game
        return g.A[self.f[g.B.index(b), g.S.index(s), g.T.index(t)]]


def winning_answer_map(game: Game) -> WinningAnswerMap:
    if not check_unique(game):
        raise NotUnique("some (b, s, t) has no or several winning answers; merge outcomes first")
    f = game.V.argmax(axis=0)
    f.setflags(write=False)
    return WinningAnswerMap(game, f)


def string_encoding(game: Game, b, t) -> tuple:
    """Alice's winning answers for every setting, given Bob's (b, t) as labels."""
    f = winning_answer_map(game)
    return tuple(f(b, s, t) for s in game.S)


def induced_prior(game: Game, stats: ObservedStats) -> Distribution:
    """P_X(x) = sum of Pr[b|t] pi_B(t) over the (t, b) that encode x."""
    stats.check(game)
    f = winning_answer_map(game)
    piB = game.pi_B
    mass: dict = {}
    for ti in range(len(game.T)):
        for bi in range(len(game.B)):
            x = tuple(game.A[f.f[bi, si, ti]] for si in range(len(game.S)))
            mass[x] = mass.get(x, 0.0) + stats.bob_marginals[ti, bi] * piB[ti]
    labels = sorted((x for x, v in mass.items() if v > 0), key=lambda x: tuple(game.A.index(a) for a in x))
    return Distribution(tuple(labels), np.array([mass[x] for x in labels]))


def game_dim_bound(game: Game, stats: ObservedStats) -> BoundReport:
    """Exponent H(X) - sum_s [h(p_s) + (1 - p_s) log(|A_s| - 1)] for Alice's system.

    For a merged game the given ``p_s`` refer to the original answers and are
    lower bounds on the merged success; they are raised to ``1/|A_s|`` where
    smaller, which keeps the Fano penalty an upper bound.
    """
    stats.check(game)
    if not check_unique(game):
        raise NotUnique("game is not unique; run merge_outcomes first")
    prior = induced_prior(game, stats)
    penalties, used = [], []
    for s, p in enumerate(stats.alice_success):
        size = len(game.answer_sets[s])
        if size < 2:
            # a single answer carries no uncertainty
            penalties.append(0.0)
            used.append(1.0)
            continue
        if game.merged:
            p = max(float(p), 1.0 / size)
        penalties.append(fano_penalty(float(p), size))
        used.append(float(p))
    C = _entropy_bits(prior.mass) - sum(penalties)

    asg = Assignment(
        T=tuple(range(len(prior.labels))),
        R=tuple(tuple(game.A.index(a) for a in x) for x in prior.labels),
        g=tuple(range(len(prior.labels))),
        e=tuple(range(len(game.S))),
        c=tuple(tuple(range(len(game.A))) for _ in game.S),
    )
    notes = (f"pi_A = {game.pi_A.tolist()}",)
    return BoundReport(C, "game", asg, prior, tuple(used), alphabet=game.A, notes=notes)


def induced_table(game: Game, stats: ObservedStats) -> ProbabilityTable:
    """Fano-extremal table over the encoded strings.

    Preparation ``i`` is the ``i``-th string in the support of the induced
    prior and measurement ``s`` returns ``x_s`` with probability ``p_s``,
    every other allowed answer equally likely. For CHSH this is exactly the
    table of the steered states.
    """
    prior = induced_prior(game, stats)
    nA = len(game.A)
    probs = np.zeros((len(game.S), len(prior.labels), nA))
    for s, p in enumerate(stats.alice_success):
        allowed = list(game.answer_sets[s])
        for i, x in enumerate(prior.labels):
            a = game.A.index(x[s])
            others = [o for o in allowed if o != a]
            if others:
                probs[s, i, others] = (1.0 - p) / len(others)
                probs[s, i, a] = p
            else:
                probs[s, i, a] = 1.0
    return validate_table((game.A, probs.tolist()))


def transpose_game(game: Game) -> Game:
    """Swap the roles of Alice and Bob."""
    V = np.transpose(game.V, (1, 0, 3, 2))
    return Game(game.T, game.S, game.B, game.A, game.pi.T, V)


def chsh_game() -> Game:
    bits = (0, 1)
    return Game.from_predicate(bits, bits, bits, bits, np.full((2, 2), 0.25),
                               lambda a, b, s, t: (s * t) % 2 == (a + b) % 2)


def chsh_fixture():
    """CHSH game, statistics of the optimal qubit strategy and the steered-state table."""
    gamma = 0.5 + 1.0 / (2.0 * np.sqrt(2.0))
    game = chsh_game()
    stats = ObservedStats(np.full((2, 2), 0.5), np.array([gamma, gamma]))
    g, h = gamma, 1.0 - gamma
    # columns rho_00, rho_01, rho_10, rho_11
    probs = [
        [[g, h], [g, h], [h, g], [h, g]],
        [[g, h], [h, g], [g, h], [h, g]],
    ]
    return game, stats, validate_table(((0, 1), probs))
