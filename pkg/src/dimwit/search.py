"""Maximization of the entropic exponent over assignments and priors.

Every candidate evaluated is itself a valid lower bound, so the search can
only lose tightness, never soundness. Candidates are enumerated in
lexicographic order of ``(T, R, g, e, c)``; the winner is the largest
exponent (rounded to 12 decimals for tie detection) with the smallest key,
which makes the result independent of how work is split across threads.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bounds import (
    PRIOR_MODES,
    Assignment,
    BoundReport,
    capacity_bound,
    decoding_channels,
    exponent_terms,
    joint_matrices,
    prior_distribution,
)
from .core import ProbabilityTable
from .errors import BudgetExceeded


@dataclass(frozen=True)
class SearchConfig:
    mode: str = "exhaustive"
    max_enumeration: int = 1_000_000
    restarts: int = 10
    seed: int = 0
    prior_mode: str = "uniform"
    threads: int | None = None
    tol: float = 1e-9
    ba_tol: float = 1e-9
    ba_max_iter: int = 100_000
    max_sweeps: int = 200
    gradient_restarts: int = 10
    gradient_steps: int = 500
    heuristic_steps: int = 2000
    strict: bool = False

    def __post_init__(self):
        if self.mode not in ("exhaustive", "heuristic"):
            raise ValueError(f"unknown search mode {self.mode!r}")
        if self.prior_mode not in PRIOR_MODES:
            raise ValueError(f"unknown prior mode {self.prior_mode!r}")
        for name in ("max_enumeration", "restarts", "ba_max_iter", "max_sweeps",
                     "gradient_restarts", "gradient_steps", "heuristic_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.tol <= 0 or self.ba_tol <= 0:
            raise ValueError("tolerances must be positive")

    def thread_count(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        return max(1, int(os.environ.get("DIMWIT_THREADS", "1")))


def count_assignments(table: ProbabilityTable) -> int:
    m, ell, k = table.probs.shape
    nx = k**m
    n = min(ell, nx)
    return (math.comb(ell, n) * math.comb(nx, n) * math.factorial(n)
            * m**m * math.factorial(k) ** m)


def iter_assignments(table: ProbabilityTable):
    """All assignments in lexicographic order of ``(T, R, g, e, c)``."""
    m, ell, k = table.probs.shape
    strings = list(itertools.product(range(k), repeat=m))
    n = min(ell, len(strings))
    es = list(itertools.product(range(m), repeat=m))
    cs = list(itertools.product(itertools.permutations(range(k)), repeat=m))
    for T in itertools.combinations(range(ell), n):
        for R in itertools.combinations(strings, n):
            for g in itertools.permutations(T):
                for e in es:
                    for c in cs:
                        yield Assignment(T, R, g, e, c)


# --- prior optimizers -----------------------------------------------------------


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _gradient(table, asg, R, W, P):
    """Gradient of H(X) - sum_j H(X_j|Z_j) with respect to the prior (bits)."""
    k = table.alphabet_size
    J = joint_matrices(R, W, P, k)
    tiny = 1e-300
    grad = -np.log2(np.maximum(P, tiny))
    for j in range(R.shape[1]):
        Q = J[j].sum(axis=0)
        # d/dP_x of H(X_j, Z_j) - H(Z_j)
        lj = np.log2(np.maximum(J[j][R[:, j]], tiny))
        lq = np.log2(np.maximum(Q, tiny))[None, :]
        grad += (W[j] * (lj - lq)).sum(axis=1)
    return grad


def optimize_prior_gradient(table, asg, rng, restarts=10, steps=500, tol=1e-9):
    """Projected-gradient ascent on the full simplex over R; best of several starts.

    The result is uncertified as a global maximum but is always a valid prior.
    """
    R = np.asarray(asg.R, dtype=int)
    W = decoding_channels(table, asg)
    n = R.shape[0]
    best_P = np.full(n, 1.0 / n)
    best = exponent_terms(table, asg, best_P)[0]
    for r in range(restarts):
        P = best_P.copy() if r == 0 else rng.dirichlet(np.ones(n))
        val = exponent_terms(table, asg, P)[0]
        step = 0.5
        for _ in range(steps):
            g = _gradient(table, asg, R, W, P)
            improved = False
            while step > 1e-12:
                cand = _project_simplex(P + step * g)
                cval = exponent_terms(table, asg, cand)[0]
                if cval > val:
                    improved = cval - val > tol
                    P, val = cand, cval
                    step *= 1.5
                    break
                step *= 0.5
            if not improved:
                break
        if val > best:
            best, best_P = val, P
    return best_P


def evaluate(table: ProbabilityTable, asg: Assignment, config: SearchConfig, index: int = 0):
    """Exponent and prior for one assignment under ``config.prior_mode``."""
    if config.prior_mode == "uniform":
        n = len(asg.R)
        P = np.full(n, 1.0 / n)
        return exponent_terms(table, asg, P)[0], P
    if config.prior_mode == "product_optimize":
        rep = capacity_bound(table, asg, config)
        P = np.array([rep.prior[x] for x in rep.prior.labels])
        return rep.exponent, P
    rng = np.random.default_rng([config.seed, index])
    P = optimize_prior_gradient(table, asg, rng, config.gradient_restarts,
                                config.gradient_steps, config.tol)
    return exponent_terms(table, asg, P)[0], P


def _better(val: float, asg: Assignment, best) -> bool:
    """True if ``(val, asg)`` beats ``best``: larger exponent, ties to the smaller key."""
    if best is None:
        return True
    a, b = round(val, 12), round(best[0], 12)
    if a != b:
        return a > b
    return asg.key() < best[1].key()


def _best_of(table, candidates, config, offset):
    best = None
    for i, asg in enumerate(candidates):
        val, P = evaluate(table, asg, config, offset + i)
        if _better(val, asg, best):
            best = (val, asg, P)
    return best


def _exhaustive(table, config):
    cands = list(iter_assignments(table))
    threads = min(config.thread_count(), len(cands))
    if threads <= 1:
        return _best_of(table, cands, config, 0)
    size = math.ceil(len(cands) / threads)
    chunks = [(cands[i:i + size], i) for i in range(0, len(cands), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda ch: _best_of(table, ch[0], config, ch[1]), chunks))
    best = results[0]
    for res in results[1:]:
        if _better(res[0], res[1], best):
            best = res
    return best


# --- heuristic search -------------------------------------------------------------


def greedy_assignment(table: ProbabilityTable) -> Assignment:
    """Match preparations to strings by their most likely per-position outcomes."""
    m, ell, k = table.probs.shape
    strings = list(itertools.product(range(k), repeat=m))
    n = min(ell, len(strings))
    logp = np.log(np.maximum(table.probs, 1e-300))  # (m, l, k)
    # score[r, s] = sum_j log p(s_j | j, r)
    S = np.array(strings)
    score = np.stack([logp[j][:, S[:, j]] for j in range(m)]).sum(axis=0)
    # preparations with the most decisive statistics choose first
    order = np.argsort(-score.max(axis=1), kind="stable")
    taken, pairs = set(), []
    for r in order:
        if len(pairs) == n:
            break
        for s in np.argsort(-score[r], kind="stable"):
            if s not in taken:
                taken.add(int(s))
                pairs.append((strings[s], int(r)))
                break
    pairs.sort()
    T = tuple(sorted(r for _, r in pairs))
    return Assignment(T, tuple(x for x, _ in pairs), tuple(r for _, r in pairs),
                      tuple(range(m)), tuple(tuple(range(k)) for _ in range(m)))


def _random_assignment(table, rng) -> Assignment:
    m, ell, k = table.probs.shape
    strings = list(itertools.product(range(k), repeat=m))
    n = min(ell, len(strings))
    T = tuple(sorted(rng.choice(ell, n, replace=False).tolist()))
    R = tuple(strings[i] for i in sorted(rng.choice(len(strings), n, replace=False).tolist()))
    g = tuple(int(t) for t in rng.permutation(T))
    e = tuple(int(v) for v in rng.integers(0, m, m))
    c = tuple(tuple(int(v) for v in rng.permutation(k)) for _ in range(m))
    return Assignment(T, R, g, e, c)


def _mutate(table, asg, rng) -> Assignment:
    m, ell, k = table.probs.shape
    move = rng.integers(0, 4)
    n = len(asg.R)
    if move == 0 and n >= 2:
        i, j = rng.choice(n, 2, replace=False)
        g = list(asg.g)
        g[i], g[j] = g[j], g[i]
        return replace(asg, g=tuple(g))
    if move == 1 and n < k**m:
        # swap a string for one outside R, keeping its preparation
        outside = [x for x in itertools.product(range(k), repeat=m) if x not in set(asg.R)]
        i = rng.integers(0, n)
        x = outside[rng.integers(0, len(outside))]
        pairs = sorted([(asg.R[t], asg.g[t]) for t in range(n) if t != i] + [(x, asg.g[i])])
        return replace(asg, R=tuple(p[0] for p in pairs), g=tuple(p[1] for p in pairs))
    if move == 2 and ell > n:
        # swap a used preparation for an unused one
        unused = sorted(set(range(ell)) - set(asg.T))
        i = rng.integers(0, n)
        new = unused[rng.integers(0, len(unused))]
        g = list(asg.g)
        g[i] = new
        return replace(asg, T=tuple(sorted(g)), g=tuple(g))
    j = rng.integers(0, m)
    if rng.random() < 0.5 or k < 2:
        e = list(asg.e)
        e[j] = int(rng.integers(0, m))
        return replace(asg, e=tuple(e))
    c = list(asg.c)
    c[j] = tuple(int(v) for v in rng.permutation(k))
    return replace(asg, c=tuple(c))


def _heuristic(table, config):
    rng = np.random.default_rng(config.seed)
    best = None
    evaluations = 0
    budget = config.max_enumeration
    for restart in range(config.restarts):
        asg = greedy_assignment(table) if restart == 0 else _random_assignment(table, rng)
        val, P = evaluate(table, asg, config, evaluations)
        evaluations += 1
        for _ in range(config.heuristic_steps):
            if evaluations >= budget:
                break
            cand = _mutate(table, asg, rng)
            cval, cP = evaluate(table, cand, config, evaluations)
            evaluations += 1
            if cval > val + 1e-15:
                asg, val, P = cand, cval, cP
        if _better(val, asg, best):
            best = (val, asg, P)
        if evaluations >= budget:
            break
    return best


def search_bound(table: ProbabilityTable, config: SearchConfig | None = None) -> BoundReport:
    """Best exponent over assignments (and priors, per ``config.prior_mode``).

    Exhaustive enumeration runs when the number of assignments is at most
    ``config.max_enumeration``; otherwise a greedy start refined by random
    local moves is used and the report is marked not converged. With
    ``config.strict`` that fallback raises :class:`BudgetExceeded` instead,
    carrying the best-so-far report as ``exc.report``.
    """
    config = config or SearchConfig()
    total = count_assignments(table)
    exhaustive = config.mode == "exhaustive" and total <= config.max_enumeration
    if exhaustive:
        val, asg, P = _exhaustive(table, config)
        notes = (f"exhaustive over {total} assignments",)
    else:
        val, asg, P = _heuristic(table, config)
        notes = (f"heuristic search; {total} assignments exceed the enumeration cap",)
    _, _, hc = exponent_terms(table, asg, P)
    report = BoundReport(val, "search", asg, prior_distribution(table, asg, P), tuple(hc),
                         converged=exhaustive, alphabet=table.alphabet,
                         notes=notes + (f"prior mode {config.prior_mode}",))
    if not exhaustive and config.mode == "exhaustive" and config.strict:
        exc = BudgetExceeded(f"{total} assignments exceed max_enumeration={config.max_enumeration}")
        exc.report = report
        raise exc
    return report
