"""Command-line interface.

Exit codes: 0 success, 1 I/O error, 2 validation or domain error,
3 search budget exhausted under ``--strict``, 4 inconclusive.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import fixtures, io
from .bounds import Assignment, BoundReport, blahut_arimoto, capacity_bound, fano_bound, proto_bound
from .errors import BudgetExceeded, DimwitError
from .games import Game, ObservedStats, game_dim_bound, merge_outcomes
from .quantum import (
    additivity_check,
    min_entropy_report,
    smooth_min_entropy_upper,
    splitting_check,
    verify_model,
)
from .search import SearchConfig, evaluate, search_bound

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_BUDGET, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4


class Failure(Exception):
    def __init__(self, code: int, message: str, doc: dict | None = None):
        super().__init__(message)
        self.code = code
        self.doc = doc


def _emit(args, doc: dict, text_lines: list) -> None:
    if args.format == "json":
        print(io.dumps(doc))
    else:
        print("\n".join(text_lines))


def _report_lines(rep: BoundReport) -> list:
    lines = [
        f"method:    {rep.method}",
        f"exponent:  {rep.exponent:.6f}",
        f"dimension: >= {rep.dim_bound}",
        f"converged: {rep.converged}",
    ]
    if rep.per_position:
        label = "recovery p_j" if rep.method in ("fano", "game") else "H(X_j|Z_j)"
        lines.append(f"per position {label}: " + ", ".join(f"{v:.6f}" for v in rep.per_position))
    doc = rep.to_json()
    if doc["witness"] is not None:
        lines.append("witness: " + json.dumps(doc["witness"], sort_keys=True))
    lines.extend(f"note: {n}" for n in rep.notes)
    return lines


def _read(loader, path):
    try:
        return loader(path)
    except OSError as exc:
        raise Failure(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise Failure(EXIT_INVALID, f"malformed input {path}: {exc!r}") from exc


def _table(args):
    if getattr(args, "two_state", False):
        return fixtures.two_state_table()
    if getattr(args, "chsh", False):
        return fixtures.chsh_table()
    if not args.table:
        raise Failure(EXIT_INVALID, "no table given (pass a file or --two-state / --chsh)")
    return _read(io.read_table, args.table)


def cmd_validate(args) -> int:
    table = _table(args)
    doc = {
        "valid": True,
        "measurements": table.num_measurements,
        "preparations": table.num_preparations,
        "alphabet": list(table.alphabet),
        "renormalized": [list(a) for a in table.adjustments],
    }
    lines = [f"valid: {table.num_measurements} measurements, {table.num_preparations} preparations, "
             f"alphabet {list(table.alphabet)}"]
    lines += [f"renormalized row j={j} r={r} (deviation {d:.2e})" for j, r, d in table.adjustments]
    _emit(args, doc, lines)
    return EXIT_OK


def _config(args) -> SearchConfig:
    return SearchConfig(mode=args.mode, max_enumeration=args.max_enumeration, restarts=args.restarts,
                        seed=args.seed, prior_mode=args.prior, threads=args.threads,
                        tol=args.tol, strict=args.strict)


def cmd_bound(args) -> int:
    table = _table(args)
    config = _config(args)
    if args.method == "search":
        try:
            rep = search_bound(table, config)
        except BudgetExceeded as exc:
            raise Failure(EXIT_BUDGET, str(exc), exc.report.to_json()) from exc
    else:
        if args.assignment:
            asg = Assignment.from_json(_read(io.load_json, args.assignment), table)
        else:
            asg = Assignment.identity(table)
        if args.method == "capacity":
            rep = capacity_bound(table, asg, config)
        else:
            prior = None
            if args.prior != "uniform":
                # optimize the prior for this assignment, then report the requested form
                _, prior = evaluate(table, asg, config)
            rep = (proto_bound if args.method == "proto" else fano_bound)(table, asg, prior)
    _emit(args, rep.to_json(), _report_lines(rep))
    return EXIT_OK


def cmd_game(args) -> int:
    if args.chsh:
        game, stats, _ = fixtures.chsh_fixture()
    else:
        if not args.game:
            raise Failure(EXIT_INVALID, "no game given (pass a game file or --chsh)")
        game = _read(lambda p: Game.from_json(io.load_json(p)), args.game)
        stats = None
    if args.stats:
        stats = _read(lambda p: ObservedStats.from_json(io.load_json(p)), args.stats)
    if args.success is not None:
        base = stats.bob_marginals if stats is not None else None
        if base is None:
            raise Failure(EXIT_INVALID, "--success needs Bob's marginals from a stats file or --chsh")
        stats = ObservedStats(base, np.full(len(game.S), args.success))
    if stats is None:
        raise Failure(EXIT_INVALID, "no statistics given (pass a stats file)")
    if args.merge:
        game = merge_outcomes(game)
    rep = game_dim_bound(game, stats)
    _emit(args, rep.to_json(), _report_lines(rep))
    return EXIT_OK


def cmd_capacity(args) -> int:
    ch = _read(lambda p: io.channel_from_json(io.load_json(p)), args.channel)
    res = blahut_arimoto(ch, tol=args.tol, max_iter=args.max_iter)
    doc = {
        "capacity": res.capacity,
        "lower": res.lower,
        "upper": res.upper,
        "iterations": res.iterations,
        "converged": res.converged,
        "prior": io.distribution_to_json(res.prior),
    }
    _emit(args, doc, [f"capacity: {res.capacity:.9f} bits",
                      f"bracket:  [{res.lower:.9f}, {res.upper:.9f}]",
                      f"iterations: {res.iterations} (converged: {res.converged})",
                      f"optimal prior: {res.prior.mass.round(9).tolist()}"])
    return EXIT_OK if res.converged else EXIT_INCONCLUSIVE


def cmd_verify(args) -> int:
    if args.two_state:
        model, table = fixtures.two_state_model(), fixtures.two_state_table()
    elif args.bb84:
        model, table = fixtures.bb84_model(), fixtures.chsh_table()
    else:
        if not (args.model and args.table):
            raise Failure(EXIT_INVALID, "verify needs a model file and a table file")
        model = _read(lambda p: io.model_from_json(io.load_json(p)), args.model)
        table = _read(io.read_table, args.table)
    rep = verify_model(model, table, args.tol)
    doc = {"verified": rep.verified, "max_deviation": rep.max_deviation,
           "deviations": [list(d) for d in rep.deviations]}
    lines = [f"verified: {rep.verified} (max deviation {rep.max_deviation:.3e}, tol {args.tol:g})"]
    lines += [f"  j={j} r={r} a={a}: model {q:.9f} vs table {p:.9f}" for j, r, a, q, p in rep.deviations]
    if not rep.verified:
        raise Failure(EXIT_INVALID, "model does not reproduce the table", doc)
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_minentropy(args) -> int:
    if args.bb84:
        ens = fixtures.bb84_ensemble()
    elif args.bb84_marginal:
        ens = fixtures.bb84_marginal()
    else:
        if not args.ensemble:
            raise Failure(EXIT_INVALID, "no ensemble given (pass a file or --bb84 / --bb84-marginal)")
        ens = _read(lambda p: io.ensemble_from_json(io.load_json(p)), args.ensemble)
    rep = min_entropy_report(ens, tol=args.tol)
    doc = {
        "p_guess": rep.p_guess,
        "p_guess_upper": rep.guess.upper,
        "gap": rep.guess.gap,
        "certified": rep.guess.converged,
        "min_entropy": rep.value,
        "min_entropy_lower": rep.lower,
        "lambda": rep.lam,
    }
    lines = [f"P_g:   {rep.p_guess:.9f} (dual {rep.guess.upper:.9f}, gap {rep.guess.gap:.1e})",
             f"H_min: {rep.value:.9f} bits"]
    if args.epsilon:
        up = smooth_min_entropy_upper(ens, args.epsilon, rep.p_guess)
        doc["epsilon"] = args.epsilon
        doc["smooth_min_entropy_upper"] = up
        lines.append(f"H_min^eps <= {up:.9f} bits (eps = {args.epsilon:g})")
    _emit(args, doc, lines)
    return EXIT_OK if rep.guess.converged else EXIT_INCONCLUSIVE


def cmd_counterexample(args) -> int:
    ens = fixtures.bb84_ensemble()
    if args.independent:
        single = fixtures.bb84_marginal()
        ens = single.tensor(single)
    add = additivity_check(ens, args.epsilon)
    split = splitting_check(ens, args.epsilon)
    doc = {
        "epsilon": args.epsilon,
        "independent": args.independent,
        "additivity": {
            "singles_upper": list(add.singles_upper),
            "sum_singles": add.sum_singles,
            "joint_lower": add.joint_lower,
            "classical_joint": add.classical_joint,
            "hypothetical_bound": add.hypothetical_bound,
            "log_dim": add.log_dim,
            "rank_entropy": add.rank_entropy,
            "violated": add.violated,
            "contradiction": add.contradiction,
        },
        "splitting": {
            "alpha": split.alpha,
            "best_single": split.best_single,
            "holds": split.holds,
        },
    }
    lines = [
        f"eps = {args.epsilon:g}{' (independent copies)' if args.independent else ''}",
        f"sum of single min-entropies <= {add.sum_singles:.6f}",
        f"joint min-entropy          >= {add.joint_lower:.6f}",
        f"additivity violated: {add.violated}",
        f"hypothetical dimension bound {add.hypothetical_bound:.6f} vs log dim {add.log_dim:g}"
        f" -> contradiction: {add.contradiction}",
        f"splitting: alpha = {split.alpha:.6f}, best single {split.best_single:.6f},"
        f" alpha/2 = {split.alpha / 2:.6f} -> holds: {split.holds}",
    ]
    if args.independent:
        ok = not add.violated and abs(add.sum_singles - add.joint_lower) <= 1e-5
        lines.append(f"additivity holds for independent copies: {ok}")
        doc["additivity_holds"] = ok
        _emit(args, doc, lines)
        return EXIT_OK if ok else EXIT_INCONCLUSIVE
    reproduced = add.conclusive and split.holds is False
    lines.append("counterexample reproduced" if reproduced else "inconclusive at this epsilon")
    doc["reproduced"] = reproduced
    _emit(args, doc, lines)
    return EXIT_OK if reproduced else EXIT_INCONCLUSIVE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimwit", description="Entropic lower bounds on Hilbert-space dimension.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("validate", help="check a probability table")
    sp.add_argument("table", nargs="?")
    sp.add_argument("--two-state", action="store_true")
    sp.add_argument("--chsh", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("bound", help="dimension bound from a probability table")
    sp.add_argument("table", nargs="?")
    sp.add_argument("--two-state", action="store_true")
    sp.add_argument("--chsh", action="store_true")
    sp.add_argument("--method", choices=("proto", "fano", "capacity", "search"), default="search")
    sp.add_argument("--prior", choices=("uniform", "product_optimize", "full_gradient"), default="uniform")
    sp.add_argument("--assignment", help="assignment JSON for proto/fano/capacity (default: identity)")
    sp.add_argument("--mode", choices=("exhaustive", "heuristic"), default="exhaustive")
    sp.add_argument("--max-enumeration", type=int, default=1_000_000)
    sp.add_argument("--restarts", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--strict", action="store_true", help="exit 3 if the enumeration cap forces heuristics")
    common(sp)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("game", help="dimension bound for Alice in a non-local game")
    sp.add_argument("game", nargs="?")
    sp.add_argument("stats", nargs="?")
    sp.add_argument("--chsh", action="store_true")
    sp.add_argument("--success", type=float, help="override every p_s with this value")
    sp.add_argument("--merge", action="store_true", help="merge winning answers of non-unique games")
    common(sp)
    sp.set_defaults(func=cmd_game)

    sp = sub.add_parser("capacity", help="Blahut-Arimoto capacity of a channel file")
    sp.add_argument("channel")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--max-iter", type=int, default=100_000)
    common(sp)
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("verify", help="check that a quantum model reproduces a table")
    sp.add_argument("model", nargs="?")
    sp.add_argument("table", nargs="?")
    sp.add_argument("--two-state", action="store_true")
    sp.add_argument("--bb84", action="store_true")
    sp.add_argument("--tol", type=float, default=1e-9)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("minentropy", help="guessing probability and conditional min-entropy")
    sp.add_argument("ensemble", nargs="?")
    sp.add_argument("--bb84", action="store_true")
    sp.add_argument("--bb84-marginal", action="store_true")
    sp.add_argument("--epsilon", type=float, default=0.0)
    sp.add_argument("--tol", type=float, default=1e-8)
    common(sp)
    sp.set_defaults(func=cmd_minentropy)

    sp = sub.add_parser("counterexample", help="min-entropy additivity and splitting counterexamples")
    sp.add_argument("--independent", action="store_true", help="use two independent single-bit copies")
    sp.add_argument("--epsilon", type=float, default=0.0)
    common(sp)
    sp.set_defaults(func=cmd_counterexample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Failure as exc:
        if exc.doc is not None and args.format == "json":
            print(io.dumps({**exc.doc, "error": str(exc)}))
        elif exc.doc is not None:
            for d in exc.doc.get("deviations", []):
                print(f"  deviation: {d}")
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DimwitError as exc:
        if args.format == "json":
            print(io.dumps({"error": type(exc).__name__, "detail": str(exc)}))
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
