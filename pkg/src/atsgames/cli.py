"""Command-line interface.

Exit codes: 0 system wins / success, 10 environment wins, 20 unknown,
1 usage or parse error, 2 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import random
import sys
from concurrent.futures import ProcessPoolExecutor

from . import gamefile
from .dot import global_graph_to_dot, trace_to_dot
from .errors import ATSError, ExplosionCap, ParseError
from .game import DEFAULT_PLAY_CAP, Play, Safety, is_maximal, step, winner
from .reduction import AsynGame, build_ats_game, solve_asyn_bruteforce
from .solvers import enumerate_distributed_strategies, solve_distributed, solve_sequential
from .strategy import Outcome, is_winning_strategy
from .traces import trace_from_word

EXIT = {Outcome.SYSTEM_WINS: 0, Outcome.ENVIRONMENT_WINS: 10, Outcome.UNKNOWN: 20}
EXIT_USAGE = 1
EXIT_CAP = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(path):
    with open(path) as fh:
        return gamefile.parse_game(fh.read())


def _ats(G, what):
    if isinstance(G, AsynGame):
        raise ParseError(f"{what} needs an ATS game; run 'reduce' on asynchronous games first")
    return G


def _state(s):
    return "(" + ", ".join(s) + ")"


def _indent(text, pad="  "):
    return "".join(pad + line + "\n" if line else "\n" for line in text.splitlines())


def _parse_word(text, alphabet):
    parts = text.replace(",", " ").split()
    if len(parts) == 1 and parts[0] not in alphabet and all(ch in alphabet for ch in parts[0]):
        parts = list(parts[0])
    return parts


def cmd_validate(args, out):
    G = _load(args.file)
    kind = "asynchronous game" if isinstance(G, AsynGame) else "ATS game"
    out.write(f"{args.file}: valid {kind}\n")
    return 0


def cmd_info(args, out):
    G = _load(args.file)
    A = G.system
    alpha = A.alphabet
    n_global = 1
    for p in alpha.processes:
        n_global *= len(A.local_states[p])
    out.write(f"kind: {'asynchronous game' if isinstance(G, AsynGame) else 'ATS game'}\n")
    out.write(f"processes: {len(alpha.processes)} ({' '.join(alpha.processes)})\n")
    out.write(f"actions: {len(alpha.actions)} ({' '.join(alpha.actions)})\n")
    if isinstance(G, AsynGame):
        out.write(f"controllable: {' '.join(sorted(G.controllable))}\n")
        out.write(f"uncontrollable: {' '.join(sorted(G.uncontrollable))}\n")
    for p in alpha.processes:
        out.write(f"local states {p}: {len(A.local_states[p])}\n")
    out.write(f"global states: {n_global}\n")
    out.write(f"reachable global states: {len(A.reachable(G.initial))}\n")
    out.write(f"local transitions: {sum(len(v) for v in A.transitions.values())}\n")
    out.write(f"complete: {'yes' if A.is_complete() else 'no'}\n")
    out.write(f"initial: {_state(G.initial)}\n")
    out.write(f"enabled at initial: {' '.join(A.enabled(G.initial)) or '-'}\n")
    cond = G.condition
    kind = "safety" if isinstance(cond, Safety) else "reachability"
    out.write(f"condition: {kind} ({len(cond.states)} states)\n")
    return 0


def cmd_solve_seq(args, out):
    G = _load(args.file)
    if isinstance(G, AsynGame):
        G = G.game
    v = solve_sequential(G)
    out.write("solver: sequential\n")
    out.write(f"verdict: {v.outcome.value}\n")
    out.write(f"winning region ({len(v.winning_region)} states):\n")
    for s in v.winning_region:
        out.write(f"  {_state(s)}\n")
    if v.system_wins:
        strat = v.witness
        out.write("witness:\n")
        out.write(_indent(gamefile.format_sequential(G, strat, strat.reachable(G))))
        if args.witness_out:
            with open(args.witness_out, "w") as fh:
                fh.write(gamefile.format_sequential(G, strat, strat.reachable(G)))
    if args.plot:
        from .plotting import plot_winning_region
        plot_winning_region(G, v.winning_region, args.plot)
        out.write(f"figure: {args.plot}\n")
    return EXIT[v.outcome]


def _check_one(job):
    G, sigma, horizon, cap = job
    return is_winning_strategy(G, sigma, horizon, cap)


def cmd_solve_dist(args, out):
    G = _load(args.file)
    out.write(f"solver: distributed (horizon {args.horizon})\n")
    if isinstance(G, AsynGame):
        v = solve_asyn_bruteforce(G, args.horizon, args.max_plays)
        out.write("game: asynchronous (strategy tables over process views)\n")
        out.write(f"verdict: {v.outcome.value}\n")
        out.write(f"{v.stats['tables_examined']} strategies examined\n")
        if v.outcome is Outcome.ENVIRONMENT_WINS:
            out.write(f"losing play: {' '.join(v.counterexample.canonical_form()) or '<empty>'}\n")
        if v.system_wins:
            out.write("witness (process: view -> allowed controllable actions):\n")
            for p in G.alphabet.processes:
                for view, allowed in sorted(v.witness.tables.get(p, {}).items(), key=lambda kv: (len(kv[0]), kv[0])):
                    out.write(f"  {p}: {' '.join(view) or '<empty>'} -> {{{', '.join(sorted(allowed))}}}\n")
        if args.plot:
            out.write("figure: skipped (plots are drawn for ATS games; run 'reduce' first)\n")
        return EXIT[v.outcome]
    refutations = []
    if args.enumerate:
        strategies = list(enumerate_distributed_strategies(G, args.horizon, args.max_plays))
        jobs = [(G, s, args.horizon, args.max_plays) for s in strategies]
        if args.threads > 1:
            with ProcessPoolExecutor(max_workers=args.threads) as pool:
                verdicts = list(pool.map(_check_one, jobs))
        else:
            verdicts = [_check_one(j) for j in jobs]
        outcomes = [v.outcome for v in verdicts]
        if Outcome.SYSTEM_WINS in outcomes:
            overall = Outcome.SYSTEM_WINS
        elif outcomes and all(o is Outcome.ENVIRONMENT_WINS for o in outcomes):
            overall = Outcome.ENVIRONMENT_WINS
        else:
            overall = Outcome.UNKNOWN if outcomes else Outcome.ENVIRONMENT_WINS
        out.write(f"verdict: {overall.value}\n")
        out.write(f"{len(strategies)} strategies examined\n")
        for k, (sigma, v) in enumerate(zip(strategies, verdicts), start=1):
            out.write(f"strategy {k}: {v.outcome.value}\n")
            out.write(_indent(gamefile.format_strategy(sigma)))
            if v.counterexample is not None:
                out.write(_indent(gamefile.format_play(v.counterexample, "losing play")))
                refutations.append((sigma.responses, v.counterexample))
        winner_sigma = next((s for s, v in zip(strategies, verdicts) if v.system_wins), None)
    else:
        v = solve_distributed(G, args.horizon, args.max_plays, backjump=args.backjump)
        overall = v.outcome
        out.write(f"verdict: {overall.value}\n")
        out.write(f"{v.stats['tables_examined']} strategies examined\n")
        winner_sigma = v.witness
        refutations = v.refutations
        if overall is Outcome.ENVIRONMENT_WINS:
            for k, (table, play) in enumerate(refutations, start=1):
                out.write(f"refuted table {k}:\n")
                for key, resp in sorted(table.items(), key=lambda kv: (len(kv[0]), kv[0])):
                    out.write(f"  {' '.join(key)} -> {_state(resp)}\n")
                out.write(_indent(gamefile.format_play(play, "losing play")))
    if winner_sigma is not None:
        out.write("witness:\n")
        out.write(_indent(gamefile.format_strategy(winner_sigma)))
        if args.strategy_out:
            with open(args.strategy_out, "w") as fh:
                fh.write(gamefile.format_strategy(winner_sigma))
    if args.plot:
        from .plotting import plot_refutations
        plot_refutations(G, refutations, args.plot)
        out.write(f"figure: {args.plot}\n")
    return EXIT[overall]


def cmd_reduce(args, out):
    G = _load(args.file)
    if not isinstance(G, AsynGame):
        raise ParseError("reduce needs an asynchronous game (a file with a partition section)")
    red = build_ats_game(G)
    text = gamefile.format_game(red.game)
    with open(args.output, "w") as fh:
        fh.write(text)
    A = red.game.system
    out.write(f"wrote {args.output}: {len(A.alphabet.actions)} actions, "
              f"{sum(len(A.local_states[p]) for p in A.alphabet.processes)} local states\n")
    return 0


def cmd_check_strategy(args, out):
    G = _ats(_load(args.file), "check-strategy")
    with open(args.strategy) as fh:
        sigma = gamefile.parse_strategy(fh.read(), G)
    sigma.validate()
    v = is_winning_strategy(G, sigma, args.horizon, args.max_plays)
    out.write(f"verdict: {v.outcome.value}\n")
    if v.counterexample is not None:
        out.write(gamefile.format_play(v.counterexample, "losing play"))
    return EXIT[v.outcome]


def cmd_simulate(args, out):
    G = _ats(_load(args.file), "simulate")
    rng = random.Random(args.seed)
    word = _parse_word(args.schedule, G.alphabet)
    out.write(f"seed: {args.seed}\n")
    p = Play.empty(G)
    for a in word:
        if a not in G.alphabet:
            raise ParseError(f"unknown action {a!r} in schedule")
        options = step(G, p, a)
        if not options:
            out.write(f"blocked: {a} is not enabled at {_state(p.final)}\n")
            break
        p = options[rng.randrange(len(options))]
    out.write(gamefile.format_play(p))
    status = "maximal" if is_maximal(G, p) else "partial"
    out.write(f"status: {status}\n")
    out.write(f"winner so far: {winner(G, p).value}\n")
    return 0


def cmd_export_dot(args, out):
    G = _load(args.file)
    if isinstance(G, AsynGame):
        G = G.game
    if args.trace is not None:
        text = trace_to_dot(trace_from_word(_parse_word(args.trace, G.alphabet), G.alphabet))
    else:
        text = global_graph_to_dot(G)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def build_parser():
    parser = _Parser(prog="atsgames", description="Games on asynchronous transition systems.")
    parser.add_argument("--max-plays", type=int, default=DEFAULT_PLAY_CAP,
                        help="cap on plays visited by enumerations (default 10^6)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="parse and check a game file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("info", help="sizes, completeness and enabled actions")
    p.add_argument("file")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("solve-seq", help="full-information solver and winning region")
    p.add_argument("file")
    p.add_argument("--witness-out", help="write the positional witness strategy here")
    p.add_argument("--plot", help="render the state graph with the winning region (PNG)")
    p.set_defaults(func=cmd_solve_seq)

    p = sub.add_parser("solve-dist", help="horizon-bounded distributed strategy search")
    p.add_argument("file")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--enumerate", action="store_true", help="list every strategy with its verdict")
    p.add_argument("--backjump", action="store_true", help="skip choices a refutation does not depend on")
    p.add_argument("--threads", type=int, default=1, help="worker processes for --enumerate")
    p.add_argument("--strategy-out", help="write the winning strategy here")
    p.add_argument("--plot", help="render losing plays of refuted strategies (PNG)")
    p.set_defaults(func=cmd_solve_dist)

    p = sub.add_parser("reduce", help="compile an asynchronous game into an ATS game")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("check-strategy", help="check a strategy file against a game")
    p.add_argument("file")
    p.add_argument("strategy")
    p.add_argument("--horizon", type=int, required=True)
    p.set_defaults(func=cmd_check_strategy)

    p = sub.add_parser("simulate", help="play a schedule with random system choices")
    p.add_argument("file")
    p.add_argument("--schedule", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export-dot", help="DOT for the global-state graph or a trace")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--global-graph", action="store_true")
    g.add_argument("--trace", metavar="WORD")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "horizon", 0) is not None and getattr(args, "horizon", 0) < 0:
        parser.error("horizon must be non-negative")
    try:
        return args.func(args, out)
    except ExplosionCap as exc:
        sys.stderr.write(f"error: {exc}\n")
        for k, v in sorted(exc.diagnostics.items()):
            sys.stderr.write(f"  {k}: {v}\n")
        return EXIT_CAP
    except (ATSError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
