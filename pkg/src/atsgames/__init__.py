"""Games on non-deterministic asynchronous transition systems over Mazurkiewicz traces."""

from importlib import resources

from .ats import AsyncTransitionSystem, TraceRun, trace_runs
from .errors import (ATSError, ExplosionCap, InitialStateMismatch, InvalidPlay, InvalidStrategy,
                     MissingResponse, ParseError, Truncated, UnknownAction)
from .game import Game, Play, Player, Reachability, Safety, all_maximal_plays, is_maximal, step, winner
from .gamefile import format_game, parse_game
from .reduction import (AsynGame, AsynStrategy, build_ats_game, lift_play, lift_strategy, project_play,
                        project_strategy, solve_asyn_bruteforce)
from .solvers import SequentialStrategy, enumerate_distributed_strategies, solve_distributed, solve_sequential
from .strategy import DistributedStrategy, Outcome, Verdict, conforms, is_winning_strategy, sigma_eval, strategy_outcomes
from .traces import (Configuration, DistributedAlphabet, Event, Trace, action_successors, append_event,
                     canonical_form, configurations, event_successors, i_view, max_event, maxset, p_view,
                     prime_of, trace_from_word)

__version__ = "0.1.0"


def bundled(name: str) -> str:
    """Text of a bundled example game, e.g. ``bundled("fig1.game")``."""
    return resources.files(__package__).joinpath("data", name).read_text()
