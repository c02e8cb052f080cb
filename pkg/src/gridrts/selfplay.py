"""Headless bot-vs-bot game driver used by the CLI, tests, and benchmarks."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .balance import BalanceConfig
from .bots import ScriptedInstructor, make_bot
from .core import engine
from .core.state import GameState
from .core.types import Event, Outcome
from .env import make_observation
from .mapgen import MapGrid, MapParams, generate_map
from .replay import Recorder, Replay

BOT_PERIOD = 10  # bots re-plan every this many ticks


@dataclass
class GameResult:
    seed: int
    outcome: int
    ticks: int
    duration_s: float
    events: list[Event] = field(default_factory=list)
    replay: Replay | None = None

    @property
    def outcome_name(self) -> str:
        return Outcome.name(self.outcome)


def play_game(strategy_a: str, strategy_b: str, seed: int,
              balance: BalanceConfig | None = None,
              map_params: MapParams | None = None,
              grid: MapGrid | None = None,
              resource_scaling: tuple[float, float] = (1.0, 1.0),
              max_ticks: int | None = None,
              record: bool = False,
              instruct: bool = False,
              keep_events: bool = False) -> GameResult:
    """One deterministic bot-vs-bot game.

    ``max_ticks`` truncates long games (the outcome stays Ongoing); with
    ``record`` the full command log plus checkpoints is captured, and with
    ``instruct`` player 0's bot narrates its phase changes as instructions.
    """
    balance = balance or BalanceConfig()
    if grid is None:
        grid = generate_map(seed, map_params)
    state = engine.new_game(balance, grid, seed, resource_scaling)
    bots = [
        make_bot(strategy_a, player=0, seed=seed, balance=balance,
                 resource_scaling=resource_scaling[0]),
        make_bot(strategy_b, player=1, seed=seed, balance=balance,
                 resource_scaling=resource_scaling[1]),
    ]
    recorder = None
    if record:
        recorder = Recorder(balance, grid, seed,
                            players={"0": strategy_a, "1": strategy_b},
                            opponent=strategy_b, resource_scaling=resource_scaling)
    instructor = ScriptedInstructor(bots[0]) if instruct else None

    cap = max_ticks if max_ticks is not None else balance.max_ticks
    all_events: list[Event] = []
    started = time.perf_counter()
    while state.outcome == Outcome.ONGOING and state.tick < cap:
        if recorder is not None:
            recorder.on_tick_start(state)
        commands = {}
        if state.tick % BOT_PERIOD == 0:
            for player, bot in enumerate(bots):
                cmds = bot.act(make_observation(state, player))
                if cmds:
                    commands[player] = cmds
                    if recorder is not None:
                        for unit_id, action in cmds:
                            recorder.command(state.tick, player, unit_id, action)
            if instructor is not None:
                text = instructor.poll()
                if text and recorder is not None:
                    recorder.instruction(state.tick, text)
        events = engine.step(state, commands)
        if keep_events:
            all_events.extend(events)
        elif recorder is None:
            # nobody consumes them; keep only terminal events
            all_events = [e for e in events if e.kind == "outcome"]
    duration = time.perf_counter() - started

    replay = None
    if recorder is not None:
        if state.outcome != Outcome.ONGOING:
            recorder.outcome(state.tick, state.outcome)
        replay = recorder.finish()
    return GameResult(seed=seed, outcome=state.outcome, ticks=state.tick,
                      duration_s=duration, events=all_events, replay=replay)


@dataclass
class MatchStats:
    games: int = 0
    wins_a: int = 0
    wins_b: int = 0
    draws: int = 0
    total_ticks: int = 0
    total_seconds: float = 0.0

    def add(self, result: GameResult, a_is_player0: bool = True) -> None:
        self.games += 1
        self.total_ticks += result.ticks
        self.total_seconds += result.duration_s
        if result.outcome == Outcome.DRAW or result.outcome == Outcome.ONGOING:
            self.draws += 1
        elif (result.outcome == 0) == a_is_player0:
            self.wins_a += 1
        else:
            self.wins_b += 1

    @property
    def ticks_per_second(self) -> float:
        return self.total_ticks / self.total_seconds if self.total_seconds else 0.0

    def rates(self) -> tuple[float, float, float]:
        if not self.games:
            return (0.0, 0.0, 0.0)
        return (100.0 * self.wins_a / self.games,
                100.0 * self.wins_b / self.games,
                100.0 * self.draws / self.games)


def run_match(strategy_a: str, strategy_b: str, n_games: int, seed: int,
              swap_sides: bool = False, **kwargs) -> MatchStats:
    """n seeded games; with swap_sides each seed's map is played twice with
    the players' sides exchanged to cancel map asymmetry."""
    stats = MatchStats()
    for i in range(n_games):
        game_seed = seed + i
        if swap_sides and i % 2 == 1:
            result = play_game(strategy_b, strategy_a, seed + i // 2 * 2, **kwargs)
            stats.add(result, a_is_player0=False)
        else:
            result = play_game(strategy_a, strategy_b, game_seed, **kwargs)
            stats.add(result, a_is_player0=True)
    return stats
