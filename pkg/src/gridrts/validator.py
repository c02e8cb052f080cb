"""Instruction/execution consistency checking and game quality filtering.

The grammar is a deliberately small pattern matcher covering the head of the
frequent-instruction distribution (build/make/create/train + count + noun,
attack/kill + target, the many mining phrasings, stop, scout, move/retreat).
Anything outside it — anaphora ("use it as a lure"), conditionals ("if
attacked retreat south") — parses as unparsed and checks as Unverifiable.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .core.types import ActionType, UnitType
from .replay import Replay, resimulate

VERIFY_WINDOW = 750  # ticks after issuance in which execution must appear


class Verb(Enum):
    BUILD = "build"
    TRAIN = "train"
    ATTACK = "attack"
    MINE = "mine"
    MOVE = "move"
    SCOUT = "scout"
    STOP = "stop"


class Verdict(Enum):
    FULFILLED = "fulfilled"
    VIOLATED = "violated"
    UNVERIFIABLE = "unverifiable"


@dataclass(frozen=True)
class Intent:
    verb: Verb | None
    object: UnitType | str | None = None
    count: int | None = None
    unparsed: bool = False
    text: str = ""

    @classmethod
    def none(cls, text: str) -> "Intent":
        return cls(verb=None, unparsed=True, text=text)


# ── lexicon ───────────────────────────────────────────────────────────────

UNIT_NOUNS: dict[str, UnitType] = {}
for kind, nouns in {
    UnitType.PEASANT: ("peasant", "peasants", "worker", "workers", "peon",
                       "peons", "peaons", "peas", "villager", "villagers"),
    UnitType.SPEARMAN: ("spearman", "spearmen", "spear", "spears"),
    UnitType.SWORDMAN: ("swordman", "swordmen", "swordsman", "swordsmen",
                        "sword", "swords"),
    UnitType.CAVALRY: ("cavalry", "calvary", "cav", "cavs", "horse", "horses",
                       "knight", "knights"),
    UnitType.DRAGON: ("dragon", "dragons"),
    UnitType.ARCHER: ("archer", "archers"),
    UnitType.CATAPULT: ("catapult", "catapults", "cata", "catas"),
    UnitType.TOWN_HALL: ("townhall", "townhalls", "hall", "base"),
    UnitType.BARRACK: ("barrack", "barracks"),
    UnitType.BLACKSMITH: ("blacksmith", "blacksmiths", "smith"),
    UnitType.STABLE: ("stable", "stables"),
    UnitType.WORKSHOP: ("workshop", "workshops"),
    UnitType.GUARD_TOWER: ("tower", "towers", "guardtower"),
}.items():
    for noun in nouns:
        UNIT_NOUNS[noun] = kind

NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "couple": 2,
    "a": 1, "an": 1, "another": 1,
}

BUILD_VERBS = {"build", "make", "create", "train", "construct", "produce", "get"}
ATTACK_VERBS = {"attack", "attacking", "kill", "killing", "fight", "destroy",
                "engage"}
MINE_VERBS = {"mine", "gather", "collect", "harvest"}
MOVE_VERBS = {"move", "go", "send", "retreat", "return", "bring", "defend",
              "flee", "regroup"}
STOP_VERBS = {"stop", "halt", "wait"}
SCOUT_VERBS = {"scout", "explore"}

ANAPHORA = {"him", "her", "them", "it", "those", "these"}
_MINE_WORD = re.compile(r"^(mine|mines|mining|mined|minerals?|ore)$")
_PUNCT = re.compile(r"[^\w\s]")


def _tokens(text: str) -> list[str]:
    return _PUNCT.sub(" ", text.lower().replace("-", " ")).split()


def _find_count(tokens: list[str]) -> int | None:
    for tok in tokens:
        if tok.isdigit():
            return max(1, int(tok))
        if tok in NUMBER_WORDS and tok not in ("a", "an"):
            return NUMBER_WORDS[tok]
    # bare articles mean one ("build a workshop"); quantifiers mean unknown
    if any(t in ("a", "an", "another") for t in tokens):
        return 1
    return None


def _find_unit(tokens: list[str]) -> UnitType | None:
    text = " ".join(tokens)
    if "town hall" in text or "townhall" in text:
        return UnitType.TOWN_HALL
    for tok in tokens:
        if tok in UNIT_NOUNS:
            return UNIT_NOUNS[tok]
    return None


def parse_instruction(text: str) -> Intent:
    """Total, deterministic pattern matcher; never raises."""
    tokens = _tokens(text)
    if not tokens:
        return Intent.none(text)
    if "if" in tokens or "when" in tokens:  # conditionals: out of grammar
        return Intent.none(text)
    joined = " ".join(tokens)
    head = tokens[0]

    # mining idioms win: "send all peasants to mine", "back to mining",
    # "collect minerals", "all peasants mine", plain "mine" — but a leading
    # build verb with a unit noun before the mine word ("build 2 peasants at
    # the new mine") is still a production order
    mine_idx = next((i for i, t in enumerate(tokens) if _MINE_WORD.match(t)), None)
    if mine_idx is not None:
        unit_idx = next((i for i, t in enumerate(tokens) if t in UNIT_NOUNS
                         or t in ("town", "townhall")), None)
        production = (head in BUILD_VERBS and unit_idx is not None
                      and unit_idx < mine_idx)
        if not production:
            count = None if "all" in tokens else _find_count(
                [t for t in tokens if t not in ("a", "an", "another")])
            return Intent(Verb.MINE, "peasants", count, text=text)

    if head in STOP_VERBS or joined.startswith("stop"):
        return Intent(Verb.STOP, text=text)

    if set(tokens) & SCOUT_VERBS or "scouting" in tokens or "keep scouting" in joined:
        return Intent(Verb.SCOUT, text=text)

    if set(tokens) & ATTACK_VERBS:
        rest = tokens[1:] if head in ATTACK_VERBS else [
            t for t in tokens if t not in ATTACK_VERBS]
        if set(rest) & ANAPHORA:
            return Intent.none(text)
        # "attack X with Y": the target is before "with"
        if "with" in rest:
            rest = rest[:rest.index("with")]
        target = _find_unit(rest)
        count = _find_count(rest) if target is not None else None
        return Intent(Verb.ATTACK, target, count, text=text)

    if head in BUILD_VERBS or set(tokens) & (BUILD_VERBS - {"get"}):
        if set(tokens) & ANAPHORA:
            return Intent.none(text)
        unit = _find_unit(tokens)
        if unit is None:
            return Intent.none(text)
        count = _find_count(tokens)
        verb = Verb.BUILD if unit.is_building() else Verb.TRAIN
        return Intent(verb, unit, count, text=text)

    if head in MOVE_VERBS or set(tokens) & MOVE_VERBS:
        if set(tokens) & ANAPHORA:
            return Intent.none(text)
        where = "base" if ("base" in tokens or "home" in tokens) else \
            next((t for t in tokens if t in ("north", "south", "east", "west",
                                             "back", "away")), None)
        return Intent(Verb.MOVE, where, text=text)

    return Intent.none(text)


# ── execution checking ────────────────────────────────────────────────────

@dataclass(frozen=True)
class ExecutionEvent:
    """One executor command, enriched with resolved payload kinds."""

    tick: int
    unit_id: int
    action: ActionType
    unit_type: UnitType | None = None    # train / build payload
    target_kind: UnitType | None = None  # attack target's kind at issue time


def check_execution(intent: Intent, events: list[ExecutionEvent],
                    issued_tick: int = 0, window: int = VERIFY_WINDOW) -> Verdict:
    """Match one intent against the commands in its verification window."""
    if intent.unparsed or intent.verb is None:
        return Verdict.UNVERIFIABLE
    active = [e for e in events if issued_tick <= e.tick <= issued_tick + window]
    need = intent.count or 1

    if intent.verb is Verb.TRAIN:
        hits = [e for e in active if e.action == ActionType.TRAIN_UNIT
                and e.unit_type == intent.object]
        return Verdict.FULFILLED if len(hits) >= need else Verdict.VIOLATED
    if intent.verb is Verb.BUILD:
        hits = [e for e in active if e.action == ActionType.BUILD_BUILDING
                and e.unit_type == intent.object]
        return Verdict.FULFILLED if len(hits) >= need else Verdict.VIOLATED
    if intent.verb is Verb.ATTACK:
        hits = [e for e in active if e.action == ActionType.ATTACK]
        if isinstance(intent.object, UnitType):
            hits = [e for e in hits if e.target_kind == intent.object]
        return Verdict.FULFILLED if hits else Verdict.VIOLATED
    if intent.verb is Verb.MINE:
        units = {e.unit_id for e in active if e.action == ActionType.GATHER}
        return Verdict.FULFILLED if len(units) >= (intent.count or 1) else Verdict.VIOLATED
    if intent.verb is Verb.MOVE:
        hits = [e for e in active if e.action == ActionType.MOVE]
        return Verdict.FULFILLED if hits else Verdict.VIOLATED
    if intent.verb is Verb.SCOUT:
        hits = [e for e in active if e.action == ActionType.MOVE]
        return Verdict.FULFILLED if hits else Verdict.VIOLATED
    if intent.verb is Verb.STOP:
        hits = [e for e in active if e.action == ActionType.IDLE]
        return Verdict.FULFILLED if hits else Verdict.VIOLATED
    return Verdict.UNVERIFIABLE


def execution_events(replay: Replay, player: int = 0) -> list[ExecutionEvent]:
    """The player's command log with attack targets resolved to unit kinds."""
    by_tick: dict[int, list] = {}
    for r in replay.commands():
        if r.player == player:
            by_tick.setdefault(r.tick, []).append(r)
    events: list[ExecutionEvent] = []

    def on_tick(state):
        for r in by_tick.get(state.tick, ()):
            target_kind = None
            if r.action.type == ActionType.ATTACK:
                target = state.units.get(r.action.target_id)
                if target is not None:
                    target_kind = target.kind
            events.append(ExecutionEvent(
                tick=r.tick, unit_id=r.unit_id, action=r.action.type,
                unit_type=r.action.unit_type, target_kind=target_kind))

    resimulate(replay, on_tick=on_tick)
    return events


# ── game filtering and player profiles ────────────────────────────────────

MIN_INSTRUCTIONS = 3
MIN_COMMANDS = 25


def filter_game(replay: Replay, player: int = 0) -> tuple[bool, str]:
    """(keep, reason): a kept game has >= 3 instructions and >= 25 commands."""
    n_instructions = len(replay.instructions())
    n_commands = sum(1 for r in replay.commands() if r.player == player)
    if n_instructions < MIN_INSTRUCTIONS:
        return False, f"only {n_instructions} instructions (< {MIN_INSTRUCTIONS})"
    if n_commands < MIN_COMMANDS:
        return False, f"only {n_commands} control actions (< {MIN_COMMANDS})"
    return True, ""


@dataclass
class PlayerProfile:
    games: int = 0
    win_rate: float = 0.0
    instructions_per_game: float = 0.0
    unique_instruction_ratio: float = 0.0
    warnings_received: int = 0
    validator_pass_rate: float = 0.0
    flags: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "games": self.games,
            "win_rate": round(self.win_rate, 4),
            "instructions_per_game": round(self.instructions_per_game, 2),
            "unique_instruction_ratio": round(self.unique_instruction_ratio, 4),
            "warnings_received": self.warnings_received,
            "validator_pass_rate": round(self.validator_pass_rate, 4),
            "flags": self.flags,
        }


def player_profile(replays: list[Replay], player: int = 0) -> PlayerProfile:
    if not replays:
        raise ValueError("need at least one replay")
    profile = PlayerProfile(games=len(replays))
    wins = 0
    texts: list[str] = []
    fulfilled = violated = 0
    warnings = 0
    from .replay import T_WARN
    for replay in replays:
        if replay.outcome() == player:
            wins += 1
        warnings += sum(1 for r in replay.records if r.tag == T_WARN)
        events = execution_events(replay, player)
        for rec in replay.instructions():
            texts.append(rec.text)
            verdict = check_execution(parse_instruction(rec.text), events,
                                      issued_tick=rec.tick)
            if verdict is Verdict.FULFILLED:
                fulfilled += 1
            elif verdict is Verdict.VIOLATED:
                violated += 1
    profile.win_rate = wins / profile.games
    profile.instructions_per_game = len(texts) / profile.games
    profile.unique_instruction_ratio = len(set(texts)) / len(texts) if texts else 0.0
    profile.warnings_received = warnings
    checked = fulfilled + violated
    profile.validator_pass_rate = fulfilled / checked if checked else 0.0
    if not texts:
        profile.flags.append("no_instructions")
    return profile
