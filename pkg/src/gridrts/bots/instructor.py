"""Scripted instructor: turns a bot's phase changes into canned instructions.

Used for onboarding-style sessions and for generating synthetic
instruction-annotated replays.  The catalog mirrors the most frequent
human phrasings ("build a workshop", "send all peasants to mine", ...).
"""
from __future__ import annotations

import re

from ..core.types import UnitType
from .strategies import ScriptedBot

PLURALS = {
    UnitType.PEASANT: "peasants",
    UnitType.SPEARMAN: "spearmen",
    UnitType.SWORDMAN: "swordsmen",
    UnitType.CAVALRY: "cavalry",
    UnitType.DRAGON: "dragons",
    UnitType.ARCHER: "archers",
    UnitType.CATAPULT: "catapults",
}

PHASE_TEMPLATES = {
    "mine": "send all peasants to mine",
    "attack": "attack",
    "scout": "keep scouting",
    "second_base": "build a new town hall",
    "tower_rush": "build a guard tower",
    "build_barrack": "build a barrack",
    "build_blacksmith": "build a blacksmith",
    "build_stable": "build a stable",
    "build_workshop": "build a workshop",
    "build_guard_tower": "build a guard tower",
    "build_town_hall": "build a new town hall",
}

_TRAIN = re.compile(r"train_(\w+)_x(\d+)")


def phase_instruction(phase: str) -> str | None:
    if phase in PHASE_TEMPLATES:
        return PHASE_TEMPLATES[phase]
    m = _TRAIN.fullmatch(phase)
    if m:
        kind = UnitType[m.group(1).upper()]
        count = int(m.group(2))
        if count == 1:
            name = PLURALS[kind].rstrip("s") if kind != UnitType.CAVALRY else "cavalry"
            return f"build a {name}"
        return f"build {count} {PLURALS[kind]}"
    return None


class ScriptedInstructor:
    """Emits one instruction per phase change of the wrapped bot."""

    def __init__(self, bot: ScriptedBot):
        self.bot = bot
        self._last_phase: str | None = None

    def poll(self) -> str | None:
        phase = self.bot.bs.phase
        if phase == self._last_phase or phase == "start":
            return None
        self._last_phase = phase
        return phase_instruction(phase)
