from .instructor import ScriptedInstructor, phase_instruction
from .strategies import (
    STRATEGIES, NoEnemySeen, NoSiteAvailable, ScriptedBot, make_bot,
    second_base_site, strong_counter, tower_rush_plan,
)
from .view import BotView

__all__ = [
    "STRATEGIES", "BotView", "NoEnemySeen", "NoSiteAvailable", "ScriptedBot",
    "ScriptedInstructor", "make_bot", "phase_instruction", "second_base_site",
    "strong_counter", "tower_rush_plan",
]
