"""Hand-labelled instruction corpus with synthetic executions.

Sixty cases drawn from the frequent-instruction inventory: each row is
(text, expected parse, synthetic execution events, expected verdict).
Execution events are (ticks_after_issue, unit_id, action, unit_type,
target_kind) tuples; the verdict column was assigned by hand.
"""
from __future__ import annotations

from gridrts.core.types import ActionType as A
from gridrts.core.types import UnitType as U
from gridrts.validator import Verb, Verdict

FULFILLED = Verdict.FULFILLED
VIOLATED = Verdict.VIOLATED
UNVERIFIABLE = Verdict.UNVERIFIABLE


def ev(tick, unit, action, unit_type=None, target_kind=None):
    return (tick, unit, action, unit_type, target_kind)


TRAIN3_DRAGONS = [ev(40, 10, A.TRAIN_UNIT, U.DRAGON),
                  ev(190, 10, A.TRAIN_UNIT, U.DRAGON),
                  ev(340, 10, A.TRAIN_UNIT, U.DRAGON)]
MINING_3 = [ev(10, 2, A.GATHER), ev(10, 3, A.GATHER), ev(12, 4, A.GATHER)]
ATTACK_PEASANT = [ev(30, 7, A.ATTACK, None, U.PEASANT)]
ATTACK_DRAGON = [ev(25, 8, A.ATTACK, None, U.DRAGON)]
BUILD_BARRACK = [ev(60, 2, A.BUILD_BUILDING, U.BARRACK)]
BUILD_WORKSHOP = [ev(45, 2, A.BUILD_BUILDING, U.WORKSHOP)]
MOVES = [ev(15, 5, A.MOVE), ev(35, 5, A.MOVE)]
IDLES = [ev(8, 2, A.IDLE), ev(8, 3, A.IDLE)]
NOTHING = []

# (text, expected_verb, expected_object, expected_count, events, verdict)
CASES = [
    ("Attack.", Verb.ATTACK, None, None, ATTACK_PEASANT, FULFILLED),
    ("Attack.", Verb.ATTACK, None, None, NOTHING, VIOLATED),
    ("Send all peasants to mine.", Verb.MINE, "peasants", None, MINING_3, FULFILLED),
    ("Send all peasants to mine.", Verb.MINE, "peasants", None, NOTHING, VIOLATED),
    ("Build a workshop.", Verb.BUILD, U.WORKSHOP, 1, BUILD_WORKSHOP, FULFILLED),
    ("Build a workshop.", Verb.BUILD, U.WORKSHOP, 1, BUILD_BARRACK, VIOLATED),
    ("Retreat.", Verb.MOVE, None, None, MOVES, FULFILLED),
    ("Retreat.", Verb.MOVE, None, None, NOTHING, VIOLATED),
    ("Build a stable.", Verb.BUILD, U.STABLE, 1,
     [ev(80, 2, A.BUILD_BUILDING, U.STABLE)], FULFILLED),
    ("Send peasants to mine.", Verb.MINE, "peasants", None, MINING_3, FULFILLED),
    ("All peasants mine.", Verb.MINE, "peasants", None, MINING_3[:1], FULFILLED),
    ("Send idle peasant to mine.", Verb.MINE, "peasants", None, MINING_3[:1], FULFILLED),
    ("Build workshop.", Verb.BUILD, U.WORKSHOP, None, BUILD_WORKSHOP, FULFILLED),
    ("Build a dragon.", Verb.TRAIN, U.DRAGON, 1, TRAIN3_DRAGONS[:1], FULFILLED),
    ("Kill peasants.", Verb.ATTACK, U.PEASANT, None, ATTACK_PEASANT, FULFILLED),
    ("Kill peasants.", Verb.ATTACK, U.PEASANT, None, ATTACK_DRAGON, VIOLATED),
    ("Attack enemy.", Verb.ATTACK, None, None, ATTACK_DRAGON, FULFILLED),
    ("Build a guard tower.", Verb.BUILD, U.GUARD_TOWER, 1,
     [ev(100, 3, A.BUILD_BUILDING, U.GUARD_TOWER)], FULFILLED),
    ("Attack the enemy.", Verb.ATTACK, None, None, ATTACK_PEASANT, FULFILLED),
    ("Stop.", Verb.STOP, None, None, IDLES, FULFILLED),
    ("Stop.", Verb.STOP, None, None, NOTHING, VIOLATED),
    ("Attack peasant.", Verb.ATTACK, U.PEASANT, None, ATTACK_PEASANT, FULFILLED),
    ("Kill that peasant.", Verb.ATTACK, U.PEASANT, None, ATTACK_PEASANT, FULFILLED),
    ("Mine.", Verb.MINE, "peasants", None, MINING_3, FULFILLED),
    ("Build another dragon.", Verb.TRAIN, U.DRAGON, 1, TRAIN3_DRAGONS[:1], FULFILLED),
    ("Make another peasant.", Verb.TRAIN, U.PEASANT, 1,
     [ev(20, 1, A.TRAIN_UNIT, U.PEASANT)], FULFILLED),
    ("Build stable.", Verb.BUILD, U.STABLE, None, BUILD_BARRACK, VIOLATED),
    ("Make a dragon.", Verb.TRAIN, U.DRAGON, 1, TRAIN3_DRAGONS[:1], FULFILLED),
    ("Build a blacksmith.", Verb.BUILD, U.BLACKSMITH, 1,
     [ev(55, 2, A.BUILD_BUILDING, U.BLACKSMITH)], FULFILLED),
    ("Build a catapult.", Verb.TRAIN, U.CATAPULT, 1,
     [ev(70, 9, A.TRAIN_UNIT, U.CATAPULT)], FULFILLED),
    ("Back to mining.", Verb.MINE, "peasants", None, MINING_3, FULFILLED),
    ("Build another peasant.", Verb.TRAIN, U.PEASANT, 1, NOTHING, VIOLATED),
    ("Make a peasant.", Verb.TRAIN, U.PEASANT, 1,
     [ev(30, 1, A.TRAIN_UNIT, U.PEASANT)], FULFILLED),
    ("Build a barrack.", Verb.BUILD, U.BARRACK, 1, BUILD_BARRACK, FULFILLED),
    ("Build 4 peasants.", Verb.TRAIN, U.PEASANT, 4,
     [ev(i * 60, 1, A.TRAIN_UNIT, U.PEASANT) for i in range(4)], FULFILLED),
    ("Build 4 peasants.", Verb.TRAIN, U.PEASANT, 4,
     [ev(i * 60, 1, A.TRAIN_UNIT, U.PEASANT) for i in range(2)], VIOLATED),
    ("Have all peasants mine.", Verb.MINE, "peasants", None, MINING_3, FULFILLED),
    ("Build 2 archers.", Verb.TRAIN, U.ARCHER, 2,
     [ev(50, 9, A.TRAIN_UNIT, U.ARCHER), ev(145, 9, A.TRAIN_UNIT, U.ARCHER)], FULFILLED),
    ("Build dragon.", Verb.TRAIN, U.DRAGON, None, TRAIN3_DRAGONS[:1], FULFILLED),
    ("Attack with peasants.", Verb.ATTACK, None, None, ATTACK_DRAGON, FULFILLED),
    ("Return to mining.", Verb.MINE, "peasants", None, MINING_3[:1], FULFILLED),
    ("Build a peasant.", Verb.TRAIN, U.PEASANT, 1,
     [ev(12, 1, A.TRAIN_UNIT, U.PEASANT)], FULFILLED),
    ("Idle peasant to mine.", Verb.MINE, "peasants", None, MINING_3[:1], FULFILLED),
    ("Make a workshop.", Verb.BUILD, U.WORKSHOP, 1, BUILD_WORKSHOP, FULFILLED),
    ("Create a workshop.", Verb.BUILD, U.WORKSHOP, 1, BUILD_WORKSHOP, FULFILLED),
    ("Mine with all peasants.", Verb.MINE, "peasants", None, MINING_3, FULFILLED),
    ("Build 3 more peasants.", Verb.TRAIN, U.PEASANT, 3,
     [ev(i * 55, 1, A.TRAIN_UNIT, U.PEASANT) for i in range(3)], FULFILLED),
    ("Create another peasant.", Verb.TRAIN, U.PEASANT, 1,
     [ev(25, 1, A.TRAIN_UNIT, U.PEASANT)], FULFILLED),
    ("Build 3 archers.", Verb.TRAIN, U.ARCHER, 3,
     [ev(i * 95, 9, A.TRAIN_UNIT, U.ARCHER) for i in range(3)], FULFILLED),
    ("Kill peasant.", Verb.ATTACK, U.PEASANT, None, ATTACK_PEASANT, FULFILLED),
    ("Make another dragon.", Verb.TRAIN, U.DRAGON, 1, NOTHING, VIOLATED),
    ("Kill him.", None, None, None, ATTACK_PEASANT, UNVERIFIABLE),
    ("Build guard tower.", Verb.BUILD, U.GUARD_TOWER, None,
     [ev(90, 3, A.BUILD_BUILDING, U.GUARD_TOWER)], FULFILLED),
    ("Attack town hall.", Verb.ATTACK, U.TOWN_HALL, None,
     [ev(40, 7, A.ATTACK, None, U.TOWN_HALL)], FULFILLED),
    ("Start mining.", Verb.MINE, "peasants", None, MINING_3, FULFILLED),
    ("Build 3 dragons.", Verb.TRAIN, U.DRAGON, 3, TRAIN3_DRAGONS, FULFILLED),
    ("Build 3 dragons.", Verb.TRAIN, U.DRAGON, 3, TRAIN3_DRAGONS[:2], VIOLATED),
    ("Use it as a lure to kill them.", None, None, None, NOTHING, UNVERIFIABLE),
    ("If attacked retreat south.", None, None, None, MOVES, UNVERIFIABLE),
    ("Attack dragons with archers.", Verb.ATTACK, U.DRAGON, None, ATTACK_DRAGON, FULFILLED),
]

assert len(CASES) == 60, len(CASES)
