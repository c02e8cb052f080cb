"""Deterministic grid RTS: engine, bots, RL-style env, replay tooling, server."""

__version__ = "0.1.0"
