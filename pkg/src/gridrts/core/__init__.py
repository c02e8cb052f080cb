"""Deterministic simulation core: types, pathing, visibility, engine."""
