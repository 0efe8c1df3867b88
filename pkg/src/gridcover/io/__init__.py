"""Persistence: checkpoints, episode logs, result tables, SVG flight paths."""
