"""On-line vertex ranking of trees: game engine, strategies and exact oracles."""

from __future__ import annotations

from .forest import LabeledForest, is_valid_ranking
from .game import ClassSpec, GameState, Move, Transcript, play

__version__ = "0.1.0"

__all__ = ["ClassSpec", "GameState", "LabeledForest", "Move", "Transcript", "is_valid_ranking", "play"]
