"""Shared vocabulary for describing blocks in natural language."""
from __future__ import annotations

# block a is the red block, block b the blue block, and so on
BLOCK_COLORS = (
    "red", "blue", "orange", "yellow", "white", "magenta",
    "black", "cyan", "green", "violet", "silver", "gold",
)
_LETTERS = "abcdefghijkl"
COLOR_OF = dict(zip(_LETTERS, BLOCK_COLORS))
BLOCK_OF_COLOR = {c: b for b, c in COLOR_OF.items()}


def color_of(block: str) -> str:
    try:
        return COLOR_OF[block]
    except KeyError:
        raise ValueError(f"no color assigned to block {block!r}") from None
