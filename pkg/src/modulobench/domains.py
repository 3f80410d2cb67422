"""The bundled planning domains, parsed once and shared."""
from __future__ import annotations

from functools import lru_cache

from .pddl import Domain, parse_domain
from .resources import read_asset

BLOCKSWORLD = "blocksworld"
LOGISTICS = "logistics"
SOKOBAN = "sokoban"
PLANNING_DOMAINS = (BLOCKSWORLD, LOGISTICS, SOKOBAN)


@lru_cache(maxsize=None)
def load_domain(name: str) -> Domain:
    if name not in PLANNING_DOMAINS:
        raise ValueError(f"unknown planning domain {name!r}")
    return parse_domain(read_asset(f"{name}_domain.pddl"))


def domain_text(name: str) -> str:
    return load_domain(name).source
