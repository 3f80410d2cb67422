"""Access to the text assets shipped inside the package."""
from __future__ import annotations

from functools import lru_cache
from importlib.resources import files
from string import Template


@lru_cache(maxsize=None)
def read_asset(name: str) -> str:
    return files("modulobench").joinpath(f"assets/{name}").read_text(encoding="utf-8")


def template(name: str) -> Template:
    return Template(read_asset(f"templates/{name}"))


def fill(name: str, **values) -> str:
    return template(name).substitute(**values)
