"""Pull a plan out of free-form model output.

Models rarely answer with clean PDDL.  The rule-based pass looks for
parenthesised steps, bare ``name arg ...`` lines and, for the blocksworld and
mystery vocabularies, the verb phrases used in natural-language answers.  When
an answer restates its plan (steps with commentary, then a summary list) the
last section that contains steps wins.
"""
from __future__ import annotations

import re
from typing import Callable

from .naming import BLOCK_OF_COLOR, BLOCK_COLORS
from .pddl import Domain, Plan, Problem, Step


class ExtractionFailure(ValueError):
    """No recognisable action in the text."""


BLOCKSWORLD_ACTIONS = frozenset({"pick-up", "put-down", "stack", "unstack"})
MYSTERY_ACTIONS = frozenset({"attack", "succumb", "overcome", "feast"})

_PAREN_STEP = re.compile(r"\(\s*([A-Za-z][\w\-]*)((?:\s+[\w\-]+)*)\s*\)")
_MARKDOWN = re.compile(r"[*`_#>]+")
_BULLET = re.compile(r"^\s*(?:[-+•]\s+|\d+[.)]\s+|step\s*\d+\s*[:.)]\s*|action\s*\d+\s*[:.)]\s*)+", re.I)
_OBJ = re.compile(r"^[a-z0-9][\w\-]*$")

_COLORS = "|".join(BLOCK_COLORS)


def _ref(tag: str) -> str:
    return rf"(?:the\s+)?(?:(?P<{tag}c>{_COLORS})\s+block|block\s+(?P<{tag}l>[a-z])\b)"


_BW_PATTERNS = (
    ("unstack", re.compile(rf"\bunstack\s+{_ref('x')}\s+from\s+(?:on\s+top\s+of\s+)?{_ref('y')}", re.I)),
    ("stack", re.compile(rf"\bstack\s+{_ref('x')}\s+(?:on\s+top\s+of|onto|on)\s+{_ref('y')}", re.I)),
    ("pick-up", re.compile(rf"\bpick[\s\-]up\s+{_ref('x')}", re.I)),
    ("put-down", re.compile(rf"\bput[\s\-]down\s+{_ref('x')}", re.I)),
)
_MYSTERY_PATTERNS = (
    ("feast", re.compile(r"\bfeast\s+object\s+(?P<x>\w+)\s+from\s+(?:another\s+)?object\s+(?P<y>\w+)", re.I)),
    ("overcome", re.compile(r"\bovercome\s+object\s+(?P<x>\w+)\s+from\s+(?:another\s+)?object\s+(?P<y>\w+)", re.I)),
    ("attack", re.compile(r"\battack\s+object\s+(?P<x>\w+)", re.I)),
    ("succumb", re.compile(r"\bsuccumb\s+object\s+(?P<x>\w+)", re.I)),
)


def _block(m: re.Match, tag: str) -> str | None:
    c = m.groupdict().get(tag + "c")
    if c:
        return BLOCK_OF_COLOR[c.lower()]
    letter = m.groupdict().get(tag + "l")
    return letter.lower() if letter else None


def _clean(line: str) -> str:
    return _BULLET.sub("", _MARKDOWN.sub("", line)).strip()


class _LineReader:
    def __init__(self, domain: Domain, objects: frozenset | None):
        self.arity = {a.name: a.arity for a in domain.actions}
        self.objects = objects
        names = set(self.arity)
        self.bw = BLOCKSWORLD_ACTIONS <= names
        self.mystery = MYSTERY_ACTIONS <= names

    def _ok_args(self, args: tuple) -> bool:
        if self.objects is not None:
            return all(a in self.objects for a in args)
        return all(_OBJ.match(a) for a in args)

    def steps(self, raw: str) -> list:
        line = _MARKDOWN.sub("", raw)
        found = []
        for m in _PAREN_STEP.finditer(line):
            name = m.group(1).lower()
            args = tuple(m.group(2).lower().split())
            if name in self.arity and len(args) == self.arity[name]:
                found.append(Step(name, args))
        if found:
            return found
        cleaned = _clean(raw)
        bare = self._bare(cleaned)
        if bare:
            return [bare]
        return self._verbal(cleaned)

    def _bare(self, text: str) -> Step | None:
        words = text.rstrip(".;,").split()
        if not words:
            return None
        name = words[0].lower()
        if name not in self.arity or len(words) != self.arity[name] + 1:
            return None
        args = tuple(w.lower() for w in words[1:])
        return Step(name, args) if self._ok_args(args) else None

    def _verbal(self, text: str) -> list:
        best = None
        if self.bw:
            for name, pat in _BW_PATTERNS:
                m = pat.search(text)
                if m and (best is None or m.start() < best[0]):
                    args = tuple(x for x in (_block(m, "x"), _block(m, "y")) if x)
                    best = (m.start(), Step(name, args))
        if self.mystery:
            for name, pat in _MYSTERY_PATTERNS:
                m = pat.search(text)
                if m and (best is None or m.start() < best[0]):
                    args = tuple(v.lower() for k, v in m.groupdict().items() if v)
                    best = (m.start(), Step(name, args))
        if best is None:
            return []
        step = best[1]
        if len(step.args) != self.arity[step.name] or not self._ok_args(step.args):
            return []
        return [step]


def _is_header(raw: str) -> bool:
    if not raw.strip() or raw[:1].isspace():
        return False
    stripped = raw.strip()
    plain = _MARKDOWN.sub("", stripped).strip()
    bold_only = stripped.startswith("**") and stripped.endswith("**") and not _BULLET.match(plain)
    return plain.endswith(":") or bold_only


def extract_plan(
    text: str,
    domain: Domain,
    problem: Problem | None = None,
    mode: str = "rules",
    translator: Callable[[str], str] | None = None,
) -> Plan:
    """Return the plan found in ``text``; raise ExtractionFailure if there is none.

    ``mode="translate"`` first passes the text through ``translator`` (typically
    a secondary model asked to rewrite the answer as PDDL) and then applies the
    rules to its output.
    """
    if mode == "translate":
        if translator is None:
            raise ValueError("translate mode needs a translator")
        text = translator(text)
    elif mode != "rules":
        raise ValueError(f"unknown extraction mode {mode!r}")
    objects = frozenset(problem.object_names) if problem is not None else None
    reader = _LineReader(domain, objects)
    sections: list = [[]]
    for raw in text.splitlines():
        steps = reader.steps(raw)
        if not steps and _is_header(raw):
            sections.append([])
            continue
        if steps:
            sections[-1].append((raw[:1].isspace(), steps))
    for section in reversed(sections):
        if not section:
            continue
        top = [s for indented, s in section if not indented]
        chosen = top if top else [s for _, s in section]
        return Plan(tuple(step for group in chosen for step in group))
    raise ExtractionFailure("no actions recognised in the response")
