"""Seeded renaming of domain vocabulary, and translation of plans across it."""
from __future__ import annotations

import random
import string
from dataclasses import dataclass, field, replace

from .pddl import ActionSchema, Atom, Domain, Plan, Problem, Step

NAMED_MYSTERY = "named-mystery"
RANDOMIZED = "randomized"
IDENTITY = "identity"

FORWARD = "forward"
INVERSE = "inverse"

MYSTERY_PREDICATES = {
    "clear": "province",
    "ontable": "planet",
    "handempty": "harmony",
    "holding": "pain",
    "on": "craves",
}
MYSTERY_ACTIONS = {
    "pick-up": "attack",
    "put-down": "succumb",
    "stack": "overcome",
    "unstack": "feast",
}
MYSTERY_DOMAIN_NAME = "mystery-blocksworld-4ops"

_FIRST = string.ascii_lowercase
_REST = string.ascii_lowercase + string.digits
IDENTIFIER_LENGTH = 16


class ObfuscationError(ValueError):
    pass


def fresh_identifier(rng: random.Random, length: int = IDENTIFIER_LENGTH) -> str:
    """A random name: one lowercase letter followed by lowercase letters and digits."""
    return rng.choice(_FIRST) + "".join(rng.choice(_REST) for _ in range(length - 1))


def _inverse(d: dict) -> dict:
    return {v: k for k, v in d.items()}


@dataclass(frozen=True)
class ObfuscationMap:
    scheme: str
    seed: int | None
    domain_name: tuple  # (old, new)
    predicates: dict = field(default_factory=dict)
    actions: dict = field(default_factory=dict)
    objects: dict | None = None

    def _table(self, kind: str, direction: str) -> dict:
        table = getattr(self, kind) or {}
        if direction == FORWARD:
            return table
        if direction == INVERSE:
            return _inverse(table)
        raise ValueError(f"unknown direction {direction!r}")

    def rename_atom(self, atom: Atom, direction: str = FORWARD) -> Atom:
        preds = self._table("predicates", direction)
        objs = self._table("objects", direction)
        return Atom(preds.get(atom.predicate, atom.predicate), tuple(objs.get(a, a) for a in atom.args))

    def inverse(self) -> "ObfuscationMap":
        return ObfuscationMap(
            self.scheme, self.seed, (self.domain_name[1], self.domain_name[0]),
            _inverse(self.predicates), _inverse(self.actions),
            None if self.objects is None else _inverse(self.objects),
        )

    def to_text(self) -> str:
        lines = [f"scheme = {self.scheme}", f"seed = {self.seed}", f"domain.{self.domain_name[0]} = {self.domain_name[1]}"]
        lines += [f"predicate.{k} = {v}" for k, v in self.predicates.items()]
        lines += [f"action.{k} = {v}" for k, v in self.actions.items()]
        if self.objects is not None:
            lines += [f"object.{k} = {v}" for k, v in self.objects.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ObfuscationMap":
        scheme = seed = None
        domain_name = None
        tables: dict = {"predicate": {}, "action": {}, "object": None}
        for raw in text.splitlines():
            if not raw.strip():
                continue
            key, _, value = (s.strip() for s in raw.partition("="))
            if key == "scheme":
                scheme = value
            elif key == "seed":
                seed = None if value == "None" else int(value)
            else:
                kind, _, old = key.partition(".")
                if kind == "domain":
                    domain_name = (old, value)
                elif kind in tables:
                    if tables[kind] is None:
                        tables[kind] = {}
                    tables[kind][old] = value
                else:
                    raise ValueError(f"unknown map entry {raw!r}")
        return cls(scheme, seed, domain_name, tables["predicate"], tables["action"], tables["object"])


def _rename_domain(domain: Domain, m: ObfuscationMap) -> Domain:
    preds = m.predicates
    acts = m.actions

    def ra(a: Atom) -> Atom:
        return Atom(preds.get(a.predicate, a.predicate), a.args)

    actions = tuple(
        ActionSchema(acts.get(a.name, a.name), a.params, tuple(map(ra, a.pre)), tuple(map(ra, a.add)), tuple(map(ra, a.dele)))
        for a in domain.actions
    )
    return Domain(
        name=m.domain_name[1],
        requirements=domain.requirements,
        types=domain.types,
        predicates=tuple((preds.get(p, p), sig) for p, sig in domain.predicates),
        actions=actions,
    )


def _rename_problem(problem: Problem, m: ObfuscationMap) -> Problem:
    objs = m.objects or {}
    return Problem(
        name=problem.name,
        domain_name=m.domain_name[1],
        objects=tuple((objs.get(o, o), t) for o, t in problem.objects),
        init=tuple(m.rename_atom(a) for a in problem.init),
        goal=tuple(m.rename_atom(a) for a in problem.goal),
    )


def obfuscate(domain: Domain, problems: list, scheme: str, seed: int | None = None,
              rename_objects: bool = False, retry_budget: int = 1000):
    """Rename the domain name, predicates and actions; objects only when asked.

    Returns ``(domain', problems', map)``.  Validation results are unchanged by
    the renaming once names are translated back through the map.
    """
    pred_names = [p for p, _ in domain.predicates]
    action_names = [a.name for a in domain.actions]
    object_names = sorted({o for p in problems for o in p.object_names})
    if scheme == IDENTITY:
        m = ObfuscationMap(IDENTITY, seed, (domain.name, domain.name))
    elif scheme == NAMED_MYSTERY:
        if set(pred_names) != set(MYSTERY_PREDICATES) or set(action_names) != set(MYSTERY_ACTIONS):
            raise ObfuscationError("the named mystery vocabulary only applies to the four-operator blocksworld domain")
        if rename_objects:
            raise ObfuscationError("object renaming is only available with the randomized scheme")
        m = ObfuscationMap(
            NAMED_MYSTERY, seed, (domain.name, MYSTERY_DOMAIN_NAME),
            {p: MYSTERY_PREDICATES[p] for p in pred_names},
            {a: MYSTERY_ACTIONS[a] for a in action_names},
        )
    elif scheme == RANDOMIZED:
        rng = random.Random(seed)
        taken = set(pred_names) | set(action_names) | set(object_names) | {domain.name}
        taken |= {t for t, _ in domain.types} | {p for _, p in domain.types}
        budget = [retry_budget]

        def draw() -> str:
            while True:
                name = fresh_identifier(rng)
                if name not in taken:
                    taken.add(name)
                    return name
                budget[0] -= 1
                if budget[0] < 0:
                    raise ObfuscationError("could not draw a collision-free identifier")

        new_domain = draw()
        preds = {p: draw() for p in pred_names}
        acts = {a: draw() for a in action_names}
        objs = {o: draw() for o in object_names} if rename_objects else None
        m = ObfuscationMap(RANDOMIZED, seed, (domain.name, new_domain), preds, acts, objs)
    else:
        raise ObfuscationError(f"unknown scheme {scheme!r}")
    return _rename_domain(domain, m), [_rename_problem(p, m) for p in problems], m


def translate_plan(plan: Plan, m: ObfuscationMap, direction: str = FORWARD) -> Plan:
    acts = m._table("actions", direction)
    objs = m._table("objects", direction)
    if m.scheme == IDENTITY:
        return plan
    out = []
    for step in plan.steps:
        if step.name not in acts:
            raise ObfuscationError(f"action {step.name!r} is not in the map")
        out.append(Step(acts[step.name], tuple(objs.get(a, a) for a in step.args)))
    return Plan(tuple(out))


def translate_report(report, m: ObfuscationMap, direction: str = FORWARD):
    """Rename the step and atoms inside a ValidationReport."""
    acts = m._table("actions", direction)
    objs = m._table("objects", direction)
    action = report.action
    if action is not None:
        action = Step(acts.get(action.name, action.name), tuple(objs.get(a, a) for a in action.args))
    return replace(
        report,
        action=action,
        unmet=tuple(sorted((m.rename_atom(a, direction) for a in report.unmet), key=str)),
        missing_goals=tuple(sorted((m.rename_atom(a, direction) for a in report.missing_goals), key=str)),
        states=None,
    )
