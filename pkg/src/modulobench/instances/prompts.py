"""Prompt text for planning instances, in PDDL or natural-language style.

Natural language is available for three vocabularies: the original
blocksworld, its named mystery renaming, and a generic rendering used for
randomly renamed domains where names carry no meaning.
"""
from __future__ import annotations

from ..naming import color_of
from ..obfuscation import MYSTERY_ACTIONS, MYSTERY_PREDICATES, NAMED_MYSTERY, RANDOMIZED, ObfuscationMap
from ..pddl import Atom, Domain, Plan, Problem, Step, render_domain, render_plan, render_problem
from ..resources import read_asset

PDDL, NATURAL = "pddl", "natural"
QUESTION = "What is the plan to achieve my goal? Just give the actions in the plan."

BLOCKSWORLD_VOCAB, MYSTERY_VOCAB, GENERIC_VOCAB = "blocksworld", "mystery", "generic"


class PromptError(ValueError):
    pass


def _source(x) -> str:
    if x.source:
        return x.source if x.source.endswith("\n") else x.source + "\n"
    return (render_domain(x) if isinstance(x, Domain) else render_problem(x)) + "\n"


def render_pddl_prompt(domain: Domain, problem: Problem, example: tuple | None = None) -> str:
    """``example`` is an optional ``(problem, plan)`` pair shown before the query."""
    text = read_asset("templates/pddl_header.txt") + "[DOMAIN]\n" + _source(domain) + "\n"
    if example is not None:
        ex_problem, ex_plan = example
        text += "[EXAMPLE PROBLEM]\n" + _source(ex_problem) + "\n[EXAMPLE PLAN]\n" + render_plan(ex_plan) + "\n\n"
    return text + "[QUERY PROBLEM]\n" + _source(problem) + "\n[PLAN]\n"


def _join(items: list) -> str:
    if len(items) <= 1:
        return "".join(items)
    return ", ".join(items[:-1]) + " and " + items[-1]


def _bw_atom(a: Atom) -> str:
    c = [f"the {color_of(x)} block" for x in a.args]
    return {
        "clear": lambda: f"{c[0]} is clear",
        "handempty": lambda: "the hand is empty",
        "holding": lambda: f"I am holding {c[0]}",
        "on": lambda: f"{c[0]} is on top of {c[1]}",
        "ontable": lambda: f"{c[0]} is on the table",
    }[a.predicate]()


def _bw_step(s: Step) -> str:
    c = [f"the {color_of(x)} block" for x in s.args]
    return {
        "pick-up": lambda: f"pick up {c[0]}",
        "put-down": lambda: f"put down {c[0]}",
        "stack": lambda: f"stack {c[0]} on top of {c[1]}",
        "unstack": lambda: f"unstack {c[0]} from on top of {c[1]}",
    }[s.name]()


def _mystery_atom(a: Atom) -> str:
    o = [f"object {x}" for x in a.args]
    if a.predicate == "craves":
        return f"{o[0]} craves {o[1]}"
    return " ".join([a.predicate] + o)


def _mystery_step(s: Step) -> str:
    o = [f"object {x}" for x in s.args]
    return f"{s.name} {o[0]} from {o[1]}" if len(o) == 2 else f"{s.name} {o[0]}"


def _generic_atom(a: Atom) -> str:
    return " ".join((a.predicate,) + a.args)


def _generic_step(s: Step) -> str:
    return " ".join((s.name,) + s.args)


def _generic_list(atoms: list) -> str:
    if len(atoms) <= 1:
        return "".join(atoms)
    return ", ".join(atoms[:-1]) + ", and " + atoms[-1]


def _generic_header(domain: Domain) -> str:
    lines = ["I am playing with a set of objects. Here are the actions I can do", ""]
    for act in domain.actions:
        params = " ".join(f"object_{i}" for i in range(act.arity))
        lines.append(f"{act.name[:1].upper()}{act.name[1:]} {params}.".replace(" .", "."))
    lines += ["", "I have the following restrictions on my actions:"]
    for act in domain.actions:
        ren = {v: f"object_{i}" for i, (v, _) in enumerate(act.params)}

        def show(atoms):
            return _generic_list([" ".join((a.predicate,) + tuple(ren.get(x, x) for x in a.args)) for a in atoms])

        lines.append(f"To perform {act.name} action, the following facts need to be true: {show(act.pre)}")
        lines.append(f"Once {act.name} is performed the following facts will be true: {show(act.add)}")
        lines.append(f"Once {act.name} is performed the following facts will be false: {show(act.dele)}")
    return "\n".join(lines) + "\n\n"


_VOCABS = {
    BLOCKSWORLD_VOCAB: (_bw_atom, _bw_step),
    MYSTERY_VOCAB: (_mystery_atom, _mystery_step),
    GENERIC_VOCAB: (_generic_atom, _generic_step),
}


def vocabulary(domain: Domain, obfuscation: ObfuscationMap | None = None) -> str:
    if obfuscation is not None and obfuscation.scheme == NAMED_MYSTERY:
        return MYSTERY_VOCAB
    if obfuscation is not None and obfuscation.scheme == RANDOMIZED:
        return GENERIC_VOCAB
    names = {a.name for a in domain.actions}
    if names == set(MYSTERY_ACTIONS):
        return BLOCKSWORLD_VOCAB
    if names == set(MYSTERY_ACTIONS.values()) and {p for p, _ in domain.predicates} == set(MYSTERY_PREDICATES.values()):
        return MYSTERY_VOCAB
    raise PromptError("natural-language prompts are only defined for blocksworld and its renamings")


def _statement(problem: Problem, atom_text) -> str:
    init = [atom_text(a) for a in sorted(problem.init)]
    goal = [atom_text(a) for a in sorted(problem.goal)]
    return (f"[STATEMENT]\nAs initial conditions I have that, {_join(init)}.\n"
            f"My goal is to have that {_join(goal)}.\n\n")


def render_natural_plan(plan: Plan, vocab: str) -> str:
    _, step_text = _VOCABS[vocab]
    return "\n".join(step_text(s) for s in plan.steps)


def render_natural_prompt(domain: Domain, problem: Problem, vocab: str, example: tuple | None = None) -> str:
    atom_text, _ = _VOCABS[vocab]
    if vocab == BLOCKSWORLD_VOCAB:
        head = read_asset("templates/bw_natural_header.txt")
    elif vocab == MYSTERY_VOCAB:
        head = read_asset("templates/mystery_natural_header.txt")
    else:
        head = _generic_header(domain)
    text = head
    if example is not None:
        ex_problem, ex_plan = example
        text += (_statement(ex_problem, atom_text) + "My plan is as follows:\n\n[PLAN]\n"
                 + render_natural_plan(ex_plan, vocab) + "\n[PLAN END]\n\n")
    return text + _statement(problem, atom_text) + QUESTION + "\n"


def render_prompt(domain: Domain, problem: Problem, style: str = PDDL, shots: int = 0,
                  example: tuple | None = None, obfuscation: ObfuscationMap | None = None) -> str:
    """Prompt for an instance; ``domain`` and ``problem`` are already renamed if obfuscated.

    One-shot prompts need ``example`` as a solved ``(problem, plan)`` pair.
    """
    if shots not in (0, 1):
        raise PromptError("planning prompts support zero or one example")
    if shots == 1 and example is None:
        raise PromptError("a one-shot prompt needs an example problem and plan")
    ex = example if shots == 1 else None
    if style == PDDL:
        return render_pddl_prompt(domain, problem, ex)
    if style == NATURAL:
        return render_natural_prompt(domain, problem, vocabulary(domain, obfuscation), ex)
    raise PromptError(f"unknown prompt style {style!r}")
