"""STRIPS subset of PDDL: parsing, grounding, execution and rendering.

Only positive conjunctive preconditions and add/delete effects are supported.
Names are case-insensitive on input and always lowercase on output.  Every
value produced here is immutable, so parsed domains and problems can be shared
freely between threads.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

ACCEPTED_REQUIREMENTS = (":strips", ":typing", ":equality")
ROOT_TYPE = "object"

_NAME_RE = re.compile(r"^[a-z][a-z0-9_\-]*$")


class PDDLSyntaxError(ValueError):
    """Malformed PDDL text.  Carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f" at line {line}, column {col}" if line else ""
        super().__init__(message + where)


class PDDLSemanticError(ValueError):
    """Well-formed text that violates a structural rule (arity, declarations...)."""


class InapplicableAction(ValueError):
    def __init__(self, action: "GroundAction", unmet: frozenset):
        self.action = action
        self.unmet = unmet
        super().__init__(f"{action} has unmet preconditions: {' '.join(map(str, sorted(unmet)))}")


class Atom(NamedTuple):
    predicate: str
    args: tuple = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate,) + tuple(self.args)) + ")"

    @property
    def is_ground(self) -> bool:
        return not any(a.startswith("?") for a in self.args)


class Step(NamedTuple):
    """One plan step as written: an action name and its object arguments."""

    name: str
    args: tuple = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.name,) + tuple(self.args)) + ")"


State = frozenset  # a closed-world set of ground Atoms


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple
    pre: frozenset
    add: frozenset
    dele: frozenset

    @property
    def step(self) -> Step:
        return Step(self.name, self.args)

    def __str__(self) -> str:
        return str(self.step)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple  # ((variable, type), ...)
    pre: tuple
    add: tuple
    dele: tuple

    @property
    def arity(self) -> int:
        return len(self.params)

    def instantiate(self, args: Sequence[str]) -> GroundAction:
        if len(args) != len(self.params):
            raise PDDLSemanticError(f"{self.name} takes {len(self.params)} arguments, got {len(args)}")
        binding = {var: obj for (var, _), obj in zip(self.params, args)}

        def sub(atoms):
            return frozenset(Atom(a.predicate, tuple(binding.get(x, x) for x in a.args)) for a in atoms)

        return GroundAction(self.name, tuple(args), sub(self.pre), sub(self.add), sub(self.dele))


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple = ()
    types: tuple = ()  # ((type, parent), ...)
    predicates: tuple = ()  # ((name, ((var, type), ...)), ...)
    actions: tuple = ()
    source: str | None = field(default=None, compare=False, repr=False)

    @cached_property
    def action_map(self) -> dict:
        return {a.name: a for a in self.actions}

    @cached_property
    def predicate_map(self) -> dict:
        return {name: params for name, params in self.predicates}

    @cached_property
    def type_parent(self) -> dict:
        return dict(self.types)

    def is_subtype(self, t: str, target: str) -> bool:
        if target == ROOT_TYPE:
            return True
        seen = set()
        while t is not None and t not in seen:
            if t == target:
                return True
            seen.add(t)
            t = self.type_parent.get(t)
        return False

    @cached_property
    def static_predicates(self) -> frozenset:
        """Predicates that no action adds or deletes."""
        touched = {a.predicate for act in self.actions for a in act.add + act.dele}
        return frozenset(p for p, _ in self.predicates if p not in touched)


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple = ()  # ((name, type), ...)
    init: tuple = ()
    goal: tuple = ()
    source: str | None = field(default=None, compare=False, repr=False)

    @property
    def initial_state(self) -> frozenset:
        return frozenset(self.init)

    @property
    def goal_set(self) -> frozenset:
        return frozenset(self.goal)

    @property
    def object_names(self) -> tuple:
        return tuple(o for o, _ in self.objects)


@dataclass(frozen=True)
class Plan:
    steps: tuple = ()

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[Step]:
        return iter(self.steps)

    @classmethod
    def of(cls, steps: Iterable) -> "Plan":
        return cls(tuple(Step(s[0], tuple(s[1])) if not isinstance(s, Step) else s for s in steps))


# ---------------------------------------------------------------- tokenizing


class _Tok(str):
    line: int
    col: int


def _tok(text: str, line: int, col: int) -> _Tok:
    t = _Tok(text)
    t.line, t.col = line, col
    return t


_TOKEN_RE = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")


def tokenize(text: str) -> list:
    out = []
    line, line_start = 1, 0
    for m in _TOKEN_RE.finditer(text):
        s = m.group()
        if s[0].isspace() or s[0] == ";":
            nl = s.count("\n")
            if nl:
                line += nl
                line_start = m.start() + s.rfind("\n") + 1
            continue
        out.append(_tok(s.lower(), line, m.start() - line_start + 1))
    return out


def parse_sexpr(text: str):
    """Parse one top-level s-expression.

    Stray closing parentheses after the form are ignored, because hand-edited
    problem files in circulation sometimes end with an extra ``)``.
    """
    tokens = tokenize(text)
    if not tokens:
        raise PDDLSyntaxError("empty input", 1, 1)
    stack: list = []
    result = None
    i = 0
    for i, t in enumerate(tokens):
        if t == "(":
            stack.append(_List(t))
        elif t == ")":
            if not stack:
                raise PDDLSyntaxError("unbalanced ')'", t.line, t.col)
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            else:
                result = done
                break
        else:
            if not stack:
                raise PDDLSyntaxError(f"unexpected token {t!r} outside a form", t.line, t.col)
            stack[-1].append(t)
    if result is None:
        last = tokens[-1]
        raise PDDLSyntaxError("unexpected end of input, missing ')'", last.line, last.col)
    for t in tokens[i + 1:]:
        if t != ")":
            raise PDDLSyntaxError(f"unexpected token {t!r} after the top-level form", t.line, t.col)
    return result


class _List(list):
    def __init__(self, open_tok: _Tok):
        super().__init__()
        self.line, self.col = open_tok.line, open_tok.col


def _where(node) -> tuple:
    return getattr(node, "line", 0), getattr(node, "col", 0)


def _fail(msg: str, node) -> PDDLSyntaxError:
    return PDDLSyntaxError(msg, *_where(node))


def _expect_list(node, what: str) -> list:
    if not isinstance(node, list):
        raise _fail(f"expected {what}, found {node!r}", node)
    return node


def _expect_name(node, what: str) -> str:
    if isinstance(node, list) or not _NAME_RE.match(node):
        raise _fail(f"expected {what}, found {node!r}", node)
    return str(node)


def _typed_list(items: Sequence, variables: bool) -> list:
    """Parse ``a b - t c`` style lists into [(name, type), ...]."""
    out: list = []
    pending: list = []
    it = iter(range(len(items)))
    for i in it:
        x = items[i]
        if isinstance(x, list):
            raise _fail("unexpected list inside a typed list", x)
        if x == "-":
            if i + 1 >= len(items) or isinstance(items[i + 1], list):
                raise _fail("'-' must be followed by a type name", x)
            t = _expect_name(items[i + 1], "type name")
            next(it)
            if not pending:
                raise _fail("type annotation without names", x)
            out.extend((p, t) for p in pending)
            pending = []
            continue
        if variables:
            if not x.startswith("?") or not _NAME_RE.match(x[1:]):
                raise _fail(f"expected a variable, found {x!r}", x)
        else:
            _expect_name(x, "name")
        pending.append(str(x))
    out.extend((p, ROOT_TYPE) for p in pending)
    return out


def _atom(node, allow_vars: bool) -> Atom:
    node = _expect_list(node, "an atom")
    if not node:
        raise _fail("empty atom", node)
    head = node[0]
    if head == "=":
        raise _fail("equality atoms are not supported", node)
    pred = _expect_name(head, "predicate name")
    args = []
    for a in node[1:]:
        if isinstance(a, list):
            raise _fail("nested list inside an atom", a)
        if a.startswith("?"):
            if not allow_vars:
                raise _fail(f"variable {a} in a ground atom", a)
        else:
            _expect_name(a, "object name")
        args.append(str(a))
    return Atom(pred, tuple(args))


def _conjunction(node, allow_vars: bool) -> list:
    node = _expect_list(node, "a condition")
    if not node:
        return []
    if node[0] == "and":
        out = []
        for sub in node[1:]:
            out.extend(_conjunction(sub, allow_vars))
        return out
    if node[0] in ("not", "or", "imply", "forall", "exists", "when"):
        raise _fail(f"'{node[0]}' is not allowed in a STRIPS condition", node)
    return [_atom(node, allow_vars)]


def _effects(node) -> tuple:
    node = _expect_list(node, "an effect")
    add: list = []
    dele: list = []
    if not node:
        return add, dele
    if node[0] == "and":
        for sub in node[1:]:
            a, d = _effects(sub)
            add += a
            dele += d
    elif node[0] == "not":
        if len(node) != 2:
            raise _fail("'not' takes exactly one atom", node)
        dele.append(_atom(node[1], True))
    elif node[0] in ("when", "forall", "increase", "decrease", "or"):
        raise _fail(f"'{node[0]}' is not allowed in a STRIPS effect", node)
    else:
        add.append(_atom(node, True))
    return add, dele


def _dedup(atoms: Iterable) -> tuple:
    return tuple(dict.fromkeys(atoms))


def _header(form, keyword: str) -> str:
    form = _expect_list(form, "a (define ...) form")
    if len(form) < 2 or form[0] != "define":
        raise _fail("expected (define ...)", form)
    head = _expect_list(form[1], f"({keyword} name)")
    if len(head) != 2 or head[0] != keyword:
        raise _fail(f"expected ({keyword} name)", head)
    return _expect_name(head[1], f"{keyword} name")


# ---------------------------------------------------------------- parsing


def parse_domain(text: str) -> Domain:
    form = parse_sexpr(text)
    name = _header(form, "domain")
    requirements: list = []
    types: list = []
    predicates: dict = {}
    actions: list = []
    for sec in form[2:]:
        sec = _expect_list(sec, "a domain section")
        if not sec:
            raise _fail("empty domain section", sec)
        key = sec[0]
        if key == ":requirements":
            for r in sec[1:]:
                if r not in ACCEPTED_REQUIREMENTS:
                    raise _fail(f"unsupported requirement {r}", r)
                requirements.append(str(r))
        elif key == ":types":
            types.extend(_typed_list(sec[1:], variables=False))
        elif key == ":predicates":
            for p in sec[1:]:
                p = _expect_list(p, "a predicate declaration")
                if not p:
                    raise _fail("empty predicate declaration", p)
                pname = _expect_name(p[0], "predicate name")
                if pname in predicates:
                    raise _fail(f"duplicate predicate {pname}", p)
                predicates[pname] = tuple(_typed_list(p[1:], variables=True))
        elif key == ":action":
            actions.append(_parse_action(sec))
        else:
            raise _fail(f"unsupported domain section {key}", sec)

    declared_types = {ROOT_TYPE} | {t for t, _ in types} | {p for _, p in types}
    seen = set()
    for act in actions:
        if act.name in seen:
            raise PDDLSemanticError(f"duplicate action name {act.name}")
        seen.add(act.name)
        params = {v for v, _ in act.params}
        for v, t in act.params:
            if t not in declared_types:
                raise PDDLSemanticError(f"action {act.name}: unknown type {t}")
        for a in act.pre + act.add + act.dele:
            if a.predicate not in predicates:
                raise PDDLSemanticError(f"action {act.name} uses undeclared predicate {a.predicate}")
            if len(a.args) != len(predicates[a.predicate]):
                raise PDDLSemanticError(f"action {act.name}: wrong arity in {a}")
            for x in a.args:
                if x.startswith("?") and x not in params:
                    raise PDDLSemanticError(f"action {act.name}: free variable {x} in {a}")
                if not x.startswith("?"):
                    raise PDDLSemanticError(f"action {act.name}: constant {x} in {a} (constants are not supported)")
    return Domain(
        name=name,
        requirements=tuple(requirements),
        types=tuple((t, p) for t, p in types),
        predicates=tuple(predicates.items()),
        actions=tuple(actions),
        source=text,
    )


def _parse_action(sec: list) -> ActionSchema:
    if len(sec) < 2:
        raise _fail("action without a name", sec)
    name = _expect_name(sec[1], "action name")
    params: list = []
    pre: list = []
    add: list = []
    dele: list = []
    rest = sec[2:]
    if len(rest) % 2:
        raise _fail(f"action {name}: keyword without a value", sec)
    for key, val in zip(rest[0::2], rest[1::2]):
        if key == ":parameters":
            params = _typed_list(_expect_list(val, "a parameter list"), variables=True)
        elif key == ":precondition":
            pre = _conjunction(val, allow_vars=True)
        elif key == ":effect":
            add, dele = _effects(val)
        else:
            raise _fail(f"action {name}: unsupported keyword {key}", key)
    names = [v for v, _ in params]
    if len(set(names)) != len(names):
        raise _fail(f"action {name}: repeated parameter", sec)
    return ActionSchema(name, tuple(params), _dedup(pre), _dedup(add), _dedup(dele))


def parse_problem(text: str, domain: Domain) -> Problem:
    form = parse_sexpr(text)
    name = _header(form, "problem")
    domain_name = None
    objects: list = []
    init: list = []
    goal: list = []
    for sec in form[2:]:
        sec = _expect_list(sec, "a problem section")
        if not sec:
            raise _fail("empty problem section", sec)
        key = sec[0]
        if key == ":domain":
            if len(sec) != 2:
                raise _fail("(:domain name) expected", sec)
            domain_name = _expect_name(sec[1], "domain name")
        elif key == ":objects":
            objects.extend(_typed_list(sec[1:], variables=False))
        elif key == ":init":
            init.extend(_atom(a, allow_vars=False) for a in sec[1:])
        elif key == ":goal":
            if len(sec) != 2:
                raise _fail("(:goal condition) expected", sec)
            goal = _conjunction(sec[1], allow_vars=False)
        else:
            raise _fail(f"unsupported problem section {key}", sec)
    if domain_name is None:
        raise PDDLSemanticError(f"problem {name} does not name its domain")
    if domain_name != domain.name:
        raise PDDLSemanticError(f"problem {name} is for domain {domain_name}, not {domain.name}")
    names = [o for o, _ in objects]
    if len(set(names)) != len(names):
        raise PDDLSemanticError(f"problem {name}: duplicate object")
    declared = set(names)
    for a in init + goal:
        sig = domain.predicate_map.get(a.predicate)
        if sig is None:
            raise PDDLSemanticError(f"problem {name}: undeclared predicate in {a}")
        if len(sig) != len(a.args):
            raise PDDLSemanticError(f"problem {name}: wrong arity in {a}")
        for x in a.args:
            if x not in declared:
                raise PDDLSemanticError(f"problem {name}: undeclared object {x} in {a}")
    return Problem(name, domain_name, tuple(objects), _dedup(init), _dedup(goal), source=text)


def parse_plan(text: str) -> Plan:
    """Strict plan syntax: one ``(action obj ...)`` per line, blank lines and ``;`` comments allowed."""
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        if not (line.startswith("(") and line.endswith(")")):
            raise PDDLSyntaxError(f"expected (action args...), found {line!r}", lineno, 1)
        parts = line[1:-1].lower().split()
        if not parts:
            raise PDDLSyntaxError("empty step", lineno, 1)
        steps.append(Step(parts[0], tuple(parts[1:])))
    return Plan(tuple(steps))


# ---------------------------------------------------------------- semantics


def object_types(domain: Domain, problem: Problem) -> dict:
    """Map each type name to the objects compatible with it."""
    out: dict = {}
    all_types = {ROOT_TYPE} | {t for t, _ in domain.types} | {p for _, p in domain.types}
    for t in all_types:
        out[t] = tuple(o for o, ot in problem.objects if domain.is_subtype(ot, t))
    return out


def ground_actions(domain: Domain, problem: Problem, prune_static: bool = False) -> list:
    """Every type-consistent instantiation of every schema, in schema then argument order.

    With ``prune_static`` set, substitutions whose static preconditions (atoms of
    predicates no action changes) are false in the initial state are skipped as
    soon as the offending parameters are bound.
    """
    by_type = object_types(domain, problem)
    init = problem.initial_state
    statics = domain.static_predicates
    out = []
    for act in domain.actions:
        domains = [by_type.get(t, ()) for _, t in act.params]
        if not prune_static:
            for combo in itertools.product(*domains):
                out.append(act.instantiate(combo))
            continue
        # bind variables that occur in static atoms first, smallest domain first,
        # and check each static atom as soon as all its variables are bound
        static_vars = {x for a in act.pre if a.predicate in statics for x in a.args}
        order = sorted(range(len(act.params)),
                       key=lambda i: (act.params[i][0] not in static_vars, len(domains[i]), i))
        position = {act.params[i][0]: k for k, i in enumerate(order)}
        checks: list = [[] for _ in order]
        ground_statics = []
        for a in act.pre:
            if a.predicate not in statics:
                continue
            if a.args:
                checks[max(position[x] for x in a.args)].append(a)
            else:
                ground_statics.append(a)
        if any(a not in init for a in ground_statics):
            continue
        binding: dict = {}

        def rec(k):
            if k == len(order):
                out.append(act.instantiate([binding[v] for v, _ in act.params]))
                return
            i = order[k]
            var = act.params[i][0]
            for obj in domains[i]:
                binding[var] = obj
                if all(Atom(a.predicate, tuple(binding[x] for x in a.args)) in init for a in checks[k]):
                    rec(k + 1)
            binding.pop(var, None)

        rec(0)
    return out


def applicable(state: frozenset, action: GroundAction) -> bool:
    return action.pre <= state


def apply(state: frozenset, action: GroundAction) -> frozenset:
    unmet = action.pre - state
    if unmet:
        raise InapplicableAction(action, frozenset(unmet))
    return (state - action.dele) | action.add


def satisfies(state: frozenset, goal: Iterable) -> bool:
    return frozenset(goal) <= state


# ---------------------------------------------------------------- rendering


def _typed(items: Sequence, sep: str = " ") -> str:
    if all(t == ROOT_TYPE for _, t in items):
        return sep.join(n for n, _ in items)
    parts = []
    for t, group in itertools.groupby(items, key=lambda x: x[1]):
        names = [n for n, _ in group]
        parts.append(" ".join(names) + ("" if t == ROOT_TYPE else f" - {t}"))
    return sep.join(parts)


def _conj(atoms: Sequence) -> str:
    if len(atoms) == 1:
        return str(atoms[0])
    return "(and " + " ".join(map(str, atoms)) + ")"


def render_domain(d: Domain) -> str:
    lines = [f"(define (domain {d.name})"]
    if d.requirements:
        lines.append(f"  (:requirements {' '.join(d.requirements)})")
    if d.types:
        lines.append(f"  (:types {_typed(d.types)})")
    preds = " ".join("(" + " ".join([p] + ([_typed(sig)] if sig else [])) + ")" for p, sig in d.predicates)
    lines.append(f"  (:predicates {preds})")
    for a in d.actions:
        eff = [str(x) for x in a.add] + [f"(not {x})" for x in a.dele]
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({_typed(a.params)})")
        lines.append(f"    :precondition {_conj(a.pre) if a.pre else '()'}")
        lines.append(f"    :effect {eff[0] if len(eff) == 1 else '(and ' + ' '.join(eff) + ')'})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def render_problem(p: Problem) -> str:
    lines = [
        f"(define (problem {p.name})",
        f"  (:domain {p.domain_name})",
        f"  (:objects {_typed(p.objects)})",
        "  (:init",
    ]
    lines += [f"    {a}" for a in p.init]
    lines.append("  )")
    lines.append(f"  (:goal {_conj(p.goal) if p.goal else '(and)'})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def render_plan(plan: Plan) -> str:
    return "\n".join(str(s) for s in plan.steps)


def render(x) -> str:
    if isinstance(x, Domain):
        return render_domain(x)
    if isinstance(x, Problem):
        return render_problem(x)
    if isinstance(x, Plan):
        return render_plan(x)
    raise TypeError(f"cannot render {type(x).__name__}")
