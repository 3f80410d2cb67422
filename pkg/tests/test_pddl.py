from dataclasses import replace

import pytest

from conftest import golden
from modulobench.domains import domain_text
from modulobench.pddl import (
    Atom, InapplicableAction, PDDLSemanticError, PDDLSyntaxError, Plan, Step, applicable, apply,
    ground_actions, parse_domain, parse_plan, parse_problem, render, render_domain, render_plan,
    render_problem, satisfies,
)


def test_blocksworld_domain_shape(bw):
    assert bw.name == "blocksworld-4ops"
    assert len(bw.predicates) == 5
    assert sorted(a.name for a in bw.actions) == ["pick-up", "put-down", "stack", "unstack"]


def test_randomized_domain_parses():
    d = parse_domain(golden("xaji0y_domain.pddl"))
    assert d.name == "xaji0y"
    assert len(d.predicates) == 5
    assert sum(1 for _, params in d.predicates if not params) == 1
    assert len(d.actions) == 4


def test_minimal_domain_has_no_actions():
    d = parse_domain("(define (domain d) (:predicates (p ?x)) )")
    assert d.actions == ()
    assert d.predicates == (("p", (("?x", "object"),)),)


def test_parser_ignores_comments_and_case():
    text = domain_text("blocksworld").upper().replace("(:ACTION PICK-UP", "; a comment\n(:ACTION PICK-UP")
    d = parse_domain(text)
    assert d.name == "blocksworld-4ops"
    assert "pick-up" in d.action_map


@pytest.mark.parametrize("text, err", [
    ("(define (domain d) (:requirements :adl) (:predicates (p ?x)))", PDDLSyntaxError),
    ("(define (domain d) (:predicates (p ?x)) (:action a :parameters (?x) :precondition (q ?x) :effect (p ?x)))",
     PDDLSemanticError),
    ("(define (domain d) (:predicates (p ?x)) (:action a :parameters (?x) :precondition (p ?x) :effect (p ?x))"
     " (:action a :parameters (?x) :precondition (p ?x) :effect (p ?x)))", PDDLSemanticError),
    ("(define (domain d) (:predicates (p ?x))", PDDLSyntaxError),
])
def test_domain_errors(text, err):
    with pytest.raises(err):
        parse_domain(text)


def test_syntax_error_carries_position():
    with pytest.raises(PDDLSyntaxError) as info:
        parse_domain("(define (domain d)\n  (:predicates (p ?x))")
    assert info.value.line >= 1


def test_rand6_problem_counts(rand6):
    assert len(rand6.objects) == 6
    assert len(rand6.init) == 8
    assert len(rand6.goal) == 5


def test_rand4_goal_is_cyclic(rand4):
    assert rand4.goal_set == {Atom("on", ("d", "c")), Atom("on", ("c", "d"))}


def test_goal_taken_from_init_is_satisfied(bw):
    p = parse_problem("(define (problem p) (:domain blocksworld-4ops) (:objects a) "
                      "(:init (handempty) (ontable a) (clear a)) (:goal (ontable a)))", bw)
    assert satisfies(p.initial_state, p.goal)


@pytest.mark.parametrize("text", [
    "(define (problem p) (:domain other) (:objects a) (:init (handempty)) (:goal (clear a)))",
    "(define (problem p) (:domain blocksworld-4ops) (:objects a) (:init (clear ?x)) (:goal (clear a)))",
    "(define (problem p) (:domain blocksworld-4ops) (:objects a) (:init (clear a a)) (:goal (clear a)))",
    "(define (problem p) (:domain blocksworld-4ops) (:objects a) (:init (clear b)) (:goal (clear a)))",
])
def test_problem_errors(bw, text):
    with pytest.raises((PDDLSyntaxError, PDDLSemanticError)):
        parse_problem(text, bw)


def test_grounding_three_blocks(bw, h1):
    p = parse_problem("(define (problem p) (:domain blocksworld-4ops) (:objects a b c) "
                      "(:init (handempty)) (:goal (clear a)))", bw)
    acts = ground_actions(bw, p)
    counts = {}
    for a in acts:
        counts[a.name] = counts.get(a.name, 0) + 1
    assert counts == {"pick-up": 3, "put-down": 3, "stack": 9, "unstack": 9}
    assert len(set((a.name, a.args) for a in acts)) == 24


def test_grounding_empty_domain():
    d = parse_domain("(define (domain d) (:predicates (p ?x)) )")
    p = parse_problem("(define (problem q) (:domain d) (:objects a) (:init (p a)) (:goal (p a)))", d)
    assert ground_actions(d, p) == []


def test_sokoban_move_candidates(sokoban):
    p = parse_problem(golden("sokoban_grid7.pddl"), sokoban)
    only_move = replace(sokoban, actions=(sokoban.action_map["move"],))
    moves = ground_actions(only_move, p)
    assert len(moves) == 49 * 49 * 4
    assert len(ground_actions(only_move, p, prune_static=True)) < len(moves)


def test_applicable_on_four_block_instance(bw, h1):
    s = h1.initial_state
    assert applicable(s, bw.action_map["unstack"].instantiate(("b", "c")))
    assert not applicable(s, bw.action_map["pick-up"].instantiate(("c",)))
    assert not applicable(frozenset(), bw.action_map["pick-up"].instantiate(("a",)))


def test_apply_unstack(bw, h1):
    s = h1.initial_state
    nxt = apply(s, bw.action_map["unstack"].instantiate(("b", "c")))
    assert Atom("holding", ("b",)) in nxt
    assert Atom("clear", ("c",)) in nxt
    for gone in (Atom("handempty"), Atom("on", ("b", "c")), Atom("clear", ("b",))):
        assert gone not in nxt
    assert Atom("on", ("b", "c")) in s  # input untouched


def test_pick_up_then_put_down_restores_state(bw, h1):
    s = h1.initial_state
    held = apply(s, bw.action_map["pick-up"].instantiate(("a",)))
    assert apply(held, bw.action_map["put-down"].instantiate(("a",))) == s


def test_apply_without_effects_is_identity():
    d = parse_domain("(define (domain d) (:predicates (p ?x)) "
                     "(:action noop :parameters (?x) :precondition (p ?x) :effect (and)))")
    s = frozenset({Atom("p", ("a",))})
    assert apply(s, d.action_map["noop"].instantiate(("a",))) == s


def test_apply_inapplicable_names_unmet(bw, h1):
    with pytest.raises(InapplicableAction) as info:
        apply(h1.initial_state, bw.action_map["pick-up"].instantiate(("c",)))
    assert Atom("clear", ("c",)) in info.value.unmet


def test_walkthrough_reaches_goal(bw, h1):
    s = h1.initial_state
    for name, args in [("unstack", ("b", "c")), ("put-down", ("b",)), ("pick-up", ("c",)), ("stack", ("c", "b"))]:
        s = apply(s, bw.action_map[name].instantiate(args))
    assert satisfies(s, {Atom("on", ("c", "b"))})
    assert satisfies(s, set())
    assert not satisfies(s, {Atom("on", ("a", "d"))})


def test_domain_round_trip(bw):
    again = parse_domain(render_domain(bw))
    assert again == bw
    assert parse_domain(render(again)) == again


@pytest.mark.parametrize("name", ["bw_rand_6.pddl", "bw_rand_4.pddl"])
def test_problem_round_trip(bw, name):
    p = parse_problem(golden(name), bw)
    assert parse_problem(render_problem(p), bw) == p


def test_typed_round_trips(sokoban, logistics):
    sp = parse_problem(golden("sokoban_grid7.pddl"), sokoban)
    assert parse_problem(render_problem(sp), sokoban) == sp
    lp = parse_problem(golden("logistics_c2_s1_p1_a2.pddl"), logistics)
    assert parse_problem(render_problem(lp), logistics) == lp
    xd = parse_domain(golden("xaji0y_domain.pddl"))
    assert parse_domain(render_domain(xd)) == xd
    xp = parse_problem(golden("xaji0y_problem.pddl"), xd)
    assert parse_problem(render_problem(xp), xd) == xp


def test_render_plan():
    plan = Plan.of([("unstack", ("d", "b")), ("put-down", ("d",))])
    assert render_plan(plan) == "(unstack d b)\n(put-down d)"
    assert render_plan(Plan()) == ""
    assert parse_plan(render_plan(plan)) == plan


def test_parse_plan_skips_comments():
    plan = parse_plan("; cost = 2\n(PICK-UP a)\n(stack a b)\n")
    assert plan.steps == (Step("pick-up", ("a",)), Step("stack", ("a", "b")))
