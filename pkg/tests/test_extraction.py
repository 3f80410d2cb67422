import pytest

from conftest import golden
from modulobench.extraction import ExtractionFailure, extract_plan
from modulobench.obfuscation import NAMED_MYSTERY, obfuscate
from modulobench.pddl import Step, parse_plan


def test_pddl_response_verbatim(bw, rand6):
    text = golden("bw_rand_6_response.txt")
    assert extract_plan(text, bw, rand6) == parse_plan(text)


def test_natural_language_response(bw, h1):
    plan = extract_plan(golden("bw_natural_response.txt"), bw, h1)
    assert plan.steps == (Step("unstack", ("b", "c")), Step("put-down", ("b",)),
                          Step("pick-up", ("c",)), Step("stack", ("c", "b")))


def test_mystery_summary(bw, h1):
    dom, [prob], _ = obfuscate(bw, [h1], NAMED_MYSTERY)
    plan = extract_plan(golden("mystery_natural_response.txt"), dom, prob)
    assert plan.steps == (Step("feast", ("b", "c")), Step("succumb", ("b",)),
                          Step("attack", ("c",)), Step("overcome", ("c", "b")))


def test_sokoban_response(sokoban):
    from modulobench.pddl import parse_problem
    from modulobench.validator import validate_plan

    prob = parse_problem(golden("sokoban_grid7.pddl"), sokoban)
    plan = extract_plan(golden("sokoban_grid7_response.txt"), sokoban, prob)
    assert plan.steps[0] == Step("move", ("f6-0f", "f5-0f", "up"))
    assert validate_plan(sokoban, prob, plan).valid


@pytest.mark.parametrize("text", [
    "1. **(pick-up a)**\n2. `(stack a b)`",
    "Step 1: (PICK-UP A)\nStep 2: (stack a b).",
    "- (pick-up a)\n- (stack a b)",
    "pick-up a\nstack a b",
])
def test_noise_is_stripped(bw, h1, text):
    plan = extract_plan(text, bw, h1)
    assert plan.steps == (Step("pick-up", ("a",)), Step("stack", ("a", "b")))


def test_unknown_names_are_dropped(bw, h1):
    plan = extract_plan("(fly a b)\n(pick-up a)", bw, h1)
    assert [s.name for s in plan.steps] == ["pick-up"]


def test_nothing_recognised(bw, h1):
    with pytest.raises(ExtractionFailure):
        extract_plan("I do not know.", bw, h1)


def test_translate_mode(bw, h1):
    seen = []

    def translator(text):
        seen.append(text)
        return "(unstack b c)\n(put-down b)"

    plan = extract_plan("take the blue thing off", bw, h1, mode="translate", translator=translator)
    assert len(plan) == 2 and seen == ["take the blue thing off"]
    with pytest.raises(ValueError):
        extract_plan("x", bw, h1, mode="translate")
    with pytest.raises(ValueError):
        extract_plan("x", bw, h1, mode="magic")
