import re

import pytest

from conftest import golden
from modulobench.instances.calendar import CalendarSpec, TimeSlot, parse_calendar_task
from modulobench.instances.graphs import Graph, complete_graph, cycle_graph
from modulobench.instances.trip import gen_trip, parse_trip_task, render_trip_solution, solve_trip
from modulobench.verifiers.calendar import (
    BUSY_OVERLAP, OUTSIDE_HOURS, PREFERENCE, WRONG_DAY, WRONG_DURATION, CalendarParseError, calendar_feedback,
    candidate_slots, parse_calendar, solve_calendar, verify_calendar,
)
from modulobench.verifiers.coloring import (
    Coloring, coloring_feedback, parse_coloring, render_coloring_answer, verify_coloring,
)
from modulobench.verifiers.trip import (
    CITY_COUNT, DURATION, EVENT_WINDOW, MISSING_FLIGHT, ParsedTrip, build_trip_backprompt, parse_trip,
    trip_feedback, verify_trip,
)

O1_SEGMENTS = (("Dubrovnik", 4), ("Manchester", 4), ("Stuttgart", 6), ("Berlin", 4), ("Vilnius", 5),
               ("Oslo", 5), ("Reykjavik", 3))


@pytest.fixture(scope="module")
def trip_spec():
    return parse_trip_task(golden("trip_query.txt"))


@pytest.fixture(scope="module")
def cal_spec():
    return parse_calendar_task(golden("calendar_query.txt"))


# coloring

def test_parse_coloring_last_write_wins():
    assert parse_coloring("0: red\n0: blue").assignment == {0: "blue"}
    assert parse_coloring("").assignment == {}


def test_parse_coloring_stops_at_sentinel():
    c = parse_coloring("**0**: 1\n1: 2\n[ANSWER END]\n2: 3")
    assert c.assignment == {0: "1", 1: "2"}


def test_missing_vertex_reported():
    g = Graph.of(8, [(i, i + 1) for i in range(7)])
    colors = {v: str(v % 2) for v in range(7)}
    r = verify_coloring(g, 2, Coloring(colors))
    assert r.missing_vertices == (7,) and not r.valid
    assert "Vertex 7 was not given a value" in coloring_feedback(g, r)


def test_single_color_triangle():
    r = verify_coloring(complete_graph(3), 3, Coloring({0: "a", 1: "a", 2: "a"}))
    assert len(r.monochromatic_edges) == 3
    assert coloring_feedback(complete_graph(3), r).count("share the same color") == 3


def test_five_cycle_three_coloring():
    r = verify_coloring(cycle_graph(5), 3, Coloring({0: "1", 1: "2", 2: "1", 3: "2", 4: "3"}))
    assert r.valid and r.colors_used == 3
    with pytest.raises(ValueError):
        coloring_feedback(cycle_graph(5), r)


def test_too_many_colors_is_reported():
    g = cycle_graph(4)
    r = verify_coloring(g, 2, Coloring({0: "1", 1: "2", 2: "1", 3: "3"}))
    assert not r.valid and not r.monochromatic_edges
    assert "uses 3 colors" in coloring_feedback(g, r)


def test_coloring_feedback_golden():
    text = golden("coloring_feedback.txt")
    pairs = re.findall(r"Vertex (\d+) was not given a value in the coloring\.\nVertex (\d+) was not given", text)
    g = Graph.of(20, [(int(u), int(v)) for u, v in pairs])
    r = verify_coloring(g, 5, Coloring())
    assert coloring_feedback(g, r) == text


def test_coloring_response_golden():
    prompt = golden("coloring_prompt.txt")
    edges = [(int(u), int(v)) for u, v in re.findall(r"Vertex (\d+) is connected to vertex (\d+)", prompt)]
    g = Graph.of(20, edges)
    c = parse_coloring(golden("coloring_response.txt"))
    assert len(c.assignment) == 20 and c.assignment[0] == "1"
    assert verify_coloring(g, 5, c).valid


def test_answer_rendering_round_trip():
    g = cycle_graph(5)
    text = render_coloring_answer([0, 1, 0, 1, 2])
    assert text.startswith("0: 1\n") and text.endswith("[ANSWER END]")
    assert verify_coloring(g, 3, parse_coloring(text)).valid


# trip

def test_parse_o1_response():
    assert parse_trip(golden("trip_o1_response.txt")).segments == O1_SEGMENTS


def test_trip_feedback_golden(trip_spec):
    assert (trip_spec.total_days, len(trip_spec.cities), len(trip_spec.events)) == (25, 10, 3)
    r = verify_trip(trip_spec, parse_trip(golden("trip_o1_response.txt")))
    assert [v.kind for v in r.violations] == [CITY_COUNT]
    assert trip_feedback(r) == golden("trip_feedback.txt").strip("\n")
    assert trip_feedback(r) == "Number of cities in plan is 7, expected 10"


def test_trip_backprompt_tail(trip_spec):
    response = golden("trip_o1_response.txt")
    parsed = parse_trip(response)
    text = build_trip_backprompt(golden("trip_query.txt"), response, parsed, verify_trip(trip_spec, parsed))
    assert text.endswith(golden("trip_backprompt_tail.txt"))


def test_corrected_response_has_violations(trip_spec):
    parsed = parse_trip(golden("trip_corrected_response.txt"))
    assert len(parsed.segments) == 10 and parsed.segments[-1][0] == "Florence"
    assert sum(d for _, d in parsed.segments) == 34
    kinds = {v.kind for v in verify_trip(trip_spec, parsed).violations}
    assert {DURATION, MISSING_FLIGHT} <= kinds


def test_generated_trip_solution_is_valid():
    spec = gen_trip(10, 24, 3)
    text = render_trip_solution(solve_trip(spec), spec.total_days)
    assert verify_trip(spec, parse_trip(text)).valid


def test_missing_flight_reported():
    spec = gen_trip(5, 12, 1, distractors=0)
    segs = solve_trip(spec)
    swapped = [segs[0], segs[2], segs[1]] + segs[3:]
    kinds = [v.kind for v in verify_trip(spec, ParsedTrip(tuple(swapped))).violations]
    assert MISSING_FLIGHT in kinds


def test_event_window_reported():
    from modulobench.instances.trip import TripEvent, TripSpec

    spec = TripSpec(7, (("Oslo", 4), ("Rome", 4)), (TripEvent("Oslo", 1, 2, "wedding"),), (("Oslo", "Rome", False),))
    assert verify_trip(spec, ParsedTrip((("Oslo", 4), ("Rome", 4)))).valid
    r = verify_trip(spec, ParsedTrip((("Rome", 4), ("Oslo", 4))))
    assert [v.kind for v in r.violations] == [EVENT_WINDOW]
    assert trip_feedback(r) == ("The wedding in Oslo is between day 1 and day 2, "
                                "but the plan spends days 4-7 there")


def test_parse_trip_empty():
    assert parse_trip("no plan here").segments == ()


# calendar

def test_calendar_golden_solution(cal_spec):
    assert solve_calendar(cal_spec) == TimeSlot("Monday", 900, 930)
    valid = [s for s in candidate_slots(cal_spec) if verify_calendar(cal_spec, s).valid]
    assert len(candidate_slots(cal_spec)) == 16 and valid == [TimeSlot("Monday", 900, 930)]
    assert parse_calendar(golden("calendar_response.txt")) == TimeSlot("Monday", 900, 930)


def test_calendar_busy_overlap(cal_spec):
    r = verify_calendar(cal_spec, TimeSlot("Monday", 540, 570))
    busy = [v.message.split()[0] for v in r.violations if v.kind == BUSY_OVERLAP]
    assert busy == ["Elijah", "Jeremy"]
    assert "Elijah is busy" in calendar_feedback(r)


def test_calendar_outside_hours(cal_spec):
    r = verify_calendar(cal_spec, TimeSlot("Monday", 16 * 60 + 45, 17 * 60 + 15))
    assert OUTSIDE_HOURS in {v.kind for v in r.violations}


def test_calendar_wrong_day_and_duration(cal_spec):
    r = verify_calendar(cal_spec, TimeSlot("Tuesday", 900, 960))
    kinds = {v.kind for v in r.violations}
    assert WRONG_DAY in kinds and WRONG_DURATION in kinds


def test_calendar_all_free_and_all_busy():
    free = CalendarSpec((("Ann", ()), ("Bob", ())))
    assert solve_calendar(free) == TimeSlot("Monday", 540, 570)
    busy = CalendarSpec((("Ann", ((540, 1020),)),))
    assert solve_calendar(busy) is None


def test_parse_calendar_variants():
    assert parse_calendar("**Monday, 9:30 - 10:00**") == TimeSlot("Monday", 570, 600)
    assert parse_calendar("try Monday 9:00-9:30, no: Monday, 11:00 - 11:30") == TimeSlot("Monday", 660, 690)
    with pytest.raises(CalendarParseError):
        parse_calendar("whenever")


def test_preference_violation_message():
    from modulobench.instances.calendar import NOT_BEFORE, Preference

    spec = CalendarSpec((("Ann", ()),), preferences=(Preference("Ann", NOT_BEFORE, 600, soft=True),))
    r = verify_calendar(spec, TimeSlot("Monday", 540, 570))
    assert [v.kind for v in r.violations] == [PREFERENCE]
    assert "would rather not meet" in r.violations[0].message


def test_both_endpoints_missing_gives_two_lines():
    g = Graph.of(2, [(0, 1)])
    text = coloring_feedback(g, verify_coloring(g, 1, Coloring()))
    assert text.count("was not given a value") == 2
    assert "Vertex 0 was not given" in text and "Vertex 1 was not given" in text


def test_same_color_feedback_golden():
    g = Graph.of(4, [(0, 1), (1, 2), (2, 3)])
    r = verify_coloring(g, 2, Coloring({0: "1", 1: "2", 2: "1", 3: "1"}))
    assert r.monochromatic_edges == ((2, 3),)
    text = coloring_feedback(g, r)
    assert text == golden("coloring_same_color_feedback.txt")
    assert text.count("Vertex 2 and vertex 3") == 1


def test_parse_calendar_empty_text():
    with pytest.raises(CalendarParseError):
        parse_calendar("")
