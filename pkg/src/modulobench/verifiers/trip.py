"""Trip plan answers: the reference text parser, verification and backprompts."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..instances.trip import EVENT_NOUNS, TripSpec, intervals, render_trip_shots
from ..resources import fill, read_asset
from . import Violation

CITY_COUNT = "city-count"
UNKNOWN_CITY = "unknown-city"
REPEAT_VISIT = "repeat-visit"
DURATION = "duration"
MISSING_FLIGHT = "missing-flight"
TOTAL_DAYS = "total-days"
EVENT_WINDOW = "event-window"

_VISIT = re.compile(r"\d+-\d+")
_FLIGHT = re.compile(r".*Day (\d+).*from (\w+) to (\w+)")
_DAYS = re.compile(r"European cities for (\d+) days")


@dataclass(frozen=True)
class ParsedTrip:
    segments: tuple = ()

    def as_list(self) -> list:
        return [[c, d] for c, d in self.segments]


@dataclass(frozen=True)
class TripReport:
    violations: tuple = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"valid": self.valid, "violations": [[v.kind, v.message] for v in self.violations]}


def parse_trip(text: str) -> ParsedTrip:
    """Line-by-line reading that mirrors the shipped parser code exactly.

    Visit ranges stop the scan once one ends on the announced total; a flight
    line contributes its day and the first ``from X to Y`` word pair.  Stays
    are differences of consecutive flight days plus one, with day 1 and the
    last visit's end day as sentinels.
    """
    days, flights = [], []
    total_days = None
    for piece in text.split("\n"):
        m = _DAYS.findall(piece)
        if m:
            total_days = int(m[0])
        visit = _VISIT.findall(piece)
        if visit:
            days.append(visit[0])
            if int(visit[0].split("-")[1]) == total_days:
                break
        flight = _FLIGHT.findall(piece)
        if flight:
            flights.append(flight[0])
    cities, flight_days = [], []
    for day, origin, dest in flights:
        flight_days.append(int(day))
        if not cities:
            cities.append(origin)
        cities.append(dest)
    if not days or not flights or not cities:
        return ParsedTrip()
    bounds = [1] + flight_days + [int(days[-1].split("-")[1])]
    return ParsedTrip(tuple((c, bounds[i + 1] - bounds[i] + 1) for i, c in enumerate(cities)))


def verify_trip(spec: TripSpec, parsed: ParsedTrip) -> TripReport:
    """Check count, repeats, stays, flights, total span and event windows, in that order.

    A wrong city count is reported alone: the per-city checks that follow
    would only restate it.
    """
    segs = list(parsed.segments)
    want = len(spec.cities)
    if len(segs) != want:
        return TripReport((Violation(CITY_COUNT, f"Number of cities in plan is {len(segs)}, expected {want}"),))
    out = []
    req = spec.required_days
    seen = set()
    for city, _ in segs:
        if city not in req:
            out.append(Violation(UNKNOWN_CITY, f"{city} is not one of the cities to visit"))
        elif city in seen:
            out.append(Violation(REPEAT_VISIT, f"{city} is visited more than once"))
        seen.add(city)
    for city, stay in segs:
        if city in req and stay != req[city]:
            out.append(Violation(DURATION, f"Stay in {city} is {stay} days, expected {req[city]}"))
    for (a, _), (b, _) in zip(segs, segs[1:]):
        if not spec.allows(a, b):
            out.append(Violation(MISSING_FLIGHT, f"No direct flight from {a} to {b}"))
    spans = intervals(segs)
    covered = spans[-1][2] if spans else 0
    if covered != spec.total_days:
        out.append(Violation(TOTAL_DAYS, f"Plan covers {covered} days, expected {spec.total_days}"))
    where = {}
    for city, start, end in spans:
        where.setdefault(city, (start, end))
    for ev in spec.events:
        span = where.get(ev.city)
        if span is None or not (span[0] <= ev.start and ev.end <= span[1]):
            shown = f"days {span[0]}-{span[1]}" if span else "no days"
            out.append(Violation(EVENT_WINDOW, f"The {EVENT_NOUNS.get(ev.kind, ev.kind)} in {ev.city} is between day {ev.start} and day "
                                               f"{ev.end}, but the plan spends {shown} there"))
    return TripReport(tuple(out))


def trip_feedback(report: TripReport) -> str:
    """One violation is stated plainly; several are numbered."""
    if report.valid:
        raise ValueError("a valid trip plan has no feedback")
    msgs = [v.message for v in report.violations]
    if len(msgs) == 1:
        return msgs[0]
    return "\n".join(f"{i}. {m}" for i, m in enumerate(msgs, 1))


def parser_code() -> str:
    return read_asset("templates/trip_parser_code.txt")


def build_trip_backprompt(task: str, response: str, parsed: ParsedTrip, report: TripReport,
                          shot_specs=()) -> str:
    """``task`` is the query text as rendered in the first prompt (ending in a newline)."""
    return fill("trip_backprompt.txt", parser_code=parser_code(), shots=render_trip_shots(shot_specs),
                task=task, response=response.strip("\n"), parsed=str(parsed.as_list()),
                errors=trip_feedback(report))
