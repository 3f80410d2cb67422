"""Multi-city trip specs: generation, task text, solution text and an exact solver.

Day arithmetic follows the flight-day overlap convention: the day you fly
from A to B counts as a day in both cities, so a plan visiting cities with
stays d1..dn covers sum(d) - (n - 1) days.
"""
from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass

from ..resources import read_asset

MIN_STAY, MAX_STAY = 2, 5

CITY_POOL = (
    "Amsterdam", "Athens", "Barcelona", "Berlin", "Brussels", "Bucharest", "Budapest", "Copenhagen",
    "Dublin", "Dubrovnik", "Edinburgh", "Florence", "Frankfurt", "Geneva", "Hamburg", "Helsinki",
    "Istanbul", "Krakow", "Lisbon", "London", "Lyon", "Madrid", "Manchester", "Milan", "Munich",
    "Naples", "Nice", "Oslo", "Paris", "Porto", "Prague", "Reykjavik", "Riga", "Rome", "Santorini",
    "Seville", "Split", "Stockholm", "Stuttgart", "Tallinn", "Valencia", "Venice", "Vienna",
    "Vilnius", "Warsaw", "Zurich",
)

STAY_PHRASES = (
    "You plan to stay in {city} for {days} days.",
    "You would like to visit {city} for {days} days.",
    "You want to spend {days} days in {city}.",
)

EVENT_PHRASES = {
    "workshop": "You have to attend a workshop in {city} between day {start} and day {end}.",
    "friends": "You would like to meet your friends at {city} between day {start} and day {end} to tour together.",
    "relatives": "You plan to visit relatives in {city} between day {start} and day {end}.",
    "wedding": "You are going to attend a wedding in {city} between day {start} and day {end}.",
    "friend": "You want to meet a friend in {city} between day {start} and day {end}.",
    "conference": "During day {start} and day {end}, you have to attend a conference in {city}.",
    "show": "From day {start} to day {end}, there is a annual show you want to attend in {city}.",
}

EVENT_NOUNS = {
    "workshop": "workshop", "friends": "meeting with friends", "relatives": "visit to relatives",
    "wedding": "wedding", "friend": "meeting with a friend", "conference": "conference", "show": "annual show",
}


@dataclass(frozen=True)
class TripEvent:
    city: str
    start: int
    end: int
    kind: str = "workshop"


@dataclass(frozen=True)
class TripSpec:
    total_days: int
    cities: tuple  # (name, required_days) in mention order
    events: tuple = ()
    flights: tuple = ()  # (a, b, directed) with directed meaning a -> b only
    phrasing_seed: int = 0

    def __post_init__(self):
        names = [c for c, _ in self.cities]
        if len(set(names)) != len(names):
            raise ValueError("duplicate city in trip spec")
        covered = sum(d for _, d in self.cities) - (len(self.cities) - 1)
        if covered != self.total_days:
            raise ValueError(f"stays cover {covered} days, expected {self.total_days}")
        req = dict(self.cities)
        for ev in self.events:
            if ev.city not in req:
                raise ValueError(f"event in unknown city {ev.city}")
            if not 1 <= ev.start <= ev.end <= self.total_days:
                raise ValueError(f"event window {ev.start}-{ev.end} outside the trip")
            if ev.end - ev.start + 1 > req[ev.city]:
                raise ValueError(f"event window in {ev.city} is longer than the stay")

    @property
    def required_days(self) -> dict:
        return dict(self.cities)

    def allows(self, a: str, b: str) -> bool:
        for x, y, directed in self.flights:
            if (x, y) == (a, b) or (not directed and (y, x) == (a, b)):
                return True
        return False

    def to_dict(self) -> dict:
        return {
            "total_days": self.total_days,
            "cities": [list(c) for c in self.cities],
            "events": [[e.city, e.start, e.end, e.kind] for e in self.events],
            "flights": [[a, b, d] for a, b, d in self.flights],
            "phrasing_seed": self.phrasing_seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TripSpec":
        return cls(d["total_days"], tuple((c, int(n)) for c, n in d["cities"]),
                   tuple(TripEvent(*e) for e in d.get("events", ())),
                   tuple((a, b, bool(x)) for a, b, x in d.get("flights", ())),
                   d.get("phrasing_seed", 0))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TripSpec":
        return cls.from_dict(json.loads(text))


def intervals(segments) -> list:
    """(city, first_day, last_day) for each (city, stay) segment."""
    out = []
    day = 1
    for city, stay in segments:
        out.append((city, day, day + stay - 1))
        day += stay - 1
    return out


def _durations(n: int, total: int, rng: random.Random) -> list:
    spare = total + n - 1 - MIN_STAY * n
    if spare < 0 or spare > (MAX_STAY - MIN_STAY) * n:
        raise ValueError(f"{n} cities cannot cover {total} days with stays of {MIN_STAY}..{MAX_STAY}")
    durs = [MIN_STAY] * n
    for _ in range(spare):
        i = rng.choice([i for i in range(n) if durs[i] < MAX_STAY])
        durs[i] += 1
    return durs


def gen_trip(n_cities: int, total_days: int, seed, n_events: int | None = None,
             distractors: int | None = None) -> TripSpec:
    """A spec that a hidden visit order satisfies.

    The hidden order's consecutive pairs are always flyable; extra random
    pairs (some one-way) are mixed in, and events are pinned to the hidden
    order's day intervals.
    """
    if n_cities < 2:
        raise ValueError("need at least two cities")
    rng = random.Random(seed)
    durs = _durations(n_cities, total_days, rng)
    order = rng.sample(CITY_POOL, n_cities)
    segments = list(zip(order, durs))
    flights = {}
    for a, b in zip(order, order[1:]):
        flights[frozenset((a, b))] = (a, b, rng.random() < 0.2)
    pairs = [(a, b) for i, a in enumerate(order) for b in order[i + 1:] if frozenset((a, b)) not in flights]
    rng.shuffle(pairs)
    extra = distractors if distractors is not None else min(len(pairs), int(1.5 * n_cities))
    for a, b in pairs[:extra]:
        if rng.random() < 0.5:
            a, b = b, a
        flights[frozenset((a, b))] = (a, b, rng.random() < 0.15)
    flight_list = list(flights.values())
    rng.shuffle(flight_list)
    k = n_events if n_events is not None else rng.randint(2, min(4, n_cities))
    events = []
    for city, start, end in sorted(rng.sample(intervals(segments), min(k, n_cities)), key=lambda t: order.index(t[0])):
        events.append(TripEvent(city, start, end, rng.choice(sorted(EVENT_PHRASES))))
    mention = rng.sample(segments, n_cities)
    return TripSpec(total_days, tuple(mention), tuple(events), tuple(flight_list), rng.getrandbits(32))


def render_trip_task(spec: TripSpec) -> str:
    """Task paragraph, flight list and closing question; ends with a newline."""
    rng = random.Random(spec.phrasing_seed)
    n, t = len(spec.cities), spec.total_days
    parts = [f"You plan to visit {n} European cities for {t} days in total. "
             "You only take direct flights to commute between cities."]
    by_city = {}
    for ev in spec.events:
        by_city.setdefault(ev.city, []).append(ev)
    for city, days in spec.cities:
        parts.append(rng.choice(STAY_PHRASES).format(city=city, days=days))
        for ev in by_city.get(city, ()):
            parts.append(EVENT_PHRASES[ev.kind].format(city=city, start=ev.start, end=ev.end))
    flights = ", ".join(f"from {a} to {b}" if d else f"{a} and {b}" for a, b, d in spec.flights)
    return (" ".join(parts) + "\n\nHere are the cities that have direct flights:\n" + flights + ".\n\n"
            f"Find a trip plan of visiting the cities for {t} days by taking direct flights to commute between them.\n")


def render_trip_solution(segments, total_days: int | None = None) -> str:
    spans = intervals(segments)
    total = total_days if total_days is not None else spans[-1][2]
    lines = [f"SOLUTION: Here is the trip plan for visiting the {len(spans)} European cities for {total} days:", ""]
    for i, (city, start, end) in enumerate(spans):
        stay = end - start + 1
        if i == 0:
            lines.append(f"**Day {start}-{end}:** Arriving in {city} and visit {city} for {stay} days.")
        else:
            lines.append(f"**Day {start}-{end}:** Visit {city} for {stay} days.")
        if i + 1 < len(spans):
            lines.append(f"**Day {end}:** Fly from {city} to {spans[i + 1][0]}.")
    return "\n".join(lines)


def solve_trip(spec: TripSpec) -> list | None:
    """Depth-first search over visit orders; returns (city, stay) segments or None."""
    req = spec.required_days
    events = {}
    for ev in spec.events:
        events.setdefault(ev.city, []).append(ev)
    order: list = []

    def fits(city, start):
        end = start + req[city] - 1
        return all(start <= ev.start and ev.end <= end for ev in events.get(city, ()))

    def rec(day):
        if len(order) == len(req):
            return True
        for city in req:
            if city in order or (order and not spec.allows(order[-1], city)) or not fits(city, day):
                continue
            order.append(city)
            if rec(day + req[city] - 1):
                return True
            order.pop()
        return False

    return [(c, req[c]) for c in order] if rec(1) else None


_STAY_RES = (
    re.compile(r"You plan to stay in (\w+) for (\d+) days\."),
    re.compile(r"You would like to visit (\w+) for (\d+) days\."),
    re.compile(r"You want to spend (\d+) days in (\w+)\."),
)


def _event_res():
    out = []
    for kind, phrase in EVENT_PHRASES.items():
        pat = re.escape(phrase).replace(r"\{city\}", r"(?P<city>\w+)")
        pat = pat.replace(r"\{start\}", r"(?P<start>\d+)").replace(r"\{end\}", r"(?P<end>\d+)")
        out.append((kind, re.compile(pat)))
    return out


_EVENT_RES = _event_res()
_FLIGHT_RE = re.compile(r"from (\w+) to (\w+)|(\w+) and (\w+)")


def parse_trip_task(text: str) -> TripSpec:
    """Recover a spec from task text; hard line wraps are tolerated."""
    flat = " ".join(text.split())
    m = re.search(r"visit (\d+) European cities for (\d+) days in total", flat)
    if not m:
        raise ValueError("not a trip planning task")
    total = int(m.group(2))
    head, _, tail = flat.partition("Here are the cities that have direct flights:")
    found = []
    for i, rx in enumerate(_STAY_RES):
        for mm in rx.finditer(head):
            city, days = (mm.group(2), mm.group(1)) if i == 2 else (mm.group(1), mm.group(2))
            found.append((mm.start(), city, int(days)))
    cities = tuple((c, d) for _, c, d in sorted(found))
    events = []
    for kind, rx in _EVENT_RES:
        for mm in rx.finditer(head):
            events.append((mm.start(), TripEvent(mm["city"], int(mm["start"]), int(mm["end"]), kind)))
    flights_text = tail.split("Find a trip plan")[0].strip().rstrip(".")
    flights = []
    for item in flights_text.split(","):
        fm = _FLIGHT_RE.fullmatch(item.strip())
        if fm is None:
            raise ValueError(f"unreadable flight entry {item.strip()!r}")
        if fm.group(1):
            flights.append((fm.group(1), fm.group(2), True))
        else:
            flights.append((fm.group(3), fm.group(4), False))
    return TripSpec(total, cities, tuple(e for _, e in sorted(events, key=lambda t: t[0])), tuple(flights))


def render_trip_shots(specs) -> str:
    """Worked examples, each a task followed by its solution."""
    blocks = []
    for spec in specs:
        solution = solve_trip(spec)
        blocks.append("TASK: " + render_trip_task(spec) + render_trip_solution(solution, spec.total_days))
    return "\n\n".join(blocks) + "\n\n\n" if blocks else ""


def example_specs(count: int, n_cities: int = 10) -> list:
    """Fixed worked examples for few-shot prompts."""
    lo, hi = n_cities + 1, (MAX_STAY - 1) * n_cities + 1
    base = max(lo, min(hi, round(2.3 * n_cities)))
    return [gen_trip(n_cities, min(hi, base + i), f"trip-shot:{n_cities}:{i}") for i in range(count)]


def render_trip_prompt(spec: TripSpec, shots: int = 5) -> str:
    examples = example_specs(shots, len(spec.cities)) if shots else []
    return (read_asset("templates/trip_header.txt") + render_trip_shots(examples)
            + "Query:\n" + render_trip_task(spec))
