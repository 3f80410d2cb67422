"""Single-day meeting scheduling specs: generation, task text and parsing.

Times are minutes after midnight.  Busy intervals are half-open, so a
meeting may start exactly when a busy block ends.
"""
from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass

from ..resources import read_asset

DAY = "Monday"
WORK_START, WORK_END = 9 * 60, 17 * 60
STEP = 30
NOT_BEFORE, NOT_AFTER = "not-before", "not-after"

NAME_POOL = (
    "Aaron", "Amber", "Barbara", "Carolyn", "Cynthia", "Doris", "Elijah", "Elizabeth", "Eugene", "Frank",
    "George", "Jeremy", "Justin", "Kathleen", "Linda", "Lisa", "Mason", "Nancy", "Olivia", "Patricia",
    "Patrick", "Roger", "Ronald", "Roy", "Stephen", "Steven", "Thomas", "Timothy", "William", "Wayne",
)


def fmt_time(minute: int) -> str:
    return f"{minute // 60}:{minute % 60:02d}"


def parse_time(text: str) -> int:
    h, m = text.split(":")
    return int(h) * 60 + int(m)


@dataclass(frozen=True)
class TimeSlot:
    day: str
    start: int
    end: int

    def __str__(self) -> str:
        return f"{self.day}, {fmt_time(self.start)} - {fmt_time(self.end)}"


@dataclass(frozen=True)
class Preference:
    participant: str
    kind: str  # NOT_BEFORE: start >= time; NOT_AFTER: end <= time
    time: int
    soft: bool = False  # only changes the wording; both are enforced

    def allows(self, slot: TimeSlot) -> bool:
        return slot.start >= self.time if self.kind == NOT_BEFORE else slot.end <= self.time

    def render(self) -> str:
        verb = "would rather not meet" if self.soft else "can not meet"
        word = "before" if self.kind == NOT_BEFORE else "after"
        return f"{self.participant} {verb} on {DAY} {word} {fmt_time(self.time)}. "


@dataclass(frozen=True)
class CalendarSpec:
    participants: tuple  # (name, ((start, end), ...))
    duration_minutes: int = 30
    preferences: tuple = ()
    work_start: int = WORK_START
    work_end: int = WORK_END
    day: str = DAY

    def __post_init__(self):
        for name, busy in self.participants:
            for s, e in busy:
                if not self.work_start <= s < e <= self.work_end:
                    raise ValueError(f"busy interval {fmt_time(s)}-{fmt_time(e)} of {name} outside work hours")

    @property
    def names(self) -> list:
        return [n for n, _ in self.participants]

    def to_dict(self) -> dict:
        return {
            "day": self.day,
            "work_hours": [self.work_start, self.work_end],
            "duration_minutes": self.duration_minutes,
            "participants": [[n, [list(b) for b in busy]] for n, busy in self.participants],
            "preferences": [[p.participant, p.kind, p.time, p.soft] for p in self.preferences],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalendarSpec":
        ws, we = d.get("work_hours", (WORK_START, WORK_END))
        return cls(tuple((n, tuple(tuple(b) for b in busy)) for n, busy in d["participants"]),
                   d.get("duration_minutes", 30), tuple(Preference(*p) for p in d.get("preferences", ())),
                   ws, we, d.get("day", DAY))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CalendarSpec":
        return cls.from_dict(json.loads(text))


def _merge(cells: list) -> tuple:
    out = []
    for s in sorted(cells):
        if out and out[-1][1] == s:
            out[-1][1] = s + STEP
        else:
            out.append([s, s + STEP])
    return tuple(tuple(x) for x in out)


def gen_calendar(n_participants: int, duration_minutes: int = 30, seed=0, preference_rate: float = 0.4) -> CalendarSpec:
    """Random busy calendars that all leave one hidden slot open."""
    if duration_minutes <= 0 or duration_minutes % STEP:
        raise ValueError(f"duration must be a positive multiple of {STEP} minutes")
    if duration_minutes > WORK_END - WORK_START:
        raise ValueError("meeting longer than the work day")
    if not 1 <= n_participants <= len(NAME_POOL):
        raise ValueError(f"need 1..{len(NAME_POOL)} participants")
    rng = random.Random(seed)
    starts = list(range(WORK_START, WORK_END - duration_minutes + 1, STEP))
    hidden = rng.choice(starts)
    reserved = set(range(hidden, hidden + duration_minutes, STEP))
    cells = [c for c in range(WORK_START, WORK_END, STEP) if c not in reserved]
    names = rng.sample(NAME_POOL, n_participants)
    participants = []
    for name in names:
        density = 0.0 if rng.random() < 0.15 else rng.uniform(0.2, 0.7)
        participants.append((name, _merge([c for c in cells if rng.random() < density])))
    prefs = []
    if rng.random() < preference_rate:
        who = rng.choice(names)
        soft = rng.random() < 0.5
        after = [t for t in range(hidden + duration_minutes, WORK_END, STEP)]
        before = [t for t in range(WORK_START + STEP, hidden + 1, STEP)]
        if after and (not before or rng.random() < 0.5):
            prefs.append(Preference(who, NOT_AFTER, rng.choice(after), soft))
        elif before:
            prefs.append(Preference(who, NOT_BEFORE, rng.choice(before), soft))
    return CalendarSpec(tuple(participants), duration_minutes, tuple(prefs))


def duration_phrase(minutes: int) -> str:
    if minutes == 30:
        return "half an hour"
    if minutes == 60:
        return "one hour"
    if minutes % 60 == 0:
        return f"{minutes // 60} hours"
    return f"{minutes} minutes"


def _join_names(names: list) -> str:
    return names[0] if len(names) == 1 else ", ".join(names[:-1]) + " and " + names[-1]


def render_calendar_task(spec: CalendarSpec) -> str:
    """``TASK:`` paragraph through the closing request, ending in a newline."""
    lines = [f"TASK: You need to schedule a meeting for {_join_names(spec.names)} for "
             f"{duration_phrase(spec.duration_minutes)} between the work hours of {fmt_time(spec.work_start)} "
             f"to {fmt_time(spec.work_end)} on {spec.day}. ", "",
             "Here are the existing schedules for everyone during the day: "]
    for name, busy in spec.participants:
        if busy:
            spans = ", ".join(f"{fmt_time(s)} to {fmt_time(e)}" for s, e in busy)
            lines.append(f"{name} is busy on {spec.day} during {spans}; ")
        else:
            lines.append(f"{name} is free the entire day.")
    lines.append("")
    prefs = "".join(p.render() for p in spec.preferences)
    lines.append(prefs + "Find a time that works for everyone's schedule and constraints. ")
    return "\n".join(lines) + "\n"


def render_calendar_solution(slot: TimeSlot) -> str:
    return f"SOLUTION: Here is the proposed time: {slot} "


_FREE = re.compile(r"^(\w+?)(?:\s*has no meetings the whole day|'s calendar is wide open the entire day"
                   r"| is free the entire day)")
_BUSY = re.compile(r"^(\w+) (?:is busy|has meetings|has blocked their calendar) on (\w+) during (.*)$")
_PREF = re.compile(r"(\w+) (can not|would rather not) meet on (\w+) (before|after) (\d{1,2}:\d{2})")
_SPAN = re.compile(r"(\d{1,2}:\d{2}) to (\d{1,2}:\d{2})")
_HEAD = re.compile(r"schedule a meeting for (.+?) for (.+?) between the work hours of "
                   r"(\d{1,2}:\d{2}) to (\d{1,2}:\d{2}) on (\w+)")


def _duration_minutes(phrase: str) -> int:
    table = {"half an hour": 30, "one hour": 60, "an hour": 60}
    if phrase in table:
        return table[phrase]
    m = re.fullmatch(r"(\d+) (minutes|hours)", phrase)
    if not m:
        raise ValueError(f"unknown meeting duration {phrase!r}")
    return int(m.group(1)) * (60 if m.group(2) == "hours" else 1)


def parse_calendar_task(text: str) -> CalendarSpec:
    """Recover a spec from the task text; accepts the usual schedule phrasings."""
    head = _HEAD.search(" ".join(text.split()))
    if head is None:
        raise ValueError("not a calendar scheduling task")
    names = [n.strip() for n in re.split(r",|\band\b", head.group(1)) if n.strip()]
    busy = {n: () for n in names}
    prefs = []
    for raw in text.splitlines():
        line = raw.strip()
        m = _BUSY.match(line)
        if m and m.group(1) in busy:
            busy[m.group(1)] = tuple((parse_time(a), parse_time(b)) for a, b in _SPAN.findall(m.group(3)))
            continue
        for p in _PREF.finditer(line):
            kind = NOT_BEFORE if p.group(4) == "before" else NOT_AFTER
            prefs.append(Preference(p.group(1), kind, parse_time(p.group(5)), p.group(2) == "would rather not"))
    return CalendarSpec(tuple((n, busy[n]) for n in names), _duration_minutes(head.group(2)), tuple(prefs),
                        parse_time(head.group(3)), parse_time(head.group(4)), head.group(5))


def example_specs(count: int, n_participants: int = 5) -> list:
    return [gen_calendar(n_participants, 30, f"calendar-shot:{n_participants}:{i}") for i in range(count)]


def render_calendar_prompt(spec: CalendarSpec, shots: int = 5) -> str:
    from ..verifiers.calendar import solve_calendar

    blocks = []
    for ex in example_specs(shots, len(spec.participants)) if shots else []:
        blocks.append(render_calendar_task(ex) + render_calendar_solution(solve_calendar(ex)) + "\n")
    body = "\n".join(blocks)
    return (read_asset("templates/calendar_header.txt") + body + ("\n" if blocks else "")
            + "Query:\n" + render_calendar_task(spec) + "SOLUTION: ")
