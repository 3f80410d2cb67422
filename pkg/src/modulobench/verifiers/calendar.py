"""Meeting time answers: parsing, verification, feedback and an exhaustive solver."""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..instances.calendar import STEP, CalendarSpec, TimeSlot, fmt_time, parse_time
from ..resources import fill
from . import Violation

WRONG_DAY = "wrong-day"
OUTSIDE_HOURS = "outside-hours"
WRONG_DURATION = "wrong-duration"
BUSY_OVERLAP = "busy-overlap"
PREFERENCE = "preference"

_DAYS = "Monday|Tuesday|Wednesday|Thursday|Friday|Saturday|Sunday"
_SLOT = re.compile(rf"({_DAYS}),?\s*(\d{{1,2}}:\d{{2}})\s*-\s*(\d{{1,2}}:\d{{2}})")


class CalendarParseError(ValueError):
    pass


@dataclass(frozen=True)
class CalendarReport:
    slot: TimeSlot
    violations: tuple = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"slot": str(self.slot), "valid": self.valid,
                "violations": [[v.kind, v.message] for v in self.violations]}


def parse_calendar(text: str) -> TimeSlot:
    """The last ``Day, H:MM - H:MM`` occurrence in the text."""
    found = _SLOT.findall(text.replace("**", ""))
    if not found:
        raise CalendarParseError("no meeting time of the form 'Monday, 9:00 - 9:30' found")
    day, a, b = found[-1]
    return TimeSlot(day, parse_time(a), parse_time(b))


def verify_calendar(spec: CalendarSpec, slot: TimeSlot) -> CalendarReport:
    out = []
    if slot.day != spec.day:
        out.append(Violation(WRONG_DAY, f"The meeting must be on {spec.day}, not {slot.day}"))
    if slot.start < spec.work_start or slot.end > spec.work_end or slot.end <= slot.start:
        out.append(Violation(OUTSIDE_HOURS, f"The meeting must fall within the work hours of "
                                            f"{fmt_time(spec.work_start)} to {fmt_time(spec.work_end)}"))
    length = slot.end - slot.start
    if length != spec.duration_minutes:
        out.append(Violation(WRONG_DURATION, f"The meeting lasts {length} minutes, "
                                             f"expected {spec.duration_minutes}"))
    for name, busy in spec.participants:
        for s, e in busy:
            if slot.start < e and s < slot.end:
                out.append(Violation(BUSY_OVERLAP, f"{name} is busy during {fmt_time(s)} to {fmt_time(e)}"))
    for pref in spec.preferences:
        if not pref.allows(slot):
            out.append(Violation(PREFERENCE, pref.render().strip()))
    return CalendarReport(slot, tuple(out))


def calendar_feedback(report: CalendarReport) -> str:
    if report.valid:
        raise ValueError("a valid meeting time has no feedback")
    errors = "\n".join(f"{i}. {v.message}" for i, v in enumerate(report.violations, 1))
    return fill("calendar_feedback.txt", slot=str(report.slot), errors=errors)


def candidate_slots(spec: CalendarSpec) -> list:
    return [TimeSlot(spec.day, s, s + spec.duration_minutes)
            for s in range(spec.work_start, spec.work_end - spec.duration_minutes + 1, STEP)]


def solve_calendar(spec: CalendarSpec) -> TimeSlot | None:
    """Earliest half-hour aligned slot that passes verification."""
    for slot in candidate_slots(spec):
        if verify_calendar(spec, slot).valid:
            return slot
    return None
