"""The three non-planning checkers: graph coloring, trip itineraries and meeting times."""
from modulobench.instances.calendar import gen_calendar, render_calendar_task
from modulobench.instances.graphs import chromatic_number, gen_graph, optimal_coloring
from modulobench.instances.trip import gen_trip, render_trip_solution, render_trip_task, solve_trip
from modulobench.verifiers.calendar import TimeSlot, calendar_feedback, solve_calendar, verify_calendar
from modulobench.verifiers.coloring import coloring_feedback, parse_coloring, render_coloring_answer, verify_coloring
from modulobench.verifiers.trip import ParsedTrip, parse_trip, trip_feedback, verify_trip

# coloring: an exact answer, then one vertex recolored to clash with a neighbour
g = gen_graph(12, 0.4, seed=2)
k = chromatic_number(g)
colors = optimal_coloring(g)
print(f"graph with {len(g.edges)} edges needs {k} colors; optimal answer valid:",
      verify_coloring(g, k, parse_coloring(render_coloring_answer(colors))).valid)
u, v = g.edges[0]
colors[v] = colors[u]
print(coloring_feedback(g, verify_coloring(g, k, parse_coloring(render_coloring_answer(colors)))))

# trip: the hidden itinerary passes, a shuffled one does not
spec = gen_trip(6, 15, seed=4)
print(render_trip_task(spec))
segments = solve_trip(spec)
print("hidden itinerary valid:", verify_trip(spec, parse_trip(render_trip_solution(segments))).valid)
print(trip_feedback(verify_trip(spec, ParsedTrip(tuple(reversed(segments))))))

# calendar: the only free slot, and the complaint about the first slot of the day
cal = gen_calendar(4, 30, seed=9)
print("\n" + render_calendar_task(cal))
print("answer:", solve_calendar(cal))
first = verify_calendar(cal, TimeSlot(cal.day, cal.work_start, cal.work_start + 30))
print(calendar_feedback(first) if not first.valid else "9:00 happens to be free")
