"""Graph coloring answers: parsing, verification and feedback text."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..instances.graphs import Graph
from ..resources import fill, read_asset

ANSWER_END = "[ANSWER END]"
_LINE = re.compile(r"^\s*(\d+)\s*:\s*(.+?)\s*$")


@dataclass(frozen=True)
class Coloring:
    assignment: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ColoringReport:
    missing_vertices: tuple
    monochromatic_edges: tuple
    colors_used: int
    k_required: int
    valid: bool

    def to_dict(self) -> dict:
        return {
            "missing_vertices": list(self.missing_vertices),
            "monochromatic_edges": [list(e) for e in self.monochromatic_edges],
            "colors_used": self.colors_used,
            "k_required": self.k_required,
            "valid": self.valid,
        }


def answer_format() -> str:
    return read_asset("templates/coloring_answer_format.txt")


def render_coloring_prompt(graph: Graph, k: int) -> str:
    edges = "".join(f"Vertex {u} is connected to vertex {v}.\n" for u, v in graph.edges)
    return fill("coloring_prompt.txt", k=k, edges=edges, n=graph.n, answer_format=answer_format())


def render_coloring_answer(colors: list) -> str:
    """Answer text in the requested format; colors are printed 1-based."""
    return "\n".join(f"{v}: {c + 1}" for v, c in enumerate(colors)) + f"\n{ANSWER_END}"


def parse_coloring(text: str) -> Coloring:
    """Read ``vertex: color`` lines up to the end sentinel; later lines overwrite earlier ones."""
    assignment: dict = {}
    for raw in text.splitlines():
        if ANSWER_END in raw:
            break
        m = _LINE.match(raw.replace("*", "").replace("`", ""))
        if m:
            assignment[int(m.group(1))] = m.group(2)
    return Coloring(assignment)


def verify_coloring(graph: Graph, k_required: int, coloring: Coloring) -> ColoringReport:
    a = coloring.assignment
    missing = tuple(v for v in range(graph.n) if v not in a)
    mono = tuple((u, v) for u, v in graph.edges if u in a and v in a and a[u] == a[v])
    used = len({a[v] for v in range(graph.n) if v in a})
    valid = not missing and not mono and used == k_required
    return ColoringReport(missing, mono, used, k_required, valid)


def coloring_feedback(graph: Graph, report: ColoringReport) -> str:
    """Feedback lines per violated edge in edge order, then a color-count line if relevant.

    A vertex missing from several edges is reported once per edge.  Missing
    vertices with no edges are only listed when no edge produced a line, and
    the color count is only checked once every vertex has a color.
    """
    if report.valid:
        raise ValueError("a valid coloring has no feedback")
    missing = set(report.missing_vertices)
    mono = set(report.monochromatic_edges)
    lines = []
    for u, v in graph.edges:
        if (u, v) in mono:
            lines.append(f"Vertex {u} and vertex {v} are connected and share the same color.")
            continue
        for x in (u, v):
            if x in missing:
                lines.append(f"Vertex {x} was not given a value in the coloring.")
    if not lines:
        lines += [f"Vertex {x} was not given a value in the coloring." for x in report.missing_vertices]
    if not report.missing_vertices and report.colors_used != report.k_required:
        lines.append(f"The coloring uses {report.colors_used} colors, but exactly {report.k_required} are required.")
    return fill("coloring_feedback.txt", lines="\n".join(lines), answer_format=answer_format())
