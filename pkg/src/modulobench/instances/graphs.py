"""Random graphs and exact chromatic numbers."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass


class ColoringLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple  # sorted (u, v) pairs with u < v

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)

    @classmethod
    def of(cls, n: int, edges) -> "Graph":
        return cls(n, tuple(sorted((min(u, v), max(u, v)) for u, v in edges)))

    def neighbours(self) -> list:
        adj = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def to_text(self) -> str:
        return "\n".join([str(self.n)] + [f"{u} {v}" for u, v in self.edges]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        n = int(lines[0][0])
        return cls.of(n, [(int(a), int(b)) for a, b in lines[1:]])


def complete_graph(n: int) -> Graph:
    return Graph.of(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle_graph(n: int) -> Graph:
    return Graph.of(n, [(i, (i + 1) % n) for i in range(n)])


def gen_graph(n: int, p: float, seed) -> Graph:
    """Erdos-Renyi G(n, p): every pair is an edge independently with probability p."""
    if n < 1 or not 0 <= p <= 1:
        raise ValueError("need n >= 1 and 0 <= p <= 1")
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph(n, tuple(edges))


def _greedy_clique(adj: list) -> int:
    best = 0
    for start in range(len(adj)):
        clique = [start]
        cands = set(adj[start])
        while cands:
            v = max(cands, key=lambda x: (len(adj[x] & cands), -x))
            clique.append(v)
            cands &= adj[v]
        best = max(best, len(clique))
    return best


def find_coloring(graph: Graph, k: int, deadline: float | None = None) -> list | None:
    """A proper coloring with colors 0..k-1, or None.

    Vertices are taken in decreasing degree order.  Colors are introduced in
    order (a vertex may use at most one more than the highest color so far),
    which removes the k! relabelings of each solution from the search.
    """
    n = graph.n
    if n == 0:
        return []
    if k <= 0:
        return None
    adj = graph.neighbours()
    order = sorted(range(n), key=lambda v: (-len(adj[v]), v))
    colors = [-1] * n
    ticks = [0]

    def rec(i: int, used: int) -> bool:
        if i == n:
            return True
        ticks[0] += 1
        if deadline is not None and ticks[0] & 4095 == 0 and time.perf_counter() > deadline:
            raise ColoringLimitExceeded("chromatic number search exceeded its time limit")
        v = order[i]
        taken = {colors[u] for u in adj[v]}
        for c in range(min(used + 1, k)):
            if c in taken:
                continue
            colors[v] = c
            if rec(i + 1, max(used, c + 1)):
                return True
        colors[v] = -1
        return False

    return colors if rec(0, 0) else None


def chromatic_number(graph: Graph, max_seconds: float = 60.0) -> int:
    """Smallest k admitting a proper coloring, by iterative deepening on k."""
    if graph.n == 0:
        return 0
    if not graph.edges:
        return 1
    deadline = time.perf_counter() + max_seconds
    k = max(2, _greedy_clique(graph.neighbours()))
    while find_coloring(graph, k, deadline) is None:
        k += 1
    return k


def optimal_coloring(graph: Graph, max_seconds: float = 60.0) -> list:
    k = chromatic_number(graph, max_seconds)
    return find_coloring(graph, k) if graph.n else []
