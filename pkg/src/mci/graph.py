"""Directed graphs, DAG validation, vertex classification and the pair-count objective.

Vertices are dense integers ``0..n-1``. Reachable sets are Python ints used as
bit sets: bit ``u`` of ``reach[v]`` is set iff ``v`` reaches ``u``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import CycleError, GraphFormatError

Edge = tuple[int, int]


@dataclass(frozen=True)
class Digraph:
    """Immutable simple digraph: no self-loops, no parallel edges, sorted adjacency."""

    n: int
    adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "Digraph":
        return cls(n, _build_adjacency(n, edges))

    @property
    def edges(self) -> list[Edge]:
        return [(u, v) for u in range(self.n) for v in self.adj[u]]

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adj)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def out_degree(self, v: int) -> int:
        return len(self.adj[v])

    def in_degrees(self) -> list[int]:
        deg = [0] * self.n
        for a in self.adj:
            for v in a:
                deg[v] += 1
        return deg

    def with_edges(self, extra: Iterable[Edge]) -> "Digraph":
        """Return ``G(N)``: a plain digraph with the extra edges added."""
        return Digraph.from_edges(self.n, self.edges + list(extra))

    def induced(self, vertices: Iterable[int]) -> tuple["Digraph", list[int]]:
        """Subgraph induced on ``vertices``, relabelled densely.

        Returns the subgraph and the list mapping new ids back to old ids.
        """
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        sub = [(index[u], index[v]) for u in keep for v in self.adj[u] if v in index]
        return type(self).from_edges(len(keep), sub), keep


@dataclass(frozen=True)
class Dag(Digraph):
    """A :class:`Digraph` known to be acyclic, with a cached topological order."""

    topo: tuple[int, ...] = field(default=(), compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "Dag":
        adj = _build_adjacency(n, edges)
        order = topological_order(n, adj)
        if order is None:
            raise CycleError(f"cycle detected through vertices {find_cycle(n, adj)}")
        return cls(n, adj, tuple(order))

    @classmethod
    def from_digraph(cls, g: Digraph) -> "Dag":
        return cls.from_edges(g.n, g.edges)


def _build_adjacency(n: int, edges: Iterable[Edge]) -> tuple[tuple[int, ...], ...]:
    if n < 0:
        raise GraphFormatError(f"negative vertex count {n}")
    out: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}")
        if v in out[u]:
            raise GraphFormatError(f"duplicate edge ({u}, {v})")
        out[u].add(v)
    return tuple(tuple(sorted(a)) for a in out)


def topological_order(n: int, adj) -> list[int] | None:
    """Kahn's algorithm, smallest available id first. ``None`` if cyclic."""
    indeg = [0] * n
    for a in adj:
        for v in a:
            indeg[v] += 1
    heap = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = heapq.heappop(heap)
        order.append(u)
        for v in adj[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    return order if len(order) == n else None


def find_cycle(n: int, adj) -> list[int]:
    """Vertices of some directed cycle, in order; empty if acyclic."""
    color = [0] * n
    parent = [-1] * n
    for root in range(n):
        if color[root]:
            continue
        stack = [(root, iter(adj[root]))]
        color[root] = 1
        while stack:
            u, it = stack[-1]
            for v in it:
                if color[v] == 0:
                    color[v] = 1
                    parent[v] = u
                    stack.append((v, iter(adj[v])))
                    break
                if color[v] == 1:
                    cycle = [u]
                    while cycle[-1] != v:
                        cycle.append(parent[cycle[-1]])
                    return cycle[::-1]
            else:
                color[u] = 2
                stack.pop()
    return []


# -- parsing -----------------------------------------------------------------


def _data_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped.split()


def _ints(tokens: list[str], count: int, lineno: int) -> list[int]:
    if len(tokens) != count:
        raise GraphFormatError(f"expected {count} integers, got {len(tokens)}", lineno)
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise GraphFormatError(f"non-integer token in {' '.join(tokens)!r}", lineno) from None


def parse_graph(text: str) -> Dag:
    """Parse the ``n m`` / ``u v`` edge-list format into a validated :class:`Dag`."""
    lines = _data_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise GraphFormatError("empty document: missing 'n m' header") from None
    n, m = _ints(header, 2, lineno)
    if n < 0 or m < 0:
        raise GraphFormatError("vertex and edge counts must be non-negative", lineno)
    edges: list[Edge] = []
    seen: dict[Edge, int] = {}
    for lineno, tokens in lines:
        u, v = _ints(tokens, 2, lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"vertex id out of range [0, {n}) in edge ({u}, {v})", lineno)
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", lineno)
        if (u, v) in seen:
            raise GraphFormatError(f"duplicate edge ({u}, {v}), first on line {seen[u, v]}", lineno)
        seen[u, v] = lineno
        edges.append((u, v))
    if len(edges) != m:
        raise GraphFormatError(f"header declares {m} edges but {len(edges)} were given")
    adj = _build_adjacency(n, edges)
    if topological_order(n, adj) is None:
        cycle = find_cycle(n, adj)
        line = seen[cycle[-1], cycle[0]]
        raise CycleError(f"cycle detected through vertices {cycle}", line)
    return Dag.from_edges(n, edges)


def format_graph(g: Digraph) -> str:
    edges = g.edges
    return "".join([f"{g.n} {len(edges)}\n"] + [f"{u} {v}\n" for u, v in edges])


# -- classification ------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    sources: tuple[int, ...]
    sinks: tuple[int, ...]
    isolated: tuple[int, ...]
    internal: tuple[int, ...]

    @property
    def threshold(self) -> int:
        """Fewest added edges that make the DAG strongly connected (n > 1)."""
        return max(len(self.sources), len(self.sinks)) + len(self.isolated)


def classify(g: Digraph) -> Classification:
    indeg = g.in_degrees()
    buckets: dict[str, list[int]] = {"s": [], "t": [], "q": [], "i": []}
    for v in range(g.n):
        i, o = indeg[v], g.out_degree(v)
        key = "q" if i == 0 and o == 0 else "s" if i == 0 else "t" if o == 0 else "i"
        buckets[key].append(v)
    return Classification(*(tuple(buckets[k]) for k in "stqi"))


# -- reachability ---------------------------------------------------------------


class ReachabilityMatrix:
    """Reflexive reachable sets, one bit set per vertex."""

    __slots__ = ("n", "rows")

    def __init__(self, n: int, rows: list[int]):
        self.n = n
        self.rows = rows

    def __getitem__(self, v: int) -> int:
        return self.rows[v]

    def reaches(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def members(self, v: int) -> set[int]:
        bits = self.rows[v]
        return {u for u in range(self.n) if bits >> u & 1}

    def total(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def ancestors(self, v: int) -> int:
        """Bit set of vertices that reach ``v``."""
        bit = 1 << v
        return sum(1 << u for u in range(self.n) if self.rows[u] & bit)


def strongly_connected_components(n: int, adj) -> list[list[int]]:
    """Tarjan's algorithm, iterative. Components come out in reverse topological order."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            a = adj[v]
            while i < len(a):
                w = a[i]
                i += 1
                if index[w] == -1:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def reach_sets(g: Digraph) -> ReachabilityMatrix:
    n = g.n
    rows = [0] * n
    if isinstance(g, Dag):
        for v in reversed(g.topo):
            bits = 1 << v
            for w in g.adj[v]:
                bits |= rows[w]
            rows[v] = bits
        return ReachabilityMatrix(n, rows)
    comps = strongly_connected_components(n, g.adj)
    comp_of = [0] * n
    for c, members in enumerate(comps):
        for v in members:
            comp_of[v] = c
    # reverse topological order: every successor component is already filled
    comp_bits = [0] * len(comps)
    for c, members in enumerate(comps):
        bits = 0
        for v in members:
            bits |= 1 << v
        for v in members:
            for w in g.adj[v]:
                if comp_of[w] != c:
                    bits |= comp_bits[comp_of[w]]
        comp_bits[c] = bits
    for v in range(n):
        rows[v] = comp_bits[comp_of[v]]
    return ReachabilityMatrix(n, rows)


def count_pairs(g: Digraph) -> int:
    """Number of ordered pairs (v, u) with u reachable from v, v reaching itself."""
    return reach_sets(g).total()


def is_strongly_connected(g: Digraph) -> bool:
    if g.n <= 1:
        return True
    return len(strongly_connected_components(g.n, g.adj)) == 1


def transpose(g: Digraph) -> Digraph:
    return type(g).from_edges(g.n, [(v, u) for u, v in g.edges])
