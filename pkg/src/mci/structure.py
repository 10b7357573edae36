"""Structural analyses used by the exact solvers."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Literal

from .errors import GraphFormatError, PreconditionError
from .graph import Dag, Digraph, Edge, _data_lines, _ints, classify, count_pairs, reach_sets, transpose

Side = Literal["source", "sink"]


@dataclass(frozen=True)
class Solution:
    """A set of added edges and the objective value of the augmented graph."""

    added: tuple[Edge, ...]
    value: int

    @property
    def budget_used(self) -> int:
        return len(self.added)

    @classmethod
    def of(cls, g: Digraph, added: Iterable[Edge]) -> "Solution":
        """Validate ``added`` against ``g`` and evaluate it."""
        added = list(added)
        edges = tuple(sorted(set(added)))
        if len(edges) != len(added):
            raise ValueError("added edges contain duplicates")
        for u, v in edges:
            if u == v:
                raise ValueError(f"added edge ({u}, {v}) is a self-loop")
            if g.has_edge(u, v):
                raise ValueError(f"added edge ({u}, {v}) duplicates an existing edge")
        return cls(edges, count_pairs(g.with_edges(edges)))


@dataclass(frozen=True)
class RepresentativeSet:
    side: Side
    members: tuple[int, ...]


@dataclass(frozen=True)
class ClassPartition:
    side: Side
    classes: tuple[tuple[int, ...], ...]

    @property
    def class_count(self) -> int:
        return len(self.classes)


def _covers(rows: list[int], members: Iterable[int], target: int) -> bool:
    acc = 0
    for s in members:
        acc |= rows[s]
    return acc & target == target


def minimal_representatives(g: Dag, side: Side) -> RepresentativeSet:
    """Inclusion-minimal sources reaching every non-source (sinks reached from every non-sink).

    Sources are only reachable from themselves, so coverage is asked of
    ``V \\ S`` alone. Greedy: start from all sources and drop each, in
    ascending id order, whenever coverage survives the removal.
    """
    cls = classify(g)
    if cls.isolated:
        raise PreconditionError(f"graph has isolated vertices {list(cls.isolated)}")
    if side == "sink":
        h = transpose(g)
        return RepresentativeSet("sink", minimal_representatives(h, "source").members)
    rows = reach_sets(g).rows
    target = (1 << g.n) - 1
    for s in cls.sources:
        target &= ~(1 << s)
    chosen = list(cls.sources)
    for s in cls.sources:
        trial = [x for x in chosen if x != s]
        if _covers(rows, trial, target):
            chosen = trial
    return RepresentativeSet("source", tuple(chosen))


def neighborhood_classes(g: Dag, side: Side) -> ClassPartition:
    """Group sources by out-neighbourhood (sinks by in-neighbourhood)."""
    cls = classify(g)
    if side == "source":
        members, nbr = cls.sources, g.adj
    else:
        members = cls.sinks
        preds: list[list[int]] = [[] for _ in range(g.n)]
        for u, v in g.edges:
            preds[v].append(u)
        nbr = preds
    groups: dict[tuple[int, ...], list[int]] = {}
    for v in members:
        groups.setdefault(tuple(nbr[v]), []).append(v)
    classes = sorted((tuple(c) for c in groups.values()), key=lambda c: c[0])
    return ClassPartition(side, tuple(classes))


# -- matching -------------------------------------------------------------------


def _undirected(g: Digraph) -> list[set[int]]:
    nbrs: list[set[int]] = [set() for _ in range(g.n)]
    for u, v in g.edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    return nbrs


def max_matching(g: Digraph) -> int:
    """Matching number of the underlying undirected simple graph (Edmonds' blossom algorithm)."""
    return len(blossom_matching(g.n, [sorted(s) for s in _undirected(g)]))


def blossom_matching(n: int, nbrs: list[list[int]]) -> list[Edge]:
    """Maximum-cardinality matching in a general undirected graph.

    ``nbrs`` is a symmetric adjacency list. Returns matched pairs ``(u, v)``
    with ``u < v``.
    """
    match = [-1] * n
    parent = [-1] * n
    base = list(range(n))

    def lca(a: int, b: int) -> int:
        seen = [False] * n
        while True:
            a = base[a]
            seen[a] = True
            if match[a] == -1:
                break
            a = parent[match[a]]
        while True:
            b = base[b]
            if seen[b]:
                return b
            b = parent[match[b]]

    def mark_path(v: int, b: int, child: int, in_blossom: list[bool]) -> None:
        while base[v] != b:
            in_blossom[base[v]] = in_blossom[base[match[v]]] = True
            parent[v] = child
            child = match[v]
            v = parent[match[v]]

    def find_path(root: int) -> int:
        nonlocal parent, base
        used = [False] * n
        parent = [-1] * n
        base = list(range(n))
        used[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for to in nbrs[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and parent[match[to]] != -1):
                    # odd cycle: contract the blossom
                    cur = lca(v, to)
                    in_blossom = [False] * n
                    mark_path(v, cur, to, in_blossom)
                    mark_path(to, cur, v, in_blossom)
                    for i in range(n):
                        if in_blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if match[to] == -1:
                        return to
                    used[match[to]] = True
                    queue.append(match[to])
        return -1

    for v in range(n):
        if match[v] != -1:
            continue
        end = find_path(v)
        while end != -1:
            pv = parent[end]
            ppv = match[pv]
            match[end] = pv
            match[pv] = end
            end = ppv
    return [(v, match[v]) for v in range(n) if match[v] > v]


def matching_number_exhaustive(g: Digraph) -> int:
    """Largest matching by trying every edge subset, largest first. Test oracle only."""
    edges = sorted({(min(u, v), max(u, v)) for u, v in g.edges})
    for size in range(min(len(edges), g.n // 2), 0, -1):
        for subset in combinations(edges, size):
            ends = [x for e in subset for x in e]
            if len(set(ends)) == len(ends):
                return size
    return 0


def verify_class_bound(h: Digraph, x_side: Iterable[int]) -> bool:
    """Check |X| <= nu(H) + 2**nu(H) for a bipartite H with distinct X-neighbourhoods."""
    xs = set(x_side)
    nbrs = _undirected(h)
    for u, v in h.edges:
        if (u in xs) == (v in xs):
            raise PreconditionError(f"edge ({u}, {v}) does not cross the bipartition")
    seen: dict[frozenset[int], int] = {}
    for x in sorted(xs):
        key = frozenset(nbrs[x])
        if key in seen:
            raise PreconditionError(f"vertices {seen[key]} and {x} have the same neighbourhood")
        seen[key] = x
    nu = max_matching(h)
    return len(xs) <= nu + 2**nu


# -- normalization ----------------------------------------------------------------


def normalize_solution(g: Dag, sol: Solution) -> Solution:
    """Rewrite every added edge to run from a sink/isolated vertex to a source/isolated vertex.

    Tail ``u`` is replaced by the smallest sink reachable from it, head ``v``
    by the smallest source reaching it. Reachability in the augmented graph
    can only grow, since ``u`` reaches the new tail and the new head reaches
    ``v``. An edge whose rewrite collides with one already kept is dropped:
    the kept copy carries the same connections.
    """
    cls = classify(g)
    tails = set(cls.sinks) | set(cls.isolated)
    heads = set(cls.sources) | set(cls.isolated)
    rows = reach_sets(g).rows
    sinks_sorted, sources_sorted = cls.sinks, cls.sources
    kept: list[Edge] = []
    for u, v in sol.added:
        if u not in tails:
            u = next(t for t in sinks_sorted if rows[u] >> t & 1)
        if v not in heads:
            v = next(s for s in sources_sorted if rows[s] >> v & 1)
        if (u, v) not in kept:
            kept.append((u, v))
    if tuple(sorted(kept)) == tuple(sorted(sol.added)):
        return sol
    return Solution.of(g, kept)


# -- solution files -------------------------------------------------------------------


@dataclass(frozen=True)
class SolutionFile:
    """Parsed solution document: header ``B k [value]`` then one ``u v`` line per added edge."""

    budget_used: int
    guessed_k: int
    edges: tuple[Edge, ...]
    value: int | None = None


def format_solution(sol: Solution, guessed_k: int | None = None) -> str:
    k = -1 if guessed_k is None else guessed_k
    lines = [f"{sol.budget_used} {k} {sol.value}"] + [f"{u} {v}" for u, v in sol.added]
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> SolutionFile:
    lines = _data_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise GraphFormatError("empty solution: missing 'B k' header") from None
    if len(header) not in (2, 3):
        raise GraphFormatError("header must be 'B k' or 'B k value'", lineno)
    fields = _ints(header, len(header), lineno)
    edges = tuple(tuple(_ints(tokens, 2, ln)) for ln, tokens in lines)
    if len(edges) != fields[0]:
        raise GraphFormatError(f"header declares {fields[0]} edges but {len(edges)} were given")
    return SolutionFile(fields[0], fields[1], edges, fields[2] if len(fields) == 3 else None)
