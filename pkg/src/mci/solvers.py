"""Exact solvers for maximum connectivity improvement on DAGs.

Every solver returns the optimum value. They differ only in how they cut
down the family of candidate edge sets they evaluate:

* ``brute_force`` tries every set of at most ``B`` non-edges.
* ``solve_by_st`` tries sink-to-source edge sets.
* ``solve_by_v_minus_b`` switches to a closed-form construction once the
  budget exceeds half the vertex count.
* ``solve_by_matching`` uses a closed-form construction when the budget
  covers the minimal representative sets, and otherwise enumerates over
  one representative per interchangeable source/sink.

Isolated vertices are handled by guessing ``k``, the number of edges of
the path they form in the optimum (always through the ``k + 1`` smallest
isolated ids, since isolated vertices are interchangeable).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Iterator, Literal

from .errors import PreconditionError, SolverGuardError
from .graph import Dag, Edge, classify, reach_sets, transpose
from .structure import Solution, minimal_representatives, neighborhood_classes

Strategy = Literal["auto", "oracle", "st", "v-minus-b", "matching"]

DEFAULT_MAX_CANDIDATES = 2_000_000


@dataclass(frozen=True)
class SolveOutcome:
    solution: Solution
    strategy: str
    guessed_k: int | None
    explored: int

    @property
    def value(self) -> int:
        return self.solution.value


@dataclass(frozen=True)
class ClassBudgetPartition:
    """How many added edges join sink class ``j`` to source class ``i``."""

    matrix: tuple[tuple[int, ...], ...]

    @property
    def total(self) -> int:
        return sum(map(sum, self.matrix))


@dataclass(frozen=True)
class IsolatedPathPlan:
    k: int
    path_vertices: tuple[int, ...]

    @property
    def edges(self) -> list[Edge]:
        p = self.path_vertices
        return [(p[i], p[i + 1]) for i in range(self.k)]


# -- evaluation ---------------------------------------------------------------------


class Evaluator:
    """Objective of ``G(N)`` for small ``N``, reusing the closure of ``G``.

    For each added edge (a, b) the set of vertices reachable once the edge is
    taken is closed under the other added edges; a vertex then reaches its
    own closure plus the closed set of every added edge whose tail it reaches.
    """

    def __init__(self, g: Dag):
        self.g = g
        self.rows = reach_sets(g).rows
        self.base = sum(r.bit_count() for r in self.rows)

    def value(self, added) -> int:
        if not added:
            return self.base
        rows = self.rows
        tails = [a for a, _ in added]
        ext = [rows[b] for _, b in added]
        k = len(added)
        changed = True
        while changed:
            changed = False
            for i in range(k):
                x = ext[i]
                for j in range(k):
                    if x >> tails[j] & 1 and ext[j] & ~x:
                        x |= ext[j]
                        changed = True
                ext[i] = x
        total = 0
        for r in rows:
            acc = r
            for i in range(k):
                if r >> tails[i] & 1:
                    acc |= ext[i]
            total += acc.bit_count()
        return total


def _key(value: int, edges: tuple[Edge, ...]) -> tuple[int, tuple[Edge, ...]]:
    return (-value, edges)


class _Best:
    """Running optimum under (-value, sorted edge tuple) ordering."""

    def __init__(self):
        self.key: tuple[int, tuple[Edge, ...]] | None = None
        self.k: int | None = None
        self.explored = 0

    def offer(self, value: int, edges, k: int | None = None) -> None:
        key = _key(value, tuple(sorted(edges)))
        if self.key is None or key < self.key:
            self.key, self.k = key, k

    @property
    def value(self) -> int:
        return -self.key[0]

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self.key[1]


def _guard(count: int, cap: int | None) -> None:
    if cap is not None and count > cap:
        raise SolverGuardError(count, cap)


def _scan(ev: Evaluator, pool: list[Edge], size: int, best: _Best, fixed=(), k=None, cap=None) -> None:
    """Offer every ``size``-subset of ``pool`` to ``best``.

    ``fixed`` edges must already be part of ``ev``'s graph; they are only
    added to the reported edge list.
    """
    size = min(size, len(pool))
    _guard(best.explored + math.comb(len(pool), size), cap)
    fixed = list(fixed)
    for subset in combinations(pool, size):
        best.offer(ev.value(subset), fixed + list(subset), k)
        best.explored += 1


def _outcome(g: Dag, best: _Best, strategy: str) -> SolveOutcome:
    return SolveOutcome(Solution(best.edges, best.value), strategy, best.k, best.explored)


def _trivial(g: Dag, strategy: str) -> SolveOutcome:
    return SolveOutcome(Solution((), 1 if g.n == 1 else 0), strategy, None, 0)


def _check_below_threshold(g: Dag, B: int) -> None:
    if B < 0:
        raise PreconditionError(f"budget must be non-negative, got {B}")
    t = classify(g).threshold
    if B >= t:
        raise PreconditionError(
            f"B={B} reaches max(|S|,|T|)+|Q|={t}: the graph can be made strongly "
            "connected, use augment_strongly_connected"
        )


# -- oracle -------------------------------------------------------------------------


def non_edges(g: Dag) -> list[Edge]:
    return [(u, v) for u in range(g.n) for v in range(g.n) if u != v and not g.has_edge(u, v)]


def brute_force(g: Dag, B: int, max_candidates: int | None = DEFAULT_MAX_CANDIDATES) -> SolveOutcome:
    """Exact optimum by trying every set of at most ``B`` non-edges."""
    if B < 0:
        raise PreconditionError(f"budget must be non-negative, got {B}")
    pool = non_edges(g)
    top = min(B, len(pool))
    _guard(sum(math.comb(len(pool), i) for i in range(top + 1)), max_candidates)
    ev = Evaluator(g)
    best = _Best()
    for size in range(top + 1):
        _scan(ev, pool, size, best)
    return _outcome(g, best, "oracle")


# -- strong connectivity augmentation -------------------------------------------------


def _pair_sources_with_sinks(g: Dag, sources, sinks) -> list[tuple[int, int]]:
    """Greedy source/sink pairing by depth-first search over unmarked vertices.

    Every source reaches some paired sink and every sink is reached from
    some paired source, which is what the cyclic chaining needs.
    """
    sink_set = set(sinks)
    marked = [False] * g.n
    pairs = []
    for s in sources:
        if marked[s]:
            continue
        marked[s] = True
        stack = [s]
        found = None
        while stack and found is None:
            v = stack[-1]
            if v in sink_set:
                found = v
                break
            for w in g.adj[v]:
                if not marked[w]:
                    marked[w] = True
                    stack.append(w)
                    break
            else:
                stack.pop()
        if found is not None:
            pairs.append((s, found))
    return pairs


def _strong_augmentation_edges(g: Dag) -> list[Edge]:
    cls = classify(g)
    if len(cls.sources) > len(cls.sinks):
        return [(v, u) for u, v in _strong_augmentation_edges(transpose(g))]
    sources, sinks, isolated = cls.sources, cls.sinks, list(cls.isolated)
    if not sources:
        if len(isolated) < 2:
            return []
        return [(isolated[i], isolated[(i + 1) % len(isolated)]) for i in range(len(isolated))]
    pairs = _pair_sources_with_sinks(g, sources, sinks)
    p = len(pairs)
    paired_s = {s for s, _ in pairs}
    paired_t = {t for _, t in pairs}
    s_order = [s for s, _ in pairs] + [s for s in sources if s not in paired_s]
    t_order = [t for _, t in pairs] + [t for t in sinks if t not in paired_t]
    # |S| <= |T| from here on
    edges = [(t_order[i], s_order[i + 1]) for i in range(p - 1)]
    edges += [(t_order[i], s_order[i]) for i in range(p, len(s_order))]
    last = t_order[p - 1]
    for x in t_order[len(s_order):] + isolated:
        edges.append((last, x))
        last = x
    edges.append((last, s_order[0]))
    return edges


def augment_strongly_connected(g: Dag, B: int) -> Solution:
    """Add at most ``max(|S|,|T|) + |Q|`` edges making ``g`` strongly connected."""
    if g.n <= 1:
        return Solution((), g.n)
    t = classify(g).threshold
    if B < t:
        raise PreconditionError(
            f"B={B} is below max(|S|,|T|)+|Q|={t}; a non-trivial DAG becomes strongly "
            "connected with at most B added edges if and only if B >= that threshold"
        )
    return Solution(tuple(sorted(_strong_augmentation_edges(g))), g.n * g.n)


def _induced_strong_edges(g: Dag, vertices) -> list[Edge] | None:
    """Edges making the subgraph induced on ``vertices`` strongly connected, in ``g`` ids."""
    sub, back = g.induced(vertices)
    if sub.n <= 1:
        return []
    return [(back[u], back[v]) for u, v in _strong_augmentation_edges(sub)]


def _transposed(out: SolveOutcome) -> SolveOutcome:
    sol = out.solution
    flipped = tuple(sorted((v, u) for u, v in sol.added))
    return SolveOutcome(Solution(flipped, sol.value), out.strategy, out.guessed_k, out.explored)


def _pad(base, pool, size: int) -> list[int]:
    chosen = list(base)
    for x in pool:
        if len(chosen) >= size:
            break
        if x not in chosen:
            chosen.append(x)
    return sorted(chosen)


# -- |V| - B -------------------------------------------------------------------------


def large_budget_value(n: int, n_sources: int, B: int) -> int:
    return n * n - (n - 1) * (n_sources - B)


def solve_large_budget(g: Dag, B: int) -> SolveOutcome:
    """Polynomial optimum when ``Q`` is empty and ``|V \\ S| <= B <= |S|`` (for ``|S| >= |T|``).

    One source reaching each non-source vertex is chosen, the choice is padded
    to ``B`` sources, and those sources together with every non-source vertex
    are made strongly connected. The value meets the upper bound
    ``n^2 - (n-1)(|S|-B)``.
    """
    cls = classify(g)
    if cls.isolated:
        raise PreconditionError("large-budget construction needs a graph without isolated vertices")
    if g.n <= 1:
        return _trivial(g, "large-budget")
    if len(cls.sinks) > len(cls.sources):
        return _transposed(solve_large_budget(transpose(g), B))
    sources = cls.sources
    others = [v for v in range(g.n) if v not in set(sources)]
    if not (len(others) <= B <= len(sources)):
        raise PreconditionError(
            f"need |V\\S|={len(others)} <= B={B} <= |S|={len(sources)} (oriented so |S| >= |T|)"
        )
    rows = reach_sets(g).rows
    covered = 0
    reps = []
    for z in others:
        if covered >> z & 1:
            continue
        s = next(s for s in sources if rows[s] >> z & 1)
        reps.append(s)
        covered |= rows[s]
    chosen = _pad(reps, sources, B)
    edges = _induced_strong_edges(g, chosen + others)
    value = Evaluator(g).value(edges)
    assert value == large_budget_value(g.n, len(sources), B), (value, edges)
    return SolveOutcome(Solution(tuple(sorted(edges)), value), "large-budget", None, 1)


# -- isolated vertices ------------------------------------------------------------------

Residual = Callable[[Dag, Dag, IsolatedPathPlan, int, _Best], None]


def _with_isolated_paths(g: Dag, B: int, residual: Residual, strategy: str) -> SolveOutcome:
    """Guess the path the isolated vertices form, then solve what remains.

    The path over the ``k + 1`` smallest isolated ids uses ``k`` of the
    budget; ``residual`` spends the other ``B - k`` edges on the graph with
    the path already in place.
    """
    q = classify(g).isolated
    best = _Best()
    for k in range(min(B, len(q) - 1) + 1):
        plan = IsolatedPathPlan(k, q[: k + 1])
        gk = Dag.from_edges(g.n, g.edges + plan.edges)
        residual(g, gk, plan, B - k, best)
    return _outcome(g, best, strategy)


def _isolated_pool(g: Dag, plan: IsolatedPathPlan, sources, sinks, rest) -> list[Edge]:
    """Edges from sinks / path end / spare isolated vertices into sources / path start / spare isolated vertices.

    Spare isolated vertices are never joined to each other: the path already
    accounts for every isolated-to-isolated edge.
    """
    start, end = plan.path_vertices[0], plan.path_vertices[-1]
    spare = set(rest)
    tails = list(sinks) + [end] + list(rest)
    heads = list(sources) + [start] + list(rest)
    return sorted({(u, v) for u in tails for v in heads if u != v and not (u in spare and v in spare)})


def _rest(g: Dag, plan: IsolatedPathPlan) -> tuple[int, ...]:
    return classify(g).isolated[plan.k + 1 :]


# -- |S| + |T| ------------------------------------------------------------------------------


def _sink_source_pool(g: Dag) -> list[Edge]:
    cls = classify(g)
    return [(t, s) for t in cls.sinks for s in cls.sources]


def solve_by_st(g: Dag, B: int, max_candidates: int | None = DEFAULT_MAX_CANDIDATES) -> SolveOutcome:
    """Try every way of spending the budget on sink-to-source edges."""
    if g.n <= 1:
        return _trivial(g, "st")
    _check_below_threshold(g, B)
    cls = classify(g)
    if not cls.isolated:
        best = _Best()
        _scan(Evaluator(g), _sink_source_pool(g), B, best, cap=max_candidates)
        return _outcome(g, best, "st")

    def residual(g, gk, plan, r, best):
        pool = _isolated_pool(g, plan, cls.sources, cls.sinks, _rest(g, plan))
        _scan(Evaluator(gk), pool, r, best, plan.edges, plan.k, max_candidates)

    return _with_isolated_paths(g, B, residual, "st")


# -- |V| - B ----------------------------------------------------------------------------------


def _strongly_connect(g: Dag) -> SolveOutcome:
    edges = _strong_augmentation_edges(g) if g.n > 1 else []
    return SolveOutcome(Solution(tuple(sorted(edges)), g.n * g.n), "tarjan", None, 1)


def _v_minus_b_core(g: Dag, B: int, cap: int | None) -> SolveOutcome:
    """Isolated-free case: enumeration when ``|V| - B >= |V|/2``, construction otherwise."""
    if B >= classify(g).threshold:
        return _strongly_connect(g)
    if 2 * B <= g.n:
        best = _Best()
        _scan(Evaluator(g), _sink_source_pool(g), B, best, cap=cap)
        return _outcome(g, best, "v-minus-b")
    return solve_large_budget(g, B)


def _merge(best: _Best, sub: SolveOutcome, plan: IsolatedPathPlan) -> None:
    best.offer(sub.value, plan.edges + list(sub.solution.added), plan.k)
    best.explored += sub.explored


def solve_by_v_minus_b(g: Dag, B: int, max_candidates: int | None = DEFAULT_MAX_CANDIDATES) -> SolveOutcome:
    if g.n <= 1:
        return _trivial(g, "v-minus-b")
    _check_below_threshold(g, B)
    cls = classify(g)
    if not cls.isolated:
        out = _v_minus_b_core(g, B, max_candidates)
        return SolveOutcome(out.solution, "v-minus-b", None, out.explored)

    def residual(g, gk, plan, r, best):
        rest = _rest(g, plan)
        if not rest and plan.k >= 1:
            # every isolated vertex sits on the path: gk has none left
            _merge(best, _v_minus_b_core(gk, r, max_candidates), plan)
            return
        pool = _isolated_pool(g, plan, cls.sources, cls.sinks, rest)
        _scan(Evaluator(gk), pool, r, best, plan.edges, plan.k, max_candidates)

    return _with_isolated_paths(g, B, residual, "v-minus-b")


# -- matching number ----------------------------------------------------------------------------


def matching_upper_bound(n: int, n_sources: int, n_sinks: int, B: int) -> int:
    """Upper bound on OPT for an isolated-free DAG with ``B`` below both ``|S|`` and ``|T|`` (or one of them).

    At least ``a = |S| - B`` vertices keep in-degree 0 and ``b = |T| - B``
    keep out-degree 0; each such vertex loses ``n - 1`` pairs and the ``a*b``
    pairs from a surviving sink to a surviving source are counted twice.
    """
    a = max(n_sources - B, 0)
    b = max(n_sinks - B, 0)
    return n * n - (n - 1) * (a + b) + a * b


def _matching_construction(g: Dag, B: int) -> list[Edge] | None:
    """Pad the minimal representative sets to ``B`` and build one strongly connected block.

    Assumes ``|S| >= |T|``. Returns ``None`` when the padded block cannot be
    made strongly connected with ``B`` edges.
    """
    cls = classify(g)
    s0 = minimal_representatives(g, "source").members
    chosen_s = _pad(s0, cls.sources, B)
    if len(cls.sinks) <= B:
        block = chosen_s + [v for v in range(g.n) if v not in set(cls.sources)]
    else:
        t0 = minimal_representatives(g, "sink").members
        block = chosen_s + _pad(t0, cls.sinks, B) + list(cls.internal)
    sub, _ = g.induced(block)
    if sub.n > 1 and classify(sub).threshold > B:
        return None
    return _induced_strong_edges(g, block)


def budget_partitions(caps: list[list[int]], total: int) -> Iterator[ClassBudgetPartition]:
    """All matrices ``B_ij <= caps[i][j]`` with entries summing to ``total``."""
    rows, cols = len(caps), len(caps[0]) if caps else 0
    flat_caps = [c for row in caps for c in row]
    remaining_cap = [sum(flat_caps[i:]) for i in range(len(flat_caps) + 1)]
    cells = [0] * len(flat_caps)

    def rec(i: int, left: int):
        if i == len(flat_caps):
            if left == 0:
                yield ClassBudgetPartition(
                    tuple(tuple(cells[r * cols : (r + 1) * cols]) for r in range(rows))
                )
            return
        if left > remaining_cap[i]:
            return
        for x in range(min(left, flat_caps[i]) + 1):
            cells[i] = x
            yield from rec(i + 1, left - x)
        cells[i] = 0

    yield from rec(0, total)


def _class_reps(g: Dag, side: str, limit: int) -> list[list[int]]:
    return [list(c[:limit]) for c in neighborhood_classes(g, side).classes]


def _class_enumeration(g: Dag, B: int, best: _Best, cap: int | None) -> None:
    """Spend ``B`` sink-to-source edges over class representatives, cell by cell.

    Sources sharing an out-neighbourhood (sinks sharing an in-neighbourhood)
    are swapped by an automorphism, and ``B`` edges touch at most ``B``
    members of a class, so keeping ``min(B, |class|)`` members per class loses
    no optimum.
    """
    src = _class_reps(g, "source", B)
    snk = _class_reps(g, "sink", B)
    cells = [[[(t, s) for t in tj for s in si] for tj in snk] for si in src]
    caps = [[len(c) for c in row] for row in cells]
    pool_size = sum(map(sum, caps))
    size = min(B, pool_size)
    _guard(best.explored + math.comb(pool_size, size), cap)
    ev = Evaluator(g)
    for part in budget_partitions(caps, size):
        choices = [
            combinations(cells[i][j], part.matrix[i][j])
            for i in range(len(src))
            for j in range(len(snk))
            if part.matrix[i][j]
        ]
        for picked in product(*choices):
            edges = [e for group in picked for e in group]
            best.offer(ev.value(edges), edges)
            best.explored += 1


def _matching_core(g: Dag, B: int, cap: int | None) -> SolveOutcome:
    cls = classify(g)
    if B >= cls.threshold:
        return _strongly_connect(g)
    if len(cls.sinks) > len(cls.sources):
        return _transposed(_matching_core(transpose(g), B, cap))
    s0 = minimal_representatives(g, "source").members
    t0 = minimal_representatives(g, "sink").members
    if B >= max(len(s0), len(t0)):
        edges = _matching_construction(g, B)
        if edges is not None:
            value = Evaluator(g).value(edges)
            if value == matching_upper_bound(g.n, len(cls.sources), len(cls.sinks), B):
                return SolveOutcome(Solution(tuple(sorted(edges)), value), "matching", None, 1)
    best = _Best()
    best.explored = 1 if B >= max(len(s0), len(t0)) else 0
    _class_enumeration(g, B, best, cap)
    return _outcome(g, best, "matching")


def solve_by_matching(g: Dag, B: int, max_candidates: int | None = DEFAULT_MAX_CANDIDATES) -> SolveOutcome:
    if g.n <= 1:
        return _trivial(g, "matching")
    _check_below_threshold(g, B)
    cls = classify(g)
    if not cls.isolated:
        out = _matching_core(g, B, max_candidates)
        return SolveOutcome(out.solution, "matching", None, out.explored)

    def residual(g, gk, plan, r, best):
        rest = _rest(g, plan)
        if not rest and plan.k >= 1:
            _merge(best, _matching_core(gk, r, max_candidates), plan)
            return
        sources = [s for c in _class_reps(g, "source", r) for s in c]
        sinks = [t for c in _class_reps(g, "sink", r) for t in c]
        pool = _isolated_pool(g, plan, sorted(sources), sorted(sinks), rest[:r])
        _scan(Evaluator(gk), pool, r, best, plan.edges, plan.k, max_candidates)

    return _with_isolated_paths(g, B, residual, "matching")


# -- dispatcher -----------------------------------------------------------------------------------


def _isolated_estimate(g: Dag, B: int, sources, sinks, rest_limit: bool) -> int:
    q = classify(g).isolated
    total = 0
    for k in range(min(B, len(q) - 1) + 1):
        plan = IsolatedPathPlan(k, q[: k + 1])
        rest = q[k + 1 :]
        if rest_limit:
            rest = rest[: B - k]
        pool = len(_isolated_pool(g, plan, sources, sinks, rest))
        total += math.comb(pool, min(B - k, pool))
    return total


def estimate(g: Dag, B: int, strategy: str) -> int:
    """A-priori count of candidate edge sets a strategy would evaluate."""
    cls = classify(g)
    S, T, Q = cls.sources, cls.sinks, cls.isolated
    if strategy == "oracle":
        c = len(non_edges(g))
        return sum(math.comb(c, i) for i in range(min(B, c) + 1))
    if strategy == "st" or (strategy == "v-minus-b" and (Q or 2 * B <= g.n)):
        if not Q:
            return math.comb(len(S) * len(T), min(B, len(S) * len(T)))
        return _isolated_estimate(g, B, S, T, False)
    if strategy == "v-minus-b":
        return 1
    if strategy == "matching":
        src = [s for c in _class_reps(g, "source", B) for s in c]
        snk = [t for c in _class_reps(g, "sink", B) for t in c]
        if not Q:
            return math.comb(len(src) * len(snk), min(B, len(src) * len(snk)))
        return _isolated_estimate(g, B, src, snk, True)
    raise ValueError(f"unknown strategy {strategy!r}")


FPT_STRATEGIES = ("v-minus-b", "matching", "st")

_SOLVERS = {
    "oracle": brute_force,
    "st": solve_by_st,
    "v-minus-b": solve_by_v_minus_b,
    "matching": solve_by_matching,
}


def solve(
    g: Dag, B: int, strategy: Strategy = "auto", max_candidates: int | None = DEFAULT_MAX_CANDIDATES
) -> SolveOutcome:
    """Solve MCI exactly with the requested (or cheapest estimated) strategy."""
    if B < 0:
        raise PreconditionError(f"budget must be non-negative, got {B}")
    if strategy == "auto":
        if g.n > 1 and B >= classify(g).threshold:
            return SolveOutcome(augment_strongly_connected(g, B), "tarjan", None, 1)
        if g.n <= 1:
            return _trivial(g, "tarjan")
        costs = {s: estimate(g, B, s) for s in FPT_STRATEGIES}
        strategy = min(FPT_STRATEGIES, key=lambda s: costs[s])
        if max_candidates is not None and costs[strategy] > max_candidates:
            if estimate(g, B, "oracle") <= max_candidates:
                strategy = "oracle"
    try:
        solver = _SOLVERS[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}") from None
    return solver(g, B, max_candidates)
