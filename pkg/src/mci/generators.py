"""Instance factories: the exact-cover reduction, random DAGs, trees and small-graph catalogs."""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations, permutations

from .errors import PreconditionError
from .graph import Dag, Edge


@dataclass(frozen=True)
class X3cInstance:
    """Exact cover by 3-sets over elements ``0..3q-1``."""

    q: int
    subsets: tuple[tuple[int, int, int], ...]

    @property
    def elements(self) -> range:
        return range(3 * self.q)

    @property
    def m(self) -> int:
        return len(self.subsets)

    def has_exact_cover(self) -> bool:
        full = set(self.elements)
        for pick in combinations(self.subsets, self.q):
            if set().union(*pick) == full:
                return True
        return False


@dataclass(frozen=True)
class ReductionOutput:
    graph: Dag
    budget: int
    target: int
    labels: tuple[tuple[str, str], ...]  # (role, name) per vertex id


def x3c_target(q: int, m: int) -> int:
    return (7 * q - 1) ** 2 + 7 * q * (m - q)


def gen_x3c_instance(inst: X3cInstance) -> ReductionOutput:
    """Build the MCI instance whose optimum reaches the target iff ``inst`` has an exact cover.

    Vertex layout: element vertices, subset vertices, internal tree vertices,
    and the root ``v`` last. Each subset vertex points to its three element
    vertices; element vertices feed a binary tree whose edges all point
    toward the root.
    """
    q = inst.q
    if q < 1:
        raise PreconditionError("q must be at least 1")
    if inst.m < q:
        raise PreconditionError(f"need m >= q, got m={inst.m}, q={q}")
    n_elem = 3 * q
    for i, y in enumerate(inst.subsets):
        if len(y) != 3:
            raise PreconditionError(f"subset {i} has {len(y)} elements, expected 3")
        if len(set(y)) != 3:
            raise PreconditionError(f"subset {i} repeats an element: {y}")
        if not all(0 <= x < n_elem for x in y):
            raise PreconditionError(f"subset {i} has an element outside [0, {n_elem})")

    labels = [("element", f"x{j + 1}") for j in range(n_elem)]
    labels += [("subset", f"y{i + 1}") for i in range(inst.m)]
    edges: list[Edge] = []
    for i, y in enumerate(inst.subsets):
        edges += [(n_elem + i, x) for x in sorted(y)]

    # pair left to right per level; an odd vertex out moves up unchanged
    first_tree = n_elem + inst.m
    next_id = first_tree
    level = list(range(n_elem))
    while len(level) > 1:
        merged = []
        for j in range(0, len(level) - 1, 2):
            edges += [(level[j], next_id), (level[j + 1], next_id)]
            merged.append(next_id)
            next_id += 1
        if len(level) % 2:
            merged.append(level[-1])
        level = merged
    labels += [("tree", f"v{i + 1}") for i in range(next_id - first_tree - 1)]
    labels.append(("root", "v"))
    g = Dag.from_edges(len(labels), edges)
    return ReductionOutput(g, q, x3c_target(q, inst.m), tuple(labels))


def _random_triple(rng: random.Random, n_elem: int, load: list[int]) -> tuple[int, int, int] | None:
    free = [x for x in range(n_elem) if load[x] < 3]
    if len(free) < 3:
        return None
    return tuple(sorted(rng.sample(free, 3)))


def gen_x3c_planted(q: int, m: int, yes: bool, seed: int) -> tuple[X3cInstance, ReductionOutput]:
    """Random instance with (``yes``) or provably without an exact cover.

    Elements occur in at most three subsets. Yes-instances hide a random
    partition of the elements among the subsets. No-instances are resampled
    until an exhaustive check finds no cover; when ``m > q`` they also cover
    every element, so that subset vertices are exactly the sources.
    """
    if not (m >= q >= 1):
        raise PreconditionError(f"need m >= q >= 1, got q={q}, m={m}")
    if not yes and q == 1:
        raise PreconditionError("every valid triple over 3 elements is an exact cover; no q=1 no-instance exists")
    if 3 * m > 9 * q:
        raise PreconditionError("more subsets than the three-occurrence bound allows")
    rng = random.Random(seed)
    n_elem = 3 * q
    for _ in range(10_000):
        load = [0] * n_elem
        subsets: list[tuple[int, int, int]] = []
        if yes:
            perm = list(range(n_elem))
            rng.shuffle(perm)
            subsets = [tuple(sorted(perm[3 * i : 3 * i + 3])) for i in range(q)]
            for y in subsets:
                for x in y:
                    load[x] += 1
        while len(subsets) < m:
            y = _random_triple(rng, n_elem, load)
            if y is None:
                break
            subsets.append(y)
            for x in y:
                load[x] += 1
        if len(subsets) < m:
            continue
        rng.shuffle(subsets)
        inst = X3cInstance(q, tuple(subsets))
        if yes:
            return inst, gen_x3c_instance(inst)
        if m > q and min(load) == 0:
            continue
        if not inst.has_exact_cover():
            return inst, gen_x3c_instance(inst)
    raise PreconditionError(f"could not generate a {'yes' if yes else 'no'}-instance for q={q}, m={m}")


def gen_random_dag(n: int, edge_probability: float, seed: int) -> Dag:
    """Random topological order, then each forward pair kept with the given probability."""
    if not 0 <= edge_probability <= 1:
        raise ValueError("edge_probability must lie in [0, 1]")
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    edges = [
        (order[i], order[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < edge_probability
    ]
    return Dag.from_edges(n, edges)


def gen_single_source_tree(n: int, seed: int) -> Dag:
    """Random arborescence rooted at 0 with every edge directed away from the root."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    return Dag.from_edges(n, [(rng.randrange(v), v) for v in range(1, n)])


def gen_single_sink_tree(n: int, seed: int) -> Dag:
    """Mirror of :func:`gen_single_source_tree`: every edge points toward the root 0."""
    t = gen_single_source_tree(n, seed)
    return Dag.from_edges(n, [(v, u) for u, v in t.edges])


def enumerate_dags(n: int) -> list[Dag]:
    """One representative of every isomorphism class of DAGs on ``n`` vertices.

    Every DAG is isomorphic to one whose edges all go from lower to higher id,
    so it suffices to canonicalise those ``2^(n(n-1)/2)`` graphs.
    """
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    perms = list(permutations(range(n)))
    seen: set[tuple[Edge, ...]] = set()
    out = []
    for mask in range(1 << len(pairs)):
        edges = [pairs[b] for b in range(len(pairs)) if mask >> b & 1]
        canon = min(tuple(sorted((p[u], p[v]) for u, v in edges)) for p in perms)
        if canon in seen:
            continue
        seen.add(canon)
        out.append(Dag.from_edges(n, canon))
    return out
