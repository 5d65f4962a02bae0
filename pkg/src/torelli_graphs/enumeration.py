"""Exhaustive generation of stable graph catalogs and of edge contractions.

Catalogs are generated breadth-first from the one-vertex seeds (every split
of the total genus between vertex genus and loops): splitting a vertex in
all ways adds one edge at a time, and every stable graph contracts along a
spanning tree back to such a seed, so the closure is complete.  Isomorph
rejection goes through canonical keys; a catalog stores keys only and
materializes representatives on demand.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

from .graph_core import (
    DomainError,
    Raw,
    StableGraph,
    canonicalize_raw,
    is_connected_edges,
    raw_canonical_key,
    raw_from_key,
)

DEFAULT_BOUND = 8


class BoundExceededError(DomainError):
    """The requested catalog exceeds the configured complexity bound."""

    def __init__(self, genus: int, markings: int, bound: int):
        self.required_bound = 3 * genus - 3 + markings
        self.bound = bound
        super().__init__(
            f"catalog ({genus},{markings}) needs bound >= {self.required_bound}, "
            f"configured bound is {bound}"
        )


@dataclass
class GraphCatalog:
    """All stable graphs of one (genus, markings) type, up to isomorphism."""

    genus: int
    markings: int
    keys: list  # sorted canonical keys (bytes)
    index: dict = field(repr=False)  # key -> position

    @classmethod
    def from_keys(cls, genus: int, markings: int, keys) -> "GraphCatalog":
        ks = sorted(keys)
        return cls(genus, markings, ks, {k: i for i, k in enumerate(ks)})

    def __len__(self) -> int:
        return len(self.keys)

    def __contains__(self, key) -> bool:
        return key in self.index

    def graph(self, i: int) -> StableGraph:
        return StableGraph.from_canonical_key(self.keys[i])

    def graphs(self) -> Iterator[StableGraph]:
        for key in self.keys:
            yield StableGraph.from_canonical_key(key)


def check_type(genus: int, markings: int) -> None:
    if genus < 0 or markings < 0:
        raise DomainError("genus and markings must be nonnegative")
    if 2 * genus - 2 + markings <= 0:
        raise DomainError(
            f"({genus},{markings}) violates 2g-2+n > 0; no stable graphs exist"
        )


def _seed_raws(genus: int, markings: int) -> list:
    seeds = []
    legs = tuple((i, 0) for i in range(1, markings + 1))
    for h in range(genus + 1):
        loops = genus - h
        if 2 * h - 2 + 2 * loops + markings > 0:
            seeds.append(((h,), legs, (0,), ((0, 0),) * loops))
    return seeds


def _split_children(raw: Raw) -> Iterator[Raw]:
    """All one-edge refinements of ``raw`` obtained by splitting a vertex."""
    genera, legs, branch, edges = raw
    k = len(genera)
    items_at = [[] for _ in range(k)]  # ("e", edge idx, side) or ("l", label)
    for idx, (u, v) in enumerate(edges):
        items_at[u].append(("e", idx, 0))
        if v == u:
            items_at[u].append(("e", idx, 1))
        else:
            items_at[v].append(("e", idx, 1))
    for lab, v in legs:
        items_at[v].append(("l", lab, 0))

    for v in range(k):
        items = items_at[v]
        gv = genera[v]
        if items:
            movable = items[1:]  # items[0] stays with v, kills the side swap
            subsets = itertools.chain.from_iterable(
                itertools.combinations(movable, r) for r in range(len(movable) + 1)
            )
            gsplits = [(gv - g2, g2) for g2 in range(gv + 1)]
        else:
            subsets = [()]
            gsplits = [(gv - g2, g2) for g2 in range(gv + 1) if gv - g2 <= g2]
        subsets = list(subsets)
        for g1, g2 in gsplits:
            for moved in subsets:
                val1 = len(items) - len(moved) + 1
                val2 = len(moved) + 1
                if 2 * g1 - 2 + val1 <= 0 or 2 * g2 - 2 + val2 <= 0:
                    continue
                new_genera = list(genera)
                new_genera[v] = g1
                new_genera.append(g2)
                w = k
                new_edges = [list(e) for e in edges]
                new_legs = dict(legs_to_dict(legs))
                for kind, a, b in moved:
                    if kind == "e":
                        new_edges[a][b] = w
                    else:
                        new_legs[a] = w
                new_edges.append([v, w])
                yield (
                    tuple(new_genera),
                    tuple(sorted((lab, u) for lab, u in new_legs.items())),
                    branch + (0,),
                    tuple(sorted(tuple(sorted(e)) for e in new_edges)),
                )


def legs_to_dict(legs) -> dict:
    return {lab: v for lab, v in legs}


def enumerate_stable_graphs(
    genus: int, markings: int, bound: int = DEFAULT_BOUND
) -> GraphCatalog:
    """Complete duplicate-free catalog of stable (genus, markings) graphs."""
    check_type(genus, markings)
    max_edges = 3 * genus - 3 + markings
    if max_edges > bound:
        raise BoundExceededError(genus, markings, bound)

    seen: set = set()
    frontier: list = []
    for raw in _seed_raws(genus, markings):
        key = raw_canonical_key(raw)
        if key not in seen:
            seen.add(key)
            frontier.append(raw)
    while frontier:
        nxt = []
        for raw in frontier:
            if len(raw[3]) >= max_edges:
                continue
            for child in _split_children(raw):
                key = raw_canonical_key(child)
                if key not in seen:
                    seen.add(key)
                    nxt.append(raw_from_key(key))
        frontier = nxt
    return GraphCatalog.from_keys(genus, markings, seen)


# ---------------------------------------------------------------------------
# Edge contraction.
# ---------------------------------------------------------------------------

def raw_contract(raw: Raw, edge_indices) -> tuple:
    """Contract the given edges of a raw graph.

    Returns (child raw, classes) where classes[i] is the sorted tuple of
    parent vertices merged into child vertex i.  Non-loop edges merge their
    endpoints and genera add; an edge internal to an already-merged class
    (loops included) is deleted and bumps the class genus by one, so the
    total genus is preserved.
    """
    genera, legs, branch, edges = raw
    k = len(genera)
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    contracted = set(edge_indices)
    for idx in contracted:
        u, v = edges[idx]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    reps = sorted({find(v) for v in range(k)})
    new_id = {r: i for i, r in enumerate(reps)}
    classes = [[] for _ in reps]
    for v in range(k):
        classes[new_id[find(v)]].append(v)
    new_genera = [0] * len(reps)
    for i, cls in enumerate(classes):
        new_genera[i] = sum(genera[v] for v in cls)
    new_edges = []
    for idx, (u, v) in enumerate(edges):
        if idx not in contracted:
            a, b = new_id[find(u)], new_id[find(v)]
            new_edges.append((a, b) if a <= b else (b, a))
    # contracted edges beyond a spanning tree of their class are cycles and
    # bump the class genus, conserving the total
    if len(contracted) > k - len(reps):
        per_class = Counter()
        for idx in contracted:
            per_class[new_id[find(edges[idx][0])]] += 1
        for i, cls in enumerate(classes):
            if per_class[i]:
                new_genera[i] += per_class[i] - (len(cls) - 1)
    new_branch = [0] * len(reps)
    for v in range(k):
        new_branch[new_id[find(v)]] += branch[v]
    new_legs = tuple(sorted((lab, new_id[find(v)]) for lab, v in legs))
    child = (
        tuple(new_genera),
        new_legs,
        tuple(new_branch),
        tuple(sorted(new_edges)),
    )
    return child, tuple(tuple(c) for c in classes)


def contract_edges(graph: StableGraph, edges) -> StableGraph:
    """Contract edges of a graph: endpoints merge (genera add), loops are
    deleted and bump their vertex's genus.  Total genus is preserved."""
    todo = []
    eset = {e: i for i, e in enumerate(graph.edges())}
    for e in edges:
        e = tuple(sorted(e))
        if e not in eset:
            raise DomainError(f"unknown edge {e}")
        todo.append(e)
    if not todo:
        return graph
    raw, vids = graph.to_raw()
    # raw edges are sorted; recover indices by vertex pairs with multiplicity
    idx_of = {v: i for i, v in enumerate(vids)}
    pair_pool: dict = {}
    for i, (u, v) in enumerate(raw[3]):
        pair_pool.setdefault((u, v), []).append(i)
    indices = []
    for h1, h2 in todo:
        u, v = idx_of[graph.vertex_of(h1)], idx_of[graph.vertex_of(h2)]
        pair = (u, v) if u <= v else (v, u)
        indices.append(pair_pool[pair].pop())
    child, classes = raw_contract(raw, indices)
    out = StableGraph.from_raw(child)
    return out


# ---------------------------------------------------------------------------
# Degenerations.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Degeneration:
    """A contraction witness: contracting ``contracted_indices`` in the
    catalog representative of ``target`` yields a graph isomorphic to the
    representative of ``source``.  ``vertex_map`` sends each source vertex
    (canonical position) to the set of target vertices merging onto it."""

    source: bytes
    target: bytes
    contracted_indices: frozenset
    vertex_map: tuple  # tuple of (source vertex, frozenset of target vertices)

    def mapping(self) -> dict:
        return {v: m for v, m in self.vertex_map}

    def contracted_edge_ids(self) -> frozenset:
        # representative halfedge ids follow the build numbering: edge i
        # carries halfedges (2i, 2i+1)
        return frozenset((2 * i, 2 * i + 1) for i in self.contracted_indices)


def iter_degenerations(
    catalog: GraphCatalog, subsets: str = "all"
) -> Iterator[Degeneration]:
    """Contraction records for the catalog.

    ``subsets="all"`` walks every edge subset of every graph, including the
    empty one (the identity degeneration).  ``subsets="single"`` walks only
    one-edge contractions; every multi-edge contraction factors through
    those, which is enough for closure checks.
    """
    if subsets not in ("all", "single"):
        raise ValueError("subsets must be 'all' or 'single'")
    for target_key in catalog.keys:
        raw = raw_from_key(target_key)
        n_edges = len(raw[3])
        if subsets == "all":
            pools = itertools.chain.from_iterable(
                itertools.combinations(range(n_edges), r)
                for r in range(n_edges + 1)
            )
        else:
            pools = ((i,) for i in range(n_edges))
        for chosen in pools:
            child, classes = raw_contract(raw, chosen)
            res = canonicalize_raw(child)
            source_key = res.key
            if source_key not in catalog.index:
                raise DomainError(
                    "contraction left the catalog; it is incomplete"
                )
            vmap = tuple(
                (pos, frozenset(classes[orig]))
                for pos, orig in enumerate(res.order)
            )
            yield Degeneration(
                source=source_key,
                target=target_key,
                contracted_indices=frozenset(chosen),
                vertex_map=vmap,
            )


def degenerations_between(catalog: GraphCatalog) -> list:
    """Materialized list of every degeneration record (all edge subsets)."""
    return list(iter_degenerations(catalog, subsets="all"))
