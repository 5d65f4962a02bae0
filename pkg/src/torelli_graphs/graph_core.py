"""Genus-decorated half-edge multigraphs with labelled legs.

A graph is stored as vertex genera, a halfedge-to-vertex incidence map, a
pairing involution on halfedges (a matched pair is an edge, a pair on one
vertex is a loop), and an injective map from marking labels to unpaired
halfedges (legs).  An unpaired, unlabelled halfedge is a branch point: it
records where an edge was cut and keeps its id, so cutting and regluing
round-trips exactly.

Graphs are immutable after construction and always connected.  Edge ids are
the sorted pair of their two halfedge ids.
"""

from __future__ import annotations

import itertools
from collections import Counter, deque
from dataclasses import dataclass
from math import factorial

MAX_GENUS = 1 << 16


class GraphError(Exception):
    """Base class for graph errors."""


class StructuralError(GraphError):
    """Malformed half-edge data: dangling halfedge, broken involution, ..."""


class DomainError(GraphError):
    """Operation applied outside its domain."""


# ---------------------------------------------------------------------------
# Raw representation and canonical labelling.
#
# For algorithmic work a graph is flattened to a "raw" tuple
#     (genera, legs, branch, edges)
# with vertices renamed 0..k-1:
#     genera : tuple[int, ...]                  genus per vertex
#     legs   : tuple[(label, vertex), ...]      sorted by label
#     branch : tuple[int, ...]                  branch-point count per vertex
#     edges  : tuple[(u, v), ...]               u <= v, sorted, loops as (u, u)
# ---------------------------------------------------------------------------

Raw = tuple[tuple, tuple, tuple, tuple]


@dataclass(frozen=True)
class CanonResult:
    """Canonical labelling of a raw graph plus its automorphism data."""

    key: bytes
    order: tuple  # order[pos] = original vertex index
    vertex_aut_order: int
    halfedge_aut_order: int
    vertex_orbits: tuple  # tuple of frozensets of original indices
    vertex_generators: tuple  # permutations as tuples, perm[i] = image of i

    @property
    def labeling(self) -> dict:
        """Original vertex index -> canonical position."""
        return {orig: pos for pos, orig in enumerate(self.order)}


def _adjacency(k: int, edges) -> list:
    """Non-loop adjacency with multiplicities: per vertex, [(nbr, mult), ...]."""
    mult: dict = {}
    for e in edges:
        if e[0] != e[1]:
            mult[e] = mult.get(e, 0) + 1
    adj = [[] for _ in range(k)]
    for (u, v), m in mult.items():
        adj[u].append((v, m))
        adj[v].append((u, m))
    return adj


def _compress(keys) -> list:
    order = {c: i for i, c in enumerate(sorted(set(keys)))}
    return [order[c] for c in keys]


def _refine(k: int, color_ids: list, adj) -> list:
    """Iterated neighbourhood refinement; stable once class count stops growing."""
    nclasses = len(set(color_ids))
    while nclasses < k:
        keys = [
            (color_ids[v], tuple(sorted((color_ids[u], m) for u, m in adj[v])))
            for v in range(k)
        ]
        color_ids = _compress(keys)
        n2 = len(set(color_ids))
        if n2 == nclasses:
            break
        nclasses = n2
    return color_ids


def _certificate(order, static, edges) -> tuple:
    pos = {orig: i for i, orig in enumerate(order)}
    vs = tuple(static[orig] for orig in order)
    es = []
    for u, v in edges:
        a, b = pos[u], pos[v]
        es.append((a, b) if a <= b else (b, a))
    es.sort()
    return (vs, tuple(es))


def _serialize(order, raw: Raw, tags) -> bytes:
    genera, legs, branch, edges = raw
    pos = {orig: i for i, orig in enumerate(order)}
    k = len(genera)
    g_part = ",".join(str(genera[orig]) for orig in order)
    l_part = ",".join(f"{lab}:{pos[v]}" for lab, v in sorted(legs))
    b_items = sorted((pos[v], c) for v, c in enumerate(branch) if c)
    b_part = ",".join(f"{p}:{c}" for p, c in b_items)
    es = sorted(
        (pos[u], pos[v]) if pos[u] <= pos[v] else (pos[v], pos[u]) for u, v in edges
    )
    e_part = ",".join(f"{u}-{v}" for u, v in es)
    s = f"TG1;k={k};g={g_part};l={l_part};b={b_part};e={e_part}"
    if tags is not None:
        t_part = ",".join(f"{pos[v]}:{tags[v]}" for v in sorted(range(k), key=pos.get))
        s += f";t={t_part}"
    return s.encode("ascii")


def raw_canonical_key(raw: Raw, tags=None) -> bytes:
    return canonicalize_raw(raw, tags).key


def canonicalize_raw(raw: Raw, tags=None) -> CanonResult:
    """Canonical labelling by colour refinement plus backtracking.

    Branches over the smallest non-singleton colour class; all branches are
    explored, so the minimal certificate is isomorphism-invariant and the
    labellings achieving it form a coset of the vertex automorphism group.
    """
    genera, legs, branch, edges = raw
    k = len(genera)
    legs_at = [() for _ in range(k)]
    for lab, v in legs:
        legs_at[v] += (lab,)
    loops = [0] * k
    for u, v in edges:
        if u == v:
            loops[u] += 1
    if tags is None:
        static = tuple(
            (0, genera[i], tuple(sorted(legs_at[i])), branch[i]) for i in range(k)
        )
    else:
        static = tuple(
            (tags[i], genera[i], tuple(sorted(legs_at[i])), branch[i])
            for i in range(k)
        )
    adj = _adjacency(k, edges)
    base = _compress([(static[i], loops[i]) for i in range(k)])
    colors = _refine(k, base, adj)

    if len(set(colors)) == k:
        # discrete refinement pins every vertex: trivial vertex symmetries
        order = tuple(sorted(range(k), key=colors.__getitem__))
        kernel = _kernel_order(edges, branch)
        return CanonResult(
            key=_serialize(order, raw, tags),
            order=order,
            vertex_aut_order=1,
            halfedge_aut_order=kernel,
            vertex_orbits=tuple(frozenset((v,)) for v in range(k)),
            vertex_generators=(),
        )

    leaves: list = []

    def descend(color_ids):
        classes: dict = {}
        for v, c in enumerate(color_ids):
            classes.setdefault(c, []).append(v)
        big = [(len(vs), c, vs) for c, vs in classes.items() if len(vs) > 1]
        if not big:
            order = tuple(sorted(range(k), key=color_ids.__getitem__))
            leaves.append(order)
            return
        _, _, target = min(big, key=lambda t: (t[0], t[1]))
        for v in target:
            split = [(c, 1 if u == v else 0) for u, c in enumerate(color_ids)]
            descend(_refine(k, _compress(split), adj))

    descend(colors)

    best = None
    achievers = []
    for order in leaves:
        cert = _certificate(order, static, edges)
        if best is None or cert < best:
            best = cert
            achievers = [order]
        elif cert == best:
            achievers.append(order)

    canonical_order = achievers[0]
    # automorphisms: pair each achiever with the first one
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    gens = []
    for other in achievers[1:]:
        perm = [0] * k
        for p in range(k):
            perm[canonical_order[p]] = other[p]
        gens.append(tuple(perm))
        for a, b in zip(canonical_order, other):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    orbit_map: dict = {}
    for v in range(k):
        orbit_map.setdefault(find(v), []).append(v)
    orbits = tuple(frozenset(vs) for vs in orbit_map.values())

    kernel = _kernel_order(edges, branch)
    return CanonResult(
        key=_serialize(canonical_order, raw, tags),
        order=canonical_order,
        vertex_aut_order=len(achievers),
        halfedge_aut_order=len(achievers) * kernel,
        vertex_orbits=orbits,
        vertex_generators=tuple(gens),
    )


def _kernel_order(edges, branch) -> int:
    """Halfedge automorphisms fixing every vertex: parallel-edge permutations,
    loop permutations and flips, branch-point permutations."""
    kernel = 1
    for (u, v), m in Counter(edges).items():
        kernel *= factorial(m)
        if u == v:
            kernel *= 1 << m
    for c in branch:
        kernel *= factorial(c)
    return kernel


def raw_from_key(key: bytes) -> Raw:
    """Parse an untagged canonical key back into a raw graph."""
    text = key.decode("ascii")
    parts = text.split(";")
    if parts[0] != "TG1":
        raise StructuralError(f"not a graph key: {text[:40]!r}")
    fields = dict(p.split("=", 1) for p in parts[1:])
    k = int(fields["k"])
    genera = tuple(int(x) for x in fields["g"].split(",")) if fields["g"] else ()
    legs = tuple(
        (int(a), int(b))
        for a, b in (item.split(":") for item in fields["l"].split(",") if item)
    )
    branch = [0] * k
    for item in fields["b"].split(","):
        if item:
            p, c = item.split(":")
            branch[int(p)] = int(c)
    edges = tuple(
        (int(u), int(v))
        for u, v in (item.split("-") for item in fields["e"].split(",") if item)
    )
    return (genera, legs, tuple(branch), edges)


# ---------------------------------------------------------------------------
# Connectivity and bridges on raw edge lists.
# ---------------------------------------------------------------------------

def is_connected_edges(k: int, edges) -> bool:
    if k == 0:
        return False
    seen = [False] * k
    seen[0] = True
    stack = [0]
    adj = [[] for _ in range(k)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    count = 1
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if not seen[u]:
                seen[u] = True
                count += 1
                stack.append(u)
    return count == k


def bridge_edge_indices(k: int, edges) -> set:
    """Indices of non-loop edges whose deletion disconnects the graph.

    Iterative lowlink search; parallel edges are distinct ids so a doubled
    edge is never a bridge.
    """
    adj = [[] for _ in range(k)]
    for idx, (u, v) in enumerate(edges):
        if u != v:
            adj[u].append((v, idx))
            adj[v].append((u, idx))
    pre = [-1] * k
    low = [0] * k
    bridges: set = set()
    counter = itertools.count()
    for root in range(k):
        if pre[root] != -1:
            continue
        stack = [(root, -1, iter(adj[root]))]
        pre[root] = low[root] = next(counter)
        while stack:
            v, in_edge, it = stack[-1]
            advanced = False
            for u, idx in it:
                if idx == in_edge:
                    continue
                if pre[u] == -1:
                    pre[u] = low[u] = next(counter)
                    stack.append((u, idx, iter(adj[u])))
                    advanced = True
                    break
                low[v] = min(low[v], pre[u])
            if not advanced:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    low[p] = min(low[p], low[v])
                    if low[v] > pre[p]:
                        bridges.add(in_edge)
    return bridges


# ---------------------------------------------------------------------------
# The graph class.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AutomorphismGroup:
    """Automorphisms fixing every leg label.

    ``order`` counts halfedge-level automorphisms: vertex symmetries times
    permutations of parallel edges, loop flips and swaps, and permutations
    of branch points sharing a vertex.  Generators are given by their vertex
    action only.
    """

    order: int
    vertex_order: int
    vertex_generators: tuple
    vertex_orbits: tuple


class StableGraph:
    __slots__ = (
        "_genus", "_hvertex", "_mate", "_legs",
        "_h_at", "_edges", "_branch", "_canon",
    )

    def __init__(self, vertices, halfedges, edges, legs):
        vitems = list(vertices.items() if isinstance(vertices, dict) else vertices)
        hitems = list(halfedges.items() if isinstance(halfedges, dict) else halfedges)
        genus = dict(vitems)
        hvertex = dict(hitems)
        if not genus:
            raise StructuralError("graph needs at least one vertex")
        if len(genus) != len(vitems):
            raise StructuralError("duplicate vertex id")
        if len(hvertex) != len(hitems):
            raise StructuralError("duplicate halfedge id")
        for v, g in genus.items():
            if not (0 <= g <= MAX_GENUS):
                raise StructuralError(f"vertex {v}: genus {g} out of range")
        for h, v in hvertex.items():
            if v not in genus:
                raise StructuralError(f"halfedge {h} dangles from unknown vertex {v}")
        mate: dict = {}
        for h1, h2 in edges:
            if h1 == h2:
                raise StructuralError(f"halfedge {h1} paired with itself")
            for h in (h1, h2):
                if h not in hvertex:
                    raise StructuralError(f"edge references unknown halfedge {h}")
                if h in mate:
                    raise StructuralError(f"halfedge {h} in two edge pairs")
            mate[h1] = h2
            mate[h2] = h1
        legmap = {int(lab): h for lab, h in (legs or {}).items()}
        if len(set(legmap.values())) != len(legmap):
            raise StructuralError("two legs on one halfedge")
        for lab, h in legmap.items():
            if h not in hvertex:
                raise StructuralError(f"leg {lab} on unknown halfedge {h}")
            if h in mate:
                raise StructuralError(f"leg {lab} sits on a paired halfedge")
        self._genus = genus
        self._hvertex = hvertex
        self._mate = mate
        self._legs = legmap
        h_at: dict = {v: [] for v in genus}
        for h in sorted(hvertex):
            h_at[hvertex[h]].append(h)
        self._h_at = {v: tuple(hs) for v, hs in h_at.items()}
        seen = set()
        es = []
        for h, m in mate.items():
            if h not in seen:
                seen.add(h)
                seen.add(m)
                es.append((h, m) if h < m else (m, h))
        es.sort()
        self._edges = tuple(es)
        legged = set(legmap.values())
        self._branch = frozenset(
            h for h in hvertex if h not in mate and h not in legged
        )
        self._canon = None
        idx = {v: i for i, v in enumerate(sorted(genus))}
        raw_edges = [(idx[hvertex[a]], idx[hvertex[b]]) for a, b in es]
        raw_edges = [(u, v) if u <= v else (v, u) for u, v in raw_edges]
        if not is_connected_edges(len(genus), raw_edges):
            raise StructuralError("graph is not connected")

    # -- builders -----------------------------------------------------------

    @classmethod
    def build(cls, vertices, edges=(), legs=None, branch_points=()) -> "StableGraph":
        """Build from vertex pairs.

        ``vertices``: mapping vid -> genus or iterable of (vid, genus).
        ``edges``: (u, v) vertex pairs, repeats give parallel edges, u == v loops.
        ``legs``: mapping label -> vid.  ``branch_points``: vids, one stub each.
        """
        vmap = dict(vertices)
        hid = itertools.count()
        hes = []
        epairs = []
        for u, v in edges:
            a, b = next(hid), next(hid)
            hes += [(a, u), (b, v)]
            epairs.append((a, b))
        legmap = {}
        for lab in sorted(legs or {}):
            h = next(hid)
            hes.append((h, (legs or {})[lab]))
            legmap[lab] = h
        for v in branch_points:
            hes.append((next(hid), v))
        return cls(vmap, hes, epairs, legmap)

    @classmethod
    def from_raw(cls, raw: Raw) -> "StableGraph":
        genera, legs, branch, edges = raw
        stubs = [v for v, c in enumerate(branch) for _ in range(c)]
        return cls.build(
            dict(enumerate(genera)),
            edges,
            {lab: v for lab, v in legs},
            stubs,
        )

    @classmethod
    def from_canonical_key(cls, key: bytes) -> "StableGraph":
        """Materialize the canonical representative; vertex ids are canonical
        positions and halfedge ids follow the ``build`` numbering."""
        return cls.from_raw(raw_from_key(key))

    def to_raw(self):
        """Return (raw, vid_order) with vid_order[i] the vertex at raw index i."""
        vids = sorted(self._genus)
        idx = {v: i for i, v in enumerate(vids)}
        genera = tuple(self._genus[v] for v in vids)
        legs = tuple(sorted((lab, idx[self._hvertex[h]]) for lab, h in self._legs.items()))
        branch = [0] * len(vids)
        for h in self._branch:
            branch[idx[self._hvertex[h]]] += 1
        edges = []
        for a, b in self._edges:
            u, v = idx[self._hvertex[a]], idx[self._hvertex[b]]
            edges.append((u, v) if u <= v else (v, u))
        return (genera, legs, tuple(branch), tuple(sorted(edges))), vids

    # -- accessors ----------------------------------------------------------

    def vertices(self) -> list:
        return sorted(self._genus)

    def vertex_genus(self, v) -> int:
        return self._genus[v]

    @property
    def legs(self) -> dict:
        return dict(self._legs)

    def legs_at(self, v) -> tuple:
        return tuple(sorted(l for l, h in self._legs.items() if self._hvertex[h] == v))

    def halfedges(self) -> list:
        return sorted(self._hvertex)

    def vertex_of(self, h):
        return self._hvertex[h]

    def mate(self, h):
        return self._mate.get(h)

    def halfedges_at(self, v) -> tuple:
        return self._h_at[v]

    def valence(self, v) -> int:
        return len(self._h_at[v])

    def edges(self) -> tuple:
        return self._edges

    def edge_vertices(self, edge) -> tuple:
        return (self._hvertex[edge[0]], self._hvertex[edge[1]])

    def is_loop(self, edge) -> bool:
        return self._hvertex[edge[0]] == self._hvertex[edge[1]]

    def loops_at(self, v) -> tuple:
        return tuple(e for e in self._edges if self.is_loop(e) and self._hvertex[e[0]] == v)

    def branch_points(self) -> frozenset:
        return self._branch

    def branch_points_at(self, v) -> tuple:
        return tuple(sorted(h for h in self._branch if self._hvertex[h] == v))

    def n_markings(self) -> int:
        return len(self._legs)

    def __repr__(self):
        return (
            f"StableGraph(g={self.genus()}, vertices={len(self._genus)}, "
            f"edges={len(self._edges)}, legs={len(self._legs)})"
        )

    # -- invariants ---------------------------------------------------------

    def genus(self) -> int:
        """Arithmetic genus: sum of vertex genera plus the first Betti number."""
        return sum(self._genus.values()) + len(self._edges) - len(self._genus) + 1

    def is_stable(self) -> bool:
        return all(
            2 * g - 2 + len(self._h_at[v]) > 0 for v, g in self._genus.items()
        )

    def _canon_result(self) -> CanonResult:
        if self._canon is None:
            raw, _ = self.to_raw()
            self._canon = canonicalize_raw(raw)
        return self._canon

    def canonical_key(self) -> bytes:
        """Equal keys exactly for isomorphic graphs (legs fixed pointwise)."""
        return self._canon_result().key

    def canonical_labeling(self) -> dict:
        """Vertex id -> canonical position."""
        res = self._canon_result()
        _, vids = self.to_raw()
        return {vids[orig]: pos for pos, orig in enumerate(res.order)}

    def automorphisms(self) -> AutomorphismGroup:
        res = self._canon_result()
        _, vids = self.to_raw()
        gens = tuple(
            {vids[i]: vids[p] for i, p in enumerate(perm)}
            for perm in res.vertex_generators
        )
        orbits = tuple(frozenset(vids[i] for i in orb) for orb in res.vertex_orbits)
        return AutomorphismGroup(
            order=res.halfedge_aut_order,
            vertex_order=res.vertex_aut_order,
            vertex_generators=gens,
            vertex_orbits=orbits,
        )

    def vertex_orbits(self) -> tuple:
        return self.automorphisms().vertex_orbits

    # -- connectivity operations --------------------------------------------

    def separating_edges(self) -> frozenset:
        """Non-loop edges whose deletion disconnects the graph."""
        idx = {v: i for i, v in enumerate(sorted(self._genus))}
        pairs = [
            (idx[self._hvertex[a]], idx[self._hvertex[b]]) for a, b in self._edges
        ]
        idxs = bridge_edge_indices(len(idx), pairs)
        return frozenset(self._edges[i] for i in idxs)

    def delete_edges(self, edges) -> list:
        """Drop edges entirely (halfedges removed) and split into components."""
        drop = self._check_edges(edges)
        gone = {h for e in drop for h in e}
        return self._components(gone, keep_as_branch=frozenset())

    def normalize_at(self, edges) -> list:
        """Cut each edge, keeping both halfedges as branch points, then split
        into connected components.  Vertex and halfedge ids are preserved."""
        cut = self._check_edges(edges)
        loose = {h for e in cut for h in e}
        return self._components(loose, keep_as_branch=frozenset(loose))

    def _check_edges(self, edges) -> list:
        out = []
        eset = set(self._edges)
        for e in edges:
            e = tuple(sorted(e))
            if e not in eset:
                raise DomainError(f"unknown edge {e}")
            out.append(e)
        return out

    def _components(self, unpaired: set, keep_as_branch: frozenset) -> list:
        mate = {h: m for h, m in self._mate.items()
                if h not in unpaired and m not in unpaired}
        adj: dict = {v: set() for v in self._genus}
        for h, m in mate.items():
            adj[self._hvertex[h]].add(self._hvertex[m])
        comps = []
        seen: set = set()
        for start in sorted(self._genus):
            if start in seen:
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                v = queue.popleft()
                for u in adj[v]:
                    if u not in comp:
                        comp.add(u)
                        queue.append(u)
            seen |= comp
            comps.append(comp)
        out = []
        for comp in comps:
            vs = {v: self._genus[v] for v in comp}
            hs = []
            for v in comp:
                for h in self._h_at[v]:
                    if h in unpaired and h not in keep_as_branch:
                        continue
                    hs.append((h, v))
            hset = {h for h, _ in hs}
            es = [(a, b) for a, b in self._edges if a in hset and a in mate]
            ls = {lab: h for lab, h in self._legs.items() if h in hset}
            out.append(StableGraph(vs, hs, es, ls))
        return out

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "vertices": [
                {"id": v, "genus": self._genus[v]} for v in sorted(self._genus)
            ],
            "halfedges": [
                {"id": h, "vertex": self._hvertex[h]} for h in sorted(self._hvertex)
            ],
            "edges": [list(e) for e in self._edges],
            "legs": {str(lab): h for lab, h in sorted(self._legs.items())},
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "StableGraph":
        try:
            vertices = {int(v["id"]): int(v["genus"]) for v in data["vertices"]}
            halfedges = [(int(h["id"]), int(h["vertex"])) for h in data["halfedges"]]
            edges = [(int(a), int(b)) for a, b in data["edges"]]
            legs = {int(lab): int(h) for lab, h in data.get("legs", {}).items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise StructuralError(f"bad graph JSON: {exc}") from exc
        return cls(vertices, halfedges, edges, legs)

    def to_dot(self, name: str = "G") -> str:
        lines = [f'graph "{name}" {{']
        for v in sorted(self._genus):
            lines.append(f'  v{v} [label="v{v}:g{self._genus[v]}"];')
        for a, b in self._edges:
            lines.append(f"  v{self._hvertex[a]} -- v{self._hvertex[b]};")
        for lab, h in sorted(self._legs.items()):
            lines.append(f'  leg_{lab} [shape=none, label=""];')
            lines.append(f'  v{self._hvertex[h]} -- leg_{lab} [label="{lab}"];')
        for i, h in enumerate(sorted(self._branch)):
            lines.append(f"  bp_{i} [shape=point];")
            lines.append(f"  v{self._hvertex[h]} -- bp_{i};")
        lines.append("}")
        return "\n".join(lines)
