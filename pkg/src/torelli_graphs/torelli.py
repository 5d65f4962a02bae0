"""Compactified-Jacobian class keys for stable graphs.

The pipeline: forget markings, cut every separating edge, stabilize each
piece (contract genus-zero vertices of valence one or two), drop genus-zero
pieces.  What remains, together with the partition of its edges into
C1-sets and a per-piece moduli-positivity flag, determines the class of the
polarized degenerate Jacobian; two graphs land in one class exactly when
these data match under a genus-preserving bijection of normalized vertices
(C1-equivalence).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .graph_core import (
    DomainError,
    StableGraph,
    canonicalize_raw,
)
from .contraction import AxisGraph, classify_axis_points, fiber_strata


# ---------------------------------------------------------------------------
# Stabilization and polystable reduction.
# ---------------------------------------------------------------------------

def _strip_decorations(graph: StableGraph) -> StableGraph:
    """Drop legs and branch points, keeping vertex and halfedge ids."""
    if not graph.legs and not graph.branch_points():
        return graph
    keep = set(h for e in graph.edges() for h in e)
    return StableGraph(
        {v: graph.vertex_genus(v) for v in graph.vertices()},
        [(h, graph.vertex_of(h)) for h in graph.halfedges() if h in keep],
        graph.edges(),
        {},
    )


def stabilize_component(graph: StableGraph) -> StableGraph:
    """Contract rational tails and bridges until none remain.

    Genus-zero vertices of valence one merge into their neighbour; valence
    two fuses the two incident edges (a double edge to one neighbour leaves
    a loop).  An isolated genus-zero vertex with a single loop is final.
    Surviving vertices keep their ids.  The result class is independent of
    the contraction order.
    """
    if graph.legs or graph.branch_points():
        raise DomainError("stabilization input must carry no legs or branch points")
    genus = {v: graph.vertex_genus(v) for v in graph.vertices()}
    hvertex = {h: graph.vertex_of(h) for h in graph.halfedges()}
    mate = {}
    for a, b in graph.edges():
        mate[a] = b
        mate[b] = a
    h_at = {v: set() for v in genus}
    for h, v in hvertex.items():
        h_at[v].add(h)

    def contractible():
        for v in sorted(genus):
            if genus[v] or len(h_at[v]) > 2:
                continue
            hs = sorted(h_at[v])
            if len(hs) == 2 and mate[hs[0]] == hs[1]:
                continue  # isolated loop: irreducible genus one, final
            if len(h_at) == 1:
                continue  # single bare genus-zero vertex, final
            return v, hs
        return None

    step = contractible()
    while step is not None:
        v, hs = step
        if len(hs) == 1:
            h = hs[0]
            m = mate[h]
            u = hvertex[m]
            h_at[u].discard(m)
            for x in (h, m):
                del hvertex[x]
                del mate[x]
            del genus[v]
            del h_at[v]
        else:
            h1, h2 = hs
            m1, m2 = mate[h1], mate[h2]
            mate[m1] = m2
            mate[m2] = m1
            for x in (h1, h2):
                del hvertex[x]
                del mate[x]
            del genus[v]
            del h_at[v]
        step = contractible()
    edges = []
    seen = set()
    for h, m in mate.items():
        if h not in seen:
            seen.update((h, m))
            edges.append((h, m) if h < m else (m, h))
    return StableGraph(genus, list(hvertex.items()), edges, {})


def stabilize(components) -> "PolystableGraph":
    """Stabilize a disjoint union of connected legless graphs."""
    return PolystableGraph(tuple(stabilize_component(c) for c in components))


class PolystableGraph:
    """Disjoint union of bridgeless pieces, each either stable of genus >= 2,
    an irreducible genus-one vertex (bare genus one, or genus zero with one
    loop), or a bare genus-zero vertex."""

    __slots__ = ("components",)

    def __init__(self, components):
        comps = tuple(components)
        for c in comps:
            if c.legs or c.branch_points():
                raise DomainError("polystable pieces carry no legs or branch points")
            if c.separating_edges():
                raise DomainError("polystable pieces have no separating edges")
            g = c.genus()
            if g >= 2:
                if not c.is_stable():
                    raise DomainError("genus >= 2 piece must be stable")
            elif g == 1:
                if len(c.vertices()) != 1:
                    raise DomainError("genus-one piece must be irreducible")
            else:
                if len(c.vertices()) != 1 or c.edges():
                    raise DomainError("genus-zero piece must be a bare vertex")
        self.components = comps

    def genus(self) -> int:
        return sum(c.genus() for c in self.components)

    def vertex_count(self) -> int:
        return sum(len(c.vertices()) for c in self.components)

    def sorted_components(self) -> tuple:
        return tuple(sorted(self.components, key=lambda c: c.canonical_key()))

    def moduli_positive_flags(self) -> tuple:
        """Per component (in sorted order): some vertex has 3g - 3 + valence > 0."""
        return tuple(
            any(
                3 * c.vertex_genus(v) - 3 + c.valence(v) > 0 for v in c.vertices()
            )
            for c in self.sorted_components()
        )

    def __repr__(self):
        return f"PolystableGraph({[c.genus() for c in self.components]})"


def pst(graph: StableGraph) -> PolystableGraph:
    """Forget markings, normalize at all separating edges, stabilize, and
    drop the genus-zero pieces.  Vertex ids of survivors are preserved."""
    bare = _strip_decorations(graph)
    pieces = bare.normalize_at(bare.separating_edges())
    out = []
    for piece in pieces:
        reduced = stabilize_component(_strip_decorations(piece))
        if reduced.genus() > 0:
            out.append(reduced)
    return PolystableGraph(tuple(out))


# ---------------------------------------------------------------------------
# C1-sets.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class C1Partition:
    """Partition of a bridgeless graph's edges: removing any member of a
    block makes exactly the other members separating."""

    host: StableGraph
    blocks: tuple  # frozensets of edge ids

    def block_of(self, edge) -> frozenset:
        e = tuple(sorted(edge))
        for b in self.blocks:
            if e in b:
                return b
        raise KeyError(edge)


def c1_sets(graph: StableGraph) -> C1Partition:
    """Compute the C1 partition of a connected bridgeless graph."""
    sep = graph.separating_edges()
    if sep:
        raise DomainError(
            f"graph has separating edge {sorted(sep)[0]}; C1-sets are undefined"
        )
    sets = {}
    for e in graph.edges():
        pieces = graph.delete_edges([e])
        inner = frozenset().union(*(p.separating_edges() for p in pieces))
        sets[e] = inner | {e}
    blocks = []
    seen = set()
    for e in graph.edges():
        if e in seen:
            continue
        block = sets[e]
        for q in block:
            if sets[q] != block:
                raise DomainError(
                    f"edge sets at {e} and {q} disagree; C1 partition ill-defined"
                )
        seen |= block
        blocks.append(block)
    blocks.sort(key=lambda b: sorted(b))
    return C1Partition(graph, tuple(blocks))


def _block_degrees(graph: StableGraph, block) -> dict:
    """Halfedges at each vertex lying in the block's edges."""
    deg: Counter = Counter()
    for a, b in block:
        deg[graph.vertex_of(a)] += 1
        deg[graph.vertex_of(b)] += 1
    return dict(deg)


# ---------------------------------------------------------------------------
# C1-equivalence and class keys.
# ---------------------------------------------------------------------------

def _component_c1_data(piece: StableGraph):
    part = c1_sets(piece)
    return [( _block_degrees(piece, b), len(b)) for b in part.blocks]


def _c1_flat_data(poly: PolystableGraph):
    """Flatten to indexed vertices and blocks.

    Returns (verts, blocks, profile_of) with verts a list of
    (component index, vertex id, genus, valence), blocks a list of
    (size, {vertex index: halfedge count}), and profile_of[i] the sorted
    (count, size) multiset of blocks at vertex i.
    """
    verts = []
    vindex = {}
    for ci, c in enumerate(poly.components):
        for v in sorted(c.vertices()):
            vindex[(ci, v)] = len(verts)
            verts.append((ci, v, c.vertex_genus(v), c.valence(v)))
    blocks = []
    for ci, c in enumerate(poly.components):
        for block in c1_sets(c).blocks:
            deg = _block_degrees(c, block)
            blocks.append(
                (len(block), {vindex[(ci, v)]: d for v, d in deg.items()})
            )
    profile_of = [[] for _ in verts]
    for size, deg in blocks:
        for i, d in deg.items():
            profile_of[i].append((d, size))
    return verts, blocks, [tuple(sorted(p)) for p in profile_of]


def c1_equivalent(a: PolystableGraph, b: PolystableGraph):
    """Search for a genus-preserving vertex bijection matching the C1 data.

    The bijection must transport every block's per-vertex halfedge counts
    onto some block of the other side, bijectively on blocks; the edge
    pairings within a block are free to differ.  Returns (True, witness) or
    (False, None); the witness maps (component index, vertex id) pairs.
    """
    averts, ablocks, aprof = _c1_flat_data(a)
    bverts, bblocks, bprof = _c1_flat_data(b)
    if len(averts) != len(bverts) or len(ablocks) != len(bblocks):
        return False, None

    asig = [(averts[i][2], averts[i][3], aprof[i]) for i in range(len(averts))]
    bsig = [(bverts[j][2], bverts[j][3], bprof[j]) for j in range(len(bverts))]
    by_sig: dict = {}
    for j, s in enumerate(bsig):
        by_sig.setdefault(s, []).append(j)
    if Counter(asig) != Counter(bsig):
        return False, None

    target = Counter(
        (size, tuple(sorted(deg.items()))) for size, deg in bblocks
    )
    order = sorted(range(len(averts)), key=lambda i: (asig[i], i))
    assign = [-1] * len(averts)
    used = [False] * len(bverts)

    def leaf_check() -> bool:
        got = Counter(
            (size, tuple(sorted((assign[i], d) for i, d in deg.items())))
            for size, deg in ablocks
        )
        return got == target

    def search(pos) -> bool:
        if pos == len(order):
            return leaf_check()
        i = order[pos]
        for j in by_sig[asig[i]]:
            if not used[j]:
                used[j] = True
                assign[i] = j
                if search(pos + 1):
                    return True
                used[j] = False
                assign[i] = -1
        return False

    if not search(0):
        return False, None
    witness = {
        (averts[i][0], averts[i][1]): (bverts[assign[i]][0], bverts[assign[i]][1])
        for i in range(len(averts))
    }
    return True, witness


def component_class_key(piece: StableGraph) -> bytes:
    """Canonical key of one piece's C1 incidence structure: vertices coloured
    by genus against blocks, with the block's halfedge count at each vertex
    as edge multiplicity."""
    part = c1_sets(piece)
    vids = sorted(piece.vertices())
    vidx = {v: i for i, v in enumerate(vids)}
    k = len(vids)
    n_blocks = len(part.blocks)
    genera = tuple(piece.vertex_genus(v) for v in vids) + (0,) * n_blocks
    tags = tuple([0] * k + [1] * n_blocks)
    edges = []
    for bi, block in enumerate(part.blocks):
        deg = _block_degrees(piece, block)
        for v, d in deg.items():
            edges.extend([(vidx[v], k + bi)] * d)
    raw = (genera, (), (0,) * (k + n_blocks), tuple(sorted(edges)))
    return canonicalize_raw(raw, tags=tags).key


def polystable_key(poly: PolystableGraph) -> bytes:
    """Class key: equal exactly for C1-equivalent unions with equal flags."""
    parts = []
    for piece, flag in zip(poly.sorted_components(), poly.moduli_positive_flags()):
        parts.append(component_class_key(piece) + (b"|m1" if flag else b"|m0"))
    return b"TK1;" + b"||".join(sorted(parts))


def torelli_key(graph: StableGraph) -> bytes:
    """Class key of a stable graph of positive genus."""
    if graph.genus() < 1:
        raise DomainError("genus-zero graphs have no class key")
    return polystable_key(pst(graph))


# ---------------------------------------------------------------------------
# Fiber constancy over an axis graph.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiberVerdict:
    verdict: str  # "constant" | "varies"
    key: bytes | None
    reason: str | None
    witness: tuple | None

    @property
    def constant(self) -> bool:
        return self.verdict == "constant"

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "key": self.key.decode() if self.key else None,
            "reason": self.reason,
            "witness": list(self.witness) if self.witness else None,
        }


def fiber_constant(axis: AxisGraph) -> FiberVerdict:
    """Decide whether all stable models over an axis graph share one class.

    Every fiber stratum gets its class key; the verdict is constant when the
    keys agree and no surviving inserted vertex spans positive-dimensional
    moduli (3*0 - 3 + valence > 0).  Any mismatch or such a remnant makes
    the class vary across the fiber.
    """
    cls = classify_axis_points(axis)
    if not cls.is_axis_like:
        raise DomainError("fiber constancy needs an axis-like input (type (0,m) "
                          "points avoiding markings)")
    if axis.genus() < 1:
        raise DomainError("genus-zero axis graphs have no class")
    strata = fiber_strata(axis)
    keys = []
    remnant = None
    for graph, inserted in zip(strata.graphs, strata.inserted_vertices):
        poly = pst(graph)
        keys.append(polystable_key(poly))
        if remnant is None:
            for piece in poly.components:
                for v in piece.vertices():
                    if v in inserted and piece.valence(v) > 3:
                        remnant = (v, piece.valence(v))
    first = keys[0]
    for i, key in enumerate(keys):
        if key != first:
            return FiberVerdict(
                "varies",
                None,
                "fiber strata have differing class keys",
                (0, i),
            )
    if remnant is not None:
        v, val = remnant
        return FiberVerdict(
            "varies",
            None,
            f"inserted vertex {v} survives with valence {val}: "
            f"positive-dimensional moduli remnant",
            remnant,
        )
    return FiberVerdict("constant", first, None, None)
