"""Extremal assignments on stable-graph catalogs.

An assignment picks an automorphism-invariant proper vertex subset of every
catalog graph, closed under degeneration.  The built-in one selects the
union of all separating rational multibridges; user tables are loaded from
JSON keyed by canonical key and closed under vertex automorphisms before
any use.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .graph_core import (
    DomainError,
    StableGraph,
    bridge_edge_indices,
    canonicalize_raw,
    raw_from_key,
)
from .enumeration import GraphCatalog, iter_degenerations

SCHEMA = "torelli-graphs/1"


class CoverageError(DomainError):
    """An extensional assignment misses catalog entries."""


# ---------------------------------------------------------------------------
# Rational multibridges.
# ---------------------------------------------------------------------------

SEPARATING = "separating"
QUASI_SEPARATING = "quasi-separating"
GENERAL = "general"


@dataclass(frozen=True)
class BridgeRecord:
    """One rational multibridge: a legless tree of genus-zero vertices.

    ``multiplicity`` counts attaching edges; ``attachment_profile`` counts
    them per complement component, largest first.  The category is exactly
    one of separating (profile all ones), quasi-separating (one component
    attaches 2 or 3 times, the rest once), or general.
    """

    vertices: frozenset
    multiplicity: int
    category: str
    attachment_profile: tuple


@dataclass(frozen=True)
class BridgeReport:
    graph_key: bytes
    bridges: tuple  # maximal BridgeRecords


def classify_bridge(graph: StableGraph, vertices: Iterable) -> BridgeRecord | None:
    """Classify a vertex subset as a rational multibridge, or None.

    The subset must induce a connected legless tree of genus-zero vertices
    (complete-subgraph convention, so loops and internal cycles disqualify)
    whose vertices all have total valence at least three.
    """
    sub = frozenset(vertices)
    if not sub or not sub <= set(graph.vertices()):
        return None
    if len(sub) == len(graph.vertices()):
        return None
    for v in sub:
        if graph.vertex_genus(v) or graph.legs_at(v) or graph.branch_points_at(v):
            return None
        if graph.valence(v) < 3:
            return None
    internal = []
    attaching = []
    for e in graph.edges():
        u, w = graph.edge_vertices(e)
        if u in sub and w in sub:
            if u == w:
                return None  # loop: positive genus
            internal.append((u, w))
        elif u in sub or w in sub:
            attaching.append(e)
    if len(internal) != len(sub) - 1:
        return None  # not a tree
    # connectivity of the induced forest
    seen = {next(iter(sub))}
    grew = True
    while grew:
        grew = False
        for u, w in internal:
            if (u in seen) != (w in seen):
                seen.add(u if w in seen else w)
                grew = True
    if seen != sub:
        return None
    m = len(attaching)
    if m == 0:
        return None
    profile = _attachment_profile(graph, sub, attaching)
    if profile == (1,) * m:
        category = SEPARATING
    elif sum(1 for c in profile if c > 1) <= 1 and profile[0] <= 3:
        category = QUASI_SEPARATING
    else:
        category = GENERAL
    return BridgeRecord(sub, m, category, profile)


def _attachment_profile(graph, sub, attaching) -> tuple:
    outside = [v for v in graph.vertices() if v not in sub]
    comp_of = {v: v for v in outside}

    def find(v):
        while comp_of[v] != v:
            comp_of[v] = comp_of[comp_of[v]]
            v = comp_of[v]
        return v

    for e in graph.edges():
        u, w = graph.edge_vertices(e)
        if u not in sub and w not in sub and u != w:
            ru, rw = find(u), find(w)
            if ru != rw:
                comp_of[ru] = rw
    counts: dict = {}
    for e in attaching:
        u, w = graph.edge_vertices(e)
        far = w if u in sub else u
        r = find(far)
        counts[r] = counts.get(r, 0) + 1
    return tuple(sorted(counts.values(), reverse=True))


def rational_multibridges(graph: StableGraph) -> BridgeReport:
    """All maximal rational multibridges, by exhaustive connected-subset search."""
    candidates = [
        v
        for v in graph.vertices()
        if graph.vertex_genus(v) == 0
        and not graph.legs_at(v)
        and not graph.branch_points_at(v)
        and not graph.loops_at(v)
    ]
    found = []
    n = len(candidates)
    for r in range(1, n + 1):
        for combo in itertools.combinations(candidates, r):
            rec = classify_bridge(graph, combo)
            if rec is not None:
                found.append(rec)
    maximal = [
        rec
        for rec in found
        if not any(rec.vertices < other.vertices for other in found)
    ]
    maximal.sort(key=lambda r: sorted(r.vertices))
    return BridgeReport(graph.canonical_key(), tuple(maximal))


def separating_bridge_assignment(graph: StableGraph) -> frozenset:
    """Union of the vertex sets of all separating rational multibridges.

    A vertex lies in some separating bridge exactly when it is a legless
    loop-free genus-zero vertex all of whose edges separate: each such
    vertex is itself a one-vertex separating bridge, and inside a separating
    bridge every complement piece hangs off a single edge, so every incident
    edge separates.
    """
    sep = graph.separating_edges()
    out = []
    for v in graph.vertices():
        if graph.vertex_genus(v) or graph.legs_at(v) or graph.branch_points_at(v):
            continue
        incident = [e for e in graph.edges() if v in graph.edge_vertices(e)]
        if any(graph.is_loop(e) for e in incident):
            continue
        if all(e in sep for e in incident):
            out.append(v)
    return frozenset(out)


def _raw_separating_assignment(raw) -> int:
    """Bitmask version of the separating-bridge rule for canonical raws."""
    genera, legs, branch, edges = raw
    k = len(genera)
    bridges = bridge_edge_indices(k, edges)
    blocked = bytearray(k)
    for i, g in enumerate(genera):
        if g or branch[i]:
            blocked[i] = 1
    for _, v in legs:
        blocked[v] = 1
    incident_ok = [True] * k
    for idx, (u, v) in enumerate(edges):
        if u == v:
            blocked[u] = 1
        elif idx not in bridges:
            incident_ok[u] = incident_ok[v] = False
    degree = [0] * k
    for u, v in edges:
        degree[u] += 1
        if u != v:
            degree[v] += 1
    mask = 0
    for v in range(k):
        if not blocked[v] and incident_ok[v] and degree[v]:
            mask |= 1 << v
    return mask


# ---------------------------------------------------------------------------
# Assignments as values.
# ---------------------------------------------------------------------------

class ExtremalAssignment:
    """A rule graph -> vertex subset, intrinsic or given by a table.

    Table entries are keyed by canonical key and hold canonical vertex
    positions; they are closed under vertex automorphisms at load time.
    """

    def __init__(self, name: str, rule: Callable | None = None, table: dict | None = None):
        if (rule is None) == (table is None):
            raise ValueError("exactly one of rule/table required")
        self.name = name
        self._rule = rule
        self._table = table
        self._mask_cache: dict = {}

    def is_intrinsic(self) -> bool:
        return self._rule is not None

    def defined_for(self, key: bytes) -> bool:
        return self._rule is not None or key in self._table

    def value(self, graph: StableGraph) -> frozenset:
        """Vertex subset of ``graph`` (in the graph's own vertex ids)."""
        if self._rule is not None:
            return frozenset(self._rule(graph))
        key = graph.canonical_key()
        if key not in self._table:
            raise CoverageError(f"{self.name}: no entry for {key.decode()}")
        positions = self._table[key]
        labeling = graph.canonical_labeling()
        return frozenset(v for v, pos in labeling.items() if pos in positions)

    def value_mask(self, key: bytes) -> int:
        """Canonical-position bitmask of the value on a canonical key."""
        mask = self._mask_cache.get(key)
        if mask is None:
            if self._rule is not None:
                if self._rule is separating_bridge_assignment:
                    mask = _raw_separating_assignment(raw_from_key(key))
                else:
                    graph = StableGraph.from_canonical_key(key)
                    # representative vertex ids are canonical positions
                    mask = 0
                    for v in self._rule(graph):
                        mask |= 1 << v
            else:
                if key not in self._table:
                    raise CoverageError(f"{self.name}: no entry for {key.decode()}")
                mask = 0
                for pos in self._table[key]:
                    mask |= 1 << pos
            self._mask_cache[key] = mask
        return mask


SEPARATING_BRIDGES = ExtremalAssignment(
    "separating-bridges", rule=separating_bridge_assignment
)


def load_assignment_table(data: dict, catalog: GraphCatalog) -> ExtremalAssignment:
    """Build an extensional assignment from parsed JSON, closing each entry
    under the automorphism orbits of its graph.  Raises CoverageError when
    catalog entries are missing."""
    if data.get("schema") not in (None, SCHEMA):
        raise DomainError(f"unsupported schema {data.get('schema')!r}")
    entries = data.get("entries")
    if not isinstance(entries, dict):
        raise DomainError("assignment JSON needs an 'entries' object")
    table: dict = {}
    for key_str, positions in entries.items():
        key = key_str.encode("ascii")
        raw = raw_from_key(key)
        res = canonicalize_raw(raw)
        chosen = set(int(p) for p in positions)
        k = len(raw[0])
        if not chosen <= set(range(k)):
            raise DomainError(f"entry {key_str}: vertex position out of range")
        closed = set()
        for orbit in res.vertex_orbits:
            if orbit & chosen:
                closed |= orbit
        table[key] = frozenset(closed)
    missing = [k for k in catalog.keys if k not in table]
    if missing:
        raise CoverageError(
            f"assignment misses {len(missing)} catalog entries, "
            f"first: {missing[0].decode()}"
        )
    return ExtremalAssignment(str(data.get("name", "table")), table=table)


# ---------------------------------------------------------------------------
# Verification.
# ---------------------------------------------------------------------------

@dataclass
class VerificationReport:
    assignment: str
    genus: int
    markings: int
    axiom1_violations: list = field(default_factory=list)
    axiom2_violations: list = field(default_factory=list)
    coverage_missing: list = field(default_factory=list)
    graphs_checked: int = 0
    degenerations_checked: int = 0
    mode: str = "all"

    @property
    def ok(self) -> bool:
        return not (
            self.axiom1_violations or self.axiom2_violations or self.coverage_missing
        )

    def to_json_dict(self) -> dict:
        return {
            "assignment": self.assignment,
            "genus": self.genus,
            "markings": self.markings,
            "verified": self.ok,
            "graphs_checked": self.graphs_checked,
            "degenerations_checked": self.degenerations_checked,
            "mode": self.mode,
            "axiom1_violations": self.axiom1_violations,
            "axiom2_violations": self.axiom2_violations,
            "coverage_missing": self.coverage_missing,
        }


def verify_extremal(
    assignment: ExtremalAssignment,
    catalog: GraphCatalog,
    degenerations: Iterable | None = None,
    mode: str = "all",
) -> VerificationReport:
    """Check both extremality axioms over a catalog.

    Axiom 1: every value is a proper, automorphism-invariant vertex subset.
    Axiom 2: membership is equivalent to the image subgraph lying inside the
    value, for every supplied degeneration.  When ``degenerations`` is None
    they are generated from the catalog; ``mode="single"`` restricts to
    one-edge contractions, through which all others factor.
    """
    report = VerificationReport(
        assignment=assignment.name,
        genus=catalog.genus,
        markings=catalog.markings,
        mode=mode if degenerations is None else "supplied",
    )
    if not assignment.is_intrinsic():
        report.coverage_missing = [
            k.decode() for k in catalog.keys if not assignment.defined_for(k)
        ]
        if report.coverage_missing:
            raise CoverageError(
                f"{assignment.name} undefined on "
                f"{len(report.coverage_missing)} catalog entries"
            )

    for key in catalog.keys:
        raw = raw_from_key(key)
        k = len(raw[0])
        mask = assignment.value_mask(key)
        full = (1 << k) - 1
        if mask == full:
            report.axiom1_violations.append((key.decode(), "value is not proper"))
        res = canonicalize_raw(raw)
        for orbit in res.vertex_orbits:
            bits = sum(1 << v for v in orbit)
            if mask & bits and mask & bits != bits:
                report.axiom1_violations.append(
                    (key.decode(), f"not Aut-invariant on orbit {sorted(orbit)}")
                )
                break
        report.graphs_checked += 1

    if degenerations is None:
        degenerations = iter_degenerations(catalog, subsets=mode)
    for deg in degenerations:
        smask = assignment.value_mask(deg.source)
        tmask = assignment.value_mask(deg.target)
        for v, merged in deg.vertex_map:
            bits = sum(1 << u for u in merged)
            if bool(smask & (1 << v)) != (tmask & bits == bits):
                report.axiom2_violations.append(
                    (
                        deg.source.decode(),
                        deg.target.decode(),
                        sorted(deg.contracted_indices),
                        v,
                    )
                )
        report.degenerations_checked += 1
    return report


def is_z_quasi_separating(graph: StableGraph, assignment: ExtremalAssignment) -> bool:
    """True when every connected component of the assigned subgraph is a
    separating or quasi-separating rational multibridge."""
    chosen = assignment.value(graph)
    if not chosen:
        return True
    remaining = set(chosen)
    while remaining:
        comp = {remaining.pop()}
        grew = True
        while grew:
            grew = False
            for e in graph.edges():
                u, w = graph.edge_vertices(e)
                if u in comp and w in chosen and w not in comp:
                    comp.add(w)
                    grew = True
                elif w in comp and u in chosen and u not in comp:
                    comp.add(u)
                    grew = True
        remaining -= comp
        rec = classify_bridge(graph, comp)
        if rec is None or rec.category == GENERAL:
            return False
    return True
