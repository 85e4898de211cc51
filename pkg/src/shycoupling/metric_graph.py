"""Finite metric graphs: edge-length data model, geodesics, fixtures, isometries.

A graph is a set of vertices joined by edges of positive length. Points of
the graph are either vertices or interior points of an edge, and distance is
shortest-path length along edges. Edge lengths are bounded below by ``r0``
and, apart from deliberately flagged fixtures, no vertex has degree 2.
"""

from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class GraphError(ValueError):
    """Invalid graph specification or position."""


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: float


@dataclass(frozen=True)
class GraphPosition:
    """A point of a metric graph.

    Either a vertex (``vertex`` set) or an interior point of an edge
    (``edge`` and ``offset`` set, offset measured from the edge's ``u`` end,
    strictly inside (0, length)). Offsets equal to 0 or the edge length
    canonicalize to the vertex form.
    """

    vertex: Optional[str] = None
    edge: Optional[str] = None
    offset: float = 0.0

    @staticmethod
    def at_vertex(v: str) -> "GraphPosition":
        return GraphPosition(vertex=v)

    @staticmethod
    def on_edge(edge_id: str, offset: float) -> "GraphPosition":
        return GraphPosition(edge=edge_id, offset=float(offset))

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None


@dataclass
class CompiledGraph:
    """Flat-array view of a graph, consumed by the numeric kernels."""

    eu: np.ndarray          # edge -> u vertex index
    ev: np.ndarray          # edge -> v vertex index
    elen: np.ndarray        # edge -> length
    stub_ptr: np.ndarray    # CSR offsets per vertex into stub arrays
    stub_edge: np.ndarray   # stub -> edge index
    stub_end: np.ndarray    # stub -> 0 (enters at u) or 1 (enters at v)
    deg: np.ndarray         # vertex -> degree (self-loops count twice)
    vdist: np.ndarray       # dense vertex-to-vertex geodesic distances
    r0: float


class MetricGraph:
    """Validated, immutable finite metric graph."""

    def __init__(self, vertices, edges, allow_degree_two: bool = False):
        self.vertices = list(vertices)
        self.edges = [e if isinstance(e, Edge) else Edge(*e) for e in edges]
        self._allow_degree_two = allow_degree_two
        self._validate()
        self._vidx = {v: i for i, v in enumerate(self.vertices)}
        self._eidx = {e.id: i for i, e in enumerate(self.edges)}
        self._edge_by_id = {e.id: e for e in self.edges}
        self.r0 = min(e.length for e in self.edges)
        self.m0 = max(self.degree(v) for v in self.vertices)
        self._compiled: Optional[CompiledGraph] = None

    # -- validation ----------------------------------------------------

    def _validate(self):
        if not self.vertices or not self.edges:
            raise GraphError("graph needs at least one vertex and one edge")
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate edge id")
        vset = set(self.vertices)
        for e in self.edges:
            if e.u not in vset or e.v not in vset:
                raise GraphError(f"edge {e.id} references unknown vertex")
            if not (e.length > 0) or not math.isfinite(e.length):
                raise GraphError(f"edge {e.id} has non-positive length")
        for v in self.vertices:
            d = sum((e.u == v) + (e.v == v) for e in self.edges)
            if d < 1:
                raise GraphError(f"isolated vertex {v}")
            if d == 2 and not self._allow_degree_two:
                raise GraphError(f"degree-2 vertex {v}")
        # connectivity over vertices
        adj = {v: set() for v in self.vertices}
        for e in self.edges:
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(self.vertices):
            raise GraphError("graph is not connected")

    # -- basic queries -------------------------------------------------

    def degree(self, v: str) -> int:
        return sum((e.u == v) + (e.v == v) for e in self.edges)

    def edge(self, edge_id: str) -> Edge:
        return self._edge_by_id[edge_id]

    def vertex_index(self, v: str) -> int:
        return self._vidx[v]

    def edge_index(self, edge_id: str) -> int:
        return self._eidx[edge_id]

    def canonical(self, p: GraphPosition) -> GraphPosition:
        """Validate ``p`` against this graph and canonicalize endpoints."""
        if p.is_vertex:
            if p.vertex not in self._vidx:
                raise GraphError(f"unknown vertex {p.vertex}")
            return p
        e = self._edge_by_id.get(p.edge)
        if e is None:
            raise GraphError(f"unknown edge {p.edge}")
        if p.offset == 0.0:
            return GraphPosition.at_vertex(e.u)
        if p.offset == e.length:
            return GraphPosition.at_vertex(e.v)
        if not (0.0 < p.offset < e.length):
            raise GraphError(f"offset {p.offset} outside edge {p.edge}")
        return p

    def compiled(self) -> CompiledGraph:
        if self._compiled is None:
            self._compiled = self._compile()
        return self._compiled

    def _compile(self) -> CompiledGraph:
        nv, ne = len(self.vertices), len(self.edges)
        eu = np.array([self._vidx[e.u] for e in self.edges], dtype=np.int64)
        ev = np.array([self._vidx[e.v] for e in self.edges], dtype=np.int64)
        elen = np.array([e.length for e in self.edges], dtype=np.float64)
        stubs = [[] for _ in range(nv)]
        for j, e in enumerate(self.edges):
            stubs[eu[j]].append((j, 0))
            stubs[ev[j]].append((j, 1))
        for s in stubs:
            s.sort()  # deterministic branch-index ordering
        deg = np.array([len(s) for s in stubs], dtype=np.int64)
        stub_ptr = np.zeros(nv + 1, dtype=np.int64)
        np.cumsum(deg, out=stub_ptr[1:])
        stub_edge = np.array([j for s in stubs for (j, _) in s], dtype=np.int64)
        stub_end = np.array([t for s in stubs for (_, t) in s], dtype=np.int64)
        vdist = self._vertex_distances(nv, eu, ev, elen)
        return CompiledGraph(eu, ev, elen, stub_ptr, stub_edge, stub_end,
                             deg, vdist, self.r0)

    def _vertex_distances(self, nv, eu, ev, elen) -> np.ndarray:
        adj = [[] for _ in range(nv)]
        for j in range(len(elen)):
            if eu[j] != ev[j]:  # self-loops never shorten vertex paths
                adj[eu[j]].append((ev[j], elen[j]))
                adj[ev[j]].append((eu[j], elen[j]))
        dist = np.full((nv, nv), np.inf)
        for s in range(nv):
            dist[s, s] = 0.0
            pq = [(0.0, s)]
            while pq:
                d, a = heapq.heappop(pq)
                if d > dist[s, a]:
                    continue
                for b, w in adj[a]:
                    nd = d + w
                    if nd < dist[s, b]:
                        dist[s, b] = nd
                        heapq.heappush(pq, (nd, b))
        return dist

    # -- kernel position encoding ---------------------------------------

    def position_to_pair(self, p: GraphPosition):
        """Encode a position as (edge index, offset in [0, length])."""
        p = self.canonical(p)
        if p.is_vertex:
            vi = self._vidx[p.vertex]
            cg = self.compiled()
            s = cg.stub_ptr[vi]
            j = int(cg.stub_edge[s])
            off = 0.0 if cg.stub_end[s] == 0 else float(cg.elen[j])
            return j, off
        return self._eidx[p.edge], float(p.offset)

    def pair_to_position(self, edge_idx: int, offset: float) -> GraphPosition:
        e = self.edges[int(edge_idx)]
        if offset <= 0.0:
            return GraphPosition.at_vertex(e.u)
        if offset >= e.length:
            return GraphPosition.at_vertex(e.v)
        return GraphPosition.on_edge(e.id, offset)


@dataclass
class GraphIsometry:
    """Distance-preserving self-map: vertex relabeling plus oriented edge map."""

    vertex_map: dict
    edge_map: dict  # edge id -> (edge id, flipped: bool)

    def validate(self, g: MetricGraph):
        for eid, (tid, flipped) in self.edge_map.items():
            e, t = g.edge(eid), g.edge(tid)
            if abs(e.length - t.length) > 1e-12:
                raise GraphError(f"isometry maps {eid} to {tid} of different length")
            want_u = t.v if flipped else t.u
            want_v = t.u if flipped else t.v
            if (self.vertex_map[e.u], self.vertex_map[e.v]) != (want_u, want_v):
                raise GraphError(f"isometry breaks incidence on edge {eid}")


def apply_isometry(iso: GraphIsometry, p: GraphPosition,
                   g: Optional[MetricGraph] = None) -> GraphPosition:
    """Image of a position under an isometry."""
    if p.is_vertex:
        if p.vertex not in iso.vertex_map:
            raise GraphError(f"vertex {p.vertex} outside isometry domain")
        return GraphPosition.at_vertex(iso.vertex_map[p.vertex])
    if p.edge not in iso.edge_map:
        raise GraphError(f"edge {p.edge} outside isometry domain")
    tid, flipped = iso.edge_map[p.edge]
    if flipped:
        length = g.edge(p.edge).length if g is not None else None
        if length is None:
            raise GraphError("flipped edge map needs the graph for lengths")
        return GraphPosition.on_edge(tid, length - p.offset)
    return GraphPosition.on_edge(tid, p.offset)


def build_graph(spec: dict, allow_degree_two: bool = False) -> MetricGraph:
    """Build a validated graph from ``{"vertices": [...], "edges": [...]}``.

    Edges are mappings with keys ``id, u, v, length``. Rejects non-positive
    lengths, degree-2 vertices and disconnected graphs.
    """
    try:
        vertices = list(spec["vertices"])
        edges = [Edge(str(e["id"]), str(e["u"]), str(e["v"]), float(e["length"]))
                 for e in spec["edges"]]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph spec: {exc}") from exc
    return MetricGraph(vertices, edges, allow_degree_two=allow_degree_two)


def load_graph(path, allow_degree_two: bool = False) -> MetricGraph:
    """Load a graph from a JSON spec file (same schema as build_graph)."""
    import json

    with open(path) as fh:
        return build_graph(json.load(fh), allow_degree_two=allow_degree_two)


def geodesic_distance(g: MetricGraph, p: GraphPosition, q: GraphPosition) -> float:
    """Shortest-path distance between two positions."""
    from ._graph_kernels import pos_dist

    cg = g.compiled()
    (pe, po), (qe, qo) = g.position_to_pair(p), g.position_to_pair(q)
    return float(pos_dist(cg.eu, cg.ev, cg.elen, cg.vdist, pe, po, qe, qo))


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------


@dataclass
class GraphFixture:
    """A named graph together with optional isometry and marker metadata."""

    name: str
    graph: MetricGraph
    isometry: Optional[GraphIsometry] = None
    markers: dict = field(default_factory=dict)


def _star(k: int) -> GraphFixture:
    if k < 1:
        raise GraphError("star needs k >= 1")
    vertices = ["c"] + [f"l{i}" for i in range(1, k + 1)]
    edges = [Edge(f"a{i}", "c", f"l{i}", 1.0) for i in range(1, k + 1)]
    g = MetricGraph(vertices, edges, allow_degree_two=(k == 2))
    return GraphFixture("star", g, markers={"center": "c",
                                            "leaves": vertices[1:]})


def _k4() -> GraphFixture:
    vs = ["v1", "v2", "v3", "v4"]
    edges = [Edge(f"e{a}{b}", f"v{a}", f"v{b}", 1.0)
             for a in range(1, 5) for b in range(a + 1, 5)]
    return GraphFixture("k4", MetricGraph(vs, edges))


def _fig31(bridge: float = 1.0, pendant: float = 1.0) -> GraphFixture:
    """Two hubs joined through a middle vertex by asymmetric bundles.

    Hub ``x`` reaches ``z`` along five parallel edges, hub ``y`` along one,
    so a particle leaving x heads toward z with probability 5/7 while one
    leaving y does so with probability 1/3. Edge lengths are parameters.
    """
    vs = ["x", "y", "z", "px1", "px2", "py1", "py2"]
    edges = [Edge(f"m{i}", "x", "z", bridge) for i in range(1, 6)]
    edges.append(Edge("zy", "z", "y", bridge))
    edges += [Edge("sx1", "x", "px1", pendant), Edge("sx2", "x", "px2", pendant),
              Edge("sy1", "y", "py1", pendant), Edge("sy2", "y", "py2", pendant)]
    g = MetricGraph(vs, edges)
    return GraphFixture("fig31", g, markers={"x": "x", "y": "y", "z": "z"})


def _fig32() -> GraphFixture:
    """Unit 4-cycle with a unit pendant at each corner.

    The half-turn of the cycle is a fixed-point-free involution: every point
    moves by at least 2 (the graph distance across the cycle).
    """
    vs = [f"v{i}" for i in range(4)] + [f"p{i}" for i in range(4)]
    edges = [Edge(f"c{i}", f"v{i}", f"v{(i + 1) % 4}", 1.0) for i in range(4)]
    edges += [Edge(f"s{i}", f"v{i}", f"p{i}", 1.0) for i in range(4)]
    g = MetricGraph(vs, edges)
    vmap = {}
    for i in range(4):
        vmap[f"v{i}"] = f"v{(i + 2) % 4}"
        vmap[f"p{i}"] = f"p{(i + 2) % 4}"
    emap = {}
    for i in range(4):
        emap[f"c{i}"] = (f"c{(i + 2) % 4}", False)
        emap[f"s{i}"] = (f"s{(i + 2) % 4}", False)
    iso = GraphIsometry(vmap, emap)
    iso.validate(g)
    return GraphFixture("fig32", g, isometry=iso,
                        markers={"min_displacement": 2.0})


def _fig33() -> GraphFixture:
    """Hub with two long trees and a short multi-edge block close to it."""
    vs = ["x", "u", "v", "a", "b", "bc", "bd"]
    edges = [
        Edge("xu", "x", "u", 0.5), Edge("xv", "x", "v", 0.5),
        Edge("uv1", "u", "v", 0.5), Edge("uv2", "u", "v", 0.5),
        Edge("ta", "x", "a", 2.0),
        Edge("tb", "x", "b", 2.0), Edge("tbc", "b", "bc", 1.0),
        Edge("tbd", "b", "bd", 1.0),
    ]
    g = MetricGraph(vs, edges)
    return GraphFixture("fig33", g, markers={
        "hub": "x", "near_block": ["u", "v"], "tree_leaves": ["a", "bc", "bd"],
        "leaf_min_dist": 2.0, "block_max_dist": 0.75,
    })


def _fig34_window() -> GraphFixture:
    """Finite window of a line backbone with unequal side trees.

    Side trees of lengths 1 and 1.5 break shift invariance. Markers carry
    the backbone arclength coordinate of every backbone edge and the
    attachment coordinate of every tree edge.
    """
    vs = [f"b{i}" for i in range(5)] + ["t1", "t2", "t3"]
    edges = [Edge(f"bb{i}", f"b{i}", f"b{i + 1}", 1.0) for i in range(4)]
    edges += [Edge("s1", "b1", "t1", 1.0),
              Edge("s2", "b2", "t2", 1.5),
              Edge("s3", "b3", "t3", 1.0)]
    g = MetricGraph(vs, edges)
    proj = {
        "kind": "line",
        # backbone edge id -> (coordinate of u end, +1/-1 direction of offset)
        "edge_coord": {f"bb{i}": (float(i), 1.0) for i in range(4)},
        "tree_attach": {"s1": 1.0, "s2": 2.0, "s3": 3.0},
        "vertex_coord": {f"b{i}": float(i) for i in range(5)},
    }
    return GraphFixture("fig34_window", g, markers={"projection": proj})


def _fig35() -> GraphFixture:
    """Loop with three pendant trees placed without rotational symmetry."""
    vs = ["c0", "c1", "c2", "q0", "q1", "q2"]
    edges = [Edge("r0", "c0", "c1", 1.0), Edge("r1", "c1", "c2", 1.0),
             Edge("r2", "c2", "c0", 2.0),
             Edge("w0", "c0", "q0", 1.0), Edge("w1", "c1", "q1", 1.0),
             Edge("w2", "c2", "q2", 1.5)]
    g = MetricGraph(vs, edges)
    proj = {
        "kind": "loop",
        "circumference": 4.0,
        "edge_coord": {"r0": (0.0, 1.0), "r1": (1.0, 1.0), "r2": (2.0, 1.0)},
        "tree_attach": {"w0": 0.0, "w1": 1.0, "w2": 2.0},
        "vertex_coord": {"c0": 0.0, "c1": 1.0, "c2": 2.0},
    }
    return GraphFixture("fig35", g, markers={"projection": proj})


def _fig36() -> GraphFixture:
    """Two unit-edge bubbles bridged through a center carrying a pendant.

    Seven unit edges A1..A7 over labeled points x1..x6: a double edge
    x1=x2 (the left bubble), bridge x2-x3, pendant x3-x4, bridge x3-x5 and
    a double edge x5=x6 (the right bubble). The bubble tips x1, x6 have
    degree 2 and are kept as labeled vertices; they are dynamically inert.
    The whole graph is symmetric across the pendant's axis.
    """
    vs = [f"x{i}" for i in range(1, 7)]
    edges = [
        Edge("A1", "x1", "x2", 1.0), Edge("A2", "x1", "x2", 1.0),
        Edge("A3", "x2", "x3", 1.0), Edge("A4", "x3", "x4", 1.0),
        Edge("A5", "x3", "x5", 1.0),
        Edge("A6", "x5", "x6", 1.0), Edge("A7", "x5", "x6", 1.0),
    ]
    g = MetricGraph(vs, edges, allow_degree_two=True)
    return GraphFixture("fig36", g, markers={
        "labels": {v: v for v in vs},
        "left": {"center": "x2", "tip": "x1", "arcs": ["A1", "A2"], "bridge": "A3"},
        "right": {"center": "x5", "tip": "x6", "arcs": ["A6", "A7"], "bridge": "A5"},
        "pendant": "A4", "pendant_tip": "x4", "mid": "x3",
    })


_FIXTURES = {
    "fig31": _fig31,
    "fig32": _fig32,
    "fig33": _fig33,
    "fig34_window": _fig34_window,
    "fig35": _fig35,
    "fig36": _fig36,
    "k4": _k4,
}


def fixture(name: str, **params) -> GraphFixture:
    """Build a named fixture; ``star(k)`` takes the arm count in the name."""
    m = re.fullmatch(r"star\((\d+)\)", name) or re.fullmatch(r"star(\d+)", name)
    if m:
        return _star(int(m.group(1)))
    if name == "star":
        return _star(int(params.pop("k")))
    fn = _FIXTURES.get(name)
    if fn is None:
        raise GraphError(f"unknown fixture {name!r}")
    return fn(**params)
