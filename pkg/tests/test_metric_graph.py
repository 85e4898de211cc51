import math

import numpy as np
import pytest

from shycoupling.metric_graph import (Edge, GraphError, GraphIsometry,
                                      GraphPosition, MetricGraph,
                                      apply_isometry, build_graph, fixture,
                                      geodesic_distance)


# ---------------------------------------------------------------------------
# brute-force geodesic oracle: enumerate vertex-simple paths by DFS
# ---------------------------------------------------------------------------

def _vertex_paths_dist(g, a, b):
    if a == b:
        return 0.0
    adj = {}
    for e in g.edges:
        if e.u != e.v:
            adj.setdefault(e.u, []).append((e.v, e.length))
            adj.setdefault(e.v, []).append((e.u, e.length))
    best = [math.inf]

    def dfs(v, dist, seen):
        if dist >= best[0]:
            return
        if v == b:
            best[0] = dist
            return
        for w, ln in adj.get(v, []):
            if w not in seen:
                dfs(w, dist + ln, seen | {w})

    dfs(a, 0.0, {a})
    return best[0]


def oracle_distance(g, p, q):
    p, q = g.canonical(p), g.canonical(q)

    def ends(pos):
        if pos.is_vertex:
            return [(pos.vertex, 0.0)]
        e = g.edge(pos.edge)
        return [(e.u, pos.offset), (e.v, e.length - pos.offset)]

    cands = []
    if not p.is_vertex and not q.is_vertex and p.edge == q.edge:
        cands.append(abs(p.offset - q.offset))
        e = g.edge(p.edge)
        if e.u == e.v:
            cands.append(e.length - abs(p.offset - q.offset))
    for a, da in ends(p):
        for b, db in ends(q):
            cands.append(da + _vertex_paths_dist(g, a, b) + db)
    return min(cands)


def _random_position(g, rng):
    if rng.random() < 0.25:
        return GraphPosition.at_vertex(g.vertices[rng.integers(len(g.vertices))])
    e = g.edges[rng.integers(len(g.edges))]
    return GraphPosition.on_edge(e.id, float(rng.uniform(1e-6, e.length - 1e-6)))


# ---------------------------------------------------------------------------
# build_graph
# ---------------------------------------------------------------------------

def test_triangle_rejected_for_degree_two():
    spec = {"vertices": ["a", "b", "c"],
            "edges": [{"id": "e1", "u": "a", "v": "b", "length": 1.0},
                      {"id": "e2", "u": "b", "v": "c", "length": 1.0},
                      {"id": "e3", "u": "c", "v": "a", "length": 1.0}]}
    with pytest.raises(GraphError, match="degree-2"):
        build_graph(spec)


def test_star_build():
    spec = {"vertices": ["c", "l1", "l2", "l3"],
            "edges": [{"id": f"a{i}", "u": "c", "v": f"l{i}", "length": 1.0}
                      for i in (1, 2, 3)]}
    g = build_graph(spec)
    assert g.r0 == 1.0
    assert g.m0 == 3
    assert len(g.vertices) == 4


def test_single_self_loop_rejected():
    spec = {"vertices": ["a"],
            "edges": [{"id": "loop", "u": "a", "v": "a", "length": 2.0}]}
    with pytest.raises(GraphError, match="degree-2"):
        build_graph(spec)


def test_nonpositive_length_rejected():
    spec = {"vertices": ["a", "b"],
            "edges": [{"id": "e", "u": "a", "v": "b", "length": 0.0}]}
    with pytest.raises(GraphError):
        build_graph(spec)


def test_disconnected_rejected():
    g = {"vertices": ["a", "b", "c", "d"],
         "edges": [{"id": "e1", "u": "a", "v": "b", "length": 1.0},
                   {"id": "e2", "u": "c", "v": "d", "length": 1.0}]}
    with pytest.raises(GraphError, match="connected"):
        build_graph(g)


def test_load_graph_from_json_file(tmp_path):
    import json

    from shycoupling.metric_graph import load_graph

    spec = {"vertices": ["c", "l1", "l2", "l3"],
            "edges": [{"id": f"a{i}", "u": "c", "v": f"l{i}", "length": 1.0}
                      for i in (1, 2, 3)]}
    p = tmp_path / "graph.json"
    p.write_text(json.dumps(spec))
    g = load_graph(p)
    assert g.r0 == 1.0 and g.m0 == 3


# ---------------------------------------------------------------------------
# geodesic distance
# ---------------------------------------------------------------------------

def test_star_leaf_to_leaf():
    g = fixture("star(3)").graph
    d = geodesic_distance(g, GraphPosition.at_vertex("l1"),
                          GraphPosition.at_vertex("l2"))
    assert d == pytest.approx(2.0, abs=1e-12)


def test_same_point_zero():
    g = fixture("k4").graph
    p = GraphPosition.on_edge("e12", 0.37)
    assert geodesic_distance(g, p, p) == 0.0


def test_k4_midpoint_distances_match_oracle():
    g = fixture("k4").graph
    # edges sharing a vertex: straight through the common vertex
    p = GraphPosition.on_edge("e12", 0.5)
    q = GraphPosition.on_edge("e13", 0.5)
    assert oracle_distance(g, p, q) == pytest.approx(1.0, abs=1e-12)
    assert geodesic_distance(g, p, q) == pytest.approx(1.0, abs=1e-12)
    # vertex-disjoint edges: half-edge, a bridging edge, half-edge
    q2 = GraphPosition.on_edge("e34", 0.5)
    expect = oracle_distance(g, p, q2)
    assert expect == pytest.approx(2.0, abs=1e-12)
    assert geodesic_distance(g, p, q2) == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("name", ["k4", "star(3)", "fig32", "fig36", "fig31"])
def test_distance_matches_oracle_on_random_pairs(name):
    fix = fixture(name)
    g = fix.graph
    rng = np.random.default_rng(101)
    for _ in range(60):
        p, q = _random_position(g, rng), _random_position(g, rng)
        assert geodesic_distance(g, p, q) == pytest.approx(
            oracle_distance(g, p, q), abs=1e-10)


@pytest.mark.parametrize("name", ["k4", "star(3)", "fig32", "fig36"])
def test_metric_axioms_on_random_triples(name):
    g = fixture(name).graph
    rng = np.random.default_rng(7)
    for _ in range(1000):
        p, q, r = (_random_position(g, rng) for _ in range(3))
        dpq = geodesic_distance(g, p, q)
        dqp = geodesic_distance(g, q, p)
        assert dpq == pytest.approx(dqp, abs=1e-12)
        assert dpq >= 0
        dpr = geodesic_distance(g, p, r)
        drq = geodesic_distance(g, r, q)
        assert dpq <= dpr + drq + 1e-9
    assert geodesic_distance(g, p, p) == 0.0


def test_offsets_canonicalize_to_vertices():
    g = fixture("star(3)").graph
    assert g.canonical(GraphPosition.on_edge("a1", 0.0)).vertex == "c"
    assert g.canonical(GraphPosition.on_edge("a1", 1.0)).vertex == "l1"
    with pytest.raises(GraphError):
        g.canonical(GraphPosition.on_edge("a1", 1.5))


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------

def test_fixture_k4_degrees():
    g = fixture("k4").graph
    assert len(g.edges) == 6
    assert all(g.degree(v) == 3 for v in g.vertices)


def test_fixture_star_degrees():
    fix = fixture("star(5)")
    g = fix.graph
    assert g.degree("c") == 5
    assert all(g.degree(v) == 1 for v in fix.markers["leaves"])


def test_fixture_fig36_shape():
    fix = fixture("fig36")
    g = fix.graph
    assert len(g.edges) == 7
    assert all(e.length == 1.0 for e in g.edges)
    assert set(fix.markers["labels"]) == {f"x{i}" for i in range(1, 7)}
    # bubble tips are the deliberate degree-2 labeled vertices
    assert g.degree("x1") == 2 and g.degree("x6") == 2
    assert g.degree("x2") == g.degree("x3") == g.degree("x5") == 3
    assert g.degree("x4") == 1


def test_fixture_fig31_branch_degrees():
    g = fixture("fig31").graph
    assert g.degree("x") == 7
    assert g.degree("y") == 3


def test_fixture_fig33_separation_radii():
    fix = fixture("fig33")
    g = fix.graph
    hub = GraphPosition.at_vertex(fix.markers["hub"])
    for leaf in fix.markers["tree_leaves"]:
        assert geodesic_distance(g, hub, GraphPosition.at_vertex(leaf)) >= \
            fix.markers["leaf_min_dist"] - 1e-12
    for v in fix.markers["near_block"]:
        assert geodesic_distance(g, hub, GraphPosition.at_vertex(v)) <= \
            fix.markers["block_max_dist"] + 1e-12


def test_fixture_unknown_name():
    with pytest.raises(GraphError):
        fixture("fig99")


# ---------------------------------------------------------------------------
# isometries
# ---------------------------------------------------------------------------

def test_fig32_isometry_has_no_fixed_points():
    fix = fixture("fig32")
    g, iso = fix.graph, fix.isometry
    rng = np.random.default_rng(3)
    smallest = np.inf
    for _ in range(500):
        p = _random_position(g, rng)
        smallest = min(smallest,
                       geodesic_distance(g, p, apply_isometry(iso, p, g)))
    assert smallest > 0
    assert smallest >= fix.markers["min_displacement"] - 1e-12


def test_fig32_isometry_preserves_distances():
    fix = fixture("fig32")
    g, iso = fix.graph, fix.isometry
    rng = np.random.default_rng(5)
    for _ in range(200):
        p, q = _random_position(g, rng), _random_position(g, rng)
        d1 = geodesic_distance(g, p, q)
        d2 = geodesic_distance(g, apply_isometry(iso, p, g),
                               apply_isometry(iso, q, g))
        assert abs(d1 - d2) < 1e-12


def test_fig32_isometry_is_involution():
    fix = fixture("fig32")
    g, iso = fix.graph, fix.isometry
    rng = np.random.default_rng(11)
    for _ in range(100):
        p = _random_position(g, rng)
        back = apply_isometry(iso, apply_isometry(iso, p, g), g)
        assert g.canonical(back) == g.canonical(p)


def test_identity_isometry_fixes_positions():
    g = fixture("k4").graph
    iso = GraphIsometry({v: v for v in g.vertices},
                        {e.id: (e.id, False) for e in g.edges})
    iso.validate(g)
    p = GraphPosition.on_edge("e12", 0.3)
    assert apply_isometry(iso, p, g) == p


def test_isometry_rejects_position_outside_domain():
    fix = fixture("fig32")
    iso = GraphIsometry(dict(fix.isometry.vertex_map), dict(fix.isometry.edge_map))
    del iso.edge_map["c0"]
    with pytest.raises(GraphError):
        apply_isometry(iso, GraphPosition.on_edge("c0", 0.5), fix.graph)


def test_isometry_validation_rejects_length_mismatch():
    g = MetricGraph(["c", "l1", "l2", "l3"],
                    [Edge("a1", "c", "l1", 1.0), Edge("a2", "c", "l2", 2.0),
                     Edge("a3", "c", "l3", 1.0)])
    iso = GraphIsometry({"c": "c", "l1": "l2", "l2": "l1", "l3": "l3"},
                        {"a1": ("a2", False), "a2": ("a1", False),
                         "a3": ("a3", False)})
    with pytest.raises(GraphError, match="length"):
        iso.validate(g)
