import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ccdetect.graphs import (
    DEFAULT_COSTS,
    AttributedGraph,
    DelaunayClassSpec,
    GraphError,
    TriangulationError,
    delaunay_edges,
    distance_matrix,
    generate_class_graph,
    generate_class_graphs,
    graph_edit_distance,
    graph_set_median,
    read_dataset,
    set_median_index,
    solve_lsap,
    triangulate,
    write_dataset,
)
from ccdetect.graphs.delaunay import circumcircle_violations

from conftest import exact_ged, random_graph

seeds = st.integers(0, 2**32 - 1)


# -- graph type -----------------------------------------------------------------

def test_graph_invariants():
    with pytest.raises(GraphError):
        AttributedGraph([(0, 0), (1, 1)], [(0, 0)])
    with pytest.raises(GraphError):
        AttributedGraph([(0, 0), (1, 1)], [(0, 2)])
    with pytest.raises(GraphError):
        AttributedGraph([(0, 0), (1, 1)], [(0, 1), (1, 0)])
    g = AttributedGraph([(0, 0), (1, 1)], [(1, 0)])
    assert g.edges == ((0, 1),)
    with pytest.raises(AttributeError):
        g.edges = ()


def test_graph_json_roundtrip():
    g = AttributedGraph([(0.5, 1.25), (2, 3), (4, 0)], [(0, 2), (1, 2)])
    assert AttributedGraph.from_json(g.to_json()) == g


# -- assignment -------------------------------------------------------------------

def test_lsap_examples():
    # ones on the diagonal, zeros elsewhere: a derangement costs nothing
    assignment, total = solve_lsap(np.eye(3))
    assert total == 0.0 and all(assignment != np.arange(3))
    assignment, total = solve_lsap([[4, 1], [2, 3]])
    assert list(assignment) == [1, 0] and total == 3.0


def test_lsap_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_lsap(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        solve_lsap([[np.nan, 1], [1, 0]])


@given(seeds)
def test_lsap_brute_force_oracle(seed):
    C = np.random.default_rng(seed).uniform(0, 10, size=(6, 6))
    best = min(C[np.arange(6), list(p)].sum() for p in itertools.permutations(range(6)))
    assignment, total = solve_lsap(C)
    assert sorted(assignment) == list(range(6))
    assert total == pytest.approx(best, abs=1e-9)


# -- edit distance ----------------------------------------------------------------

def test_ged_examples():
    g = AttributedGraph([(0, 0), (1, 0), (0, 1)], [(0, 1), (1, 2)])
    assert graph_edit_distance(g, g) == 0.0
    single = AttributedGraph([(0.0, 0.0)])
    empty = AttributedGraph(np.zeros((0, 2)))
    assert graph_edit_distance(single, empty) == DEFAULT_COSTS.node_insert_delete
    assert graph_edit_distance(empty, empty) == 0.0


def test_exact_oracle_examples():
    single = AttributedGraph([(0.0, 0.0)])
    empty = AttributedGraph(np.zeros((0, 2)))
    assert exact_ged(single, empty) == 1.0
    edge = AttributedGraph([(0, 0), (1, 0)], [(0, 1)])
    assert exact_ged(edge, AttributedGraph([(0, 0), (1, 0)])) == 0.5


@given(seeds)
def test_bipartite_upper_bounds_exact(seed):
    rng = np.random.default_rng(seed)
    g1, g2 = random_graph(rng), random_graph(rng)
    assert graph_edit_distance(g1, g2) >= exact_ged(g1, g2) - 1e-9


@given(seeds)
def test_ged_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    g1, g2 = random_graph(rng, 6), random_graph(rng, 6)
    p1 = g1.permuted(rng.permutation(g1.n_nodes))
    p2 = g2.permuted(rng.permutation(g2.n_nodes))
    assert graph_edit_distance(p1, p2) == pytest.approx(graph_edit_distance(g1, g2), abs=1e-9)
    assert graph_edit_distance(g1, p1) == pytest.approx(0.0, abs=1e-9)


@given(seeds)
def test_ged_pseudo_metric(seed):
    rng = np.random.default_rng(seed)
    g1, g2 = random_graph(rng, 6), random_graph(rng, 6)
    d = graph_edit_distance(g1, g2)
    assert d >= 0
    assert d == graph_edit_distance(g2, g1)
    assert graph_edit_distance(g1, g1) == 0.0


def test_distance_matrix_symmetric():
    rng = np.random.default_rng(4)
    graphs = [random_graph(rng, 5) for _ in range(6)]
    D = distance_matrix(graphs)
    assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0)
    assert D[1, 4] == graph_edit_distance(graphs[1], graphs[4])
    cross = distance_matrix(graphs[:2], graphs)
    np.testing.assert_array_equal(cross, D[:2])


# -- triangulation ----------------------------------------------------------------

def test_delaunay_triangle():
    assert delaunay_edges([(0, 0), (1, 0), (0, 1)]) == [(0, 1), (0, 2), (1, 2)]


def test_delaunay_square_tie_break():
    edges = delaunay_edges([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert edges == [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]


def test_delaunay_errors():
    with pytest.raises(TriangulationError):
        delaunay_edges([(0, 0), (1, 1)])
    with pytest.raises(TriangulationError):
        delaunay_edges([(0, 0), (1, 1), (0, 0)])
    with pytest.raises(TriangulationError):
        delaunay_edges([(0, 0), (1, 1), (2, 2)])


@given(seeds, st.integers(3, 20))
def test_empty_circumcircle(seed, n):
    pts = np.random.default_rng(seed).uniform(0, 10, size=(n, 2))
    tris = triangulate(pts)
    assert circumcircle_violations(pts, tris) == []


# -- datasets ---------------------------------------------------------------------

def test_class_spec_radius_decreasing():
    radii = [DelaunayClassSpec(class_id=t).perturbation_radius for t in range(1, 15)]
    assert all(a > b for a, b in zip(radii, radii[1:]))
    with pytest.raises(ValueError):
        DelaunayClassSpec(class_id=-1)


def test_generation_deterministic():
    spec = DelaunayClassSpec(class_id=3, seed=5)
    a = generate_class_graph(spec, np.random.default_rng(1))
    b = generate_class_graph(spec, np.random.default_rng(1))
    assert a == b
    assert generate_class_graphs(spec, 5) == generate_class_graphs(spec, 5)


@given(seeds)
def test_generated_graphs_are_delaunay(seed):
    spec = DelaunayClassSpec(class_id=0, seed=seed % 1000)
    g = generate_class_graph(spec, np.random.default_rng(seed))
    assert g.n_nodes == spec.n_points
    assert g.edges == tuple(delaunay_edges(g.nodes))
    assert circumcircle_violations(g.nodes, triangulate(g.nodes)) == []


def test_dataset_roundtrip(tmp_path):
    spec = DelaunayClassSpec(class_id=2, seed=1)
    graphs = generate_class_graphs(spec, 4)
    path = write_dataset(tmp_path / "c2.jsonl", spec, graphs)
    assert len(path.read_text().splitlines()) == 5
    spec2, graphs2 = read_dataset(path)
    assert spec2 == spec and graphs2 == graphs


def test_difficulty_ordering():
    # common noise draws across classes isolate the effect of the displacement
    means = []
    ref = generate_class_graphs(DelaunayClassSpec(class_id=0), 100, np.random.default_rng([0, 7]))
    for t in (2, 6, 12):
        other = generate_class_graphs(DelaunayClassSpec(class_id=t), 100,
                                      np.random.default_rng([0, 8]))
        means.append(np.mean([graph_edit_distance(a, b) for a, b in zip(ref, other)]))
    assert means[0] > means[1] > means[2]


# -- set median -------------------------------------------------------------------

def test_set_median_examples():
    g = AttributedGraph([(0, 0), (1, 0), (0, 1)], [(0, 1)])
    assert graph_set_median([g]) is g
    h = AttributedGraph([(9, 9), (8, 9), (9, 8), (5, 5)], [(0, 1), (2, 3)])
    assert graph_set_median([g, g, h]) == g
    with pytest.raises(ValueError):
        graph_set_median([])


def test_set_median_exhaustive():
    graphs = generate_class_graphs(DelaunayClassSpec(class_id=0), 10)
    D = distance_matrix(graphs)
    sums = [sum(graph_edit_distance(c, g) ** 2 for g in graphs) for c in graphs]
    best = graphs[int(np.argmin(sums))]
    assert graph_set_median(graphs, dist=D) == best
    assert set_median_index(D) == int(np.argmin(sums))
