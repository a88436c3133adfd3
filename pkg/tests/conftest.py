import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ccdetect.graphs import DEFAULT_COSTS, AttributedGraph
from ccdetect.manifold import pairwise_distances, project_to_manifold

settings.register_profile(
    "ci", max_examples=100, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def pytest_collection_modifyitems(items):
    for item in items:
        if getattr(getattr(item, "obj", None), "is_hypothesis_test", False):
            item.add_marker(pytest.mark.property)


def sample_points(rng, n, d, kappa, scale=1.0):
    """``n`` random points of ``M_kappa`` with intrinsic dimension ``d``."""
    if kappa == 0:
        return scale * rng.normal(size=(n, d))
    if kappa > 0:
        return project_to_manifold(rng.normal(size=(n, d + 1)), kappa)
    v = np.zeros((n, d + 1))
    v[:, 1:] = scale * rng.normal(size=(n, d))
    return project_to_manifold(v, kappa)


def sample_distances(rng, n, d, kappa, scale=1.0):
    X = sample_points(rng, n, d, kappa, scale)
    return X, pairwise_distances(X, kappa=kappa)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_graph(rng, max_nodes=4, box=3.0):
    n = int(rng.integers(0, max_nodes + 1))
    nodes = rng.uniform(0, box, size=(n, 2))
    edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.5]
    return AttributedGraph(nodes, edges)


def exact_ged(g1, g2, costs=DEFAULT_COSTS):
    """Exhaustive edit-path search over all partial node injections."""
    tn, te, cap = costs.node_insert_delete, costs.edge_insert_delete, costs.substitution_cap
    n, m = g1.n_nodes, g2.n_nodes
    e1, e2 = set(g1.edges), set(g2.edges)
    best = np.inf
    targets = list(range(m)) + [None] * n
    for images in set(itertools.permutations(targets, n)):
        cost = 0.0
        for i, a in enumerate(images):
            if a is None:
                cost += tn
            else:
                cost += min(np.linalg.norm(g1.nodes[i] - g2.nodes[a]), cap * tn)
        used = {a for a in images if a is not None}
        cost += tn * (m - len(used))
        kept = 0
        for i, j in e1:
            a, b = images[i], images[j]
            if a is not None and b is not None and (min(a, b), max(a, b)) in e2:
                kept += 1
        cost += te * (len(e1) - kept) + te * (len(e2) - kept)
        best = min(best, cost)
    return float(best) if n or m else 0.0


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    if config.acceptance_lines:
        terminalreporter.section("acceptance")
        for line in config.acceptance_lines:
            terminalreporter.write_line(line)
