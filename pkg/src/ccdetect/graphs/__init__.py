from .core import AttributedGraph, GraphError
from .dataset import (
    DelaunayClassSpec,
    class_seed_points,
    generate_class_graph,
    generate_class_graphs,
    read_dataset,
    read_graphs,
    write_dataset,
)
from .delaunay import TriangulationError, delaunay_edges, triangulate
from .ged import (
    DEFAULT_COSTS,
    EditCosts,
    distance_matrix,
    graph_edit_distance,
    graph_set_median,
    set_median_index,
    solve_lsap,
)

__all__ = [
    "AttributedGraph", "DEFAULT_COSTS", "DelaunayClassSpec", "EditCosts",
    "GraphError", "TriangulationError", "class_seed_points",
    "delaunay_edges", "distance_matrix", "generate_class_graph",
    "generate_class_graphs", "graph_edit_distance", "graph_set_median",
    "read_dataset", "read_graphs", "set_median_index", "solve_lsap",
    "triangulate", "write_dataset",
]
