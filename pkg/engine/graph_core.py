import logging
from typing import Optional

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.sparse import csgraph

from models.graph import DifferenceOperator, GridGraph, SpanningForest
from utilities.errors import InvalidArgumentError
from utilities.validation import InputValidation

logger = logging.getLogger(__name__)


def lattice_edges(height: int, width: int) -> np.ndarray:
    """Row-major scan; each vertex contributes its right edge, then its down edge."""
    index = np.arange(height * width, dtype=np.int64).reshape(height, width)
    right = np.stack([index[:, :-1], index[:, 1:]], axis=-1)
    down = np.stack([index[:-1, :], index[1:, :]], axis=-1)
    edges = np.full((height, width, 2, 2), -1, dtype=np.int64)
    edges[:, :-1, 0] = right
    edges[:-1, :, 1] = down
    edges = edges.reshape(-1, 2)
    return edges[edges[:, 0] >= 0]


def build_grid(height: int, width: int, uniform_weight: float = 1.0, terminal_weight: float = 0.0) -> GridGraph:
    InputValidation.positive_int("height", height)
    InputValidation.positive_int("width", width)
    InputValidation.positive("uniform_weight", float(uniform_weight))
    edges = lattice_edges(height, width)
    return GridGraph(height, width, edges, np.full(edges.shape[0], float(uniform_weight)), terminal_weight)


def build_weighted_grid(height: int, width: int, horizontal_weight: float, vertical_weight: float = 1.0,
                        terminal_weight: float = 0.0) -> GridGraph:
    graph = build_grid(height, width, 1.0, terminal_weight)
    horizontal = graph.edges[:, 0] // width == graph.edges[:, 1] // width
    weights = np.where(horizontal, float(horizontal_weight), float(vertical_weight))
    return graph.with_weights(weights)


def restrict_edges(graph: GridGraph, edge_ids, weights: Optional[np.ndarray] = None) -> GridGraph:
    edge_ids = np.asarray(edge_ids, dtype=np.int64)
    weights = graph.weights[edge_ids] if weights is None else weights
    return GridGraph(graph.height, graph.width, graph.edges[edge_ids], weights, graph.terminal_weight)


def incidence_matrix(graph: GridGraph, edge_ids: Optional[np.ndarray] = None) -> sp.csr_matrix:
    """+1 at the lower, -1 at the higher endpoint of each selected edge."""
    edge_ids = np.arange(graph.n_edges) if edge_ids is None else np.asarray(edge_ids, dtype=np.int64)
    rows = np.repeat(np.arange(edge_ids.size), 2)
    cols = graph.edges[edge_ids].reshape(-1)
    values = np.tile([1.0, -1.0], edge_ids.size)
    return sp.csr_matrix((values, (rows, cols)), shape=(edge_ids.size, graph.n_vertices))


def _with_root_rows(graph: GridGraph, edge_ids: np.ndarray, root_vertices: np.ndarray,
                    root_weight: float) -> DifferenceOperator:
    edge_rows = incidence_matrix(graph, edge_ids)
    root_rows = sp.csr_matrix((np.full(root_vertices.size, float(root_weight)),
                               (np.arange(root_vertices.size), root_vertices)),
                              shape=(root_vertices.size, graph.n_vertices))
    return DifferenceOperator(sp.vstack([edge_rows, root_rows], format="csr"), edge_ids, root_vertices, root_weight)


def difference_operator(forest: SpanningForest, graph: GridGraph, root_weight: float,
                        rooted: bool = True) -> DifferenceOperator:
    """
    One row per forest edge, in increasing edge index. When rooted, one extra row per component,
    placed at the component's root.
    """
    InputValidation.same_length("forest", forest.n_vertices, graph.n_vertices)
    roots = forest.roots if rooted else np.empty(0, dtype=np.int64)
    return _with_root_rows(graph, forest.included_edges, roots, root_weight)


def full_difference_operator(graph: GridGraph, root_weight: float, rooted: bool = True,
                             root: int = 0) -> DifferenceOperator:
    roots = np.array([root] if rooted else [], dtype=np.int64)
    return _with_root_rows(graph, np.arange(graph.n_edges, dtype=np.int64), roots, root_weight)


def graph_laplacian(graph: GridGraph, squared: bool = True, weights: Optional[np.ndarray] = None) -> sp.csr_matrix:
    """L = D^T W^2 D over all graph edges (D^T W D when squared is False)."""
    weights = graph.weights if weights is None else weights
    d = incidence_matrix(graph)
    w = weights ** 2 if squared else weights
    return (d.T @ sp.diags(w) @ d).tocsr()


def is_connected(graph: GridGraph) -> bool:
    if graph.has_terminal or graph.n_vertices == 1:
        return True
    adjacency = sp.csr_matrix((np.ones(graph.n_edges), (graph.edges[:, 0], graph.edges[:, 1])),
                              shape=(graph.n_vertices, graph.n_vertices))
    n_components, _ = csgraph.connected_components(adjacency, directed=False)
    return n_components == 1


def forest_from_edges(graph: GridGraph, edge_ids, root: int = 0) -> SpanningForest:
    """
    Parent pointers for an acyclic edge set. The component holding ``root`` is rooted there, every
    other component at its lowest vertex index.
    """
    edge_ids = np.asarray(edge_ids, dtype=np.int64)
    n = graph.n_vertices
    edges = graph.edges[edge_ids]
    adjacency = sp.csr_matrix((np.ones(edge_ids.size), (edges[:, 0], edges[:, 1])), shape=(n, n))
    n_components, labels = csgraph.connected_components(adjacency, directed=False)
    if edge_ids.size != n - n_components:
        raise InvalidArgumentError("edge set contains a cycle")
    edge_of = {}
    for edge_id, (a, b) in zip(edge_ids, edges):
        edge_of[(int(a), int(b))] = int(edge_id)
        edge_of[(int(b), int(a))] = int(edge_id)
    parent = np.full(n, -1, dtype=np.int64)
    parent_edge = np.full(n, -1, dtype=np.int64)
    starts = {}
    for v in range(n):
        starts.setdefault(labels[v], v)
    starts[labels[root]] = root
    for start in starts.values():
        _, predecessors = csgraph.breadth_first_order(adjacency, start, directed=False, return_predecessors=True)
        reached = np.flatnonzero(predecessors >= 0)
        parent[reached] = predecessors[reached]
        parent_edge[reached] = [edge_of[(int(v), int(predecessors[v]))] for v in reached]
    return SpanningForest(parent, parent_edge)


def forest_topological_order(forest: SpanningForest) -> np.ndarray:
    """Vertices ordered so that every parent precedes its children (breadth first from the roots)."""
    n = forest.n_vertices
    roots = forest.roots
    # a virtual vertex n points at every root
    children = sp.vstack([forest.children, sp.csr_matrix((np.ones(roots.size), (np.zeros(roots.size, dtype=np.int64), roots)),
                                                          shape=(1, n))], format="csr")
    children = sp.hstack([children, sp.csr_matrix((n + 1, 1))], format="csr")
    order = csgraph.breadth_first_order(children, n, directed=True, return_predecessors=False)
    return order[1:].astype(np.int64)


@njit(cache=True)
def accumulate_along_order(order, parent, increments, root_values):
    values = np.empty(parent.shape[0])
    for i in range(order.shape[0]):
        v = order[i]
        if parent[v] < 0:
            values[v] = root_values[v]
        else:
            values[v] = values[parent[v]] + increments[v]
    return values


def accumulate_from_roots(forest: SpanningForest, increments: np.ndarray, root_values: np.ndarray) -> np.ndarray:
    """x[root] = root_values[root]; x[child] = x[parent] + increments[child]."""
    order = forest_topological_order(forest)
    return accumulate_along_order(order, forest.parent, np.asarray(increments, dtype=np.float64),
                                   np.asarray(root_values, dtype=np.float64))


def reduced_laplacian_logdet(graph: GridGraph, squared: bool = True, weights: Optional[np.ndarray] = None,
                             deleted_vertex: int = 0) -> float:
    """log det of the Laplacian with one row and column removed (dense)."""
    laplacian = graph_laplacian(graph, squared, weights).toarray()
    keep = np.arange(graph.n_vertices) != deleted_vertex
    sign, logdet = np.linalg.slogdet(laplacian[np.ix_(keep, keep)])
    if sign <= 0:
        return -np.inf
    return float(logdet)
