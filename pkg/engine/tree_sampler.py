import itertools
import logging
from typing import List, Optional, Tuple

import numpy as np
from numba import njit
from scipy.cluster.hierarchy import DisjointSet

from engine.graph_core import forest_from_edges, reduced_laplacian_logdet
from engine.mrf_priors import edge_scales, unit_density
from models.graph import GridGraph, SpanningForest, TreeDistribution
from models.prior import DifferencePrior
from utilities.constants import (DEFAULT_STEP_BUDGET, DENSE_DETERMINANT_MAX_VERTICES, ENUMERATION_MAX_EDGES,
                                 FOREST_ENUMERATION_MAX_EDGES, TERMINAL)
from utilities.errors import InvalidArgumentError, NoSpanningTreeError, TooLargeError
from utilities.rng import RngStream
from utilities.validation import InputValidation

logger = logging.getLogger(__name__)

_TINY = np.finfo(np.float64).tiny

_OK = 0
_STUCK = 1
_OVER_BUDGET = 2


@njit(cache=True)
def _loop_erased_walks(indptr, neighbors, neighbor_edges, edge_weights, terminal_weights, in_tree, seed,
                       step_budget):
    """
    Wilson's algorithm with next-pointer loop erasure. Walks start at every vertex not yet in the tree,
    in row-major order. A walk may also jump to the terminal vertex when terminal_weights is non-empty.
    """
    np.random.seed(seed)
    n = indptr.shape[0] - 1
    has_terminal = terminal_weights.shape[0] > 0
    in_tree = in_tree.copy()
    next_vertex = np.full(n, -1, dtype=np.int64)
    next_edge = np.full(n, -1, dtype=np.int64)
    steps = 0
    for start in range(n):
        u = start
        while not in_tree[u]:
            total = terminal_weights[u] if has_terminal else 0.0
            for k in range(indptr[u], indptr[u + 1]):
                total += edge_weights[neighbor_edges[k]]
            if not total > 0.0:
                return next_vertex, next_edge, steps, _STUCK
            steps += 1
            if steps > step_budget:
                return next_vertex, next_edge, steps, _OVER_BUDGET
            target = np.random.random() * total
            chosen = -1
            cumulative = 0.0
            for k in range(indptr[u], indptr[u + 1]):
                cumulative += edge_weights[neighbor_edges[k]]
                if target < cumulative:
                    chosen = k
                    break
            if chosen < 0 and not has_terminal:
                # rounding at the top of the cumulative sum
                chosen = indptr[u + 1] - 1
            if chosen < 0:
                next_vertex[u] = TERMINAL
                next_edge[u] = -1
                break
            next_vertex[u] = neighbors[chosen]
            next_edge[u] = neighbor_edges[chosen]
            u = neighbors[chosen]
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            if next_vertex[u] == TERMINAL:
                break
            u = next_vertex[u]
    return next_vertex, next_edge, steps, _OK


def _run_walks(dist: TreeDistribution, in_tree: np.ndarray, rng: RngStream, step_budget: int) -> SpanningForest:
    indptr, neighbors, neighbor_edges = dist.graph.adjacency
    next_vertex, next_edge, steps, status = _loop_erased_walks(
        indptr, neighbors, neighbor_edges, dist.weights, dist.terminal_weights, in_tree, rng.kernel_seed(),
        int(step_budget))
    if status == _STUCK:
        raise NoSpanningTreeError("a walk reached a vertex with no neighbours and no terminal edge", steps)
    if status == _OVER_BUDGET:
        raise NoSpanningTreeError(f"step budget of {step_budget} exhausted; is the graph connected?", steps)
    parent = np.where(next_vertex == TERMINAL, -1, next_vertex)
    forest = SpanningForest(parent, next_edge, walk_steps=steps)
    logger.debug(f"Wilson walks: {steps} steps, {forest.component_count} components")
    return forest


def wilson_sample(dist: TreeDistribution, root: int, rng: RngStream,
                  step_budget: int = DEFAULT_STEP_BUDGET) -> SpanningForest:
    """
    Spanning tree with P(T) proportional to the product of ``dist.weights`` over its edges.

    Raises NoSpanningTreeError when the walks exhaust ``step_budget``, which is how a disconnected
    graph shows up.
    """
    if dist.has_terminal:
        raise InvalidArgumentError("distribution has a terminal vertex; use wilson_sample_terminal")
    n = dist.graph.n_vertices
    if not 0 <= root < n:
        raise InvalidArgumentError(f"root {root} outside a graph with {n} vertices")
    in_tree = np.zeros(n, dtype=np.bool_)
    in_tree[root] = True
    return _run_walks(dist, in_tree, rng, step_budget)


def wilson_sample_terminal(dist: TreeDistribution, rng: RngStream,
                           step_budget: int = DEFAULT_STEP_BUDGET) -> SpanningForest:
    """
    Wilson's algorithm rooted at the terminal vertex. Every vertex whose walk jumped to the terminal
    becomes the root of its component; the terminal and its edges are dropped from the result.
    """
    if not dist.has_terminal:
        raise InvalidArgumentError("distribution has no terminal vertex; use wilson_sample")
    in_tree = np.zeros(dist.graph.n_vertices, dtype=np.bool_)
    return _run_walks(dist, in_tree, rng, step_budget)


def wilson_sample_from_roots(dist: TreeDistribution, root_mask: np.ndarray, rng: RngStream,
                             step_budget: int = DEFAULT_STEP_BUDGET) -> SpanningForest:
    """Wilson's algorithm with every vertex of ``root_mask`` wired together as the initial tree."""
    root_mask = np.asarray(root_mask, dtype=np.bool_).reshape(-1)
    InputValidation.same_length("root_mask", root_mask.size, dist.graph.n_vertices)
    if not root_mask.any() and not dist.has_terminal:
        raise InvalidArgumentError("root_mask selects no vertex")
    return _run_walks(dist, root_mask, rng, step_budget)


def conjugate_weights(graph: GridGraph, image: np.ndarray, prior: DifferencePrior,
                      base_weights: Optional[np.ndarray] = None, weight_floor: Optional[float] = None) -> np.ndarray:
    """w~(e) = w(e) phi(c(e) dx(e)), times the relative per-edge strength when the prior has one."""
    x = np.asarray(image, dtype=np.float64).reshape(-1)
    InputValidation.same_length("image", x.size, graph.n_vertices)
    base_weights = graph.weights if base_weights is None else np.asarray(base_weights, dtype=np.float64)
    c = edge_scales(prior, graph)
    dx = x[graph.edges[:, 0]] - x[graph.edges[:, 1]]
    weights = base_weights * unit_density(prior, c * dx)
    if prior.edge_strength is not None:
        weights = weights * prior.edge_strength
    weights = np.maximum(weights, _TINY)
    if weight_floor is not None:
        weights = np.maximum(weights, InputValidation.positive("weight_floor", float(weight_floor)))
    return weights


def terminal_weights(image: np.ndarray, prior: DifferencePrior, rho: float) -> np.ndarray:
    """
    Per-vertex terminal weights rho (r/lambda) phi(r x_v). Attaching v to the terminal makes it a
    component root, so this is the root factor that replaces one edge factor.
    """
    x = np.asarray(image, dtype=np.float64).reshape(-1)
    r = prior.root_weight
    weights = rho * (r / prior.strength) * unit_density(prior, r * x)
    return np.maximum(weights, _TINY)


def _guard_enumeration(graph: GridGraph, limit: int):
    if graph.n_edges > limit:
        raise TooLargeError(f"refusing to enumerate a graph with {graph.n_edges} edges (limit {limit})")


def _acyclic(graph: GridGraph, edge_ids) -> bool:
    components = DisjointSet(range(graph.n_vertices))
    for a, b in graph.edges[list(edge_ids)].tolist():
        if components.connected(a, b):
            return False
        components.merge(a, b)
    return True


def enumerate_trees(graph: GridGraph, weights: Optional[np.ndarray] = None) -> List[Tuple[SpanningForest, float]]:
    """All spanning trees with their exact probabilities under ``weights`` (the graph's by default)."""
    _guard_enumeration(graph, ENUMERATION_MAX_EDGES)
    weights = graph.weights if weights is None else np.asarray(weights, dtype=np.float64)
    n = graph.n_vertices
    trees, masses = [], []
    for edge_ids in itertools.combinations(range(graph.n_edges), n - 1):
        if _acyclic(graph, edge_ids):
            trees.append(forest_from_edges(graph, edge_ids))
            masses.append(np.prod(weights[list(edge_ids)]))
    if not trees:
        raise NoSpanningTreeError("graph has no spanning tree")
    masses = np.asarray(masses)
    return list(zip(trees, masses / masses.sum()))


def enumerate_forests(graph: GridGraph, weights: Optional[np.ndarray] = None,
                      terminal_weights: Optional[np.ndarray] = None) -> List[Tuple[SpanningForest, float]]:
    """
    Spanning forests of the graph joined to a terminal vertex. A forest's mass is the product of its
    edge weights times, per component, the summed terminal weights of its vertices.
    """
    _guard_enumeration(graph, FOREST_ENUMERATION_MAX_EDGES)
    dist = TreeDistribution(graph, weights, terminal_weights)
    if not dist.has_terminal:
        raise InvalidArgumentError("forest enumeration needs terminal weights")
    forests, masses = [], []
    for size in range(graph.n_vertices):
        for edge_ids in itertools.combinations(range(graph.n_edges), size):
            if not _acyclic(graph, edge_ids):
                continue
            forest = forest_from_edges(graph, edge_ids)
            labels = _component_labels(forest)
            attach = np.bincount(labels, weights=dist.terminal_weights)
            forests.append(forest)
            masses.append(np.prod(dist.weights[list(edge_ids)]) * np.prod(attach))
    masses = np.asarray(masses)
    return list(zip(forests, masses / masses.sum()))


def _component_labels(forest: SpanningForest) -> np.ndarray:
    labels = np.arange(forest.n_vertices)
    for v in range(forest.n_vertices):
        u = v
        while forest.parent[u] >= 0:
            u = forest.parent[u]
        labels[v] = u
    return np.unique(labels, return_inverse=True)[1]


def matrix_tree_count(graph: GridGraph, squared: bool = True, weights: Optional[np.ndarray] = None,
                      deleted_vertex: int = 0) -> float:
    """Reduced Laplacian determinant: sum over spanning trees of the product of (squared) edge weights."""
    if graph.n_vertices > DENSE_DETERMINANT_MAX_VERTICES:
        raise TooLargeError(f"dense determinant refused for {graph.n_vertices} vertices")
    return float(np.exp(reduced_laplacian_logdet(graph, squared, weights, deleted_vertex)))
