from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp

from models import Model, ValueObject
from utilities.errors import InvalidArgumentError
from utilities.validation import InputValidation


class GridGraph(Model, ValueObject):
    """
    Weighted 4-connected pixel lattice, vertices in row-major order.

    Edges are stored oriented (lower index, higher index). ``terminal_weight`` is the weight rho of
    the edges to the optional terminal vertex; 0 means there is no terminal vertex.
    """

    def __init__(self, height: int, width: int, edges: np.ndarray, weights: np.ndarray, terminal_weight: float = 0.0):
        InputValidation.positive_int("height", height)
        InputValidation.positive_int("width", width)
        InputValidation.non_negative("terminal_weight", float(terminal_weight))
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        InputValidation.same_length("weights", weights.size, edges.shape[0])
        if weights.size and not (np.all(np.isfinite(weights)) and np.all(weights > 0)):
            raise InvalidArgumentError("edge weights must be strictly positive; remove zero-weight edges instead")
        if edges.size and not np.all(edges[:, 0] < edges[:, 1]):
            raise InvalidArgumentError("edges must be oriented from the lower to the higher vertex index")
        if edges.size and edges.max() >= height * width:
            raise InvalidArgumentError("edge endpoint outside the lattice")
        self.height = int(height)
        self.width = int(width)
        self.edges = edges
        self.weights = weights
        self.terminal_weight = float(terminal_weight)

    @property
    def n_vertices(self) -> int:
        return self.height * self.width

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def shape(self):
        return self.height, self.width

    @property
    def has_terminal(self) -> bool:
        return self.terminal_weight > 0

    @cached_property
    def adjacency(self):
        """CSR-style neighbour lists: (indptr, neighbours, edge id of each neighbour entry)."""
        n, m = self.n_vertices, self.n_edges
        heads = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        tails = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        edge_ids = np.concatenate([np.arange(m), np.arange(m)]).astype(np.int64)
        order = np.lexsort((tails, heads))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(heads, minlength=n), out=indptr[1:])
        return indptr, tails[order].astype(np.int64), edge_ids[order]

    def with_weights(self, weights: np.ndarray) -> "GridGraph":
        return GridGraph(self.height, self.width, self.edges, weights, self.terminal_weight)

    def with_terminal_weight(self, terminal_weight: float) -> "GridGraph":
        return GridGraph(self.height, self.width, self.edges, self.weights, terminal_weight)


class SpanningForest(Model, ValueObject):
    """
    Rooted spanning forest stored as parent pointers.

    ``parent[v]`` is the next vertex on the path from v to its component root (-1 for roots) and
    ``parent_edge[v]`` the graph edge joining them. Roots are the tree root, or the vertices that
    attached to the terminal vertex.
    """

    def __init__(self, parent: np.ndarray, parent_edge: np.ndarray, walk_steps: int = 0):
        parent = np.asarray(parent, dtype=np.int64)
        parent_edge = np.asarray(parent_edge, dtype=np.int64)
        InputValidation.same_length("parent_edge", parent_edge.size, parent.size)
        if np.any((parent >= 0) != (parent_edge >= 0)):
            raise InvalidArgumentError("parent and parent_edge disagree on which vertices are roots")
        self.parent = parent
        self.parent_edge = parent_edge
        self.walk_steps = int(walk_steps)

    @property
    def n_vertices(self) -> int:
        return self.parent.size

    @cached_property
    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent < 0)

    @property
    def component_count(self) -> int:
        return int(self.roots.size)

    @cached_property
    def included_edges(self) -> np.ndarray:
        return np.sort(self.parent_edge[self.parent_edge >= 0])

    @cached_property
    def children(self) -> sp.csr_matrix:
        """Sparse (parent, child) incidence; row v lists the children of v."""
        child = np.flatnonzero(self.parent >= 0)
        n = self.n_vertices
        return sp.csr_matrix((np.ones(child.size), (self.parent[child], child)), shape=(n, n))

    def key(self) -> tuple:
        return tuple(int(e) for e in self.included_edges)


class DifferenceOperator(Model, ValueObject):
    """
    Finite-difference rows of a forest (or of the whole lattice), plus optional root rows.

    Edge rows carry +1 at the lower and -1 at the higher vertex index. Root rows carry
    ``root_weight`` at one root vertex each and follow the edge rows.
    """

    def __init__(self, matrix: sp.csr_matrix, edge_ids: np.ndarray, root_vertices: np.ndarray, root_weight: float):
        self.matrix = matrix.tocsr()
        self.edge_ids = np.asarray(edge_ids, dtype=np.int64)
        self.root_vertices = np.asarray(root_vertices, dtype=np.int64)
        self.root_weight = float(root_weight)

    @property
    def n_edge_rows(self) -> int:
        return self.edge_ids.size

    @property
    def n_root_rows(self) -> int:
        return self.root_vertices.size

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x


class TreeDistribution(Model, ValueObject):
    """
    Law of a weighted random spanning tree: P(T) proportional to the product of its edge weights.

    ``terminal_weights`` is empty when there is no terminal vertex, otherwise one weight per vertex
    (the graph's constant rho unless overridden).
    """

    def __init__(self, graph: GridGraph, weights: Optional[np.ndarray] = None,
                 terminal_weights: Optional[np.ndarray] = None):
        weights = graph.weights if weights is None else np.asarray(weights, dtype=np.float64)
        InputValidation.same_length("weights", weights.size, graph.n_edges)
        if weights.size and not (np.all(np.isfinite(weights)) and np.all(weights > 0)):
            raise InvalidArgumentError("tree weights must be strictly positive")
        if terminal_weights is None:
            terminal_weights = (np.full(graph.n_vertices, graph.terminal_weight) if graph.has_terminal
                                else np.empty(0))
        else:
            terminal_weights = np.asarray(terminal_weights, dtype=np.float64)
            InputValidation.same_length("terminal_weights", terminal_weights.size, graph.n_vertices)
            if not np.all(terminal_weights > 0):
                raise InvalidArgumentError("terminal weights must be strictly positive")
        self.graph = graph
        self.weights = weights
        self.terminal_weights = terminal_weights

    @property
    def has_terminal(self) -> bool:
        return self.terminal_weights.size > 0
