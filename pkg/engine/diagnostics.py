import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from engine.graph_core import accumulate_along_order, accumulate_from_roots, build_grid, build_weighted_grid
from engine.tree_sampler import wilson_sample, wilson_sample_from_roots, wilson_sample_terminal
from models.graph import GridGraph, SpanningForest, TreeDistribution
from utilities.constants import DEFAULT_STEP_BUDGET
from utilities.errors import InterfaceNotFoundError, InvalidArgumentError
from utilities.rng import RngStream
from utilities.time import Stopwatch

logger = logging.getLogger(__name__)


def _as_2d(image) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise InvalidArgumentError("contrast metrics take a 2-D image")
    return image


def max_local_contrast(image) -> float:
    """Largest |x_u - x_v| over 4-neighbour pairs."""
    image = _as_2d(image)
    horizontal = np.abs(np.diff(image, axis=1))
    vertical = np.abs(np.diff(image, axis=0))
    return float(max(horizontal.max(initial=0.0), vertical.max(initial=0.0)))


def global_contrast(image) -> float:
    return float(np.ptp(_as_2d(image)))


def tree_depth_field(forest: SpanningForest, graph: GridGraph, root: int = 0) -> np.ndarray:
    """
    Graph distance along the forest from ``root``. Components that do not contain the root are
    measured from their own forest root and shifted past the largest depth assigned so far.
    """
    n = graph.n_vertices
    if forest.n_vertices != n or not 0 <= root < n:
        raise InvalidArgumentError("forest and root must belong to the graph")
    edges = graph.edges[forest.included_edges]
    adjacency = sp.csr_matrix((np.ones(edges.shape[0]), (edges[:, 0], edges[:, 1])), shape=(n, n))
    depth = np.full(n, -1, dtype=np.int64)
    ones = np.ones(n)
    offset = 0
    for start in [root, *forest.roots]:
        if depth[start] >= 0:
            continue
        order, predecessors = csgraph.breadth_first_order(adjacency, start, directed=False,
                                                          return_predecessors=True)
        values = accumulate_along_order(order.astype(np.int64), predecessors.astype(np.int64), ones,
                                        np.full(n, float(offset)))
        depth[order] = values[order].astype(np.int64)
        offset = int(depth[order].max()) + 1
    return depth.reshape(graph.shape)


def interface_roughness(image, threshold: float = 0.5) -> Tuple[int, int]:
    """
    Length of the ``threshold`` level boundary (pixel pairs straddling it) and its span: the larger
    of its extents along the two axes, in pixel units. length / span is 1 for a straight interface.
    """
    above = _as_2d(image) >= threshold
    horizontal = above[:, 1:] != above[:, :-1]
    vertical = above[1:, :] != above[:-1, :]
    length = int(horizontal.sum() + vertical.sum())
    if length == 0:
        raise InterfaceNotFoundError(f"no pixel pair crosses the level {threshold}")
    span = max(int(horizontal.any(axis=1).sum()), int(vertical.any(axis=0).sum()))
    return length, span


def boundary_interface_image(size: int, rng: RngStream, step_budget: int = DEFAULT_STEP_BUDGET) -> np.ndarray:
    """
    Uniform spanning tree of a size x size grid with the whole boundary wired together. Boundary
    pixels left of the middle column are coloured 0, the others 1; every pixel takes the colour of
    the boundary pixel its tree path ends at.
    """
    graph = build_grid(size, size)
    rows, cols = np.indices(graph.shape)
    boundary = ((rows == 0) | (cols == 0) | (rows == size - 1) | (cols == size - 1)).reshape(-1)
    colour = (cols >= size / 2).astype(np.float64).reshape(-1)
    forest = wilson_sample_from_roots(TreeDistribution(graph), boundary, rng, step_budget)
    image = accumulate_from_roots(forest, np.zeros(graph.n_vertices), colour)
    return image.reshape(graph.shape)


def _sample_once(dist: TreeDistribution, rng: RngStream, step_budget: int) -> SpanningForest:
    if dist.has_terminal:
        return wilson_sample_terminal(dist, rng, step_budget)
    return wilson_sample(dist, 0, rng, step_budget)


def benchmark_tree_runtime(sizes: Sequence[int], kappa_values: Sequence[float], rho_values: Sequence[float],
                           repeats: int, rng: RngStream, timings: bool = True,
                           step_budget: int = DEFAULT_STEP_BUDGET) -> List[list]:
    """
    Mean walk steps and mean wall time per sample on n x n grids, horizontal weight kappa, vertical
    weight 1, terminal weight rho_rel (0 = plain Wilson rooted at vertex 0). One row per combination,
    in the order sizes, kappas, rhos.
    """
    # compile the walk kernel outside the timed region
    _sample_once(TreeDistribution(build_grid(2, 2)), rng, step_budget)
    _sample_once(TreeDistribution(build_grid(2, 2, terminal_weight=1.0)), rng, step_budget)
    rows = []
    for size in sizes:
        for kappa in kappa_values:
            for rho_rel in rho_values:
                dist = TreeDistribution(build_weighted_grid(size, size, kappa, 1.0, rho_rel))
                steps = []
                stopwatch = Stopwatch()
                for _ in range(repeats):
                    steps.append(_sample_once(dist, rng, step_budget).walk_steps)
                wall_time_ms = stopwatch.elapsed_ms() / repeats if timings else 0.0
                rows.append([size, kappa, rho_rel, float(np.mean(steps)), wall_time_ms])
                logger.info(f"benchmark n={size} kappa={kappa} rho_rel={rho_rel}: "
                            f"{np.mean(steps):.0f} steps, {wall_time_ms:.2f} ms")
    return rows


def contrast_row(strength: float, family: str, rst: bool, mean_image: np.ndarray,
                 sample_max_local_contrast: float, sample_global_contrast: float) -> list:
    """Posterior-mean contrasts next to the per-sample averages."""
    return [strength, family, rst, max_local_contrast(mean_image), global_contrast(mean_image),
            sample_max_local_contrast, sample_global_contrast]


def loglog_slope(x: Sequence[float], y: Sequence[float], weights: Optional[Sequence[float]] = None) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(x), np.log(y), 1, w=weights)[0])
