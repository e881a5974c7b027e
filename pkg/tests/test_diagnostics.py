import numpy as np
import pytest

from engine.diagnostics import (benchmark_tree_runtime, boundary_interface_image, contrast_row, global_contrast,
                                interface_roughness, loglog_slope, max_local_contrast, tree_depth_field)
from engine.forward_models import make_phantom
from engine.graph_core import build_grid, forest_from_edges
from engine.tree_sampler import wilson_sample
from models.graph import TreeDistribution
from utilities.errors import InterfaceNotFoundError, InvalidArgumentError
from utilities.rng import RngStream


def test_contrast_examples():
    assert max_local_contrast(np.full((4, 4), 0.3)) == 0.0
    assert global_contrast(np.full((4, 4), 0.3)) == 0.0
    step = make_phantom("step", 8, 8).image
    assert max_local_contrast(step) == 1.0
    checkerboard = np.indices((5, 5)).sum(axis=0) % 2
    assert max_local_contrast(checkerboard) == 1.0
    assert global_contrast(np.array([[0.2, 0.5], [0.9, 0.4]])) == pytest.approx(0.7)
    assert global_contrast(make_phantom("disk", 32, 32).image) == 1.0


def test_contrast_is_translation_invariant_and_scale_equivariant(rng):
    image = rng.normal((6, 7))
    for metric in (max_local_contrast, global_contrast):
        assert metric(image + 3.0) == pytest.approx(metric(image))
        assert metric(2.5 * image) == pytest.approx(2.5 * metric(image))


def test_contrast_needs_a_2d_image():
    with pytest.raises(InvalidArgumentError):
        max_local_contrast(np.zeros(4))


def test_depth_along_a_path():
    graph = build_grid(1, 5)
    forest = forest_from_edges(graph, [0, 1, 2, 3], root=4)
    assert tree_depth_field(forest, graph, root=4).tolist() == [[4, 3, 2, 1, 0]]
    assert tree_depth_field(forest, graph, root=0).tolist() == [[0, 1, 2, 3, 4]]


def test_depth_field_of_a_sampled_tree(rng):
    graph = build_grid(12, 12)
    forest = wilson_sample(TreeDistribution(graph), 30, rng)
    depth = tree_depth_field(forest, graph, root=30)
    assert depth.shape == (12, 12)
    assert depth.reshape(-1)[30] == 0
    assert depth.max() < graph.n_vertices
    # neighbours along a tree edge differ by exactly one level
    for edge_id in forest.included_edges:
        a, b = graph.edges[edge_id]
        assert abs(depth.reshape(-1)[a] - depth.reshape(-1)[b]) == 1


def test_depth_field_offsets_other_components():
    graph = build_grid(1, 4)
    forest = forest_from_edges(graph, [0, 2])
    assert tree_depth_field(forest, graph, root=0).tolist() == [[0, 1, 2, 3]]


def test_straight_interface_has_unit_ratio():
    length, span = interface_roughness(make_phantom("step", 10, 10).image)
    assert length == span == 10


def test_interface_length_bounds_span(rng):
    image = rng.uniform((16, 16))
    length, span = interface_roughness(image)
    assert length >= span


def test_interface_needs_a_crossing():
    with pytest.raises(InterfaceNotFoundError):
        interface_roughness(np.zeros((4, 4)))


def test_boundary_interface_image(rng):
    image = boundary_interface_image(20, rng)
    assert set(np.unique(image)) <= {0.0, 1.0}
    assert np.all(image[:, 0] == 0.0) and np.all(image[:, -1] == 1.0)
    length, span = interface_roughness(image)
    assert length >= span >= 18


def test_benchmark_rows_and_order():
    rows = benchmark_tree_runtime([4, 6], [1.0, 100.0], [0.0, 0.1], 3, RngStream(0), timings=False)
    assert len(rows) == 8
    assert [row[:3] for row in rows[:4]] == [[4, 1.0, 0.0], [4, 1.0, 0.1], [4, 100.0, 0.0], [4, 100.0, 0.1]]
    assert all(row[3] > 0 and row[4] == 0.0 for row in rows)


def test_benchmark_is_reproducible_without_timings():
    first = benchmark_tree_runtime([5], [1.0], [0.0, 0.5], 4, RngStream(3), timings=False)
    second = benchmark_tree_runtime([5], [1.0], [0.0, 0.5], 4, RngStream(3), timings=False)
    assert first == second


@pytest.mark.slow
def test_uniform_tree_steps_scale_near_linearly():
    sizes = [32, 64, 128, 256]
    rows = benchmark_tree_runtime(sizes, [1.0], [0.0], 20, RngStream(1), timings=False)
    slope = loglog_slope([n * n for n in sizes], [row[3] for row in rows])
    assert 1.0 <= slope <= 1.3


@pytest.mark.slow
def test_terminal_vertex_bounds_steps_per_vertex():
    rho = 0.01
    sizes = [32, 64, 128, 256]
    rows = benchmark_tree_runtime(sizes, [1.0], [rho], 5, RngStream(2), timings=False)
    bound = (4.0 + rho) / rho
    per_vertex = [row[3] / n ** 2 for row, n in zip(rows, sizes)]
    assert max(per_vertex) <= 1.5 * bound
    # flat in the grid size, not growing with it
    assert max(per_vertex) / min(per_vertex) < 1.5


@pytest.mark.slow
def test_bottleneck_weights_slow_plain_wilson():
    rows = benchmark_tree_runtime([16], [1.0, 1e4], [0.0], 20, RngStream(4), timings=False)
    assert rows[1][3] > 5 * rows[0][3]


def test_contrast_row_layout():
    mean = np.array([[0.0, 0.25], [0.5, 1.0]])
    row = contrast_row(10.0, "laplace", True, mean, 0.9, 1.1)
    assert row == [10.0, "laplace", True, 0.5, 1.0, 0.9, 1.1]


def test_loglog_slope_of_a_power_law():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert loglog_slope(x, 3.0 * x ** 2) == pytest.approx(2.0)
