import logging
from typing import Optional, Union

import numpy as np
from scipy import stats

from engine.graph_core import accumulate_from_roots, graph_laplacian, reduced_laplacian_logdet
from models.graph import GridGraph, SpanningForest
from models.prior import DifferencePrior, PriorFamily
from utilities.constants import LAPLACE_ZERO_CLAMP
from utilities.errors import InvalidArgumentError, NotApplicableError
from utilities.rng import RngStream
from utilities.validation import InputValidation

logger = logging.getLogger(__name__)

# unit-scale, zero-location densities phi
_UNIT_DISTRIBUTIONS = {
    PriorFamily.GAUSSIAN: stats.norm,
    PriorFamily.LAPLACE: stats.laplace,
    PriorFamily.CAUCHY: stats.cauchy,
}

_TINY = np.finfo(np.float64).tiny

FamilyLike = Union[DifferencePrior, PriorFamily, str]


def _family(prior: FamilyLike) -> PriorFamily:
    return prior.family if isinstance(prior, DifferencePrior) else PriorFamily.parse(prior)


def unit_density(prior: FamilyLike, z):
    return _UNIT_DISTRIBUTIONS[_family(prior)].pdf(z)


def unit_log_density(prior: FamilyLike, z):
    return _UNIT_DISTRIBUTIONS[_family(prior)].logpdf(z)


def unit_cdf(prior: FamilyLike, z):
    return _UNIT_DISTRIBUTIONS[_family(prior)].cdf(z)


def unit_draws(prior: FamilyLike, rng: RngStream, size) -> np.ndarray:
    return _UNIT_DISTRIBUTIONS[_family(prior)].rvs(size=size, random_state=rng.generator)


def edge_scales(prior: DifferencePrior, graph: GridGraph) -> np.ndarray:
    """Multiplier c(e) of each edge difference: lambda, times the per-edge override when present."""
    if prior.edge_strength is None:
        return np.full(graph.n_edges, prior.strength)
    InputValidation.same_length("edge_strength", prior.edge_strength.size, graph.n_edges)
    return prior.strength * prior.edge_strength


def log_prior_density(prior: DifferencePrior, forest: SpanningForest, graph: GridGraph, image: np.ndarray) -> float:
    """
    Normalized log-density of the forest-factorized prior: every component contributes
    log r + log phi(r x_root), every forest edge log c + log phi(c dx).
    """
    x = np.asarray(image, dtype=np.float64).reshape(-1)
    InputValidation.same_length("image", x.size, graph.n_vertices)
    edge_ids = forest.included_edges
    c = edge_scales(prior, graph)[edge_ids]
    endpoints = graph.edges[edge_ids]
    dx = x[endpoints[:, 0]] - x[endpoints[:, 1]]
    r = prior.root_weight
    edge_terms = np.sum(np.log(c) + unit_log_density(prior, c * dx))
    root_terms = np.sum(np.log(r) + unit_log_density(prior, r * x[forest.roots]))
    return float(edge_terms + root_terms)


def log_full_gmrf_density(prior: DifferencePrior, graph: GridGraph, image: np.ndarray, root: int = 0) -> float:
    """
    Rooted GMRF over the whole lattice (cycles included), normalized with the matrix-tree theorem:
    det(L + r^2 e_r e_r^T) = r^2 det(L_v).
    """
    if prior.family is not PriorFamily.GAUSSIAN:
        raise NotApplicableError("the closed-form lattice normalizer exists for the Gaussian family only")
    x = np.asarray(image, dtype=np.float64).reshape(-1)
    c = edge_scales(prior, graph)
    r = prior.root_weight
    quadratic = x @ (graph_laplacian(graph, squared=True, weights=c) @ x) + (r * x[root]) ** 2
    log_normalizer = np.log(r) + 0.5 * reduced_laplacian_logdet(graph, squared=True, weights=c)
    return float(-0.5 * graph.n_vertices * np.log(2 * np.pi) + log_normalizer - 0.5 * quadratic)


def sample_prior(prior: DifferencePrior, forest: SpanningForest, graph: GridGraph, rng: RngStream) -> np.ndarray:
    """Exact draw: root values first, then independent edge differences propagated outwards."""
    InputValidation.same_length("forest", forest.n_vertices, graph.n_vertices)
    n = graph.n_vertices
    roots = forest.roots
    root_values = np.zeros(n)
    root_values[roots] = unit_draws(prior, rng, roots.size) / prior.root_weight
    non_roots = np.flatnonzero(forest.parent_edge >= 0)
    increments = np.zeros(n)
    c = edge_scales(prior, graph)[forest.parent_edge[non_roots]]
    increments[non_roots] = unit_draws(prior, rng, non_roots.size) / c
    return accumulate_from_roots(forest, increments, root_values)


def _mixture_gamma(prior: DifferencePrior, scale) -> np.ndarray:
    """
    Mixing parameter gamma for a difference with density c*phi(c*z): the Laplace rate c,
    or the Cauchy scale 1/c.
    """
    c = prior.strength if scale is None else np.asarray(scale, dtype=np.float64)
    if prior.family is PriorFamily.LAPLACE:
        return c
    if prior.family is PriorFamily.CAUCHY:
        return 1.0 / c
    raise NotApplicableError("the Gaussian family has no auxiliary scale variables")


def sample_aux_given_difference(prior: DifferencePrior, z, rng: RngStream, scale=None) -> np.ndarray:
    """
    Draws tau | z for z | tau ~ N(0, tau).

    Laplace: 1/tau | z ~ InvGaussian(mean gamma/|z|, shape gamma^2), |z| clamped at 1e-8/gamma.
    Cauchy:  1/tau | z ~ Gamma(shape 1, rate (z^2 + gamma^2)/2).
    :param scale: per-difference multiplier c (defaults to the prior strength)
    """
    gamma = _mixture_gamma(prior, scale)
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise InvalidArgumentError("differences must be finite")
    if prior.family is PriorFamily.LAPLACE:
        magnitude = np.maximum(np.abs(z), LAPLACE_ZERO_CLAMP / gamma)
        precision = rng.generator.wald(gamma / magnitude, gamma ** 2)
    else:
        precision = rng.generator.gamma(1.0, 2.0 / (z ** 2 + gamma ** 2))
    return 1.0 / np.maximum(precision, _TINY)


def sample_tau_marginal(prior: DifferencePrior, rng: RngStream, size=None, scale=None) -> np.ndarray:
    """
    Marginal mixing draw. Laplace: tau ~ Exp(rate gamma^2/2). Cauchy: tau ~ InvGamma(1/2, scale gamma^2/2).
    """
    gamma = _mixture_gamma(prior, scale)
    if size is None and np.ndim(gamma) > 0:
        size = np.shape(gamma)
    if prior.family is PriorFamily.LAPLACE:
        return rng.generator.exponential(2.0 / gamma ** 2, size)
    return 1.0 / np.maximum(rng.generator.gamma(0.5, 2.0 / gamma ** 2, size), _TINY)


def row_strengths(prior: DifferencePrior, graph: GridGraph, edge_ids: np.ndarray, n_roots: int) -> np.ndarray:
    """Multipliers of the difference-operator rows: c(e) for edge rows, r for root rows."""
    return np.concatenate([edge_scales(prior, graph)[edge_ids], np.full(n_roots, prior.root_weight)])
