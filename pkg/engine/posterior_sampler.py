"""
Two-block Gibbs sampler over (image, spanning forest).

Each sweep conjugates the lattice weights with the current image, draws a new forest with Wilson's
algorithm, refreshes the scale-mixture variances for Laplace/Cauchy priors, and draws the image from
its Gaussian conditional by randomize-then-optimize (one CG solve per sweep).
"""
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from engine.diagnostics import global_contrast, max_local_contrast
from engine.forward_models import apply_adjoint, apply_forward, forward_operator
from engine.graph_core import build_grid, difference_operator, full_difference_operator
from engine.mrf_priors import row_strengths, sample_aux_given_difference, sample_tau_marginal, unit_density
from engine.sparse_linalg import CgResult, LinearOperatorStack, cg_solve, hutchinson_diagonal
from engine.tree_sampler import conjugate_weights, terminal_weights, wilson_sample, wilson_sample_terminal
from models.chain import ChainConfig, ChainResult, ChainState, ChainSummary, CgSettings
from models.graph import DifferenceOperator, GridGraph, SpanningForest, TreeDistribution
from models.prior import AuxiliaryScales, DifferencePrior, PriorFamily
from models.problem import ForwardKind, LinearProblem
from utilities.constants import ENV_WORKERS
from utilities.errors import ConfigError, NumericalBreakdownError
from utilities.rng import RngStream
from utilities.storage import SampleStorage
from utilities.time import Stopwatch

logger = logging.getLogger(__name__)


@lru_cache(maxsize=8)
def lattice(height: int, width: int, base_weight: float = 1.0, terminal_weight: float = 0.0) -> GridGraph:
    return build_grid(height, width, base_weight, terminal_weight)


def chain_graph(config: ChainConfig) -> GridGraph:
    """Hyperprior lattice; rho = rho_rel * phi(0) when the terminal vertex is on."""
    rho = config.rho_rel * float(unit_density(config.prior, 0.0)) if config.rst else 0.0
    return lattice(config.height, config.width, config.base_weight, rho)


def _prior_operator(graph: GridGraph, forest: Optional[SpanningForest], rooted: bool, root: int) -> DifferenceOperator:
    # unit root rows; the root strength r enters through the row scales
    if forest is None:
        return full_difference_operator(graph, 1.0, rooted, root)
    return difference_operator(forest, graph, 1.0, rooted)


def prior_row_scales(prior: DifferencePrior, graph: GridGraph, operator: DifferenceOperator,
                     aux: Optional[AuxiliaryScales]) -> np.ndarray:
    """Lambda of the RTO prior term: c(e) and r for the Gaussian family, tau^(-1/2) for mixtures."""
    if prior.family.is_scale_mixture:
        return aux.row_scales()
    return row_strengths(prior, graph, operator.edge_ids, operator.n_root_rows)


def sample_gaussian_conditional(problem: Optional[LinearProblem], operator: DifferenceOperator,
                                row_scales: np.ndarray, rng: RngStream, settings: CgSettings,
                                x0: Optional[np.ndarray] = None) -> Tuple[np.ndarray, CgResult]:
    """
    One draw from N(H^-1 A^T y / s^2, H^-1), H = A^T A / s^2 + D^T L^2 D, by solving
    H x = A^T (y + s xi_1) / s^2 + D^T L xi_2.
    """
    n = operator.matrix.shape[1]
    scaled = sp.diags(row_scales) @ operator.matrix
    stack = LinearOperatorStack(n)
    rhs = np.zeros(n)
    if problem is not None:
        sigma = problem.noise_sd
        stack.add(forward_operator(problem), 1.0 / sigma ** 2)
        rhs += apply_adjoint(problem, problem.data + sigma * rng.normal(problem.n_observations)) / sigma ** 2
    if operator.n_rows:
        stack.add(scaled, 1.0)
        rhs += scaled.T @ rng.normal(operator.n_rows)
    preconditioner = hutchinson_diagonal(stack, settings.probes, rng) if settings.precondition else None
    result = cg_solve(stack, rhs, settings.rel_tol, settings.max_iter, preconditioner, x0)
    return result.solution, result


def sample_conditional_image(problem: Optional[LinearProblem], prior: DifferencePrior,
                             forest: Optional[SpanningForest], aux: Optional[AuxiliaryScales], rng: RngStream,
                             settings: Optional[CgSettings] = None, graph: Optional[GridGraph] = None,
                             rooted: bool = True, root: int = 0,
                             x0: Optional[np.ndarray] = None) -> Tuple[np.ndarray, CgResult]:
    """
    Image draw given the forest (or the whole lattice when ``forest`` is None) and, for Laplace and
    Cauchy priors, the auxiliary variances.
    """
    if graph is None:
        graph = lattice(problem.height, problem.width)
    operator = _prior_operator(graph, forest, rooted, root)
    scales = prior_row_scales(prior, graph, operator, aux)
    return sample_gaussian_conditional(problem, operator, scales, rng, settings or CgSettings(), x0)


def sample_forest(image: np.ndarray, graph: GridGraph, config: ChainConfig, rng: RngStream) -> SpanningForest:
    """Conjugated tree (or terminal forest) given the image."""
    weights = conjugate_weights(graph, image, config.prior, weight_floor=config.weight_floor)
    if graph.has_terminal:
        overrides = (terminal_weights(image, config.prior, graph.terminal_weight)
                     if config.exact_terminal else None)
        return wilson_sample_terminal(TreeDistribution(graph, weights, overrides), rng, config.step_budget)
    return wilson_sample(TreeDistribution(graph, weights), config.root, rng, config.step_budget)


def sample_aux(prior: DifferencePrior, graph: GridGraph, operator: DifferenceOperator, image: np.ndarray,
               rng: RngStream, marginal: bool = False) -> AuxiliaryScales:
    strengths = row_strengths(prior, graph, operator.edge_ids, operator.n_root_rows)
    if marginal:
        tau = sample_tau_marginal(prior, rng, scale=strengths)
    else:
        tau = sample_aux_given_difference(prior, operator.apply(image), rng, scale=strengths)
    return AuxiliaryScales(tau[:operator.n_edge_rows], tau[operator.n_edge_rows:])


def initial_image(problem: Optional[LinearProblem], n_pixels: int) -> np.ndarray:
    """Data for denoising, A^T y with the hole at the observed mean for inpainting, zeros otherwise."""
    if problem is None or problem.kind is ForwardKind.BLUR:
        return np.zeros(n_pixels)
    if problem.kind is ForwardKind.IDENTITY:
        return problem.data.copy()
    image = np.full(n_pixels, float(np.mean(problem.data)))
    image[problem.observed] = problem.data
    return image


def initial_state(config: ChainConfig) -> ChainState:
    return ChainState(image=initial_image(config.problem, config.n_pixels))


def _check_finite(name: str, values: np.ndarray, iteration: int):
    if not np.all(np.isfinite(values)):
        raise NumericalBreakdownError(f"non-finite {name} in chain state", iteration)


def gibbs_step(state: ChainState, config: ChainConfig, rng: RngStream) -> ChainState:
    """
    One sweep: forest | image, then tau | (image, forest), then image | (forest, tau). The very first
    sweep draws tau from its marginal, since the starting image carries no information on the scales.
    """
    graph = chain_graph(config)
    iteration = state.iteration + 1
    forest = sample_forest(state.image, graph, config, rng) if config.rst else None
    operator = _prior_operator(graph, forest, config.rooted, config.root)
    aux = None
    if config.prior.family.is_scale_mixture:
        aux = sample_aux(config.prior, graph, operator, state.image, rng, marginal=state.iteration == 0)
    scales = prior_row_scales(config.prior, graph, operator, aux)
    image, result = sample_gaussian_conditional(config.problem, operator, scales, rng, config.cg_settings,
                                                x0=state.image)
    _check_finite("image", image, iteration)
    logger.debug(f"iteration {iteration}: {result.iterations} CG iterations, "
                 f"{forest.component_count if forest is not None else 1} components")
    return ChainState(image, forest, aux, iteration, result.iterations, result.converged)


def check_properness(config: ChainConfig):
    """An unrooted model is proper only when the forward operator does not annihilate constants."""
    if config.rooted or config.problem is None:
        return
    response = apply_forward(config.problem, np.ones(config.n_pixels))
    if np.allclose(response, 0.0):
        raise ConfigError("unrooted prior with a forward operator that maps constants to zero: posterior is improper")


def run_chain(config: ChainConfig, chain_index: int = 0) -> ChainResult:
    rng = RngStream(config.seed).for_chain(chain_index)
    storage = SampleStorage(config.n_pixels, keep_samples=config.keep_samples)
    result = ChainResult(chain_index, storage, 0.0)
    local_contrast, range_contrast = [], []
    shape = (config.height, config.width)
    state = initial_state(config)
    stopwatch = Stopwatch()
    for _ in range(config.iterations):
        state = gibbs_step(state, config, rng)
        if not config.is_retained(state.iteration):
            continue
        forest_key = state.forest.key() if config.record_forests and state.forest is not None else None
        storage.add(state.image, forest_key)
        result.cg_iterations.append(state.cg_iterations)
        result.component_counts.append(state.forest.component_count if state.forest is not None else 1)
        result.flagged_samples += int(not state.cg_converged)
        local_contrast.append(max_local_contrast(state.image.reshape(shape)))
        range_contrast.append(global_contrast(state.image.reshape(shape)))
    result.wall_time_ms = stopwatch.elapsed_ms()
    result.sample_max_local_contrast = float(np.mean(local_contrast))
    result.sample_global_contrast = float(np.mean(range_contrast))
    logger.info(f"chain {chain_index}: {storage.count} samples in {result.wall_time_ms:.0f} ms, "
                f"{result.flagged_samples} flagged")
    return result


def _workers(config: ChainConfig) -> int:
    workers = config.workers if config.workers > 1 else int(os.getenv(ENV_WORKERS, "1"))
    return max(1, min(workers, config.n_chains))


def run_chains(config: ChainConfig) -> ChainSummary:
    """
    Independent chains with seeds seed + c, reduced in chain order so the summary does not depend on
    which worker finishes first.
    """
    check_properness(config)
    if (config.prior.family is PriorFamily.CAUCHY and config.problem is not None
            and config.problem.kind is ForwardKind.BLUR):
        logger.warning("Cauchy priors are unstable on deblurring problems; expect unusable samples")
    workers = _workers(config)
    logger.info(f"running {config.n_chains} chain(s) of {config.iterations} iterations on {workers} worker(s)")
    if workers == 1:
        chains = [run_chain(config, c) for c in range(config.n_chains)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            chains = list(executor.map(run_chain, [config] * config.n_chains, range(config.n_chains)))
    return summarize(chains)


def summarize(chains: List[ChainResult]) -> ChainSummary:
    pooled = SampleStorage.merge([chain.storage for chain in chains])
    weights = np.array([chain.count for chain in chains], dtype=np.float64)
    return ChainSummary(
        mean=pooled.mean,
        std=np.sqrt(pooled.variance),
        count=pooled.count,
        chains=chains,
        sample_max_local_contrast=float(np.average([c.sample_max_local_contrast for c in chains], weights=weights)),
        sample_global_contrast=float(np.average([c.sample_global_contrast for c in chains], weights=weights)),
        forest_counts=dict(pooled.forest_counts),
        samples=pooled.samples,
    )
