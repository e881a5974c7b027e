from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from models import Model
from models.graph import SpanningForest
from models.prior import AuxiliaryScales, DifferencePrior
from models.problem import LinearProblem
from utilities.constants import BURN_IN_FRACTION, CG_TOLERANCE, DEFAULT_STEP_BUDGET, HUTCHINSON_PROBES
from utilities.errors import ConfigError
from utilities.storage import SampleStorage


@dataclass(repr=False)
class ChainConfig(Model):
    """
    Inputs of the Gibbs sampler. ``noise`` comes from ``problem.noise_sd`` (a standard deviation).

    ``rho_rel`` is the terminal weight divided by phi(0); 0 disables the terminal vertex.
    ``problem=None`` samples the prior.
    """
    prior: DifferencePrior
    problem: Optional[LinearProblem] = None
    height: int = 0
    width: int = 0
    iterations: int = 100
    burn_in: Optional[int] = None
    thinning: int = 1
    n_chains: int = 1
    seed: int = 0
    rst: bool = True
    rooted: bool = True
    root: int = 0
    rho_rel: float = 0.0
    exact_terminal: bool = False
    weight_floor: Optional[float] = None
    base_weight: float = 1.0
    cg_tol: float = CG_TOLERANCE
    cg_max_iter: Optional[int] = None
    precondition: bool = False
    probes: int = HUTCHINSON_PROBES
    step_budget: int = DEFAULT_STEP_BUDGET
    record_forests: bool = False
    keep_samples: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.problem is not None:
            self.height, self.width = self.problem.height, self.problem.width
        if self.height < 1 or self.width < 1:
            raise ConfigError("chain needs a problem or an explicit height and width")
        if self.burn_in is None:
            self.burn_in = int(BURN_IN_FRACTION * self.iterations)
        if not self.iterations > self.burn_in >= 0:
            raise ConfigError(f"need iterations > burn_in >= 0, got {self.iterations} and {self.burn_in}")
        if self.thinning < 1 or self.n_chains < 1:
            raise ConfigError("thinning and n_chains must be at least 1")
        if self.iterations - self.burn_in < self.thinning:
            raise ConfigError("no iteration is retained after burn-in and thinning")
        if self.rho_rel < 0:
            raise ConfigError("rho_rel must be non-negative")
        if not 0 <= self.root < self.height * self.width:
            raise ConfigError(f"root {self.root} outside the {self.height}x{self.width} grid")
        if not 0 < self.cg_tol < 1:
            raise ConfigError("cg_tol must lie in (0, 1)")
        if not self.rooted and self.rho_rel > 0:
            raise ConfigError("terminal-vertex forests are always rooted; set rooted=true or rho_rel=0")
        if not self.rooted and self.problem is None:
            raise ConfigError("an unrooted prior is improper; prior sampling needs rooted=true")

    @property
    def n_pixels(self) -> int:
        return self.height * self.width

    @property
    def cg_settings(self) -> "CgSettings":
        return CgSettings(self.cg_tol, self.cg_max_iter, self.precondition, self.probes)

    def is_retained(self, iteration: int) -> bool:
        """Iterations are counted from 1; the first burn_in are discarded."""
        return iteration > self.burn_in and (iteration - self.burn_in) % self.thinning == 0


@dataclass(repr=False)
class ChainState(Model):
    image: np.ndarray
    forest: Optional[SpanningForest] = None
    aux: Optional[AuxiliaryScales] = None
    iteration: int = 0
    cg_iterations: int = 0
    cg_converged: bool = True


@dataclass(repr=False)
class CgSettings(Model):
    rel_tol: float = CG_TOLERANCE
    max_iter: Optional[int] = None
    precondition: bool = False
    probes: int = HUTCHINSON_PROBES


@dataclass(repr=False)
class ChainResult(Model):
    """Per-chain accumulators, reduced into a ChainSummary after all chains join."""
    chain_index: int
    storage: SampleStorage
    wall_time_ms: float
    cg_iterations: List[int] = field(default_factory=list)
    component_counts: List[int] = field(default_factory=list)
    flagged_samples: int = 0
    sample_max_local_contrast: float = 0.0
    sample_global_contrast: float = 0.0

    @property
    def count(self) -> int:
        return self.storage.count

    @property
    def mean_cg_iterations(self) -> float:
        return float(np.mean(self.cg_iterations)) if self.cg_iterations else 0.0

    @property
    def mean_components(self) -> float:
        return float(np.mean(self.component_counts)) if self.component_counts else 0.0


@dataclass(repr=False)
class ChainSummary(Model):
    mean: np.ndarray
    std: np.ndarray
    count: int
    chains: List[ChainResult]
    sample_max_local_contrast: float
    sample_global_contrast: float
    forest_counts: Dict[tuple, int] = field(default_factory=dict)
    samples: List[np.ndarray] = field(default_factory=list)

    @property
    def flagged_samples(self) -> int:
        return sum(chain.flagged_samples for chain in self.chains)
