import logging
import os
import typing
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional

import numpy as np
from dotenv import dotenv_values

from models.chain import ChainConfig
from models.prior import DifferencePrior, PriorFamily
from models.problem import LinearProblem
from utilities.collections import list_to_str, neutralize_key, neutralize_str, parse_list, uniquify
from utilities.constants import (BLUR_SD, CG_TOLERANCE, DEFAULT_IMAGE_SIZE, DEFAULT_NOISE_SD, DEFAULT_PHANTOM,
                                 DEFAULT_RHO_REL, DEFAULT_STEP_BUDGET, ENV_OUT_DIR, ENV_WORKERS, EXPERIMENTS,
                                 HUTCHINSON_PROBES)
from utilities.errors import ConfigError, InvalidArgumentError
from utilities.validation import InputValidation

logger = logging.getLogger(__name__)

# alternative spellings accepted in config files and on the command line
KEY_ALIASES = {
    "lambda": "lambdas",
    "grid": "size",
    "iterations": "iters",
    "burn_in": "burnin",
    "n_chains": "chains",
}

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


@dataclass
class RunConfig:
    """
    Flat run configuration shared by all commands. ``lambdas`` is the user-facing strength: a
    multiplier for Gaussian and Laplace priors, a scale for Cauchy priors.
    """
    experiment: str = "denoising"
    family: str = "gaussian"
    rst: bool = True
    lambdas: Optional[List[float]] = None
    sweep: bool = False
    root_weight: Optional[float] = None
    rho_rel: float = DEFAULT_RHO_REL
    exact_terminal: bool = False
    weight_floor: Optional[float] = None
    rooted: bool = True
    root: int = 0
    sigma: Optional[float] = None
    size: int = DEFAULT_IMAGE_SIZE
    phantom: Optional[str] = None
    kernel_sd: float = BLUR_SD
    iters: int = 200
    chains: int = 1
    burnin: Optional[int] = None
    thinning: int = 1
    seed: int = 0
    data_seed: Optional[int] = None
    cg_tol: float = CG_TOLERANCE
    cg_max_iter: Optional[int] = None
    precondition: bool = False
    probes: int = HUTCHINSON_PROBES
    step_budget: int = DEFAULT_STEP_BUDGET
    samples: int = 3
    dump_samples: bool = False
    record_forests: bool = False
    timings: bool = True
    bit_depth: int = 16
    workers: int = 1
    out_dir: str = "output"
    sizes: List[int] = field(default_factory=lambda: [32, 64, 128, 256])
    kappas: List[float] = field(default_factory=lambda: [1.0, 1e4])
    rhos: List[float] = field(default_factory=lambda: [0.0, DEFAULT_RHO_REL])
    repeats: int = 100

    def __post_init__(self):
        self.experiment = neutralize_str(self.experiment)
        if not InputValidation.accepted_value(self.experiment, EXPERIMENTS):
            raise ConfigError(f"Unknown experiment {self.experiment!r}; expected one of {list_to_str(EXPERIMENTS)}")
        try:
            self.prior_family = PriorFamily.parse(self.family)
        except InvalidArgumentError as e:
            raise ConfigError(str(e)) from None
        if self.sigma is None:
            self.sigma = DEFAULT_NOISE_SD[self.experiment]
        if self.phantom is None:
            self.phantom = DEFAULT_PHANTOM[self.experiment]
        if self.data_seed is None:
            self.data_seed = self.seed
        if self.lambdas is None:
            self.lambdas = list(np.logspace(0, 2, 5)) if self.sweep else [10.0]
        self.lambdas = uniquify([float(s) for s in self.lambdas])
        if self.bit_depth not in (8, 16):
            raise ConfigError("bit_depth must be 8 or 16")
        try:
            InputValidation.positive("sigma", float(self.sigma))
            for strength in self.lambdas:
                InputValidation.positive("lambda", float(strength))
            InputValidation.positive_int("size", self.size)
            InputValidation.non_negative("seed", self.seed)
            InputValidation.non_negative("data_seed", self.data_seed)
        except InvalidArgumentError as e:
            raise ConfigError(str(e)) from None

    def to_prior(self, strength: float) -> DifferencePrior:
        """Cauchy strengths are scales; the prior takes their reciprocal as its multiplier."""
        if self.prior_family is PriorFamily.CAUCHY:
            root_weight = None if self.root_weight is None else 1.0 / self.root_weight
            return DifferencePrior(self.prior_family, 1.0 / strength, root_weight)
        return DifferencePrior(self.prior_family, strength, self.root_weight)

    def to_chain_config(self, prior: DifferencePrior, problem: Optional[LinearProblem] = None,
                        height: int = 0, width: int = 0) -> ChainConfig:
        return ChainConfig(
            prior=prior, problem=problem, height=height, width=width,
            iterations=self.iters, burn_in=self.burnin, thinning=self.thinning, n_chains=self.chains,
            seed=self.seed, rst=self.rst, rooted=self.rooted, root=self.root,
            rho_rel=self.rho_rel if self.rst else 0.0, exact_terminal=self.exact_terminal,
            weight_floor=self.weight_floor, cg_tol=self.cg_tol, cg_max_iter=self.cg_max_iter,
            precondition=self.precondition, probes=self.probes, step_budget=self.step_budget,
            record_forests=self.record_forests, keep_samples=self.dump_samples, workers=self.workers)


def _parse_bool(raw: str) -> bool:
    value = neutralize_str(raw)
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _convert(annotation, raw):
    origin = typing.get_origin(annotation)
    args = typing.get_args(annotation)
    if raw is None:
        if origin is typing.Union and type(None) in args:
            return None
        raise ValueError("missing value")
    if not isinstance(raw, str):
        return raw
    if origin is typing.Union:
        if neutralize_str(raw) in ("", "none", "null"):
            return None
        return _convert(next(a for a in args if a is not type(None)), raw)
    if origin in (list, List):
        return parse_list(raw, cast=args[0])
    if annotation is bool:
        return _parse_bool(raw)
    return annotation(raw.strip())


def _canonical_key(key: str) -> str:
    key = neutralize_key(key)
    return KEY_ALIASES.get(key, key)


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, object]] = None) -> RunConfig:
    """
    Reads a flat key=value file and applies ``overrides`` on top (None values are skipped).
    Environment settings fill in the output directory and worker count when neither source sets them.
    """
    raw = {}
    if path is not None:
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        raw.update({_canonical_key(k): v for k, v in dotenv_values(path).items()})
    raw.update({_canonical_key(k): v for k, v in (overrides or {}).items() if v is not None})
    if os.getenv(ENV_OUT_DIR):
        raw.setdefault("out_dir", os.getenv(ENV_OUT_DIR))
    if os.getenv(ENV_WORKERS):
        raw.setdefault("workers", os.getenv(ENV_WORKERS))
    hints = typing.get_type_hints(RunConfig)
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"Unknown config key(s): {list_to_str(unknown)}")
    values = {}
    for key, value in raw.items():
        try:
            values[key] = _convert(hints[key], value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid value for {key}: {value!r} ({e})") from None
    config = RunConfig(**values)
    logger.debug(f"Loaded config: {config}")
    return config
