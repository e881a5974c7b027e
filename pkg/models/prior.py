from enum import Enum
from typing import Optional

import numpy as np

from models import Model, ValueObject
from utilities.collections import neutralize_str
from utilities.constants import CAUCHY, FAMILY_ALIASES, GAUSSIAN, LAPLACE
from utilities.errors import InvalidArgumentError
from utilities.validation import InputValidation


class PriorFamily(Enum):
    GAUSSIAN = GAUSSIAN
    LAPLACE = LAPLACE
    CAUCHY = CAUCHY

    @classmethod
    def parse(cls, name) -> "PriorFamily":
        if isinstance(name, PriorFamily):
            return name
        canonical = FAMILY_ALIASES.get(neutralize_str(name))
        if canonical is None:
            raise InvalidArgumentError(f"Unknown prior family {name!r}; expected one of {sorted(FAMILY_ALIASES)}")
        return cls(canonical)

    @property
    def is_scale_mixture(self) -> bool:
        return self is not PriorFamily.GAUSSIAN


class DifferencePrior(Model, ValueObject):
    """
    Difference prior: each edge difference has density c*phi(c*dx), the root value r*phi(r*x).

    ``strength`` is the multiplier lambda (for every family, including Cauchy; user-facing Cauchy
    scales are converted by the config layer). ``edge_strength`` optionally scales lambda per edge.
    """

    def __init__(self, family, strength: float, root_weight: Optional[float] = None,
                 edge_strength: Optional[np.ndarray] = None):
        self.family = PriorFamily.parse(family)
        self.strength = InputValidation.positive("strength", float(strength))
        self.root_weight = InputValidation.positive(
            "root_weight", float(self.strength if root_weight is None else root_weight))
        if edge_strength is not None:
            edge_strength = np.asarray(edge_strength, dtype=np.float64)
            if not np.all(edge_strength > 0):
                raise InvalidArgumentError("per-edge strengths must be strictly positive")
        self.edge_strength = edge_strength


class AuxiliaryScales(Model, ValueObject):
    """Scale-mixture variances tau, one per difference row and one per root row."""

    def __init__(self, edge_tau: np.ndarray, root_tau: np.ndarray):
        edge_tau = np.asarray(edge_tau, dtype=np.float64)
        root_tau = np.asarray(root_tau, dtype=np.float64)
        for name, tau in (("edge_tau", edge_tau), ("root_tau", root_tau)):
            if not (np.all(np.isfinite(tau)) and np.all(tau > 0)):
                raise InvalidArgumentError(f"{name} must be strictly positive and finite")
        self.edge_tau = edge_tau
        self.root_tau = root_tau

    @property
    def size(self) -> int:
        return self.edge_tau.size + self.root_tau.size

    def row_scales(self) -> np.ndarray:
        return 1.0 / np.sqrt(np.concatenate([self.edge_tau, self.root_tau]))
