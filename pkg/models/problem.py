from enum import Enum
from typing import Optional

import numpy as np

from models import Model, ValueObject
from utilities.collections import neutralize_str
from utilities.errors import InvalidArgumentError
from utilities.validation import InputValidation


class ForwardKind(Enum):
    IDENTITY = "identity"
    BLUR = "blur"
    MASK = "mask"

    @classmethod
    def parse(cls, name) -> "ForwardKind":
        if isinstance(name, ForwardKind):
            return name
        try:
            return cls(neutralize_str(name))
        except ValueError:
            raise InvalidArgumentError(f"Unknown forward operator {name!r}") from None


class LinearProblem(Model, ValueObject):
    """
    y = A x + e with e ~ N(0, noise_sd^2 I).

    ``kernel`` is the normalized 1-D profile of the separable blur; ``observed`` holds the
    row-major pixel indices kept by the mask.
    """

    def __init__(self, kind, height: int, width: int, data: np.ndarray, noise_sd: float,
                 kernel: Optional[np.ndarray] = None, observed: Optional[np.ndarray] = None):
        self.kind = ForwardKind.parse(kind)
        self.height = InputValidation.positive_int("height", height)
        self.width = InputValidation.positive_int("width", width)
        self.noise_sd = InputValidation.positive("noise_sd", float(noise_sd))
        if self.kind is ForwardKind.BLUR and kernel is None:
            raise InvalidArgumentError("a blur problem needs a kernel")
        if self.kind is ForwardKind.MASK and observed is None:
            raise InvalidArgumentError("a mask problem needs the observed index set")
        self.kernel = None if kernel is None else np.asarray(kernel, dtype=np.float64)
        self.observed = None if observed is None else np.asarray(observed, dtype=np.int64)
        data = np.asarray(data, dtype=np.float64).reshape(-1)
        InputValidation.same_length("data", data.size, self.n_observations)
        self.data = data

    @property
    def n_pixels(self) -> int:
        return self.height * self.width

    @property
    def n_observations(self) -> int:
        return self.observed.size if self.kind is ForwardKind.MASK else self.n_pixels


class Phantom(Model, ValueObject):
    def __init__(self, name: str, image: np.ndarray):
        image = np.asarray(image, dtype=np.float64)
        if image.ndim != 2:
            raise InvalidArgumentError("phantom images are 2-D")
        if image.min() < 0 or image.max() > 1:
            raise InvalidArgumentError("phantom values must lie in [0, 1]")
        self.name = name
        self.image = image

    @property
    def shape(self):
        return self.image.shape
