import logging
from typing import Optional

import numpy as np
import scipy.ndimage as ndi
from scipy.sparse.linalg import LinearOperator

from models.problem import ForwardKind, LinearProblem, Phantom
from utilities.constants import BLUR_SD, BLUR_TRUNCATE
from utilities.errors import InvalidArgumentError
from utilities.rng import RngStream
from utilities.validation import InputValidation

logger = logging.getLogger(__name__)

PHANTOMS = ["disk", "rects", "step", "shapes", "bars"]


def gaussian_kernel(sd: float = BLUR_SD, truncate: float = BLUR_TRUNCATE) -> np.ndarray:
    """Normalized 1-D Gaussian profile cut at ``truncate`` standard deviations."""
    InputValidation.positive("sd", float(sd))
    radius = int(truncate * sd + 0.5)
    offsets = np.arange(-radius, radius + 1)
    kernel = np.exp(-0.5 * (offsets / sd) ** 2)
    return kernel / kernel.sum()


def _as_image(problem: LinearProblem, image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    InputValidation.same_length("image", image.size, problem.n_pixels)
    return image.reshape(problem.height, problem.width)


def _blur(image: np.ndarray, kernel: np.ndarray, transpose: bool) -> np.ndarray:
    filter1d = ndi.convolve1d if transpose else ndi.correlate1d
    out = filter1d(image, kernel, axis=0, mode="reflect")
    return filter1d(out, kernel, axis=1, mode="reflect")


def apply_forward(problem: LinearProblem, image: np.ndarray) -> np.ndarray:
    """Noiseless A x as a flat vector of length ``problem.n_observations``."""
    image = _as_image(problem, image)
    if problem.kind is ForwardKind.IDENTITY:
        return image.reshape(-1).copy()
    if problem.kind is ForwardKind.BLUR:
        return _blur(image, problem.kernel, transpose=False).reshape(-1)
    return image.reshape(-1)[problem.observed]


def apply_adjoint(problem: LinearProblem, data: np.ndarray) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64).reshape(-1)
    InputValidation.same_length("data", data.size, problem.n_observations)
    if problem.kind is ForwardKind.IDENTITY:
        return data.copy()
    if problem.kind is ForwardKind.BLUR:
        return _blur(data.reshape(problem.height, problem.width), problem.kernel, transpose=True).reshape(-1)
    image = np.zeros(problem.n_pixels)
    image[problem.observed] = data
    return image


def observed_image(problem: LinearProblem, fill: float = 0.0) -> np.ndarray:
    """The observation y laid out on the pixel grid; masked-out pixels get ``fill``."""
    if problem.kind is ForwardKind.MASK:
        image = np.full(problem.n_pixels, float(fill))
        image[problem.observed] = problem.data
    else:
        image = problem.data.copy()
    return image.reshape(problem.height, problem.width)


def forward_operator(problem: LinearProblem) -> LinearOperator:
    """Matrix-free A with A^T as rmatvec."""
    return LinearOperator((problem.n_observations, problem.n_pixels),
                          matvec=lambda x: apply_forward(problem, x),
                          rmatvec=lambda y: apply_adjoint(problem, y),
                          dtype=np.float64)


def center_mask(height: int, width: int) -> np.ndarray:
    """Observed-pixel mask with the central (height/2) x (width/2) square removed."""
    observed = np.ones((height, width), dtype=bool)
    hole_h, hole_w = height // 2, width // 2
    top, left = (height - hole_h) // 2, (width - hole_w) // 2
    observed[top:top + hole_h, left:left + hole_w] = False
    return observed


def make_phantom(name: str, height: int, width: int) -> Phantom:
    InputValidation.positive_int("height", height)
    InputValidation.positive_int("width", width)
    rows, cols = np.mgrid[0:height, 0:width]
    # pixel centres in [0, 1]
    y = (rows + 0.5) / height
    x = (cols + 0.5) / width
    image = np.zeros((height, width))
    if name == "disk":
        image[(y - 0.5) ** 2 + (x - 0.5) ** 2 <= 0.3 ** 2] = 1.0
    elif name == "rects":
        image[(y > 0.15) & (y < 0.55) & (x > 0.1) & (x < 0.45)] = 1.0
        image[(y > 0.45) & (y < 0.85) & (x > 0.55) & (x < 0.9)] = 1.0
    elif name == "step":
        image[x >= 0.5] = 1.0
    elif name == "shapes":
        image[(y > 0.55) & (y < 0.9) & (x > 0.1) & (x < 0.6)] = 0.5
        image[(y - 0.35) ** 2 + (x - 0.65) ** 2 <= 0.22 ** 2] = 1.0
    elif name == "bars":
        inside = (y > 0.2) & (y < 0.8) & (x > 0.1) & (x < 0.9)
        image[inside & (np.floor((x - 0.1) * 10).astype(int) % 2 == 0)] = 1.0
    else:
        raise InvalidArgumentError(f"Unknown phantom {name!r}; expected one of {PHANTOMS}")
    return Phantom(name, image)


def make_data(phantom: Phantom, kind, noise_sd: float, rng: RngStream,
              kernel_sd: float = BLUR_SD, observed_mask: Optional[np.ndarray] = None) -> LinearProblem:
    """
    y = A x + noise_sd * N(0, I). The mask defaults to the centre-hole pattern, the blur to a
    Gaussian of ``kernel_sd`` pixels.
    """
    kind = ForwardKind.parse(kind)
    height, width = phantom.shape
    kernel, observed = None, None
    if kind is ForwardKind.BLUR:
        kernel = gaussian_kernel(kernel_sd)
    elif kind is ForwardKind.MASK:
        mask = center_mask(height, width) if observed_mask is None else np.asarray(observed_mask, dtype=bool)
        InputValidation.same_length("observed_mask", mask.size, phantom.image.size)
        observed = np.flatnonzero(mask.reshape(-1))
    noiseless = LinearProblem(kind, height, width, np.zeros(height * width if observed is None else observed.size),
                              noise_sd, kernel, observed)
    clean = apply_forward(noiseless, phantom.image)
    data = clean + noise_sd * rng.normal(clean.size)
    logger.info(f"Generated {kind.value} data from phantom {phantom.name!r}: {clean.size} observations, "
                f"noise sd {noise_sd}")
    return LinearProblem(kind, height, width, data, noise_sd, kernel, observed)
