import numpy as np
import pytest

from engine.forward_models import (PHANTOMS, apply_adjoint, apply_forward, center_mask, forward_operator,
                                   gaussian_kernel, make_data, make_phantom, observed_image)
from models.problem import ForwardKind, LinearProblem, Phantom
from utilities.errors import InvalidArgumentError
from utilities.rng import RngStream


def _problem(kind, height=12, width=12) -> LinearProblem:
    phantom = Phantom("blank", np.zeros((height, width)))
    return make_data(phantom, kind, 0.1, RngStream(0))


def test_identity_returns_the_image(rng):
    problem = _problem(ForwardKind.IDENTITY)
    image = rng.normal(144)
    np.testing.assert_array_equal(apply_forward(problem, image), image)


def test_center_mask_observation_count():
    assert center_mask(128, 128).sum() == 128 ** 2 - 64 ** 2 == 12288
    problem = _problem("mask", 128, 128)
    assert problem.n_observations == 12288
    assert apply_forward(problem, np.zeros(128 * 128)).size == 12288


def test_blur_preserves_constants():
    problem = _problem("blur")
    np.testing.assert_allclose(apply_forward(problem, np.full(144, 0.7)), 0.7)


def test_gaussian_kernel_is_normalized_and_symmetric():
    kernel = gaussian_kernel(2.0)
    assert kernel.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(kernel, kernel[::-1])
    assert kernel.size == 17


@pytest.mark.parametrize("kind", ["identity", "blur", "mask"])
def test_adjoint_matches_forward(kind, rng):
    problem = _problem(kind)
    x = rng.normal(problem.n_pixels)
    y = rng.normal(problem.n_observations)
    assert np.dot(apply_forward(problem, x), y) == pytest.approx(np.dot(x, apply_adjoint(problem, y)))


def test_forward_operator_wraps_both_directions(rng):
    problem = _problem("blur")
    operator = forward_operator(problem)
    x = rng.normal(problem.n_pixels)
    np.testing.assert_allclose(operator.matvec(x), apply_forward(problem, x))
    np.testing.assert_allclose(operator.rmatvec(x), apply_adjoint(problem, x))


def test_mask_of_adjoint_is_identity_on_data(rng):
    problem = _problem("mask")
    y = rng.normal(problem.n_observations)
    np.testing.assert_array_equal(apply_forward(problem, apply_adjoint(problem, y)), y)


@pytest.mark.parametrize("kind", ["identity", "blur", "mask"])
def test_tiny_noise_gives_noiseless_data(kind):
    phantom = make_phantom("rects", 16, 16)
    problem = make_data(phantom, kind, 1e-12, RngStream(4))
    np.testing.assert_allclose(problem.data, apply_forward(problem, phantom.image), atol=1e-9)


def test_make_data_is_reproducible():
    phantom = make_phantom("disk", 8, 8)
    first = make_data(phantom, "identity", 0.2, RngStream(3, stream=1))
    second = make_data(phantom, "identity", 0.2, RngStream(3, stream=1))
    np.testing.assert_array_equal(first.data, second.data)


def test_custom_mask_is_used():
    phantom = make_phantom("step", 4, 4)
    mask = np.zeros((4, 4), dtype=bool)
    mask[0] = True
    problem = make_data(phantom, "mask", 0.1, RngStream(0), observed_mask=mask)
    assert problem.observed.tolist() == [0, 1, 2, 3]


def test_disk_is_binary():
    image = make_phantom("disk", 128, 128).image
    assert set(np.unique(image)) == {0.0, 1.0}


def test_rects_have_unit_contrast():
    image = make_phantom("rects", 64, 64).image
    assert image.max() - image.min() == 1.0


@pytest.mark.parametrize("name", PHANTOMS)
def test_phantoms_stay_in_unit_range(name):
    image = make_phantom(name, 32, 40).image
    assert image.shape == (32, 40)
    assert image.min() >= 0 and image.max() <= 1


def test_unknown_phantom_is_rejected():
    with pytest.raises(InvalidArgumentError):
        make_phantom("lena", 8, 8)


def test_problem_requires_operator_data():
    with pytest.raises(InvalidArgumentError):
        LinearProblem("blur", 4, 4, np.zeros(16), 0.1)
    with pytest.raises(InvalidArgumentError):
        LinearProblem("mask", 4, 4, np.zeros(16), 0.1)
    with pytest.raises(InvalidArgumentError):
        ForwardKind.parse("radon")


def test_observed_image_is_the_raw_observation():
    phantom = make_phantom("rects", 12, 12)
    blurred = make_data(phantom, "blur", 0.05, RngStream(6))
    np.testing.assert_array_equal(observed_image(blurred), blurred.data.reshape(12, 12))
    # a blurred observation is not re-blurred on the way out
    assert not np.allclose(observed_image(blurred).reshape(-1), apply_adjoint(blurred, blurred.data))
    mask = np.zeros((12, 12), dtype=bool)
    mask[:, :6] = True
    inpainting = make_data(phantom, "mask", 0.05, RngStream(6), observed_mask=mask)
    image = observed_image(inpainting, fill=-1.0)
    np.testing.assert_array_equal(image[mask], inpainting.data)
    assert np.all(image[~mask] == -1.0)
