import csv
import os

import numpy as np
import pytest

from engine.forward_models import make_data, make_phantom
from main import main
from utilities.filesystem_client import FilesystemClient
from utilities.rng import RngStream


@pytest.fixture(autouse=True)
def isolated_run(monkeypatch, tmp_path):
    monkeypatch.setenv("RSTMRF_LOG_FILE", str(tmp_path / "app_output.txt"))
    monkeypatch.delenv("RSTMRF_OUT_DIR", raising=False)
    monkeypatch.delenv("RSTMRF_WORKERS", raising=False)


def _outputs(directory) -> dict:
    return {name: (directory / name).read_bytes() for name in sorted(os.listdir(directory))}


def _read_rows(path) -> list:
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_benchmark_trees(tmp_path):
    out_dir = tmp_path / "bench"
    argv = ["benchmark-trees", "--sizes", "4,6", "--kappas", "1", "--rhos", "0,0.1", "--repeats", "3",
            "--timings", "false", "--seed", "2", "--out-dir", str(out_dir)]
    assert main(argv) == 0
    rows = _read_rows(out_dir / "benchmark_trees.csv")
    assert rows[0] == ["grid_size", "kappa", "rho_rel", "mean_steps", "wall_time_ms"]
    assert len(rows) == 5
    first = _outputs(out_dir)
    assert main(argv) == 0
    assert _outputs(out_dir) == first


def test_sample_prior_with_trees(tmp_path):
    out_dir = tmp_path / "prior"
    assert main(["sample-prior", "--family", "lmrf", "--size", "8", "--samples", "2", "--lambda", "5",
                 "--out-dir", str(out_dir)]) == 0
    names = set(os.listdir(out_dir))
    for i in range(2):
        assert {f"prior_laplace_rst_{i}.pgm", f"prior_laplace_rst_{i}_depth.pgm",
                f"prior_laplace_rst_{i}_forest.csv"} <= names
    edge_ids, components = FilesystemClient.read_forest_csv(out_dir / "prior_laplace_rst_0_forest.csv")
    assert edge_ids.size + components == 64
    assert FilesystemClient.read_pgm(out_dir / "prior_laplace_rst_1.pgm").shape == (8, 8)
    interface = _read_rows(out_dir / "prior_interface.csv")
    assert interface[0] == ["grid_size", "interface_length", "span", "roughness"]
    size, length, span, roughness = interface[1]
    assert size == "8" and int(length) >= int(span) >= 6
    assert float(roughness) == pytest.approx(int(length) / int(span))
    assert set(np.unique(FilesystemClient.read_pgm(out_dir / "prior_interface.pgm"))) <= {0.0, 1.0}


def test_sample_prior_without_trees(tmp_path):
    out_dir = tmp_path / "gmrf"
    assert main(["sample-prior", "--rst", "false", "--size", "6", "--samples", "3", "--iters", "10",
                 "--out-dir", str(out_dir)]) == 0
    assert sorted(os.listdir(out_dir)) == [f"prior_gaussian_mrf_{i}.pgm" for i in range(3)]


def test_run_experiment_is_reproducible(tmp_path):
    outputs = []
    for name in ("first", "second"):
        out_dir = tmp_path / name
        assert main(["run-experiment", "--experiment", "denoising", "--family", "laplace", "--size", "8",
                     "--iters", "6", "--lambda", "3,10", "--chains", "2", "--seed", "1", "--timings", "false",
                     "--out-dir", str(out_dir)]) == 0
        outputs.append(_outputs(out_dir))
    assert outputs[0] == outputs[1]
    names = set(outputs[0])
    assert {"denoising_truth.pgm", "denoising_data.pgm", "denoising_laplace_rst_lambda3_mean.pgm",
            "denoising_laplace_rst_lambda10_std.pgm", "denoising_laplace_rst_lambda10_mean.csv",
            "denoising_laplace_rst_contrast.csv", "denoising_laplace_rst_runtime.csv"} <= names
    contrast = _read_rows(tmp_path / "first" / "denoising_laplace_rst_contrast.csv")
    assert len(contrast) == 3
    runtime = _read_rows(tmp_path / "first" / "denoising_laplace_rst_runtime.csv")
    assert len(runtime) == 1 + 2 * 2


def test_config_file_and_sample_dump(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("experiment=inpainting\nsize=8\niters=5\nburnin=1\ndump_samples=true\nprecondition=true\n"
                      "probes=4\n")
    out_dir = tmp_path / "inpainting"
    assert main(["run-experiment", "--config", str(config), "--out-dir", str(out_dir)]) == 0
    samples = FilesystemClient.read_sample_dump(out_dir / "inpainting_gaussian_rst_lambda10_samples.bin")
    assert samples.shape == (4, 8, 8)


def test_unknown_config_key_exits_with_config_error(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("colour=blue\n")
    assert main(["benchmark-trees", "--config", str(config), "--out-dir", str(tmp_path)]) == 2


def test_invalid_flag_value_exits_with_config_error(tmp_path):
    assert main(["sample-prior", "--family", "student", "--out-dir", str(tmp_path)]) == 2


def test_exhausted_step_budget_exits_with_numerical_error(tmp_path):
    config = tmp_path / "tight.cfg"
    config.write_text("step_budget=1\nsize=4\nrho_rel=0\n")
    assert main(["sample-prior", "--config", str(config), "--out-dir", str(tmp_path / "out")]) == 3


def test_failures_are_logged(tmp_path):
    main(["sample-prior", "--family", "student", "--out-dir", str(tmp_path)])
    assert "sample-prior failed" in (tmp_path / "app_output.txt").read_text()


def test_deblurring_data_image_is_the_observation(tmp_path):
    out_dir = tmp_path / "deblurring"
    assert main(["run-experiment", "--experiment", "deblurring", "--size", "8", "--iters", "2", "--seed", "3",
                 "--out-dir", str(out_dir)]) == 0
    problem = make_data(make_phantom("rects", 8, 8), "blur", 0.01, RngStream(3, stream=1))
    written = FilesystemClient.read_pgm(out_dir / "deblurring_data.pgm")
    np.testing.assert_allclose(written, np.clip(problem.data, 0.0, 1.0).reshape(8, 8), atol=1.0 / 65535)


def test_negative_seed_exits_with_config_error(tmp_path):
    assert main(["benchmark-trees", "--seed=-1", "--sizes", "4", "--out-dir", str(tmp_path)]) == 2
