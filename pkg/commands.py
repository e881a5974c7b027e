import logging
import os
from typing import List, Optional

import numpy as np

from engine.diagnostics import (benchmark_tree_runtime, boundary_interface_image, contrast_row, interface_roughness,
                                tree_depth_field)
from engine.forward_models import make_data, make_phantom, observed_image
from engine.mrf_priors import sample_prior, unit_density
from engine.posterior_sampler import lattice, run_chain, run_chains
from engine.tree_sampler import wilson_sample, wilson_sample_terminal
from models.graph import TreeDistribution
from models.problem import ForwardKind
from utilities.config import RunConfig
from utilities.constants import (BENCHMARK_HEADER, CONTRAST_HEADER, DEBLURRING, DENOISING, INPAINTING,
                                 INTERFACE_HEADER, RUNTIME_HEADER)
from utilities.filesystem_client import FilesystemClient
from utilities.logger_client import LoggerClient
from utilities.rng import RngStream

logger = logging.getLogger(__name__)

FORWARD_KIND = {
    DENOISING: ForwardKind.IDENTITY,
    DEBLURRING: ForwardKind.BLUR,
    INPAINTING: ForwardKind.MASK,
}


class CommandRunner:
    """Runs one CLI command against a RunConfig and writes its outputs under ``config.out_dir``."""

    def __init__(self, config: RunConfig, run_log: Optional[LoggerClient] = None):
        self.config = config
        self.run_log = run_log or LoggerClient()
        self.out_dir = config.out_dir

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _model_label(self) -> str:
        return f"{self.config.prior_family.value}_{'rst' if self.config.rst else 'mrf'}"

    def _write_image(self, name: str, image: np.ndarray, value_range=None) -> str:
        path = self._path(name)
        FilesystemClient.write_pgm(path, image, self.config.bit_depth, value_range)
        return path

    def _write_interface(self, size: int) -> List[str]:
        """Two-colour wired-boundary tree image and its roughness row (length / span of the colour interface)."""
        image = boundary_interface_image(size, RngStream(self.config.seed, stream=2), self.config.step_budget)
        length, span = interface_roughness(image)
        csv_path = self._path("prior_interface.csv")
        FilesystemClient.write_rows_csv(csv_path, INTERFACE_HEADER, [[size, length, span, length / span]])
        self.run_log.log({"command": "sample-prior", "interface_length": length, "span": span})
        return [self._write_image("prior_interface.pgm", image, (0.0, 1.0)), csv_path]

    def cmd_sample_prior(self) -> List[str]:
        """
        Prior draws on a size x size lattice. With rst, every draw gets its own tree (or terminal
        forest) and the depth field and forest CSV are written next to the image, followed by one
        wired-boundary interface image with its roughness row. Without rst the draws come from a
        prior-only chain on the full lattice.
        """
        config = self.config
        size = config.size
        prior = config.to_prior(config.lambdas[0])
        rng = RngStream(config.seed)
        written = []
        if config.rst:
            rho = config.rho_rel * float(unit_density(prior, 0.0))
            graph = lattice(size, size, 1.0, rho)
            dist = TreeDistribution(graph)
            for i in range(config.samples):
                if graph.has_terminal:
                    forest = wilson_sample_terminal(dist, rng, config.step_budget)
                else:
                    forest = wilson_sample(dist, config.root, rng, config.step_budget)
                image = sample_prior(prior, forest, graph, rng).reshape(size, size)
                depth = tree_depth_field(forest, graph, config.root)
                written.append(self._write_image(f"prior_{self._model_label()}_{i}.pgm", image))
                written.append(self._write_image(f"prior_{self._model_label()}_{i}_depth.pgm", depth.astype(float)))
                forest_path = self._path(f"prior_{self._model_label()}_{i}_forest.csv")
                FilesystemClient.write_forest_csv(forest_path, forest)
                written.append(forest_path)
            if size > 1:
                written.extend(self._write_interface(size))
        else:
            chain_config = config.to_chain_config(prior, None, size, size)
            chain_config.keep_samples = True
            samples = run_chain(chain_config).storage.samples[-config.samples:]
            for i, image in enumerate(samples):
                written.append(self._write_image(f"prior_{self._model_label()}_{i}.pgm",
                                                 np.asarray(image, dtype=np.float64).reshape(size, size)))
        self.run_log.log({"command": "sample-prior", "family": config.prior_family.value, "rst": config.rst,
                          "size": size, "seed": config.seed, "files": len(written)})
        return written

    def cmd_run_experiment(self) -> List[str]:
        """Posterior mean/std images per strength, plus the contrast and runtime tables."""
        config = self.config
        kind = FORWARD_KIND[config.experiment]
        phantom = make_phantom(config.phantom, config.size, config.size)
        problem = make_data(phantom, kind, config.sigma, RngStream(config.data_seed, stream=1), config.kernel_sd)
        shape = (config.size, config.size)
        written = [self._write_image(f"{config.experiment}_truth.pgm", phantom.image, (0.0, 1.0)),
                   self._write_image(f"{config.experiment}_data.pgm", observed_image(problem), (0.0, 1.0))]
        contrast_rows, runtime_rows = [], []
        for strength in config.lambdas:
            prior = config.to_prior(strength)
            summary = run_chains(config.to_chain_config(prior, problem))
            stem = f"{config.experiment}_{self._model_label()}_lambda{strength:g}"
            mean = summary.mean.reshape(shape)
            written.append(self._write_image(f"{stem}_mean.pgm", mean, (0.0, 1.0)))
            written.append(self._write_image(f"{stem}_std.pgm", summary.std.reshape(shape)))
            mean_csv = self._path(f"{stem}_mean.csv")
            FilesystemClient.write_image_csv(mean_csv, mean)
            written.append(mean_csv)
            if config.dump_samples:
                dump = self._path(f"{stem}_samples.bin")
                FilesystemClient.write_sample_dump(dump, summary.samples, *shape)
                written.append(dump)
            contrast_rows.append(contrast_row(strength, config.prior_family.value, config.rst, mean,
                                              summary.sample_max_local_contrast, summary.sample_global_contrast))
            for chain in summary.chains:
                runtime_rows.append([strength, config.prior_family.value, config.rst, chain.chain_index,
                                     chain.wall_time_ms if config.timings else 0.0, chain.mean_cg_iterations,
                                     chain.mean_components, chain.flagged_samples])
            self.run_log.log({"command": "run-experiment", "experiment": config.experiment,
                              "family": config.prior_family.value, "rst": config.rst, "lambda": strength,
                              "samples": summary.count, "flagged": summary.flagged_samples,
                              "distinct_forests": len(summary.forest_counts)})
            if summary.flagged_samples:
                self.run_log.warning(f"{summary.flagged_samples} sample(s) drawn with unconverged CG at lambda {strength:g}")
        label = f"{config.experiment}_{self._model_label()}"
        for name, header, rows in ((f"{label}_contrast.csv", CONTRAST_HEADER, contrast_rows),
                                   (f"{label}_runtime.csv", RUNTIME_HEADER, runtime_rows)):
            FilesystemClient.write_rows_csv(self._path(name), header, rows)
            written.append(self._path(name))
        return written

    def cmd_benchmark_trees(self) -> List[str]:
        config = self.config
        rows = benchmark_tree_runtime(config.sizes, config.kappas, config.rhos, config.repeats,
                                      RngStream(config.seed), config.timings, config.step_budget)
        path = self._path("benchmark_trees.csv")
        FilesystemClient.write_rows_csv(path, BENCHMARK_HEADER, rows)
        self.run_log.log({"command": "benchmark-trees", "rows": len(rows), "seed": config.seed})
        return [path]
