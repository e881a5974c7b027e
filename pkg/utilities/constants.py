# PRIOR FAMILIES

GAUSSIAN = "gaussian"
LAPLACE = "laplace"
CAUCHY = "cauchy"
FAMILY_ALIASES = {
    "gaussian": GAUSSIAN, "gmrf": GAUSSIAN, "normal": GAUSSIAN,
    "laplace": LAPLACE, "lmrf": LAPLACE,
    "cauchy": CAUCHY, "cmrf": CAUCHY,
}

# EXPERIMENTS

DENOISING = "denoising"
DEBLURRING = "deblurring"
INPAINTING = "inpainting"
EXPERIMENTS = [DENOISING, DEBLURRING, INPAINTING]
DEFAULT_NOISE_SD = {DENOISING: 0.2, DEBLURRING: 1e-2, INPAINTING: 1e-2}
DEFAULT_PHANTOM = {DENOISING: "shapes", DEBLURRING: "rects", INPAINTING: "rects"}
DEFAULT_IMAGE_SIZE = 128

# FORWARD MODELS

BLUR_SD = 2.0
BLUR_TRUNCATE = 4.0

# TREE SAMPLING

DEFAULT_STEP_BUDGET = 10 ** 9
ENUMERATION_MAX_EDGES = 25
FOREST_ENUMERATION_MAX_EDGES = 16
DENSE_DETERMINANT_MAX_VERTICES = 10 ** 4
DEFAULT_RHO_REL = 1e-2
TERMINAL = -2  # next-pointer value for a walk that jumped to the terminal vertex

# AUXILIARY VARIABLES

LAPLACE_ZERO_CLAMP = 1e-8

# LINEAR ALGEBRA

CG_TOLERANCE = 1e-6
CG_MAX_ITER_FACTOR = 10
HUTCHINSON_PROBES = 64
HUTCHINSON_FLOOR = 1e-12

# CHAINS

BURN_IN_FRACTION = 0.2

# FILE FORMATS

SAMPLE_DUMP_MAGIC = b"RSTMRFS1"
FOREST_COMPONENTS_KEY = "components"
BENCHMARK_HEADER = ["grid_size", "kappa", "rho_rel", "mean_steps", "wall_time_ms"]
CONTRAST_HEADER = ["lambda", "family", "rst", "mean_max_local_contrast", "mean_global_contrast",
                   "sample_max_local_contrast", "sample_global_contrast"]
RUNTIME_HEADER = ["lambda", "family", "rst", "chain", "wall_time_ms", "mean_cg_iterations",
                  "mean_components", "flagged_samples"]
INTERFACE_HEADER = ["grid_size", "interface_length", "span", "roughness"]

# ENVIRONMENT

ENV_OUT_DIR = "RSTMRF_OUT_DIR"
ENV_LOG_FILE = "RSTMRF_LOG_FILE"
ENV_WORKERS = "RSTMRF_WORKERS"
ENV_LOG_LEVEL = "RSTMRF_LOG_LEVEL"
DEFAULT_LOG_FILE = "output/app_output.txt"
