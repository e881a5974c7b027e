import argparse
import logging
import os
import sys

from dotenv import load_dotenv

from commands import CommandRunner
from utilities.config import load_config
from utilities.constants import DEFAULT_LOG_FILE, ENV_LOG_FILE, ENV_LOG_LEVEL, EXPERIMENTS
from utilities.errors import RstMrfError
from utilities.logger_client import LoggerClient

COMMANDS = {
    "sample-prior": CommandRunner.cmd_sample_prior,
    "run-experiment": CommandRunner.cmd_run_experiment,
    "benchmark-trees": CommandRunner.cmd_benchmark_trees,
}

# flag -> config key; every flag defaults to None so the config file value survives
FLAGS = {
    "--experiment": dict(choices=EXPERIMENTS),
    "--family": dict(),
    "--rst": dict(help="true/false"),
    "--lambda": dict(help="strength, or a comma separated sweep"),
    "--rho-rel": dict(),
    "--sigma": dict(help="noise standard deviation"),
    "--iters": dict(),
    "--chains": dict(),
    "--burnin": dict(),
    "--seed": dict(),
    "--cg-tol": dict(),
    "--out-dir": dict(),
    "--size": dict(),
    "--samples": dict(),
    "--sizes": dict(),
    "--kappas": dict(),
    "--rhos": dict(),
    "--repeats": dict(),
    "--timings": dict(help="false writes 0 wall times so outputs are byte-comparable"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rstmrf", description="Random spanning tree MRF priors for imaging")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", default=None, help="flat key=value run configuration")
        sub.add_argument("--precondition", action="store_const", const="true", default=None)
        for flag, options in FLAGS.items():
            sub.add_argument(flag, default=None, **options)
    return parser


def main(argv=None) -> int:
    load_dotenv()
    logging.basicConfig(format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                        level=os.getenv(ENV_LOG_LEVEL, "INFO").upper())
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")
    run_log = LoggerClient(os.getenv(ENV_LOG_FILE, DEFAULT_LOG_FILE))
    try:
        config = load_config(config_path, args)
        written = COMMANDS[command](CommandRunner(config, run_log))
    except RstMrfError as e:
        run_log.log(f"{command} failed: {e}", logging.ERROR)
        return e.exit_code
    run_log.log(f"{command} wrote {len(written)} file(s) to {config.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
