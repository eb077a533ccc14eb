"""
Command-line entry point.

    python main.py solve --input A.json [--algorithm a|b] [--seed S]
    python main.py sample-start --n 4 --seed 7
    python main.py bench --algo b --n 2..6 --trials 50
    python main.py verify [--experiments det_moment,coarea_identity]

Exit codes: 0 success, 1 input error, 2 some solve paths failed,
3 a verification check failed.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from controller import EXIT_INPUT_ERROR, AppConfig, ApplicationController


def parse_sizes(text: str) -> List[int]:
    """
    Sizes from "4", "2,3,5" or the inclusive range "2..6".
    """
    try:
        if ".." in text:
            low, high = text.split("..", 1)
            sizes = list(range(int(low), int(high) + 1))
        else:
            sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid size list: {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError(f"empty size list: {text!r}")
    return sizes


def parse_names(text: str) -> List[str]:
    return [name.strip() for name in text.split(",") if name.strip()]


def parse_seed(text: str) -> int:
    try:
        seed = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed: {text!r}")
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--algorithm", "--algo", dest="algorithm", choices=["a", "b"], default="a")
    common.add_argument("--seed", type=parse_seed)
    common.add_argument("--eps", type=float, default=1.0 / 16.0,
                        help="step-size parameter in (0, 1/2] (default 1/16)")
    common.add_argument("--max-steps", type=int, default=10 ** 6)
    common.add_argument("--output", type=Path, help="output file (default: stdout)")
    common.add_argument("--format", choices=["json", "csv", "text"])
    common.add_argument("--threads", type=int,
                        help="worker threads (default: EIGENFLOW_THREADS, else 1)")
    common.add_argument("--log-dir", type=Path, help="log directory (default: ~/.eigenflow/logs)")
    common.add_argument("--no-log", action="store_true", help="disable log files and run records")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="eigenflow",
        description="Certified eigenpairs by homotopy continuation, with a Monte Carlo verification suite.",
    )
    commands = parser.add_subparsers(dest="subcommand", required=True)

    solve = commands.add_parser("solve", parents=[common], help="eigenpairs of a matrix file")
    solve.add_argument("--input", type=Path, required=True, help="cmplx-json or plain-text matrix")
    solve.add_argument("--trace", type=Path, help="write tracker steps as JSON lines")

    sample = commands.add_parser("sample-start", parents=[common], help="draw a random start system")
    sample.add_argument("--n", type=int, required=True)

    bench = commands.add_parser("bench", parents=[common], help="mean homotopy steps against n")
    bench.add_argument("--n", type=parse_sizes, default=[2, 3, 4, 5, 6], help='e.g. "2..6" or "2,4,8"')
    bench.add_argument("--trials", type=int)

    verify = commands.add_parser("verify", parents=[common], help="run the verification suite")
    verify.add_argument("--experiments", type=parse_names, default=[])
    verify.add_argument("--samples", type=int, help="Monte Carlo samples per estimate")
    verify.add_argument("--trials", type=int, help="solver trials per conformance check")

    return parser


def config_from_args(args: argparse.Namespace) -> AppConfig:
    values = dict(
        subcommand=args.subcommand,
        algorithm=args.algorithm,
        seed=args.seed,
        eps=args.eps,
        max_steps=args.max_steps,
        output_path=args.output,
        format=args.format,
        threads=args.threads,
        log_dir=args.log_dir,
        enable_logging=not args.no_log,
    )
    if args.subcommand == "solve":
        values.update(input_path=args.input, trace=args.trace)
    elif args.subcommand == "sample-start":
        values.update(n=args.n)
    elif args.subcommand == "bench":
        values.update(n_list=args.n, trials=args.trials)
    elif args.subcommand == "verify":
        values.update(experiments=args.experiments, samples=args.samples, trials=args.trials)
    return AppConfig.from_env(**values)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on bad usage; that code means partial failure here
        return EXIT_INPUT_ERROR if e.code else 0

    config = config_from_args(args)
    controller = ApplicationController(config)
    if args.verbose and controller.logging is not None:
        level = logging.INFO if args.verbose == 1 else logging.DEBUG
        for handler in controller.logging.logger.handlers:
            if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
                handler.setLevel(level)

    return controller.run()


if __name__ == "__main__":
    sys.exit(main())
