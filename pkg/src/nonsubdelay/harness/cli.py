"""Command line entry point.

Exit codes: 0 on success, 1 for configuration errors, 2 for runtime
errors (including failed ``verify`` checks).
"""

import argparse
import logging
import sys
from dataclasses import replace

from .. import __version__, kernels
from ..errors import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def parse_seeds(text: str):
    try:
        seeds = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError("--seeds", f"expected comma separated integers, got {text!r}") from None
    if not seeds:
        raise ConfigError("--seeds", "no seeds given")
    return seeds


class _Parser(argparse.ArgumentParser):
    """Usage mistakes are configuration errors, so they exit with 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nonsubdelay", description="Delayed online nonsubmodular minimization experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment matrix and write CSVs and plots")
    run.add_argument("--config", help="experiment config file (key = value lines)")
    run.add_argument("--out", help="output directory (overrides output.dir)")
    run.add_argument("--seeds", help="comma separated seeds, e.g. 0,1,2")
    run.add_argument("--parallel", type=int, help="worker processes")

    verify = sub.add_parser("verify", help="run fast internal consistency checks")
    verify.add_argument("--seeds", default="0", help="comma separated seeds for the random instances")

    replot = sub.add_parser("replot", help="redraw plots from an existing output directory")
    replot.add_argument("--out", required=True, help="output directory written by 'run'")
    return parser


def _cmd_run(args) -> int:
    from .config import ExperimentConfig, load_config
    from .runner import run_experiment

    config = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.out:
        changes["out_dir"] = args.out
    if args.seeds:
        changes["seeds"] = parse_seeds(args.seeds)
    if args.parallel is not None:
        if args.parallel < 1:
            raise ConfigError("--parallel", "must be >= 1")
        changes["parallel"] = args.parallel
    if changes:
        config = replace(config, **changes)
    result = run_experiment(config)
    for (algorithm, d), q in sorted(result.chosen_q.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        regrets = result.final_regrets(algorithm, d)
        print(f"d={d:<6} {algorithm:<9} q={q!s:<6} mean final (alpha,beta)-regret {regrets.mean():.6g}")
    print(f"wrote {config.out_dir} in {result.wall_time:.1f}s")
    return EXIT_RUNTIME if result.failures else EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_checks

    ok = True
    for seed in parse_seeds(args.seeds):
        for name, passed, detail in run_checks(seed):
            print(f"{'PASS' if passed else 'FAIL'}  seed={seed}  {name}: {detail}")
            ok &= passed
    return EXIT_OK if ok else EXIT_RUNTIME


def _cmd_replot(args) -> int:
    from .outputs import replot

    for path in replot(args.out):
        print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "verify": _cmd_verify, "replot": _cmd_replot}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surface any failure as a runtime exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
