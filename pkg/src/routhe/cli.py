"""``routhe run|check|convergence --config <path> [--set key=value ...] --out <dir>``.

Exit codes: 0 success, 1 check failure, 2 configuration error, 3 solver failure.
"""

import argparse
import sys

from . import config as cfgmod
from . import experiments as ex
from . import fdms
from .continuous import StepUnderflow

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


def build_parser():
    p = argparse.ArgumentParser(prog="routhe", description="Discrete Routh reduction experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "integrate a scenario and write a CSV"),
                        ("check", "run the invariant checks of a scenario"),
                        ("convergence", "measure global error orders against the oracle")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="flat key=value configuration file")
        s.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a configuration key (repeatable)")
        s.add_argument("--out", default=".", help="output directory")
        if name == "run":
            s.add_argument("--parallel", action="store_true",
                           help="run the three central-potential methods concurrently")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config, args.overrides)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "run":
            print(ex.run(cfg, args.out, args.parallel))
            return EXIT_OK
        if args.command == "check":
            results = ex.check(cfg)
            path = ex.write_check(results, cfg, args.out)
            for r in results:
                print(r.line())
            print(path)
            return EXIT_OK if all(r.ok for r in results) else EXIT_CHECK
        if cfg.scenario != "central-potential":
            print("config error: convergence is defined for the central-potential scenario",
                  file=sys.stderr)
            return EXIT_CONFIG
        rows, failures = ex.convergence(cfg)
        path, om, ork = ex.write_convergence(rows, failures, cfg, args.out)
        print(f"order_mp={ex.fmt(om)} order_rk4={ex.fmt(ork)}")
        print(path)
        return EXIT_SOLVER if failures else EXIT_OK
    except ex.ExperimentFailure as exc:
        print(f"solver failure: {exc} (partial output in {exc.path})", file=sys.stderr)
        return EXIT_SOLVER
    except (fdms.SolverError, StepUnderflow) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
