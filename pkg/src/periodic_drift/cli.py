"""
Command-line interface.

Exit codes: 0 success, 2 configuration or validation error, 3 numerical
failure (non-SPD assembly), 4 partial experiment (some rows failed).
"""
import argparse
import logging
import sys

from . import __version__, io
from . import local_time as lt_mod
from .experiments import KINDS, ConfigError, ExperimentConfig, run_experiment
from .posterior import AssemblyError, posterior
from .prior import PriorSpec
from .sde import DriftSpec, simulate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 2, 3, 4

log = logging.getLogger("periodic_drift")


def _positive_float(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _seed(s):
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {s}")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="periodic-drift", description=__doc__.splitlines()[1])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a path of dX = b(X) dt + dW")
    p.add_argument("--drift", required=True, help="registry name (zero, sin, rough) or coefficient file")
    p.add_argument("--T", type=_positive_float, required=True, help="time horizon")
    p.add_argument("--dt", type=_positive_float, default=1e-3, help="Euler step")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True, help="output path CSV (t,x)")

    p = sub.add_parser("localtime", help="periodic local time and winding field of a path")
    p.add_argument("--path", required=True, help="path CSV")
    p.add_argument("--grid", type=int, default=256, help="grid size M")
    p.add_argument("--out", required=True, help="output field CSV (x,L,chi)")

    p = sub.add_parser("posterior", help="Gaussian posterior of the drift given a path")
    p.add_argument("--path", required=True, help="path CSV")
    p.add_argument("--p", type=int, default=2, help="prior smoothness order")
    p.add_argument("--eta", type=_positive_float, default=1.0, help="prior precision scale")
    p.add_argument("--kappa", type=_positive_float, default=1.0, help="prior shift")
    p.add_argument("--nbasis", type=int, default=64, help="Galerkin truncation N")
    p.add_argument("--grid", type=int, default=256, help="grid size M")
    p.add_argument("--out", required=True, help="output posterior JSON")

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out-dir", default=None, help="output directory (default: config output_dir)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--timing", action="store_true", help="also write per-row wall times to timing.csv")
    return parser


def _check_grid(M):
    if not (M >= 4 and M & (M - 1) == 0):
        raise ValueError(f"--grid must be a power of two >= 4, got {M}")


def cmd_simulate(args):
    drift = DriftSpec.from_descriptor(args.drift)
    path = simulate(drift, args.T, args.dt, seed=args.seed)
    io.write_path_csv(path, args.out)
    log.info("wrote %d steps to %s", path.n, args.out)
    return EXIT_OK


def cmd_localtime(args):
    _check_grid(args.grid)
    path = io.read_path_csv(args.path)
    io.write_field_csv(lt_mod.estimate_local_time(path, args.grid), lt_mod.chi_field(path, args.grid), args.out)
    return EXIT_OK


def cmd_posterior(args):
    _check_grid(args.grid)
    spec = PriorSpec(args.p, args.eta, args.kappa, args.nbasis)
    path = io.read_path_csv(args.path)
    post = posterior(spec, lt_mod.estimate_local_time(path, args.grid), lt_mod.chi_field(path, args.grid))
    io.write_posterior_json(post, args.out)
    return EXIT_OK


def cmd_experiment(args):
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    cfg = ExperimentConfig.from_file(args.config)
    report = run_experiment(args.kind, cfg, args.out_dir, workers=args.workers, timing=args.timing)
    if report.failures:
        log.error("%d of %d rows failed", report.failures, len(report.rows))
        return EXIT_PARTIAL
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "localtime": cmd_localtime,
    "posterior": cmd_posterior,
    "experiment": cmd_experiment,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (AssemblyError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
