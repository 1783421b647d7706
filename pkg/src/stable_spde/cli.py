"""``stable-spde`` command line.

Exit codes: 0 success, 2 configuration error, 3 numerical tolerance not met,
4 I/O failure.  Errors are reported as one line on stderr::

    stable-spde: error kind=<config|numerical|io> message="..."
"""
from __future__ import annotations

import argparse
import sys

from .errors import NumericalError, StableSPDEError
from .harness import COMMANDS, coerce, load_config, run_command

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

_FLAGS = (
    ("--alpha", "stability index in (1, 2)"),
    ("--hurst", "Hurst index in (1/2, 1)"),
    ("--eta", "tail exponent of the spectral sampling density"),
    ("--gamma", "declared Hölder order of sigma"),
    ("--beta", "fractional order for the fracint route"),
    ("--sigma", "coefficient sigma(t, x) as an expression"),
    ("--u0", "initial condition U0(x) as an expression"),
    ("--t-max", "final time"),
    ("--x-min", "left end of the space grid"),
    ("--x-max", "right end of the space grid"),
    ("--n-time", "number of time grid points"),
    ("--n-x", "number of space grid points"),
    ("--n-atoms", "comma-separated, strictly increasing truncation levels"),
    ("--replications", "Monte Carlo replications (charfn)"),
    ("--seed", "master seed (required)"),
    ("--tol", "quadrature tolerance"),
    ("--out", "output CSV path (default: stdout)"),
    ("--workers", "worker threads"),
    ("--theta", "Hölder exponent (holder; default hurst - 0.1)"),
    ("--lambdas", "comma-separated frequencies (charfn)"),
    ("--grid-size", "time points for path interpolation and Hölder quotients"),
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser():
    parser = _Parser(prog="stable-spde", description="Fractional stable noise and the stochastic heat equation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value configuration file")
        for flag, help_text in _FLAGS:
            p.add_argument(flag, help=help_text)
        p.add_argument("--route", choices=("series", "fracint", "both"), help="solution route(s)")
    return parser


def _report(kind, message):
    message = " ".join(str(message).split()).replace('"', "'")
    print(f'stable-spde: error kind={kind} message="{message}"', file=sys.stderr)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        overrides = {}
        for flag, _ in _FLAGS + (("--route", ""),):
            key = flag[2:].replace("-", "_")
            raw = getattr(args, key)
            if raw is not None:
                overrides.update([coerce(key, raw)])
        cfg = load_config(args.config, overrides)
        run_command(args.command, cfg)
    except _UsageError as exc:
        _report("config", exc)
        return EXIT_CONFIG
    except NumericalError as exc:
        _report("numerical", exc)
        return EXIT_NUMERICAL
    except OSError as exc:
        _report("io", exc)
        return EXIT_IO
    except (StableSPDEError, ValueError, TypeError) as exc:
        _report("config", exc)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
