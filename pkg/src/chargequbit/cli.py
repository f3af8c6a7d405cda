"""Command-line interface.

Subcommands: ``rates``, ``sweep``, ``crossover``, ``optimize`` and
``oracle-check``. Every config key has a matching flag (``a_nm`` ->
``--a-nm``); flags override values read with ``--config``. Output is CSV
on standard output unless ``--output`` is given.

Exit status: 0 success, 2 configuration error, 3 oracle-check failure,
4 numerical non-convergence.
"""

import argparse
import csv
import io
import logging
import sys

from . import __version__
from .exceptions import ChargeQubitError, ConfigError, NonConvergenceError, ValidationError
from .sweep import (
    CONFIG_KEYS,
    config_from_pairs,
    find_crossover,
    minimize_geometry,
    oracle_check,
    parse_pairs,
    rows_at,
    run_sweep,
    write_csv,
)
from .units import convert_energy, convert_length_time
from .rates import cycle_time

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_NONCONVERGENCE = 4


def _flag(key):
    return "--" + key.replace("_", "-")


def _add_config_flags(parser):
    parser.add_argument("--config", metavar="PATH", help="key = value configuration file")
    parser.add_argument("--output", metavar="PATH", help="CSV destination (default: stdout)")
    group = parser.add_argument_group("configuration keys")
    for key in CONFIG_KEYS:
        group.add_argument(_flag(key), dest=f"cfg_{key}", metavar="VALUE", default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="chargequbit",
        description="Phonon-induced gate errors of double-dot charge qubits.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="errors at a single cycle time")
    _add_config_flags(p)
    point = p.add_mutually_exclusive_group(required=True)
    point.add_argument("--dt-ps", type=float, help="cycle time [ps]")
    point.add_argument("--epsilon-meV", type=float, help="level splitting [meV]")

    p = sub.add_parser("sweep", help="errors over a cycle-time grid")
    _add_config_flags(p)

    p = sub.add_parser("crossover", help="cycle time where D_A = D_P")
    _add_config_flags(p)
    p.add_argument("--channel", help="restrict to one channel")

    p = sub.add_parser("optimize", help="minimise the gate error over a and L")
    _add_config_flags(p)
    p.add_argument("--channel", help="channel (default: first configured)")
    p.add_argument("--dt-ps", type=float, required=True, help="cycle time [ps]")
    p.add_argument("--a-min-nm", type=float, required=True)
    p.add_argument("--a-max-nm", type=float, required=True)
    p.add_argument("--L-min-nm", type=float, required=True)
    p.add_argument("--L-max-nm", type=float, required=True)

    p = sub.add_parser("oracle-check", help="closed forms versus numerical oracles")
    _add_config_flags(p)
    p.add_argument("--b2-points", type=int, default=4,
                   help="cycle times at which the dephasing oracle is run")
    return parser


def load_config(args):
    pairs = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                pairs = parse_pairs(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    for key in CONFIG_KEYS:
        value = getattr(args, f"cfg_{key}")
        if value is not None:
            pairs[key] = value
    return config_from_pairs(pairs)


def _emit_table(header, records, destination):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(records)
    _emit_text(buf.getvalue(), destination)


def _emit_text(text, destination):
    if destination is None:
        sys.stdout.write(text)
        return
    try:
        with open(destination, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ChargeQubitError(f"cannot write {destination}: {exc}") from exc


def _fmt(x):
    return f"{x:.16e}"


def _rows_out(rows, destination):
    if destination is None:
        write_csv(rows, sys.stdout)
    else:
        write_csv(rows, destination)


def cmd_rates(args, config):
    if args.dt_ps is not None:
        dt = convert_length_time(args.dt_ps, "ps")
    else:
        dt = cycle_time(convert_energy(args.epsilon_meV, "meV"))
    _rows_out(rows_at(config, dt), args.output)
    return EXIT_OK


def cmd_sweep(args, config):
    _rows_out(run_sweep(config), args.output)
    return EXIT_OK


def cmd_crossover(args, config):
    channels = [args.channel] if args.channel else list(config.channels)
    records = []
    for channel in channels:
        res = find_crossover(config, channel)
        records.append([res.channel, _fmt(res.dt_star), _fmt(res.d_a), _fmt(res.d_p),
                        "true" if res.found else "false"])
        if not res.found:
            logging.getLogger(__name__).warning(res.message)
    _emit_table(("channel", "dt_star_s", "d_a", "d_p", "found"), records, args.output)
    return EXIT_OK


def cmd_optimize(args, config):
    channel = args.channel or config.channels[0]
    nm = lambda v: convert_length_time(v, "nm")  # noqa: E731
    res = minimize_geometry(config, (nm(args.a_min_nm), nm(args.a_max_nm)),
                            (nm(args.L_min_nm), nm(args.L_max_nm)), channel,
                            convert_length_time(args.dt_ps, "ps"))
    _emit_table(("channel", "dt_s", "a_m", "l_m", "d"),
                [[res.channel, _fmt(res.dt), _fmt(res.a), _fmt(res.l), _fmt(res.d)]],
                args.output)
    return EXIT_OK


def cmd_oracle_check(args, config):
    entries = oracle_check(config, b2_points=args.b2_points)
    _emit_table(
        ("channel", "quantity", "points", "max_rel_dev", "tolerance", "status"),
        [[e.channel, e.quantity, e.points, _fmt(e.max_rel_dev), _fmt(e.tolerance), e.status]
         for e in entries],
        args.output,
    )
    for e in entries:
        if e.detail:
            logging.getLogger(__name__).info("%s %s: %s", e.channel, e.quantity, e.detail)
    statuses = {e.status for e in entries}
    if "nonconverged" in statuses:
        return EXIT_NONCONVERGENCE
    if "fail" in statuses:
        return EXIT_ORACLE
    return EXIT_OK


COMMANDS = {
    "rates": cmd_rates,
    "sweep": cmd_sweep,
    "crossover": cmd_crossover,
    "optimize": cmd_optimize,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        config = load_config(args)
        return COMMANDS[args.command](args, config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ChargeQubitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
