"""Command line: ``mmv2v run`` for sweeps, ``mmv2v field`` to dump a vehicle field."""

from __future__ import annotations

import argparse
import logging
import sys
import time

from mmv2v.analytics import QuadratureError
from mmv2v.experiments.config import ConfigError, build_scenario, parse_values, split_config
from mmv2v.experiments.output import emit, write_field_csv
from mmv2v.experiments.sweep import MODES, SweepError, SweepSpec, run_sweep
from mmv2v.traffic import populate_grid, scenario_bounds

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

log = logging.getLogger("mmv2v")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _read_overrides(path: str | None) -> tuple[dict, dict]:
    """(scenario overrides, sweep keys) from an optional config file."""
    if path is None:
        return {}, {}
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    overrides, sweep_keys = split_config(text)
    build_scenario(overrides)
    return overrides, sweep_keys


def _cmd_run(args) -> int:
    overrides, sweep_keys = _read_overrides(args.config)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.replications is not None:
        overrides["replications"] = args.replications
    variable = args.sweep or sweep_keys.get("sweep")
    values_text = args.values or sweep_keys.get("values")
    modes_text = args.modes or sweep_keys.get("modes") or ",".join(MODES)
    if variable is None:
        raise ConfigError("sweep", "no sweep variable given (use --sweep or a 'sweep' key)")
    if values_text is None:
        raise ConfigError("values", "no sweep values given (use --values or a 'values' key)")
    spec = SweepSpec.create(
        sweep_variable=variable,
        values=parse_values(values_text),
        overrides=overrides,
        modes=[m.strip() for m in modes_text.split(",") if m.strip()],
    )
    t0 = time.perf_counter()
    result = run_sweep(spec, workers=args.workers)
    log.info("swept %s over %d values in %.1f s", variable, len(spec.values), time.perf_counter() - t0)
    emit(result, "csv", f"{args.out}.csv")
    emit(result, "svg", f"{args.out}.svg")
    log.info("wrote %s.csv and %s.svg", args.out, args.out)
    return EXIT_OK


def _cmd_field(args) -> int:
    overrides, _ = _read_overrides(args.config)
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = build_scenario(overrides)
    rng = cfg.replication_rng(args.replication)
    field = populate_grid(cfg.geom, cfg.headway, scenario_bounds(cfg.source, cfg.dest, cfg.lt), rng)
    write_field_csv(field, args.out)
    log.info("wrote %d vehicles to %s", len(field), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mmv2v", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="sweep one parameter, write <out>.csv and <out>.svg")
    run.add_argument("--config", help="key = value config file")
    run.add_argument("--sweep", choices=("lt", "alpha", "d_safe", "epsilon"))
    run.add_argument("--values", help="comma list (60,80,100) or inclusive range (60:240:20)")
    run.add_argument("--modes", help="comma list of analytic,simulated")
    run.add_argument("--out", required=True, help="output path prefix")
    run.add_argument("--seed", type=int)
    run.add_argument("--replications", type=int)
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=_cmd_run)

    fld = sub.add_parser("field", help="dump one replication's vehicle field as CSV")
    fld.add_argument("--config")
    fld.add_argument("--seed", type=int)
    fld.add_argument("--replication", type=int, default=0)
    fld.add_argument("--out", required=True)
    fld.set_defaults(func=_cmd_field)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SweepError as exc:
        if isinstance(exc.cause, QuadratureError):
            print(f"numerical error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        if isinstance(exc.cause, OSError):
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
        if isinstance(exc.cause, ValueError):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise
    except QuadratureError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
