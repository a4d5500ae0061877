"""Command-line front end.

Subcommands:
  run       execute a campaign, write samples.csv and summary.json
  sweep     run matched-seed campaigns over one parameter's values
  presets   list the bundled scenario presets
  validate  check a configuration without running anything

Configuration layering: built-in defaults, then --config file, then
--preset, then repeated --set key=value overrides.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .config import (
    PRESETS,
    ScenarioConfig,
    parse_key_values,
    parse_set_option,
    preset_overrides,
    resolve_key,
)
from .errors import ConfigurationError
from .sim import (
    CSV_HEADER,
    METRICS,
    POPULATIONS,
    CampaignResult,
    iter_sample_rows,
    run_campaign,
    write_samples_csv,
    write_summary_json,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="configuration file (key = value lines)")
    parser.add_argument("--preset", help="bundled preset name (see 'presets')")
    parser.add_argument("--set", dest="sets", action="append", default=[],
                        metavar="KEY=VALUE", help="override one configuration key")
    parser.add_argument("--seeds", help="seed range 'a..b' (inclusive) or a single seed")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--parallel", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavcoex",
                                     description="Uplink spectrum-sharing simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one campaign")
    _add_common_options(run_p)

    sweep_p = sub.add_parser("sweep", help="run matched-seed campaigns over a parameter")
    _add_common_options(sweep_p)
    sweep_p.add_argument("--param", required=True, help="configuration key to sweep")
    sweep_p.add_argument("--values", required=True,
                         help="comma-separated values, e.g. 400,200,100 or 200,inf")

    sub.add_parser("presets", help="list bundled presets")

    val_p = sub.add_parser("validate", help="validate a configuration")
    val_p.add_argument("--config")
    val_p.add_argument("--preset")
    val_p.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE")

    return parser


def load_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig()
    if getattr(args, "config", None):
        cfg = cfg.with_overrides(parse_key_values(Path(args.config).read_text()))
    if getattr(args, "preset", None):
        cfg = cfg.with_overrides(preset_overrides(args.preset))
    overrides = dict(parse_set_option(item) for item in getattr(args, "sets", []))
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg


def parse_seeds(spec: str) -> list[int]:
    if ".." in spec:
        first, _, last = spec.partition("..")
        start, stop = int(first), int(last)
        if stop < start:
            raise ConfigurationError(f"empty seed range {spec!r}", field="seeds")
        return list(range(start, stop + 1))
    return [int(spec)]


def _validated(cfg: ScenarioConfig) -> ScenarioConfig:
    errors = cfg.validate()
    if errors:
        for err in errors:
            print(f"config error: {err}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    return cfg


def _print_summary_table(campaign: CampaignResult) -> None:
    print(f"{'population':<10} {'metric':<10} {'n':>8} "
          f"{'p05':>12} {'p25':>12} {'p50':>12} {'p75':>12} {'p95':>12}")
    summary = campaign.summary()
    for pop in POPULATIONS:
        for metric in METRICS:
            n = summary["sample_counts"][pop][metric]
            if not n:
                continue
            q = summary["quantiles"][pop][metric]
            print(f"{pop:<10} {metric:<10} {n:>8} "
                  + " ".join(f"{q[key]:>12.4g}" for key in ("p05", "p25", "p50", "p75", "p95")))
    for pop in POPULATIONS:
        frac = campaign.outage_fraction(pop)
        if frac is not None:
            print(f"{pop} outage fraction: {frac:.4f}")


def _cmd_run(args) -> int:
    cfg = _validated(load_config(args))
    seeds = parse_seeds(args.seeds) if args.seeds else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    campaign = run_campaign(cfg, seeds=seeds, parallelism=args.parallel, log=print)
    write_samples_csv(out / "samples.csv", campaign)
    write_summary_json(out / "summary.json", campaign)
    _print_summary_table(campaign)
    print(f"wrote {out / 'samples.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = _validated(load_config(args))
    try:
        key = resolve_key(args.param)
    except ConfigurationError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    tokens = [tok.strip() for tok in args.values.split(",") if tok.strip()]
    if not tokens:
        print("config error: --values is empty", file=sys.stderr)
        return EXIT_CONFIG
    seeds = parse_seeds(args.seeds) if args.seeds else base.seeds()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    combined = out / "sweep_samples.csv"
    with combined.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("group",) + CSV_HEADER)
        for token in tokens:
            cfg = _validated(base.with_overrides({key: token}))
            group = f"{key}={token}"
            print(f"sweep {group}: seeds {seeds[0]}..{seeds[-1]}")
            campaign = run_campaign(cfg, seeds=seeds, parallelism=args.parallel, log=print)
            for row in iter_sample_rows(campaign):
                writer.writerow((group, row[0], row[1], row[2], row[3], repr(float(row[4]))))
            write_summary_json(out / f"summary_{token}.json", campaign)
            _print_summary_table(campaign)
    print(f"wrote {combined}")
    return EXIT_OK


def _cmd_presets() -> int:
    width = max(len(name) for name in PRESETS)
    for name in sorted(PRESETS):
        print(f"{name:<{width}}  {PRESETS[name][0]}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args)
    errors = cfg.validate()
    if errors:
        for err in errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print("configuration ok")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "presets":
            return _cmd_presets()
        return _cmd_validate(args)
    except ConfigurationError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    except Exception as exc:  # runtime failure: report, exit 1
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
