"""Command-line front end.

Subcommands: ``run`` (single episode, trace CSV), ``ensemble`` (metrics
summary), ``sweep-snr`` and ``sweep-threshold`` (comparison tables).
Exit codes: 0 on success, 1 for configuration errors, 2 for numerical
failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .config import SimConfig
from .errors import ConfigError, NumericalError
from . import harness


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are config errors (exit 1)
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="eventlink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("run", "simulate one episode and write its trace CSV"),
        ("ensemble", "average metrics over seeded realizations"),
        ("sweep-snr", "event-vs-baseline table over the SNR grid"),
        ("sweep-threshold", "event-vs-baseline table over the threshold grid"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--realizations", type=int, help="ensemble size override")
        p.add_argument("--scheme", choices=["event", "periodic"], help="scheme override")
        p.add_argument(
            "--trigger-rule",
            choices=["two_sided", "transmit_drift_only"],
            help="event-trigger rule override",
        )
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    return parser


def _load_config(args: argparse.Namespace) -> SimConfig:
    cfg = SimConfig.from_json(args.config) if args.config else SimConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.realizations is not None:
        overrides["realizations"] = args.realizations
    if args.scheme is not None:
        overrides["scheme"] = args.scheme
    if args.trigger_rule is not None:
        overrides["trigger_rule"] = args.trigger_rule
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
        cfg.validate()
    return cfg


def _cmd_run(cfg: SimConfig, out: Path) -> None:
    seed = harness.realization_seed(cfg.seed, 0)
    trace = harness.run_episode(cfg, seed)
    harness.write_trace_csv(trace, out / "trace.csv")
    harness.write_sidecar(cfg, out / "trace.meta.json", realization_seed=seed)
    metrics = harness.episode_metrics(trace, cfg.warmup)
    print(
        f"episode ({cfg.scheme}): mean ePe {metrics.mean_e_p_e:.6g}, "
        f"mean |u|^2 {metrics.mean_u2:.6g}, "
        f"{metrics.transmissions} transmissions, "
        f"mean interval {metrics.mean_interval:.4g} slots"
    )
    print(f"wrote {out / 'trace.csv'}")


def _cmd_ensemble(cfg: SimConfig, out: Path) -> None:
    period = cfg.baseline_period if cfg.scheme == "periodic" else None
    summary, _ = harness.run_ensemble(cfg, period=period)
    row = harness.SweepRow("single", cfg.snr_db, cfg.scheme, summary)
    harness.write_sweep_csv([row], out / "ensemble.csv")
    harness.write_sidecar(cfg, out / "ensemble.meta.json")
    print(
        f"{cfg.scheme} over {summary.realizations} realizations: "
        f"mean ePe {summary.mean_e_p_e:.6g} (se {summary.se_e_p_e:.2g}), "
        f"mean |u|^2 {summary.mean_u2:.6g} (se {summary.se_u2:.2g}), "
        f"mean interval {summary.mean_interval:.4g} slots"
    )
    print(f"wrote {out / 'ensemble.csv'}")


def _cmd_sweep(cfg: SimConfig, out: Path, axis: str) -> None:
    values = cfg.snr_grid if axis == "snr" else cfg.lmax_grid
    rows = harness.sweep(cfg, axis, values)
    name = f"sweep_{axis}.csv"
    harness.write_sweep_csv(rows, out / name)
    harness.write_sidecar(cfg, out / f"sweep_{axis}.meta.json", axis=axis, values=list(values))
    for row in rows:
        s = row.summary
        print(
            f"{axis}={row.value:g} {row.scheme:>8}: "
            f"ePe {s.mean_e_p_e:.4g}, |u|^2 {s.mean_u2:.4g}, "
            f"interval {s.mean_interval:.4g}"
            + (f" (period {s.period})" if s.period else "")
        )
    print(f"wrote {out / name}")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load_config(args)
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "run":
            _cmd_run(cfg, out)
        elif args.command == "ensemble":
            _cmd_ensemble(cfg, out)
        elif args.command == "sweep-snr":
            _cmd_sweep(cfg, out, "snr")
        elif args.command == "sweep-threshold":
            _cmd_sweep(cfg, out, "threshold")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
