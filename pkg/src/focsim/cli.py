"""Command-line entry point: ``focsim simulate | compare | imcurve``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from focsim.control import ConfigurationError
from focsim.harness.compare import ComparisonReport, ComparisonRow, compare_modulators
from focsim.harness.runner import run_scenario
from focsim.harness.scenario import (
    MODULATOR_KINDS,
    BENCHMARK_ORDER,
    dump_config,
    im_from_dict,
    load_config,
    modulators_from_dict,
    resolve_config,
    scenario_from_dict,
)
from focsim.machines import im_torque_slip_curve, torque_slip_to_csv
from focsim.simcore import SimulationDiverged

EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_OTHER = 1


def _set_path(cfg: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = cfg
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"--set {dotted}: {k} is not a section")
    node[keys[-1]] = value


def _config(args) -> dict:
    raw = load_config(args.config)
    for item in args.set or []:
        key, sep, text = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        _set_path(raw, key.strip(), yaml.safe_load(text))
    if args.thd_f1 is not None:
        _set_path(raw, "thd.f1_hz", float(args.thd_f1))
    return resolve_config(raw)


def _spec(args, cfg):
    spec = scenario_from_dict(cfg)
    return spec.fast() if args.fast else spec


def _cmd_simulate(args) -> int:
    cfg = _config(args)
    spec = _spec(args, cfg)
    (mod,) = modulators_from_dict(cfg, [args.modulator])
    rep = run_scenario(spec, mod)
    out = Path(args.out)
    rep.write_outputs(out)
    table = ComparisonReport([ComparisonRow(mod.kind, rep.thd_per_window, [m.rise_time for m in rep.metrics])],
                             [t for t, _ in spec.thd_windows], rep.step_times)
    table.to_csv(out / "report.csv")
    dump_config(rep.config_echo, out / "config.yaml")
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _print_table(table)
    return 0


def _cmd_compare(args) -> int:
    cfg = _config(args)
    spec = _spec(args, cfg)
    mods = modulators_from_dict(cfg, args.modulators)
    rep = compare_modulators(spec, mods, args.workers)
    rep.write(args.out)
    _print_table(rep)
    failed = [r.modulator for r in rep.rows if r.status != "ok"]
    if failed:
        _error("RunFailed", f"runs failed: {', '.join(failed)}")
        return EXIT_OTHER
    return 0


def _cmd_imcurve(args) -> int:
    cfg = load_config(args.config)
    params, V_s, omega_e, grid = im_from_dict(cfg)
    rows = im_torque_slip_curve(params, V_s, omega_e, grid)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    torque_slip_to_csv(rows, out / "torque_slip.csv")
    peak = max(rows, key=lambda r: r.T_e)
    print(f"{len(rows)} points; peak torque {peak.T_e:.4g} N m at S = {peak.S:.4g}")
    return 0


def _print_table(rep: ComparisonReport) -> None:
    print(",".join(rep.header()))
    for r in rep.rows:
        thd = ["-" if v is None else f"{100 * v:.2f}" for v in r.thd]
        rise = ["-" if v is None else f"{1e3 * v:.3f}" for v in r.rise_time]
        print(",".join([r.modulator, *thd, *rise, "-" if r.rank is None else str(r.rank), r.status]))


def _error(kind: str, message: str) -> None:
    print("error: " + json.dumps({"error": kind, "message": message}), file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file (defaults to the benchmark scenario)")
    common.add_argument("--fast", action="store_true", help="5 us time step instead of 1 us")
    common.add_argument("--thd-f1", type=float, metavar="HZ",
                        help="fixed THD fundamental instead of the speed-derived one")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config field, e.g. control.i_q_limit=40 (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="focsim", description="Vector-controlled PMSM drive simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="run one modulator")
    s.add_argument("--modulator", required=True, choices=MODULATOR_KINDS)
    s.add_argument("--out", default="focsim_out")
    s.set_defaults(func=_cmd_simulate)

    c = sub.add_parser("compare", parents=[common], help="run several modulators on one scenario")
    c.add_argument("--modulators", nargs="+", choices=MODULATOR_KINDS, default=list(BENCHMARK_ORDER))
    c.add_argument("--workers", type=int, default=None)
    c.add_argument("--out", default="focsim_out")
    c.set_defaults(func=_cmd_compare)

    m = sub.add_parser("imcurve", help="induction-motor torque-slip curve")
    m.add_argument("--config")
    m.add_argument("--out", default="focsim_out")
    m.set_defaults(func=_cmd_imcurve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, ValueError, KeyError, TypeError, OSError, yaml.YAMLError) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_CONFIG
    except SimulationDiverged as exc:
        _error("SimulationDiverged", str(exc))
        return EXIT_DIVERGED
    except Exception as exc:  # noqa: BLE001
        _error(type(exc).__name__, str(exc))
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
