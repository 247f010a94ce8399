"""Batch command-line harness: evaluate scenarios, sweep, emit CSV.

Exit codes: 0 success, 2 configuration error, 3 domain error, 4 I/O
error. Every run echoes the fully resolved scenario (defaults included)
before computing, so the emitted CSV is auditable against its inputs.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional

import numpy as np

from . import protocol
from .errors import ConfigError, DomainError, ZedlinkError
from .phy import (
    ChannelPair,
    apply_backscatter_channel,
    ber_monte_carlo,
    psd_of_backscatter,
    synthesize_ambient_frame,
    zed_fsk_waveform,
)
from .positioning import positioning_error_mc
from .scenario import Scenario, list_presets, parse_scenario
from .sweep import (
    RangeSpec,
    emit_csv,
    evaluate_scenario,
    render_csv,
    run_sweep,
)


def add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="scenario file (TOML or JSON)")
    parser.add_argument(
        "--preset",
        metavar="NAME",
        help=f"bundled scenario; one of: {', '.join(list_presets())}",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a scenario value (repeatable)",
    )
    parser.add_argument("--seed", type=int, help="override scenario.seed")
    parser.add_argument("--out", metavar="CSV", help="output CSV path (default: stdout)")
    parser.add_argument("--points", type=int, help="number of evaluation points")


def load_scenario(args) -> Scenario:
    scenario = parse_scenario(
        path=args.config, preset=args.preset, overrides=args.overrides, seed=args.seed
    )
    print(scenario.echo())
    return scenario


def deliver(records, args, preamble=None) -> None:
    if args.out:
        emit_csv(records, args.out, preamble)
        print(f"# wrote {len(records)} record(s) to {args.out}")
    else:
        sys.stdout.write(render_csv(records, preamble))


def cmd_linkbudget_bistatic(args) -> int:
    scenario = load_scenario(args)
    if scenario.mode != "bistatic":
        raise ConfigError("linkbudget bistatic requires scenario.mode = 'bistatic'")
    deliver([evaluate_scenario(scenario)], args)
    return 0


def cmd_linkbudget_monostatic(args) -> int:
    scenario = load_scenario(args)
    if scenario.mode != "monostatic":
        raise ConfigError("linkbudget monostatic requires scenario.mode = 'monostatic'")
    deliver([evaluate_scenario(scenario)], args)
    return 0


def cmd_phy_ber(args) -> int:
    scenario = load_scenario(args)
    phy = scenario.phy_scenario()
    result = ber_monte_carlo(phy, scenario.get("phy", "trials"), seed=scenario.seed)
    record = {
        "carrier_hz": scenario.get("carrier", "frequency_hz"),
        "per_re_snr_db": phy.per_re_snr_db,
        "backscatter_to_direct_db": phy.backscatter_to_direct_db,
        "predicted_effective_snr_db": phy.predicted_effective_snr_db,
        "code": phy.code,
        "trials": scenario.get("phy", "trials"),
        "n_bits": result.n_bits,
        "n_errors": result.n_errors,
        "ber": result.ber,
        "wilson_low": result.ci_low,
        "wilson_high": result.ci_high,
        "info_bit_rate_bps": result.info_bit_rate_bps,
        "scenario_hash": scenario.hash(),
    }
    deliver([record], args)
    return 0


def cmd_phy_psd(args) -> int:
    scenario = load_scenario(args)
    phy = scenario.phy_scenario()
    snr_db = scenario.get("phy", "psd_per_re_snr_db")
    relative_db = scenario.get("phy", "psd_backscatter_relative_db")
    if math.isnan(snr_db):
        snr_db = phy.per_re_snr_db
    if math.isnan(relative_db):
        relative_db = phy.backscatter_to_direct_db
    n_symbols = scenario.get("phy", "psd_symbols")
    grid = synthesize_ambient_frame(
        phy.carrier, n_symbols, symbol_rate_hz=phy.fsk.symbol_rate_hz
    )
    # The tag beacons steadily at f0 (an all-zero payload).
    waveform = zed_fsk_waveform([0] * n_symbols, phy.fsk)
    channel = ChannelPair.from_power_ratio(
        phy.carrier.n_subcarriers,
        phy.carrier.rx_antennas,
        relative_db,
        phy.fsk.amplitude,
    )
    received = apply_backscatter_channel(
        grid, channel, waveform, snr_db, seed=scenario.seed
    )
    spectrum = psd_of_backscatter(
        received, peak_threshold_db=scenario.get("phy", "psd_threshold_db")
    )
    records = [
        {"offset_hz": float(f), "power_db": float(p)}
        for f, p in zip(spectrum.offset_hz, spectrum.power_db)
    ]
    preamble = [
        f"scenario_hash: {scenario.hash()}",
        f"peaks_hz: {','.join(repr(float(p)) for p in spectrum.peaks_hz)}",
        f"bin_hz: {spectrum.bin_hz!r}",
        "units: offset relative to each pilot subcarrier in Hz, power in dB",
    ]
    deliver(records, args, preamble)
    return 0


def cmd_protocol_aloha(args) -> int:
    scenario = load_scenario(args)
    points = args.points or 25
    loads = np.linspace(
        scenario.get("access", "load_min"), scenario.get("access", "load_max"), points
    )
    tags = scenario.get("access", "tags")
    slots = scenario.get("access", "slots")
    records = []
    for i, load in enumerate(loads):
        g = float(load)
        analytic = protocol.slotted_aloha_throughput(g)
        mc = protocol.slotted_aloha_mc(g, tags, slots, seed=scenario.seed + i)
        records.append(
            {
                "offered_load": g,
                "throughput_analytic": analytic,
                "throughput_mc": mc,
                "abs_error": abs(mc - analytic),
                "scenario_hash": scenario.hash(),
            }
        )
    deliver(records, args)
    return 0


def cmd_protocol_rate(args) -> int:
    scenario = load_scenario(args)
    order = scenario.get("access", "modulation_order")
    code_rate = scenario.get("access", "code_rate")
    fdma = protocol.fdma_capacity(
        scenario.get("access", "total_bandwidth_hz"),
        scenario.get("access", "per_device_bandwidth_hz"),
        scenario.get("access", "guard_hz"),
    )
    rows = []
    for label, symbol_rate in (
        ("ambc_inband", scenario.get("fsk", "symbol_rate_hz")
         if scenario.mode == "bistatic" else 100.0),
        ("dedicated_resource", scenario.get("access", "dedicated_symbol_rate_hz")),
    ):
        rows.append(
            {
                "label": label,
                "symbol_rate_hz": symbol_rate,
                "modulation_order": order,
                "code_rate": code_rate,
                "data_rate_bps": protocol.d2r_data_rate(symbol_rate, order, code_rate),
                "fdma_devices": fdma,
                "scenario_hash": scenario.hash(),
            }
        )
    deliver(rows, args)
    return 0


def cmd_protocol_plan(args) -> int:
    scenario = load_scenario(args)
    grid = protocol.ResourceGrid(
        scenario.get("access", "dl_blocks"), scenario.get("access", "ul_blocks")
    )
    plan = protocol.resource_plan(scenario.get("access", "plan_mode"), grid)
    print(plan.text_map())
    records = [
        {
            "direction": a.direction,
            "block": a.block,
            "link": a.link,
            "overlay": int(a.overlay),
            "scenario_hash": scenario.hash(),
        }
        for a in plan.allocations
    ]
    deliver(records, args)
    return 0


def cmd_position_simulate(args) -> int:
    scenario = load_scenario(args)
    deployment = scenario.deployment()
    link = scenario.bistatic_link()
    trials = args.points or scenario.get("positioning", "trials")
    stats = positioning_error_mc(
        deployment,
        link,
        scenario.get("positioning", "arena_half_width_m"),
        n_trials=trials,
        seed=scenario.seed,
        jitter_sigma_db=scenario.get("positioning", "jitter_sigma_db"),
        weighting=scenario.get("positioning", "weighting"),
    )
    records = []
    for i in range(stats.n_trials):
        records.append(
            {
                "trial": i,
                "ue_x_m": float(stats.trials["ue_x_m"][i]),
                "ue_y_m": float(stats.trials["ue_y_m"][i]),
                "n_detected": int(stats.trials["n_detected"][i]),
                "fix": int(stats.trials["n_detected"][i] > 0),
                "est_x_m": float(stats.trials["est_x_m"][i]),
                "est_y_m": float(stats.trials["est_y_m"][i]),
                "error_m": float(stats.trials["error_m"][i]),
                "uncertainty_m": float(stats.trials["uncertainty_m"][i]),
                "scenario_hash": scenario.hash(),
            }
        )
    print(
        f"# trials={stats.n_trials} no_fix_rate={stats.no_fix_rate!r} "
        f"mean_error_m={stats.mean_error_m!r} median_error_m={stats.median_error_m!r}"
    )
    deliver(records, args)
    return 0


def cmd_sweep(args) -> int:
    scenario = load_scenario(args)
    if args.values:
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"--values must be comma-separated numbers: {exc}") from exc
        records = run_sweep(scenario, args.var, values=values)
    else:
        if args.start is None or args.stop is None:
            raise ConfigError("sweep needs --start and --stop (or --values)")
        spec = RangeSpec(args.start, args.stop, args.points or 50, args.scale)
        records = run_sweep(scenario, args.var, spec=spec)
    deliver(records, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zedlink",
        description="Link budgets, PHY Monte Carlo, access and positioning "
        "studies for zero-energy backscatter tags on ambient cellular signals.",
    )
    top = parser.add_subparsers(dest="command", required=True)

    lb = top.add_parser("linkbudget", help="bistatic / monostatic budgets")
    lb_sub = lb.add_subparsers(dest="subcommand", required=True)
    p = lb_sub.add_parser("bistatic", help="full uplink bistatic breakdown")
    add_common(p)
    p.set_defaults(handler=cmd_linkbudget_bistatic)
    p = lb_sub.add_parser("monostatic", help="mmWave monostatic budget and range")
    add_common(p)
    p.set_defaults(handler=cmd_linkbudget_monostatic)

    phy = top.add_parser("phy", help="baseband Monte Carlo and spectra")
    phy_sub = phy.add_subparsers(dest="subcommand", required=True)
    p = phy_sub.add_parser("ber", help="end-to-end bit error rate")
    add_common(p)
    p.set_defaults(handler=cmd_phy_ber)
    p = phy_sub.add_parser("psd", help="sideband spectrum dump (offset, power)")
    add_common(p)
    p.set_defaults(handler=cmd_phy_psd)

    proto = top.add_parser("protocol", help="access-layer calculators")
    proto_sub = proto.add_subparsers(dest="subcommand", required=True)
    p = proto_sub.add_parser("aloha", help="slotted-ALOHA throughput vs load")
    add_common(p)
    p.set_defaults(handler=cmd_protocol_aloha)
    p = proto_sub.add_parser("rate", help="device-to-reader data rates")
    add_common(p)
    p.set_defaults(handler=cmd_protocol_rate)
    p = proto_sub.add_parser("plan", help="reserved / in-band resource plan")
    add_common(p)
    p.set_defaults(handler=cmd_protocol_plan)

    pos = top.add_parser("position", help="beacon positioning studies")
    pos_sub = pos.add_subparsers(dest="subcommand", required=True)
    p = pos_sub.add_parser("simulate", help="Monte Carlo positioning error")
    add_common(p)
    p.set_defaults(handler=cmd_position_simulate)

    p = top.add_parser("sweep", help="sweep one numeric scenario field")
    add_common(p)
    p.add_argument("--var", required=True, metavar="SECTION.KEY")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--values", metavar="V1,V2,...", help="explicit sweep values")
    p.set_defaults(handler=cmd_sweep)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"zedlink: configuration error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"zedlink: domain error: {exc}", file=sys.stderr)
        return 3
    except ZedlinkError as exc:
        print(f"zedlink: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"zedlink: i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
