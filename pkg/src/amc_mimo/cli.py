"""
Command-line front end.

    amc-mimo <subcommand> [--config PATH] [--seed N] [--out DIR]
                          [--strict] [--workers N] [--set JSON]

Every subcommand writes its CSV output(s) into ``--out`` together with a
``<name>.config.json`` sidecar holding the fully resolved configuration,
so a run can be repeated from the sidecar alone.

Exit codes: 0 success, 2 configuration error, 3 circuit fault in strict mode.
"""

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import io
from .channel import sample_channel
from .circuits import inv_static, mvm_compute, pipeline_transient, waveform_rows
from .config import config_to_dict, parse_config
from .costmodel import complexity_table, component_counts, latency_report, power_report
from .costmodel import rram_static_power
from .crossbar import mapping_stats
from .errors import CircuitFault, ConfigError, SaturationWarning
from .linksim import ber_sweep, constellation_dump
from .modem import qam16_modulate
from .numerics import expand_vector, gram
from .precoder import program_amc, zf_amc, zf_digital, zf_neumann
from .streams import stream

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_CONFIG", "EXIT_FAULT"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAULT = 3

BER_HEADER = ("snr_db", "scheme", "symbols", "bit_errors", "ber", "ci_low", "ci_high", "seed")
CONSTELLATION_HEADER = ("trial", "user", "re_ideal", "im_ideal", "re_rx", "im_rx")
WAVEFORM_HEADER = ("time_ns", "stage", "node_index", "voltage_v")
MAPSTATS_HEADER = ("bin_low", "bin_high", "count", "population")
POWER_HEADER = ("component", "count", "unit_power_mw", "total_mw", "fraction")
COMPLEXITY_HEADER = ("scheme", "inversion_ops", "multiplication_ops")


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="JSON config file (defaults if omitted)")
    p.add_argument("--seed", type=int, metavar="N", help="master seed (overrides the config)")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory")
    p.add_argument("--strict", action="store_true", help="treat circuit faults as errors")
    p.add_argument("--workers", type=int, default=1, metavar="N",
                   help="worker processes; never changes results")
    p.add_argument("--set", dest="overrides", metavar="JSON",
                   help='inline overrides, e.g. \'{"dimensions": {"M": 64}}\'')
    return p


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        prog="amc-mimo",
        description="RRAM analog matrix computing for massive-MIMO zero-forcing precoding",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("precode", parents=[common], help="precode one random instance")
    p.add_argument("--scheme", choices=("amc", "digital", "neumann"), default="amc")

    sub.add_parser("transient", parents=[common], help="INV -> S&H -> MVM waveforms")
    sub.add_parser("ber-sweep", parents=[common], help="BER versus SNR")

    p = sub.add_parser("constellation", parents=[common], help="received symbol cloud")
    p.add_argument("--scheme", choices=("amc", "digital", "neumann"), default="amc")

    sub.add_parser("map-stats", parents=[common], help="histograms of mapped Gram entries")
    sub.add_parser("power-report", parents=[common], help="power, energy and op counts")
    return parser


def _load(args):
    overrides = {}
    if args.overrides:
        try:
            overrides = json.loads(args.overrides)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--set: {exc.msg}", line=exc.lineno) from exc
        if not isinstance(overrides, dict):
            raise ConfigError("--set must be a JSON object")
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("must be >= 0", field="master_seed")
        overrides["master_seed"] = args.seed
    if args.strict:
        overrides.setdefault("solver", {})["strict"] = True
    if args.workers < 1:
        raise ConfigError("must be >= 1", field="--workers")
    return parse_config(args.config, overrides)


def _sidecar(out, name, cfg):
    io.write_json(os.path.join(out, f"{name}.config.json"), config_to_dict(cfg))


def _instance(cfg):
    """Channel and symbol vector of the single-instance subcommands."""
    K, M, seed = cfg.dimensions.K, cfg.dimensions.M, cfg.master_seed
    H = sample_channel(K, M, stream(seed, "channel", 0))
    bits = stream(seed, "bits", 0).integers(0, 2, size=4 * K, dtype=np.uint8)
    return H, qam16_modulate(bits, cfg.modem_config())


def cmd_precode(cfg, args):
    H, s = _instance(cfg)
    sol = cfg.solver
    if args.scheme == "digital":
        res = zf_digital(H, s)
    elif args.scheme == "neumann":
        res = zf_neumann(H, s, cfg.sweep.neumann_terms)
    else:
        res = zf_amc(H, s, cfg.device_model(), cfg.oa_model(), mode=sol.mode,
                     rng=stream(cfg.master_seed, "device-inv", 0), dt_ns=sol.dt_ps * 1e-3,
                     t_end_ns=sol.t_end_ns, settle_tol_v=sol.settle_tol_mv * 1e-3,
                     hold_ns=sol.t_end_ns, droop_v_per_ns=sol.droop_v_per_ns,
                     strict=sol.strict)
    ref = zf_digital(H, s)
    rel = float(np.linalg.norm(res.x - ref.x) / np.linalg.norm(ref.x))
    report = {
        "scheme": args.scheme,
        "alpha": res.alpha,
        "relative_error_vs_digital": rel,
        "diagnostics": {k: _plain(v) for k, v in res.diagnostics.items()},
        "x": [[float(z.real), float(z.imag)] for z in res.x],
    }
    io.write_json(os.path.join(args.out, "precode.json"), report)
    _sidecar(args.out, "precode", cfg)
    print(json.dumps(report, indent=2))


def _plain(v):
    if isinstance(v, (np.generic,)):
        return v.item()
    return v


def cmd_transient(cfg, args):
    H, s = _instance(cfg)
    sol = cfg.solver
    window = cfg.cost.window_ns
    res = pipeline_transient(
        H, s, cfg.device_model(), cfg.oa_model(), rng=stream(cfg.master_seed, "device-inv", 0),
        dt_ns=sol.dt_ps * 1e-3, window_ns=window, t_start_ns=window,
        settle_tol_v=sol.settle_tol_mv * 1e-3, record_every=sol.record_every,
        droop_v_per_ns=sol.droop_v_per_ns, strict=sol.strict,
    )
    io.write_csv(os.path.join(args.out, "waveform.csv"), WAVEFORM_HEADER, waveform_rows(res))
    _sidecar(args.out, "waveform", cfg)
    print(f"inputs applied at {res.t_start_ns:g} ns, S&H at {res.t_start_ns + window:g} ns, "
          f"end at {res.times[-1]:g} ns")
    print(f"INV settled after {_ns(res.inv_settling_ns)}, MVM after {_ns(res.mvm_settling_ns)}")


def _ns(t):
    return "not within the window" if t is None else f"{t:.3f} ns"


def cmd_ber_sweep(cfg, args):
    points = ber_sweep(cfg, workers=args.workers)
    rows = [(p.snr_db, p.scheme, p.symbols, p.bit_errors, p.ber, p.ci_low, p.ci_high,
             cfg.master_seed) for p in points]
    io.write_csv(os.path.join(args.out, "ber.csv"), BER_HEADER, rows)
    _sidecar(args.out, "ber", cfg)
    for p in points:
        extra = f"  ({p.excluded} excluded)" if p.excluded else ""
        print(f"{p.scheme:8s} {p.snr_db:6.1f} dB  BER {p.ber:.3e}  "
              f"[{p.ci_low:.2e}, {p.ci_high:.2e}]  n={p.symbols}{extra}")


def cmd_constellation(cfg, args):
    rows = constellation_dump(cfg, args.scheme, cfg.sweep.trials)
    io.write_csv(os.path.join(args.out, "constellation.csv"), CONSTELLATION_HEADER, rows)
    _sidecar(args.out, "constellation", cfg)
    print(f"{len(rows)} received symbols at {cfg.sweep.constellation_snr_db:g} dB")


def cmd_map_stats(cfg, args):
    K, M = cfg.dimensions.K, cfg.dimensions.M
    rng = stream(cfg.master_seed, "map-stats")
    Zs = np.stack([gram(sample_channel(K, M, rng)) for _ in range(cfg.sweep.trials)])
    st = mapping_stats(Zs, M)
    io.write_csv(os.path.join(args.out, "mapstats.csv"), MAPSTATS_HEADER, st.rows())
    _sidecar(args.out, "mapstats", cfg)
    print(f"{st.n_matrices} Gram matrices: off-diagonal within +-0.5: "
          f"{100 * st.offdiag_within_half:.3f} %, pre-shift diagonal mean {st.diag_preshift_mean:.4f}")


def rram_operating_power(cfg, H, s):
    """RRAM dissipation of one programmed instance at its static operating point."""
    oa = cfg.oa_model()
    p_inv, p_mvm = program_amc(H, cfg.device_model(), stream(cfg.master_seed, "device-inv", 0),
                               stream(cfg.master_seed, "device-mvm", 0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SaturationWarning)
        v = inv_static(p_inv, expand_vector(s), oa)
        mvm_compute(p_mvm, v, oa)
    cells = p_inv.a.size + p_inv.b.size + p_mvm.a.size + p_mvm.b.size
    return rram_static_power(p_inv, v, p_mvm, v, oa), cells


def cmd_power_report(cfg, args):
    K, M = cfg.dimensions.K, cfg.dimensions.M
    H, s = _instance(cfg)
    rram_mw, cells = rram_operating_power(cfg, H, s)
    lat = latency_report(cfg.cost.window_ns, digital=cfg.cost.digital())
    rep = power_report(cfg.cost.budget(), component_counts(K, M), rram_mw, lat.amc_latency_ns,
                       cfg.cost.digital(), cells)
    rows = [(r.name, r.count, r.unit_mw, r.total_mw, r.fraction) for r in rep.rows]
    io.write_csv(os.path.join(args.out, "power.csv"), POWER_HEADER, rows)
    io.write_csv(os.path.join(args.out, "complexity.csv"), COMPLEXITY_HEADER,
                 complexity_table(K, M))
    _sidecar(args.out, "power", cfg)
    print(f"total {rep.total_mw:.2f} mW over {rep.latency_ns:g} ns = {rep.energy_nj:.3f} nJ")
    print(f"MVM amplifiers {100 * rep.fraction('oa_mvm'):.1f} %, RRAM {100 * rep.fraction('rram'):.2f} %")
    print(f"speedup {rep.speedup:.1f}x, energy efficiency {rep.efficiency_ratio:.1f}x vs digital")


COMMANDS = {
    "precode": cmd_precode,
    "transient": cmd_transient,
    "ber-sweep": cmd_ber_sweep,
    "constellation": cmd_constellation,
    "map-stats": cmd_map_stats,
    "power-report": cmd_power_report,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        COMMANDS[args.command](cfg, args)
    except CircuitFault as exc:
        print(f"circuit fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK
