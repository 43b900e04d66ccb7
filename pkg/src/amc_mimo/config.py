"""
Simulation configuration.

A config is a JSON object whose sections mirror the dataclasses below. Any
key may be omitted; the defaults reproduce the 16 x 128 reference system.
Unknown keys are rejected.
"""

import dataclasses
import json
import math
from dataclasses import dataclass, field

from .circuits import OAModel
from .costmodel import DigitalReference, PowerBudget
from .crossbar import DeviceModel
from .errors import ConfigError
from .modem import ModemConfig

__all__ = [
    "Dimensions",
    "LinkSection",
    "ModemSection",
    "DeviceSection",
    "OASection",
    "SolverSection",
    "SweepSection",
    "CostSection",
    "SimConfig",
    "parse_config",
    "config_from_dict",
    "config_to_dict",
]


@dataclass(frozen=True)
class Dimensions:
    K: int = 16
    M: int = 128

    def validate(self):
        _require(self.K >= 1, "dimensions.K", "must be >= 1")
        _require(self.M >= self.K, "dimensions.M", "must be >= K")


@dataclass(frozen=True)
class LinkSection:
    rho_T: float = 1.0
    snr_db: tuple = (10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)

    def validate(self):
        _require(self.rho_T > 0, "link.rho_T", "must be positive")
        _require(len(self.snr_db) > 0, "link.snr_db", "must be a non-empty list")
        _require(
            all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
                for v in self.snr_db),
            "link.snr_db",
            "must contain finite numbers",
        )


@dataclass(frozen=True)
class ModemSection:
    beta: float = 1.0 / math.sqrt(10.0)

    def validate(self):
        _require(self.beta > 0, "modem.beta", "must be positive")


@dataclass(frozen=True)
class DeviceSection:
    g_hrs_us: float = 0.1
    level_min_us: float = 2.0
    level_max_us: float = 30.0
    level_count: int = 15
    sigma_prog_us: float = 0.15
    quantization: bool = True

    def validate(self):
        _require(self.sigma_prog_us >= 0, "device.sigma_prog_us", "must be >= 0")
        _require(self.g_hrs_us > 0, "device.g_hrs_us", "must be positive")
        _require(self.level_count >= 1, "device.level_count", "must be >= 1")
        _require(self.level_min_us > self.g_hrs_us, "device.level_min_us", "must exceed g_hrs_us")
        _require(
            self.level_max_us > self.level_min_us or self.level_count == 1,
            "device.level_max_us",
            "must exceed level_min_us",
        )


@dataclass(frozen=True)
class OASection:
    gain_db: float = 50.5
    gbw_mhz: float = 157.0
    vdd_v: float = 0.6
    buffer_gain_db: float = 86.7
    buffer_gbw_mhz: float = 700.0

    def validate(self):
        for name in ("gain_db", "gbw_mhz", "vdd_v", "buffer_gain_db", "buffer_gbw_mhz"):
            _require(getattr(self, name) > 0, f"oa.{name}", "must be positive")


@dataclass(frozen=True)
class SolverSection:
    mode: str = "static"
    dt_ps: float = 10.0
    t_end_ns: float = 10.0
    settle_tol_mv: float = 1.0
    strict: bool = False
    record_every: int = 10
    droop_v_per_ns: float = 0.0

    def validate(self):
        _require(self.mode in ("static", "transient"), "solver.mode", "must be 'static' or 'transient'")
        _require(0 < self.dt_ps <= 50, "solver.dt_ps", "must be in (0, 50]")
        _require(self.t_end_ns > 0, "solver.t_end_ns", "must be positive")
        _require(self.settle_tol_mv > 0, "solver.settle_tol_mv", "must be positive")
        _require(self.record_every >= 1, "solver.record_every", "must be >= 1")
        _require(self.droop_v_per_ns >= 0, "solver.droop_v_per_ns", "must be >= 0")


@dataclass(frozen=True)
class SweepSection:
    max_symbols: int = 2_000_000
    min_errors: int = 100
    min_symbols: int = 0
    trials: int = 1000
    reuse_h: bool = True
    vectors_per_h: int = 1000
    schemes: tuple = ("digital", "amc")
    neumann_terms: int = 3
    constellation_snr_db: float = 30.0

    def validate(self):
        _require(self.max_symbols >= 1, "sweep.max_symbols", "must be >= 1")
        _require(self.min_errors >= 0, "sweep.min_errors", "must be >= 0")
        _require(0 <= self.min_symbols <= self.max_symbols, "sweep.min_symbols",
                 "must lie in [0, max_symbols]")
        _require(self.trials >= 1, "sweep.trials", "must be >= 1")
        _require(self.vectors_per_h >= 1, "sweep.vectors_per_h", "must be >= 1")
        _require(len(self.schemes) > 0, "sweep.schemes", "must be non-empty")
        for s in self.schemes:
            _require(isinstance(s, str) and s in ("digital", "amc", "neumann"),
                     "sweep.schemes", f"unknown scheme {s!r}")
        _require(self.neumann_terms >= 1, "sweep.neumann_terms", "must be >= 1")


@dataclass(frozen=True)
class CostSection:
    oa_inv_mw: float = PowerBudget.oa_inv
    oa_inverter_mw: float = PowerBudget.oa_inverter
    oa_mvm_mw: float = PowerBudget.oa_mvm
    sah_buffer_mw: float = PowerBudget.sah_buffer
    dac_2bit_mw: float = PowerBudget.dac_2bit
    adc_4bit_mw: float = PowerBudget.adc_4bit
    input_follower_mw: float = PowerBudget.input_follower
    window_ns: float = 10.0
    digital_power_mw: float = DigitalReference.power_mw
    digital_latency_ns: float = DigitalReference.latency_ns
    digital_energy_nj: float = DigitalReference.energy_nj

    def validate(self):
        for f in dataclasses.fields(self):
            _require(getattr(self, f.name) >= 0, f"cost.{f.name}", "must be >= 0")
        _require(self.window_ns > 0, "cost.window_ns", "must be positive")

    def budget(self):
        return PowerBudget(
            oa_inv=self.oa_inv_mw,
            oa_inverter=self.oa_inverter_mw,
            oa_mvm=self.oa_mvm_mw,
            sah_buffer=self.sah_buffer_mw,
            dac_2bit=self.dac_2bit_mw,
            adc_4bit=self.adc_4bit_mw,
            input_follower=self.input_follower_mw,
        )

    def digital(self):
        return DigitalReference(self.digital_power_mw, self.digital_latency_ns, self.digital_energy_nj)


@dataclass(frozen=True)
class SimConfig:
    dimensions: Dimensions = field(default_factory=Dimensions)
    link: LinkSection = field(default_factory=LinkSection)
    modem: ModemSection = field(default_factory=ModemSection)
    device: DeviceSection = field(default_factory=DeviceSection)
    oa: OASection = field(default_factory=OASection)
    solver: SolverSection = field(default_factory=SolverSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    cost: CostSection = field(default_factory=CostSection)
    master_seed: int = 0

    def validate(self):
        for f in dataclasses.fields(self):
            if f.name != "master_seed":
                getattr(self, f.name).validate()
        _require(self.master_seed >= 0, "master_seed", "must be >= 0")
        return self

    # builders for the model objects used by the simulation modules

    def device_model(self):
        d = self.device
        return DeviceModel.from_range(
            d.level_min_us,
            d.level_max_us,
            d.level_count,
            g_hrs=d.g_hrs_us,
            sigma_prog=d.sigma_prog_us,
            quantization_enabled=d.quantization,
        )

    def oa_model(self):
        o = self.oa
        return OAModel(gain_db=o.gain_db, gbw_hz=o.gbw_mhz * 1e6, vdd=o.vdd_v)

    def buffer_model(self):
        o = self.oa
        return OAModel.rail_to_rail(gain_db=o.buffer_gain_db, gbw_hz=o.buffer_gbw_mhz * 1e6,
                                    vdd=o.vdd_v)

    def modem_config(self):
        return ModemConfig(beta=self.modem.beta)


def _require(ok, field_name, message):
    if not ok:
        raise ConfigError(message, field=field_name)


def _coerce(value, annotation, path):
    kind = annotation
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError("expected a boolean", field=path)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError("expected an integer", field=path)
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("expected a number", field=path)
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError("expected a string", field=path)
        return value
    if kind is tuple:
        if not isinstance(value, list):
            raise ConfigError("expected a list", field=path)
        return tuple(value)
    raise ConfigError(f"unsupported type {kind}", field=path)


def _build(cls, data, prefix):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", field=prefix or "<root>")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        name = f"{prefix}.{unknown[0]}" if prefix else unknown[0]
        raise ConfigError("unknown key", field=name)
    kwargs = {}
    for name, value in data.items():
        f = known[name]
        path = f"{prefix}.{name}" if prefix else name
        if dataclasses.is_dataclass(f.type):
            kwargs[name] = _build(f.type, value, path)
        else:
            kwargs[name] = _coerce(value, f.type, path)
    return cls(**kwargs)


def config_from_dict(data):
    """Build and validate a :class:`SimConfig` from parsed JSON."""
    return _build(SimConfig, data, "").validate()


def parse_config(path=None, overrides=None):
    """
    Read a JSON config file (or none for all defaults) and apply inline
    overrides, given as a nested dict merged section by section.

    Raises
    ------
    ConfigError
        With the offending line (for JSON syntax errors) or field name.
    """
    data = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            data = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, line=exc.lineno) from exc
    if overrides:
        data = _merge(data, overrides)
    return config_from_dict(data)


def _merge(base, extra):
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def config_to_dict(cfg):
    """JSON-ready dict of the fully resolved config."""
    d = dataclasses.asdict(cfg)
    return json.loads(json.dumps(d))
