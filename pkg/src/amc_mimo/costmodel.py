"""
Power, energy, latency and operation-count accounting for the analog
precoder and its digital reference.

Units: mW for power, ns for time, nJ for energy (mW x ns = pJ).
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PowerBudget",
    "DigitalReference",
    "ComponentRow",
    "CostReport",
    "LatencyReport",
    "component_counts",
    "cell_power_mw",
    "rram_static_power",
    "power_report",
    "complexity_table",
    "latency_report",
]


@dataclass(frozen=True)
class PowerBudget:
    """
    Per-instance power of each peripheral block, in mW.

    The defaults are calibration constants, not measurements. They were
    chosen once so that the 16 x 128 system totals 125 mW, with the MVM
    column amplifiers taking half of it (62.5 mW over 256 amplifiers).
    The remaining 62 mW is spread over converters and the other
    amplifiers (124.5 mW in all); the RRAM arrays, whose dissipation is
    computed rather than configured, add roughly 0.1 mW at a typical
    operating point.
    """

    oa_inv: float = 0.25
    oa_inverter: float = 0.1
    oa_mvm: float = 0.244140625
    sah_buffer: float = 0.2
    dac_2bit: float = 0.05
    adc_4bit: float = 0.15
    input_follower: float = 0.1375

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if value < 0:
                raise ValueError(f"unit power {name} must be >= 0, got {value}")

    def as_dict(self):
        return {
            "oa_inv": self.oa_inv,
            "oa_inverter": self.oa_inverter,
            "oa_mvm": self.oa_mvm,
            "sah_buffer": self.sah_buffer,
            "dac_2bit": self.dac_2bit,
            "adc_4bit": self.adc_4bit,
            "input_follower": self.input_follower,
        }

    def scaled(self, factor):
        return PowerBudget(**{k: v * factor for k, v in self.as_dict().items()})


@dataclass(frozen=True)
class DigitalReference:
    """Published digital precoder figures for the same 16 x 128 task."""

    power_mw: float = 64.0
    latency_ns: float = 1960.0
    energy_nj: float = 125.0


def component_counts(K, M):
    """Instance count of every peripheral block, read off the circuit topology."""
    if K < 1 or M < 1:
        raise ValueError(f"invalid dimensions K={K}, M={M}")
    return {
        "oa_inv": 2 * K,
        "oa_inverter": 2 * K,
        "oa_mvm": 2 * M,
        "sah_buffer": 2 * K,
        "dac_2bit": 2 * K,
        "adc_4bit": 2 * M,
        "input_follower": 2 * K,
    }


def cell_power_mw(g_us, volts):
    """Static dissipation sum(G V^2) of devices in uS at volts, in mW."""
    g = np.asarray(g_us, dtype=float)
    v = np.asarray(volts, dtype=float)
    return float(np.sum(g * v * v)) * 1e-3


def rram_static_power(p_inv=None, v_inv=None, p_mvm=None, v_mvm=None, oa=None):
    """
    Dissipation of the RRAM cells at a solved operating point, in mW.

    ``v_inv`` are the INV amplifier outputs (solution orientation) and
    ``v_mvm`` the voltages held at the MVM rows. The virtual-ground nodes
    sit at ``output / A0``; ``oa=None`` treats them as exactly 0 V. The
    fixed shift resistors and input resistors are not RRAM and are left out.
    """
    A0 = np.inf if oa is None else oa.A0
    total = 0.0
    if p_inv is not None and v_inv is not None:
        v = np.asarray(v_inv, dtype=float)
        u = v / A0  # row j virtual ground
        # A cells see the inverting outputs -v_k, B cells the inverters' +v_k
        total += cell_power_mw(p_inv.a, -v[None, :] - u[:, None])
        total += cell_power_mw(p_inv.b, v[None, :] - u[:, None])
    if p_mvm is not None and v_mvm is not None:
        v = np.asarray(v_mvm, dtype=float)
        W = p_mvm.a - p_mvm.b
        g_f = p_mvm.g_unit
        gcol = (p_mvm.a + p_mvm.b).sum(axis=0) + g_f
        x = (W.T @ v) / g_f / (1.0 + gcol / (A0 * g_f))
        u = x / A0
        total += cell_power_mw(p_mvm.a, v[:, None] - u[None, :])
        total += cell_power_mw(p_mvm.b, -v[:, None] - u[None, :])
    return total


@dataclass(frozen=True)
class ComponentRow:
    name: str
    count: int
    unit_mw: float
    total_mw: float
    fraction: float


@dataclass(frozen=True)
class CostReport:
    rows: tuple
    total_mw: float
    latency_ns: float
    energy_nj: float
    digital: DigitalReference = field(default_factory=DigitalReference)

    @property
    def speedup(self):
        return self.digital.latency_ns / self.latency_ns

    @property
    def efficiency_ratio(self):
        return self.digital.energy_nj / self.energy_nj

    def fraction(self, name):
        for row in self.rows:
            if row.name == name:
                return row.fraction
        raise KeyError(name)


def power_report(budget, counts, rram_mw, latency_ns, digital=DigitalReference(), rram_cells=0):
    if latency_ns <= 0:
        raise ValueError("latency must be positive")
    if rram_mw < 0:
        raise ValueError("RRAM power must be >= 0")
    units = budget.as_dict()
    entries = [(name, counts[name], units[name]) for name in units]
    totals = [c * u for _, c, u in entries] + [rram_mw]
    total = float(sum(totals))
    rows = [
        ComponentRow(name, c, u, c * u, (c * u) / total if total else 0.0)
        for name, c, u in entries
    ]
    rram_unit = rram_mw / rram_cells if rram_cells else rram_mw
    rows.append(ComponentRow("rram", rram_cells, rram_unit, rram_mw, rram_mw / total if total else 0.0))
    return CostReport(
        rows=tuple(rows),
        total_mw=total,
        latency_ns=float(latency_ns),
        energy_nj=total * latency_ns / 1000.0,
        digital=digital,
    )


def complexity_table(K, M):
    """(scheme, inversion ops, multiplication ops) for each precoding method."""
    return [
        ("amc", 1, 1),
        ("neumann", K**3, M * K**2),
        ("qr", 3 * K**3 + 2 * K**2, M * K**2),
        ("gauss_jordan", K**3 + K**2, M * K**2),
    ]


@dataclass(frozen=True)
class LatencyReport:
    amc_latency_ns: float
    inv_settled_ns: float
    mvm_settled_ns: float
    digital_latency_ns: float

    @property
    def speedup(self):
        return self.digital_latency_ns / self.amc_latency_ns


def latency_report(window_ns=10.0, inv_settled_ns=None, mvm_settled_ns=None,
                   digital=DigitalReference()):
    """
    Latency of one precoding: two scheduled windows (INV, then MVM).

    Measured settling instants are carried along for reference only; the
    accounting uses the schedule.
    """
    return LatencyReport(
        amc_latency_ns=2.0 * window_ns,
        inv_settled_ns=inv_settled_ns,
        mvm_settled_ns=mvm_settled_ns,
        digital_latency_ns=digital.latency_ns,
    )
