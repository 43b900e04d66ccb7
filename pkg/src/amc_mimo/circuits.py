"""
Behavioral models of the INV feedback circuit, the MVM crossbar stage and
the sample-and-hold transfer between them.

Each amplifier is a single-pole macromodel

    tau_p dv/dt = A0 u - v,     tau_p = A0 / (2 pi GBW)

driving a purely resistive network, so the inverting-input voltage ``u`` is
an instantaneous weighted average of the node's neighbours. All returned
voltages are in the mathematical orientation of the solution (the sign
flips of the inverting stages are undone at the boundary). Time is in ns,
conductance in uS, voltage in V.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .crossbar import map_inv, map_mvm
from .errors import CircuitFault, CircuitSingularError, InvalidInputError, SaturationWarning
from .errors import SingularMatrixError
from .numerics import expand_vector, gram, solve_dense

__all__ = [
    "OAModel",
    "TransientResult",
    "PipelineResult",
    "inv_static",
    "inv_transient",
    "inv_rate_matrix",
    "mvm_compute",
    "mvm_transient",
    "sample_hold",
    "pipeline_transient",
    "settling_time",
    "waveform_rows",
]

MAX_DT_NS = 0.05


@dataclass(frozen=True)
class OAModel:
    gain_db: float = 50.5
    gbw_hz: float = 157e6
    vdd: float = 0.6
    kind: str = "feedback"

    def __post_init__(self):
        if not (self.gain_db > 0 and self.gbw_hz > 0 and self.vdd > 0):
            raise InvalidInputError("gain_db, gbw_hz and vdd must all be positive")
        if self.kind not in ("feedback", "rail-to-rail"):
            raise InvalidInputError(f"unknown OA kind {self.kind!r}")

    @classmethod
    def rail_to_rail(cls, **kw):
        kw.setdefault("gain_db", 86.7)
        kw.setdefault("gbw_hz", 700e6)
        return cls(kind="rail-to-rail", **kw)

    @classmethod
    def ideal(cls, **kw):
        """Infinite DC gain and unbounded rails; the GBW still sets the dynamics."""
        kw.setdefault("vdd", math.inf)
        return cls(gain_db=math.inf, **kw)

    @property
    def A0(self):
        return 10.0 ** (self.gain_db / 20.0)

    @property
    def tau_p(self):
        """Open-loop pole time constant in seconds."""
        return self.A0 / (2 * math.pi * self.gbw_hz)

    @property
    def omega_ns(self):
        """Unity-gain angular frequency in rad/ns."""
        return 2 * math.pi * self.gbw_hz * 1e-9


def _report_saturation(count, oa, strict, stage):
    if count:
        msg = f"{stage}: {count} output(s) beyond +-{oa.vdd} V"
        if strict:
            raise CircuitFault(msg)
        warnings.warn(msg, SaturationWarning, stacklevel=3)


def _saturation(v, oa, strict, stage):
    over = np.abs(v) > oa.vdd
    _report_saturation(int(np.count_nonzero(over)), oa, strict, stage)
    return over


def _inv_network(p):
    if p.role != "INV":
        raise InvalidInputError(f"expected an INV program, got {p.role}")
    G = p.a - p.b + np.diag(p.d)
    gsum = (p.a + p.b).sum(axis=1) + p.d
    return G, gsum


def _inv_currents(p, s_expanded, oa):
    s = np.asarray(s_expanded, dtype=float)
    if s.shape[0] != p.a.shape[0]:
        raise InvalidInputError(f"input has {s.shape[0]} rows, program has {p.a.shape[0]}")
    dac = p.input_scale * s
    if np.any(np.abs(dac) > oa.vdd):
        raise InvalidInputError("input DAC voltages exceed the supply rails")
    return p.g_unit * dac


def inv_static(p, s_expanded, oa, strict=False):
    """
    Operating point of the INV circuit.

    Solves ``(G_eff + diag(g_sum) / A0) v = I`` with ``G_eff = a - b + diag(d)``
    and row input currents ``I = g_unit * input_scale * s``. In the ideal
    limit ``v = (input_scale / scale) * expand(Z)^-1 expand(s)``. A batch of
    inputs (2K x N) is solved at once. Outputs beyond the rails are
    clipped and reported.
    """
    I = _inv_currents(p, s_expanded, oa)
    G, gsum = _inv_network(p)
    system = G + np.diag(gsum / oa.A0)
    try:
        v = solve_dense(system, I)
    except SingularMatrixError as exc:
        raise CircuitSingularError(f"INV network is singular: {exc}") from exc
    _saturation(v, oa, strict, "INV")
    return np.clip(v, -oa.vdd, oa.vdd)


def inv_rate_matrix(p):
    """
    Symmetric normalized matrix ``g^-1/2 sym(G_eff) g^-1/2``.

    Its eigenvalues, times the amplifier GBW, are the decay rates of the
    INV transient (exactly so for a symmetric program); the slowest mode
    is set by the smallest one.
    """
    G, gsum = _inv_network(p)
    w = 1.0 / np.sqrt(gsum)
    return w[:, None] * (0.5 * (G + G.T)) * w[None, :]


def _rk4(drive, rate, v0, dt, n_steps, vdd, record_every):
    """
    Integrate ``dv/dt = drive - rate @ v`` with output clamping.

    ``rate`` is a matrix or, for decoupled nodes, a vector (diagonal).
    Returns the recorded samples and the per-step trajectory needed for
    settling detection.
    """
    if rate.ndim == 1:
        f = lambda v: drive - rate * v  # noqa: E731
    else:
        f = lambda v: drive - rate @ v  # noqa: E731
    v = np.array(v0, dtype=float)
    traj = np.empty((n_steps + 1, v.size))
    traj[0] = v
    clipped = np.zeros(v.size, dtype=bool)
    for k in range(n_steps):
        k1 = f(v)
        k2 = f(v + 0.5 * dt * k1)
        k3 = f(v + 0.5 * dt * k2)
        k4 = f(v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        hit = np.abs(v) > vdd
        if np.any(hit):
            clipped |= hit
            v = np.clip(v, -vdd, vdd)
        traj[k + 1] = v
    return traj, traj[::record_every], clipped


def settling_time(times, traj, v_inf, tol):
    """First time after which every node stays within ``tol`` of ``v_inf``."""
    err = np.abs(traj - v_inf[None, :]).max(axis=1)
    bad = np.flatnonzero(err > tol)
    if bad.size == 0:
        return float(times[0])
    if bad[-1] == len(times) - 1:
        return None
    return float(times[bad[-1] + 1])


@dataclass
class TransientResult:
    times: np.ndarray
    node_voltages: np.ndarray
    settled_at: float
    final: np.ndarray
    clipped: np.ndarray
    v_inf: np.ndarray
    tolerance: float


def _check_dt(dt_ns, t_end_ns, record_every):
    if not (0 < dt_ns <= MAX_DT_NS):
        raise InvalidInputError(f"dt must be in (0, {MAX_DT_NS}] ns, got {dt_ns}")
    if t_end_ns <= 0:
        raise InvalidInputError("t_end must be positive")
    if record_every < 1:
        raise InvalidInputError("record_every must be >= 1")
    return int(round(t_end_ns / dt_ns))


def _transient(drive, rate, v_inf, oa, dt_ns, n_steps, settle_tol_v, settle_rel,
               record_every, strict, stage):
    traj, rec, clipped = _rk4(drive, rate, np.zeros(v_inf.size), dt_ns, n_steps,
                              oa.vdd, record_every)
    times = np.arange(n_steps + 1) * dt_ns
    tol = max(settle_tol_v, settle_rel * float(np.abs(v_inf).max()))
    settled = settling_time(times, traj, v_inf, tol)
    if strict and settled is None:
        raise CircuitFault(f"{stage} did not settle within {times[-1]:.3f} ns")
    return TransientResult(
        times=times[::record_every],
        node_voltages=rec,
        settled_at=settled,
        final=traj[-1].copy(),
        clipped=clipped,
        v_inf=v_inf,
        tolerance=tol,
    )


def inv_transient(p, s_expanded, oa, dt_ns=0.01, t_end_ns=10.0, settle_tol_v=1e-3,
                  settle_rel=0.005, record_every=1, strict=False):
    """
    Step response of the INV circuit from all-zero outputs.

    Integrates ``dv/dt = omega (I - G_eff v) / g_sum - v / tau_p`` with
    fixed-step RK4 and clamps outputs at the rails every step. The settled
    value is the static operating point.
    """
    n_steps = _check_dt(dt_ns, t_end_ns, record_every)
    s = np.asarray(s_expanded, dtype=float).ravel()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SaturationWarning)
        v_inf = inv_static(p, s, oa, strict=False)
    I = _inv_currents(p, s, oa)
    G, gsum = _inv_network(p)
    w = oa.omega_ns
    drive = w * I / gsum
    rate = w * G / gsum[:, None] + (w / oa.A0) * np.eye(G.shape[0])
    res = _transient(drive, rate, v_inf, oa, dt_ns, n_steps, settle_tol_v, settle_rel,
                     record_every, strict, "INV")
    _report_saturation(int(np.count_nonzero(res.clipped)), oa, strict, "INV transient")
    return res


def _mvm_network(p):
    if p.role != "MVM":
        raise InvalidInputError(f"expected an MVM program, got {p.role}")
    g_f = p.g_unit
    gcol = (p.a + p.b).sum(axis=0) + g_f
    return p.a - p.b, g_f, gcol


def _mvm_input(p, v_in, oa):
    v = np.asarray(v_in, dtype=float)
    if v.shape[0] != p.a.shape[0]:
        raise InvalidInputError(f"input has {v.shape[0]} rows, program has {p.a.shape[0]}")
    if np.any(np.abs(v) > oa.vdd):
        raise InvalidInputError("MVM input voltages exceed the supply rails")
    return v


def mvm_compute(p, v_in, oa, strict=False):
    """
    Column outputs of the MVM crossbar.

    Inputs drive the rows (and their negatives drive the B array), each
    column is a transimpedance stage with feedback conductance ``g_unit``.
    The finite-gain factor uses the total conductance at the column node,
    feedback included.
    """
    v = _mvm_input(p, v_in, oa)
    W, g_f, gcol = _mvm_network(p)
    gain = 1.0 / (1.0 + gcol / (oa.A0 * g_f))
    x = (W.T @ v) / g_f
    x = x * (gain[:, None] if x.ndim == 2 else gain)
    _saturation(x, oa, strict, "MVM")
    return np.clip(x, -oa.vdd, oa.vdd)


def mvm_transient(p, v_in, oa, dt_ns=0.01, t_end_ns=10.0, settle_tol_v=1e-3,
                  settle_rel=0.005, record_every=1, strict=False):
    """Step response of the MVM columns to a held input vector."""
    n_steps = _check_dt(dt_ns, t_end_ns, record_every)
    v = _mvm_input(p, np.asarray(v_in, dtype=float).ravel(), oa)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SaturationWarning)
        x_inf = mvm_compute(p, v, oa)
    W, g_f, gcol = _mvm_network(p)
    w = oa.omega_ns
    drive = w * (W.T @ v) / gcol
    rate = w * g_f / gcol + w / oa.A0
    return _transient(drive, rate, x_inf, oa, dt_ns, n_steps, settle_tol_v, settle_rel,
                      record_every, strict, "MVM")


def sample_hold(v, hold_ns=0.0, droop_v_per_ns=0.0):
    """Held copy of ``v`` after linear droop toward 0 (never past it)."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("held voltages must be finite")
    if hold_ns < 0 or droop_v_per_ns < 0:
        raise InvalidInputError("hold time and droop must be non-negative")
    mag = np.maximum(np.abs(v) - droop_v_per_ns * hold_ns, 0.0)
    return np.sign(v) * mag


@dataclass
class PipelineResult:
    times: np.ndarray
    inv_voltages: np.ndarray
    mvm_voltages: np.ndarray
    inv: TransientResult
    mvm: TransientResult
    y_held: np.ndarray
    x: np.ndarray
    x_static: np.ndarray
    t_start_ns: float
    window_ns: float
    programs: tuple = field(repr=False, default=())

    @property
    def inv_settling_ns(self):
        return self.inv.settled_at

    @property
    def mvm_settling_ns(self):
        return self.mvm.settled_at

    @property
    def completed_ns(self):
        """Time after input application at which both stages were settled."""
        if self.inv.settled_at is None or self.mvm.settled_at is None:
            return None
        return self.window_ns + self.mvm.settled_at


def pipeline_transient(H, s, device, oa, rng=None, dt_ns=0.01, window_ns=10.0,
                       t_start_ns=10.0, settle_tol_v=1e-3, settle_rel=0.005,
                       record_every=10, droop_v_per_ns=0.0, strict=False):
    """
    Full INV -> S&H -> MVM run on a fixed schedule.

    Inputs are applied at ``t_start_ns``; the INV output is sampled one
    window later and held at the MVM rows, whose columns then run for one
    more window.
    """
    H = np.asarray(H, dtype=complex)
    p_inv = map_inv(gram(H), H.shape[1], device, rng)
    p_mvm = map_mvm(H, device, rng)
    s_exp = expand_vector(np.asarray(s, dtype=complex).ravel())

    inv = inv_transient(p_inv, s_exp, oa, dt_ns, window_ns, settle_tol_v, settle_rel,
                        record_every, strict)
    y_held = sample_hold(inv.final, window_ns, droop_v_per_ns)
    mvm = mvm_transient(p_mvm, y_held, oa, dt_ns, window_ns, settle_tol_v, settle_rel,
                        record_every, strict)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SaturationWarning)
        x_static = mvm_compute(p_mvm, inv_static(p_inv, s_exp, oa), oa)

    step = dt_ns * record_every
    n_pre = int(round(t_start_ns / step))
    n_win = len(inv.times) - 1
    times = np.arange(n_pre + 2 * n_win + 1) * step
    inv_v = np.zeros((times.size, inv.node_voltages.shape[1]))
    inv_v[n_pre:n_pre + n_win + 1] = inv.node_voltages
    inv_v[n_pre + n_win + 1:] = np.nan  # INV stage not recorded after sampling
    mvm_v = np.zeros((times.size, mvm.node_voltages.shape[1]))
    mvm_v[n_pre + n_win:] = mvm.node_voltages
    return PipelineResult(
        times=times,
        inv_voltages=inv_v,
        mvm_voltages=mvm_v,
        inv=inv,
        mvm=mvm,
        y_held=y_held,
        x=mvm.final.copy(),
        x_static=x_static,
        t_start_ns=t_start_ns,
        window_ns=window_ns,
        programs=(p_inv, p_mvm),
    )


def waveform_rows(result):
    """(time_ns, stage, node_index, voltage_v) rows for the waveform CSV."""
    for stage, volts in (("INV", result.inv_voltages), ("MVM", result.mvm_voltages)):
        for k, t in enumerate(result.times):
            row = volts[k]
            if np.isnan(row[0]):
                continue
            for j, v in enumerate(row):
                yield float(t), stage, j, float(v)
