"""
Zero-forcing precoders.

The precoding matrix ``H^H (H H^H)^-1`` is never formed. Every path applies
it to the symbol vector in two steps, first ``y = Z^-1 s`` and then
``x = H^H y``, and finally normalizes by ``alpha = ||x||``.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .circuits import OAModel, inv_static, inv_transient, mvm_compute, sample_hold
from .crossbar import DeviceModel, map_inv, map_mvm
from .errors import DivergenceError, InvalidInputError, SaturationWarning
from .numerics import (
    as_complex_matrix,
    collapse_vector,
    expand_matrix,
    expand_vector,
    gram,
    solve_dense,
)

__all__ = [
    "PrecodeResult",
    "normalize",
    "digital_raw",
    "zf_digital",
    "program_amc",
    "amc_raw",
    "amc_transient_raw",
    "zf_amc",
    "neumann_raw",
    "zf_neumann",
]


@dataclass
class PrecodeResult:
    x: np.ndarray
    alpha: float
    diagnostics: dict = field(default_factory=dict)


def normalize(x_raw):
    """Scale each column to unit norm; returns (x, alpha)."""
    alpha = np.linalg.norm(x_raw, axis=0)
    if np.any(alpha <= 0) or not np.all(np.isfinite(alpha)):
        raise InvalidInputError("precoded vector has zero or non-finite norm")
    return x_raw / alpha, alpha


def _check(H, s):
    H = as_complex_matrix(H, "H")
    s = np.asarray(s, dtype=complex)
    if s.shape[0] != H.shape[0]:
        raise InvalidInputError(f"s has {s.shape[0]} rows, H has {H.shape[0]} users")
    if not np.all(np.isfinite(s)):
        raise InvalidInputError("s contains NaN or Inf")
    return H, s


def digital_raw(H, S):
    """Unnormalized ``H^H Z^-1 S`` through the expanded real system."""
    H, S = _check(H, S)
    y = collapse_vector(solve_dense(expand_matrix(gram(H)), expand_vector(S)))
    return H.conj().T @ y


def zf_digital(H, s):
    x_raw = digital_raw(H, np.asarray(s, dtype=complex).ravel())
    x, alpha = normalize(x_raw)
    return PrecodeResult(x=x, alpha=float(alpha))


def program_amc(H, device=DeviceModel(), rng_inv=None, rng_mvm=None):
    """Program both crossbars for channel ``H``; returns (inv, mvm) programs."""
    H = as_complex_matrix(H, "H")
    if rng_mvm is None:
        rng_mvm = rng_inv
    p_inv = map_inv(gram(H), H.shape[1], device, rng_inv)
    p_mvm = map_mvm(H, device, rng_mvm)
    return p_inv, p_mvm


def amc_raw(p_inv, p_mvm, S, oa=OAModel(), strict=False, hold_ns=0.0, droop_v_per_ns=0.0):
    """
    Static AMC pipeline for one symbol vector or a K x N batch.

    Returns the unnormalized complex transmit vector(s) and a diagnostics
    dict with saturation flags and peak node voltages.
    """
    S = np.asarray(S, dtype=complex)
    s_exp = expand_vector(S)
    with warnings.catch_warnings(record=True) as inv_warn:
        warnings.simplefilter("always", SaturationWarning)
        y = inv_static(p_inv, s_exp, oa, strict=strict)
    y_held = sample_hold(y, hold_ns, droop_v_per_ns)
    with warnings.catch_warnings(record=True) as mvm_warn:
        warnings.simplefilter("always", SaturationWarning)
        x = mvm_compute(p_mvm, y_held, oa, strict=strict)
    diag = {
        "inv_saturated": bool(inv_warn),
        "mvm_saturated": bool(mvm_warn),
        "v_dac_max": float(np.abs(p_inv.input_scale * s_exp).max()),
        "v_inv_max": float(np.abs(y).max()),
        "v_mvm_max": float(np.abs(x).max()),
    }
    return collapse_vector(x), diag


def amc_transient_raw(p_inv, p_mvm, s, oa=OAModel(), dt_ns=0.01, t_end_ns=10.0,
                      settle_tol_v=1e-3, strict=False, hold_ns=0.0, droop_v_per_ns=0.0):
    """
    AMC pipeline for one vector with the INV stage integrated in time.

    The S&H samples the INV outputs at the end of the window, whatever
    their state; the MVM stage is evaluated at its operating point.
    """
    s_exp = expand_vector(np.asarray(s, dtype=complex).ravel())
    with warnings.catch_warnings(record=True) as inv_warn:
        warnings.simplefilter("always", SaturationWarning)
        tr = inv_transient(p_inv, s_exp, oa, dt_ns, t_end_ns, settle_tol_v, strict=strict)
    y_held = sample_hold(tr.final, hold_ns, droop_v_per_ns)
    with warnings.catch_warnings(record=True) as mvm_warn:
        warnings.simplefilter("always", SaturationWarning)
        x = mvm_compute(p_mvm, y_held, oa, strict=strict)
    diag = {
        "inv_saturated": bool(inv_warn),
        "mvm_saturated": bool(mvm_warn),
        "inv_settled_ns": tr.settled_at,
        "v_dac_max": float(np.abs(p_inv.input_scale * s_exp).max()),
        "v_inv_max": float(np.abs(tr.node_voltages).max()),
        "v_mvm_max": float(np.abs(x).max()),
    }
    return collapse_vector(x), diag


def zf_amc(H, s, device=DeviceModel(), oa=OAModel(), mode="static", rng=None,
           dt_ns=0.01, t_end_ns=10.0, settle_tol_v=1e-3, hold_ns=0.0,
           droop_v_per_ns=0.0, strict=False):
    """
    Precode one symbol vector with the analog INV + MVM pipeline.

    ``mode="transient"`` replaces the static INV operating point with the
    state reached at the end of the INV window; the MVM stays static.
    ``alpha`` comes from the circuit's own output.
    """
    H, s = _check(H, np.asarray(s, dtype=complex).ravel())
    if mode not in ("static", "transient"):
        raise InvalidInputError(f"mode must be 'static' or 'transient', got {mode!r}")
    p_inv, p_mvm = program_amc(H, device, rng)
    diag = {"clip_count_inv": p_inv.clip_count, "clip_count_mvm": p_mvm.clip_count}
    if mode == "static":
        x_raw, d = amc_raw(p_inv, p_mvm, s, oa, strict, hold_ns, droop_v_per_ns)
        diag.update(d)
    else:
        x_raw, d = amc_transient_raw(p_inv, p_mvm, s, oa, dt_ns, t_end_ns, settle_tol_v,
                                     strict, hold_ns, droop_v_per_ns)
        diag.update(d)
    x, alpha = normalize(x_raw)
    return PrecodeResult(x=x, alpha=float(alpha), diagnostics=diag)


def neumann_raw(H, S, n_terms):
    """
    ``H^H`` times the truncated Neumann series for ``Z^-1 S``.

    The series ``sum_k (I - D^-1 Z)^k D^-1 S`` with ``D = diag(Z)`` is
    tracked in the ``D^1/2``-weighted norm, in which every term of a
    convergent series is no larger than the one before; any growth means
    the spectral radius exceeds one.
    """
    H, S = _check(H, S)
    if n_terms < 1:
        raise InvalidInputError("n_terms must be >= 1")
    Z = gram(H)
    d = np.diag(Z).real
    T = np.eye(Z.shape[0]) - Z / d[:, None]
    sqrt_d = np.sqrt(d)
    sqrt_d = sqrt_d[:, None] if S.ndim == 2 else sqrt_d
    term = S / (d[:, None] if S.ndim == 2 else d)
    total = term.copy()
    prev = np.linalg.norm(sqrt_d * term)
    for _ in range(1, n_terms):
        term = T @ term
        size = np.linalg.norm(sqrt_d * term)
        if not np.isfinite(size) or size > prev * (1 + 1e-12):
            raise DivergenceError("Neumann series terms are growing")
        prev = size
        total = total + term
    return H.conj().T @ total


def zf_neumann(H, s, n_terms):
    x_raw = neumann_raw(H, np.asarray(s, dtype=complex).ravel(), n_terms)
    x, alpha = normalize(x_raw)
    return PrecodeResult(x=x, alpha=float(alpha), diagnostics={"n_terms": n_terms})
