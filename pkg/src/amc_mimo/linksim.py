"""
Monte Carlo link simulation: BER-vs-SNR sweeps and constellation clouds.

Work is organized in blocks. In reuse-H mode a block is one channel
realization (crossbars programmed once) carrying ``vectors_per_h`` symbol
vectors; otherwise every vector in the block gets its own channel and its
own programming. All randomness of block ``b`` comes from streams keyed by
``(master_seed, purpose, b, ...)``, and the stopping rule is evaluated in
block order. Results therefore do not depend on the worker count.

The same channel, bits and unit-variance noise are used for every scheme
and SNR of a block, so scheme comparisons are paired.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import complex_normal, noise_sigma2, sample_channel
from .errors import CircuitFault, InvalidInputError
from .modem import qam16_demodulate, qam16_modulate
from .precoder import (
    amc_raw,
    amc_transient_raw,
    digital_raw,
    neumann_raw,
    normalize,
    program_amc,
)
from .streams import stream

__all__ = [
    "TrialRecord",
    "BerPoint",
    "BlockResult",
    "wilson_interval",
    "run_block",
    "run_trial",
    "ber_sweep",
    "constellation_dump",
    "BLOCKS_PER_ROUND",
]

SCHEMES = ("digital", "amc", "neumann")
# blocks evaluated between stopping-rule checks; fixed so that the worker
# count never changes which blocks are run
BLOCKS_PER_ROUND = 8


@dataclass
class TrialRecord:
    trial: int
    bits_tx: np.ndarray
    bits_rx: np.ndarray
    received: np.ndarray
    ideal: np.ndarray
    scheme: str

    @property
    def bit_errors(self):
        return int(np.count_nonzero(self.bits_tx != self.bits_rx))


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    scheme: str
    symbols: int
    bit_errors: int
    ber: float
    ci_low: float
    ci_high: float
    excluded: int = 0


@dataclass
class BlockResult:
    """Outcome of one block at one SNR."""

    block: int
    snr_db: float
    symbols: int
    bit_errors: int
    excluded: int
    bits_tx: np.ndarray = None
    bits_rx: np.ndarray = None
    received: np.ndarray = None
    ideal: np.ndarray = None


def wilson_interval(errors, n, z=1.959963984540054):
    """
    95 % Wilson score interval for a binomial proportion.

    With zero errors the interval is one-sided: [0, z1^2 / (n + z1^2)] with
    the one-sided 95 % quantile z1 = 1.645. ``z`` defaults to the two-sided
    95 % normal quantile.
    """
    if n <= 0:
        return 0.0, 1.0
    if errors == 0:
        z1 = 1.6448536269514722
        return 0.0, z1 * z1 / (n + z1 * z1)
    p = errors / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _sigma2(snr_db, M, rho_T):
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return noise_sigma2(snr_db, M, rho_T)


def _precode(cfg, scheme, H, S, seed, key):
    """Unnormalized transmit block for one channel; ``key`` picks device streams."""
    if scheme == "digital":
        return digital_raw(H, S)
    if scheme == "neumann":
        return neumann_raw(H, S, cfg.sweep.neumann_terms)
    if scheme != "amc":
        raise InvalidInputError(f"unknown scheme {scheme!r}")
    device = cfg.device_model()
    oa = cfg.oa_model()
    sol = cfg.solver
    rng_inv = stream(seed, "device-inv", *key)
    rng_mvm = stream(seed, "device-mvm", *key)
    p_inv, p_mvm = program_amc(H, device, rng_inv, rng_mvm)
    if sol.mode == "static":
        x, _ = amc_raw(p_inv, p_mvm, S, oa, strict=sol.strict, hold_ns=sol.t_end_ns,
                       droop_v_per_ns=sol.droop_v_per_ns)
        return x
    # transient: integrate every vector on the same programmed arrays
    cols = [
        amc_transient_raw(p_inv, p_mvm, S[:, j], oa, sol.dt_ps * 1e-3, sol.t_end_ns,
                          sol.settle_tol_mv * 1e-3, sol.strict, sol.t_end_ns,
                          sol.droop_v_per_ns)[0]
        for j in range(S.shape[1])
    ]
    return np.stack(cols, axis=1)


def _block_channels(cfg, block):
    """Yield (key, H, S-bits) for each channel realization of a block."""
    K, M = cfg.dimensions.K, cfg.dimensions.M
    seed = cfg.master_seed
    V = cfg.sweep.vectors_per_h
    if cfg.sweep.reuse_h:
        H = sample_channel(K, M, stream(seed, "channel", block))
        bits = stream(seed, "bits", block).integers(0, 2, size=(4 * K, V), dtype=np.uint8)
        yield (block,), H, bits
    else:
        for j in range(V):
            H = sample_channel(K, M, stream(seed, "channel", block, j))
            bits = stream(seed, "bits", block, j).integers(0, 2, size=(4 * K, 1), dtype=np.uint8)
            yield (block, j), H, bits


def run_block(cfg, scheme, block, snr_list, keep=False):
    """
    Simulate one block for every SNR in ``snr_list``.

    Returns one :class:`BlockResult` per SNR. With ``keep=True`` the bits
    and received symbols are attached so per-trial records can be built.
    """
    K, M = cfg.dimensions.K, cfg.dimensions.M
    seed = cfg.master_seed
    rho = cfg.link.rho_T
    modem = cfg.modem_config()
    V = cfg.sweep.vectors_per_h

    tx_bits, rx_parts, n_excluded = [], {snr: [] for snr in snr_list}, 0
    ideal, received = [], {snr: [] for snr in snr_list}
    excluded_mask = []
    for key, H, bits in _block_channels(cfg, block):
        S = qam16_modulate(bits, modem)
        noise = complex_normal(stream(seed, "noise", *key), (K, bits.shape[1]))
        try:
            X, alpha = normalize(_precode(cfg, scheme, H, S, seed, key))
        except CircuitFault:
            n_excluded += bits.shape[1]
            excluded_mask.append(np.ones(bits.shape[1], dtype=bool))
            tx_bits.append(bits)
            ideal.append(S)
            for snr in snr_list:
                rx_parts[snr].append(bits.copy())
                received[snr].append(np.full(S.shape, np.nan + 0j))
            continue
        excluded_mask.append(np.zeros(bits.shape[1], dtype=bool))
        clean = np.sqrt(rho) * (H @ X)
        tx_bits.append(bits)
        ideal.append(S)
        for snr in snr_list:
            y = clean + np.sqrt(_sigma2(snr, M, rho)) * noise
            s_hat = alpha * y / np.sqrt(rho)
            rx_parts[snr].append(qam16_demodulate(s_hat, modem))
            received[snr].append(s_hat)

    bits_tx = np.concatenate(tx_bits, axis=1)
    keep_cols = ~np.concatenate(excluded_mask)
    out = []
    for snr in snr_list:
        bits_rx = np.concatenate(rx_parts[snr], axis=1)
        errors = int(np.count_nonzero(bits_tx[:, keep_cols] != bits_rx[:, keep_cols]))
        res = BlockResult(block, snr, int(keep_cols.sum()), errors, n_excluded)
        if keep:
            res.bits_tx = bits_tx
            res.bits_rx = bits_rx
            res.received = np.concatenate(received[snr], axis=1)
            res.ideal = np.concatenate(ideal, axis=1)
        out.append(res)
    assert all(r.symbols + r.excluded == V for r in out)
    return out


def block_records(cfg, scheme, block, snr_db):
    """Per-vector :class:`TrialRecord` objects of one block."""
    res = run_block(cfg, scheme, block, [snr_db], keep=True)[0]
    V = cfg.sweep.vectors_per_h
    return [
        TrialRecord(
            trial=block * V + j,
            bits_tx=res.bits_tx[:, j],
            bits_rx=res.bits_rx[:, j],
            received=res.received[:, j],
            ideal=res.ideal[:, j],
            scheme=scheme,
        )
        for j in range(V)
    ]


def run_trial(cfg, scheme, trial, snr_db):
    """Record of a single symbol vector; trial ``t`` lives in block ``t // vectors_per_h``."""
    V = cfg.sweep.vectors_per_h
    return block_records(cfg, scheme, trial // V, snr_db)[trial % V]


def _block_task(args):
    cfg, scheme, block, snrs = args
    return run_block(cfg, scheme, block, snrs)


def _done(acc, sweep):
    symbols, errors, excluded = acc
    # excluded vectors were simulated too; counting them keeps a run in
    # which every vector faults from looping forever
    if symbols + excluded >= sweep.max_symbols:
        return True
    return errors >= sweep.min_errors and symbols >= sweep.min_symbols


def ber_sweep(cfg, snr_list=None, schemes=None, workers=1, return_blocks=False):
    """
    BER for every (SNR, scheme) pair.

    Each pair accumulates whole blocks until it has ``min_errors`` bit
    errors and at least ``min_symbols`` symbol vectors, or until
    ``max_symbols`` vectors have been simulated (vectors excluded after a
    strict-mode circuit fault count toward this cap, not toward the BER).
    """
    snr_list = list(cfg.link.snr_db if snr_list is None else snr_list)
    schemes = list(cfg.sweep.schemes if schemes is None else schemes)
    if not snr_list:
        raise InvalidInputError("snr_list must not be empty")
    sweep = cfg.sweep
    K = cfg.dimensions.K
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    points, blocks_used = [], {}
    try:
        for scheme in schemes:
            acc = {snr: [0, 0, 0] for snr in snr_list}
            used = {snr: [] for snr in snr_list}
            active = list(snr_list)
            next_block = 0
            while active:
                tasks = [(cfg, scheme, b, tuple(active))
                         for b in range(next_block, next_block + BLOCKS_PER_ROUND)]
                next_block += BLOCKS_PER_ROUND
                results = pool.map(_block_task, tasks) if pool else map(_block_task, tasks)
                for block_res in results:
                    for r in block_res:
                        if r.snr_db not in active or _done(acc[r.snr_db], sweep):
                            continue
                        acc[r.snr_db][0] += r.symbols
                        acc[r.snr_db][1] += r.bit_errors
                        acc[r.snr_db][2] += r.excluded
                        used[r.snr_db].append(r)
                active = [snr for snr in active if not _done(acc[snr], sweep)]
            for snr in snr_list:
                symbols, errors, excluded = acc[snr]
                n_bits = 4 * K * symbols
                ber = errors / n_bits if n_bits else 0.0
                lo, hi = wilson_interval(errors, n_bits)
                points.append(BerPoint(float(snr), scheme, symbols, errors, ber, lo, hi, excluded))
                blocks_used[(scheme, snr)] = used[snr]
    finally:
        if pool:
            pool.shutdown()
    return (points, blocks_used) if return_blocks else points


def constellation_dump(cfg, scheme, n_trials, snr_db=None):
    """
    Received-vs-ideal symbol cloud, one fresh channel per trial.

    Returns rows ``(trial, user, re_ideal, im_ideal, re_rx, im_rx)``.
    """
    if n_trials < 1:
        raise InvalidInputError("n_trials must be >= 1")
    snr = cfg.sweep.constellation_snr_db if snr_db is None else snr_db
    # every trial redraws H
    view = replace(cfg, sweep=replace(cfg.sweep, reuse_h=False))
    V = view.sweep.vectors_per_h
    rows = []
    block = 0
    while len(rows) < n_trials * cfg.dimensions.K:
        res = run_block(view, scheme, block, [snr], keep=True)[0]
        for j in range(V):
            t = block * V + j
            if t >= n_trials:
                break
            for k in range(cfg.dimensions.K):
                ideal = res.ideal[k, j]
                rx = res.received[k, j]
                rows.append((t, k, float(ideal.real), float(ideal.imag), float(rx.real), float(rx.imag)))
        block += 1
    return rows
