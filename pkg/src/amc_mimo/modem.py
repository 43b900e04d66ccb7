"""16-QAM Gray mapping and bit-error accounting."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "ModemConfig",
    "GRAY_AMPLITUDE",
    "qam16_modulate",
    "qam16_demodulate",
    "qam16_points",
    "bit_error_rate",
]

# per-axis 2-bit Gray table, index = 2*b0 + b1
GRAY_AMPLITUDE = np.array([-3.0, -1.0, 3.0, 1.0])
# amplitude index (-3, -1, 1, 3) -> (b0, b1)
_AMPLITUDE_BITS = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=np.uint8)
_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0])


@dataclass(frozen=True)
class ModemConfig:
    beta: float = 1.0 / np.sqrt(10.0)

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise InvalidInputError(f"beta must be positive, got {self.beta}")


def _as_bits(bits):
    b = np.asarray(bits)
    if b.ndim == 0:
        raise InvalidInputError("bits must be a sequence")
    if np.any((b != 0) & (b != 1)):
        raise InvalidInputError("bits must be 0 or 1")
    return b.astype(np.uint8)


def qam16_modulate(bits, cfg=ModemConfig()):
    """
    Map 4K bits to K complex symbols ``beta * (r + j t)``.

    Bits ``(4i, 4i+1)`` pick the in-phase amplitude and ``(4i+2, 4i+3)`` the
    quadrature one. A 2-D input of shape (4K, N) maps each column
    independently and returns a (K, N) array.
    """
    b = _as_bits(bits)
    if b.shape[0] % 4 or b.shape[0] == 0:
        raise InvalidInputError(f"bit count must be a positive multiple of 4, got {b.shape[0]}")
    groups = b.reshape((-1, 4) + b.shape[1:])
    r = GRAY_AMPLITUDE[2 * groups[:, 0] + groups[:, 1]]
    t = GRAY_AMPLITUDE[2 * groups[:, 2] + groups[:, 3]]
    return cfg.beta * (r + 1j * t)


def _slice_axis(x):
    # thresholds at -2, 0, +2; ties at +-2 go to the amplitude of smaller
    # magnitude, the tie at 0 goes to -1
    idx = np.full(x.shape, 1, dtype=np.intp)
    idx[x < -2.0] = 0
    idx[(x > 0.0) & (x <= 2.0)] = 2
    idx[x > 2.0] = 3
    return idx


def qam16_demodulate(y, cfg=ModemConfig()):
    """Hard nearest-point decisions, inverted through the Gray table."""
    y = np.asarray(y, dtype=complex)
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("received symbols contain NaN or Inf")
    u = y / cfg.beta
    ri = _slice_axis(u.real)
    ti = _slice_axis(u.imag)
    rb = _AMPLITUDE_BITS[ri]
    tb = _AMPLITUDE_BITS[ti]
    # (..., 2) + (..., 2) -> (K, 4, ...)
    out = np.concatenate([rb, tb], axis=-1)
    out = np.moveaxis(out, -1, 1)
    return out.reshape((-1,) + out.shape[2:])


def qam16_points(cfg=ModemConfig()):
    """All 16 constellation points."""
    r, t = np.meshgrid(_LEVELS, _LEVELS, indexing="ij")
    return (cfg.beta * (r + 1j * t)).ravel()


def bit_error_rate(tx, rx):
    tx = _as_bits(tx)
    rx = _as_bits(rx)
    if tx.shape != rx.shape:
        raise InvalidInputError(f"length mismatch: {tx.shape} vs {rx.shape}")
    if tx.size == 0:
        raise InvalidInputError("empty bit sequences")
    return float(np.count_nonzero(tx != rx)) / tx.size
