"""Rayleigh channel sampling and the noisy downlink y = sqrt(rho_T) H x + n."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .numerics import as_complex_matrix

__all__ = ["LinkConfig", "sample_channel", "noise_sigma2", "complex_normal", "transmit"]


def noise_sigma2(snr_db, M, rho_T=1.0):
    """Noise variance for ``SNR = 10 log10(M rho_T / sigma^2)``."""
    if not (np.isfinite(snr_db) and np.isfinite(M) and np.isfinite(rho_T)):
        raise InvalidInputError("snr_db, M and rho_T must be finite")
    if rho_T <= 0:
        raise InvalidInputError(f"rho_T must be positive, got {rho_T}")
    return M * rho_T * 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class LinkConfig:
    K: int
    M: int
    rho_T: float = 1.0
    snr_db: float = 30.0
    sigma2: float = field(default=None)

    def __post_init__(self):
        if not (1 <= self.K <= self.M):
            raise InvalidInputError(f"need M >= K >= 1, got K={self.K}, M={self.M}")
        if self.rho_T <= 0:
            raise InvalidInputError(f"rho_T must be positive, got {self.rho_T}")
        expected = noise_sigma2(self.snr_db, self.M, self.rho_T)
        if self.sigma2 is None:
            object.__setattr__(self, "sigma2", expected)
        elif not np.isclose(self.sigma2, expected, rtol=1e-12, atol=0.0):
            raise InvalidInputError(
                f"sigma2={self.sigma2} inconsistent with snr_db={self.snr_db} (expected {expected})"
            )
        if self.sigma2 <= 0:
            raise InvalidInputError("sigma2 must be positive")


def complex_normal(rng, shape, variance=1.0):
    """i.i.d. CN(0, variance) samples."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_channel(K, M, rng):
    """K x M matrix of i.i.d. CN(0, 1) gains."""
    if not (1 <= K <= M):
        raise InvalidInputError(f"need M >= K >= 1, got K={K}, M={M}")
    return complex_normal(rng, (K, M))


def transmit(H, x, cfg, rng=None, sigma2=None, noise=None):
    """
    Send precoded vector(s) ``x`` (M, or M x N) through ``H``.

    Noise is drawn from ``rng`` unless an explicit ``noise`` block is
    supplied. ``sigma2`` overrides ``cfg.sigma2``; pass 0 for a noiseless link.
    """
    H = as_complex_matrix(H, "H")
    x = np.asarray(x, dtype=complex)
    if x.shape[0] != H.shape[1]:
        raise InvalidInputError(f"x has {x.shape[0]} rows, H has {H.shape[1]} columns")
    y = np.sqrt(cfg.rho_T) * (H @ x)
    if noise is None:
        var = cfg.sigma2 if sigma2 is None else sigma2
        if var < 0:
            raise InvalidInputError("noise variance must be non-negative")
        if var == 0:
            return y
        if rng is None:
            raise InvalidInputError("rng required for a noisy link")
        noise = complex_normal(rng, y.shape, var)
    elif np.shape(noise) != y.shape:
        raise InvalidInputError(f"noise shape {np.shape(noise)} != {y.shape}")
    return y + noise
