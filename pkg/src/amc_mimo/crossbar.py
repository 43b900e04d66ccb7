"""
RRAM device model and the mapping of Gram/channel matrices onto pairs of
non-negative conductance arrays.

Conductances are in microsiemens throughout. A matrix entry of one "unit"
is stored as ``g_unit`` uS, with ``g_unit = g_max / 0.5`` so that the
scaled entries, which stay inside +-0.5, use the whole device window.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .numerics import as_complex_matrix, expand_matrix

__all__ = [
    "DeviceModel",
    "CrossbarProgram",
    "MappingStats",
    "inv_scale",
    "mvm_scale",
    "input_scale",
    "split_signed",
    "quantize",
    "program",
    "map_inv",
    "map_mvm",
    "readback",
    "mapping_stats",
    "DIAGONAL_SHIFT",
]

# constant removed from the scaled Gram diagonal and restored by fixed resistors
DIAGONAL_SHIFT = 2.0
# scaled matrix entries are designed to fall inside +-FULL_SCALE
FULL_SCALE = 0.5


def inv_scale(M):
    """Gram matrix scale 2/M; equals 1/64 for 128 antennas."""
    return 2.0 / M


def mvm_scale(M):
    """Channel scale sqrt(2/M); equals 1/8 for 128 antennas."""
    return float(np.sqrt(2.0 / M))


def input_scale(M):
    """Symbol scale for the INV inputs, matched so the MVM output is unscaled."""
    return float(np.sqrt(2.0 / M))


@dataclass(frozen=True)
class DeviceModel:
    """4-bit RRAM cell: one deep HRS plus uniformly spaced analog levels."""

    g_hrs: float = 0.1
    g_levels: tuple = tuple(np.linspace(2.0, 30.0, 15))
    sigma_prog: float = 0.15
    quantization_enabled: bool = True
    # clamp targets to the top level; an ideal device has an unbounded window
    clipping: bool = True

    def __post_init__(self):
        levels = np.asarray(self.g_levels, dtype=float)
        object.__setattr__(self, "g_levels", tuple(float(g) for g in levels))
        if levels.size == 0 or np.any(np.diff(levels) <= 0):
            raise InvalidInputError("g_levels must be non-empty and strictly increasing")
        if not (0 < self.g_hrs < levels[0]):
            raise InvalidInputError("need 0 < g_hrs < lowest level")
        if not (self.sigma_prog >= 0):
            raise InvalidInputError(f"sigma_prog must be >= 0, got {self.sigma_prog}")

    @classmethod
    def from_range(cls, level_min=2.0, level_max=30.0, level_count=15, **kw):
        return cls(g_levels=tuple(np.linspace(level_min, level_max, level_count)), **kw)

    @classmethod
    def ideal(cls, **kw):
        """Continuous, noiseless, unbounded device (same conductance unit)."""
        kw.setdefault("sigma_prog", 0.0)
        kw.setdefault("quantization_enabled", False)
        kw.setdefault("clipping", False)
        return cls(**kw)

    @property
    def g_max(self):
        return self.g_levels[-1]

    @property
    def g_unit(self):
        return self.g_max / FULL_SCALE

    @property
    def states(self):
        return np.concatenate([[self.g_hrs], self.g_levels])

    @property
    def level_spacing(self):
        levels = np.asarray(self.g_levels)
        return float(np.max(np.diff(levels))) if levels.size > 1 else 0.0


@dataclass(frozen=True)
class CrossbarProgram:
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray
    g_unit: float
    scale: float
    role: str
    clip_count: int = 0
    input_scale: float = None
    device: DeviceModel = field(default=None, repr=False)

    def __post_init__(self):
        if self.role not in ("INV", "MVM"):
            raise InvalidInputError(f"role must be INV or MVM, got {self.role!r}")
        if self.a.shape != self.b.shape:
            raise InvalidInputError("a and b must have the same shape")
        if np.any(self.a < 0) or np.any(self.b < 0) or np.any(self.d < 0):
            raise InvalidInputError("conductances must be non-negative")
        if self.role == "INV":
            n = self.a.shape[0]
            if self.a.shape != (n, n) or self.d.shape != (n,):
                raise InvalidInputError("INV program must be square with a diagonal of matching length")
        for arr in (self.a, self.b, self.d):
            arr.setflags(write=False)


def split_signed(r):
    """Return (positive part, negative part), both >= 0, with pos - neg = r."""
    r = np.asarray(r, dtype=float)
    return np.maximum(r, 0.0), np.maximum(-r, 0.0)


def quantize(g_target, dev):
    """Nearest programmable state; targets above the top level saturate."""
    g = np.asarray(g_target, dtype=float)
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise InvalidInputError("conductance targets must be finite and >= 0")
    states = dev.states
    # nearest neighbour via the midpoints between consecutive states;
    # a target exactly on a midpoint goes to the lower state
    mids = 0.5 * (states[1:] + states[:-1])
    out = states[np.searchsorted(mids, g, side="left")]
    return out if out.ndim else float(out)


def program(targets, dev, rng=None):
    """Write targets into devices: optional quantization plus Gaussian error."""
    t = np.asarray(targets, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise InvalidInputError("conductance targets must be finite and >= 0")
    g = quantize(t, dev) if dev.quantization_enabled else t.copy()
    g = np.asarray(g, dtype=float)
    if dev.sigma_prog > 0:
        if rng is None:
            raise InvalidInputError("rng required when sigma_prog > 0")
        g = g + rng.normal(0.0, dev.sigma_prog, size=g.shape)
    return np.maximum(g, 0.0)


def _clip(targets, dev):
    if not dev.clipping:
        return targets, 0
    over = targets > dev.g_max * (1 + 1e-12)
    return np.minimum(targets, dev.g_max), int(np.count_nonzero(over))


def _check_gram(Z):
    Z = as_complex_matrix(Z, "Z")
    K = Z.shape[0]
    if Z.shape != (K, K):
        raise InvalidInputError(f"Z must be square, got {Z.shape}")
    scale = max(np.abs(Z).max(), 1.0)
    if np.abs(Z - Z.conj().T).max() > 1e-9 * scale:
        raise InvalidInputError("Z is not Hermitian")
    if np.any(np.diag(Z).real <= 0):
        raise InvalidInputError("Z must have a positive real diagonal")
    return Z


def map_inv(Z, M_ant, dev, rng=None):
    """
    Program the shifted Gram matrix for the INV circuit.

    ``expand(2/M * Z) - 2 I`` is split into A (positive part) and B
    (negative part) and written into RRAM; the removed ``2 I`` becomes
    ideal resistors of conductance ``2 g_unit`` on each row.
    """
    Z = _check_gram(Z)
    s_z = inv_scale(M_ant)
    n = 2 * Z.shape[0]
    shifted = expand_matrix(s_z * Z) - DIAGONAL_SHIFT * np.eye(n)
    pos, neg = split_signed(shifted)
    g_unit = dev.g_unit
    ta, ca = _clip(pos * g_unit, dev)
    tb, cb = _clip(neg * g_unit, dev)
    a = program(ta, dev, rng)
    b = program(tb, dev, rng)
    d = np.full(n, DIAGONAL_SHIFT * g_unit)
    return CrossbarProgram(a, b, d, g_unit, s_z, "INV", ca + cb, input_scale(M_ant), dev)


def map_mvm(H, dev, rng=None):
    """Program ``expand(sqrt(2/M) H)`` as an A - B pair for the MVM circuit."""
    H = as_complex_matrix(H, "H")
    s_h = mvm_scale(H.shape[1])
    pos, neg = split_signed(expand_matrix(s_h * H))
    g_unit = dev.g_unit
    ta, ca = _clip(pos * g_unit, dev)
    tb, cb = _clip(neg * g_unit, dev)
    a = program(ta, dev, rng)
    b = program(tb, dev, rng)
    return CrossbarProgram(a, b, np.zeros(0), g_unit, s_h, "MVM", ca + cb, None, dev)


def readback(p):
    """Effective matrix in scaled units, diagonal shift restored for INV."""
    m = (p.a - p.b) / p.g_unit
    if p.role == "INV":
        m = m + np.diag(p.d / p.g_unit)
    return m


@dataclass
class MappingStats:
    edges: np.ndarray
    counts: dict
    diag_preshift_mean: float
    offdiag_within_half: float
    n_matrices: int

    def rows(self):
        """(bin_low, bin_high, count, population) tuples."""
        out = []
        for pop, counts in self.counts.items():
            for lo, hi, c in zip(self.edges[:-1], self.edges[1:], counts):
                out.append((float(lo), float(hi), int(c), pop))
        return out


def mapping_stats(Z, M_ant, bin_width=0.02):
    """
    Histogram the scaled, expanded entries of one Gram matrix or a stack.

    Populations: ``diag_preshift`` (diagonal of ``expand(2/M Z)``),
    ``diag_postshift`` (same minus the shift) and ``offdiag`` (every other
    expanded entry).
    """
    Zs = np.asarray(Z, dtype=complex)
    if Zs.ndim == 2:
        Zs = Zs[None]
    if Zs.ndim != 3 or Zs.shape[1] != Zs.shape[2]:
        raise InvalidInputError(f"Z must be K x K or a stack of them, got {Zs.shape}")
    s_z = inv_scale(M_ant)
    n = 2 * Zs.shape[1]
    re, im = s_z * Zs.real, s_z * Zs.imag
    ex = np.concatenate(
        [np.concatenate([re, -im], axis=2), np.concatenate([im, re], axis=2)], axis=1
    )
    mask = np.eye(n, dtype=bool)
    diag = ex[:, mask].ravel()
    off = ex[:, ~mask].ravel()
    post = diag - DIAGONAL_SHIFT
    values = np.concatenate([diag, post, off])
    lo = np.floor(values.min() / bin_width) * bin_width
    hi = np.ceil(values.max() / bin_width) * bin_width
    if hi <= lo:
        hi = lo + bin_width
    edges = np.linspace(lo, hi, int(round((hi - lo) / bin_width)) + 1)
    counts = {
        "diag_preshift": np.histogram(diag, edges)[0],
        "diag_postshift": np.histogram(post, edges)[0],
        "offdiag": np.histogram(off, edges)[0],
    }
    return MappingStats(
        edges=edges,
        counts=counts,
        diag_preshift_mean=float(diag.mean()),
        offdiag_within_half=float(np.mean(np.abs(off) <= FULL_SCALE)),
        n_matrices=Zs.shape[0],
    )
