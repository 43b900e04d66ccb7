"""
Bit-error rate of digital and analog ZF precoding over SNR.

A short sweep (10^4 symbol vectors per point) so the demo runs in seconds;
the acceptance suite runs 10^6.
"""

from amc_mimo.config import parse_config
from amc_mimo.linksim import ber_sweep

cfg = parse_config(overrides={"sweep": {"max_symbols": 10_000, "min_symbols": 10_000}})
points = ber_sweep(cfg, [20.0, 25.0, 30.0, 35.0], ["digital", "amc"])
for p in points:
    print(f"{p.scheme:8s} {p.snr_db:5.1f} dB  BER {p.ber:.2e}  [{p.ci_low:.1e}, {p.ci_high:.1e}]")
