"""
How fast does the INV circuit settle, and why?

Settling time is set by the slowest mode of the circuit, i.e. by the
smallest eigenvalue of its rate matrix. Varying the array size spreads that
eigenvalue, and the settling times follow 1/lambda_min.
"""

import warnings

import numpy as np

from amc_mimo.channel import sample_channel
from amc_mimo.circuits import OAModel, inv_rate_matrix, inv_transient
from amc_mimo.crossbar import DeviceModel, map_inv
from amc_mimo.errors import SaturationWarning
from amc_mimo.modem import qam16_modulate
from amc_mimo.numerics import expand_vector, gram, min_eigenvalue_sym
from amc_mimo.streams import stream

warnings.simplefilter("ignore", SaturationWarning)
oa = OAModel()
print(f"{'M':>4} {'1/lambda_min (ns)':>18} {'settled (ns)':>13}")
for M in (48, 64, 128, 256):
    H = sample_channel(16, M, stream(7, "channel", M))
    s = qam16_modulate(stream(7, "bits", M).integers(0, 2, 64))
    p = map_inv(gram(H), M, DeviceModel(), stream(7, "device", M))
    tr = inv_transient(p, expand_vector(s), oa, dt_ns=0.01, t_end_ns=150.0, record_every=1000)
    lam = min_eigenvalue_sym(inv_rate_matrix(p))
    print(f"{M:4d} {1 / lam:18.3f} {tr.settled_at:13.2f}")
