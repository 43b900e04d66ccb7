"""
An ideal crossbar solves ZF exactly; a real one pays for 4-bit devices.

Precodes one 16 x 128 instance three ways and prints the relative error
against digital ZF: ideal devices and OAs, real devices with ideal OAs,
and the full non-ideal circuit.
"""

import numpy as np

from amc_mimo import DeviceModel, OAModel, zf_amc, zf_digital
from amc_mimo.channel import sample_channel
from amc_mimo.modem import qam16_modulate
from amc_mimo.streams import stream

K, M = 16, 128
H = sample_channel(K, M, stream(1, "channel"))
s = qam16_modulate(stream(1, "bits").integers(0, 2, 4 * K))
ref = zf_digital(H, s).x

cases = {
    "ideal devices, ideal OAs": (DeviceModel.ideal(), OAModel.ideal()),
    "4-bit devices, ideal OAs": (DeviceModel(), OAModel.ideal()),
    "4-bit devices, 50.5 dB OAs": (DeviceModel(), OAModel()),
}
for name, (dev, oa) in cases.items():
    x = zf_amc(H, s, dev, oa, rng=stream(1, "device")).x
    print(f"{name:28s} rel. error {np.linalg.norm(x - ref) / np.linalg.norm(ref):.2e}")
