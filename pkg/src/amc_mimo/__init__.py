"""
Simulation of RRAM-crossbar analog matrix computing (AMC) for zero-forcing
precoding in massive MIMO downlinks.

The package models the INV feedback circuit that solves ``Z y = s`` with
``Z = H H^H``, the MVM stage that forms ``x = H^H y``, device quantization
and programming noise, amplifier dynamics, a Monte Carlo link simulator and
a cost model. See ``amc-mimo --help`` for the command-line front end.
"""

from .channel import LinkConfig, noise_sigma2, sample_channel, transmit
from .circuits import (
    OAModel,
    inv_static,
    inv_transient,
    mvm_compute,
    mvm_transient,
    pipeline_transient,
    sample_hold,
)
from .config import SimConfig, parse_config
from .costmodel import PowerBudget, complexity_table, latency_report, power_report
from .crossbar import DeviceModel, map_inv, map_mvm, mapping_stats, quantize, readback
from .errors import (
    CircuitFault,
    CircuitSingularError,
    ConfigError,
    DivergenceError,
    InvalidInputError,
    SaturationWarning,
    SingularMatrixError,
)
from .linksim import ber_sweep, constellation_dump, run_trial
from .modem import ModemConfig, qam16_demodulate, qam16_modulate
from .numerics import collapse_vector, expand_matrix, expand_vector, gram, min_eigenvalue_sym
from .precoder import zf_amc, zf_digital, zf_neumann
from .streams import stream

__version__ = "0.1.0"
