"""binplanar — binomial rotation codes concatenated with a planar surface code.

Monte Carlo tools for teleportation-based gates on rotation-symmetric bosonic
qubits under photon loss: phase-measurement POVMs, quantum-trajectory noise,
state-inference strategies, 1D repeater chains, and the 2D cluster-state
lattice with matching-based decoding.
"""

__version__ = "0.1.0"

from .chain import ChainConfig, run_chain
from .codes import Code
from .decoder import decode, hybrid_weights, mwpm, path_weight
from .harness import (RunConfig, estimate_threshold, fit_alpha, parse_config,
                      run_sweep)
from .lattice import Lattice, ShotContext, build_lattice, extract_syndrome, run_shot
from .loss import NoiseParams, error_operator, sample_emission_times
from .povm import build_povm, measurement_error_rate, phase_series, sample_phase
from .qsi import QsiTables, bin_phase, get_tables, local_ml_likelihood, ml_qsi_2q

__all__ = [
    "__version__", "Code", "NoiseParams", "ChainConfig", "RunConfig",
    "Lattice", "ShotContext", "QsiTables",
    "build_povm", "build_lattice", "phase_series", "sample_phase",
    "measurement_error_rate", "sample_emission_times", "error_operator",
    "bin_phase", "get_tables", "local_ml_likelihood", "ml_qsi_2q",
    "run_chain", "run_shot", "extract_syndrome", "decode", "mwpm",
    "path_weight", "hybrid_weights", "estimate_threshold", "fit_alpha",
    "parse_config", "run_sweep",
]
