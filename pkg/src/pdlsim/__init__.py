"""Simulation of polarization-dependent loss and its heralded compensation.

Single-photon polarization qubits are propagated through PDL and one of
three correction schemes (passive attenuation, noiseless attenuation,
noiseless amplification) in a truncated Fock-space density-matrix
simulator, with ideal or dark-count-limited detectors.
"""

from .detectors import IDEAL, DetectorSpec, imperfect_detect, nu_from_dark_count
from .errors import (
    CutoffExceeded,
    DegenerateState,
    DivergentThermalMean,
    InvalidParameter,
    InvalidState,
    ModeExists,
    UnknownMode,
    ZeroProbabilityEvent,
)
from .fock import DensityOperator, ModeRegistry, PolarizationQubit, make_state
from .metrics import fidelity, pdl_db, t_h_from_db
from .schemes import (
    SCHEMES,
    SchemeConfig,
    SchemeResult,
    choose_T_amplifier,
    choose_T_attenuation,
    run_noiseless_amplification,
    run_noiseless_attenuation,
    run_passive_attenuation,
    run_scheme,
    run_uncorrected,
)

__version__ = "0.1.0"
