"""Photon-counting detectors: ideal projection and the thermal-mixing model.

An imperfect detector of efficiency ``eta`` is a beam splitter of
transmission ``eta`` that mixes the signal with a thermal mode of mean
``nu``, followed by an ideal number-resolving detector on the transmitted
signal port. The other port is discarded. ``nu`` is tied to the dark-count
probability per time step ``P_d`` so that a vacuum input clicks with
probability exactly ``P_d`` whatever ``eta`` is.

Because the beam splitter conserves photon number and the thermal state is
diagonal, the whole dilation collapses onto a number-diagonal measurement
effect ``E_n[j] = P(read n | j signal photons)``. :func:`imperfect_detect`
evaluates that effect exactly with a thermal cutoff sized to the requested
truncation tolerance; :func:`imperfect_detect_dilated` runs the literal
attach / mix / project / trace circuit on the joint state and is kept as an
independent route for cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DivergentThermalMean, InvalidParameter
from .fock import (
    DensityOperator,
    apply_two_mode_unitary,
    attach_mode,
    measure_mode,
    partial_trace,
    project_mode,
)
from .optics import (
    _fresh_label,
    beam_splitter_block,
    beam_splitter_unitary,
    thermal_cutoff,
    thermal_deficit,
    thermal_state,
    thermal_weights,
)

THERMAL_TOL = 1e-13


def nu_from_dark_count(dark_count: float, efficiency: float) -> float:
    """Thermal mean occupation giving dark-count probability ``dark_count`` per step."""
    pd, eta = float(dark_count), float(efficiency)
    if not 0.0 <= pd < 1.0:
        raise InvalidParameter(f"dark-count probability must lie in [0, 1), got {pd!r}")
    if not 0.0 <= eta <= 1.0:
        raise InvalidParameter(f"efficiency must lie in [0, 1], got {eta!r}")
    if pd == 0.0:
        return 0.0
    if eta == 1.0:
        raise DivergentThermalMean("unit efficiency with dark counts needs an infinite thermal mean")
    return pd / ((1.0 - pd) * (1.0 - eta))


@dataclass(frozen=True)
class DetectorSpec:
    """Efficiency and dark-count probability of a photon-counting detector."""

    efficiency: float
    dark_count: float = 0.0
    thermal_tol: float = THERMAL_TOL

    def __post_init__(self):
        # validates ranges and rejects eta = 1 with dark counts
        nu_from_dark_count(self.dark_count, self.efficiency)

    @property
    def nu(self) -> float:
        return nu_from_dark_count(self.dark_count, self.efficiency)

    @property
    def is_ideal(self) -> bool:
        return self.efficiency == 1.0 and self.dark_count == 0.0

    @property
    def thermal_cutoff(self) -> int:
        return thermal_cutoff(self.nu, self.thermal_tol, minimum=2)

    @property
    def thermal_deficit(self) -> float:
        return thermal_deficit(self.nu, self.thermal_cutoff)


IDEAL = DetectorSpec(1.0, 0.0)


def ideal_detect(state: DensityOperator, mode: str, outcome: int) -> tuple[DensityOperator, float]:
    """Projective photon counting: exactly :func:`pdlsim.fock.project_mode`."""
    return project_mode(state, mode, outcome)


@lru_cache(maxsize=256)
def _effect(spec: DetectorSpec, outcome: int, signal_cutoff: int) -> np.ndarray:
    effect = _compute_effect(spec, outcome, signal_cutoff)
    effect.setflags(write=False)
    return effect


def detection_effect(spec: DetectorSpec, outcome: int, signal_cutoff: int) -> np.ndarray:
    """``P(read outcome | j signal photons)`` for ``j < signal_cutoff``.

    Sums the exact beam-splitter amplitudes over thermal occupations up to the
    spec's thermal cutoff; the missing tail is :attr:`DetectorSpec.thermal_deficit`.
    """
    if outcome < 0:
        raise InvalidParameter("photon-number outcome must be non-negative")
    return _effect(spec, int(outcome), int(signal_cutoff)).copy()


def _compute_effect(spec: DetectorSpec, outcome: int, signal_cutoff: int) -> np.ndarray:
    eta = spec.efficiency
    p_thermal = thermal_weights(spec.nu, spec.thermal_cutoff)
    effect = np.zeros(signal_cutoff)
    for j in range(signal_cutoff):
        for b, pb in enumerate(p_thermal):
            total = j + b
            if pb == 0.0 or outcome > total:
                continue
            block = beam_splitter_block(eta, total)
            effect[j] += pb * abs(block[outcome, j]) ** 2
    return effect


def imperfect_detect(state: DensityOperator, mode: str, spec: DetectorSpec,
                     outcome: int) -> tuple[DensityOperator, float]:
    """Detect ``outcome`` photons on ``mode`` with an imperfect detector.

    Returns the unnormalized state of the remaining modes and its trace.
    """
    if spec.is_ideal:
        return ideal_detect(state, mode, outcome)
    effect = detection_effect(spec, outcome, state.registry.cutoff(mode))
    return measure_mode(state, mode, effect)


def imperfect_detect_dilated(state: DensityOperator, mode: str, spec: DetectorSpec, outcome: int,
                             thermal_cutoff: int | None = None) -> tuple[DensityOperator, float]:
    """Literal dilation: attach thermal light, mix on ``BS(eta)``, project, trace.

    Exact only while every populated photon-number block of the signal and
    thermal modes fits under both cutoffs; use it on small states for checks.
    """
    d = state.registry.cutoff(mode)
    k = thermal_cutoff or d
    label = _fresh_label(state.registry, f"{mode}_thermal")
    out = attach_mode(state, label, k, thermal_state(spec.nu, k, label))
    u = beam_splitter_unitary(spec.efficiency, (d, k))
    out = apply_two_mode_unitary(out, mode, label, u)
    out = partial_trace(out, label)
    return project_mode(out, mode, outcome)


def click_probability(spec: DetectorSpec, photons: int) -> float:
    """Probability of reading at least one photon given ``photons`` incident."""
    return 1.0 - float(detection_effect(spec, 0, photons + 1)[photons])


def dark_click_probability(spec: DetectorSpec) -> float:
    """Closed form for vacuum input: ``1 - 1/(1 + nu (1 - eta))``."""
    return 1.0 - 1.0 / (1.0 + spec.nu * (1.0 - spec.efficiency))

