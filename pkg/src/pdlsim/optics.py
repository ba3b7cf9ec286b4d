"""Linear-optical building blocks: beam splitter, loss, PDL and thermal light."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .fock import (
    DEFAULT_CUTOFF,
    DensityOperator,
    ModeRegistry,
    apply_two_mode_unitary,
    attach_mode,
    partial_trace,
)


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise InvalidParameter(f"{name} must lie in [0, 1], got {value!r}")
    return value


def mixing_angle(transmission: float) -> float:
    """``arccos(sqrt(T))``, written with atan2 to stay accurate as ``T -> 1``."""
    return math.atan2(math.sqrt(1.0 - transmission), math.sqrt(transmission))


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless beam splitter of power transmission ``T``.

    The mode operators transform as ``a -> sqrt(T) a + i sqrt(1-T) b`` and
    ``b -> sqrt(T) b + i sqrt(1-T) a``: the transmitted light keeps its mode
    label and the reflected light picks up a factor ``i``.
    """

    transmission: float

    def __post_init__(self):
        _check_unit_interval("transmission", self.transmission)

    @property
    def angle(self) -> float:
        return mixing_angle(self.transmission)

    def unitary(self, cutoff: int | tuple[int, int] = DEFAULT_CUTOFF) -> np.ndarray:
        return beam_splitter_unitary(self.transmission, cutoff)


@dataclass(frozen=True)
class PdlElement:
    """Polarization-dependent loss: independent power transmissions per mode."""

    t_h: float
    t_v: float = 1.0

    def __post_init__(self):
        _check_unit_interval("t_h", self.t_h)
        _check_unit_interval("t_v", self.t_v)


def _generator_block(lo: int, hi: int, total: int) -> np.ndarray:
    """``a^dag b + a b^dag`` on the states ``|k, total-k>`` for ``lo <= k <= hi``."""
    ks = np.arange(lo, hi + 1)
    # <k+1, N-k-1| a^dag b |k, N-k> = sqrt((k+1)(N-k))
    off = np.sqrt((ks[:-1] + 1) * (total - ks[:-1]))
    return np.diag(off, -1) + np.diag(off, 1)


def beam_splitter_block(transmission: float, total: int,
                        lo: int = 0, hi: int | None = None) -> np.ndarray:
    """Beam-splitter unitary on the fixed-photon-number block ``total``.

    Rows and columns are indexed by the photon count ``k`` of the first mode,
    ``lo <= k <= hi``. With the default range the block is complete and the
    matrix elements are exact; a narrower range exponentiates the truncated
    generator, which stays unitary on the kept states.
    """
    hi = total if hi is None else hi
    theta = mixing_angle(_check_unit_interval("transmission", transmission))
    gen = _generator_block(lo, hi, total)
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(1j * theta * w)) @ v.conj().T


def beam_splitter_unitary(transmission: float, cutoff: int | tuple[int, int] = DEFAULT_CUTOFF) -> np.ndarray:
    """Two-mode beam-splitter unitary in the lexicographic ``(a, b)`` basis.

    Built block by block in total photon number. Blocks with fewer photons
    than ``min(cutoff)`` are complete and exact.
    """
    da, db = (cutoff, cutoff) if np.isscalar(cutoff) else cutoff
    da, db = int(da), int(db)
    t = _check_unit_interval("transmission", transmission)
    u = np.zeros((da * db, da * db), dtype=complex)
    for total in range(da + db - 1):
        lo, hi = max(0, total - db + 1), min(total, da - 1)
        block = beam_splitter_block(t, total, lo, hi)
        idx = [k * db + (total - k) for k in range(lo, hi + 1)]
        u[np.ix_(idx, idx)] = block
    return u


def loss_channel(state: DensityOperator, mode: str, transmission: float) -> DensityOperator:
    """Pure loss: mix ``mode`` with a vacuum environment on ``BS(t)`` and trace the environment."""
    t = _check_unit_interval("transmission", transmission)
    d = state.registry.cutoff(mode)
    env = _fresh_label(state.registry, f"{mode}_env")
    out = attach_mode(state, env, d)
    out = apply_two_mode_unitary(out, mode, env, beam_splitter_unitary(t, d))
    return partial_trace(out, env)


def apply_pdl(state: DensityOperator, mode_h: str, mode_v: str, element: PdlElement) -> DensityOperator:
    # H first, then V; the two channels act on disjoint modes and commute.
    out = loss_channel(state, mode_h, element.t_h)
    return loss_channel(out, mode_v, element.t_v)


def thermal_weights(nu: float, cutoff: int) -> np.ndarray:
    """Occupation probabilities ``nu^n / (1+nu)^(n+1)`` for ``n < cutoff``."""
    nu = float(nu)
    if not nu >= 0:
        raise InvalidParameter(f"thermal mean occupation must be >= 0, got {nu!r}")
    n = np.arange(cutoff)
    if nu == 0:
        return (n == 0).astype(float)
    return np.exp(n * math.log(nu / (1 + nu)) - math.log1p(nu))


def thermal_deficit(nu: float, cutoff: int) -> float:
    """Probability mass of the thermal law at or above ``cutoff``."""
    if nu < 0:
        raise InvalidParameter(f"thermal mean occupation must be >= 0, got {nu!r}")
    return (nu / (1 + nu)) ** cutoff if nu > 0 else 0.0


def thermal_cutoff(nu: float, tol: float = 1e-13, minimum: int = DEFAULT_CUTOFF) -> int:
    """Smallest cutoff whose thermal truncation deficit is below ``tol``."""
    if nu < 0:
        raise InvalidParameter(f"thermal mean occupation must be >= 0, got {nu!r}")
    if nu == 0:
        return minimum
    need = math.ceil(math.log(tol) / math.log(nu / (1 + nu)))
    return max(minimum, need)


def thermal_state(nu: float, cutoff: int = DEFAULT_CUTOFF, label: str = "thermal") -> DensityOperator:
    """Truncated thermal state of mean ``nu``.

    The weights are not renormalized after truncation, so the trace falls
    short of one by :func:`thermal_deficit`.
    """
    w = thermal_weights(nu, cutoff)
    return DensityOperator(ModeRegistry((label,), (cutoff,)), np.diag(w).astype(complex))


def _fresh_label(registry: ModeRegistry, stem: str) -> str:
    label, k = stem, 0
    while label in registry:
        k += 1
        label = f"{stem}{k}"
    return label
