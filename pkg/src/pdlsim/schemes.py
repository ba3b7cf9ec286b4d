"""End-to-end PDL compensation pipelines.

All schemes start from a polarization qubit on modes ``H`` and ``V`` and
apply PDL to ``H`` (``t_v = 1``). The correction stage is one of

* passive attenuation: loss ``T`` on ``V``, environment discarded;
* noiseless attenuation: ``BS(T)`` between ``V`` and a vacuum ancilla,
  heralded on reading zero photons in the ancilla;
* noiseless amplification of ``H`` by unbalanced teleportation.

Amplifier wiring. A single photon enters mode ``out`` of ``BS(T)`` against a
vacuum mode ``arm``, leaving ``sqrt(T)|1>_out + i sqrt(1-T)|1>_arm``. ``H``
and ``arm`` meet on a 50-50 beam splitter. Success is zero photons read in
the ``H`` port and one photon in the ``arm`` port; ``out`` then becomes the
new ``H`` mode while ``V`` bypasses untouched. With the opposite herald
assignment the ``H`` and ``V`` branches pick up a relative sign; this choice
reproduces the closed-form amplifier output without any phase correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np

from .detectors import DetectorSpec, ideal_detect, imperfect_detect
from .errors import InvalidParameter, ZeroProbabilityEvent
from .fock import (
    DEFAULT_CUTOFF,
    EPS_PROB,
    DensityOperator,
    ModeRegistry,
    PolarizationQubit,
    apply_two_mode_unitary,
    attach_mode,
    fock_state,
    normalize,
    relabel,
    reorder,
    tensor_product,
)
from .metrics import fidelity
from .optics import PdlElement, apply_pdl, beam_splitter_unitary, loss_channel

SCHEMES = ("uncorrected", "passive", "noiseless-att", "amplification")
T_STRATEGIES = ("fidelity", "balance", "fixed-ideal")
Detector = Union[DetectorSpec, str, None]


def _resolve_detector(detector: Detector) -> DetectorSpec | None:
    """``None`` for ideal detection, otherwise a non-ideal :class:`DetectorSpec`."""
    if detector is None or detector == "ideal":
        return None
    if isinstance(detector, DetectorSpec):
        return None if detector.is_ideal else detector
    raise InvalidParameter(f"detector must be a DetectorSpec or 'ideal', got {detector!r}")


def _detect(state: DensityOperator, mode: str, detector: DetectorSpec | None, outcome: int):
    if detector is None:
        return ideal_detect(state, mode, outcome)
    return imperfect_detect(state, mode, detector, outcome)


@dataclass(frozen=True)
class SchemeConfig:
    qubit: PolarizationQubit = field(default_factory=PolarizationQubit.balanced)
    t_h: float = 1.0
    T: Union[float, str] = "auto"
    detector: Detector = "ideal"
    cutoff: int = DEFAULT_CUTOFF
    t_strategy: str = "balance"

    def __post_init__(self):
        if not 0.0 < self.t_h <= 1.0:
            raise InvalidParameter(f"t_h must lie in (0, 1], got {self.t_h!r}")
        if self.T != "auto":
            T = float(self.T)
            if not 0.0 <= T <= 1.0:
                raise InvalidParameter(f"T must lie in [0, 1] or be 'auto', got {self.T!r}")
        if self.t_strategy not in T_STRATEGIES:
            raise InvalidParameter(f"t_strategy must be one of {T_STRATEGIES}")
        _resolve_detector(self.detector)
        if self.cutoff < 3:
            # the amplifier's Hong-Ou-Mandel term needs two photons per mode
            raise InvalidParameter("cutoff must be at least 3")


@dataclass(frozen=True)
class SchemeResult:
    scheme: str
    config: SchemeConfig
    T_used: float | None
    unnormalized_output: DensityOperator
    acceptance_probability: float
    conditioned_output: DensityOperator
    fidelity: float
    converged: bool = True

    @property
    def vacuum_weight(self) -> float:
        return self.conditioned_output.element((0, 0), (0, 0)).real

    @property
    def two_photon_weight(self) -> float:
        """Weight of the one-H-plus-one-V term the amplifier can add by mistake."""
        return self.conditioned_output.element((1, 1), (1, 1)).real


def input_state(config: SchemeConfig) -> DensityOperator:
    return config.qubit.density(config.cutoff)


def reference_state(config: SchemeConfig) -> DensityOperator:
    """Target state: the input qubit with no vacuum or multi-photon weight."""
    return config.qubit.density(config.cutoff)


def _finish(scheme: str, config: SchemeConfig, T: float | None, out: DensityOperator,
            heralded: bool, converged: bool = True) -> SchemeResult:
    out = reorder(out, ("H", "V"))
    accept = out.trace if heralded else 1.0
    if accept <= EPS_PROB:
        raise ZeroProbabilityEvent(f"{scheme}: heralding probability {accept:.3e}")
    conditioned = normalize(out)
    f = fidelity(conditioned, reference_state(config)).fidelity
    return SchemeResult(scheme, config, T, out, accept, conditioned, f, converged)


def _after_pdl(config: SchemeConfig) -> DensityOperator:
    return apply_pdl(input_state(config), "H", "V", PdlElement(config.t_h, 1.0))


def choose_T_attenuation(t_h: float) -> float:
    """Attenuating ``V`` by ``t_h`` rebalances the polarization modes."""
    if not 0.0 < t_h <= 1.0:
        raise InvalidParameter(f"t_h must lie in (0, 1], got {t_h!r}")
    return float(t_h)


def run_uncorrected(config: SchemeConfig) -> SchemeResult:
    return _finish("uncorrected", config, None, _after_pdl(config), heralded=False)


def run_passive_attenuation(config: SchemeConfig) -> SchemeResult:
    T = choose_T_attenuation(config.t_h) if config.T == "auto" else float(config.T)
    out = loss_channel(_after_pdl(config), "V", T)
    return _finish("passive", config, T, out, heralded=False)


def noiseless_attenuation_output(config: SchemeConfig, T: float) -> DensityOperator:
    """Unnormalized heralded state of the noiseless attenuator."""
    state = attach_mode(_after_pdl(config), "anc", config.cutoff)
    state = apply_two_mode_unitary(state, "V", "anc", beam_splitter_unitary(T, config.cutoff))
    out, _ = _detect(state, "anc", _resolve_detector(config.detector), 0)
    return out


def run_noiseless_attenuation(config: SchemeConfig) -> SchemeResult:
    T = choose_T_attenuation(config.t_h) if config.T == "auto" else float(config.T)
    out = noiseless_attenuation_output(config, T)
    return _finish("noiseless-att", config, T, out, heralded=True)


def _amplifier_from_ancilla(config: SchemeConfig, ancilla: DensityOperator) -> DensityOperator:
    """Heralded amplifier output for an arbitrary (linear) input on ``(out, arm)``.

    ``ancilla`` is any operator on the two-mode registry ``(out, arm)``; the
    map is linear, so Hermitian but indefinite inputs are allowed.
    """
    d = config.cutoff
    joint = tensor_product(_after_pdl(config), ancilla)
    joint = apply_two_mode_unitary(joint, "H", "arm", beam_splitter_unitary(0.5, d))
    detector = _resolve_detector(config.detector)
    joint, _ = _detect(joint, "H", detector, 0)
    joint, _ = _detect(joint, "arm", detector, 1)
    return relabel(joint, "out", "H")


def _ancilla_pair(T: float, d: int) -> DensityOperator:
    photon = attach_mode(fock_state("out", 1, d), "arm", d)
    return apply_two_mode_unitary(photon, "out", "arm", beam_splitter_unitary(T, d))


def amplification_output(config: SchemeConfig, T: float) -> DensityOperator:
    """Unnormalized heralded state of the noiseless amplifier at gain setting ``T``."""
    return reorder(_amplifier_from_ancilla(config, _ancilla_pair(T, config.cutoff)), ("H", "V"))


@dataclass(frozen=True)
class AmplifierResponse:
    """Amplifier output as an explicit function of ``T``.

    The ancilla pair is ``sqrt(T)|10> + i sqrt(1-T)|01>`` on ``(out, arm)`` and
    everything downstream is linear, so the heralded output is
    ``T * kept + (1-T) * arm + sqrt(T(1-T)) * cross``.
    """

    kept: np.ndarray
    arm: np.ndarray
    cross: np.ndarray
    registry: ModeRegistry

    @classmethod
    def build(cls, config: SchemeConfig) -> "AmplifierResponse":
        d = config.cutoff
        pair = ModeRegistry(("out", "arm"), (d, d))
        i10, i01 = pair.flat_index((1, 0)), pair.flat_index((0, 1))
        unit = np.zeros((pair.dim, pair.dim), dtype=complex)
        kept, arm, cross = unit.copy(), unit.copy(), unit.copy()
        kept[i10, i10] = 1.0
        arm[i01, i01] = 1.0
        # |10><01| carries sqrt(T) * conj(i sqrt(1-T)) = -i sqrt(T(1-T))
        cross[i10, i01] = -1j
        cross[i01, i10] = 1j
        outs = [reorder(_amplifier_from_ancilla(config, DensityOperator(pair, m)), ("H", "V"))
                for m in (kept, arm, cross)]
        return cls(outs[0].matrix, outs[1].matrix, outs[2].matrix, outs[0].registry)

    def output(self, T: float) -> DensityOperator:
        m = T * self.kept + (1 - T) * self.arm + math.sqrt(max(T * (1 - T), 0.0)) * self.cross
        return DensityOperator(self.registry, m)


@dataclass(frozen=True)
class TSearch:
    T: float
    fidelity: float
    strategy: str
    converged: bool
    evaluations: int


def golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                       xtol: float = 1e-8, max_iter: int = 200) -> tuple[float, float, int]:
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x), evaluations)``."""
    inv_phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > xtol and evals < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
        evals += 1
    x = 0.5 * (a + b)
    return x, f(x), evals + 1


def _balance_T(response: AmplifierResponse, qubit: PolarizationQubit, tol: float = 1e-13) -> tuple[float, bool]:
    """Bisection for equal conditioned ``|H><H|/|c1|^2`` and ``|V><V|/|c2|^2`` weights."""
    w1, w2 = abs(qubit.c1) ** 2, abs(qubit.c2) ** 2
    if w1 == 0 or w2 == 0:
        return float("nan"), False
    reg = response.registry
    ih, iv = reg.flat_index((1, 0)), reg.flat_index((0, 1))

    def imbalance(T):
        m = response.output(T).matrix
        return m[ih, ih].real / w1 - m[iv, iv].real / w2

    lo, hi = 0.0, 1.0
    if not imbalance(lo) < 0 < imbalance(hi):
        return float("nan"), False
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if imbalance(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), True


def search_amplifier_T(config: SchemeConfig, strategy: str | None = None,
                       grid: int = 41, xtol: float = 1e-8) -> TSearch:
    """Select the amplifier gain setting ``T`` for ``config``.

    ``fixed-ideal`` returns ``1/(1+t_h)``; ``balance`` (the default)
    equalizes the conditioned ``H`` and ``V`` populations relative to the
    input, which reproduces ``1/(1+t_h)`` exactly without dark counts;
    ``fidelity`` maximizes the conditioned-output fidelity, which favours a
    larger ``T`` than the balanced choice even for ideal detectors. The fidelity search scans a
    coarse grid, flags the result as not converged when the scan is not
    unimodal, and refines the best bracket by golden-section search.
    """
    strategy = strategy or config.t_strategy
    ideal_T = 1.0 / (1.0 + config.t_h)
    if strategy == "fixed-ideal":
        return TSearch(ideal_T, float("nan"), strategy, True, 0)
    response = AmplifierResponse.build(config)
    target = reference_state(config)

    def score(T):
        out = response.output(T)
        if out.trace <= EPS_PROB:
            return 0.0
        return fidelity(normalize(out), target).fidelity

    if strategy == "balance":
        T, ok = _balance_T(response, config.qubit)
        if not ok:
            return TSearch(ideal_T, score(ideal_T), strategy, False, 0)
        return TSearch(T, score(T), strategy, True, 0)
    if strategy != "fidelity":
        raise InvalidParameter(f"unknown T strategy {strategy!r}")

    xs = np.linspace(0.0, 1.0, grid)[1:-1]
    ys = np.array([score(x) for x in xs])
    k = int(np.argmax(ys))
    rises = np.diff(ys) > 0
    # unimodal scan: strictly rising up to the peak, then never rising again
    unimodal = bool(np.all(rises[:k]) and not np.any(rises[k:]))
    lo = xs[k - 1] if k > 0 else 0.0
    hi = xs[k + 1] if k + 1 < len(xs) else 1.0
    T, fT, evals = golden_section_max(score, lo, hi, xtol)
    return TSearch(T, fT, strategy, unimodal, evals + len(xs))


def choose_T_amplifier(t_h: float, detector: Detector = "ideal", *,
                       qubit: PolarizationQubit | None = None, cutoff: int = DEFAULT_CUTOFF,
                       strategy: str = "balance") -> float:
    """Gain setting: ``1/(1+t_h)`` for ideal detectors, a numeric search otherwise."""
    if not 0.0 < t_h <= 1.0:
        raise InvalidParameter(f"t_h must lie in (0, 1], got {t_h!r}")
    if _resolve_detector(detector) is None:
        return 1.0 / (1.0 + t_h)
    config = SchemeConfig(qubit or PolarizationQubit.balanced(), t_h, "auto", detector, cutoff, strategy)
    return search_amplifier_T(config).T


def run_noiseless_amplification(config: SchemeConfig) -> SchemeResult:
    converged = True
    if config.T != "auto":
        T = float(config.T)
    elif _resolve_detector(config.detector) is None:
        T = 1.0 / (1.0 + config.t_h)
    else:
        search = search_amplifier_T(config)
        T, converged = search.T, search.converged
    out = amplification_output(config, T)
    return _finish("amplification", config, T, out, heralded=True, converged=converged)


RUNNERS = {
    "uncorrected": run_uncorrected,
    "passive": run_passive_attenuation,
    "noiseless-att": run_noiseless_attenuation,
    "amplification": run_noiseless_amplification,
}


def run_scheme(scheme: str, config: SchemeConfig) -> SchemeResult:
    try:
        runner = RUNNERS[scheme]
    except KeyError:
        raise InvalidParameter(f"unknown scheme {scheme!r}; expected one of {SCHEMES}") from None
    return runner(config)


def with_T(config: SchemeConfig, T) -> SchemeConfig:
    return replace(config, T=T)
