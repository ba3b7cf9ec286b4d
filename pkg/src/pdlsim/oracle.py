"""Closed-form output states of the compensation schemes.

These are direct transcriptions of the analytic expressions for the output
density operators, written term by term and kept free of any simulator code
so they can serve as an independent check on the circuit simulation. Each
state is a set of coefficients on ``|0>`` (no photon), ``|H>``, ``|V>`` and
``|2>`` (one H and one V photon).

The imperfect-detector amplifier expression (:func:`oracle_amp_imperfect`)
is transcribed literally, including factors that do not reduce to
the ideal amplifier output; see its docstring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .fock import DEFAULT_CUTOFF, DensityOperator, ModeRegistry

_BASIS = {"0": (0, 0), "H": (1, 0), "V": (0, 1), "2": (1, 1)}


@dataclass(frozen=True)
class OracleState:
    """Coefficients of ``|a><b|`` terms; ``hv`` multiplies ``|H><V|``."""

    vac: complex = 0.0
    hh: complex = 0.0
    hv: complex = 0.0
    vh: complex = 0.0
    vv: complex = 0.0
    two: complex = 0.0
    normalized: bool = False

    @property
    def trace(self) -> float:
        return float((self.vac + self.hh + self.vv + self.two).real)

    def terms(self) -> dict[tuple[str, str], complex]:
        return {("0", "0"): self.vac, ("H", "H"): self.hh, ("H", "V"): self.hv,
                ("V", "H"): self.vh, ("V", "V"): self.vv, ("2", "2"): self.two}

    def normalize(self) -> "OracleState":
        tr = self.trace
        if tr <= 0:
            raise InvalidParameter("cannot normalize a state with non-positive trace")
        return OracleState(self.vac / tr, self.hh / tr, self.hv / tr, self.vh / tr,
                           self.vv / tr, self.two / tr, True)

    def hermiticity_gap(self) -> float:
        """``|hv - conj(vh)|``; zero for a valid density operator."""
        return abs(self.hv - np.conj(self.vh))

    def to_density(self, cutoff: int = DEFAULT_CUTOFF, labels: tuple[str, str] = ("H", "V")) -> DensityOperator:
        reg = ModeRegistry.uniform(labels, cutoff)
        m = np.zeros((reg.dim, reg.dim), dtype=complex)
        for (ket, bra), c in self.terms().items():
            m[reg.flat_index(_BASIS[ket]), reg.flat_index(_BASIS[bra])] += c
        return DensityOperator(reg, m)


def _check(name, value, lo=0.0, hi=1.0):
    if not lo <= value <= hi:
        raise InvalidParameter(f"{name} must lie in [{lo}, {hi}], got {value!r}")


def _check_qubit(c1, c2):
    if abs(abs(c1) ** 2 + abs(c2) ** 2 - 1) > 1e-12:
        raise InvalidParameter("qubit amplitudes must satisfy |c1|^2 + |c2|^2 = 1")


def oracle_input(c1: complex, c2: complex) -> OracleState:
    _check_qubit(c1, c2)
    return OracleState(0, abs(c1) ** 2, c1 * np.conj(c2), np.conj(c1) * c2, abs(c2) ** 2, 0, True)


def oracle_pdl(c1: complex, c2: complex, t_h: float) -> OracleState:
    """State after loss ``t_h`` on the horizontal mode only."""
    _check_qubit(c1, c2)
    _check("t_h", t_h)
    s = math.sqrt(t_h)
    return OracleState(
        vac=abs(c1) ** 2 * (1 - t_h),
        hh=abs(c1) ** 2 * t_h,
        hv=np.conj(c2) * c1 * s,
        vh=np.conj(c1) * c2 * s,
        vv=abs(c2) ** 2,
        normalized=True,
    )


def oracle_passive(c1: complex, c2: complex, t_h: float) -> OracleState:
    """Passive rebalancing with the vertical attenuation set to ``t_h``."""
    _check_qubit(c1, c2)
    _check("t_h", t_h)
    return OracleState(
        vac=1 - t_h,
        hh=t_h * abs(c1) ** 2,
        hv=t_h * np.conj(c2) * c1,
        vh=t_h * np.conj(c1) * c2,
        vv=t_h * abs(c2) ** 2,
        normalized=True,
    )


def oracle_noiseless_att(c1: complex, c2: complex, t_h: float, T: float) -> tuple[OracleState, float]:
    """Heralded (unnormalized) noiseless-attenuation state and its success probability."""
    _check_qubit(c1, c2)
    _check("t_h", t_h)
    _check("T", T)
    s = math.sqrt(t_h * T)
    state = OracleState(
        vac=abs(c1) ** 2 * (1 - t_h),
        hh=abs(c1) ** 2 * t_h,
        hv=np.conj(c2) * c1 * s,
        vh=np.conj(c1) * c2 * s,
        vv=abs(c2) ** 2 * T,
    )
    return state, abs(c1) ** 2 + abs(c2) ** 2 * T


def success_noiseless_att(c1: complex, t_h: float) -> float:
    """Heralding probability of noiseless attenuation at ``T = t_h``."""
    return t_h + abs(c1) ** 2 * (1 - t_h)


def oracle_noiseless_att_conditioned(c1: complex, c2: complex, t_h: float) -> OracleState:
    """Explicit normalized noiseless-attenuation output at ``T = t_h``."""
    _check_qubit(c1, c2)
    p = t_h + abs(c1) ** 2 * (1 - t_h)
    return OracleState(
        vac=abs(c1) ** 2 * (1 - t_h) / p,
        hh=t_h * abs(c1) ** 2 / p,
        hv=t_h * np.conj(c2) * c1 / p,
        vh=t_h * np.conj(c1) * c2 / p,
        vv=t_h * abs(c2) ** 2 / p,
        normalized=True,
    )


def oracle_amp(c1: complex, c2: complex, t_h: float, T: float) -> tuple[OracleState, float]:
    """Heralded noiseless-amplifier state at gain setting ``T`` and its success probability."""
    _check_qubit(c1, c2)
    _check("t_h", t_h)
    _check("T", T)
    s = math.sqrt(t_h * T * (1 - T))
    state = OracleState(
        vac=0.5 * abs(c1) ** 2 * (1 - t_h) * (1 - T),
        hh=0.5 * abs(c1) ** 2 * T * t_h,
        hv=0.5 * np.conj(c2) * c1 * s,
        vh=0.5 * np.conj(c1) * c2 * s,
        vv=0.5 * abs(c2) ** 2 * (1 - T),
    )
    p = 0.5 * (abs(c1) ** 2 * (1 - t_h) * (1 - T) + abs(c1) ** 2 * T * t_h + abs(c2) ** 2 * (1 - T))
    return state, p


def success_amp(c1: complex, t_h: float) -> float:
    """Heralding probability of the amplifier at ``T = 1/(1+t_h)``."""
    return t_h / (2 * (1 + t_h)) * (1 + abs(c1) ** 2 * (1 - t_h))


def oracle_amp_conditioned(c1: complex, c2: complex, t_h: float) -> OracleState:
    """Explicit normalized amplifier output at ``T = 1/(1+t_h)``."""
    _check_qubit(c1, c2)
    n = 1 + abs(c1) ** 2 * (1 - t_h)
    return OracleState(
        vac=abs(c1) ** 2 * (1 - t_h) / n,
        hh=abs(c1) ** 2 / n,
        hv=np.conj(c2) * c1 / n,
        vh=np.conj(c1) * c2 / n,
        vv=abs(c2) ** 2 / n,
        normalized=True,
    )


def _check_detector(eta, nu, eta_min=0.0):
    if not eta_min <= eta < 1:
        raise InvalidParameter(f"efficiency must lie in [{eta_min}, 1), got {eta!r}")
    if nu < 0:
        raise InvalidParameter(f"thermal mean must be >= 0, got {nu!r}")


def oracle_att_imperfect(c1: complex, c2: complex, t_h: float, T: float,
                         eta: float, nu: float) -> OracleState:
    """Unnormalized noiseless-attenuation state with an imperfect herald detector.

    Transcribed literally: the vacuum coefficient carries ``|c1|^2`` for both the
    photon lost to PDL and the photon diverted into the ancilla; the two
    agree with a first-principles calculation only when ``|c1| = |c2|``.
    """
    _check_qubit(c1, c2)
    _check("t_h", t_h)
    _check("T", T)
    _check_detector(eta, nu)
    D = 1 + nu - eta * nu
    s = math.sqrt(t_h * T)
    return OracleState(
        vac=((2 - T - t_h) * D - eta * (1 - T)) / D ** 2 * abs(c1) ** 2,
        hh=t_h / D * abs(c1) ** 2,
        vv=T / D * abs(c2) ** 2,
        hv=s / D * np.conj(c2) * c1,
        vh=s / D * np.conj(c1) * c2,
    )


def oracle_att_imperfect_balanced(c1: complex, c2: complex, t_h: float,
                                  eta: float, nu: float) -> OracleState:
    """The imperfect-detector attenuation state written out for ``T = t_h``."""
    _check_qubit(c1, c2)
    _check("t_h", t_h)
    _check_detector(eta, nu)
    D = 1 + nu - eta * nu
    k = t_h / D
    return OracleState(
        vac=(1 - t_h) * (2 + 2 * nu - 2 * nu * eta - eta) / D ** 2 * abs(c1) ** 2,
        hh=k * abs(c1) ** 2,
        hv=k * np.conj(c2) * c1,
        vh=k * np.conj(c1) * c2,
        vv=k * abs(c2) ** 2,
    )


def oracle_amp_imperfect(c1: complex, c2: complex, t_h: float, T: float,
                         eta: float, nu: float) -> OracleState:
    """Reference amplifier output with two identical imperfect detectors.

    Transcribed literally. Note that at ``eta = 1, nu = 0`` the coherence
    terms reduce to ``sqrt(T(1-T)) t_h / 2`` rather than the ideal
    ``sqrt(t_h T (1-T)) / 2``, the ``|H><H|`` term carries no efficiency
    factor at ``nu = 0``, and the ``|H><V|`` coefficient picks up an
    imaginary part once ``nu > 0``. Requires ``eta >= 0.01``.
    """
    _check_qubit(c1, c2)
    _check("t_h", t_h)
    _check("T", T)
    _check_detector(eta, nu, eta_min=0.01)
    D = 1 + nu - eta * nu
    se = math.sqrt(eta)
    sen = math.sqrt(eta * nu)
    shared = (eta ** 2
              + eta * nu * (1 - se) ** 2 * (1 - eta) * (1 + nu) / D ** 3
              + sen * (1 - eta) * (1 + nu + eta * nu) / D ** 2)
    lost_branch = t_h * (1 - eta) * (1 + nu) * (
        eta * ((1 - se) ** 2 + (1 - eta)) / D
        + 2 * eta * nu * (1 - se) ** 2 * (1 - eta) * (1 + nu) / D ** 4
        + sen * (1 - eta) * (1 + nu + eta * nu) / D ** 3
    )
    vac = (1 - T) / (4 * eta * D ** 2) * (2 * (1 - t_h) * shared + lost_branch) * abs(c1) ** 2
    hh = T * (nu * (2 - t_h) * (1 - eta) + t_h) / (2 * D ** 3) * abs(c1) ** 2
    two = T * nu * (1 - eta) ** 2 * (1 + nu) / (2 * D ** 4) * abs(c1) ** 2
    vv = (1 - T) / (2 * eta * D ** 2) * shared * abs(c2) ** 2

    def coherence(sign):
        j = sign * 1j
        return (se
                + (1 + (2 + j) * se - 2 * eta - (2 + j) * eta ** 1.5 + eta ** 2) * nu
                + (1 + (1 + j) * se) * (1 - eta ** 2) * nu ** 2) / (2 * D ** 4)

    pref = math.sqrt((1 - T) * T) * t_h
    return OracleState(
        vac=vac,
        hh=hh,
        two=two,
        vv=vv,
        hv=pref * coherence(+1) * np.conj(c2) * c1,
        vh=pref * coherence(-1) * np.conj(c1) * c2,
    )


def max_delta(simulated: DensityOperator, oracle: OracleState) -> float:
    """Largest elementwise ``|simulated - oracle|`` over the full two-mode matrix."""
    ref = oracle.to_density(simulated.registry.cutoffs[0], simulated.labels)
    if ref.registry != simulated.registry:
        raise InvalidParameter("simulated state must live on two modes of equal cutoff")
    return float(np.max(np.abs(simulated.matrix - ref.matrix)))


def amp_imperfect_convention_check(t_h: float = 10 ** -0.3, tol: float = 1e-6) -> tuple[bool, float]:
    """Does the reference imperfect-detector amplifier state reduce to the ideal one?

    Evaluates both at ``eta -> 1, nu = 0`` on a balanced qubit and the
    ideal gain setting; returns ``(agrees, max coefficient difference)``.
    Simulator comparisons against :func:`oracle_amp_imperfect` are only
    meaningful when this holds.
    """
    c = 1 / math.sqrt(2)
    T = 1 / (1 + t_h)
    limit = oracle_amp_imperfect(c, c, t_h, T, 1 - 1e-12, 0.0)
    ideal, _ = oracle_amp(c, c, t_h, T)
    delta = max(abs(a - b) for a, b in zip(limit.terms().values(), ideal.terms().values()))
    return delta <= tol, float(delta)
