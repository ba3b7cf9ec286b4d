"""State fidelity and PDL bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, InvalidState
from .fock import DensityOperator, ModeRegistry, embed

NEG_TOL = 1e-12
# eigenvalues below this are treated as exact zeros before taking square roots
ZERO_EIG = 1e-14
TRACE_TOL = 1e-9


@dataclass(frozen=True)
class FidelityReport:
    fidelity: float
    method: str
    note: str = ""

    def __float__(self) -> float:
        return self.fidelity


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    if w[0] < -NEG_TOL:
        raise InvalidState(f"operator is not positive semidefinite: eigenvalue {w[0]:.3e}")
    w = np.where(w < ZERO_EIG, 0.0, w)
    return (v * np.sqrt(w)) @ v.conj().T


def _common_registry(a: ModeRegistry, b: ModeRegistry) -> ModeRegistry:
    labels = list(a.labels) + [label for label in b.labels if label not in a]
    cutoffs = []
    for label in labels:
        da = a.cutoff(label) if label in a else 0
        db = b.cutoff(label) if label in b else 0
        cutoffs.append(max(da, db, 2))
    return ModeRegistry(tuple(labels), tuple(cutoffs))


def reconcile(rho: DensityOperator, sigma: DensityOperator) -> tuple[np.ndarray, np.ndarray, str]:
    """Embed both operators in a common registry; returns matrices and a note."""
    if rho.registry == sigma.registry:
        return rho.matrix, sigma.matrix, ""
    common = _common_registry(rho.registry, sigma.registry)
    note = f"embedded into modes {common.labels} with cutoffs {common.cutoffs}"
    return embed(rho, common).matrix, embed(sigma, common).matrix, note


def _check_trace(m: np.ndarray, name: str) -> None:
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidState(f"{name} must have unit trace, got {tr!r}")


def fidelity(rho: DensityOperator, sigma: DensityOperator, method: str = "uhlmann") -> FidelityReport:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    The trace is evaluated as the nuclear norm of ``sqrt(rho) sqrt(sigma)``,
    which equals the expression above but keeps full precision when either
    state is (nearly) pure. ``method="pure"`` uses ``<psi|rho|psi>`` with
    ``psi`` the dominant eigenvector of ``sigma`` and requires ``sigma`` pure.
    """
    a, b, note = reconcile(rho, sigma)
    _check_trace(a, "rho")
    _check_trace(b, "sigma")
    if method == "uhlmann":
        s = np.linalg.svd(_psd_sqrt(a) @ _psd_sqrt(b), compute_uv=False)
        f = float(np.sum(s)) ** 2
    elif method == "pure":
        w, v = np.linalg.eigh(0.5 * (b + b.conj().T))
        if w[-1] < 1 - 1e-10:
            raise InvalidState("pure-state shortcut needs a pure reference state")
        _psd_sqrt(a)  # positivity check only
        psi = v[:, -1]
        f = float((psi.conj() @ a @ psi).real)
    else:
        raise InvalidParameter(f"unknown fidelity method {method!r}")
    return FidelityReport(min(max(f, 0.0), 1.0), method, note)


def pdl_db(t_max: float, t_min: float) -> float:
    if not (t_min > 0 and t_max > 0):
        raise InvalidParameter("transmissions must be positive")
    if t_min > t_max:
        raise InvalidParameter("t_min must not exceed t_max")
    return 10.0 * math.log10(t_max / t_min)


def t_h_from_db(db: float) -> float:
    """Horizontal transmission for a PDL of ``db`` decibels with ``t_v = 1``."""
    if not db >= 0:
        raise InvalidParameter(f"PDL must be >= 0 dB, got {db!r}")
    return 10.0 ** (-db / 10.0)
