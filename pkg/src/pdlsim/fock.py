"""Truncated multi-mode Fock space: density operators over named optical modes.

Every state lives on a :class:`ModeRegistry`, an ordered list of mode labels
with a per-mode cutoff ``d`` (occupations ``0 .. d-1``). The basis of the
joint space is the lexicographic enumeration of occupation vectors in registry
order, so the first mode is the most significant digit. Density matrices are
stored densely; the helpers below reshape them into ``dims + dims`` tensors to
act on individual modes without building full-space operators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CutoffExceeded,
    DegenerateState,
    InvalidParameter,
    InvalidState,
    ModeExists,
    UnknownMode,
    ZeroProbabilityEvent,
)

DEFAULT_CUTOFF = 4
EPS_PROB = 1e-14
STATE_TOL = 1e-12


@dataclass(frozen=True)
class ModeRegistry:
    """Ordered mode labels with their local Fock cutoffs."""

    labels: tuple[str, ...]
    cutoffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "cutoffs", tuple(int(c) for c in self.cutoffs))
        if len(self.labels) != len(self.cutoffs):
            raise InvalidParameter("labels and cutoffs must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ModeExists(f"duplicate mode labels in {self.labels}")
        for label, d in zip(self.labels, self.cutoffs):
            if d < 2:
                raise InvalidParameter(f"cutoff of mode {label!r} must be >= 2, got {d}")

    @classmethod
    def uniform(cls, labels: Iterable[str], cutoff: int = DEFAULT_CUTOFF) -> "ModeRegistry":
        labels = tuple(labels)
        return cls(labels, (cutoff,) * len(labels))

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label) -> bool:
        return label in self.labels

    @property
    def dims(self) -> tuple[int, ...]:
        return self.cutoffs

    @property
    def dim(self) -> int:
        return int(np.prod(self.cutoffs, dtype=np.int64)) if self.cutoffs else 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownMode(f"mode {label!r} not in registry {self.labels}") from None

    def cutoff(self, label: str) -> int:
        return self.cutoffs[self.index(label)]

    def with_mode(self, label: str, cutoff: int) -> "ModeRegistry":
        if label in self.labels:
            raise ModeExists(f"mode {label!r} already in registry")
        return ModeRegistry(self.labels + (label,), self.cutoffs + (cutoff,))

    def without(self, label: str) -> "ModeRegistry":
        i = self.index(label)
        return ModeRegistry(self.labels[:i] + self.labels[i + 1:],
                            self.cutoffs[:i] + self.cutoffs[i + 1:])

    def basis(self) -> list[tuple[int, ...]]:
        """All occupation vectors in basis (lexicographic) order."""
        return list(itertools.product(*(range(d) for d in self.cutoffs)))

    def flat_index(self, occupation: Sequence[int]) -> int:
        occupation = tuple(int(n) for n in occupation)
        if len(occupation) != len(self):
            raise InvalidParameter(
                f"occupation {occupation} has {len(occupation)} entries, registry has {len(self)}")
        for label, n, d in zip(self.labels, occupation, self.cutoffs):
            if n < 0:
                raise InvalidParameter(f"negative occupation for mode {label!r}")
            if n >= d:
                raise CutoffExceeded(f"occupation {n} of mode {label!r} exceeds cutoff {d}")
        return int(np.ravel_multi_index(occupation, self.cutoffs)) if self.cutoffs else 0

    def total_photons(self) -> np.ndarray:
        """Total photon number of every basis state, in basis order."""
        grids = np.indices(self.cutoffs).reshape(len(self), -1)
        return grids.sum(axis=0)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Dense density matrix on a :class:`ModeRegistry`.

    The trace may be below one: heralded operations return sub-normalized
    operators whose trace is the probability of the heralding event.
    Instances are immutable; all operations return new objects.
    """

    registry: ModeRegistry
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = self.registry.dim
        if m.shape != (d, d):
            raise InvalidParameter(f"matrix shape {m.shape} does not match registry dimension {d}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.registry.labels

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def tensor(self) -> np.ndarray:
        """The matrix viewed as a ``dims + dims`` tensor (kets first)."""
        return self.matrix.reshape(self.registry.dims * 2)

    def element(self, ket: Sequence[int], bra: Sequence[int]) -> complex:
        """Matrix element ``<ket| rho |bra>`` addressed by occupation vectors."""
        return complex(self.matrix[self.registry.flat_index(ket), self.registry.flat_index(bra)])

    def populations(self) -> dict[tuple[int, ...], float]:
        """Diagonal weights keyed by occupation vector (nonzero entries only)."""
        diag = np.diag(self.matrix).real
        return {occ: float(w) for occ, w in zip(self.registry.basis(), diag) if w != 0.0}

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def validate(self, tol: float = STATE_TOL) -> "DensityOperator":
        """Raise :class:`InvalidState` unless Hermitian, PSD and trace <= 1 within ``tol``."""
        herm = self.hermiticity_error()
        if herm > tol:
            raise InvalidState(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
        lam = self.min_eigenvalue()
        if lam < -tol:
            raise InvalidState(f"not positive semidefinite: min eigenvalue {lam:.3e}")
        tr = self.trace
        if tr > 1 + tol or tr < -tol:
            raise InvalidState(f"trace {tr!r} outside [0, 1]")
        return self


@dataclass(frozen=True)
class PolarizationQubit:
    """Single-photon polarization qubit ``c1|H> + c2|V>``."""

    c1: complex
    c2: complex

    def __post_init__(self):
        object.__setattr__(self, "c1", complex(self.c1))
        object.__setattr__(self, "c2", complex(self.c2))
        norm = abs(self.c1) ** 2 + abs(self.c2) ** 2
        if abs(norm - 1.0) > STATE_TOL:
            raise InvalidParameter(f"|c1|^2 + |c2|^2 = {norm!r}, expected 1")

    @classmethod
    def balanced(cls) -> "PolarizationQubit":
        return cls(1 / np.sqrt(2), 1 / np.sqrt(2))

    @classmethod
    def from_unnormalized(cls, c1: complex, c2: complex) -> "PolarizationQubit":
        norm = np.sqrt(abs(c1) ** 2 + abs(c2) ** 2)
        if norm == 0:
            raise DegenerateState("qubit amplitudes are both zero")
        return cls(c1 / norm, c2 / norm)

    def density(self, cutoff: int = DEFAULT_CUTOFF, labels: tuple[str, str] = ("H", "V")) -> DensityOperator:
        """The pure input state on two polarization modes."""
        registry = ModeRegistry.uniform(labels, cutoff)
        return make_state(registry, {(1, 0): self.c1, (0, 1): self.c2})


def make_state(registry: ModeRegistry, amplitudes: Mapping[Sequence[int], complex]) -> DensityOperator:
    """Pure state ``|psi><psi|`` from occupation-vector amplitudes, normalized."""
    psi = np.zeros(registry.dim, dtype=complex)
    for occ, amp in amplitudes.items():
        psi[registry.flat_index(occ)] += amp
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise DegenerateState("amplitude vector has zero norm")
    psi /= norm
    return DensityOperator(registry, np.outer(psi, psi.conj()))


def fock_state(label: str, n: int, cutoff: int = DEFAULT_CUTOFF) -> DensityOperator:
    """Single-mode number state ``|n><n|``."""
    return make_state(ModeRegistry((label,), (cutoff,)), {(n,): 1.0})


def vacuum(label: str, cutoff: int = DEFAULT_CUTOFF) -> DensityOperator:
    return fock_state(label, 0, cutoff)


def tensor_product(first: DensityOperator, second: DensityOperator) -> DensityOperator:
    registry = first.registry
    for label, d in zip(second.registry.labels, second.registry.cutoffs):
        registry = registry.with_mode(label, d)
    return DensityOperator(registry, np.kron(first.matrix, second.matrix))


def attach_mode(state: DensityOperator, label: str, cutoff: int = DEFAULT_CUTOFF,
                ancilla: DensityOperator | None = None) -> DensityOperator:
    """Append a fresh mode ``label`` in the one-mode state ``ancilla`` (vacuum by default).

    The ancilla's own label is ignored; its dimension must equal ``cutoff``.
    """
    if label in state.registry:
        raise ModeExists(f"mode {label!r} already in registry")
    if ancilla is None:
        ancilla = vacuum(label, cutoff)
    if len(ancilla.registry) != 1:
        raise InvalidParameter("ancilla must be a single-mode operator")
    if ancilla.registry.dim != cutoff:
        raise InvalidParameter(f"ancilla dimension {ancilla.registry.dim} != cutoff {cutoff}")
    ancilla = DensityOperator(ModeRegistry((label,), (cutoff,)), ancilla.matrix)
    return tensor_product(state, ancilla)


def _check_number_conserving(unitary: np.ndarray, da: int, db: int, tol: float = 1e-12) -> None:
    na, nb = np.indices((da, db))
    total = (na + nb).ravel()
    leak = np.abs(unitary[total[:, None] != total[None, :]])
    if leak.size and leak.max() > tol:
        raise InvalidParameter("two-mode unitary is not block-diagonal in total photon number")


def apply_two_mode_unitary(state: DensityOperator, mode_a: str, mode_b: str,
                           unitary: np.ndarray) -> DensityOperator:
    """Return ``U rho U^dag`` with ``U`` acting on ``(mode_a, mode_b)``.

    ``unitary`` is a ``(da*db, da*db)`` matrix in the lexicographic basis of
    the ordered pair ``(mode_a, mode_b)``.
    """
    reg = state.registry
    ia, ib = reg.index(mode_a), reg.index(mode_b)
    if ia == ib:
        raise InvalidParameter("two-mode unitary needs two distinct modes")
    da, db = reg.cutoffs[ia], reg.cutoffs[ib]
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (da * db, da * db):
        raise InvalidParameter(f"unitary shape {u.shape} does not match modes ({da}, {db})")
    _check_number_conserving(u, da, db)
    u4 = u.reshape(da, db, da, db)
    n = len(reg)
    t = state.tensor()
    t = np.tensordot(u4, t, axes=([2, 3], [ia, ib]))
    t = np.moveaxis(t, [0, 1], [ia, ib])
    t = np.tensordot(t, u4.conj(), axes=([n + ia, n + ib], [2, 3]))
    t = np.moveaxis(t, [2 * n - 2, 2 * n - 1], [n + ia, n + ib])
    return DensityOperator(reg, t.reshape(reg.dim, reg.dim))


def project_mode(state: DensityOperator, mode: str, outcome: int) -> tuple[DensityOperator, float]:
    """Project ``mode`` onto ``|outcome>`` and remove it from the registry.

    Returns the unnormalized remainder and its trace, the probability of the
    outcome jointly with whatever event ``state`` already encodes.
    """
    reg = state.registry
    i = reg.index(mode)
    if outcome < 0:
        raise InvalidParameter("photon-number outcome must be non-negative")
    if outcome >= reg.cutoffs[i]:
        raise CutoffExceeded(f"outcome {outcome} exceeds cutoff {reg.cutoffs[i]} of mode {mode!r}")
    return measure_mode(state, mode, np.eye(reg.cutoffs[i])[outcome])


def measure_mode(state: DensityOperator, mode: str, effect: np.ndarray) -> tuple[DensityOperator, float]:
    """Apply a number-diagonal measurement effect to ``mode`` and discard the mode.

    ``effect[n]`` is the probability that the outcome of interest fires given
    ``n`` photons in the mode. The result is ``Tr_mode[(E (x) 1) rho]``; a
    one-hot ``effect`` reduces to a projective measurement and an all-ones
    ``effect`` to the partial trace.
    """
    reg = state.registry
    i = reg.index(mode)
    w = np.asarray(effect, dtype=float)
    if w.shape != (reg.cutoffs[i],):
        raise InvalidParameter(f"effect must have length {reg.cutoffs[i]}")
    n = len(reg)
    diag = np.diagonal(state.tensor(), axis1=i, axis2=n + i)
    out = np.tensordot(diag, w, axes=([-1], [0]))
    rest = reg.without(mode)
    result = DensityOperator(rest, out.reshape(rest.dim, rest.dim))
    return result, result.trace


def partial_trace(state: DensityOperator, mode: str) -> DensityOperator:
    reg = state.registry
    i = reg.index(mode)
    n = len(reg)
    out = np.trace(state.tensor(), axis1=i, axis2=n + i)
    rest = reg.without(mode)
    return DensityOperator(rest, out.reshape(rest.dim, rest.dim))


def normalize(state: DensityOperator, eps: float = EPS_PROB) -> DensityOperator:
    tr = state.trace
    if tr <= eps:
        raise ZeroProbabilityEvent(f"cannot condition on an event of probability {tr:.3e}")
    return DensityOperator(state.registry, state.matrix / tr)


def relabel(state: DensityOperator, old: str, new: str) -> DensityOperator:
    reg = state.registry
    i = reg.index(old)
    if new != old and new in reg:
        raise ModeExists(f"mode {new!r} already in registry")
    labels = reg.labels[:i] + (new,) + reg.labels[i + 1:]
    return DensityOperator(ModeRegistry(labels, reg.cutoffs), state.matrix)


def reorder(state: DensityOperator, labels: Sequence[str]) -> DensityOperator:
    """Permute the registry into the order given by ``labels``."""
    reg = state.registry
    if sorted(labels) != sorted(reg.labels):
        raise InvalidParameter(f"{tuple(labels)} is not a permutation of {reg.labels}")
    perm = [reg.index(label) for label in labels]
    n = len(reg)
    t = np.transpose(state.tensor(), perm + [n + p for p in perm])
    new = ModeRegistry(tuple(labels), tuple(reg.cutoffs[p] for p in perm))
    return DensityOperator(new, t.reshape(new.dim, new.dim))


def embed(state: DensityOperator, registry: ModeRegistry) -> DensityOperator:
    """Embed ``state`` into a larger registry.

    Modes of ``registry`` missing from ``state`` are attached in vacuum and
    cutoffs are padded with zero population; the result follows
    ``registry`` order. Shrinking a cutoff is refused.
    """
    for label in state.registry.labels:
        if label not in registry:
            raise UnknownMode(f"mode {label!r} missing from target registry")
    out = state
    for label in registry.labels:
        if label not in out.registry:
            out = attach_mode(out, label, 2)
    out = reorder(out, registry.labels)
    src_dims = out.registry.cutoffs
    for label, have, want in zip(registry.labels, src_dims, registry.cutoffs):
        if want < have:
            raise CutoffExceeded(f"cannot shrink cutoff of mode {label!r} from {have} to {want}")
    t = np.zeros(registry.dims * 2, dtype=complex)
    t[tuple(slice(0, d) for d in src_dims * 2)] = out.tensor()
    return DensityOperator(registry, t.reshape(registry.dim, registry.dim))
