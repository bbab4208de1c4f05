"""Concrete system + bath Hamiltonians in a truncated Fock / qubit basis.

Conventions: ``x = (a + a^dagger)/sqrt(2)`` (dimensionless), oscillator energies
``omega * a^dagger a`` without zero-point term, qubit ``(omega/2) sigma_z``.
The system factor always comes first in the tensor product.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ModelError, TruncationError
from .operators import (
    MAX_DIM,
    SIGMA_X,
    SIGMA_Z,
    SubsystemSplit,
    embed,
    hermitian,
    partial_trace,
)

KINDS = ("two-qubit", "coupled-oscillators", "spin-boson")
DRIVE_OPERATORS = ("sum-of-positions", "sum-of-numbers")


def number_op(d: int) -> np.ndarray:
    return np.diag(np.arange(d, dtype=float)).astype(complex)


def annihilation(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)


def position_op(d: int) -> np.ndarray:
    a = annihilation(d)
    return (a + a.conj().T) / np.sqrt(2.0)


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "two-qubit"
    omega_s: float = 1.0
    omega_b: tuple[float, ...] = (1.0,)
    couplings: tuple[float, ...] = (0.5,)
    fock_dim: int = 12
    J: float = 0.0
    drive_operator: str = "sum-of-positions"

    def __post_init__(self):
        object.__setattr__(self, "omega_b", tuple(float(w) for w in np.atleast_1d(self.omega_b)))
        object.__setattr__(self, "couplings", tuple(float(g) for g in np.atleast_1d(self.couplings)))
        if self.kind not in KINDS:
            raise ModelError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if self.drive_operator not in DRIVE_OPERATORS:
            raise ModelError(f"unknown drive operator {self.drive_operator!r}; expected one of {DRIVE_OPERATORS}")
        if not self.omega_b:
            raise ModelError("empty bath: at least one bath frequency is required")
        if len(self.omega_b) != len(self.couplings):
            raise ModelError(f"{len(self.omega_b)} bath frequencies but {len(self.couplings)} couplings")
        if self.omega_s <= 0 or any(w <= 0 for w in self.omega_b):
            raise ModelError("frequencies must be positive")
        if self.kind == "two-qubit" and len(self.omega_b) != 1:
            raise ModelError("the two-qubit model has exactly one bath qubit")
        if self.kind != "two-qubit" and self.fock_dim < 2:
            raise ModelError("Fock truncation must be >= 2")
        if self.dim > MAX_DIM:
            raise ModelError(f"composite dimension {self.dim} exceeds cap {MAX_DIM}")

    @property
    def factor_dims(self) -> tuple[int, ...]:
        n = len(self.omega_b)
        if self.kind == "two-qubit":
            return (2, 2)
        if self.kind == "spin-boson":
            return (2,) + (self.fock_dim,) * n
        return (self.fock_dim,) * (n + 1)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def with_(self, **changes) -> "ModelSpec":
        return replace(self, **changes)

    def scaled(self, g_scale: float) -> "ModelSpec":
        return replace(self, couplings=tuple(g_scale * g for g in self.couplings))


@dataclass(frozen=True)
class CompositeHamiltonian:
    """Operator blocks of ``H_c = H_s + H_i + H_b + J A_b`` on the composite space."""

    H_s: np.ndarray
    H_i: np.ndarray
    H_b: np.ndarray
    A_b: np.ndarray
    split: SubsystemSplit
    J: float = 0.0
    spec: ModelSpec | None = field(default=None, compare=False)

    @property
    def d_s(self) -> int:
        return self.split.dims[0]

    @property
    def d_b(self) -> int:
        return self.split.dim // self.split.dims[0]

    @property
    def bipartite(self) -> SubsystemSplit:
        """System vs. whole bath as a two-factor split."""
        return SubsystemSplit((self.d_s, self.d_b))

    @property
    def H_c(self) -> np.ndarray:
        return self.H_s + self.H_i + self.H_b + self.J * self.A_b

    @property
    def H_bath_total(self) -> np.ndarray:
        """``H_b + J A_b``: the bath Hamiltonian that defines the free-bath reference."""
        return self.H_b + self.J * self.A_b

    def system_local(self, op: np.ndarray) -> np.ndarray:
        """System-space block of an operator of the form ``X_s (x) I_b``."""
        return hermitian(partial_trace(op, self.bipartite, [0]) / self.d_b)

    def bath_local(self, op: np.ndarray) -> np.ndarray:
        """Bath-space block of an operator of the form ``I_s (x) X_b``."""
        return hermitian(partial_trace(op, self.bipartite, [1]) / self.d_s)

    def with_J(self, J: float) -> "CompositeHamiltonian":
        return replace(self, J=float(J))

    def with_bath_shift(self, c: float) -> "CompositeHamiltonian":
        return replace(self, H_b=self.H_b + c * np.eye(self.split.dim))


def build(spec: ModelSpec) -> CompositeHamiltonian:
    dims = spec.factor_dims
    split = SubsystemSplit(dims)
    n_bath = len(spec.omega_b)
    D = split.dim
    H_s = np.zeros((D, D), dtype=complex)
    H_i = np.zeros((D, D), dtype=complex)
    H_b = np.zeros((D, D), dtype=complex)
    A_b = np.zeros((D, D), dtype=complex)

    if spec.kind == "two-qubit":
        H_s = embed(0.5 * spec.omega_s * SIGMA_Z, 0, split)
        H_b = embed(0.5 * spec.omega_b[0] * SIGMA_Z, 1, split)
        H_i = spec.couplings[0] * embed(SIGMA_X, 0, split) @ embed(SIGMA_X, 1, split)
        if spec.drive_operator == "sum-of-positions":
            A_b = embed(SIGMA_X, 1, split)
        else:
            A_b = embed(np.diag([0.0, 1.0]).astype(complex), 1, split)
    else:
        d = spec.fock_dim
        if spec.kind == "spin-boson":
            H_s = embed(0.5 * spec.omega_s * SIGMA_Z, 0, split)
            sys_coupling = embed(SIGMA_X, 0, split)
        else:
            H_s = embed(spec.omega_s * number_op(d), 0, split)
            sys_coupling = embed(position_op(d), 0, split)
        for k in range(n_bath):
            slot = k + 1
            xk = embed(position_op(d), slot, split)
            nk = embed(number_op(d), slot, split)
            H_b = H_b + spec.omega_b[k] * nk
            H_i = H_i + spec.couplings[k] * sys_coupling @ xk
            A_b = A_b + (xk if spec.drive_operator == "sum-of-positions" else nk)

    return CompositeHamiltonian(
        H_s=hermitian(H_s, "H_s"),
        H_i=hermitian(H_i, "H_i"),
        H_b=hermitian(H_b, "H_b"),
        A_b=hermitian(A_b, "A_b"),
        split=split,
        J=float(spec.J),
        spec=spec,
    )


def truncation_check(
    spec: ModelSpec,
    observable: Callable[[CompositeHamiltonian], float],
    tol: float,
    d_start: int = 2,
) -> int:
    """Smallest Fock dimension ``d`` with ``|O(2d) - O(d)| < tol |O(2d)|``.

    Raises :class:`TruncationError` carrying ``[(d, O(d), O(2d), rel_change), ...]``
    when the doubled dimension would exceed the composite cap.
    """
    if spec.kind == "two-qubit":
        raise ModelError("truncation_check applies to models with oscillator modes")
    trace = []
    d = max(2, d_start)
    while True:
        try:
            big = spec.with_(fock_dim=2 * d)
        except ModelError as exc:
            raise TruncationError(f"no convergence below the dimension cap: {exc}", trace) from exc
        o_small = observable(build(spec.with_(fock_dim=d)))
        o_big = observable(build(big))
        rel = abs(o_big - o_small) / max(abs(o_big), np.finfo(float).tiny)
        trace.append((d, o_small, o_big, rel))
        if rel < tol:
            return d
        d += 1
