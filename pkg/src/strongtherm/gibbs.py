"""Thermal states, partition functions and the weak-coupling canonical report."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from .operators import Spectrum, SubsystemSplit, eig_hermitian, hermitian, partial_trace

BETA_RANGE = (1e-3, 100.0)


@dataclass(frozen=True)
class ThermalEnsemble:
    """Gibbs ensemble ``exp(-beta H)/Z`` built on a cached spectrum.

    All beta-derivatives of ``ln Z`` are spectral sums; nothing here uses
    finite differences.
    """

    beta: float
    spectrum: Spectrum

    @classmethod
    def of(cls, H: np.ndarray, beta: float) -> "ThermalEnsemble":
        return cls(float(beta), eig_hermitian(H))

    def at(self, beta: float) -> "ThermalEnsemble":
        return ThermalEnsemble(float(beta), self.spectrum)

    @cached_property
    def log_partition(self) -> float:
        return float(logsumexp(-self.beta * self.spectrum.eigenvalues))

    @cached_property
    def weights(self) -> np.ndarray:
        """Boltzmann probabilities of the eigenstates."""
        return np.exp(-self.beta * self.spectrum.eigenvalues - self.log_partition)

    @property
    def free_energy(self) -> float:
        return -self.log_partition / self.beta

    @cached_property
    def energy(self) -> float:
        return float(self.weights @ self.spectrum.eigenvalues)

    @cached_property
    def energy_variance(self) -> float:
        dE = self.spectrum.eigenvalues - self.energy
        return float(self.weights @ dE**2)

    @property
    def entropy(self) -> float:
        return self.beta * (self.energy - self.free_energy)

    @property
    def heat_capacity(self) -> float:
        return self.beta**2 * self.energy_variance

    @cached_property
    def state(self) -> np.ndarray:
        return hermitian(self.spectrum.apply(self.weights))

    def expect(self, op: np.ndarray) -> float:
        """``Tr(rho op)`` evaluated in the eigenbasis."""
        U = self.spectrum.eigenvectors
        diag = np.einsum("in,ij,jn->n", U.conj(), op, U).real
        return float(self.weights @ diag)


def log_partition(H: np.ndarray, beta: float) -> float:
    """``ln Tr exp(-beta H)`` with the max-exponent shift."""
    return ThermalEnsemble.of(H, beta).log_partition


def thermal_state(H: np.ndarray, beta: float) -> np.ndarray:
    return ThermalEnsemble.of(H, beta).state


def reduced_state(rho: np.ndarray, split: SubsystemSplit, keep) -> np.ndarray:
    r = partial_trace(rho, split, keep)
    if np.ndim(r) == 0:
        return np.array([[r / r]], dtype=complex)
    r = hermitian(r)
    return r / np.trace(r).real


@dataclass(frozen=True)
class CanonicalReport:
    beta: float
    Z: float
    F: float
    U: float
    S: float
    C: float


def canonical_report(H_s: np.ndarray, beta: float) -> CanonicalReport:
    th = ThermalEnsemble.of(H_s, beta)
    return CanonicalReport(
        beta=float(beta),
        Z=float(np.exp(th.log_partition)),
        F=th.free_energy,
        U=th.energy,
        S=th.entropy,
        C=th.heat_capacity,
    )
