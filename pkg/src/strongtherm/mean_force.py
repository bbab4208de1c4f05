"""Hamiltonian of mean force and the quantities derived from it.

``exp(-beta H*) = Tr_b exp(-beta H_c) / Z_b`` is evaluated from a single
cached eigendecomposition of ``H_c``; every temperature reuses it. The bath
reference ``Z_b`` is the free bath ``H_b + J A_b`` on its own space.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .errors import NotPositiveDefiniteError
from .gibbs import ThermalEnsemble
from .models import CompositeHamiltonian
from .operators import Spectrum, eig_hermitian, hermitian, partial_trace

log = logging.getLogger(__name__)

# Eigenvalues of the reduced Boltzmann operator below this fraction of the
# largest are replaced before taking the log. Smaller values are either true
# deep-tail weights (kept) or rounding noise (clamped up to this floor).
CLAMP_FLOOR = 1e-280
NEGATIVE_TOL = 1e-10


@dataclass(frozen=True)
class ClampDiagnostics:
    min_raw_eigenvalue: float  # relative to the largest eigenvalue
    n_clamped: int
    n_unresolved: int  # eigenvalues below dim * eps, i.e. at rounding level


@dataclass(frozen=True)
class MeanForceResult:
    beta: float
    H_s: np.ndarray
    H_star: np.ndarray
    delta_s: np.ndarray
    log_Z_star: float
    log_Z_c: float
    log_Z_b: float
    rho_s: np.ndarray  # Tr_b of the global Gibbs state, computed directly
    residual_state: float
    residual_partition: float
    diagnostics: ClampDiagnostics = field(compare=False)

    @property
    def F_star(self) -> float:
        return -self.log_Z_star / self.beta

    @property
    def F_b(self) -> float:
        return -self.log_Z_b / self.beta

    @property
    def F_c(self) -> float:
        return -self.log_Z_c / self.beta

    def expect(self, op: np.ndarray) -> float:
        """System-space expectation against ``rho_s``."""
        return float(np.real(np.sum(self.rho_s * op.T)))


class MeanForce:
    """Mean-force evaluator bound to one composite Hamiltonian.

    The composite and free-bath spectra are computed once; all methods taking
    ``beta`` are cheap afterwards, which is what the finite-difference
    stencils rely on.
    """

    def __init__(self, model: CompositeHamiltonian):
        self.model = model
        self.d_s = model.d_s
        self.d_b = model.d_b
        self.H_s = model.system_local(model.H_s)
        self.H_bath = model.bath_local(model.H_bath_total)
        self.composite_spectrum: Spectrum = eig_hermitian(model.H_c)
        self.bath_spectrum: Spectrum = eig_hermitian(self.H_bath)
        self._diag_cache: dict[str, np.ndarray] = {}

    # --- ensembles -----------------------------------------------------------

    def composite(self, beta: float) -> ThermalEnsemble:
        return ThermalEnsemble(float(beta), self.composite_spectrum)

    def bath(self, beta: float) -> ThermalEnsemble:
        return ThermalEnsemble(float(beta), self.bath_spectrum)

    def composite_diagonal(self, name: str) -> np.ndarray:
        """Diagonal of a named composite block in the ``H_c`` eigenbasis.

        ``name`` is one of ``H_s, H_i, H_b, A_b, H_c``. Expectations at any
        beta are then a dot product with the Boltzmann weights.
        """
        if name not in self._diag_cache:
            op = self.model.H_c if name == "H_c" else getattr(self.model, name)
            U = self.composite_spectrum.eigenvectors
            self._diag_cache[name] = np.einsum("in,ij,jn->n", U.conj(), op, U).real
        return self._diag_cache[name]

    def composite_mean(self, name: str, beta: float) -> float:
        return float(self.composite(beta).weights @ self.composite_diagonal(name))

    def bath_mean(self, op_b: np.ndarray, beta: float) -> float:
        return self.bath(beta).expect(op_b)

    # --- reduced Boltzmann operator -----------------------------------------

    def reduced_boltzmann(self, beta: float) -> tuple[np.ndarray, float]:
        """``(M, E0)`` with ``Tr_b exp(-beta H_c) = exp(-beta E0) M``."""
        E = self.composite_spectrum.eigenvalues
        E0 = float(E[0])
        w = np.exp(-beta * (E - E0))
        M = kernels.reduced_boltzmann(self.composite_spectrum.eigenvectors, w, self.d_s, self.d_b)
        return hermitian(M, "reduced Boltzmann operator"), E0

    def _log_reduced(self, beta: float) -> tuple[Spectrum, float, ClampDiagnostics]:
        M, E0 = self.reduced_boltzmann(beta)
        spec = eig_hermitian(M)
        lam = spec.eigenvalues
        top = float(lam[-1])
        rel_min = float(lam[0]) / top
        if rel_min < -NEGATIVE_TOL:
            raise NotPositiveDefiniteError(
                f"reduced Boltzmann operator at beta={beta} is not positive definite; "
                "raise the Fock truncation or lower beta",
                rel_min,
            )
        floor = top * CLAMP_FLOOR
        clamped = lam < floor
        diag = ClampDiagnostics(
            min_raw_eigenvalue=rel_min,
            n_clamped=int(clamped.sum()),
            n_unresolved=int((lam < top * lam.size * np.finfo(float).eps).sum()),
        )
        if diag.n_clamped:
            log.debug("beta=%g: clamped %d eigenvalues of the reduced Boltzmann operator", beta, diag.n_clamped)
        return Spectrum(np.where(clamped, floor, lam), spec.eigenvectors), E0, diag

    def H_star(self, beta: float) -> np.ndarray:
        spec, E0, _ = self._log_reduced(beta)
        return self._H_star_from(spec, E0, beta)

    def _H_star_from(self, spec: Spectrum, E0: float, beta: float) -> np.ndarray:
        log_Zb = self.bath(beta).log_partition
        return hermitian(spec.apply(-np.log(spec.eigenvalues) / beta + E0 + log_Zb / beta), "H*")

    def delta(self, beta: float) -> np.ndarray:
        """``H* - H_s + F_b``."""
        F_b = self.bath(beta).free_energy
        return self.H_star(beta) - self.H_s + F_b * np.eye(self.d_s)

    def log_Z_star(self, beta: float) -> float:
        return self.composite(beta).log_partition - self.bath(beta).log_partition

    def F_star(self, beta: float) -> float:
        return -self.log_Z_star(beta) / beta

    def rho_s(self, beta: float) -> np.ndarray:
        """Reduced state from the full composite Gibbs matrix (no shortcut through ``M``)."""
        rho_c = self.composite(beta).state
        r = hermitian(partial_trace(rho_c, self.model.bipartite, [0]))
        return r / np.trace(r).real

    def at(self, beta: float) -> MeanForceResult:
        beta = float(beta)
        spec, E0, diag = self._log_reduced(beta)
        H_star = self._H_star_from(spec, E0, beta)
        comp, bath = self.composite(beta), self.bath(beta)

        h = eig_hermitian(H_star)
        log_Z_star = float(logsumexp(-beta * h.eigenvalues))
        p = np.exp(-beta * h.eigenvalues - log_Z_star)
        rho_mf = h.apply(p)
        rho_s = self.rho_s(beta)

        log_ratio = log_Z_star + bath.log_partition - comp.log_partition
        return MeanForceResult(
            beta=beta,
            H_s=self.H_s,
            H_star=H_star,
            delta_s=H_star - self.H_s + bath.free_energy * np.eye(self.d_s),
            log_Z_star=log_Z_star,
            log_Z_c=comp.log_partition,
            log_Z_b=bath.log_partition,
            rho_s=rho_s,
            residual_state=float(np.linalg.norm(rho_s - rho_mf)),
            residual_partition=float(abs(np.expm1(log_ratio))),
            diagnostics=diag,
        )


def hamiltonian_of_mean_force(model: CompositeHamiltonian, beta: float) -> MeanForceResult:
    return MeanForce(model).at(beta)


def delta_s(model: CompositeHamiltonian, beta: float) -> np.ndarray:
    return MeanForce(model).at(beta).delta_s
