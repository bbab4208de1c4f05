"""Dense Hermitian matrix kernel.

Operators are plain complex ``numpy`` arrays. Units: hbar = k_B = 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .errors import DimensionError, EigenDecompositionError, NotPositiveDefiniteError

log = logging.getLogger(__name__)

MAX_DIM = 4096

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def asymmetry(M: np.ndarray) -> float:
    """Frobenius norm of the anti-Hermitian part."""
    return float(np.linalg.norm(M - M.conj().T) / 2)


def hermitian(M, name: str | None = None) -> np.ndarray:
    """Return ``(M + M^dagger)/2`` as a complex array; logs the discarded asymmetry."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {M.shape[0]} exceeds cap {MAX_DIM}")
    H = (M + M.conj().T) / 2
    asym = asymmetry(M)
    if asym > 1e-12 * max(1.0, float(np.linalg.norm(H))):
        log.debug("symmetrized %s: asymmetry norm %.3e", name or "operator", asym)
    return H


@dataclass(frozen=True)
class Spectrum:
    """Eigensystem of a Hermitian matrix: ascending eigenvalues, eigenvectors in columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def apply(self, values: np.ndarray) -> np.ndarray:
        """``U diag(values) U^dagger``."""
        U = self.eigenvectors
        return (U * values) @ U.conj().T

    def reconstruct(self) -> np.ndarray:
        return self.apply(self.eigenvalues)

    def function(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return self.apply(f(self.eigenvalues))


def eig_hermitian(H: np.ndarray) -> Spectrum:
    H = np.asarray(H, dtype=complex)
    if not np.all(np.isfinite(H)):
        raise EigenDecompositionError("matrix has non-finite entries")
    try:
        w, U = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure is hard to provoke
        raise EigenDecompositionError(f"eigh did not converge for dim {H.shape[0]}: {exc}") from exc
    return Spectrum(w, U)


def reconstruction_residual(H: np.ndarray, spec: Spectrum) -> float:
    norm = np.linalg.norm(H)
    return float(np.linalg.norm(spec.reconstruct() - H) / (norm if norm > 0 else 1.0))


def hermitian_function(H: np.ndarray, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    return eig_hermitian(H).function(f)


def exp_scaled(H: np.ndarray, beta: float) -> tuple[np.ndarray, float]:
    """Return ``(E, shift)`` with ``exp(-beta H) = exp(shift) * E``.

    The exponent is shifted by its maximum, so the largest eigenvalue of ``E`` is 1.
    """
    spec = eig_hermitian(H)
    x = -beta * spec.eigenvalues
    shift = float(x.max())
    return spec.apply(np.exp(x - shift)), shift


def expm_hermitian(H: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """``exp(scale * H)`` without shifting."""
    return eig_hermitian(H).function(lambda w: np.exp(scale * w))


def logm_hermitian(H: np.ndarray) -> np.ndarray:
    spec = eig_hermitian(H)
    lo = float(spec.eigenvalues[0])
    if lo <= 0.0:
        raise NotPositiveDefiniteError("matrix logarithm of a non-positive-definite operator", lo)
    return spec.function(np.log)


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    if out.shape[0] > MAX_DIM:
        raise DimensionError(f"tensor product dimension {out.shape[0]} exceeds cap {MAX_DIM}")
    return out


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


@dataclass(frozen=True)
class SubsystemSplit:
    """Ordered factor dimensions of a tensor-product space."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("a split needs at least one factor")
        if any(d < 2 for d in dims):
            raise DimensionError(f"all factor dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self) -> int:
        return len(self.dims)

    def check(self, M: np.ndarray) -> None:
        if M.shape != (self.dim, self.dim):
            raise DimensionError(f"operator shape {M.shape} does not match split {self.dims} (dim {self.dim})")


def partial_trace(M: np.ndarray, split: SubsystemSplit, keep: Iterable[int]):
    """Trace out every factor not listed in ``keep``.

    ``keep`` is a set of factor indices; the kept factors stay in their original
    order. An empty ``keep`` returns the full trace as a scalar.
    """
    split.check(M)
    keep = sorted(set(int(k) for k in keep))
    n = len(split)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} factors")
    if not keep:
        return complex(np.trace(M))
    if len(keep) == n:
        return np.array(M, dtype=complex)
    dims = split.dims
    traced = [i for i in range(n) if i not in keep]
    d_keep = int(np.prod([dims[i] for i in keep]))
    d_tr = int(np.prod([dims[i] for i in traced]))
    if n == 2:
        return kernels.ptrace_bipartite(M, dims[0], dims[1], keep[0] == 0)
    order = keep + traced
    T = np.asarray(M, dtype=complex).reshape(dims + dims)
    T = T.transpose(order + [n + i for i in order]).reshape(d_keep * d_tr, d_keep * d_tr)
    return kernels.ptrace_bipartite(np.ascontiguousarray(T), d_keep, d_tr, True)


def embed(op: np.ndarray, slot: int, split: SubsystemSplit) -> np.ndarray:
    """Lift a single-factor operator into the composite space (identity elsewhere)."""
    if not 0 <= slot < len(split):
        raise DimensionError(f"slot {slot} out of range for {len(split)} factors")
    if op.shape != (split.dims[slot], split.dims[slot]):
        raise DimensionError(f"operator shape {op.shape} does not fit factor {slot} of {split.dims}")
    factors = [np.eye(d, dtype=complex) for d in split.dims]
    factors[slot] = np.asarray(op, dtype=complex)
    return kron(*factors)


def check_density(rho: np.ndarray, tol: float = 1e-12) -> None:
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density operator has trace {tr!r}")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -tol:
        raise NotPositiveDefiniteError("density operator is not positive semidefinite", lo)


def expectation(rho: np.ndarray, op: np.ndarray) -> float:
    """``Re Tr(rho op)`` via an elementwise product (no matrix multiply)."""
    return float(np.real(np.sum(rho * op.T)))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return hermitian(scale * (X + X.conj().T) / 2)
