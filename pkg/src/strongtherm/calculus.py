"""Parameter derivatives and operator-product calculus.

Covers central differences with Richardson extrapolation, symmetrized
operator products, the series for the derivative of ``exp(-O(chi))``,
the full-trace derivative identity and truncated BCH / adjoint expansions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import DerivativeError
from .operators import commutator, partial_trace

PARAMETERS = ("beta", "J", "P", "g", "chi")


@dataclass(frozen=True)
class DerivativeConfig:
    h_rel: float = 1e-4
    levels: int = 3
    parameter: str = "chi"
    h_min: float = 1e-6

    def __post_init__(self):
        if not 1e-8 <= self.h_rel <= 1e-2:
            raise ValueError(f"h_rel must lie in [1e-8, 1e-2], got {self.h_rel}")
        if not 1 <= self.levels <= 5:
            raise ValueError(f"levels must lie in [1, 5], got {self.levels}")
        if self.parameter not in PARAMETERS:
            raise ValueError(f"unknown parameter {self.parameter!r}")

    def step(self, x0: float) -> float:
        return max(self.h_rel * abs(x0), self.h_min)


@dataclass(frozen=True)
class Derivative:
    value: float | np.ndarray
    error: float


def _finite(v) -> bool:
    return bool(np.all(np.isfinite(v)))


def param_derivative(
    f: Callable, x0: float, cfg: DerivativeConfig = DerivativeConfig(), norm: Callable | None = None
) -> Derivative:
    """Central difference of ``f`` at ``x0`` refined by Richardson extrapolation.

    ``f`` may return a scalar or an array. The error estimate is the
    difference between the two highest extrapolation levels, measured by
    ``norm`` when given and by its largest absolute entry otherwise.
    """
    h = cfg.step(x0)
    rows = cfg.levels + 1
    table: list[list] = []
    for i in range(rows):
        hi = h / 2**i
        fp, fm = f(x0 + hi), f(x0 - hi)
        if not _finite(fp):
            raise DerivativeError(x0 + hi)
        if not _finite(fm):
            raise DerivativeError(x0 - hi)
        row = [(np.asarray(fp) - np.asarray(fm)) / (2 * hi)]
        for k in range(1, i + 1):
            row.append(row[k - 1] + (row[k - 1] - table[i - 1][k - 1]) / (4**k - 1))
        table.append(row)
    best = table[-1][-1]
    diff = best - table[-2][-2]
    err = float(np.max(np.abs(diff))) if norm is None else float(norm(diff))
    if np.ndim(best) == 0:
        best = float(np.real_if_close(best)) if np.isrealobj(best) else complex(best)
    return Derivative(best, err)


def symmetrized_product(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Average of the product over all ``k!`` orderings (``k <= 8``)."""
    k = len(ops)
    if k == 0:
        raise ValueError("need at least one operator")
    if k > 8:
        raise ValueError(f"symmetrized product of {k} operators needs {math.factorial(k)} orderings; limit is 8")
    shape = ops[0].shape
    if any(op.shape != shape for op in ops) or shape[0] != shape[1]:
        raise ValueError("operators must be square and of equal dimension")
    total = np.zeros(shape, dtype=complex)
    count = 0
    for perm in itertools.permutations(range(k)):
        total += reduce(np.matmul, (ops[i] for i in perm))
        count += 1
    return total / count


@dataclass(frozen=True)
class DexpResult:
    matrix: np.ndarray
    term_norms: list[float]
    converged: bool

    @property
    def tail_norm(self) -> float:
        return self.term_norms[-1]


def dexp_series(
    O: Callable[[float], np.ndarray],
    chi0: float,
    K: int = 20,
    dO: np.ndarray | None = None,
    cfg: DerivativeConfig = DerivativeConfig(),
    rtol: float = 1e-15,
) -> DexpResult:
    """Partial sum of ``d/dchi exp(-O)`` as a series of symmetrized products.

    Term ``k`` is ``-(-1)^(k-1)/(k-1)! [dO O^(k-1)]_sym``; the symmetrized
    product of one ``dO`` and ``k-1`` copies of ``O`` is the average over the
    ``k`` positions of ``dO``, accumulated here by the recursion
    ``S_(k+1) = O S_k + dO O^k``.
    """
    if K < 1 or K > 20:
        raise ValueError(f"K must lie in [1, 20], got {K}")
    O0 = np.asarray(O(chi0), dtype=complex)
    if dO is None:
        dO = np.asarray(param_derivative(O, chi0, cfg).value, dtype=complex)
    S = dO.copy()  # sum_j O^j dO O^(k-1-j) at k = 1
    Opow = np.eye(O0.shape[0], dtype=complex)  # O^(k-1)
    total = np.zeros_like(O0)
    norms = []
    converged = False
    for k in range(1, K + 1):
        term = -((-1) ** (k - 1)) / math.factorial(k) * S
        total = total + term
        norms.append(float(np.linalg.norm(term)))
        if norms[-1] <= rtol * max(np.linalg.norm(total), 1.0):
            converged = True
            break
        Opow = Opow @ O0
        S = O0 @ S + dO @ Opow
    return DexpResult(total, norms, converged)


def expm_neg(O: np.ndarray) -> np.ndarray:
    return scipy.linalg.expm(-np.asarray(O, dtype=complex))


@dataclass(frozen=True)
class TraceDerivativeCheck:
    residual: float
    lhs: float  # finite difference of Tr exp(-O)
    rhs: float  # -Tr(dO exp(-O))
    fd_error: float


def trace_derivative_check(
    O: Callable[[float], np.ndarray], chi0: float, cfg: DerivativeConfig = DerivativeConfig()
) -> TraceDerivativeCheck:
    lhs = param_derivative(lambda c: np.trace(expm_neg(O(c))).real, chi0, cfg)
    E = expm_neg(O(chi0))
    dO = param_derivative(O, chi0, cfg, norm=lambda D: abs(np.trace(D @ E)))
    rhs = -np.trace(np.asarray(dO.value) @ E).real
    return TraceDerivativeCheck(abs(lhs.value - rhs), float(lhs.value), float(rhs), lhs.error + dO.error)


def partial_trace_derivative_gap(
    O: Callable[[float], np.ndarray], chi0: float, split, keep, cfg: DerivativeConfig = DerivativeConfig()
) -> float:
    """Norm of ``Tr_k d exp(-O) + Tr_k (dO exp(-O))`` for a partial trace.

    Generically nonzero: the cyclic argument that makes the full-trace identity
    work does not survive a partial trace.
    """
    lhs = param_derivative(lambda c: partial_trace(expm_neg(O(c)), split, keep), chi0, cfg).value
    dO = param_derivative(O, chi0, cfg).value
    rhs = -partial_trace(np.asarray(dO) @ expm_neg(O(chi0)), split, keep)
    return float(np.linalg.norm(lhs - rhs))


def bch_truncated(A: np.ndarray, B: np.ndarray, order: int) -> np.ndarray:
    """Exponent ``Z`` of ``exp(A) exp(B) = exp(Z)`` up to third order in (A, B)."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if A.shape != B.shape:
        raise ValueError("A and B must have the same shape")
    Z = A + B
    if order >= 2:
        AB = commutator(A, B)
        Z = Z + AB / 2
    if order >= 3:
        Z = Z + (commutator(A, AB) + commutator(AB, B)) / 12
    return Z


def adjoint_expansion(lam: np.ndarray, mu: np.ndarray, order: int) -> np.ndarray:
    """``sum_{n<=order} ad_lam^n(mu)/n!``, the truncation of ``exp(lam) mu exp(-lam)``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    term = np.asarray(mu, dtype=complex)
    total = term.copy()
    for n in range(1, order + 1):
        term = commutator(lam, term) / n
        total = total + term
    return total


def loglog_slope(scales: np.ndarray, errors: np.ndarray) -> float:
    """Least-squares slope of ``log(error)`` against ``log(scale)``."""
    slope, _ = np.polyfit(np.log(scales), np.log(errors), 1)
    return float(slope)
