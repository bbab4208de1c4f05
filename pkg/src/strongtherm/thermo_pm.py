"""System thermodynamics from the mean-force partition function ``Z* = Z_c / Z_b``.

Every system quantity here is a composite value minus a free-bath value; the
entropy is ``beta^2 d_beta F*`` rather than the von Neumann entropy of the
reduced state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .calculus import DerivativeConfig, param_derivative
from .mean_force import MeanForce
from .operators import SubsystemSplit, eig_hermitian, hermitian, kron, partial_trace
from .thermo_gt import gt_report, vn_entropy

log = logging.getLogger(__name__)

LOG_FLOOR = 1e-300


def _log_psd(rho: np.ndarray) -> np.ndarray:
    spec = eig_hermitian(rho)
    p = spec.eigenvalues
    small = p < LOG_FLOOR
    if small.any():
        log.debug("log of density operator: %d eigenvalues clamped to %.0e", int(small.sum()), LOG_FLOOR)
    return spec.apply(np.log(np.where(small, LOG_FLOOR, p)))


def mutual_information(rho_c: np.ndarray, split: SubsystemSplit, route: str = "relative-entropy") -> float:
    """Quantum mutual information between factor 0 and the remaining factors.

    ``route="relative-entropy"`` evaluates ``S(rho_c || rho_s x rho_b)``
    with matrix logarithms; ``route="entropies"`` uses ``S_s + S_b - S_c``.
    """
    rho_c = hermitian(rho_c)
    d_s = split.dims[0]
    rest = list(range(1, len(split)))
    rho_s = partial_trace(rho_c, split, [0])
    rho_b = partial_trace(rho_c, split, rest)
    if route == "entropies":
        return vn_entropy(rho_s) + vn_entropy(rho_b) - vn_entropy(rho_c)
    if route != "relative-entropy":
        raise ValueError(f"unknown route {route!r}")
    d_b = split.dim // d_s
    log_product = kron(_log_psd(rho_s), np.eye(d_b)) + kron(np.eye(d_s), _log_psd(rho_b))
    return float(np.real(np.sum(rho_c * (_log_psd(rho_c) - log_product).T)))


@dataclass(frozen=True)
class EnergyDecomposition:
    H_s: float
    H_i: float
    H_b: float  # includes the drive term J A_b when present
    H_b_free: float  # free-bath mean of the same operator

    @property
    def total(self) -> float:
        return self.H_s + self.H_i + self.H_b - self.H_b_free


@dataclass(frozen=True)
class PMReport:
    beta: float
    F_star: float
    S_s: float  # beta^2 d_beta F*
    S_s_expectation: float  # S_vN + beta^2 <d_beta H*>
    S_vN: float
    entropy_gap: float  # beta^2 <d_beta H*>
    U_s_pm: float  # -d_beta ln Z*
    decomposition: EnergyDecomposition
    C_s_pm: float  # route (a)
    C_routes: tuple[float, float, float]
    S_c: float
    S_b: float
    S_b_prime: float
    I_sb: float
    I_sb_relative_entropy: float
    corr_lhs: float
    corr_rhs_symmetric: float
    corr_rhs_left: float
    corr_imag_left: float
    fd_error: dict

    @property
    def C_spread(self) -> float:
        return float(max(self.C_routes) - min(self.C_routes))

    @property
    def corr_residual(self) -> float:
        return min(abs(self.corr_lhs - self.corr_rhs_symmetric), abs(self.corr_lhs - self.corr_rhs_left))

    @property
    def additivity_residual(self) -> float:
        return abs(self.S_s + self.S_b - self.S_c)

    @property
    def mi_decomposition_residual(self) -> float:
        return abs(self.I_sb - ((self.S_b_prime - self.S_b) + (self.S_vN - self.S_s)))


def energy_decomposition(mf: MeanForce, beta: float) -> EnergyDecomposition:
    J = mf.model.J
    H_bath_c = mf.composite_mean("H_b", beta) + J * mf.composite_mean("A_b", beta)
    return EnergyDecomposition(
        H_s=mf.composite_mean("H_s", beta),
        H_i=mf.composite_mean("H_i", beta),
        H_b=H_bath_c,
        H_b_free=mf.bath(beta).energy,
    )


def _system_entropy(mf: MeanForce, beta: float) -> float:
    return mf.composite(beta).entropy - mf.bath(beta).entropy


def pm_report(mf: MeanForce, beta: float, cfg: DerivativeConfig = DerivativeConfig(parameter="beta")) -> PMReport:
    beta = float(beta)
    res = mf.at(beta)
    comp, bath = mf.composite(beta), mf.bath(beta)

    S_vN = vn_entropy(res.rho_s)
    dF = param_derivative(mf.F_star, beta, cfg)
    dH = param_derivative(mf.H_star, beta, cfg, norm=lambda D: abs(res.expect(D)))
    S_s = beta**2 * dF.value
    gap = beta**2 * res.expect(np.asarray(dH.value))

    dlogZ = param_derivative(mf.log_Z_star, beta, cfg)
    U_pm = -dlogZ.value
    dec = energy_decomposition(mf, beta)

    dU = param_derivative(lambda b: energy_decomposition(mf, b).total, beta, cfg)
    dS = param_derivative(lambda b: _system_entropy(mf, b), beta, cfg)
    C_a = -(beta**2) * dU.value
    C_b = beta**2 * (comp.energy_variance - bath.energy_variance)
    C_c = -beta * dS.value

    rho_c = comp.state
    S_b_prime = vn_entropy(partial_trace(rho_c, mf.model.bipartite, [1]))
    I_sb = S_vN + S_b_prime - comp.entropy
    I_rel = mutual_information(rho_c, mf.model.bipartite)

    # Correlation form of the entropy gap, T (S_s - S_vN)
    H_star_c = kron(res.H_star, np.eye(mf.d_b))
    H_c = mf.model.H_c
    d_mean_H_star = param_derivative(lambda b: (m := mf.at(b)).expect(m.H_star), beta, cfg)
    mean_Hc = comp.energy
    mean_H_star = res.expect(res.H_star)
    left = np.sum(rho_c * (H_c @ H_star_c).T)
    sym = np.real(np.sum(rho_c * ((H_c @ H_star_c + H_star_c @ H_c) / 2).T))
    corr_lhs = (S_s - S_vN) / beta
    rhs_base = beta * d_mean_H_star.value - beta * mean_Hc * mean_H_star

    return PMReport(
        beta=beta,
        F_star=res.F_star,
        S_s=float(S_s),
        S_s_expectation=float(S_vN + gap),
        S_vN=S_vN,
        entropy_gap=float(gap),
        U_s_pm=float(U_pm),
        decomposition=dec,
        C_s_pm=float(C_a),
        C_routes=(float(C_a), float(C_b), float(C_c)),
        S_c=comp.entropy,
        S_b=bath.entropy,
        S_b_prime=S_b_prime,
        I_sb=float(I_sb),
        I_sb_relative_entropy=I_rel,
        corr_lhs=float(corr_lhs),
        corr_rhs_symmetric=float(rhs_base + beta * sym),
        corr_rhs_left=float(rhs_base + beta * left.real),
        corr_imag_left=float(abs(left.imag)),
        fd_error={
            "S_s": beta**2 * dF.error,
            "entropy_gap": beta**2 * dH.error,
            "U_s_pm": dlogZ.error,
            "C_a": beta**2 * dU.error,
            "C_c": beta * dS.error,
            "corr": beta * d_mean_H_star.error + beta * dF.error,
        },
    )


def gt_pm_energy_gap(mf: MeanForce, beta: float, cfg: DerivativeConfig = DerivativeConfig(parameter="beta")):
    """``-beta^2 d_beta [<H_i> + <H_b> - <H_b>_b]`` and the capacity difference it should equal.

    Returns ``(gap, C_pm - C_gt, fd_error)``.
    """

    def excess(b):
        d = energy_decomposition(mf, b)
        return d.H_i + d.H_b - d.H_b_free

    d = param_derivative(excess, beta, cfg)
    gap = -(beta**2) * d.value
    pm = pm_report(mf, beta, cfg)
    gt = gt_report(mf, beta, cfg)
    return float(gap), pm.C_s_pm - gt.C_s_gt, beta**2 * d.error + pm.fd_error["C_a"] + gt.fd_error["C_s_gt"]
