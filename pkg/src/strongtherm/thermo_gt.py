"""System thermodynamics built on the bare system energy ``<H_s>`` and the von Neumann entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import DerivativeConfig, param_derivative
from .mean_force import MeanForce

EIG_FLOOR = 1e-14


def vn_entropy(rho: np.ndarray) -> float:
    """``-sum p ln p`` over the spectrum; eigenvalues below 1e-14 count as zero."""
    p = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    p = p[p > EIG_FLOOR]
    return float(-(p * np.log(p)).sum())


def entropy_of_weights(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


@dataclass(frozen=True)
class GTReport:
    beta: float
    U_s_gt: float
    U_s_composite: float  # Tr rho_c (H_s x I), second route to U_s_gt
    S_vN: float
    S_vN_mean_force: float  # from the spectrum of H*, second route to S_vN
    F_c: float
    F_star: float
    mean_delta: float
    mean_ddelta: float  # <d_beta Delta>, state held fixed
    d_mean_delta: float  # d_beta <Delta>
    C_s_gt: float  # -beta^2 d_beta U_s_gt
    C_s_gt_bracket: float  # -beta d_beta S_vN - beta^2 (<d Delta> - d<Delta>)
    residual_relation: float
    S_nonadditivity: float
    fd_error: dict

    @property
    def residual_capacity(self) -> float:
        return abs(self.C_s_gt - self.C_s_gt_bracket)


def gt_report(mf: MeanForce, beta: float, cfg: DerivativeConfig = DerivativeConfig(parameter="beta")) -> GTReport:
    beta = float(beta)
    res = mf.at(beta)
    rho_s = res.rho_s
    comp, bath = mf.composite(beta), mf.bath(beta)

    U = res.expect(mf.H_s)
    S_vN = vn_entropy(rho_s)
    h = np.linalg.eigvalsh(res.H_star)
    S_mf = entropy_of_weights(np.exp(-beta * h - res.log_Z_star))

    mean_delta = res.expect(res.delta_s)
    dDelta = param_derivative(mf.delta, beta, cfg, norm=lambda D: abs(res.expect(D)))
    mean_ddelta = res.expect(np.asarray(dDelta.value))
    d_mean = param_derivative(lambda b: _mean_delta(mf, b), beta, cfg)
    dF_c = (comp.energy - comp.free_energy) / beta

    relation = abs(res.F_c - (U + mean_delta + beta * mean_ddelta - beta * dF_c))

    dU = param_derivative(lambda b: mf.at(b).expect(mf.H_s), beta, cfg)
    dS = param_derivative(lambda b: vn_entropy(mf.rho_s(b)), beta, cfg)
    C = -(beta**2) * dU.value
    C_bracket = -beta * dS.value - beta**2 * (mean_ddelta - d_mean.value)

    return GTReport(
        beta=beta,
        U_s_gt=U,
        U_s_composite=mf.composite_mean("H_s", beta),
        S_vN=S_vN,
        S_vN_mean_force=S_mf,
        F_c=res.F_c,
        F_star=res.F_star,
        mean_delta=mean_delta,
        mean_ddelta=mean_ddelta,
        d_mean_delta=float(d_mean.value),
        C_s_gt=float(C),
        C_s_gt_bracket=float(C_bracket),
        residual_relation=float(relation),
        S_nonadditivity=abs(S_vN + bath.entropy - comp.entropy),
        fd_error={
            "relation": beta * dDelta.error,
            "d_mean_delta": d_mean.error,
            "C_s_gt": beta**2 * dU.error,
            "C_s_gt_bracket": beta * dS.error + beta**2 * (dDelta.error + d_mean.error),
        },
    )


def _mean_delta(mf: MeanForce, beta: float) -> float:
    res = mf.at(beta)
    return res.expect(res.delta_s)
