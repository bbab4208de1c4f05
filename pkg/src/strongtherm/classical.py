"""Classical system + bath under external pressure, solved by quadrature or in closed form.

Model
-----
System: one oscillator ``H_s = p^2/2 + omega_s^2 q^2/2``.
Bath: ``N <= 3`` oscillators ``q_k`` and a piston coordinate ``v`` with
``H_b = sum(p_k^2/2 + omega_k^2 q_k^2/2) + p_v^2/2 + kappa v^2/2`` and bath
volume ``V_b = v0 + a v``.
Coupling: ``H_i = q (sum g_k q_k + lam v) + mu q^2 v^2 / 2``.

Every bath integral is Gaussian for fixed ``q`` (the ``mu`` term only shifts
the piston curvature), so the conditional moments are exact one-dimensional
sums. The outer ``q`` integral is Gaussian only for ``mu = 0``; that case also
has a fully closed form, used as the reference.

Phase-space measures carry no ``2 pi hbar`` factors; entropies are
differential entropies.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import logsumexp

from . import kernels
from .calculus import DerivativeConfig, param_derivative
from .errors import ModelError, QuadratureError

METHODS = ("quadrature", "closed-form")
QUAD_RTOL = 1e-10


@lru_cache(maxsize=8)
def _gh(order: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = hermgauss(order)
    return t, np.log(w)


@dataclass(frozen=True)
class ClassicalModel:
    omega_s: float = 1.0
    omega_b: tuple[float, ...] = (1.0,)
    couplings: tuple[float, ...] = (0.5,)
    kappa: float = 1.0
    v0: float = 1.0
    a: float = 1.0
    lam: float = 0.4
    mu: float = 0.0
    order: int = 64

    def __post_init__(self):
        object.__setattr__(self, "omega_b", tuple(float(w) for w in np.atleast_1d(self.omega_b)))
        object.__setattr__(self, "couplings", tuple(float(g) for g in np.atleast_1d(self.couplings)))
        if not 1 <= len(self.omega_b) <= 3:
            raise ModelError("the classical bath has between 1 and 3 oscillator modes")
        if len(self.omega_b) != len(self.couplings):
            raise ModelError(f"{len(self.omega_b)} bath frequencies but {len(self.couplings)} couplings")
        if self.omega_s <= 0 or any(w <= 0 for w in self.omega_b) or self.kappa <= 0:
            raise ModelError("frequencies and the piston stiffness must be positive")
        if self.a <= 0:
            raise ModelError("volume slope a must be positive")
        if self.mu < 0:
            raise ModelError("quartic coupling mu must be non-negative")
        if self.order < 8:
            raise ModelError("Gauss-Hermite order must be at least 8")
        lo = float(np.linalg.eigvalsh(self.stiffness)[0])
        if lo <= 0:
            raise ModelError(f"quadratic form is not positive definite (lowest eigenvalue {lo:.3e})")

    @property
    def n_modes(self) -> int:
        return len(self.omega_b)

    @property
    def stiffness(self) -> np.ndarray:
        """Matrix ``K`` of the configurational quadratic form, ordered ``(q, q_1..q_N, v)``."""
        n = self.n_modes
        K = np.zeros((n + 2, n + 2))
        K[0, 0] = self.omega_s**2
        for k, (w, g) in enumerate(zip(self.omega_b, self.couplings), start=1):
            K[k, k] = w**2
            K[0, k] = K[k, 0] = g
        K[-1, -1] = self.kappa
        K[0, -1] = K[-1, 0] = self.lam
        return K

    @property
    def gamma(self) -> float:
        """Curvature removed from the system potential by the bath, ``sum g^2/w^2 + lam^2/kappa``."""
        return sum(g**2 / w**2 for g, w in zip(self.couplings, self.omega_b)) + self.lam**2 / self.kappa

    def with_(self, **changes) -> "ClassicalModel":
        return replace(self, **changes)


@dataclass(frozen=True)
class ClassicalState:
    """Raw ensemble data at one ``(P, beta)``; both evaluators fill the same fields."""

    P: float
    beta: float
    log_Z_c: float
    log_Z_b: float
    mean_H_s: float  # over rho_s, kinetic part included
    mean_phi: float
    mean_V_p: float  # <d_P phi> over rho_s
    entropy_s: float  # -int rho_s ln rho_s
    U_c: float
    V_c: float
    U_b: float
    V_b: float

    @property
    def log_Z_s(self) -> float:
        return self.log_Z_c - self.log_Z_b

    @property
    def G_c(self) -> float:
        return -self.log_Z_c / self.beta

    @property
    def G_b(self) -> float:
        return -self.log_Z_b / self.beta

    @property
    def G_s(self) -> float:
        return -self.log_Z_s / self.beta


def _kinetic_log(n: int, beta: float) -> float:
    return 0.5 * n * np.log(2 * np.pi / beta)


class ClassicalThermo:
    def __init__(self, model: ClassicalModel, method: str = "quadrature"):
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
        if method == "closed-form" and model.mu != 0.0:
            raise ModelError("the closed-form evaluator needs mu = 0")
        self.model = model
        self.method = method

    def state(self, P: float, beta: float) -> ClassicalState:
        if beta <= 0:
            raise ValueError("beta must be positive")
        if self.method == "closed-form":
            return closed_form_state(self.model, P, beta)
        return quadrature_state(self.model, P, beta)

    def G_s(self, P: float, beta: float) -> float:
        return self.state(P, beta).G_s

    def phi(self, q, P: float, beta: float):
        if self.method == "closed-form":
            return phi_closed_form(self.model, q, P)
        return phi_quadrature(self.model, q, P, beta)


# --- bath integrals at fixed q -----------------------------------------------


def _bath_coefficients(m: ClassicalModel, q: np.ndarray, P: float):
    q = np.atleast_1d(np.asarray(q, dtype=float))
    curv = np.empty((q.size, m.n_modes + 1))
    lin = np.empty_like(curv)
    for k, (w, g) in enumerate(zip(m.omega_b, m.couplings)):
        curv[:, k] = w**2
        lin[:, k] = g * q
    curv[:, -1] = m.kappa + m.mu * q**2
    lin[:, -1] = m.lam * q + P * m.a
    return curv, lin


def _bath_integrals(m: ClassicalModel, q, P: float, beta: float, order: int):
    """Configurational ``ln Z_i(q)`` (momenta excluded) and per-coordinate moments."""
    curv, lin = _bath_coefficients(m, q, P)
    t, logw = _gh(order)
    logz, m1, m2 = kernels.conditional_gaussian_moments(curv, lin, beta, t, logw)
    return logz.sum(axis=1) - beta * P * m.v0, m1, m2


def phi_quadrature(m: ClassicalModel, q, P: float, beta: float, order: int | None = None):
    order = order or m.order
    ln_zi, _, _ = _bath_integrals(m, q, P, beta, order)
    ln_zb, _, _ = _free_bath(m, P, beta, order)
    out = -(ln_zi - ln_zb[0]) / beta
    return out if np.ndim(q) else float(out[0])


def _free_bath(m: ClassicalModel, P: float, beta: float, order: int):
    # q = 0 switches off every coupling, including mu
    return _bath_integrals(m, 0.0, P, beta, order)


def phi_closed_form(m: ClassicalModel, q, P: float):
    if m.mu != 0.0:
        raise ModelError("closed-form phi needs mu = 0")
    q = np.asarray(q, dtype=float)
    return -0.5 * m.gamma * q**2 - m.lam * P * m.a / m.kappa * q


# --- quadrature evaluator ----------------------------------------------------


def _effective_potential(m: ClassicalModel, q, P: float, beta: float, order: int):
    return 0.5 * m.omega_s**2 * np.asarray(q) ** 2 + phi_quadrature(m, q, P, beta, order)


def _locate(m: ClassicalModel, P: float, beta: float, order: int) -> tuple[float, float]:
    """Minimum and curvature of the effective system potential (Newton with FD derivatives)."""
    q0 = 0.0
    h = 1e-4
    for _ in range(100):
        v = _effective_potential(m, np.array([q0 - h, q0, q0 + h]), P, beta, order)
        d1 = (v[2] - v[0]) / (2 * h)
        d2 = (v[2] - 2 * v[1] + v[0]) / h**2
        if d2 <= 0:
            raise QuadratureError(f"effective system potential is not convex near q={q0:.3g}")
        step = d1 / d2
        q0 -= step
        if abs(step) < 1e-12 * max(1.0, abs(q0)):
            break
    return q0, d2


def _system_nodes(m: ClassicalModel, P: float, beta: float, order: int):
    q0, curv = _locate(m, P, beta, order)
    s = np.sqrt(2.0 / (beta * curv))
    t, logw = _gh(order)
    return q0 + s * t, logw + t**2 + np.log(s)


def _log_Z_s_config(m: ClassicalModel, P: float, beta: float, order: int) -> float:
    q, logw = _system_nodes(m, P, beta, order)
    return float(logsumexp(logw - beta * _effective_potential(m, q, P, beta, order)))


def quadrature_state(m: ClassicalModel, P: float, beta: float) -> ClassicalState:
    order = m.order
    n = m.n_modes
    a = _log_Z_s_config(m, P, beta, order)
    b = _log_Z_s_config(m, P, beta, 2 * order)
    if abs(a - b) > QUAD_RTOL * max(1.0, abs(b)):
        raise QuadratureError(f"ln Z_s changed by {abs(a - b):.3e} when the order was doubled to {2 * order}")

    q, logw = _system_nodes(m, P, beta, order)
    ln_zi, m1, m2 = _bath_integrals(m, q, P, beta, order)
    ln_zb, mb1, mb2 = _free_bath(m, P, beta, order)
    phi = -(ln_zi - ln_zb[0]) / beta
    V_eff = 0.5 * m.omega_s**2 * q**2 + phi
    log_rho = logw - beta * V_eff
    ln_zs_conf = float(logsumexp(log_rho))
    p = np.exp(log_rho - ln_zs_conf)

    kin_s = 0.5 / beta
    mean_Hs = float(p @ (0.5 * m.omega_s**2 * q**2)) + kin_s
    # -int rho ln rho: configurational part plus the Gaussian momentum factor
    S_conf = float(p @ (beta * V_eff)) + ln_zs_conf
    S_s = S_conf + 0.5 * np.log(2 * np.pi * np.e / beta)

    g = np.asarray(m.couplings)
    w2 = np.asarray(m.omega_b) ** 2
    H_i = q * (m1[:, :n] @ g + m.lam * m1[:, -1]) + 0.5 * m.mu * q**2 * m2[:, -1]
    H_b_pot = m2[:, :n] @ (0.5 * w2) + 0.5 * m.kappa * m2[:, -1]
    kin_c = 0.5 * (n + 2) / beta
    U_c = float(p @ (0.5 * m.omega_s**2 * q**2 + H_i + H_b_pot)) + kin_c
    V_c = m.v0 + m.a * float(p @ m1[:, -1])

    U_b = float(mb2[0, :n] @ (0.5 * w2) + 0.5 * m.kappa * mb2[0, -1]) + 0.5 * (n + 1) / beta
    V_b = m.v0 + m.a * float(mb1[0, -1])
    V_i = m.v0 + m.a * m1[:, -1]

    log_Z_b = float(ln_zb[0]) + _kinetic_log(n + 1, beta)
    log_Z_s = ln_zs_conf + _kinetic_log(1, beta)
    return ClassicalState(
        P=float(P),
        beta=float(beta),
        log_Z_c=log_Z_s + log_Z_b,
        log_Z_b=log_Z_b,
        mean_H_s=mean_Hs,
        mean_phi=float(p @ phi),
        mean_V_p=float(p @ V_i) - V_b,
        entropy_s=float(S_s),
        U_c=U_c,
        V_c=V_c,
        U_b=U_b,
        V_b=V_b,
    )


# --- closed form (mu = 0) ----------------------------------------------------


def _gaussian(K: np.ndarray, lin: np.ndarray, beta: float):
    """``ln int exp(-beta (z K z / 2 + lin z)) dz``, mean and covariance."""
    n = K.shape[0]
    Kinv = np.linalg.inv(K)
    mean = -Kinv @ lin
    _, logdet = np.linalg.slogdet(K)
    logz = 0.5 * n * np.log(2 * np.pi / beta) - 0.5 * logdet + 0.5 * beta * lin @ Kinv @ lin
    return logz, mean, Kinv / beta


def closed_form_state(m: ClassicalModel, P: float, beta: float) -> ClassicalState:
    if m.mu != 0.0:
        raise ModelError("the closed-form evaluator needs mu = 0")
    n = m.n_modes
    K = m.stiffness
    lin = np.zeros(n + 2)
    lin[-1] = P * m.a
    logz_c, mean_c, cov_c = _gaussian(K, lin, beta)
    Kb = K[1:, 1:]
    logz_b, mean_b, cov_b = _gaussian(Kb, lin[1:], beta)

    def quad_mean(Kx, mean, cov):
        return 0.5 * (np.trace(Kx @ cov) + mean @ Kx @ mean)

    mq, vq = mean_c[0], cov_c[0, 0]
    mean_q2 = vq + mq**2
    mean_phi = -0.5 * m.gamma * mean_q2 - m.lam * P * m.a / m.kappa * mq
    return ClassicalState(
        P=float(P),
        beta=float(beta),
        log_Z_c=float(logz_c - beta * P * m.v0 + _kinetic_log(n + 2, beta)),
        log_Z_b=float(logz_b - beta * P * m.v0 + _kinetic_log(n + 1, beta)),
        mean_H_s=0.5 * m.omega_s**2 * mean_q2 + 0.5 / beta,
        mean_phi=float(mean_phi),
        mean_V_p=float(-m.lam * m.a / m.kappa * mq),
        entropy_s=float(0.5 * np.log(2 * np.pi * np.e * vq) + 0.5 * np.log(2 * np.pi * np.e / beta)),
        U_c=float(quad_mean(K, mean_c, cov_c) + 0.5 * (n + 2) / beta),
        V_c=float(m.v0 + m.a * mean_c[-1]),
        U_b=float(quad_mean(Kb, mean_b, cov_b) + 0.5 * (n + 1) / beta),
        V_b=float(m.v0 + m.a * mean_b[-1]),
    )


# --- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class BareBlock:
    V: float
    U: float
    H: float
    S: float
    G_s: float
    residual_enthalpy: float
    residual_gibbs: float
    entropy_gap: float  # S - beta^2 d_beta G_s
    energy_gap: float  # U - d_beta (beta G_s)
    fd_error: float


@dataclass(frozen=True)
class PartialMolarBlock:
    V: float
    V_from_composite: float  # V_c - V_b
    dG_dP: float
    U: float
    H: float
    H_from_logZ: float  # -d_beta ln Z_s
    S: float
    beta2_dG_dbeta: float
    S_c: float
    S_b: float
    G_s: float
    G_c: float
    G_b: float
    V_c: float
    V_b: float
    U_c: float
    U_b: float
    fd_error: dict

    @property
    def additivity_residual(self) -> float:
        return abs(self.S - (self.S_c - self.S_b))


def bare_report(
    thermo: ClassicalThermo, P: float, beta: float, cfg: DerivativeConfig = DerivativeConfig(parameter="beta")
) -> BareBlock:
    if P <= 0:
        raise ModelError("bare volume phi/P is undefined at P = 0")
    st = thermo.state(P, beta)
    V = st.mean_phi / P
    U = st.mean_H_s
    H = st.mean_H_s + st.mean_phi
    dG = param_derivative(lambda b: thermo.G_s(P, b), beta, cfg)
    dbG = param_derivative(lambda b: b * thermo.G_s(P, b), beta, cfg)
    return BareBlock(
        V=V,
        U=U,
        H=H,
        S=st.entropy_s,
        G_s=st.G_s,
        residual_enthalpy=abs(H - (U + P * V)),
        residual_gibbs=abs(st.G_s - (H - st.entropy_s / beta)),
        entropy_gap=float(st.entropy_s - beta**2 * dG.value),
        energy_gap=float(U - dbG.value),
        fd_error=beta**2 * dG.error,
    )


def pm_report(
    thermo: ClassicalThermo, P: float, beta: float, cfg: DerivativeConfig = DerivativeConfig(parameter="beta")
) -> PartialMolarBlock:
    st = thermo.state(P, beta)
    cfg_P = DerivativeConfig(h_rel=cfg.h_rel, levels=cfg.levels, parameter="P", h_min=cfg.h_min)
    dP = param_derivative(lambda x: thermo.G_s(x, beta), P, cfg_P)
    dB = param_derivative(lambda b: thermo.state(P, b).log_Z_s, beta, cfg)
    dG = param_derivative(lambda b: thermo.G_s(P, b), beta, cfg)

    H_c = st.U_c + P * st.V_c
    H_b = st.U_b + P * st.V_b
    H_s = H_c - H_b
    S_c = beta * (H_c - st.G_c)
    S_b = beta * (H_b - st.G_b)
    return PartialMolarBlock(
        V=st.mean_V_p,
        V_from_composite=st.V_c - st.V_b,
        dG_dP=float(dP.value),
        U=st.U_c - st.U_b,
        H=H_s,
        H_from_logZ=float(-dB.value),
        S=beta * (H_s - st.G_s),
        beta2_dG_dbeta=float(beta**2 * dG.value),
        S_c=S_c,
        S_b=S_b,
        G_s=st.G_s,
        G_c=st.G_c,
        G_b=st.G_b,
        V_c=st.V_c,
        V_b=st.V_b,
        U_c=st.U_c,
        U_b=st.U_b,
        fd_error={"dG_dP": dP.error, "H": dB.error, "S": beta**2 * dG.error},
    )


@dataclass(frozen=True)
class RepresentationGaps:
    V: float
    U: float
    H: float
    S: float

    @property
    def max(self) -> float:
        return max(self.V, self.U, self.H, self.S)


def representation_gaps(b: BareBlock, p: PartialMolarBlock) -> RepresentationGaps:
    return RepresentationGaps(V=abs(b.V - p.V), U=abs(b.U - p.U), H=abs(b.H - p.H), S=abs(b.S - p.S))


def phi_P_derivative(
    thermo: ClassicalThermo, q: float, P: float, beta: float, cfg: DerivativeConfig = DerivativeConfig(parameter="P")
) -> float:
    """``d_P phi(q)`` by finite differences, for comparison with ``V_i(q) - V_b``."""
    return float(param_derivative(lambda x: thermo.phi(q, x, beta), P, cfg).value)
