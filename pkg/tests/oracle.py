"""Independent reference implementations used to pin expected values.

Nothing here imports the package. Quantum quantities come from dense
``scipy.linalg.expm`` / ``logm`` and explicit index loops; derivatives use a
plain five-point stencil; classical quantities come from Gaussian integrals
worked out by hand for one bath mode plus the piston at zero quartic term.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm, logm

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def two_qubit(omega_s=1.0, omega_b=1.0, g=0.5, J=0.0):
    H_s = np.kron(0.5 * omega_s * SZ, I2)
    H_b = np.kron(I2, 0.5 * omega_b * SZ)
    H_i = g * np.kron(SX, SX)
    A_b = np.kron(I2, SX)
    return dict(H_s=H_s, H_i=H_i, H_b=H_b, A_b=A_b, J=J, d_s=2, d_b=2)


def ladder(d):
    a = np.zeros((d, d), dtype=complex)
    for n in range(1, d):
        a[n - 1, n] = math.sqrt(n)
    return a


def oscillators(omega_s=1.0, omega_b=2.0, g=1.0, d=12, J=0.0):
    a = ladder(d)
    n = a.conj().T @ a
    x = (a + a.conj().T) / math.sqrt(2)
    I = np.eye(d)
    return dict(
        H_s=np.kron(omega_s * n, I),
        H_i=g * np.kron(x, x),
        H_b=np.kron(I, omega_b * n),
        A_b=np.kron(I, x),
        J=J,
        d_s=d,
        d_b=d,
    )


def ptrace(M, d_s, d_b, keep):
    """Explicit-loop partial trace of a (d_s d_b)-dimensional operator."""
    if keep == "s":
        out = np.zeros((d_s, d_s), dtype=complex)
        for i in range(d_s):
            for j in range(d_s):
                for b in range(d_b):
                    out[i, j] += M[i * d_b + b, j * d_b + b]
        return out
    out = np.zeros((d_b, d_b), dtype=complex)
    for i in range(d_b):
        for j in range(d_b):
            for s in range(d_s):
                out[i, j] += M[s * d_b + i, s * d_b + j]
    return out


def entropy(rho):
    total = 0.0
    for p in np.linalg.eigvalsh(rho):
        if p > 1e-14:
            total -= p * math.log(p)
    return total


def expect(rho, op):
    return float(np.trace(rho @ op).real)


def mean_force(m, beta):
    """Composite, bath and mean-force quantities at one temperature."""
    d_s, d_b = m["d_s"], m["d_b"]
    H_c = m["H_s"] + m["H_i"] + m["H_b"] + m["J"] * m["A_b"]
    H_bt = ptrace(m["H_b"] + m["J"] * m["A_b"], d_s, d_b, "b") / d_s
    E_c = expm(-beta * H_c)
    E_b = expm(-beta * H_bt)
    Z_c = np.trace(E_c).real
    Z_b = np.trace(E_b).real
    M = ptrace(E_c, d_s, d_b, "s")
    H_star = -logm(M / Z_b) / beta
    H_star = (H_star + H_star.conj().T) / 2
    rho_c = E_c / Z_c
    rho_b = E_b / Z_b
    rho_s = M / Z_c
    H_s = ptrace(m["H_s"], d_s, d_b, "s") / d_b
    return dict(
        H_c=H_c,
        H_star=H_star,
        H_s=H_s,
        Z_c=Z_c,
        Z_b=Z_b,
        rho_c=rho_c,
        rho_b=rho_b,
        rho_s=rho_s,
        F_star=-math.log(Z_c / Z_b) / beta,
        F_b=-math.log(Z_b) / beta,
        S_c=entropy(rho_c),
        S_b=entropy(rho_b),
        S_vN=entropy(rho_s),
        U_c=expect(rho_c, H_c),
        U_b=expect(rho_b, H_bt),
        mean_H_star=expect(rho_s, H_star),
        U_gt=expect(rho_s, H_s),
    )


def d5(f, x, h=1e-3):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def quantum_point(m, beta):
    """PM, GT and drive scalars with stencil derivatives."""
    mf = mean_force(m, beta)
    ln_zs = lambda b: -b * mean_force(m, b)["F_star"]
    F = lambda b: mean_force(m, b)["F_star"]
    U_pm = -d5(ln_zs, beta)
    S_s = beta**2 * d5(F, beta)
    U_gt = lambda b: mean_force(m, b)["U_gt"]
    C_gt = -(beta**2) * d5(U_gt, beta)
    C_pm = -(beta**2) * d5(lambda b: -d5(ln_zs, b, 1e-3), beta, 1e-2)
    d_s, d_b = m["d_s"], m["d_b"]
    out = dict(
        F_star=mf["F_star"],
        mean_H_star=mf["mean_H_star"],
        U_gt=mf["U_gt"],
        S_vN=mf["S_vN"],
        U_pm=U_pm,
        S_s=S_s,
        C_gt=C_gt,
        C_pm=C_pm,
        I_sb=mf["S_vN"] + entropy(ptrace(mf["rho_c"], d_s, d_b, "b")) - mf["S_c"],
    )
    if m["J"] != 0.0:

        def ln_zs_J(J):
            return -beta * mean_force({**m, "J": J}, beta)["F_star"]

        out["A_pm"] = -d5(ln_zs_J, m["J"], 1e-3) / beta
        A_op = (mf["H_star"] - mf["H_s"]) / m["J"]
        out["A_bare"] = expect(mf["rho_s"], A_op)
        out["A_c"] = expect(mf["rho_c"], m["A_b"])
        A_bath = ptrace(m["A_b"], d_s, d_b, "b") / d_s
        out["A_b"] = expect(mf["rho_b"], A_bath)
    return out


def classical_gaussian(P, beta, omega_s=1.0, omega_b=1.0, g=0.5, kappa=1.0, v0=1.0, a=1.0, lam=0.4):
    """Bare and partial-molar blocks for one bath mode plus the piston, no quartic term.

    Conditional on the system coordinate q the bath is Gaussian and
        phi(q) = -g^2 q^2 / (2 w^2) - lam^2 q^2 / (2 kappa) - lam a P q / kappa,
    so the system marginal is Gaussian with stiffness
        k = w_s^2 - g^2 / w^2 - lam^2 / kappa
    and mean lam a P / (kappa k). The composite stiffness determinant over the
    bath determinant is also k (Schur complement).
    """
    k = omega_s**2 - g**2 / omega_b**2 - lam**2 / kappa
    qbar = lam * a * P / (kappa * k)
    q2 = 1.0 / (beta * k) + qbar**2
    mean_phi = -0.5 * (g**2 / omega_b**2 + lam**2 / kappa) * q2 - lam * a * P / kappa * qbar
    U_b = 0.5 / beta + 0.5 * omega_s**2 * q2
    S_b = 0.5 * math.log(2 * math.pi * math.e / beta) + 0.5 * math.log(2 * math.pi * math.e / (beta * k))
    # (K^-1)_vv - 1/kappa for K = [[w_s^2, g, lam], [g, w^2, 0], [lam, 0, kappa]]
    K = np.array([[omega_s**2, g, lam], [g, omega_b**2, 0.0], [lam, 0.0, kappa]])
    delta = np.linalg.inv(K)[2, 2] - 1.0 / kappa
    G_s = -math.log(2 * math.pi / beta) / beta + math.log(k) / (2 * beta) - 0.5 * P**2 * a**2 * delta
    H_p = 1.0 / beta - 0.5 * P**2 * a**2 * delta
    V_p = -P * a**2 * delta
    return dict(
        G_s=G_s,
        V_bare=mean_phi / P if P > 0 else float("nan"),
        U_bare=U_b,
        H_bare=U_b + mean_phi,
        S_bare=S_b,
        V_pm=V_p,
        U_pm=H_p - P * V_p,
        H_pm=H_p,
        S_pm=beta * (H_p - G_s),
    )
