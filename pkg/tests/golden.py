"""Reference values frozen from ``oracle.py``; ``test_oracle_pins.py`` re-derives them."""

# two-qubit, omega_s = omega_b = 1, g = 0.5, beta = 1
TWO_QUBIT = dict(
    F_star=-0.9168011581925494,
    mean_H_star=-0.3206498262799541,
    U_gt=-0.216583349553356,
    S_vN=0.5961513319125954,
    U_pm=-0.40277606339133204,
    S_s=0.5140250947982816,
    C_gt=0.16282402938267806,
    C_pm=0.25184583244701697,
    I_sb=0.09607446013568377,
)

# same point with bath drive J = 0.3 on the bath sigma_x
TWO_QUBIT_DRIVEN = dict(
    F_star=-0.9170520629575512,
    mean_H_star=-0.3282210751966925,
    U_gt=-0.21654082460764565,
    S_vN=0.5888309877608588,
    U_pm=-0.40409698489506557,
    S_s=0.5129550780596422,
    A_pm=-0.0016189698463971631,
    A_bare=-0.3722675019634897,
    A_c=-0.2716836763052659,
    A_b=-0.27006470645883723,
)

# coupled oscillators, omega_s = 1, omega_b = 2, g = 1, Fock dimension 12
OSCILLATOR_S_VN = {10.0: 0.18384361281955736, 20.0: 0.1801384229070621, 30.0: 0.18013347630705645}
OSCILLATOR_S_S = {10.0: 0.010159813698858619, 20.0: 2.5247147659538765e-05, 30.0: 4.953475130076157e-08}

# classical piston model, defaults (omega_s = omega_b = kappa = v0 = a = 1, g = 0.5), P = 1, beta = 1
CLASSICAL_LAM_04 = dict(
    G_s=-2.2372866577895145,
    V_bare=-0.7128698649813274,
    U_bare=1.5772766446423443,
    H_bare=0.8644067796610169,
    S_bare=3.1016934374505314,
    V_pm=-0.27118644067796627,
    U_pm=1.1355932203389831,
    H_pm=0.8644067796610169,
    S_pm=3.1016934374505314,
)
CLASSICAL_LAM_0 = dict(
    G_s=-1.9817181026352357,
    V_bare=-0.16666666666666666,
    U_bare=1.1666666666666665,
    H_bare=0.9999999999999999,
    S_bare=2.9817181026352357,
    V_pm=0.0,
    U_pm=1.0,
    H_pm=1.0,
    S_pm=2.9817181026352357,
)
