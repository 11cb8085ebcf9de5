"""Numbers transcribed from the five-node example and the four-node chain."""
import numpy as np

PBAR = np.array([
    [0, 180, 0, 0, 180],
    [0, 0, 100, 0, 100],
    [90, 0, 0, 100, 50],
    [150, 0, 0, 0, 150],
    [0, 0, 0, 0, 0],
], dtype=float)
EXTERNAL = 4

C_NOM = np.array([120, 20, 150, 200, 0], dtype=float)
C_SHOCK = np.array([120, 20, 120, 200, 0], dtype=float)

STREAM = np.array([
    [60, 10, 120, 0, 0],
    [60, 8, 0, 200, 0],
    [1, 3, 10, 4, 0],
], dtype=float)
ALPHA = 1.01

# displayed unrestricted payments: the static clearing at t=0 is also P(0)
P_STATIC_T0 = np.array([
    [0, 180, 0, 0, 70],
    [0, 0, 100, 0, 90],
    [90, 0, 0, 100, 30],
    [100, 0, 0, 0, 0],
    [0, 0, 0, 0, 0],
], dtype=float)
P_T1 = np.zeros((5, 5))
P_T1[0, 4], P_T1[1, 4], P_T1[3, 0], P_T1[3, 4] = 110.5, 8, 50.5, 149.5
P_T2 = np.zeros((5, 5))
P_T2[0, 4], P_T2[1, 4], P_T2[2, 4], P_T2[3, 4] = 0.61, 2.12, 10, 2.02
DISPLAYED_SCHEDULE = np.stack([P_STATIC_T0, P_T1, P_T2])

UNPAID_PRORATA_SHOCK = 53.66
UNPAID_MATRIX_SHOCK = 20.0
REDUCTION = 0.627
RESIDUAL_DYNAMIC = 10.51
DEFAULTED_DYNAMIC_PRORATA = 21.07
STATED_STATIC_T0_LOSS = 343.40

# four-node chain: node 0 owes 1 to nodes 1 and 2, both of which owe 1 to node 3
CHAIN_PBAR = np.array([
    [0, 1, 1, 0],
    [0, 0, 0, 1],
    [0, 0, 0, 1],
    [0, 0, 0, 0],
], dtype=float)
CHAIN_INFLOWS = np.array([[1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)
