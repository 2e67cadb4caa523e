"""Bell-diagonal attack states and what Eve holds.

Walks through the symmetrization that turns any two-qubit state into a
Bell-diagonal one, and prints Eve's conditional states for a six-state
attack at 10% bit error rate.
"""

import numpy as np

from qkd_keyrate import qmat, states

rng = np.random.default_rng(1)
rho = qmat.random_density(4, rng)
print("random two-qubit state, Bell-basis weights:", np.round(states.bell_weights(rho), 4))

twirled = states.d2(rho)
off = states.bell_matrix(twirled) - np.diag(np.diag(states.bell_matrix(twirled)))
print("after the Pauli twirl, largest off-diagonal Bell element:", f"{np.abs(off).max():.1e}")

sym, _ = states.d1(twirled, states.six_state().encodings)
lam = states.bell_weights(states.d2(sym))
print("after the six-state encodings:", np.round(lam, 4), " (lambda3 + lambda4 = 2 lambda2)")

lam = states.six_state().gamma.state(0.10)
s0, s1, pxy = states.eve_conditionals(lam)
print("\nsix-state attack at Q = 0.10:", lam.lam)
print("P_XY =\n", np.round(pxy, 4))
print("Eve's state given x = 0 (real part):\n", np.round(s0.real, 4))
print("distinguishability of Eve's two states:", round(qmat.trace_distance(s0, s1), 4))
