"""B92 behind a depolarizing channel.

The compatible attack states are not fixed by the error rate alone; the
contrast between the Phi+ and Phi- weights is bounded below by a small
semidefinite program.  The rate is then minimized over what remains.
"""

import numpy as np

from qkd_keyrate import keyrate, states

alpha = 0.38
spec = states.b92(alpha)
print(f"alpha = {alpha}, gamma^2 = {states.b92_gamma2(alpha):.5f}")
print(f"{'delta':>7} {'Q':>7} {'s_min':>7} {'r(q=0)':>9} {'r(best)':>9}")
for delta in np.arange(0.0, 0.0301, 0.005):
    Q = states.b92_q_of_delta(delta, alpha)
    s_min = states.b92_s_lower(round(Q, 12), alpha)
    plain = keyrate.rate_at(spec, Q, 0.0).rate
    best = keyrate.rate_at(spec, Q, None).rate
    print(f"{delta:7.4f} {Q:7.4f} {s_min:7.4f} {plain:9.5f} {best:9.5f}")

for pp in (False, True):
    Q = keyrate.threshold(spec, pp, hi=0.1)
    label = "with" if pp else "without"
    print(f"positive rate {label} pre-processing up to delta = {states.b92_delta_of_q(Q, alpha):.4f}")
