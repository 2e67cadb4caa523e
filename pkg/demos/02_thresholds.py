"""Asymptotic key rates and thresholds for six-state and BB84.

Adding noise on Alice's side (flipping each key bit with probability q)
raises the tolerable error rate.  The table compares the rate with and
without that pre-processing, then prints the thresholds and the upper
bound obtained from a fixed measurement by Eve.
"""

import numpy as np

from qkd_keyrate import keyrate, states

for spec in (states.six_state(), states.bb84()):
    print(f"\n== {spec.name} ==")
    print(f"{'Q':>6} {'r(q=0)':>10} {'r(best q)':>10} {'q*':>6}")
    for Q in np.arange(0.0, 0.151, 0.025):
        plain = keyrate.rate_at(spec, Q, 0.0)
        best = keyrate.rate_at(spec, Q, None)
        print(f"{Q:6.3f} {plain.rate:10.4f} {best.rate:10.4f} {best.q_opt:6.3f}")
    print("threshold without pre-processing:", round(keyrate.threshold(spec, False), 4))
    print("threshold with pre-processing:   ", round(keyrate.threshold(spec, True), 4))
    print("upper bound (Eve measures):      ", round(keyrate.upper_threshold(spec), 4))
