"""Smooth Renyi entropies of many copies.

For n copies of a state the smooth entropies of order 0 and 2 approach
n times the von Neumann entropy; the per-copy gap shrinks roughly like
1/sqrt(n).  Spectra of the n-fold product are handled by type classes,
so n in the thousands is cheap.
"""

import numpy as np

from qkd_keyrate import entropy

p = np.array([0.7, 0.2, 0.1])
s = entropy.shannon(p)
print(f"single-copy entropy {s:.4f}")
print(f"{'n':>6} {'S0/n':>8} {'S2/n':>8}")
for n in (10, 100, 500, 2000):
    tc = entropy.TypeClassSpectrum(p, n)
    s0 = entropy.quantum_smooth(0, tc, 1e-6) / n
    s2 = entropy.quantum_smooth(2, tc, 1e-6) / n
    print(f"{n:6d} {s0:8.4f} {s2:8.4f}")

tally = entropy.inequality_suite(100, seed=0)
print("\nsmooth-entropy inequality suite on 100 random instances:")
print("  families:", len(tally), " violations:", sum(f for _, f in tally.values()))
