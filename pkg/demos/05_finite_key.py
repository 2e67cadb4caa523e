"""Finite key lengths and a direct security check.

First the key length for the six-state protocol at Q = 0.05 as the block
grows.  Then, for a block of five pairs, the exact distance of a Toeplitz
-hashed key from an ideal key, which grows with the output length.
"""

from qkd_keyrate import finitekey, keyrate, states

lam = states.six_state().gamma.state(0.05)
r_inf = keyrate.rate_objective(lam, 0.0)
print(f"asymptotic rate {r_inf:.4f}")
print(f"{'n':>6} {'ell':>6} {'ell/n':>7} {'EC leak':>8}")
for n in (100, 500, 1000, 5000, 20000):
    res = finitekey.finite_rate(states.six_state(), lam, 0.0, n, 1e-6)
    print(f"{n:6d} {res.ell:6d} {res.ell / n:7.4f} {res.leak_ec:8d}")

print("\nexact distance from a perfect key, n = 5, Q = 0.10:")
lam = states.six_state().gamma.state(0.10)
for ell in range(6):
    d, _ = finitekey.direct_security(lam, 5, ell, 0.1, num_seeds=8, seed=0)
    print(f"  ell = {ell}: {d:.4f}")

print("\nerror correction by random binning, n = 14, Q = 0.1, eps = 0.1:")
print("  empirical failure rate", finitekey.ec_failure_rate(14, 0.1, 0.1, 500, seed=0))
