import itertools
import math

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkd_keyrate import entropy as E, qmat
from qkd_keyrate.states import BELL

seeds = st.integers(0, 2**32 - 1)


# --- oracles ---------------------------------------------------------------

def h0_bruteforce(p, eps):
    """log2 of the smallest index set carrying at least 1 - eps (exhaustive)."""
    idx = range(len(p))
    for k in range(0, len(p) + 1):
        for sub in itertools.combinations(idx, k):
            if sum(p[i] for i in sub) >= sum(p) - eps - 1e-12:
                return -math.inf if k == 0 else math.log2(k)


def h2_qp(p, eps):
    """max -log2 sum q^2 over 0 <= q <= p, sum q >= sum p - eps, by a convex QP."""
    q = cp.Variable(len(p))
    prob = cp.Problem(cp.Minimize(cp.sum_squares(q)), [q >= 0, q <= p, cp.sum(q) >= sum(p) - eps])
    prob.solve(solver=cp.CLARABEL)
    return -math.log2(prob.value)


# --- Shannon / von Neumann ---------------------------------------------------

def test_shannon_and_binary_entropy():
    assert E.shannon([0.5, 0.5]) == 1.0
    assert E.shannon([1.0, 0.0]) == 0.0
    assert E.binary_entropy(0.11) == pytest.approx(0.499915958, abs=1e-9)
    assert np.allclose(E.binary_entropy(np.array([0.0, 0.5, 1.0])), [0, 1, 0])
    with pytest.raises(ValueError):
        E.binary_entropy(1.5)


def test_von_neumann_pure_and_mixed():
    assert E.von_neumann(qmat.proj(BELL[0])) == pytest.approx(0.0, abs=1e-12)
    assert E.von_neumann(np.eye(4) / 4) == pytest.approx(2.0)


def test_cond_vn_bell_state_is_minus_one():
    rho = qmat.proj(BELL[0])
    assert E.cond_vn(rho, [2, 2], [1]) == pytest.approx(-1.0)
    assert E.cond_vn(np.eye(4) / 4, [2, 2], [1]) == pytest.approx(1.0)


# --- smooth entropies ----------------------------------------------------------

def test_smooth_eps_zero_values():
    p = np.array([0.5, 0.25, 0.125, 0.125, 0.0])
    assert E.smooth_renyi0(p, 0.0) == pytest.approx(2.0)
    assert E.smooth_renyi2(p, 0.0) == pytest.approx(-math.log2((p * p).sum()))


def test_smooth_renyi0_uniform_example():
    # removing 0.1 of a uniform 8-point distribution drops no full atom (each has 0.125)
    assert E.smooth_renyi0(np.full(8, 1 / 8), 0.1) == pytest.approx(3.0)
    assert E.smooth_renyi0(np.full(8, 1 / 8), 0.13) == pytest.approx(math.log2(7))


@given(seeds, st.integers(1, 8), st.sampled_from([0.0, 0.01, 0.05, 0.2, 0.5]))
@settings(max_examples=60, deadline=None)
def test_smooth_renyi0_matches_bruteforce(seed, d, eps):
    p = np.random.default_rng(seed).dirichlet(np.full(d, 0.5))
    assert E.smooth_renyi0(p, eps) == pytest.approx(h0_bruteforce(p, eps), abs=1e-9)


@given(seeds, st.integers(1, 8), st.sampled_from([0.0, 0.01, 0.05, 0.2]))
@settings(max_examples=40, deadline=None)
def test_smooth_renyi2_matches_qp(seed, d, eps):
    p = np.random.default_rng(seed).dirichlet(np.full(d, 0.5))
    assert E.smooth_renyi2(p, eps) == pytest.approx(h2_qp(p, eps), abs=1e-5)


@given(seeds, st.integers(2, 10))
@settings(max_examples=30, deadline=None)
def test_smoothing_monotone_in_eps(seed, d):
    p = np.random.default_rng(seed).dirichlet(np.ones(d))
    grid = np.linspace(0, 0.45, 10)
    h0 = [E.smooth_renyi0(p, e) for e in grid]
    h2 = [E.smooth_renyi2(p, e) for e in grid]
    assert all(a >= b - 1e-12 for a, b in zip(h0, h0[1:]))
    assert all(a <= b + 1e-12 for a, b in zip(h2, h2[1:]))
    assert all(b <= a + 1 for a, b in zip(h0[:3], h2[:3]))  # S2 <= S0 + 1 for eps <= 0.1


def test_eps_out_of_range():
    with pytest.raises(ValueError):
        E.smooth_renyi0([1.0], 1.0)


def test_conditional_single_column_reduces_to_unconditional(rng):
    p = rng.dirichlet(np.ones(6))
    for eps in (0.0, 0.02, 0.1):
        assert E.smooth_renyi2_cond(p[:, None], eps) == pytest.approx(E.smooth_renyi2(p, eps), abs=1e-9)
        assert E.smooth_renyi0_cond(p[:, None], eps) == pytest.approx(E.smooth_renyi0(p, eps), abs=1e-12)


def test_conditional_eps_zero_is_worst_column():
    pxy = np.array([[0.25, 0.5], [0.25, 0.0]])
    assert E.smooth_renyi0_cond(pxy, 0.0) == pytest.approx(1.0)
    assert E.smooth_renyi2_cond(pxy, 0.0) == pytest.approx(0.0)
    # removing the whole second column's weight is too expensive, the first is free of collisions
    assert E.smooth_renyi0_cond(pxy, 0.25) == pytest.approx(0.0)


# --- n-fold products ---------------------------------------------------------------

def test_type_class_spectrum_matches_explicit_product(rng):
    p = np.array([0.6, 0.3, 0.1])
    n = 4
    full = p
    for _ in range(n - 1):
        full = np.kron(full, p)
    tc = E.TypeClassSpectrum(p, n)
    logv, logm = tc.atoms()
    assert np.isclose(np.exp2(logv + logm).sum(), 1.0)
    assert E.von_neumann(tc) == pytest.approx(E.shannon(full))
    for eps in (0.0, 0.01, 0.1):
        assert E.quantum_smooth(0, tc, eps) == pytest.approx(E.smooth_renyi0(full, eps), abs=1e-9)
        assert E.quantum_smooth(2, tc, eps) == pytest.approx(E.smooth_renyi2(full, eps), abs=1e-9)


def test_type_class_handles_degenerate_eigenvalues():
    tc = E.TypeClassSpectrum([0.25, 0.25, 0.25, 0.25], 50)
    vals, mult = tc.distinct()
    assert len(vals) == 1 and mult[0] == 4
    assert E.quantum_smooth(0, tc, 0.0) == pytest.approx(100.0)


def test_typical_sequence_entropy_per_copy_bounded():
    # |S_alpha^eps(rho^n) - n S(rho)| grows like sqrt(n) at most, so the per-copy gap shrinks
    p = np.array([0.7, 0.2, 0.1])
    s = E.shannon(p)
    gaps = []
    for n in (10, 100, 1000):
        tc = E.TypeClassSpectrum(p, n)
        gaps.append(max(abs(E.quantum_smooth(a, tc, 0.01) - n * s) for a in (0, 2)) / n)
    assert gaps[0] > gaps[1] > gaps[2]


def test_log_multinomial_and_binomial():
    assert E.log_multinomial(5, [2, 2, 1]) == pytest.approx(math.log2(30))
    assert E.log_binomial(10, 3) == pytest.approx(math.log2(120))


def test_cq_spectrum_joint():
    cq = E.CqSpectrum.from_states([0.5, 0.5], [np.diag([1.0, 0.0]), np.eye(2) / 2])
    assert np.allclose(cq.joint(), [[0.5, 0.25], [0.0, 0.25]])
    assert E.quantum_smooth_cond(0, cq, 0.0) == pytest.approx(1.0)


# --- inequality suites ---------------------------------------------------------------

def test_inequality_suite_small_has_no_violations():
    tally = E.inequality_suite(60, seed=11)
    assert len(tally) >= 20
    assert all(failed == 0 for _, failed in tally.values()), tally


def test_product_state_equality_at_eps_zero():
    rng = np.random.default_rng(5)
    inst = E.random_inequality_instance(rng)
    du, dv = inst.dims
    ru, rv = qmat.random_density(du, rng), qmat.random_density(dv, rng)
    assert E.quantum_smooth(0, np.kron(ru, rv), 0.0) == pytest.approx(
        E.quantum_smooth(0, ru, 0.0) + E.quantum_smooth(0, rv, 0.0))


def test_almost_product_bound_examples():
    # exact product: eps = 0
    lhs, rhs = E.almost_product_bound(np.kron(np.diag([0.5, 0.5]), np.eye(2) / 2), 2)
    assert lhs == pytest.approx(1.0) and rhs == pytest.approx(1.0 - 1 / math.e)
    # X copied into B: S(X|B) = 0, still above the bound
    copy = np.diag([0.5, 0, 0, 0.5])
    lhs, rhs = E.almost_product_bound(copy, 2)
    assert lhs == pytest.approx(0.0, abs=1e-12) and lhs >= rhs
    with pytest.raises(ValueError):
        E.almost_product_bound(qmat.proj(BELL[0]), 2)


def test_distance_bound_suite():
    tally = E.distance_bound_suite(100, seed=4)
    assert all(f == 0 for _, f in tally.values()), tally


def test_purification_distance_bound_pure_inputs(rng):
    a = qmat.proj(qmat.random_unitary(3, rng)[:, 0])
    pure, bound = E.purification_distance_bound(a, a)
    assert pure == pytest.approx(0.0, abs=1e-7) and bound == pytest.approx(0.0, abs=1e-7)
