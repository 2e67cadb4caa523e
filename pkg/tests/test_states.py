import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkd_keyrate import qmat, states as S

seeds = st.integers(0, 2**32 - 1)
lams = st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(lambda v: sum(v) > 1e-3).map(
    lambda v: tuple(np.array(v) / sum(v)))


def test_bell_basis_orthonormal():
    assert np.allclose(S.BELL.conj() @ S.BELL.T, np.eye(4))
    assert np.allclose(sum(S.bell_projector(i) for i in range(4)), np.eye(4))


@given(lams)
def test_rho1_round_trip(lam):
    assert np.allclose(S.bell_weights(S.rho1(lam)), lam, atol=1e-12)


def test_bell_diagonal_validation():
    with pytest.raises(ValueError):
        S.BellDiagonal((0.5, 0.5, 0.5, 0.0))
    assert S.BellDiagonal((0.8, 0.1, 0.05, 0.05)).qber == pytest.approx(0.1)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_d2_idempotent_and_bell_diagonal(seed):
    rho = qmat.random_density(4, np.random.default_rng(seed))
    once = S.d2(rho)
    bm = S.bell_matrix(once)
    assert np.max(np.abs(bm - np.diag(np.diag(bm)))) < 1e-12
    assert np.allclose(S.d2(once), once, atol=1e-12)
    assert np.allclose(S.bell_weights(once), S.bell_weights(rho), atol=1e-12)


def test_d2prime_example():
    out = S.d2prime(S.rho1((0.7, 0.1, 0.15, 0.05)))
    assert np.allclose(S.bell_weights(out), (0.7, 0.1, 0.1, 0.1), atol=1e-12)
    fixed = S.rho1((0.6, 0.2, 0.1, 0.1))
    assert np.allclose(S.d2prime(fixed), fixed, atol=1e-12)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_d2prime_equalizes_psi_weights(seed):
    rho = S.d2(qmat.random_density(4, np.random.default_rng(seed)))
    out = S.d2prime(rho)
    lam = S.bell_weights(out)
    assert abs(lam[2] - lam[3]) < 1e-12
    assert np.allclose(S.d2prime(out), out, atol=1e-12)


def test_six_state_symmetrization_relation():
    # after the three-basis encoding (and the Pauli twirl) lambda3 + lambda4 = 2 lambda2
    rho = S.rho1((0.7, 0.05, 0.2, 0.05))
    out, n = S.d1(rho, S.six_state().encodings)
    lam = S.bell_weights(S.d2(out))
    assert n == pytest.approx(1.0)
    assert lam[2] + lam[3] == pytest.approx(2 * lam[1], abs=1e-12)


def test_bb84_symmetrization_equalizes_phi_minus_psi_plus():
    out, _ = S.d1(S.rho1((0.7, 0.05, 0.2, 0.05)), S.bb84().encodings)
    lam = S.bell_weights(S.d2(out))
    assert lam[1] == pytest.approx(lam[2], abs=1e-12)


def test_b92_filter_acceptance_probability():
    alpha = 0.38
    _, b = S.b92_operators(alpha)
    _, n = S.d1(S.bell_projector(0), S.EncodingSet(((S.I2, b, 1.0),)))
    m = np.kron(S.I2, b)
    assert n == pytest.approx(np.trace(m @ S.bell_projector(0) @ m.conj().T).real)
    # conclusive rate of the source behind a depolarizer: gamma^2 (1 - 2 delta) + 2 delta
    for delta in (0.0, 0.01, 0.03):
        _, n_src = S.b92_sifted_state(delta, alpha)
        assert n_src == pytest.approx(S.b92_gamma2(alpha) * (1 - 2 * delta) + 2 * delta, rel=1e-12)


def test_purify_bell_diag():
    psi = S.purify_bell_diag((1, 0, 0, 0)).psi_abe
    assert np.allclose(psi, np.kron(S.BELL[0], qmat.basis(4, 0)))
    lam = (0.6, 0.2, 0.15, 0.05)
    rho = qmat.proj(S.purify_bell_diag(lam).psi_abe)
    assert np.allclose(qmat.partial_trace(rho, [4, 4], [0]), S.rho1(lam), atol=1e-12)
    assert np.allclose(qmat.partial_trace(rho, [4, 4], [1]), np.diag(lam), atol=1e-12)


def test_eve_conditionals_block_form():
    l1, l2, l3, l4 = lam = (0.6, 0.2, 0.15, 0.05)
    s0, s1, pxy = S.eve_conditionals(lam)
    a, b = np.sqrt(l1 * l2), np.sqrt(l3 * l4)
    exp0 = np.array([[l1, a, 0, 0], [a, l2, 0, 0], [0, 0, l3, b], [0, 0, b, l4]])
    exp1 = np.array([[l1, -a, 0, 0], [-a, l2, 0, 0], [0, 0, l3, -b], [0, 0, -b, l4]])
    assert np.allclose(s0, exp0, atol=1e-12)
    assert np.allclose(s1, exp1, atol=1e-12)
    assert np.allclose(pxy, [[0.4, 0.1], [0.1, 0.4]])
    rho = qmat.proj(S.purify_bell_diag(lam).psi_abe)
    assert np.allclose((s0 + s1) / 2, qmat.partial_trace(rho, [4, 4], [1]), atol=1e-10)


def test_eve_conditionals_perfect_and_maximally_mixed():
    s0, s1, _ = S.eve_conditionals((1, 0, 0, 0))
    assert np.allclose(s0, s1)
    assert np.linalg.matrix_rank(s0) == 1
    s0, s1, _ = S.eve_conditionals((0.25, 0.25, 0.25, 0.25))
    # Eve's states differ although the key bits are uniform and uncorrelated with Bob
    assert qmat.trace_distance(s0, s1) == pytest.approx(1.0)


def test_b92_formulas():
    assert S.b92_lambda12(0.0, 1.0) == (1.0, 0.0)
    assert S.b92_lambda12(0.0, 0.0) == (0.5, 0.5)
    assert np.allclose(S.b92_lambda12(0.05, 0.9), (0.9025, 0.0475))
    assert S.b92_gamma2(0.38) == pytest.approx(4 * 0.38**2 * (1 - 0.38**2))
    assert S.b92_gamma2(0.38) == pytest.approx(0.49419456, abs=1e-12)
    assert S.b92_q_of_delta(0.0, 0.38) == 0.0
    assert S.b92_q_of_delta(0.01, 0.38) == pytest.approx(0.0199, abs=1e-4)
    for d in (0.001, 0.02, 0.2):
        assert S.b92_delta_of_q(S.b92_q_of_delta(d, 0.38), 0.38) == pytest.approx(d)
    with pytest.raises(ValueError):
        S.b92_lambda12(0.6, 0.5)


def test_b92_depolarized_state_lies_in_family():
    alpha = 0.38
    for delta in (0.005, 0.02, 0.03):
        rho, _ = S.b92_sifted_state(delta, alpha)
        lam = S.bell_weights(S.d2(rho))
        Q = lam[2] + lam[3]
        assert Q == pytest.approx(S.b92_q_of_delta(delta, alpha), abs=1e-12)
        s = (lam[0] - lam[1]) / (1 - Q)
        assert S.b92_s_lower(round(Q, 12), alpha) <= s + 1e-6


def test_b92_s_lower_range():
    assert S.b92_s_lower(0.0, 0.38) == 1.0
    vals = [S.b92_s_lower(Q, 0.38) for Q in (0.01, 0.03, 0.05)]
    assert all(0 <= v <= 1 for v in vals)
    assert vals[0] >= vals[1] >= vals[2]


def test_protocol_gamma_examples():
    six = S.six_state()
    assert np.allclose(six.gamma.state(0.1).array(), (0.85, 0.05, 0.05, 0.05))
    bb = S.bb84()
    assert bb.gamma.bounds(0.1) == [(0.0, 0.1)]
    assert np.allclose(bb.gamma.state(0.1, (0.03,)).array(), (0.83, 0.07, 0.07, 0.03))
    b = S.b92(0.38)
    lo, hi = b.gamma.bounds(0.04)[0]
    lam = b.gamma.state(0.04, (0.5 * (lo + hi), 0.3)).array()
    assert lam[2] + lam[3] == pytest.approx(0.04)
    with pytest.raises(ValueError):
        S.b92(0.8)
    with pytest.raises(ValueError):
        S.get_protocol("e91")


@given(st.floats(0.0, 0.3), st.floats(0.0, 1.0))
def test_family_qber_is_exact(Q, frac):
    assert S.six_state().gamma.state(Q).qber == pytest.approx(Q, abs=1e-12)
    assert S.bb84().gamma.state(Q, (frac * Q,)).qber == pytest.approx(Q, abs=1e-12)
