import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkd_keyrate import finitekey as F, qmat, states as S
from qkd_keyrate.entropy import binary_entropy

SIX_005 = (1 - 1.5 * 0.05, 0.025, 0.025, 0.025)
SIX_010 = (0.85, 0.05, 0.05, 0.05)


# --- sampling ------------------------------------------------------------------

def test_sample_perfect_state_is_identical():
    rec = F.sample_collective((1, 0, 0, 0), 1000, seed=1)
    assert np.array_equal(rec.x, rec.y)


def test_sample_uniform_noise_qber():
    rec = F.sample_collective((0.25,) * 4, 10**5, seed=2)
    assert abs(np.mean(rec.x != rec.y) - 0.5) <= 0.005


def test_sample_frequencies_match_pxy_within_three_sigma():
    n = 10**5
    rec = F.sample_collective(SIX_010, n, seed=3)
    pxy = F.pxy_of(SIX_010)
    for x, y in itertools.product(range(2), repeat=2):
        freq = np.mean((rec.x == x) & (rec.y == y))
        sigma = math.sqrt(pxy[x, y] * (1 - pxy[x, y]) / n)
        assert abs(freq - pxy[x, y]) <= 3 * sigma


def test_sample_is_deterministic():
    a, b = F.sample_collective(SIX_010, 500, seed=9), F.sample_collective(SIX_010, 500, seed=9)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    c = F.sample_collective(SIX_010, 500, seed=10)
    assert not np.array_equal(a.x, c.x)


def test_sample_rejects_empty():
    with pytest.raises(ValueError):
        F.sample_collective(SIX_010, 0, seed=0)


def test_estimate_qber_examples():
    rec = F.sample_collective((1, 0, 0, 0), 100, seed=0)
    assert F.estimate_qber(rec, 50, 0.11) == (0.0, False)
    rec = F.sample_collective(SIX_010, 400, seed=0)
    assert F.estimate_qber(rec, 400, 0.5)[0] == pytest.approx(np.mean(rec.x != rec.y))
    with pytest.raises(ValueError):
        F.estimate_qber(rec, 0, 0.1)


def test_estimate_qber_aborts_at_high_noise():
    lam = S.six_state().gamma.state(0.2)
    aborts = sum(F.estimate_qber(F.sample_collective(lam, 1000, seed=s), 1000, 0.11)[1] for s in range(100))
    assert aborts == 100


# --- Ekert sampling bound -------------------------------------------------------------

def test_ekert_failure_bound_examples():
    assert F.ekert_failure_bound(100, 0.0, 4, 4) == 1.0
    assert F.ekert_failure_bound(10**5, 0.05, 4, 4) == pytest.approx(256 * math.exp(-31.25))
    vals = [F.ekert_failure_bound(n, 0.05, 4, 4) for n in (10**4, 3 * 10**4, 10**5)]
    assert vals[0] >= vals[1] >= vals[2]


def test_ekert_check_perfect_state_statistic_zero():
    rep = F.ekert_empirical_check((1, 0, 0, 0), 1000, 500, 0.05, 50, seed=0, outcomes="parity")
    assert rep.max_statistic == 0.0 and rep.violations == 0
    # with the full outcome record only sampling noise of the uniform bit remains
    rep = F.ekert_empirical_check((1, 0, 0, 0), 1000, 500, 0.05, 50, seed=0)
    assert rep.violations == 0 and rep.max_statistic > 0


def test_ekert_check_vacuous_regime_reported():
    rep = F.ekert_empirical_check(SIX_010, 100, 50, 0.001, 100, seed=0)
    assert rep.vacuous and rep.bound == 1.0
    assert rep.rate <= rep.bound


# --- Toeplitz hashing ----------------------------------------------------------

def test_toeplitz_structure():
    seed = F.ToeplitzSeed(np.array([1, 0, 1, 1, 0, 0], np.uint8))
    t = F.toeplitz_matrix(seed, 4, 3)
    assert t.shape == (3, 4)
    for i in range(1, 3):
        for j in range(1, 4):
            assert t[i, j] == t[i - 1, j - 1]
    with pytest.raises(ValueError):
        F.toeplitz_matrix(seed, 5, 3)


@given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.integers(1, 8))
@settings(max_examples=50, deadline=None)
def test_toeplitz_hash_is_linear(seed, n, ell):
    rng = np.random.default_rng(seed)
    ts = F.ToeplitzSeed.random(n, ell, rng)
    a, b = rng.integers(0, 2, n, dtype=np.uint8), rng.integers(0, 2, n, dtype=np.uint8)
    assert not F.toeplitz_hash(np.zeros(n, np.uint8), ts, ell).any()
    assert np.array_equal(F.toeplitz_hash(a ^ b, ts, ell), F.toeplitz_hash(a, ts, ell) ^ F.toeplitz_hash(b, ts, ell))


def test_toeplitz_two_universal():
    trials = 10**6
    rate = F.toeplitz_collision_rate(10, 3, trials, seed=0)
    p = 2.0**-3
    sigma = math.sqrt(p * (1 - p) / trials)
    assert rate <= p + 5 * sigma


def test_gf2_rank_against_image_size(rng):
    for _ in range(20):
        m = rng.integers(0, 2, size=(int(rng.integers(1, 5)), int(rng.integers(1, 6))), dtype=np.uint8)
        vecs = np.array(list(itertools.product([0, 1], repeat=m.shape[1])), dtype=np.int64)
        image = {tuple(v) for v in (vecs @ m.T.astype(np.int64)) & 1}
        assert 2 ** F.gf2_rank(m) == len(image)


# --- error correction ----------------------------------------------------------

def test_ec_identical_strings():
    x = np.array([1, 0, 1, 1, 0, 0, 1, 0], np.uint8)
    res = F.ec_random_binning(x, x, 0.1, seed=3)
    assert res.success and np.array_equal(res.x_hat, x)
    assert res.m <= math.ceil(math.log2(2 / 0.1))


def test_ec_failure_rate_within_eps():
    assert F.ec_failure_rate(14, 0.1, 0.1, 300, seed=5) <= 0.1


def test_ec_leak_exceeds_shannon_bound():
    for n in (8, 14, 20):
        m, h0 = F.ec_leak(n, 0.1, 0.1)
        assert m >= n * binary_entropy(0.1) - 2 * math.sqrt(n)
        assert m >= h0


def test_ec_rejects_long_strings():
    with pytest.raises(ValueError):
        F.ec_random_binning(np.zeros(21, np.uint8), np.zeros(21, np.uint8), 0.1, seed=0)


# --- privacy amplification / key length --------------------------------------------

def test_pa_keylength_perfect_key():
    res = F.pa_keylength_product((1, 0, 0, 0), 100, 1e-6)
    assert res.ell == math.floor(100 - 2 * math.log2(1e6))
    assert res.entropies == pytest.approx((100.0, 0.0), abs=1e-9)


def test_pa_keylength_eps_to_one():
    res = F.pa_keylength_product(SIX_010, 20, 1 - 1e-9)
    s2, s0 = res.entropies
    assert res.ell_raw == pytest.approx(s2 - s0, abs=1e-6)


def test_pa_keylength_validates_eps():
    with pytest.raises(ValueError):
        F.pa_keylength(np.array([0.5, 0.5]), np.array([1.0]), 0.0)


def test_type_counts_sum_and_rounding():
    c = F.type_counts(SIX_005, 1000)
    assert c.sum() == 1000 and tuple(c) == (925, 25, 25, 25)
    assert F.type_counts((0.5, 0.5, 0, 0), 3).sum() == 3


def _brute_typical(cnt, q):
    """Dense spectra of the type-conditioned state (uniform superposition over arrangements)."""
    n = sum(cnt)
    seqs = [s for s in itertools.product(range(4), repeat=n) if all(s.count(a) == cnt[a] for a in range(4))]
    psi = np.zeros((2**n, 2**n, len(seqs)), complex)
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    for e, seq in enumerate(seqs):
        v = qmat.tensor(*[S.BELL[i] for i in seq])
        psi[:, :, e] = v.reshape([2] * (2 * n)).transpose(perm).reshape(2**n, 2**n)
    psi /= math.sqrt(len(seqs))
    zs = np.array(list(itertools.product([0, 1], repeat=n)))
    flip = lambda u, x: q ** np.sum(zs[u] != zs[x]) * (1 - q) ** np.sum(zs[u] == zs[x])
    ue, pf = [], np.zeros(2**n)
    for u in range(2**n):
        r = sum(flip(u, x) * psi[x].T @ psi[x].conj() for x in range(2**n))
        ue.append(np.linalg.eigvalsh(r))
        for x in range(2**n):
            for y in range(2**n):
                f = int("".join(map(str, zs[u] ^ zs[y])), 2)
                pf[f] += flip(u, x) * np.linalg.norm(psi[x, y]) ** 2
    e = np.linalg.eigvalsh(sum(psi[x].T @ psi[x].conj() for x in range(2**n)))
    return [np.sort(a)[::-1] for a in (np.concatenate(ue), e, pf)]


def _expand(atoms):
    v, m = atoms
    out = np.concatenate([np.full(int(round(2**b)), 2.0**a) for a, b in zip(v, m)])
    return np.sort(out)[::-1]


@pytest.mark.parametrize("cnt,q", [((2, 1, 1, 0), 0.0), ((1, 1, 1, 1), 0.2), ((1, 2, 1, 0), 0.3), ((2, 0, 1, 1), 0.1)])
def test_typical_atoms_match_dense_construction(cnt, q):
    ue, e, f, c = F.typical_atoms(np.array(cnt) / 4, 4, q)
    assert tuple(c) == cnt
    for atoms, dense in zip((ue, e, f), _brute_typical(cnt, q)):
        dense = dense[dense > 1e-12]
        mine = _expand(atoms)
        mine = mine[mine > 1e-12]
        assert mine.shape == dense.shape
        assert np.allclose(mine, dense, atol=1e-12)


def test_johnson_spectrum_trace_and_limits():
    v, m = F.johnson_spectrum(10, 3, 0.6)
    assert np.exp2(v + m).sum() == pytest.approx(1.0)
    v, m = F.johnson_spectrum(10, 3, 0.0)  # identity: flat over C(10,3) subsets
    assert np.allclose(v, -math.log2(120)) and np.exp2(m).sum() == pytest.approx(120)
    v, m = F.johnson_spectrum(10, 3, 1.0)  # all-ones: rank one
    assert v.tolist() == [0.0]


# frozen regression values for the type-conditioned accounting (spectra validated above)
FINITE_FROZEN = {50: 0, 100: 0, 500: 194, 1000: 441}


def test_finite_rate_six_state_sequence():
    spec = S.six_state()
    prev = -math.inf
    for n, ell in FINITE_FROZEN.items():
        r = F.finite_rate(spec, SIX_005, 0.0, n, 1e-6)
        assert r.ell == ell
        assert 0 <= r.ell <= n
        assert r.ell_raw / n > prev
        prev = r.ell_raw / n


def test_finite_rate_perfect_correlations():
    r = F.finite_rate(S.six_state(), (1, 0, 0, 0), 0.0, 500, 1e-6)
    overhead = 2 * math.log2(3e6) + math.log2(6e6) + 1
    assert r.ell >= 500 - overhead - 1
    assert r.ell <= 500


def test_finite_rate_product_route_is_worse():
    typ = F.finite_rate(S.six_state(), SIX_005, 0.0, 1000, 1e-6, "typical")
    prod = F.finite_rate(S.six_state(), SIX_005, 0.0, 1000, 1e-6, "product")
    assert prod.ell_raw < typ.ell_raw
    with pytest.raises(ValueError):
        F.finite_rate(S.six_state(), SIX_005, 0.0, 100, 1e-6, "other")


def test_finite_rate_with_preprocessing_runs():
    r = F.finite_rate(S.six_state(), SIX_010, 0.1, 2000, 1e-6)
    assert 0 <= r.ell <= 2000
    assert r.details["counts"] == (1700, 100, 100, 100)


# --- direct security ---------------------------------------------------------------

def test_direct_security_ell_zero():
    assert F.direct_security(SIX_010, 4, 0, 0.1, num_seeds=3, seed=0) == (0.0, True)


def test_direct_security_perfect_state_equals_rank_deficiency():
    # Eve is decoupled; the only imperfection is a rank-deficient Toeplitz matrix
    n = 4
    for ell in range(n + 1):
        dist, _ = F.direct_security((1, 0, 0, 0), n, ell, 0.1, num_seeds=8, seed=0)
        expected = 0.0
        if ell:
            for f in range(8):
                full = F.ToeplitzSeed.random(n, n, F.make_rng(0, 6, f))
                t = F.toeplitz_matrix(full.prefix(n, ell), n, ell)
                expected += 1 - 2.0 ** (F.gf2_rank(t) - ell)
            expected /= 8
        assert dist == pytest.approx(expected, abs=1e-12)


def test_direct_security_blocks_match_dense():
    for ell in range(4):
        a = F.direct_security(SIX_010, 3, ell, 0.1, num_seeds=3, seed=2)[0]
        b = F.direct_security(SIX_010, 3, ell, 0.1, num_seeds=3, seed=2, method="dense")[0]
        assert a == pytest.approx(b, abs=1e-10)


def test_direct_security_monotone_in_ell():
    d = [F.direct_security(SIX_010, 4, ell, 0.1, num_seeds=6, seed=1)[0] for ell in range(5)]
    assert all(b >= a - 1e-12 for a, b in zip(d, d[1:]))


def test_direct_security_size_limit():
    with pytest.raises(ValueError):
        F.direct_security(SIX_010, 7, 1, 0.1)


def test_make_rng_streams_independent():
    a = F.make_rng(5, 1).integers(0, 2**32, 4)
    b = F.make_rng(5, 2).integers(0, 2**32, 4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, F.make_rng(5, 1).integers(0, 2**32, 4))
