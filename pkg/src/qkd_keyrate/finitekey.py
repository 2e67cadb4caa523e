"""Finite-n key lengths, randomized post-processing and direct security checks.

Randomness comes from counter-based Philox generators keyed by a 64-bit seed
and a stream path (``make_rng(seed, *stream)``), so every Monte-Carlo number
is reproducible from the seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import qmat
from .entropy import (
    TypeClassSpectrum, log_binomial, log_multinomial, quantum_smooth,
)
from .states import BellDiagonal, as_lambda, eve_conditionals, eve_thetas

# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for ``seed`` and an independent sub-stream path."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# sampling and parameter estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleRecord:
    n: int
    x: np.ndarray
    y: np.ndarray
    lam: BellDiagonal
    seed: int


def pxy_of(lam) -> np.ndarray:
    lam = as_lambda(lam)
    c, e = (lam[0] + lam[1]) / 2, (lam[2] + lam[3]) / 2
    return np.array([[c, e], [e, c]])


def sample_collective(lam, n: int, seed: int) -> SampleRecord:
    """Draw ``n`` i.i.d. z-basis outcome pairs of a Bell-diagonal attack state."""
    if n < 1:
        raise ValueError("n must be positive")
    bd = lam if isinstance(lam, BellDiagonal) else BellDiagonal(tuple(np.ravel(lam)))
    rng = make_rng(seed, 0)
    x = rng.integers(0, 2, size=n, dtype=np.uint8)
    err = (rng.random(n) < bd.qber).astype(np.uint8)
    return SampleRecord(n, x, x ^ err, bd, int(seed))


def estimate_qber(rec: SampleRecord, k: int, threshold: float) -> tuple[float, bool]:
    """Error rate on a seeded random ``k``-subset; abort if it exceeds ``threshold``."""
    if k <= 0 or k > rec.n:
        raise ValueError("need 0 < k <= n")
    idx = make_rng(rec.seed, 1).choice(rec.n, size=k, replace=False)
    est = float(np.mean(rec.x[idx] != rec.y[idx]))
    return est, est > threshold


def ekert_failure_bound(n: int, eps: float, n_e: int, n_f: int) -> float:
    """``min(1, 2**(n_e + n_f) * exp(-n eps**2 / 8))``."""
    if eps <= 0:
        return 1.0
    log_b = (n_e + n_f) * math.log(2) - n * eps * eps / 8
    return 1.0 if log_b >= 0 else math.exp(log_b)


@dataclass(frozen=True)
class EkertReport:
    trials: int
    violations: int
    rate: float
    bound: float
    vacuous: bool
    max_statistic: float


def ekert_empirical_check(lam, n: int, k: int, eps: float, trials: int, seed: int,
                          outcomes: str = "pairs") -> EkertReport:
    """Monte-Carlo check of the sampling bound for an i.i.d. state.

    ``k`` pairs are measured in ``z (x) z`` and ``n - k`` in ``x (x) x``.
    With ``outcomes="pairs"`` the full four-outcome record is kept; with
    ``outcomes="parity"`` only whether the two bits agree.  A trial violates
    the bound when ``k/n d(Q_X, P_E) + (n-k)/n d(Q_Y, P_F) > eps`` for the
    true single-pair state; this over-counts violations of the bound, which
    only asks for *some* compatible state.
    """
    l1, l2, l3, l4 = as_lambda(lam)
    p_e = np.array([l1 + l2, l3 + l4, l3 + l4, l1 + l2]) / 2
    p_f = np.array([l1 + l3, l2 + l4, l2 + l4, l1 + l3]) / 2
    if outcomes == "parity":
        p_e = np.array([p_e[0] + p_e[3], p_e[1] + p_e[2]])
        p_f = np.array([p_f[0] + p_f[3], p_f[1] + p_f[2]])
    elif outcomes != "pairs":
        raise ValueError(f"unknown outcome set {outcomes!r}")
    rng = make_rng(seed, 2)
    qx = rng.multinomial(k, p_e, size=trials) / max(k, 1)
    qy = rng.multinomial(n - k, p_f, size=trials) / max(n - k, 1)
    stat = (k / n) * 0.5 * np.abs(qx - p_e).sum(axis=1) + ((n - k) / n) * 0.5 * np.abs(qy - p_f).sum(axis=1)
    viol = int(np.sum(stat > eps))
    bound = ekert_failure_bound(n, eps, p_e.size, p_f.size)
    return EkertReport(trials, viol, viol / trials, bound, bound >= 1.0, float(stat.max()))


# ---------------------------------------------------------------------------
# two-universal hashing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ToeplitzSeed:
    bits: np.ndarray

    @classmethod
    def random(cls, n: int, ell: int, rng: np.random.Generator) -> "ToeplitzSeed":
        return cls(rng.integers(0, 2, size=n + ell - 1, dtype=np.uint8))

    def prefix(self, n: int, ell: int) -> "ToeplitzSeed":
        """Seed for an ``ell``-bit hash whose rows are the first rows of this one."""
        return ToeplitzSeed(self.bits[: n + ell - 1])


def toeplitz_matrix(seed: ToeplitzSeed, n: int, ell: int) -> np.ndarray:
    """``T[i, j] = bits[i - j + n - 1]`` as an ``ell x n`` 0/1 matrix."""
    if len(seed.bits) != n + ell - 1:
        raise ValueError(f"seed length {len(seed.bits)} != n + ell - 1 = {n + ell - 1}")
    i = np.arange(ell)[:, None]
    j = np.arange(n)[None, :]
    return np.asarray(seed.bits, np.uint8)[i - j + n - 1]


def toeplitz_hash(bits, seed: ToeplitzSeed, ell: int) -> np.ndarray:
    """GF(2) product of the Toeplitz matrix with the input bit vector(s).

    ``bits`` may be a single vector or a 2-D array of row vectors.
    """
    b = np.asarray(bits, np.uint8)
    n = b.shape[-1]
    if ell == 0:
        return np.zeros(b.shape[:-1] + (0,), np.uint8)
    t = toeplitz_matrix(seed, n, ell)
    return ((b.astype(np.int64) @ t.T.astype(np.int64)) & 1).astype(np.uint8)


def toeplitz_collision_rate(n: int, ell: int, trials: int, seed: int, chunk: int = 100_000) -> float:
    """Empirical ``Pr[h(a) = h(b)]`` over random seeds and random ``a != b``."""
    rng = make_rng(seed, 3)
    idx = np.arange(ell)[:, None] - np.arange(n)[None, :] + n - 1
    hits = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        seeds = rng.integers(0, 2, size=(m, n + ell - 1), dtype=np.uint8)
        d = rng.integers(0, 2, size=(m, n), dtype=np.uint8)
        zero = ~d.any(axis=1)
        while zero.any():  # a != b  <=>  d = a xor b != 0
            d[zero] = rng.integers(0, 2, size=(int(zero.sum()), n), dtype=np.uint8)
            zero = ~d.any(axis=1)
        prod = (seeds[:, idx] & d[:, None, :]).sum(axis=2) & 1
        hits += int((~prod.any(axis=1)).sum())
        done += m
    return hits / trials


# ---------------------------------------------------------------------------
# error correction by random binning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ECResult:
    m: int
    x_hat: np.ndarray | None
    success: bool
    candidates: int = 0


def _bsc_pattern_atoms(n: int, Q: float):
    w = np.arange(n + 1)
    with np.errstate(divide="ignore"):
        logv = w * np.log2(Q) + (n - w) * np.log2(1 - Q) if 0 < Q < 1 else \
            np.where(w == (0 if Q == 0 else n), 0.0, -np.inf)
    return logv, log_binomial(n, w)


@lru_cache(maxsize=64)
def _candidate_patterns(n: int, Q: float, eps1: float) -> np.ndarray:
    """The most likely error patterns carrying probability at least ``1 - eps1``.

    Patterns are ordered by weight (most likely first for ``Q < 1/2``) and
    lexicographically within a weight.
    """
    logv, logm = _bsc_pattern_atoms(n, Q)
    h0 = quantum_smooth(0, (logv[np.isfinite(logv)], logm[np.isfinite(logv)]), eps1)
    count = int(round(2.0 ** h0)) if np.isfinite(h0) else 0
    pats = []
    for w in range(n + 1):
        for ones in _combinations(n, w):
            if len(pats) >= count:
                break
            p = np.zeros(n, np.uint8)
            p[list(ones)] = 1
            pats.append(p)
        if len(pats) >= count:
            break
    return np.array(pats, dtype=np.uint8).reshape(-1, n)


def _combinations(n, w):
    import itertools
    return itertools.combinations(range(n), w)


def ec_leak(n: int, Q: float, eps: float) -> tuple[int, float]:
    """Syndrome length ``m = ceil(H0^{eps/2}(X|Y) + log2(2/eps))`` for i.i.d. BSC(Q) noise."""
    eps1 = eps / 2
    logv, logm = _bsc_pattern_atoms(n, Q)
    ok = np.isfinite(logv)
    h0 = quantum_smooth(0, (logv[ok], logm[ok]), eps1)
    h0 = max(h0, 0.0)
    return int(math.ceil(h0 + math.log2(1 / eps1) - 1e-12)), h0


def ec_random_binning(x, y, eps: float, seed: int, qber: float | None = None) -> ECResult:
    """One-way error correction: send a Toeplitz syndrome of ``x``, decode near ``y``.

    Args:
        x, y: Alice's and Bob's bit strings (``n <= 20``).
        eps: target decoding error probability.
        seed: seed for the hash function (public randomness).
        qber: error rate of the channel model; defaults to the empirical
            Hamming fraction of ``x xor y``.
    """
    x = np.asarray(x, np.uint8)
    y = np.asarray(y, np.uint8)
    n = x.size
    if n > 20:
        raise ValueError("exhaustive decoding is limited to n <= 20")
    Q = float(np.mean(x != y)) if qber is None else float(qber)
    m, _ = ec_leak(n, Q, eps)
    pats = _candidate_patterns(n, round(Q, 15), eps / 2)
    hseed = ToeplitzSeed.random(n, m, make_rng(seed, 4))
    syn = toeplitz_hash(x, hseed, m)
    cands = y[None, :] ^ pats
    match = np.nonzero((toeplitz_hash(cands, hseed, m) == syn[None, :]).all(axis=1))[0]
    if match.size == 0:
        return ECResult(m, None, False, len(pats))
    x_hat = cands[match[0]]
    return ECResult(m, x_hat, bool(np.array_equal(x_hat, x)), len(pats))


def ec_failure_rate(n: int, Q: float, eps: float, trials: int, seed: int) -> float:
    """Empirical decoding failure rate over seeded i.i.d. trials."""
    rng = make_rng(seed, 5)
    fails = 0
    for t in range(trials):
        x = rng.integers(0, 2, size=n, dtype=np.uint8)
        y = x ^ (rng.random(n) < Q).astype(np.uint8)
        res = ec_random_binning(x, y, eps, seed=int(rng.integers(2**63)), qber=Q)
        fails += not res.success
    return fails / trials


# ---------------------------------------------------------------------------
# privacy amplification and key length
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteKeyResult:
    n: int
    eps: float
    ell: int
    leak_ec: int
    entropies: tuple
    ell_raw: float = 0.0
    method: str = ""
    details: dict = field(default_factory=dict)


def pa_bound(ze, e, eps: float) -> tuple[float, float, float]:
    """``S2^{e'}(ZE) - S0^{e'}(E) - 2 log2(1/eps)`` with ``e' = (eps/8)**2``.

    Returns ``(bound, S2, S0)``.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    e1 = (eps / 8) ** 2
    s2 = quantum_smooth(2, ze, e1)
    s0 = quantum_smooth(0, e, e1)
    return s2 - s0 - 2 * math.log2(1 / eps), s2, s0


def cq_single_copy(lam, q: float = 0.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pair spectra of ``rho_UE`` and ``rho_E`` and the ``U xor Y`` distribution."""
    s0, s1, pxy = eve_conditionals(lam)
    a = 0.5 * ((1 - q) * s0 + q * s1)
    b = 0.5 * (q * s0 + (1 - q) * s1)
    ue = np.concatenate([qmat.spectrum(a), qmat.spectrum(b)])
    e = qmat.spectrum(a + b)
    Q = pxy[0, 1] + pxy[1, 0]
    qe = q * (1 - Q) + (1 - q) * Q
    return ue, e, np.array([1 - qe, qe])


def pa_keylength(ze, e, eps: float, n: int | None = None) -> FiniteKeyResult:
    """Key length allowed by the privacy-amplification bound.

    Args:
        ze: state of the key string with Eve (matrix, spectrum,
            ``TypeClassSpectrum`` or weighted atoms).
        e: Eve's marginal state, same accepted forms.
        eps: security parameter.
        n: number of raw key bits (taken from ``ze`` when it is a
            ``TypeClassSpectrum``); the length is clamped to ``[0, n]``.
    """
    if n is None:
        n = ze.n if isinstance(ze, TypeClassSpectrum) else None
    raw, s2, s0 = pa_bound(ze, e, eps)
    ell = max(0, int(math.floor(raw + 1e-9)))
    if n is not None:
        ell = min(ell, int(n))
    return FiniteKeyResult(int(n or 0), eps, ell, 0, (s2, s0), raw, "pa")


def pa_keylength_product(lam, n: int, eps: float, q: float = 0.0) -> FiniteKeyResult:
    """``pa_keylength`` for ``n`` i.i.d. copies of the pair state (raw key ``U``)."""
    ue, e, _ = cq_single_copy(lam, q)
    return pa_keylength(TypeClassSpectrum(ue, n), TypeClassSpectrum(e, n), eps, n)


# --- type-conditioned state -------------------------------------------------

def type_counts(lam, n: int) -> np.ndarray:
    """Integer counts ``n_i`` summing to ``n`` closest to ``n * lam`` (largest remainder)."""
    lam = as_lambda(lam)
    raw = n * lam
    k = np.floor(raw).astype(int)
    rem = n - int(k.sum())
    order = np.argsort(-(raw - k), kind="stable")
    k[order[:rem]] += 1
    return k


def johnson_spectrum(m: int, w: int, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Spectrum of ``M[S, S'] = t**|S xor S'|`` on ``w``-subsets of ``m`` points, normalized to trace 1.

    Eigenvalues follow from the Johnson association scheme (Eberlein
    polynomials); multiplicities are ``C(m, j) - C(m, j-1)``.  Computed in
    exact rational arithmetic.

    Returns:
        ``(log2 eigenvalue, log2 multiplicity)`` for the nonzero eigenvalues.
    """
    w = min(w, m - w)
    total = math.comb(m, w)
    if w == 0:
        return np.array([-math.log2(total)]), np.array([math.log2(total)])
    if t == 1.0:
        return np.array([0.0]), np.array([0.0])
    if w > 400:
        raise ValueError("Johnson spectrum too large for exact evaluation")
    tt = Fraction(t) ** 2
    powers = [tt ** d for d in range(w + 1)]
    logv, logm = [], []
    for j in range(w + 1):
        theta = Fraction(0)
        for d in range(w + 1):
            e_dj = sum((-1) ** l * math.comb(j, l) * math.comb(w - j, d - l) * math.comb(m - w - j, d - l)
                       for l in range(0, min(j, d) + 1))
            if e_dj:
                theta += powers[d] * e_dj
        mult = math.comb(m, j) - (math.comb(m, j - 1) if j > 0 else 0)
        if theta > 0 and mult > 0:
            logv.append(math.log2(theta.numerator) - math.log2(theta.denominator) - math.log2(total))
            logm.append(math.log2(mult))
    return np.array(logv), np.array(logm)


def typical_atoms(lam, n: int, q: float = 0.0):
    """Spectra of the type-conditioned attack state.

    Conditioning Eve's purification on the type ``(n1, n2, n3, n4)`` of her
    Bell-index register gives a symmetric pure state whose reduced states
    are block diagonal over error patterns.  Returns weighted atoms
    ``(log2 value, log2 multiplicity)`` for

    * ``ue``: the raw key ``U`` together with Eve,
    * ``e``: Eve alone (flat, rank ``multinomial(n; counts)``),
    * ``f``: the pattern ``U xor Y`` that Bob must correct,

    and the counts used.
    """
    cnt = type_counts(lam, n)
    n1, n2, n3, n4 = (int(c) for c in cnt)
    k = n3 + n4
    log_sectors = n + float(log_binomial(n, k))  # (u, error pattern) sectors
    t = abs(1 - 2 * q)
    va, ma = johnson_spectrum(n1 + n2, n2, t)
    vb, mb = johnson_spectrum(k, n4, t)
    ue_v = (va[:, None] + vb[None, :]).ravel() - log_sectors
    ue_m = (ma[:, None] + mb[None, :]).ravel() + log_sectors
    lm = float(log_multinomial(n, cnt))
    e_atoms = (np.array([-lm]), np.array([lm]))
    w = np.arange(n + 1)
    if q == 0:
        f_v = np.array([-float(log_binomial(n, k))])
        f_m = np.array([float(log_binomial(n, k))])
    else:
        f_v = np.empty(n + 1)
        for wi in w:
            i = np.arange(max(0, k - (n - wi)), min(wi, k) + 1)
            terms = (log_binomial(wi, i) + log_binomial(n - wi, k - i)
                     + (wi + k - 2 * i) * math.log2(q) + (n - wi - k + 2 * i) * math.log2(1 - q))
            f_v[wi] = np.log2(np.sum(np.exp2(terms - terms.max()))) + terms.max()
        f_v -= float(log_binomial(n, k))
        f_m = log_binomial(n, w)
    return (ue_v, ue_m), e_atoms, (f_v, f_m), cnt


def finite_rate(spec, lam, chan=0.0, n: int = 1000, eps: float = 1e-6,
                method: str = "typical") -> FiniteKeyResult:
    """Finite-``n`` key length for a Bell-diagonal attack.

    ``eps`` is split equally between privacy amplification, error
    correction and parameter estimation.  With ``e_pa = e_ir = eps/3``:

        ell = S2^{(e_pa/8)^2}(UE) - S0^{(e_pa/8)^2}(E) - 2 log2(1/e_pa) - m,
        m   = ceil(H0^{e_ir/2}(U|Y) + log2(2/e_ir)).

    Args:
        spec: protocol (kept for reporting; the attack is given by ``lam``).
        lam: Bell weights of the attack.
        chan: flip probability ``q`` or a symmetric ``PreprocessChannel``.
        n: block length.
        eps: total security parameter.
        method: ``"typical"`` evaluates the state conditioned on the type
            of Eve's register (the symmetric-state route, corrections of order
            ``log n``); ``"product"`` evaluates ``sigma^{(x)n}`` directly
            (fluctuations of order ``sqrt(n)``).
    """
    q = chan if isinstance(chan, (int, float)) else chan.q
    if q is None:
        raise ValueError("finite_rate supports binary symmetric pre-processing only")
    q = float(q)
    e_pa = e_ir = eps / 3
    smooth = (e_pa / 8) ** 2
    if method == "typical":
        ue, e, f, cnt = typical_atoms(lam, n, q)
        details = {"counts": tuple(int(c) for c in cnt)}
    elif method == "product":
        ue1, e1, f1 = cq_single_copy(lam, q)
        ue, e, f = (TypeClassSpectrum(ue1, n), TypeClassSpectrum(e1, n), TypeClassSpectrum(f1, n))
        details = {}
    else:
        raise ValueError(f"unknown method {method!r}")
    s2 = quantum_smooth(2, ue, smooth)
    s0 = quantum_smooth(0, e, smooth)
    h0 = max(quantum_smooth(0, f, e_ir / 2), 0.0)
    leak = int(math.ceil(h0 + math.log2(2 / e_ir) - 1e-12))
    raw = s2 - s0 - 2 * math.log2(1 / e_pa) - leak
    ell = int(min(max(math.floor(raw + 1e-9), 0), n))
    details.update({"H0(U|Y)": h0, "eps_pa": e_pa, "eps_ir": e_ir, "eps_pe": eps / 3,
                    "smoothing": smooth, "protocol": getattr(spec, "name", str(spec))})
    return FiniteKeyResult(int(n), float(eps), ell, leak, (s2, s0), float(raw), method, details)


# ---------------------------------------------------------------------------
# direct security evaluation
# ---------------------------------------------------------------------------

def _eve_block_vectors(lam) -> np.ndarray:
    """Per-pair Eve vectors ``v[b, x]`` in block ``b`` (0: no error, 1: error).

    ``P_X(x) sigma_E^x`` restricted to block ``b`` equals ``v[b, x] v[b, x]^dagger``.
    """
    th = eve_thetas(lam)
    v = np.zeros((2, 2, 2), dtype=complex)
    for x in range(2):
        v[0, x] = th[x, x][:2]
        v[1, x] = th[x, 1 - x][2:]
    return v


def _all_bits(n: int) -> np.ndarray:
    z = np.arange(2**n)
    return ((z[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1).astype(np.uint8)


def _sector_vectors(v: np.ndarray, sector: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Rows: ``(x)_j v[sector_j, z_j]`` for every string ``z``."""
    out = v[sector[0], zs[:, 0]]
    for j in range(1, len(sector)):
        nxt = v[sector[j], zs[:, j]]
        out = (out[:, :, None] * nxt[:, None, :]).reshape(len(zs), -1)
    return out


def _distance_blocks(v, n, ell, tmat, zs) -> float:
    if ell == 0:
        return 0.0
    s_idx = ((zs.astype(np.int64) @ tmat.T.astype(np.int64)) & 1) @ (1 << np.arange(ell - 1, -1, -1))
    total = 0.0
    for sec in _all_bits(n):
        vecs = _sector_vectors(v, sec, zs)  # (2^n strings, 2^n dims)
        rho_e = vecs.T @ vecs.conj()
        mats = np.zeros((2**ell,) + rho_e.shape, dtype=complex)
        np.add.at(mats, s_idx, vecs[:, :, None] * vecs[:, None, :].conj())
        mats -= rho_e[None] / 2**ell
        total += 0.5 * np.abs(np.linalg.eigvalsh(mats)).sum()
    return float(total)


def _distance_dense(lam, n, ell, tmat, zs) -> float:
    s0, s1, _ = eve_conditionals(lam)
    sig = [0.5 * s0, 0.5 * s1]
    states = []
    for z in zs:
        states.append(qmat.tensor(*[sig[b] for b in z]))
    rho_e = sum(states)
    if ell == 0:
        return 0.0
    s_idx = ((zs.astype(np.int64) @ tmat.T.astype(np.int64)) & 1) @ (1 << np.arange(ell - 1, -1, -1))
    dist = 0.0
    for s in range(2**ell):
        a = sum((states[i] for i in np.nonzero(s_idx == s)[0]), np.zeros_like(rho_e))
        dist += qmat.trace_distance(a, rho_e / 2**ell)
    return float(dist)


def direct_security(lam, n: int, ell: int, eps: float, num_seeds: int = 16, seed: int = 0,
                    method: str = "blocks") -> tuple[float, bool]:
    """Exact distance of the hashed key from an ideal key, averaged over hash seeds.

    The raw key is Alice's z string ``Z`` of ``n`` pairs, Eve holds the
    ``n``-fold product of her conditional states, and ``S = T Z`` for a
    Toeplitz matrix ``T``.  Eve also learns the seed, so the distance is the
    average over seeds of ``sum_s || rho_SE(s) - 2^-ell rho_E ||_1 / 2``.
    Seeds for different ``ell`` are nested (prefixes of one seed), which makes
    the distance nondecreasing in ``ell``.

    Args:
        method: ``"blocks"`` uses the error-pattern block structure of Eve's
            states (exact); ``"dense"`` builds the full ``4**n`` operators.

    Returns:
        ``(distance, distance <= eps)``.
    """
    if 4**n > 4096:
        raise ValueError("n too large: 4**n must not exceed 4096")
    if not 0 <= ell <= n:
        raise ValueError("need 0 <= ell <= n")
    zs = _all_bits(n)
    v = _eve_block_vectors(lam)
    dist = 0.0
    for f in range(num_seeds):
        full = ToeplitzSeed.random(n, n, make_rng(seed, 6, f))
        tmat = toeplitz_matrix(full.prefix(n, ell), n, ell) if ell else np.zeros((0, n), np.uint8)
        if method == "blocks":
            dist += _distance_blocks(v, n, ell, tmat, zs)
        elif method == "dense":
            dist += _distance_dense(lam, n, ell, tmat, zs)
        else:
            raise ValueError(f"unknown method {method!r}")
    dist /= num_seeds
    return dist, dist <= eps


def gf2_rank(mat) -> int:
    """Rank of a 0/1 matrix over GF(2)."""
    a = np.array(mat, dtype=np.uint8) & 1
    rank = 0
    rows, cols = a.shape
    for c in range(cols):
        piv = np.nonzero(a[rank:, c])[0]
        if piv.size == 0:
            continue
        p = rank + piv[0]
        a[[rank, p]] = a[[p, rank]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != rank]
        a[others] ^= a[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def finite_asymptotic_gap(spec, lam, ns, eps: float, q: float = 0.0, method: str = "typical"):
    """``(n, ell/n, ell_raw/n)`` for several block lengths."""
    out = []
    for n in ns:
        r = finite_rate(spec, lam, q, n, eps, method)
        out.append((n, r.ell / n, r.ell_raw / n))
    return out
