"""Shannon / von Neumann entropies and smooth Renyi entropies of order 0 and 2.

All logarithms are base 2.  Smooth entropies follow operational definitions
that are exactly computable:

* order 0 -- drop at most ``eps`` probability mass so that the support is as
  small as possible, i.e. keep the largest atoms;
* order 2 -- choose a pointwise-dominated, subnormalized ``Q <= P`` with
  ``sum(Q) >= sum(P) - eps`` minimizing ``sum(Q**2)``; the optimum caps the
  largest atoms at a common level.

Quantum versions act on eigenvalues.  For n-fold products the spectrum is
handled through type classes (``TypeClassSpectrum``) so ``d**n`` values are
never materialized.

``check_inequalities`` evaluates both sides of the standard chain-rule and
measurement inequalities for smooth entropies; it is the regression guard for
the definitions above.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import lgamma, log, log2, sqrt

import numpy as np
from scipy.special import gammaln

from . import qmat

ATOM_FLOOR = 1e-15
MASS_TOL = 1e-12
_LN2 = log(2.0)
MAX_TYPES = 3_000_000


# ---------------------------------------------------------------------------
# plain entropies
# ---------------------------------------------------------------------------

def _prob(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if np.any(p < -MASS_TOL) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and nonnegative")
    if p.sum() > 1 + 1e-9:
        raise ValueError(f"probabilities sum to {p.sum()} > 1")
    return np.clip(p, 0.0, None)


def shannon(p) -> float:
    """Shannon entropy ``-sum p log2 p`` with ``0 log 0 = 0``."""
    p = _prob(p)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def binary_entropy(x) -> float | np.ndarray:
    """Binary entropy function; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("binary entropy argument outside [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(x > 0, x * np.log2(x), 0.0) - np.where(x < 1, (1 - x) * np.log2(1 - x), 0.0)
    return float(h) if h.ndim == 0 else h


def _spectrum_of(state) -> np.ndarray:
    a = np.asarray(state)
    if a.ndim == 2:
        return qmat.spectrum(a)
    if a.ndim == 1:
        return _prob(a)
    raise ValueError("expected a density matrix or a spectrum")


def von_neumann(state) -> float:
    """Von Neumann entropy of a density matrix (or of a given spectrum)."""
    if isinstance(state, TypeClassSpectrum):
        return state.n * shannon(state.per_symbol)
    return shannon(_spectrum_of(state))


def cond_vn(rho, dims, cut) -> float:
    """Conditional entropy ``S(U|V) = S(UV) - S(V)``.

    Args:
        rho: joint state on the subsystems with sizes ``dims``.
        dims: subsystem dimensions.
        cut: indices of the conditioning subsystems ``V``; every other
            subsystem belongs to ``U``.
    """
    cut = [cut] if np.isscalar(cut) else list(cut)
    rho_v = qmat.partial_trace(rho, dims, cut) if cut else np.ones((1, 1))
    return von_neumann(rho) - von_neumann(rho_v)


# ---------------------------------------------------------------------------
# smoothing on weighted atoms (value, multiplicity), in log2 space
# ---------------------------------------------------------------------------

def _check_eps(eps) -> float:
    eps = float(eps)
    if not 0 <= eps < 1:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    return eps


def _lse2(x: np.ndarray) -> float:
    """log2(sum(2**x)) for an array of log2 values."""
    if x.size == 0:
        return -np.inf
    m = float(np.max(x))
    if not np.isfinite(m):
        return m
    return m + float(np.log2(np.sum(np.exp2(x - m))))


def _prep_atoms(logv, logm):
    logv = np.asarray(logv, dtype=float)
    logm = np.asarray(logm, dtype=float)
    order = np.argsort(-logv, kind="stable")
    return logv[order], logm[order]


def _h0_atoms(logv, logm, eps: float) -> float:
    """Order-0 smooth entropy of atoms with values 2**logv, multiplicities 2**logm."""
    logv, logm = _prep_atoms(logv, logm)
    mass = np.exp2(logv + logm)
    total = float(mass.sum())
    need = total - eps
    if need <= MASS_TOL * max(total, 1.0):
        return -np.inf
    cum = np.cumsum(mass)
    slack = MASS_TOL * max(total, 1.0)
    j = int(np.searchsorted(cum, need - slack, side="left"))
    j = min(j, len(mass) - 1)
    before = float(cum[j - 1]) if j > 0 else 0.0
    # copies of atom group j still required
    rem = max(need - before, 0.0)
    if rem <= slack:
        part_log = -np.inf
    else:
        est = log2(rem) - logv[j]  # log2 of the (fractional) number of copies
        if est < 50:
            part = float(np.ceil(2.0 ** est * (1 - 1e-12)))
            part = min(part, 2.0 ** logm[j])
            part_log = log2(part) if part > 0 else -np.inf
        else:
            part_log = min(est, float(logm[j]))
    logs = np.append(logm[:j], part_log)
    return _lse2(logs)


def _h2_atoms(logv, logm, eps: float) -> float:
    """Order-2 smooth entropy by capping the largest atoms."""
    logv, logm = _prep_atoms(logv, logm)
    mass = np.exp2(logv + logm)
    total = float(mass.sum())
    if total - eps <= MASS_TOL * max(total, 1.0):
        return np.inf
    coll_terms = logm + 2 * logv
    if eps <= 0:
        return -_lse2(coll_terms)
    cum = np.cumsum(mass)
    for k in range(1, len(logv) + 1):
        s_k = float(cum[k - 1]) - eps
        if s_k <= 0:
            continue
        log_mk = _lse2(logm[:k])
        log_c = log2(s_k) - log_mk
        nxt = logv[k] if k < len(logv) else -np.inf
        if log_c >= nxt - 1e-14:
            terms = np.append(coll_terms[k:], log_mk + 2 * log_c)
            return -_lse2(terms)
    raise AssertionError("capping level not found")  # pragma: no cover


def _atoms_from_probs(p) -> tuple[np.ndarray, np.ndarray]:
    p = _prob(p)
    p = p[p > ATOM_FLOOR]
    return np.log2(p), np.zeros_like(p)


def smooth_renyi0(p, eps: float) -> float:
    """Smooth Renyi entropy of order 0 (bits).

    log2 of the smallest number of atoms that together carry all but at most
    ``eps`` of the probability mass.
    """
    eps = _check_eps(eps)
    return _h0_atoms(*_atoms_from_probs(p), eps)


def smooth_renyi2(p, eps: float) -> float:
    """Smooth Renyi entropy of order 2 (bits).

    ``max -log2 sum(Q**2)`` over ``0 <= Q <= P`` with ``sum(Q) >= sum(P) - eps``.
    The optimum caps the largest weights at a common level removing exactly
    ``eps`` mass.
    """
    eps = _check_eps(eps)
    return _h2_atoms(*_atoms_from_probs(p), eps)


# ---------------------------------------------------------------------------
# conditional classical versions: pxy[x, y], condition on y
# ---------------------------------------------------------------------------

def _joint(pxy) -> np.ndarray:
    pxy = np.asarray(pxy, dtype=float)
    if pxy.ndim != 2:
        raise ValueError("joint distribution must be a 2-D array indexed [x, y]")
    _prob(pxy)
    return np.clip(pxy, 0.0, None)


def smooth_renyi0_cond(pxy, eps: float) -> float:
    """Conditional smooth order-0 entropy ``H0^eps(X|Y)``.

    Mass totalling at most ``eps`` may be removed anywhere in the joint
    distribution; the result is log2 of the largest remaining conditional
    support.  The optimum keeps the ``k`` largest atoms of every column, so
    we search for the smallest affordable ``k``.
    """
    eps = _check_eps(eps)
    pxy = _joint(pxy)
    cols = -np.sort(-pxy, axis=0)
    tail = pxy.sum(axis=0)[None, :] - np.cumsum(cols, axis=0)
    cost = np.concatenate([[pxy.sum()], tail.sum(axis=1)])  # cost[k] keeps top-k
    # the round-off slack is meant per conditional distribution, so scale it
    # by the lightest column; otherwise tiny atoms of light columns vanish
    py = pxy.sum(axis=0)
    slack = MASS_TOL * float(py[py > ATOM_FLOOR].min(initial=1.0))
    ok = np.nonzero(cost <= eps + slack)[0]
    k = int(ok[0])
    return -np.inf if k == 0 else log2(k)


def _removal_for_collision(q: np.ndarray, target: float) -> float:
    """Least mass to cap from ``q`` so that ``sum(min(q, c)**2) <= target``."""
    q = np.sort(q[q > 0])[::-1]
    if q.size == 0 or float((q * q).sum()) <= target:
        return 0.0
    tail_sq = np.concatenate([np.cumsum((q * q)[::-1])[::-1], [0.0]])
    for k in range(1, q.size + 1):
        rest = target - tail_sq[k]
        if rest < 0:
            continue
        c = sqrt(rest / k)
        nxt = q[k] if k < q.size else 0.0
        if c >= nxt:
            return float(np.clip(q - c, 0.0, None).sum())
    return float(q.sum())  # pragma: no cover


def smooth_renyi2_cond(pxy, eps: float) -> float:
    """Conditional smooth order-2 entropy ``H2^eps(X|Y)``.

    Worst case over ``y`` of ``-log2 sum_x Q(x|y)**2`` with
    ``Q(x|y) = Q(x, y) / P_Y(y)``, maximized over dominated ``Q`` removing at
    most ``eps`` joint mass.  Solved by bisection on the target entropy; for
    each ``y`` the cheapest removal is a capping of the conditional weights.
    """
    eps = _check_eps(eps)
    pxy = _joint(pxy)
    py = pxy.sum(axis=0)
    cols = [(py[y], pxy[:, y] / py[y]) for y in range(pxy.shape[1]) if py[y] > ATOM_FLOOR]
    if not cols:
        return np.inf

    def cost(h):
        t = 2.0 ** (-h)
        return sum(w * _removal_for_collision(q, t) for w, q in cols)

    lo = min(-log2(float((q * q).sum())) for _, q in cols)
    if eps <= 0:
        return lo
    hi = lo + 1.0
    while cost(hi) <= eps:
        lo, hi = hi, hi + 2 * (hi - lo)
        if hi > 1e4:
            return np.inf
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if cost(mid) <= eps:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return lo


# ---------------------------------------------------------------------------
# quantum versions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeClassSpectrum:
    """Spectrum of ``rho^{(x)n}`` described by the single-copy spectrum.

    The eigenvalue ``prod_i p_i**k_i`` occurs ``multinomial(n; k) * prod_i m_i**k_i``
    times, where ``p_i`` are the distinct single-copy eigenvalues with
    multiplicities ``m_i``.
    """

    per_symbol: np.ndarray
    n: int

    def __post_init__(self):
        p = _prob(self.per_symbol)
        if abs(p.sum() - 1) > 1e-9:
            raise ValueError("per-symbol spectrum must be normalized")
        if int(self.n) < 1:
            raise ValueError("n must be positive")
        object.__setattr__(self, "per_symbol", p)
        object.__setattr__(self, "n", int(self.n))

    def distinct(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct nonzero single-copy eigenvalues and their multiplicities."""
        p = np.sort(self.per_symbol[self.per_symbol > ATOM_FLOOR])[::-1]
        vals, mult = [], []
        for x in p:
            if vals and abs(x - vals[-1]) <= 1e-13 * max(x, 1e-300):
                mult[-1] += 1
            else:
                vals.append(float(x))
                mult.append(1)
        return np.array(vals), np.array(mult, dtype=float)

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        """(log2 eigenvalue, log2 multiplicity) for every type class."""
        vals, mult = self.distinct()
        k = compositions(self.n, len(vals))
        logv = k @ np.log2(vals)
        logm = log_multinomial(self.n, k) + k @ np.log2(mult)
        return logv, logm


def compositions(n: int, d: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``d`` summing to ``n``."""
    count = np.exp(lgamma(n + d) - lgamma(n + 1) - lgamma(d))
    if count > MAX_TYPES:
        raise ValueError(f"{count:.3g} type classes exceeds the limit {MAX_TYPES}")
    if d == 1:
        return np.array([[n]], dtype=np.int64)
    blocks = []
    for k in range(n + 1):
        rest = compositions(n - k, d - 1)
        blocks.append(np.column_stack([np.full(len(rest), k), rest]))
    return np.concatenate(blocks)


def log_multinomial(n: int, k) -> np.ndarray:
    """log2 of multinomial coefficients ``n! / prod k_i!``, row-wise."""
    k = np.asarray(k, dtype=float)
    return (gammaln(n + 1) - gammaln(k + 1).sum(axis=-1)) / _LN2


def log_binomial(n, k):
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) / _LN2


def _atoms_of_state(state):
    if isinstance(state, TypeClassSpectrum):
        return state.atoms()
    if isinstance(state, tuple) and len(state) == 2:
        return np.asarray(state[0], float), np.asarray(state[1], float)
    return _atoms_from_probs(_spectrum_of(state))


def quantum_smooth(alpha: int, state, eps: float) -> float:
    """Smooth Renyi entropy of order ``alpha`` in {0, 2} of a quantum state.

    Args:
        alpha: 0 or 2.
        state: density matrix, spectrum vector, ``TypeClassSpectrum``, or a
            ``(log2 values, log2 multiplicities)`` pair of weighted atoms.
        eps: smoothing parameter in [0, 1).
    """
    eps = _check_eps(eps)
    logv, logm = _atoms_of_state(state)
    if alpha == 0:
        return _h0_atoms(logv, logm, eps)
    if alpha == 2:
        return _h2_atoms(logv, logm, eps)
    raise ValueError("alpha must be 0 or 2")


@dataclass(frozen=True)
class CqSpectrum:
    """Classical-quantum state ``sum_z P_Z(z) rho_U^z (x) |z><z|`` by spectra."""

    probs: np.ndarray
    spectra: tuple = field(default_factory=tuple)

    def __post_init__(self):
        probs = _prob(self.probs)
        if abs(probs.sum() - 1) > 1e-9:
            raise ValueError("P_Z must be normalized")
        specs = tuple(_spectrum_of(s) for s in self.spectra)
        if len(specs) != probs.size:
            raise ValueError("one spectrum per z value is required")
        for s in specs:
            if abs(s.sum() - 1) > 1e-9:
                raise ValueError("conditional spectra must be normalized")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "spectra", specs)

    @classmethod
    def from_states(cls, probs, states):
        return cls(np.asarray(probs, float), tuple(qmat.spectrum(s) for s in states))

    def joint(self) -> np.ndarray:
        """Joint weights indexed [eigen-index, z]."""
        d = max(s.size for s in self.spectra)
        out = np.zeros((d, len(self.spectra)))
        for z, (pz, s) in enumerate(zip(self.probs, self.spectra)):
            out[: s.size, z] = pz * np.sort(s)[::-1]
        return out


def quantum_smooth_cond(alpha: int, cq: CqSpectrum, eps: float) -> float:
    """``S_alpha^eps(U|Z)`` for a classical-quantum state."""
    if alpha == 0:
        return smooth_renyi0_cond(cq.joint(), eps)
    if alpha == 2:
        return smooth_renyi2_cond(cq.joint(), eps)
    raise ValueError("alpha must be 0 or 2")


# ---------------------------------------------------------------------------
# inequality checks
# ---------------------------------------------------------------------------

CHECK_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    lhs: float
    rhs: float
    relation: str  # "<=", ">=", "<", ">"
    passed: bool
    vacuous: bool = False

    @property
    def slack(self) -> float:
        if self.relation in ("<=", "<"):
            return self.rhs - self.lhs
        return self.lhs - self.rhs


def _compare(name, lhs, rhs, relation, tol=CHECK_TOL) -> CheckResult:
    lhs, rhs = float(lhs), float(rhs)
    vacuous = not (np.isfinite(lhs) and np.isfinite(rhs))
    if relation in ("<=", "<"):
        ok = lhs <= rhs + tol if np.isfinite(lhs) or np.isfinite(rhs) else True
    else:
        ok = lhs >= rhs - tol if np.isfinite(lhs) or np.isfinite(rhs) else True
    return CheckResult(name, lhs, rhs, relation, bool(ok), vacuous)


@dataclass
class InequalityInstance:
    """Random test instance for the smooth-entropy inequalities.

    Attributes:
        rho_uv: bipartite state on ``dims``.
        dims: (d_U, d_V).
        pz: distribution of the classical register.
        rho_u_z: conditional states of U given z.
        rho_v_z: conditional states of V given z (U-Z-V Markov structure).
        kraus: trace-preserving measurement operators on U.
        projectors: complete set of orthogonal projectors on U.
        unital: Kraus operators of a unital channel on U.
    """

    rho_uv: np.ndarray
    dims: tuple
    pz: np.ndarray
    rho_u_z: list
    rho_v_z: list
    kraus: list
    projectors: list
    unital: list


def _random_rank(d, rng):
    return int(rng.integers(1, d + 1))


def _random_spectrum_state(d, rng):
    """Random state with a skewed spectrum, to exercise the smoothing."""
    rank = _random_rank(d, rng)
    w = rng.dirichlet(np.full(rank, rng.choice([0.2, 1.0, 5.0])))
    w = np.concatenate([w, np.zeros(d - rank)])
    u = qmat.random_unitary(d, rng)
    return (u * w) @ u.conj().T


def random_inequality_instance(rng: np.random.Generator, max_dim: int = 8) -> InequalityInstance:
    """Draw a random small instance (all dimensions at most ``max_dim``)."""
    du = int(rng.integers(2, 5))
    dv = int(rng.integers(1, max_dim // du + 1))
    rho_uv = _random_spectrum_state(du * dv, rng)
    nz = int(rng.integers(1, 5))
    pz = rng.dirichlet(np.full(nz, rng.choice([0.3, 1.0, 5.0])))
    rho_u_z = [_random_spectrum_state(du, rng) for _ in range(nz)]
    rho_v_z = [_random_spectrum_state(max(dv, 2), rng) for _ in range(nz)]
    # general measurement: Kraus operators from an isometry
    m = int(rng.integers(1, 5))
    iso = qmat.random_unitary(du * m, rng)[:, :du]
    kraus = [iso[i * du:(i + 1) * du, :] for i in range(m)]
    # von Neumann measurement: split an orthonormal basis into blocks
    basis = qmat.random_unitary(du, rng)
    cuts = np.sort(rng.choice(np.arange(1, du), size=int(rng.integers(0, du)), replace=False))
    projectors = [basis[:, a:b] @ basis[:, a:b].conj().T
                  for a, b in zip(np.r_[0, cuts], np.r_[cuts, du]) if b > a]
    # unital channel: random mixture of unitaries
    k = int(rng.integers(1, 4))
    w = rng.dirichlet(np.ones(k))
    unital = [sqrt(wi) * qmat.random_unitary(du, rng) for wi in w]
    return InequalityInstance(rho_uv, (du, dv), pz, rho_u_z, rho_v_z, kraus, projectors, unital)


def _S(alpha, rho, eps):
    return quantum_smooth(alpha, rho, eps)


def _log_inv(eps):
    return np.inf if eps <= 0 else log2(1 / eps)


def check_inequalities(inst: InequalityInstance, eps: float, eps1: float, eps2: float) -> list[CheckResult]:
    """Evaluate both sides of the smooth-entropy inequalities on one instance.

    ``eps, eps1, eps2`` play the roles of the three smoothing parameters
    (``eps``, ``eps'``, ``eps''``).  Terms containing ``2 log(1/eps)`` are
    vacuous when that parameter is zero.  Every inequality is reported; a
    failing entry means the entropy definitions are inconsistent.
    """
    out = []
    e, e1, e2 = eps, eps1, eps2
    du, dv = inst.dims
    rho_u = qmat.partial_trace(inst.rho_uv, [du, dv], [0])
    rho_v = qmat.partial_trace(inst.rho_uv, [du, dv], [1])

    def ok_eps(*xs):
        return all(x < 1 for x in xs)

    # subadditivity-type bounds
    if ok_eps(e + e1):
        out.append(_compare("s2_joint_upper", _S(2, inst.rho_uv, e),
                            _S(2, rho_u, e + e1) + _S(0, rho_v, e1), "<="))
        out.append(_compare("s2_joint_lower", _S(2, inst.rho_uv, e + e1),
                            _S(2, rho_u, e) - _S(0, rho_v, e1), ">="))
        out.append(_compare("s0_joint_upper", _S(0, inst.rho_uv, e + e1),
                            _S(0, rho_u, e) + _S(0, rho_v, e1), "<="))
        out.append(_compare("s0_joint_lower", _S(0, inst.rho_uv, e),
                            _S(0, rho_u, e + e1) - _S(0, rho_v, e1), ">="))

    # classical conditioning on Z
    cq = CqSpectrum.from_states(inst.pz, inst.rho_u_z)
    rho_u_mix = sum(p * r for p, r in zip(inst.pz, inst.rho_u_z))
    joint_uz = cq.joint()
    uz = joint_uz.ravel()
    pz = inst.pz
    for a in (0, 2):
        out.append(_compare(f"cond_trivial_bound[alpha={a}]", quantum_smooth_cond(a, cq, e),
                            _S(a, rho_u_mix, e), "<="))
    if ok_eps(e + e1):
        out.append(_compare("s2_cond_upper", quantum_smooth_cond(2, cq, e),
                            _S(2, uz, e + e1) - smooth_renyi2(pz, e1), "<="))
        out.append(_compare("s0_cond_lower", quantum_smooth_cond(0, cq, e),
                            _S(0, uz, e + e1) - smooth_renyi0(pz, e1), ">="))
    if ok_eps(e + e1 + e2):
        out.append(_compare("s2_cond_lower", quantum_smooth_cond(2, cq, e + e1 + e2),
                            _S(2, uz, e1) - smooth_renyi0(pz, e2) - 2 * _log_inv(e), ">"))
        out.append(_compare("s0_cond_upper", quantum_smooth_cond(0, cq, e + e1 + e2),
                            _S(0, uz, e1) - smooth_renyi2(pz, e2) + 2 * _log_inv(e), "<"))

    # U - Z - V structure
    if ok_eps(e + e1):
        s_u = [qmat.spectrum(r) for r in inst.rho_u_z]
        s_v = [qmat.spectrum(r) for r in inst.rho_v_z]
        uvz = np.concatenate([p * np.outer(a, b).ravel() for p, a, b in zip(pz, s_u, s_v)])
        vz = np.concatenate([p * b for p, b in zip(pz, s_v)])
        out.append(_compare("markov_chain[alpha=2]", _S(2, uvz, e + e1),
                            quantum_smooth_cond(2, cq, e) + _S(2, vz, e1), ">="))
        out.append(_compare("markov_chain[alpha=0]", _S(0, uvz, e + e1),
                            quantum_smooth_cond(0, cq, e) + _S(0, vz, e1), "<="))

    # per-value conditioning
    for z, p in enumerate(pz):
        single = qmat.spectrum(inst.rho_u_z[z])
        out.append(_compare(f"s2_cond_single_value[z={z}]", quantum_smooth_cond(2, cq, e * p),
                            _S(2, single, e), "<="))
        out.append(_compare(f"s0_cond_single_value[z={z}]", quantum_smooth_cond(0, cq, e * p),
                            _S(0, single, e), ">="))

    # high-probability events: the smallest set of z values with mass >= 1 - eps
    if ok_eps(e + e1):
        order = np.argsort(-pz, kind="stable")
        k = int(np.searchsorted(np.cumsum(pz[order]), 1 - e - MASS_TOL)) + 1
        zbar = order[:min(k, len(pz))]
        per2 = [_S(2, qmat.spectrum(inst.rho_u_z[z]), e1) for z in zbar]
        per0 = [_S(0, qmat.spectrum(inst.rho_u_z[z]), e1) for z in zbar]
        out.append(_compare("s2_cond_event", quantum_smooth_cond(2, cq, e + e1), min(per2), ">="))
        out.append(_compare("s0_cond_event", quantum_smooth_cond(0, cq, e + e1), max(per0), "<="))

    # unital channels
    after = qmat.apply_kraus(rho_u, inst.unital)
    for a in (0, 2):
        out.append(_compare(f"unital_increase[alpha={a}]", _S(a, after, e), _S(a, rho_u, e), ">="))

    # order relation between alpha = 2 and alpha = 0
    if e <= 0.1:
        out.append(_compare("order_relation", _S(2, inst.rho_uv, e), _S(0, inst.rho_uv, e) + 1, "<="))

    # general measurement
    if ok_eps(e + e1):
        u_tilde = qmat.apply_kraus(rho_u, inst.kraus)
        pm = np.array([np.trace(k @ rho_u @ k.conj().T).real for k in inst.kraus])
        pm = np.clip(pm, 0, None)
        pm = pm / pm.sum()
        out.append(_compare("s2_measurement_decrease", _S(2, u_tilde, e),
                            _S(2, rho_u, e + e1) + smooth_renyi0(pm, e1), "<="))
        out.append(_compare("s0_measurement_decrease", _S(0, u_tilde, e + e1),
                            _S(0, rho_u, e) + smooth_renyi0(pm, e1), "<="))

    # von Neumann measurement conditioned on the outcome
    if ok_eps(e + e1 + e2):
        probs, posts = [], []
        for pr in inst.projectors:
            branch = pr @ rho_u @ pr
            p = float(np.trace(branch).real)
            probs.append(max(p, 0.0))
            posts.append(branch / p if p > ATOM_FLOOR else np.eye(du) / du)
        probs = np.array(probs)
        probs = probs / probs.sum()
        keep = probs > ATOM_FLOOR
        cq_m = CqSpectrum.from_states(probs[keep] / probs[keep].sum(),
                                      [p for p, k in zip(posts, keep) if k])
        h0z = smooth_renyi0(probs, e1)
        out.append(_compare("s2_projective_lower", _S(2, rho_u, e + e1),
                            quantum_smooth_cond(2, cq_m, e) - h0z, ">="))
        out.append(_compare("s2_projective_upper", _S(2, rho_u, e),
                            quantum_smooth_cond(2, cq_m, e + e1 + e2) + h0z + 2 * _log_inv(e2), "<"))
        out.append(_compare("s0_projective_upper", _S(0, rho_u, e + e1),
                            quantum_smooth_cond(0, cq_m, e) + h0z, "<="))
        out.append(_compare("s0_projective_lower", _S(0, rho_u, e),
                            quantum_smooth_cond(0, cq_m, e + e1) - h0z, ">="))
    return out


def inequality_suite(n_instances: int = 1000, seed: int = 0,
                     eps_grid=(0.0, 0.01, 0.1)) -> dict[str, list[int]]:
    """Run ``check_inequalities`` over seeded random instances.

    Returns:
        Mapping from inequality name (without per-z suffix) to
        ``[checked, failed]`` counts.
    """
    rng = np.random.default_rng(seed)
    tally: dict[str, list[int]] = {}
    triples = list(itertools.product(eps_grid, repeat=3))
    for _ in range(n_instances):
        inst = random_inequality_instance(rng)
        e, e1, e2 = triples[int(rng.integers(len(triples)))]
        for r in check_inequalities(inst, e, e1, e2):
            key = r.name.split("[z=")[0]
            t = tally.setdefault(key, [0, 0])
            t[0] += 1
            t[1] += 0 if r.passed else 1
    return tally


# ---------------------------------------------------------------------------
# almost-product states
# ---------------------------------------------------------------------------

def almost_product_bound(rho_xb, d: int) -> tuple[float, float]:
    """Both sides of the almost-product entropy bound.

    For a cq state ``sum_x mu_x |x><x| (x) rho_B^x`` at trace distance ``e``
    from ``rho_X (x) rho_B`` the bound reads
    ``S(X|B) >= S(X) - sqrt(2 e) log2(d) - 1/e_nat``.

    Returns:
        ``(S(X|B), S(X) - sqrt(2 e) log2 d - 1/e)``.
    """
    rho_xb = qmat.validate_density(rho_xb)
    dim = rho_xb.shape[0]
    if dim % d:
        raise ValueError("dimension is not a multiple of the alphabet size")
    db = dim // d
    blocks = rho_xb.reshape(d, db, d, db)
    off = blocks.copy()
    for x in range(d):
        off[x, :, x, :] = 0
    if np.max(np.abs(off)) > 1e-10:
        raise ValueError("first subsystem is not classical")
    rho_x = qmat.partial_trace(rho_xb, [d, db], [0])
    rho_b = qmat.partial_trace(rho_xb, [d, db], [1])
    dist = qmat.trace_distance(rho_xb, np.kron(rho_x, rho_b))
    lhs = cond_vn(rho_xb, [d, db], [1])
    rhs = von_neumann(rho_x) - sqrt(2 * dist) * log2(d) - 1 / np.e
    return lhs, rhs


def purification_distance_bound(rho, sigma) -> tuple[float, float]:
    """Distance of the closest purifications versus ``sqrt(2 delta(rho, sigma))``.

    With ``|psi>`` the canonical purification of ``rho``, the purification
    of ``sigma`` with maximal overlap has coefficient matrix
    ``sqrt(sigma) W``, ``W`` the unitary polar factor of
    ``sqrt(sigma)^dagger sqrt(rho)``.

    Returns:
        ``(delta(P_psi, P_psi'), sqrt(2 delta(rho, sigma)))``.
    """
    a = qmat._psd_sqrt(qmat.validate_density(rho))
    b = qmat._psd_sqrt(qmat.validate_density(sigma))
    u, _, vh = np.linalg.svd(b.conj().T @ a)
    b = b @ (u @ vh)
    overlap = abs(np.trace(b.conj().T @ a))
    pure = sqrt(max(0.0, 1 - min(1.0, overlap) ** 2))
    return pure, sqrt(2 * qmat.trace_distance(rho, sigma))


def random_cq_state(d: int, db: int, rng: np.random.Generator) -> np.ndarray:
    """Random ``sum_x mu_x |x><x| (x) rho_B^x``; sometimes close to product."""
    mu = rng.dirichlet(np.ones(d))
    base = _random_spectrum_state(db, rng)
    mix = rng.choice([0.0, 0.05, 0.3, 1.0])
    out = np.zeros((d * db, d * db), dtype=complex)
    for x in range(d):
        rb = (1 - mix) * base + mix * _random_spectrum_state(db, rng)
        out[x * db:(x + 1) * db, x * db:(x + 1) * db] = mu[x] * rb
    return out


def distance_bound_suite(n_instances: int = 500, seed: int = 0) -> dict[str, list[int]]:
    """Seeded checks of the fidelity and almost-product bounds.

    Per instance: the sandwich ``1 - F <= delta <= sqrt(1 - F**2)``, the
    purification bound, convexity of the trace distance, and
    ``almost_product_bound`` on a random cq state with ``d <= 4``.

    Returns:
        Mapping from check name to ``[checked, failed]``.
    """
    rng = np.random.default_rng(seed)
    tally = {k: [0, 0] for k in ("sandwich_lower", "sandwich_upper", "purification_distance", "convexity", "almost_product")}

    def record(key, ok):
        tally[key][0] += 1
        tally[key][1] += 0 if ok else 1

    for _ in range(n_instances):
        d = int(rng.integers(2, 5))
        rho, sigma = _random_spectrum_state(d, rng), _random_spectrum_state(d, rng)
        f = qmat.fidelity(rho, sigma)
        dist = qmat.trace_distance(rho, sigma)
        record("sandwich_lower", 1 - f <= dist + CHECK_TOL)
        record("sandwich_upper", dist <= sqrt(max(0.0, 1 - f * f)) + CHECK_TOL)
        pure, bound = purification_distance_bound(rho, sigma)
        record("purification_distance", pure <= bound + CHECK_TOL)
        p = rng.dirichlet(np.ones(3))
        parts = [_random_spectrum_state(d, rng) for _ in range(3)]
        mixed = sum(pi * r for pi, r in zip(p, parts))
        record("convexity", qmat.trace_distance(mixed, sigma)
               <= sum(pi * qmat.trace_distance(r, sigma) for pi, r in zip(p, parts)) + CHECK_TOL)
        dx, db = int(rng.integers(2, 5)), int(rng.integers(1, 5))
        lhs, rhs = almost_product_bound(random_cq_state(dx, db, rng), dx)
        record("almost_product", lhs >= rhs - CHECK_TOL)
    return tally
