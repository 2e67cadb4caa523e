"""Asymptotic key rates under collective attacks, with one-way pre-processing.

The lower bound is ``inf_{lambda in Gamma(Q)} S(U|VE) - H(U|YV)`` maximized
over Alice's pre-processing ``U <- X``.  Bob's post-processing ``V`` is kept
trivial in the optimizers.  For a Bell-diagonal attack and a binary symmetric
pre-processing channel with flip probability ``q`` the objective reduces to

    S(E|U) - S(E) - h(q(1-Q) + (1-q)Q) + 1,

where Eve's conditional states are block diagonal with two 2x2 blocks, so
every entropy has a closed form.  The general route (explicit ``sigma_UVE``)
is kept as an independent check and for non-symmetric channels.

The upper bound restricts Eve to a measurement and evaluates the classical
one-way rate ``H(U|Z) - H(U|Y)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import qmat
from .entropy import binary_entropy, cond_vn, shannon, von_neumann
from .states import BellDiagonal, GammaFamily, ProtocolSpec, as_lambda, eve_thetas

__all__ = [
    "PreprocessChannel", "GammaFamily", "RatePoint", "rate_objective", "min_over_gamma",
    "optimize_preprocessing", "threshold", "eve_measurement_dist", "ck_rate",
    "upper_threshold", "upper_objective_quantum", "rate_curve", "golden_max",
]

GRID = 64
PARAM_TOL = 1e-6
Q_STEP = 1e-3
Q_MAX = 0.499  # q = 1/2 makes U independent of X: rate exactly 0, no key
GOLD = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class PreprocessChannel:
    """Alice's ``P_{U|X}`` (rows x) and the public message ``P_{V|U}`` (rows u).

    A single-column ``pvu`` is the trivial message (nothing is announced).
    """

    pux: np.ndarray
    pvu: np.ndarray

    def __post_init__(self):
        for m in (self.pux, self.pvu):
            m = np.asarray(m, float)
            if m.ndim != 2 or np.any(m < 0) or not np.allclose(m.sum(axis=1), 1, atol=1e-12):
                raise ValueError("channel matrices must be row-stochastic")
        object.__setattr__(self, "pux", np.asarray(self.pux, float))
        object.__setattr__(self, "pvu", np.asarray(self.pvu, float))
        if self.pux.shape[0] != 2 or self.pvu.shape[0] != self.pux.shape[1]:
            raise ValueError("channel shapes do not chain")

    @classmethod
    def flip(cls, q: float) -> "PreprocessChannel":
        if not 0 <= q <= 1:
            raise ValueError("flip probability must lie in [0, 1]")
        return cls(np.array([[1 - q, q], [q, 1 - q]]), np.ones((2, 1)))

    @property
    def q(self) -> float | None:
        """Flip probability if this is a binary symmetric channel with trivial V."""
        p = self.pux
        if p.shape == (2, 2) and abs(p[0, 1] - p[1, 0]) < 1e-15 and \
                self.pvu.shape[1] == 1:
            return float(p[0, 1])
        return None


@dataclass(frozen=True)
class RatePoint:
    Q: float
    q_opt: float
    rate: float
    minimizer: BellDiagonal


# ---------------------------------------------------------------------------
# objective
# ---------------------------------------------------------------------------

def _xlog(x):
    x = np.asarray(x, float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, -x * np.log2(np.where(x > 0, x, 1.0)), 0.0)


def _block_entropy(a, b, c):
    """Entropy of the 2x2 PSD block [[a, c], [c, b]] (unnormalized weights)."""
    half = (a + b) / 2
    disc = np.sqrt(np.maximum(((a - b) / 2) ** 2 + c * c, 0.0))
    return _xlog(half + disc) + _xlog(np.maximum(half - disc, 0.0))


def shortcut_rate(lam, q):
    """Vectorized rate for Bell weights ``lam[..., 4]`` and flip ``q``.

    Broadcasts ``lam[..., :]`` against ``q``.
    """
    lam = np.asarray(lam, float)
    q = np.asarray(q, float)
    l1, l2, l3, l4 = (lam[..., i] for i in range(4))
    Q = l3 + l4
    f = np.abs(1 - 2 * q)
    s_e_given_u = (_block_entropy(l1, l2, f * np.sqrt(l1 * l2))
                   + _block_entropy(l3, l4, f * np.sqrt(l3 * l4)))
    s_e = _xlog(l1) + _xlog(l2) + _xlog(l3) + _xlog(l4)
    qe = np.clip(q * (1 - Q) + (1 - q) * Q, 0.0, 1.0)
    return s_e_given_u - s_e - binary_entropy(qe) + 1.0


def general_rate(lam, chan: PreprocessChannel) -> float:
    """``S(U|VE) - H(U|YV)`` from an explicitly built ``sigma_UVE``."""
    th = eve_thetas(lam)
    pxy = np.einsum("xye,xye->xy", th, th.conj()).real
    rho_e_x = [sum(qmat.proj(th[x, y]) for y in range(2)) for x in range(2)]
    nu, nv = chan.pux.shape[1], chan.pvu.shape[1]
    sigma = np.zeros((nu * nv * 4, nu * nv * 4), dtype=complex)
    for x in range(2):
        for u in range(nu):
            for v in range(nv):
                w = chan.pux[x, u] * chan.pvu[u, v]
                if w:
                    sigma += w * qmat.tensor(qmat.proj(qmat.basis(nu, u)),
                                             qmat.proj(qmat.basis(nv, v)), rho_e_x[x])
    s_u_given_ve = cond_vn(sigma, [nu, nv, 4], [1, 2])
    puvy = np.einsum("xy,xu,uv->uvy", pxy, chan.pux, chan.pvu)
    h_u_given_yv = shannon(puvy.ravel()) - shannon(puvy.sum(axis=0).ravel())
    return float(s_u_given_ve - h_u_given_yv)


def rate_objective(lam, chan: PreprocessChannel | float = 0.0, method: str = "auto") -> float:
    """Single-pair rate ``S(U|VE) - H(U|YV)`` for a Bell-diagonal attack.

    Args:
        lam: Bell weights or ``BellDiagonal``.
        chan: pre-processing channel, or a flip probability ``q``.
        method: ``"shortcut"`` (closed form, symmetric channels only),
            ``"general"`` (explicit state), or ``"auto"``.
    """
    if not isinstance(chan, PreprocessChannel):
        chan = PreprocessChannel.flip(float(chan))
    lam = as_lambda(lam)
    if method not in ("auto", "shortcut", "general"):
        raise ValueError(f"unknown method {method!r}")
    if method == "general" or (method == "auto" and chan.q is None):
        return general_rate(lam, chan)
    if chan.q is None:
        raise ValueError("the closed form needs a binary symmetric channel with trivial V")
    return float(shortcut_rate(lam, chan.q))


# ---------------------------------------------------------------------------
# optimization helpers
# ---------------------------------------------------------------------------

def golden_max(f, a: float, b: float, tol: float = PARAM_TOL) -> tuple[float, float]:
    """Golden-section search for a maximum of ``f`` on ``[a, b]``.

    Returns ``(x, f(x))``; endpoints are compared too, so monotone functions
    return the better endpoint.
    """
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    c, d = b - GOLD * (b - a), a + GOLD * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLD * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLD * (b - a)
            fd = f(d)
    best = max([(fc, c), (fd, d), (f(a), a), (f(b), b)])
    return best[1], best[0]


def _bracket(grid: np.ndarray, i: int) -> tuple[float, float]:
    return float(grid[max(i - 1, 0)]), float(grid[min(i + 1, len(grid) - 1)])


def _param_grids(family: GammaFamily, Q: float, n: int = GRID):
    return [np.linspace(lo, hi, n) for lo, hi in family.bounds(Q)]


def _eval_family(spec: ProtocolSpec, Q: float, params, chan: PreprocessChannel | float):
    """Rate over arrays of family parameters (vectorized for symmetric channels)."""
    lam = spec.gamma.realize(Q, *params)
    q = chan if not isinstance(chan, PreprocessChannel) else chan.q
    if q is not None:
        return shortcut_rate(lam, q)
    flat = lam.reshape(-1, 4)
    vals = np.array([general_rate(np.clip(l, 0, None) / np.clip(l, 0, None).sum(), chan) for l in flat])
    return vals.reshape(lam.shape[:-1])


def min_over_gamma(spec: ProtocolSpec, Q: float, chan: PreprocessChannel | float = 0.0,
                   grid: int = GRID, tol: float = PARAM_TOL) -> tuple[float, BellDiagonal]:
    """Infimum of the rate over the protocol's compatible attack states.

    Grid search (``grid`` points per free parameter) followed by golden-section
    refinement of each parameter in the bracket around the best grid point.
    """
    if not 0 <= Q < 0.5:
        raise ValueError("Q must lie in [0, 1/2)")
    fam = spec.gamma
    names = fam.names
    if not names:
        lam = fam.state(Q)
        return float(_eval_family(spec, Q, (), chan)), lam
    grids = _param_grids(fam, Q, grid)
    if any(len(g) == 0 for g in grids):
        raise ValueError("empty attack family")
    mesh = np.meshgrid(*grids, indexing="ij")
    vals = _eval_family(spec, Q, mesh, chan)
    idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
    x = [float(g[i]) for g, i in zip(grids, idx)]
    brackets = [_bracket(g, i) for g, i in zip(grids, idx)]

    def f_at(point):
        return float(_eval_family(spec, Q, [np.asarray(p) for p in point], chan))

    best = f_at(x)
    for _ in range(6 if len(x) > 1 else 1):
        prev = list(x)
        for k in range(len(x)):
            def neg(v, k=k):
                p = list(x)
                p[k] = v
                return -f_at(p)
            xk, fk = golden_max(neg, *brackets[k], tol=tol)
            if -fk <= best:
                x[k], best = xk, -fk
        if max(abs(a - b) for a, b in zip(prev, x)) < tol:
            break
    return best, fam.state(Q, x)


def _coarse_q_scan(spec: ProtocolSpec, Q: float, qs: np.ndarray, grid: int = GRID) -> np.ndarray:
    """Grid minimum over the attack family for every ``q`` at once."""
    fam = spec.gamma
    if not fam.names:
        lam = fam.realize(Q)
        return shortcut_rate(lam[None, :], qs)
    grids = _param_grids(fam, Q, grid)
    mesh = np.meshgrid(*grids, indexing="ij")
    lam = fam.realize(Q, *mesh).reshape(-1, 4)
    out = np.empty(len(qs))
    for i in range(0, len(qs), 50):
        chunk = qs[i:i + 50]
        out[i:i + 50] = shortcut_rate(lam[None, :, :], chunk[:, None]).min(axis=1)
    return out


def optimize_preprocessing(spec: ProtocolSpec, Q: float, q_max: float = Q_MAX) -> RatePoint:
    """Best flip probability ``q`` for Alice's pre-processing at error rate ``Q``.

    Scans ``q`` on a ``1e-3`` grid over ``[0, q_max]`` and refines the best
    point by golden-section search to ``1e-6``.  The degenerate choice
    ``q = 1/2`` (rate identically 0) is excluded so that the sign of the
    returned rate decides whether a key can be distilled.
    """
    if not 0 <= Q < 0.5:
        raise ValueError("Q must lie in [0, 1/2)")
    qs = np.round(np.arange(0.0, q_max + Q_STEP / 2, Q_STEP), 12)
    coarse = _coarse_q_scan(spec, Q, qs)
    i = int(np.argmax(coarse))
    lo, hi = _bracket(qs, i)

    def f(q):
        return min_over_gamma(spec, Q, float(q))[0]

    q_opt, val = golden_max(f, lo, hi)
    f0 = f(qs[i])
    if f0 > val:
        q_opt, val = float(qs[i]), f0
    rate, lam = min_over_gamma(spec, Q, q_opt)
    return RatePoint(float(Q), float(q_opt), float(rate), lam)


def rate_at(spec: ProtocolSpec, Q: float, q: float | None = 0.0) -> RatePoint:
    """Rate at fixed ``q``; ``q=None`` optimizes the pre-processing."""
    if q is None:
        return optimize_preprocessing(spec, Q)
    val, lam = min_over_gamma(spec, Q, q)
    return RatePoint(float(Q), float(q), float(val), lam)


def _bisect_sign(f, lo: float, hi: float, tol: float) -> float:
    flo, fhi = f(lo), f(hi)
    if not (flo > 0 and fhi <= 0):
        raise ValueError(f"no sign change of the rate in [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold(spec: ProtocolSpec, with_preprocessing: bool = True, tol: float = 1e-4,
              lo: float = 0.0, hi: float = 0.25) -> float:
    """Largest bit error rate with a positive key rate (bisection to ``tol``)."""
    if with_preprocessing:
        def f(Q):
            return optimize_preprocessing(spec, Q).rate
    else:
        def f(Q):
            return min_over_gamma(spec, Q, 0.0)[0]
    return _bisect_sign(f, lo, hi, tol)


# ---------------------------------------------------------------------------
# upper bound via a fixed measurement for Eve
# ---------------------------------------------------------------------------

EVE_BASIS = np.array([[1, 1, 0, 0], [1, -1, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1]], dtype=complex) / np.sqrt(2)


def eve_measurement_dist(lam) -> np.ndarray:
    """Joint distribution ``P[x, y, z]`` when Eve measures her purification.

    Eve's states given ``(x, y)`` live in two orthogonal 2-dimensional blocks
    (no error / error).  In each block she distinguishes ``x = 0`` from
    ``x = 1`` with the optimal (Helstrom) projective measurement, which for
    these symmetric pairs is the basis ``(nu_a +- nu_b)/sqrt2``.  Outcomes
    ``z in {0, 1}`` belong to the no-error block and ``z in {2, 3}`` to the
    error block.
    """
    lam = as_lambda(lam)
    if lam[0] + lam[1] <= 0:
        raise ValueError("degenerate Eve states: lambda1 = lambda2 = 0")
    th = eve_thetas(lam)
    amp = np.einsum("ze,xye->xyz", EVE_BASIS.conj(), th)
    p = np.abs(amp) ** 2
    return p / p.sum()


def ck_rate(pxyz, q: float = 0.0) -> float:
    """One-way rate ``H(U|Z) - H(U|Y)`` with ``U`` the ``q``-flipped ``X``."""
    p = np.asarray(pxyz, float)
    k = np.array([[1 - q, q], [q, 1 - q]])
    puyz = np.einsum("xyz,xu->uyz", p, k)
    puz = puyz.sum(axis=1)
    puy = puyz.sum(axis=2)
    h_u_z = shannon(puz.ravel()) - shannon(puz.sum(axis=0))
    h_u_y = shannon(puy.ravel()) - shannon(puy.sum(axis=0))
    return float(h_u_z - h_u_y)


def upper_rate(spec: ProtocolSpec, Q: float) -> tuple[float, float]:
    """``sup_q`` of the measured-Eve rate at ``Q``; returns ``(rate, q_opt)``."""
    if spec.name not in ("six-state", "bb84"):
        raise ValueError("upper bound implemented for six-state and bb84")
    _, lam = min_over_gamma(spec, Q, 0.0)
    pxyz = eve_measurement_dist(lam)
    qs = np.round(np.arange(0.0, Q_MAX + Q_STEP / 2, Q_STEP), 12)
    vals = np.array([ck_rate(pxyz, q) for q in qs])
    i = int(np.argmax(vals))
    q_opt, val = golden_max(lambda q: ck_rate(pxyz, q), *_bracket(qs, i))
    if vals[i] > val:
        q_opt, val = float(qs[i]), float(vals[i])
    return float(val), float(q_opt)


def upper_threshold(spec: ProtocolSpec, tol: float = 1e-4) -> float:
    """Smallest ``Q`` at which the measured-Eve upper bound vanishes."""
    return _bisect_sign(lambda Q: upper_rate(spec, Q)[0], 1e-3, 0.3, tol)


def upper_objective_quantum(pxy, rho_e_xy, sigma_u, sigma_v) -> float:
    """Evaluate ``S(U|VE) - S(U|YV)`` for a given quantum pre-processing.

    Args:
        pxy: joint distribution ``P[x, y]``.
        rho_e_xy: Eve's normalized states ``rho_e_xy[x][y]``.
        sigma_u: Alice's output states ``sigma_u[x]``.
        sigma_v: the states ``sigma_v[x]`` sent to Bob.

    Returns:
        ``S(U|VE) - S(U|YV)`` on
        ``sum_{x,y} P(x,y) sigma_u[x] (x) sigma_v[x] (x) |y><y| (x) rho_e[x][y]``.
    """
    pxy = np.asarray(pxy, float)
    nx, ny = pxy.shape
    du = np.asarray(sigma_u[0]).shape[0]
    dv = np.asarray(sigma_v[0]).shape[0]
    de = np.asarray(rho_e_xy[0][0]).shape[0]
    if du * dv * max(de, ny) > 512:
        raise ValueError("dimensions too large")
    for x in range(nx):
        if np.asarray(sigma_u[x]).shape != (du, du) or np.asarray(sigma_v[x]).shape != (dv, dv):
            raise ValueError("dimension mismatch")
    uve = sum(pxy[x, y] * qmat.tensor(sigma_u[x], sigma_v[x], rho_e_xy[x][y])
              for x in range(nx) for y in range(ny))
    uvy = sum(pxy[x, y] * qmat.tensor(sigma_u[x], sigma_v[x], qmat.proj(qmat.basis(ny, y)))
              for x in range(nx) for y in range(ny))
    return float(cond_vn(uve, [du, dv, de], [1, 2]) - cond_vn(uvy, [du, dv, ny], [1, 2]))


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

def rate_curve(spec: ProtocolSpec, Qs, q: float | None = 0.0, threads: int = 1) -> list[RatePoint]:
    """Rates at several error rates; ``q=None`` optimizes pre-processing.

    Points are independent, so they may be evaluated on ``threads`` worker
    threads; the result order always follows ``Qs``.
    """
    Qs = [float(x) for x in Qs]
    if threads <= 1 or len(Qs) <= 1:
        return [rate_at(spec, Q, q) for Q in Qs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda Q: rate_at(spec, Q, q), Qs))


def lower_bound_terms(lam, q: float = 0.0) -> dict:
    """Entropy terms of the closed form, for inspection."""
    lam = as_lambda(lam)
    l1, l2, l3, l4 = lam
    f = abs(1 - 2 * q)
    Q = l3 + l4
    return {
        "S(E|U)": float(_block_entropy(l1, l2, f * math.sqrt(l1 * l2)) + _block_entropy(l3, l4, f * math.sqrt(l3 * l4))),
        "S(E)": von_neumann(lam),
        "H(U|Y)": float(binary_entropy(q * (1 - Q) + (1 - q) * Q)),
    }
