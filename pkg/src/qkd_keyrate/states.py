"""Bell-diagonal attack states, symmetrization maps and protocol descriptions.

Bell basis order is (Phi+, Phi-, Psi+, Psi-) with
``|Phi+-> = (|00> +- |11>)/sqrt2`` and ``|Psi+-> = (|01> +- |10>)/sqrt2``.
A Bell-diagonal state is described by its weights ``lam = (l1, l2, l3, l4)``;
its bit error rate is ``l3 + l4``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import qmat

SQ2 = np.sqrt(2.0)
BELL = np.array([[1, 0, 0, 1], [1, 0, 0, -1], [0, 1, 1, 0], [0, 1, -1, 0]], dtype=complex) / SQ2
BELL_NAMES = ("Phi+", "Phi-", "Psi+", "Psi-")

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

# unitaries whose columns are the x, y, z basis states
VX = np.array([[1, 1], [1, -1]], dtype=complex) / SQ2
VY = np.array([[1, 1], [1j, -1j]], dtype=complex) / SQ2
VZ = I2

LAMBDA_TOL = 1e-12


@dataclass(frozen=True)
class BellDiagonal:
    """Weights of a Bell-diagonal two-qubit state."""

    lam: tuple

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float).ravel()
        if lam.shape != (4,):
            raise ValueError("a Bell-diagonal state needs four weights")
        if np.any(lam < -LAMBDA_TOL) or abs(lam.sum() - 1) > LAMBDA_TOL * 10:
            raise ValueError(f"invalid Bell weights {lam}")
        lam = np.clip(lam, 0.0, None)
        object.__setattr__(self, "lam", tuple(float(x) for x in lam / lam.sum()))

    @property
    def qber(self) -> float:
        return self.lam[2] + self.lam[3]

    def array(self) -> np.ndarray:
        return np.array(self.lam)


def as_lambda(lam) -> np.ndarray:
    if isinstance(lam, BellDiagonal):
        return lam.array()
    return BellDiagonal(tuple(np.ravel(lam))).array()


def bell_projector(i: int) -> np.ndarray:
    return qmat.proj(BELL[i])


def rho1(lam) -> np.ndarray:
    """Bell-diagonal density matrix ``sum_i lam_i |Phi_i><Phi_i|`` (z basis)."""
    lam = as_lambda(lam)
    return (BELL.T * lam) @ BELL.conj()


def bell_matrix(rho) -> np.ndarray:
    """Matrix elements of ``rho`` in the Bell basis."""
    return BELL.conj() @ np.asarray(rho, dtype=complex) @ BELL.T


def bell_weights(rho) -> np.ndarray:
    return np.real(np.diag(bell_matrix(rho)))


def _twirl(rho, ops, conj_second: bool = False) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for o in ops:
        u = np.kron(o, o.conj() if conj_second else o)
        out += u @ rho @ u.conj().T
    return out / len(ops)


def d2(rho) -> np.ndarray:
    """Depolarizing twirl with the four Pauli pairs; output is Bell-diagonal."""
    return _twirl(rho, (I2, SX, SY, SZ))


D2PRIME_OPS = tuple(u @ v for u in (I2, SZ, np.diag([-1j, 1]), np.diag([1j, 1]))
                    for v in (I2, SX))


def d2prime(rho) -> np.ndarray:
    """Eight-element twirl that also equalizes the Psi+ and Psi- weights.

    Each element acts as ``O (x) conj(O)``.  The conjugate on the second
    qubit is what makes the phase unitaries ``diag(+-i, 1)`` swap Psi+ and
    Psi- (with ``O (x) O`` they would swap Phi+ and Phi- instead).
    """
    return _twirl(rho, D2PRIME_OPS, conj_second=True)


@dataclass(frozen=True)
class EncodingSet:
    """Alice/Bob operator pairs ``(A_j, B_j)`` chosen with probability ``p_j``."""

    ops: tuple

    def __post_init__(self):
        ps = [p for _, _, p in self.ops]
        if abs(sum(ps) - 1) > 1e-12 or min(ps) < 0:
            raise ValueError("encoding probabilities must form a distribution")


def d1(rho, enc: EncodingSet) -> tuple[np.ndarray, float]:
    """Apply the randomly chosen encoding pair and renormalize.

    Returns:
        ``(rho_out, N)`` where ``N`` is the acceptance probability (trace
        before renormalization).
    """
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for a, b, p in enc.ops:
        m = np.kron(a, b)
        out += p * (m @ rho @ m.conj().T)
    n = float(np.trace(out).real)
    if n < 1e-12:
        raise ValueError("state is fully sifted out")
    return out / n, n


@dataclass(frozen=True)
class PurifiedTriple:
    psi_abe: np.ndarray
    lam: BellDiagonal


def purify_bell_diag(lam) -> PurifiedTriple:
    """``|psi>_ABE = sum_i sqrt(lam_i) |Phi_i>_AB |nu_i>_E`` with standard ``nu_i``."""
    bd = lam if isinstance(lam, BellDiagonal) else BellDiagonal(tuple(np.ravel(lam)))
    amp = np.sqrt(bd.array())
    psi = sum(amp[i] * np.kron(BELL[i], qmat.basis(4, i)) for i in range(4))
    return PurifiedTriple(psi, bd)


def eve_thetas(lam) -> np.ndarray:
    """Eve's subnormalized states ``theta[x, y]`` given Alice/Bob z outcomes.

    ``theta[x, y] = (<x| (x) <y| (x) 1) |psi>_ABE`` so that
    ``||theta[x, y]||**2 = P_XY(x, y)``.
    """
    psi = purify_bell_diag(lam).psi_abe.reshape(2, 2, 4)
    return psi.copy()


def eve_conditionals(lam) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eve's normalized states given Alice's bit, and the joint ``P_XY``.

    Returns:
        ``(sigma_E^0, sigma_E^1, P_XY)`` with ``P_XY[x, y]``.
    """
    th = eve_thetas(lam)
    pxy = np.einsum("xye,xye->xy", th, th.conj()).real
    sig = []
    for x in range(2):
        s = sum(qmat.proj(th[x, y]) for y in range(2))
        sig.append(s / pxy[x].sum())
    return sig[0], sig[1], pxy


# ---------------------------------------------------------------------------
# B92 helpers
# ---------------------------------------------------------------------------

def b92_lambda12(Q: float, s: float) -> tuple[float, float]:
    """Bell weights ``(l1, l2) = (1-Q)(1 +- s)/2`` of the B92 family."""
    if not 0 <= Q < 0.5 or not 0 <= s <= 1:
        raise ValueError("need Q in [0, 1/2) and s in [0, 1]")
    return (1 - Q) * (1 + s) / 2, (1 - Q) * (1 - s) / 2


def b92_gamma2(alpha: float) -> float:
    return 4 * alpha**2 * (1 - alpha**2)


def b92_q_of_delta(delta: float, alpha: float) -> float:
    """Bit error rate of B92 behind a depolarizing channel of strength ``delta``."""
    if not 0 <= delta < 0.5 or not 0 < alpha < 1:
        raise ValueError("need delta in [0, 1/2) and alpha in (0, 1)")
    g2 = b92_gamma2(alpha)
    return delta / (g2 * (1 - 2 * delta) + 2 * delta)


def b92_delta_of_q(Q: float, alpha: float) -> float:
    """Inverse of ``b92_q_of_delta``."""
    g2 = b92_gamma2(alpha)
    return Q * g2 / (1 - 2 * Q * (1 - g2))


def b92_states(alpha: float):
    """Signal states and their (normalized) orthogonal complements."""
    beta = np.sqrt(1 - alpha**2)
    phi0 = np.array([alpha, beta], dtype=complex)
    phi1 = np.array([alpha, -beta], dtype=complex)
    perp0 = np.array([beta, -alpha], dtype=complex)
    perp1 = np.array([beta, alpha], dtype=complex)
    return phi0, phi1, perp0, perp1


def b92_operators(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Alice's encoding ``A`` and Bob's filter ``B``.

    ``A = |0><phi0| + |1><phi1|`` and ``B = |0><phi1_perp| + |1><phi0_perp|``.
    """
    phi0, phi1, perp0, perp1 = b92_states(alpha)
    e0, e1 = qmat.basis(2, 0), qmat.basis(2, 1)
    a = np.outer(e0, phi0.conj()) + np.outer(e1, phi1.conj())
    b = np.outer(e0, perp1.conj()) + np.outer(e1, perp0.conj())
    return a, b


def b92_alice_marginal(alpha: float) -> np.ndarray:
    """Alice's reduced state of the entanglement-based B92 source.

    The source prepares ``(|0>|phi0> + |1>|phi1>)/sqrt2`` (up to complex
    conjugation); Alice's half is ``G/2`` with ``G`` the Gram matrix.
    """
    phi0, phi1, _, _ = b92_states(alpha)
    g = np.array([[phi0.conj() @ phi0, phi0.conj() @ phi1],
                  [phi1.conj() @ phi0, phi1.conj() @ phi1]])
    return g.T / 2


def b92_source(alpha: float) -> np.ndarray:
    """Two-qubit source state ``(|0>|phi0> + |1>|phi1>)/sqrt2``."""
    phi0, phi1, _, _ = b92_states(alpha)
    psi = (np.kron(qmat.basis(2, 0), phi0) + np.kron(qmat.basis(2, 1), phi1)) / SQ2
    return qmat.proj(psi)


def depolarize_b(rho, delta: float) -> np.ndarray:
    """Depolarizing channel of strength ``delta`` on the second qubit.

    With probability ``2 delta`` the qubit is replaced by the maximally mixed
    state, so a computational-basis bit is flipped with probability ``delta``.
    """
    rho = np.asarray(rho, dtype=complex)
    mixed = np.kron(qmat.partial_trace(rho, [2, 2], [0]), I2 / 2)
    return (1 - 2 * delta) * rho + 2 * delta * mixed


def b92_sifted_state(delta: float, alpha: float) -> tuple[np.ndarray, float]:
    """Sifted two-qubit state and acceptance probability behind a depolarizer."""
    _, b = b92_operators(alpha)
    tau = depolarize_b(b92_source(alpha), delta)
    m = np.kron(I2, b)
    out = m @ tau @ m.conj().T
    n = float(np.trace(out).real)
    return out / n, n


@lru_cache(maxsize=4096)
def b92_s_lower(Q: float, alpha: float) -> float:
    """Smallest ``s = (l1 - l2)/(1 - Q)`` compatible with B92 statistics.

    Eve controls the channel, so the pre-filter two-qubit state ``tau`` is
    any state whose Alice marginal is fixed by the source.  Alice and Bob
    observe the error rate ``Q`` and the conclusive rate ``N`` (that of a
    depolarizing channel with the matching strength).  The semidefinite
    program minimizes the Phi+/Phi- contrast of the filtered, twirled state
    over all such ``tau``.
    """
    import cvxpy as cp

    if Q <= 0:
        return 1.0
    _, b = b92_operators(alpha)
    fil = np.kron(I2, b)
    delta = b92_delta_of_q(Q, alpha)
    g2 = b92_gamma2(alpha)
    n_obs = g2 * (1 - 2 * delta) + 2 * delta
    marg = b92_alice_marginal(alpha)

    def lin(op):
        # Tr(op * fil tau fil^dag) = Tr(fil^dag op fil * tau)
        m = fil.conj().T @ op @ fil
        return (m + m.conj().T) / 2

    m_err = lin(bell_projector(2) + bell_projector(3))
    m_all = lin(np.eye(4))
    m_obj = lin(bell_projector(0) - bell_projector(1))
    tau = cp.Variable((4, 4), hermitian=True)
    cons = [tau >> 0,
            cp.partial_trace(tau, [2, 2], axis=1) == marg,
            cp.real(cp.trace(m_all @ tau)) == n_obs,
            cp.real(cp.trace(m_err @ tau)) == Q * n_obs]
    prob = cp.Problem(cp.Minimize(cp.real(cp.trace(m_obj @ tau))), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate") or prob.value is None:
        raise RuntimeError(f"B92 semidefinite program failed: {prob.status}")
    return float(np.clip(prob.value / ((1 - Q) * n_obs), 0.0, 1.0))


# ---------------------------------------------------------------------------
# protocol descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaFamily:
    """Parameterized set of Bell-diagonal states with a given bit error rate.

    Attributes:
        names: names of the free parameters (empty for a singleton family).
        bounds: ``bounds(Q)`` returns one ``(lower, upper)`` pair per parameter.
        realize: ``realize(Q, params)`` returns the Bell weights as an array;
            it must broadcast over arrays of parameters (last axis = 4).
    """

    names: tuple
    bounds: Callable[[float], Sequence[tuple[float, float]]]
    realize: Callable[..., np.ndarray]

    @property
    def free_params(self) -> list[tuple]:
        return list(self.names)

    def state(self, Q: float, params=()) -> BellDiagonal:
        return BellDiagonal(tuple(np.asarray(self.realize(Q, *params), float).ravel()))


@dataclass(frozen=True)
class ProtocolSpec:
    name: str
    encodings: EncodingSet
    gamma: GammaFamily
    qber_map: Callable | None = None
    params: dict = field(default_factory=dict)


def _stack(*cols):
    cols = np.broadcast_arrays(*[np.asarray(c, float) for c in cols])
    return np.stack(cols, axis=-1)


def _six_state_realize(Q):
    return _stack(1 - 1.5 * Q, Q / 2, Q / 2, Q / 2)


def _bb84_realize(Q, l4):
    return _stack(1 - 2 * Q + l4, Q - l4, Q - l4, l4)


def six_state() -> ProtocolSpec:
    ops = tuple((v.conj().T, v.T, 1 / 3) for v in (VX, VY, VZ))
    gamma = GammaFamily((), lambda Q: [], lambda Q: _six_state_realize(Q))
    return ProtocolSpec("six-state", EncodingSet(ops), gamma)


def bb84() -> ProtocolSpec:
    ops = tuple((v.conj().T, v.T, 1 / 2) for v in (VX, VZ))
    gamma = GammaFamily(("lambda4",), lambda Q: [(0.0, Q)], _bb84_realize)
    return ProtocolSpec("bb84", EncodingSet(ops), gamma)


def b92(alpha: float = 0.38) -> ProtocolSpec:
    """B92 with signal amplitude ``alpha``.

    Free parameters: ``s = (l1 - l2)/(1 - Q)`` restricted to
    ``[b92_s_lower(Q), 1]`` and ``t = (l3 - l4)/Q`` in ``[-1, 1]``.
    """
    if not 0 < alpha < 1 / np.sqrt(2):
        raise ValueError("alpha must lie in (0, 1/sqrt2)")
    a, b = b92_operators(alpha)

    def bounds(Q):
        return [(b92_s_lower(round(float(Q), 12), alpha), 1.0), (-1.0, 1.0)]

    def realize(Q, s, t):
        return _stack((1 - Q) * (1 + s) / 2, (1 - Q) * (1 - s) / 2,
                      Q * (1 + t) / 2, Q * (1 - t) / 2)

    enc = EncodingSet(((I2, b, 1.0),))
    return ProtocolSpec("b92", enc, GammaFamily(("s", "t"), bounds, realize),
                        qber_map=lambda delta: b92_q_of_delta(delta, alpha),
                        params={"alpha": alpha, "A": a, "B": b})


def protocol_specs(alpha: float = 0.38) -> dict[str, ProtocolSpec]:
    return {"six-state": six_state(), "bb84": bb84(), "b92": b92(alpha)}


def get_protocol(name: str, alpha: float = 0.38) -> ProtocolSpec:
    key = name.lower().replace("_", "-")
    if key in ("sixstate", "six"):
        key = "six-state"
    specs = {"six-state": six_state, "bb84": bb84}
    if key in specs:
        return specs[key]()
    if key == "b92":
        return b92(alpha)
    raise ValueError(f"unknown protocol {name!r}")
