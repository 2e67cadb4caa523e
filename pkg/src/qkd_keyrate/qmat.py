"""Dense linear algebra for small quantum systems.

Density matrices, kets and operators are plain complex ``numpy`` arrays.
Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

HERM_TOL = 1e-10
PSD_TOL = 1e-10
TRACE_TOL = 1e-9
RECON_TOL = 1e-8
NORM_TOL = 1e-10
EIG_FLOOR = 1e-14


class QMatError(ValueError):
    """Raised for invalid matrices or dimension mismatches."""


def _square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise QMatError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise QMatError("matrix has non-finite entries")
    return m


def is_hermitian(m, tol: float = HERM_TOL) -> bool:
    m = _square(m)
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Args:
        m: Hermitian matrix.

    Returns:
        (w, v): eigenvalues in descending order and the matching unitary
        whose columns are the eigenvectors, so that ``m = v @ diag(w) @ v^H``.

    Raises:
        QMatError: if ``m`` is not Hermitian or the decomposition does not
            reconstruct ``m`` to within ``RECON_TOL`` (relative to its scale).
    """
    m = _square(m)
    if not is_hermitian(m):
        raise QMatError("matrix is not Hermitian")
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise QMatError(f"eigensolver did not converge: {exc}") from exc
    w, v = w[::-1].copy(), v[:, ::-1].copy()
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    resid = float(np.max(np.abs((v * w) @ v.conj().T - m), initial=0.0))
    if resid > RECON_TOL * scale:
        raise QMatError(f"eigendecomposition residual {resid:.3e} too large")
    return w, v


def validate_density(rho, subnormalized: bool = False) -> np.ndarray:
    """Check that ``rho`` is a (possibly subnormalized) density matrix."""
    rho = _square(rho)
    if not is_hermitian(rho):
        raise QMatError("density matrix is not Hermitian")
    w = np.linalg.eigvalsh(rho)
    if w.size and w[0] < -PSD_TOL:
        raise QMatError(f"density matrix has eigenvalue {w[0]:.3e} < 0")
    tr = float(np.trace(rho).real)
    if subnormalized:
        if tr > 1 + TRACE_TOL:
            raise QMatError(f"subnormalized state has trace {tr} > 1")
    elif abs(tr - 1) > TRACE_TOL:
        raise QMatError(f"density matrix has trace {tr} != 1")
    return rho


def spectrum(rho) -> np.ndarray:
    """Eigenvalues of a PSD operator, descending, with tiny negatives clamped.

    Eigenvalues in ``[-PSD_TOL, 0)`` are set to zero; anything more negative
    is treated as an invalid input.
    """
    w, _ = eig_hermitian(rho)
    if w.size and w[-1] < -PSD_TOL:
        raise QMatError(f"operator has eigenvalue {w[-1]:.3e} < 0")
    return np.clip(w, 0.0, None)


def ket(amplitudes) -> np.ndarray:
    """Normalized state vector; raises if the input norm is not 1."""
    psi = np.asarray(amplitudes, dtype=complex).ravel()
    if abs(np.linalg.norm(psi) - 1) > NORM_TOL:
        raise QMatError("state vector is not normalized")
    return psi


def basis(d: int, i: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[i] = 1
    return e


def proj(psi) -> np.ndarray:
    """Projector (or unnormalized outer product) ``|psi><psi|``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def tensor(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices or vectors."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray:
    """Reduced state on the subsystems listed in ``keep``.

    Args:
        rho: operator on the tensor product of subsystems with sizes ``dims``.
        dims: subsystem dimensions, in tensor order.
        keep: indices of subsystems to keep (order is normalized to ascending).

    Returns:
        Operator on the kept subsystems.
    """
    rho = _square(rho)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.shape[0]:
        raise QMatError(f"dims {dims} do not match matrix size {rho.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise QMatError(f"keep indices {keep} out of range")
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape(dims + dims)
    # contract each traced subsystem's row index with its column index
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise QMatError("too many subsystems")
    rows = list(letters[:n])
    cols = list(letters[n:2 * n])
    for i in traced:
        cols[i] = rows[i]
    out_idx = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out_idx, t)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return red.reshape(dk, dk)


def purify(rho) -> np.ndarray:
    """Canonical purification ``sum_i sqrt(w_i) |v_i>|e_i>``.

    The purifying system has the same dimension as ``rho`` and uses the
    standard basis, so tracing out the second factor returns ``rho``.
    """
    rho = validate_density(rho)
    w, v = eig_hermitian(rho)
    if w[-1] < -PSD_TOL:
        raise QMatError("negative eigenvalue")
    w = np.clip(w, 0.0, None)
    d = rho.shape[0]
    # sum_i sqrt(w_i) v_i (x) e_i, written as a d x d coefficient matrix
    coeff = v * np.sqrt(w)
    return coeff.reshape(d * d)


def trace_norm(m) -> float:
    m = _square(m)
    if is_hermitian(m, tol=1e-9):
        return float(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2)).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def trace_distance(a, b) -> float:
    a, b = _square(a), _square(b)
    if a.shape != b.shape:
        raise QMatError("dimension mismatch")
    return 0.5 * trace_norm(a - b)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.where(w > EIG_FLOOR * max(1.0, float(np.abs(w).max(initial=0.0))), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(a, b) -> float:
    """Fidelity ``tr sqrt(sqrt(a) b sqrt(a))`` (not squared)."""
    a, b = _square(a), _square(b)
    if a.shape != b.shape:
        raise QMatError("dimension mismatch")
    sa = _psd_sqrt(a)
    w = np.linalg.eigvalsh(sa @ b @ sa)
    # round-off eigenvalues of order 1e-17 would otherwise add ~1e-9 after the root
    w = np.where(w > EIG_FLOOR, w, 0.0)
    return float(np.clip(np.sqrt(w).sum(), 0.0, 1.0))


def apply_kraus(rho, kraus, selective: bool = False) -> np.ndarray:
    """Apply ``rho -> sum_k K rho K^dagger``.

    Args:
        rho: input operator.
        kraus: iterable of Kraus operators.
        selective: allow a trace-decreasing set (a measurement branch).
    """
    rho = _square(rho)
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if not ks:
        raise QMatError("empty Kraus set")
    completeness = sum(k.conj().T @ k for k in ks)
    eye = np.eye(ks[0].shape[1])
    if not selective and np.max(np.abs(completeness - eye)) > TRACE_TOL:
        raise QMatError("Kraus set is not trace preserving")
    return sum(k @ rho @ k.conj().T for k in ks)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix of the given rank (full rank by default)."""
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
