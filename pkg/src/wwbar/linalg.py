"""Dense complex linear algebra for small qubit registers.

Everything here works on plain ``numpy`` arrays. Qubit 1 is the most
significant bit of a basis index, so ``kron(a, b)`` places ``a`` on the
lower-numbered qubit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

HERMITIAN_ATOL = 1e-8
PSD_ATOL = 1e-8
DEGENERACY_TOL = 1e-7
JACOBI_TOL = 1e-12
# eigenvalues this small (relative to the largest) are solver noise; zero them before a root
SQRT_FLOOR = 1e-14
_MAX_SWEEPS = 100


def _as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def tensor_product(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices (or vectors), left to right."""
    if not mats:
        raise ValueError("tensor_product needs at least one operand")
    return reduce(np.kron, (np.asarray(m, dtype=complex) for m in mats))


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def partial_trace(rho, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on the qubits in ``keep`` (1-based).

    The kept qubits appear in their original relative order regardless of
    the order given in ``keep``.
    """
    rho = _as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise ValueError("partial_trace needs a square matrix")
    n = num_qubits(rho.shape[0])
    keep = sorted(set(int(k) for k in keep))
    if len(keep) == 0 or any(k < 1 or k > n for k in keep):
        raise ValueError(f"keep must be a non-empty subset of 1..{n}, got {keep}")

    traced = [q for q in range(1, n + 1) if q not in keep]
    t = rho.reshape([2] * (2 * n))
    # contract pairs from the highest axis down so remaining axis numbers stay valid
    for q in sorted(traced, reverse=True):
        m = t.ndim // 2
        t = np.trace(t, axis1=q - 1, axis2=m + q - 1)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def is_hermitian(m, atol: float = HERMITIAN_ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0, atol=atol)


def gauge_vector(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude entry is real positive.

    Ties in magnitude (within 1e-12) go to the lowest index.
    """
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    if mags.max() == 0:
        return v.copy()
    j = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
    return v * (np.conj(v[j]) / mags[j])


@dataclass(frozen=True)
class EigenSystem:
    """Spectrum of a Hermitian matrix, eigenvalues descending.

    ``eigenvectors[:, k]`` pairs with ``eigenvalues[k]``; each column is
    phase-gauged with :func:`gauge_vector`.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_groups: tuple[tuple[int, ...], ...]
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    apq = a[p, q]
    mag = abs(apq)
    if mag == 0.0:
        return
    phase = apq / mag
    app, aqq = a[p, p].real, a[q, q].real
    theta = 0.5 * np.arctan2(2.0 * mag, aqq - app)
    c, s = np.cos(theta), np.sin(theta)
    # G = diag(1, conj(phase)) @ [[c, s], [-s, c]] zeroes a[p, q] under G^H a G
    g00, g01 = c, s
    g10, g11 = -s * np.conj(phase), c * np.conj(phase)
    for mat in (a, v):
        cp, cq = mat[:, p].copy(), mat[:, q].copy()
        mat[:, p] = cp * g00 + cq * g10
        mat[:, q] = cp * g01 + cq * g11
    rp, rq = a[p, :].copy(), a[q, :].copy()
    a[p, :] = np.conj(g00) * rp + np.conj(g10) * rq
    a[q, :] = np.conj(g01) * rp + np.conj(g11) * rq
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real


def _group_degenerate(values: np.ndarray, tol: float) -> tuple[tuple[int, ...], ...]:
    groups: list[list[int]] = []
    for k, lam in enumerate(values):
        if groups and abs(values[groups[-1][-1]] - lam) < tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    return tuple(tuple(g) for g in groups)


def hermitian_eig(m, tol: float = JACOBI_TOL, degeneracy_tol: float = DEGENERACY_TOL) -> EigenSystem:
    """Diagonalize a Hermitian matrix with cyclic complex Jacobi sweeps.

    Raises:
        ValueError: if ``m`` is not Hermitian within 1e-8.
    """
    m = _as_matrix(m)
    if not is_hermitian(m):
        raise ValueError("hermitian_eig: input is not Hermitian within 1e-8")
    n = m.shape[0]
    a = 0.5 * (m + m.conj().T)
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))

    sweeps = 0
    while sweeps < _MAX_SWEEPS:
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotate(a, v, p, q)
        sweeps += 1
    else:
        raise RuntimeError("Jacobi eigensolver did not converge")

    values = np.real(np.diag(a)).copy()
    vecs = np.column_stack([gauge_vector(v[:, k]) for k in range(n)])
    # descending; within ties keep eigenvectors ordered by their dominant basis index
    dominant = np.argmax(np.abs(vecs) > np.abs(vecs).max(axis=0) - 1e-9, axis=0)
    order = _stable_tie_order(values, dominant, list(np.argsort(-values, kind="stable")), degeneracy_tol)
    values = values[order]
    vecs = vecs[:, order]
    return EigenSystem(values, vecs, _group_degenerate(values, degeneracy_tol), sweeps)


def _stable_tie_order(values, dominant, order, tol):
    # exact-float sorting can split nearly equal eigenvalues arbitrarily;
    # re-sort each near-degenerate run by dominant index only
    out: list[int] = []
    run: list[int] = []
    for k in order:
        if run and abs(values[run[-1]] - values[k]) >= tol:
            out.extend(sorted(run, key=lambda j: dominant[j]))
            run = []
        run.append(k)
    out.extend(sorted(run, key=lambda j: dominant[j]))
    return out


def floored(values: np.ndarray, floor: float = SQRT_FLOOR) -> np.ndarray:
    """Clip negatives and zero eigenvalues below ``floor * max(1, max |value|)``."""
    cut = floor * max(1.0, float(np.max(np.abs(values))))
    return np.where(values < cut, 0.0, values)


def psd_sqrt(m, atol: float = PSD_ATOL) -> np.ndarray:
    """Principal square root of a Hermitian positive-semidefinite matrix.

    Eigenvalues in ``[-atol, 0)`` are clipped to zero, as are positive ones
    below the noise floor ``SQRT_FLOOR``; anything below ``-atol`` raises
    ``ValueError``.
    """
    es = hermitian_eig(m)
    if es.eigenvalues.min() < -atol:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {es.eigenvalues.min():.3e})")
    root = np.sqrt(floored(es.eigenvalues))
    v = es.eigenvectors
    r = (v * root) @ v.conj().T
    return 0.5 * (r + r.conj().T)


def frobenius(m) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def project_psd(m) -> np.ndarray:
    """Hermitize, clip negative eigenvalues to zero and renormalize the trace to one."""
    m = _as_matrix(m)
    es = hermitian_eig(0.5 * (m + m.conj().T))
    vals = np.clip(es.eigenvalues, 0.0, None)
    if vals.sum() <= 0:
        raise ValueError("cannot project a matrix with no positive spectrum onto a density matrix")
    vals = vals / vals.sum()
    v = es.eigenvectors
    out = (v * vals) @ v.conj().T
    return 0.5 * (out + out.conj().T)
