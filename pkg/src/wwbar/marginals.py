"""Rebuild a three-qubit pure state from its (AB, BC) two-party marginals.

``rho_A`` and ``rho_BC`` have the same nonzero spectrum ``p_i``, and every
pure state consistent with both has the form

    |psi; alpha> = sum_i exp(i alpha_i) sqrt(p_i) |i> (x) |i; BC>

with ``|i>`` and ``|i; BC>`` their eigenvectors. The free phases are then
fixed by matching ``Tr_C |psi><psi|`` to ``rho_AB``. For a rank-2 ``rho_A``
the AB cross term is linear in ``exp(-i alpha_1)``, which gives the best
phase in closed form. When that cross term vanishes (GHZ-type states) the
marginals do not pick out a phase and the result is flagged as not unique.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import frobenius, hermitian_eig, partial_trace, project_psd
from .states import StateVector

SPECTRUM_TOL = 1e-5
RANK_TOL = 1e-9
CROSS_TOL = 1e-8
DEGENERACY_GAP = 1e-7
EXACT_CONSISTENCY_TOL = 1e-6
NOISY_CONSISTENCY_TOL = 0.05


class InconsistentMarginals(ValueError):
    """The marginals cannot come from one common pure state."""

    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


def _mat(rho) -> np.ndarray:
    return np.asarray(getattr(rho, "data", rho), dtype=complex)


def consistency_check(rho_ab, rho_bc) -> float:
    """Frobenius distance between the two ``rho_B`` these marginals imply."""
    return frobenius(partial_trace(_mat(rho_ab), [2]) - partial_trace(_mat(rho_bc), [1]))


@dataclass
class SchmidtPairing:
    eigenvalues: np.ndarray
    vectors_A: np.ndarray
    vectors_BC: np.ndarray
    degenerate: bool
    spectrum_mismatch: float = 0.0

    @property
    def rank(self) -> int:
        return len(self.eigenvalues)


def schmidt_pairing(rho_a, rho_bc, tol: float = SPECTRUM_TOL) -> SchmidtPairing:
    """Pair eigenvectors of ``rho_A`` and ``rho_BC`` by eigenvalue (descending).

    Raises:
        InconsistentMarginals: if the nonzero spectra differ by more than ``tol``.
    """
    ea = hermitian_eig(_mat(rho_a))
    eb = hermitian_eig(_mat(rho_bc))
    rank = int(np.count_nonzero(ea.eigenvalues > RANK_TOL))
    pa = ea.eigenvalues[:rank]
    pb = eb.eigenvalues
    mismatch = float(max(np.max(np.abs(pa - pb[:rank])), np.max(np.abs(pb[rank:]), initial=0.0)))
    if mismatch > tol:
        raise InconsistentMarginals(
            f"rho_A and rho_BC spectra differ by {mismatch:.3e} (tolerance {tol:.1e})", mismatch
        )
    degenerate = bool(rank > 1 and np.min(np.abs(np.diff(pa))) < DEGENERACY_GAP)
    return SchmidtPairing(pa.copy(), ea.eigenvectors[:, :rank].copy(), eb.eigenvectors[:, :rank].copy(), degenerate, mismatch)


def compatible_state(pairing: SchmidtPairing, alphas) -> StateVector:
    """``sum_i exp(i alpha_i) sqrt(p_i) |i>|i;BC>`` for the given phases."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if alphas.size != pairing.rank:
        raise ValueError(f"need {pairing.rank} phases, got {alphas.size}")
    weights = np.exp(1j * alphas) * np.sqrt(pairing.eigenvalues)
    psi = sum(
        w * np.kron(pairing.vectors_A[:, i], pairing.vectors_BC[:, i]) for i, w in enumerate(weights)
    )
    return StateVector(psi, normalize=True)


@dataclass
class PhaseFit:
    alphas: np.ndarray
    residual: float
    unique: bool
    cross_norm: float = 0.0


def _tr_c(psi: np.ndarray) -> np.ndarray:
    return partial_trace(np.outer(psi, psi.conj()), [1, 2])


def _cross_block(pairing: SchmidtPairing, i: int, j: int) -> np.ndarray:
    """Contribution of the (i, j) term to ``Tr_C``, without its phase factor."""
    a = np.outer(pairing.vectors_A[:, i], pairing.vectors_A[:, j].conj())
    bc = np.outer(pairing.vectors_BC[:, i], pairing.vectors_BC[:, j].conj())
    return np.sqrt(pairing.eigenvalues[i] * pairing.eigenvalues[j]) * np.kron(a, partial_trace(bc, [1]))


def fit_phases(pairing: SchmidtPairing, rho_ab) -> PhaseFit:
    """Choose the phases so the AB marginal of the compatible state best matches ``rho_ab``."""
    target = _mat(rho_ab)
    if pairing.rank == 1:
        psi = compatible_state(pairing, [0.0]).data
        return PhaseFit(np.zeros(1), frobenius(_tr_c(psi) - target), True, 0.0)
    if pairing.rank != 2:
        raise ValueError(f"rho_A of a qubit has rank <= 2, got {pairing.rank}")

    m01 = _cross_block(pairing, 0, 1)
    cross_norm = frobenius(m01)
    diag = _cross_block(pairing, 0, 0) + _cross_block(pairing, 1, 1)
    # Tr_C = diag + e^{-i a} m01 + e^{i a} m01^H; Re(e^{i a} c) is maximized at a = -arg c
    c = np.vdot(m01, target - diag)
    alpha = float(np.mod(-np.angle(c), 2 * np.pi)) if abs(c) > 0 else 0.0
    alphas = np.array([0.0, alpha])
    psi = compatible_state(pairing, alphas).data
    residual = frobenius(_tr_c(psi) - target)
    unique = bool(cross_norm >= CROSS_TOL and not pairing.degenerate)
    return PhaseFit(alphas, residual, unique, cross_norm)


@dataclass
class ReconstructionResult:
    state: StateVector
    residual: float
    unique: bool
    consistency_deviation: float
    checks: dict = field(default_factory=dict)

    def metadata(self) -> dict:
        return {
            "residual": self.residual,
            "unique": self.unique,
            "consistency_deviation": self.consistency_deviation,
            **self.checks,
        }


def _clean(rho) -> np.ndarray:
    return project_psd(_mat(rho))


def reconstruct_from_marginals(rho_ab, rho_bc, *, exact: bool = False, tol: float | None = None) -> ReconstructionResult:
    """Full three-qubit pure state from ``rho_AB`` and ``rho_BC``.

    Inputs are first made into valid density matrices. ``exact=True``
    tightens the default consistency tolerance from 0.05 to 1e-6 and the
    spectrum tolerance to 1e-5.

    Raises:
        InconsistentMarginals: if the shared ``rho_B`` or the spectra disagree.
    """
    ab, bc = _clean(rho_ab), _clean(rho_bc)
    if ab.shape != (4, 4) or bc.shape != (4, 4):
        raise ValueError("both marginals must be two-qubit density matrices")
    if tol is None:
        tol = EXACT_CONSISTENCY_TOL if exact else NOISY_CONSISTENCY_TOL
    dev = consistency_check(ab, bc)
    if dev > tol:
        raise InconsistentMarginals(f"marginals disagree on rho_B by {dev:.3e} (tolerance {tol:.1e})", dev)

    rho_a = partial_trace(ab, [1])
    pairing = schmidt_pairing(rho_a, bc, SPECTRUM_TOL if exact else tol)
    fit = fit_phases(pairing, ab)
    psi = compatible_state(pairing, fit.alphas)
    rho = np.outer(psi.data, psi.data.conj())
    bc_dev = frobenius(partial_trace(rho, [2, 3]) - bc)
    residual = float(np.hypot(fit.residual, bc_dev))
    return ReconstructionResult(
        psi,
        residual,
        fit.unique,
        dev,
        {
            "ab_residual": fit.residual,
            "bc_residual": bc_dev,
            "alphas": [float(a) for a in fit.alphas],
            "eigenvalues": [float(p) for p in pairing.eigenvalues],
            "degenerate": pairing.degenerate,
            "cross_norm": fit.cross_norm,
        },
    )
