"""Fidelity, trace distance and purity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .linalg import PSD_ATOL, floored, hermitian_eig, psd_sqrt
from .states import DensityMatrix, StateVector, as_density

State = Union[StateVector, DensityMatrix]


@dataclass(frozen=True)
class FidelityReport:
    value: float
    inputs_projected: bool = False

    def __float__(self) -> float:
        return self.value


def _clip_flag(rho: np.ndarray) -> bool:
    lam = hermitian_eig(rho).eigenvalues
    if lam.min() < -PSD_ATOL:
        raise ValueError(f"input is not positive semidefinite (min eigenvalue {lam.min():.3e})")
    return bool(lam.min() < 0)


def fidelity(rho1: State, rho2: State) -> FidelityReport:
    r"""Uhlmann-Jozsa fidelity :math:`(\mathrm{Tr}\sqrt{\sqrt{\rho_1}\rho_2\sqrt{\rho_1}})^2`.

    Both square roots go through the Jacobi eigensolver. Inputs with
    eigenvalues in ``[-1e-8, 0)`` are clipped and the report is flagged.
    """
    a, b = as_density(rho1).data, as_density(rho2).data
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    projected = _clip_flag(a) | _clip_flag(b)
    sa = psd_sqrt(a)
    inner = sa @ b @ sa
    lam = hermitian_eig(0.5 * (inner + inner.conj().T)).eigenvalues
    value = float(np.sum(np.sqrt(floored(lam))) ** 2)
    return FidelityReport(min(max(value, 0.0), 1.0), projected)


def pure_fidelity(psi: StateVector, phi: StateVector) -> float:
    return float(abs(np.vdot(psi.data, phi.data)) ** 2)


def trace_distance(rho1: State, rho2: State) -> float:
    a, b = as_density(rho1).data, as_density(rho2).data
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    lam = hermitian_eig(a - b).eigenvalues
    return float(0.5 * np.sum(np.abs(lam)))


def purity(rho: State) -> float:
    m = as_density(rho).data
    return float(np.real(np.trace(m @ m)))
