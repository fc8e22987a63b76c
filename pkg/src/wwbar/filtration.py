"""Measurement-based local filtration that turns WWbar into GHZ.

The local operator ``A = U D V`` is applied to each qubit: the unitaries
``V`` and ``U`` directly, and the non-unitary ``D = diag(1, 1/sqrt(3))`` by
attaching an ancilla in |0>, measuring the projector ``P = P1 + P2`` on
(ancilla, system), then measuring |0><0| on the ancilla, and keeping the
copy only if both outcomes are positive.

Composite two-qubit objects put the ancilla first, so the ancilla-|0> block
of a 4x4 matrix is its upper-left 2x2 block. With three system qubits the
six-qubit register is ordered (a1, s1, a2, s2, a3, s3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from . import rng as rngmod
from .linalg import partial_trace, tensor_product
from .states import DensityMatrix, StateVector, embed, make_state

OMEGA = np.exp(2j * np.pi / 3)
_R3 = math.sqrt(3.0)
_K0 = np.array([[1, 0], [0, 0]], dtype=complex)

CSV_HEADER = ["trials", "retained", "retained_fraction", "mean_fidelity", "seed"]


@dataclass(frozen=True)
class IloDecomposition:
    A: np.ndarray
    U: np.ndarray
    D: np.ndarray
    V: np.ndarray
    omega: complex


@lru_cache(maxsize=1)
def ilo_decomposition() -> IloDecomposition:
    """The filtering operator and its singular value decomposition ``A = U D V``."""
    w = OMEGA
    A = np.array([[1, w], [1, w**2]], dtype=complex) / _R3
    U = (1j / math.sqrt(2)) * np.array(
        [
            [np.exp(-1j * np.pi / 6), -np.exp(1j * np.pi / 3)],
            [np.exp(1j * np.pi / 6), -np.exp(-1j * np.pi / 3)],
        ]
    )
    V = np.array([[-1j, 1j], [1j, 1j]]) / math.sqrt(2)
    D = np.diag([1.0, 1.0 / _R3]).astype(complex)
    for m in (A, U, D, V):
        m.setflags(write=False)
    return IloDecomposition(A, U, D, V, complex(w))


@dataclass(frozen=True)
class ProjectorPair:
    P1: np.ndarray
    P2: np.ndarray
    P: np.ndarray
    D: np.ndarray
    Delta: np.ndarray
    Dprime: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray


@lru_cache(maxsize=1)
def build_projectors() -> ProjectorPair:
    """Rank-one projectors on (ancilla, system) whose sum has ``D`` as its ancilla-|0> block."""
    xi1 = np.array([1, 0, 0, 0], dtype=complex)
    xi2 = np.array([0, 3**0.25, 0, math.sqrt(3 - _R3)], dtype=complex) / _R3
    P1 = np.outer(xi1, xi1.conj())
    P2 = np.outer(xi2, xi2.conj())
    P = P1 + P2
    pair = ProjectorPair(P1, P2, P, P[:2, :2].copy(), P[:2, 2:].copy(), P[2:, 2:].copy(), xi1, xi2)
    for m in (pair.P1, pair.P2, pair.P, pair.D, pair.Delta, pair.Dprime):
        m.setflags(write=False)
    return pair


@dataclass
class FilterOutcome:
    """Result of one filtration trial.

    ``probability_trace`` lists the probability of the positive outcome of
    each measurement actually performed, in order; the run stops at the
    first negative outcome.
    """

    retained: bool
    stage_failed: str
    post_state: Optional[Union[StateVector, DensityMatrix]]
    probability_trace: list[float] = field(default_factory=list)
    failed_qubit: Optional[int] = None


@dataclass(frozen=True)
class EnsembleStats:
    trials: int
    retained: int
    retained_fraction: float
    mean_fidelity_to_GHZ: float
    seed: int
    success_probability: float
    min_fidelity_to_GHZ: float

    def csv_row(self) -> list[str]:
        return [
            str(self.trials),
            str(self.retained),
            repr(self.retained_fraction),
            repr(self.mean_fidelity_to_GHZ),
            str(self.seed),
        ]


# --- measurement plumbing ---------------------------------------------------


def _uniform_source(rng, uniforms) -> Iterator[float]:
    if uniforms is not None:
        yield from (float(u) for u in uniforms)
        raise ValueError("ran out of supplied uniform variates")
    if rng is None:
        raise ValueError("need either rng or uniforms")
    while True:
        yield float(rng.random())


def _clip_prob(p: float) -> float:
    p = float(np.real(p))
    if abs(p - 1.0) < 1e-12:
        return 1.0
    return min(max(p, 0.0), 1.0)


# --- single qubit -----------------------------------------------------------


def two_stage_probabilities(rho) -> tuple[float, float]:
    """Exact probabilities ``(P positive, ancilla |0> given P positive)``.

    Their product is ``Tr(D rho D)``.
    """
    pp = build_projectors()
    rho = np.asarray(getattr(rho, "data", rho), dtype=complex)
    p1 = _clip_prob(np.trace(pp.D @ rho))
    joint = _clip_prob(np.trace(pp.D @ rho @ pp.D))
    return p1, (joint / p1 if p1 > 0 else 0.0)


def outcome_blocks(rho) -> np.ndarray:
    """``P (|0><0| (x) rho) P`` for a one-qubit ``rho``; unnormalized, 4x4."""
    pp = build_projectors()
    rho = np.asarray(getattr(rho, "data", rho), dtype=complex)
    return pp.P @ np.kron(_K0, rho) @ pp.P


def filter_single_qubit(rho: DensityMatrix, rng=None, *, uniforms=None, mode: str = "faithful") -> FilterOutcome:
    """One trial of the ancilla-assisted ``D`` filter on a single qubit.

    ``mode="faithful"`` carries the ancilla explicitly; ``mode="fast"``
    uses the equivalent Kraus update on the system alone.
    """
    if rho.n_qubits != 1:
        raise ValueError("filter_single_qubit needs a one-qubit density matrix")
    draws = _uniform_source(rng, uniforms)
    pp = build_projectors()

    if mode == "fast":
        p1, p2 = two_stage_probabilities(rho)
        if not next(draws) < p1:
            return FilterOutcome(False, "P_measurement", None, [p1])
        if not next(draws) < p2:
            return FilterOutcome(False, "ancilla_measurement", None, [p1, p2])
        out = pp.D @ rho.data @ pp.D
        return FilterOutcome(True, "none", DensityMatrix(out / np.trace(out).real), [p1, p2])
    if mode != "faithful":
        raise ValueError(f"unknown mode {mode!r}")

    comp = np.kron(_K0, rho.data)
    after = pp.P @ comp @ pp.P
    p1 = _clip_prob(np.trace(after))
    if not next(draws) < p1:
        return FilterOutcome(False, "P_measurement", None, [p1])
    after = after / p1
    anc0 = np.kron(_K0, np.eye(2))
    after2 = anc0 @ after @ anc0
    p2 = _clip_prob(np.trace(after2))
    if not next(draws) < p2:
        return FilterOutcome(False, "ancilla_measurement", None, [p1, p2])
    system = partial_trace(after2 / p2, [2])
    return FilterOutcome(True, "none", DensityMatrix(system / np.trace(system).real), [p1, p2])


# --- three qubits -----------------------------------------------------------


def local_tensor(m: np.ndarray) -> np.ndarray:
    return tensor_product(m, m, m)


def apply_ilo_deterministic(state: StateVector) -> tuple[np.ndarray, float]:
    """``(A (x) A (x) A)|psi>`` without normalization, and its squared norm."""
    out = local_tensor(ilo_decomposition().A) @ state.data
    return out, float(np.vdot(out, out).real)


def success_probability(state: StateVector) -> float:
    return apply_ilo_deterministic(state)[1]


@lru_cache(maxsize=None)
def _six_qubit_ops() -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    P = build_projectors().P
    eye4 = np.eye(4, dtype=complex)
    proj = tuple(tensor_product(*(P if k == q else eye4 for k in range(3))) for q in range(3))
    anc = tuple(embed({2 * q + 1: _K0}, 6) for q in range(3))
    return proj, anc


def _interleave_vec(psi: np.ndarray) -> np.ndarray:
    # (a1 a2 a3 s1 s2 s3) -> (a1 s1 a2 s2 a3 s3)
    full = np.kron(np.array([1, 0, 0, 0, 0, 0, 0, 0], dtype=complex), psi)
    return full.reshape([2] * 6).transpose(0, 3, 1, 4, 2, 5).reshape(64)


def _interleave_rho(rho: np.ndarray) -> np.ndarray:
    anc = np.zeros((8, 8), dtype=complex)
    anc[0, 0] = 1.0
    full = np.kron(anc, rho).reshape([2] * 12)
    perm = [0, 3, 1, 4, 2, 5]
    return full.transpose(perm + [p + 6 for p in perm]).reshape(64, 64)


def _system_part(vec64: np.ndarray) -> np.ndarray:
    return vec64.reshape([2] * 6)[0, :, 0, :, 0, :].reshape(8)


def _schedule(mode: str, order: Sequence[int], schedule: str) -> list[tuple[str, int]]:
    order = tuple(order)
    if sorted(order) != [1, 2, 3]:
        raise ValueError(f"order must be a permutation of (1, 2, 3), got {order}")
    if schedule == "interleaved":
        return [(stage, q) for q in order for stage in ("P", "ancilla")]
    if schedule == "projectors_first":
        if mode != "faithful":
            raise ValueError("schedule='projectors_first' needs mode='faithful' (ancillas must be explicit)")
        return [("P", q) for q in order] + [("ancilla", q) for q in order]
    raise ValueError(f"unknown schedule {schedule!r}")


def _run_three(psi: np.ndarray, draws, mode: str, order, schedule: str):
    """Shared trial loop. Yields the success path when ``draws`` is None."""
    ilo = ilo_decomposition()
    steps = _schedule(mode, order, schedule)
    vec = local_tensor(ilo.V) @ psi
    trace: list[float] = []

    if mode == "faithful":
        proj, anc = _six_qubit_ops()
        vec = _interleave_vec(vec)
        for stage, q in steps:
            m = proj[q - 1] if stage == "P" else anc[q - 1]
            nxt = m @ vec
            p = _clip_prob(np.vdot(nxt, nxt).real)
            trace.append(p)
            if draws is not None and not next(draws) < p:
                return False, stage, q, trace, None
            vec = nxt / math.sqrt(p) if p > 0 else nxt
        system = _system_part(vec)
    elif mode == "fast":
        D = ilo.D
        for stage, q in steps:
            Dq = embed({q: D}, 3)
            if stage == "P":
                p = _clip_prob(np.vdot(vec, Dq @ vec).real)
            else:
                nxt = Dq @ vec
                p = _clip_prob(np.vdot(nxt, nxt).real / trace[-1])
            trace.append(p)
            if draws is not None and not next(draws) < p:
                return False, stage, q, trace, None
            if stage == "ancilla":
                n2 = np.vdot(nxt, nxt).real
                vec = nxt / math.sqrt(n2) if n2 > 0 else nxt
        system = vec
    else:
        raise ValueError(f"unknown mode {mode!r}")

    final = local_tensor(ilo.U) @ system
    return True, "none", None, trace, final


def filter_three_qubit(
    state: StateVector,
    rng=None,
    *,
    uniforms=None,
    mode: str = "fast",
    order: Sequence[int] = (1, 2, 3),
    schedule: str = "interleaved",
) -> FilterOutcome:
    """One trial of the three-party filter.

    Each qubit gets ``V``, its own ancilla procedure, then ``U``. A uniform
    variate is drawn per measurement (from ``rng`` or from the supplied
    ``uniforms``) and the outcome is positive when it falls below the
    branch probability.
    """
    if state.n_qubits != 3:
        raise ValueError("filter_three_qubit needs a three-qubit state")
    ok, stage, q, trace, final = _run_three(state.data, _uniform_source(rng, uniforms), mode, order, schedule)
    if not ok:
        failed = "P_measurement" if stage == "P" else "ancilla_measurement"
        return FilterOutcome(False, failed, None, trace, q)
    return FilterOutcome(True, "none", StateVector(final, normalize=True), trace)


def kraus_filter_block(rho3) -> np.ndarray:
    """``D^{(x)3} rho D^{(x)3}``: the unnormalized retained block, system only."""
    Dt = local_tensor(ilo_decomposition().D)
    rho3 = np.asarray(getattr(rho3, "data", rho3), dtype=complex)
    return Dt @ rho3 @ Dt


def faithful_filter_block(rho3) -> np.ndarray:
    """Same block computed on the explicit 64-dimensional ancilla register.

    Applies ``P (x) P (x) P``, then |0><0| on every ancilla, and returns the
    unnormalized system block.
    """
    rho3 = np.asarray(getattr(rho3, "data", rho3), dtype=complex)
    proj, anc = _six_qubit_ops()
    x = _interleave_rho(rho3)
    for m in proj + anc:
        x = m @ x @ m
    t = x.reshape([2] * 12)
    return t[0, :, 0, :, 0, :, 0, :, 0, :, 0, :].reshape(8, 8)


def run_ensemble(
    state: StateVector,
    trials: int,
    seed: int = 0,
    *,
    mode: str = "fast",
    order: Sequence[int] = (1, 2, 3),
    schedule: str = "interleaved",
    chunk: int = 1_000_000,
) -> EnsembleStats:
    """Filter ``trials`` identical copies of ``state``.

    Trial ``i`` uses the uniform row ``rng.trial_uniforms(seed, "filter", i, i+1)``,
    so the result equals calling :func:`filter_three_qubit` with that row
    for every trial, but the shared success path is computed only once.
    """
    if int(trials) < 1:
        raise ValueError("trials must be >= 1")
    trials = int(trials)
    ok, _, _, probs, final = _run_three(state.data, None, mode, order, schedule)
    probs = np.asarray(probs)

    retained = 0
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        u = rngmod.trial_uniforms(seed, "filter", start, stop)[:, : probs.size]
        retained += int(np.count_nonzero(np.all(u < probs, axis=1)))

    if retained and final is not None and np.linalg.norm(final) > 0:
        ghz = make_state("GHZ").data
        post = final / np.linalg.norm(final)
        fid = float(abs(np.vdot(ghz, post)) ** 2)
    else:
        fid = float("nan")
    return EnsembleStats(
        trials=trials,
        retained=retained,
        retained_fraction=retained / trials,
        mean_fidelity_to_GHZ=fid,
        seed=int(seed),
        success_probability=float(np.prod(probs)),
        min_fidelity_to_GHZ=fid,
    )


def trial_outcomes(state: StateVector, start: int, stop: int, seed: int = 0, **kwargs) -> list[FilterOutcome]:
    """Run trials ``start..stop-1`` one at a time with the ensemble's random rows."""
    rows = rngmod.trial_uniforms(seed, "filter", start, stop)
    return [filter_three_qubit(state, uniforms=row, **kwargs) for row in rows]
