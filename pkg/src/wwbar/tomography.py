"""Simulated NMR state tomography.

Readout model: after a detection setting's rotation ``R``, the spectrum of
spin ``k`` shows one line per pair of basis states that differ only in bit
``k``. The line carries the complex coherence ``(R rho R^dagger)[i, j]``
with bit ``k`` of ``i`` equal to 0. So an ``n``-qubit setting yields
``n * 2**(n-1)`` complex observations.

Pulse convention: an ``X`` (``Y``) token is ``exp(-i pi/4 sigma_x)``
(``exp(-i pi/4 sigma_y)``) on that qubit; ``I`` is no pulse.

Reconstruction is linear least squares over the ``4**n - 1`` real Pauli
coordinates of a unit-trace Hermitian matrix, followed by eigenvalue
clipping to the nearest density matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import rng as rngmod
from .linalg import project_psd, tensor_product
from .states import DensityMatrix

SETTINGS_3Q = ("III", "IIX", "IXI", "XII", "IIY", "IYI", "YII", "YYI", "IXX", "XXX", "YYY")
# two-qubit sets as listed for the full register; the traced qubit's I is dropped
SETTINGS_2Q_SOURCE = {
    "AB": (("III", "IXI", "IYI", "XXI"), 2),
    "BC": (("III", "IIX", "IIY", "IXX"), 0),
}

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULIS = (np.eye(2, dtype=complex), _SX, _SY, _SZ)
_PULSES = {
    "I": np.eye(2, dtype=complex),
    "X": (np.eye(2) - 1j * _SX) / np.sqrt(2),
    "Y": (np.eye(2) - 1j * _SY) / np.sqrt(2),
}


@dataclass(frozen=True)
class DetectionSetting:
    label: str

    def __post_init__(self):
        if not self.label or set(self.label) - set(_PULSES):
            raise ValueError(f"bad detection label {self.label!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.label)

    @property
    def rotation(self) -> np.ndarray:
        return _rotation(self.label)


@lru_cache(maxsize=None)
def _rotation(label: str) -> np.ndarray:
    r = tensor_product(*(_PULSES[c] for c in label))
    r.setflags(write=False)
    return r


def detection_settings_3q() -> list[DetectionSetting]:
    return [DetectionSetting(s) for s in SETTINGS_3Q]


def detection_settings_2q(pair: str) -> list[DetectionSetting]:
    """Four settings for the (A, B) or (B, C) marginal, on a two-qubit register."""
    try:
        labels, drop = SETTINGS_2Q_SOURCE[pair.upper()]
    except KeyError:
        raise ValueError(f"pair must be 'AB' or 'BC', got {pair!r}") from None
    return [DetectionSetting(s[:drop] + s[drop + 1 :]) for s in labels]


@dataclass(frozen=True)
class Observation:
    spin: int
    transition: int
    bra_index: int
    ket_index: int
    value: complex


@dataclass
class MeasurementRecord:
    setting: DetectionSetting
    observations: list[Observation]
    noise_sigma: float = 0.0

    def values(self) -> np.ndarray:
        return np.array([o.value for o in self.observations], dtype=complex)

    def to_dict(self) -> dict:
        return {
            "setting": self.setting.label,
            "sigma": self.noise_sigma,
            "observations": [
                {
                    "spin": o.spin,
                    "bra_index": o.bra_index,
                    "ket_index": o.ket_index,
                    "re": float(o.value.real),
                    "im": float(o.value.imag),
                }
                for o in self.observations
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementRecord":
        setting = DetectionSetting(d["setting"])
        pairs = {(s, i, j): t for s, t, i, j in _transition_pairs(setting.n_qubits)}
        obs = []
        for o in d["observations"]:
            key = (int(o["spin"]), int(o["bra_index"]), int(o["ket_index"]))
            if key not in pairs:
                raise ValueError(f"observation {key} is not a single-quantum line")
            obs.append(Observation(key[0], pairs[key], key[1], key[2], complex(o["re"], o["im"])))
        return cls(setting, obs, float(d.get("sigma", 0.0)))


@lru_cache(maxsize=None)
def _transition_pairs(n: int) -> tuple[tuple[int, int, int, int], ...]:
    """(spin, transition, bra, ket) for every single-quantum line, spin-major."""
    out = []
    for spin in range(1, n + 1):
        bit = 1 << (n - spin)
        t = 0
        for i in range(2**n):
            if not i & bit:
                out.append((spin, t, i, i | bit))
                t += 1
    return tuple(out)


def _lines(rotated: np.ndarray, n: int) -> list[tuple[int, int, int, int, complex]]:
    return [(s, t, i, j, complex(rotated[i, j])) for s, t, i, j in _transition_pairs(n)]


def simulate_readout(rho: DensityMatrix, setting: DetectionSetting, sigma: float = 0.0, rng=None) -> MeasurementRecord:
    """Noisy single-quantum spectrum of ``rho`` after the setting's pulses.

    Gaussian noise of standard deviation ``sigma`` is added independently
    to the real and imaginary part of every line.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if setting.n_qubits != rho.n_qubits:
        raise ValueError(f"setting {setting.label} does not fit a {rho.n_qubits}-qubit state")
    r = setting.rotation
    rotated = r @ rho.data @ r.conj().T
    lines = _lines(rotated, rho.n_qubits)
    if sigma > 0:
        if rng is None:
            raise ValueError("a random generator is needed when sigma > 0")
        noise = rng.normal(0.0, sigma, size=(len(lines), 2))
        lines = [(s, t, i, j, v + complex(nr, ni)) for (s, t, i, j, v), (nr, ni) in zip(lines, noise)]
    obs = [Observation(s, t, i, j, v) for s, t, i, j, v in lines]
    return MeasurementRecord(setting, obs, float(sigma))


# --- linear inversion -------------------------------------------------------


@lru_cache(maxsize=None)
def _pauli_basis(n: int) -> tuple[np.ndarray, ...]:
    mats = []
    for idx in itertools.product(range(4), repeat=n):
        if any(idx):
            mats.append(tensor_product(*(_PAULIS[k] for k in idx)))
    return tuple(mats)


@lru_cache(maxsize=None)
def _setting_block(label: str) -> np.ndarray:
    """Real design rows (re parts, then im parts) for one setting."""
    n = len(label)
    r = _rotation(label)
    pairs = _transition_pairs(n)
    d = 2**n
    cols = []
    for p in _pauli_basis(n):
        rp = r @ p @ r.conj().T / d
        v = np.array([rp[i, j] for _, _, i, j in pairs])
        cols.append(np.concatenate([v.real, v.imag]))
    block = np.array(cols).T
    block.setflags(write=False)
    return block


def design_matrix(settings: Sequence[DetectionSetting]) -> np.ndarray:
    return np.vstack([_setting_block(s.label) for s in settings])


def design_rank(settings: Sequence[DetectionSetting]) -> int:
    return int(np.linalg.matrix_rank(design_matrix(settings), tol=1e-9))


@dataclass
class TomographyProblem:
    records: list[MeasurementRecord]
    design_matrix: np.ndarray
    data: np.ndarray
    rank: int

    @property
    def n_qubits(self) -> int:
        return self.records[0].setting.n_qubits

    @property
    def n_params(self) -> int:
        return 4**self.n_qubits - 1


def build_problem(records: Sequence[MeasurementRecord]) -> TomographyProblem:
    if not records:
        raise ValueError("need at least one measurement record")
    n = records[0].setting.n_qubits
    if any(r.setting.n_qubits != n for r in records):
        raise ValueError("all records must be on the same register")
    pairs = _transition_pairs(n)
    ys = []
    for rec in records:
        by_key = {(o.spin, o.bra_index, o.ket_index): o.value for o in rec.observations}
        try:
            v = np.array([by_key[(s, i, j)] for s, _, i, j in pairs])
        except KeyError as ex:
            raise ValueError(f"record {rec.setting.label} is missing line {ex.args[0]}") from None
        ys.append(np.concatenate([v.real, v.imag]))
    design = design_matrix([r.setting for r in records])
    rank = int(np.linalg.matrix_rank(design, tol=1e-9))
    return TomographyProblem(list(records), design, np.concatenate(ys), rank)


class Reconstruction(NamedTuple):
    density: DensityMatrix
    residual: float
    rank: int


def reconstruct_linear_inversion(records: Sequence[MeasurementRecord]) -> Reconstruction:
    """Least-squares density matrix from single-quantum records.

    A rank below ``4**n - 1`` is reported, not raised; the unidentified
    directions are set to zero (minimum-norm solution).
    """
    prob = build_problem(records)
    n = prob.n_qubits
    x, *_ = np.linalg.lstsq(prob.design_matrix, prob.data, rcond=1e-10)
    residual = float(np.linalg.norm(prob.design_matrix @ x - prob.data))
    d = 2**n
    rho = np.eye(d, dtype=complex) / d
    for coeff, p in zip(x, _pauli_basis(n)):
        rho = rho + coeff * p / d
    return Reconstruction(DensityMatrix(project_psd(rho)), residual, prob.rank)


def augment_settings(settings: Sequence[DetectionSetting]) -> tuple[list[DetectionSetting], list[str]]:
    """Append product pulse settings until the design has full rank.

    Candidates are tried in lexicographic order over ``{I, X, Y}**n``;
    only those that raise the rank are kept.
    """
    settings = list(settings)
    n = settings[0].n_qubits
    full = 4**n - 1
    rank = design_rank(settings)
    added: list[str] = []
    present = {s.label for s in settings}
    for toks in itertools.product("IXY", repeat=n):
        if rank >= full:
            break
        label = "".join(toks)
        if label in present:
            continue
        trial = settings + [DetectionSetting(label)]
        r = design_rank(trial)
        if r > rank:
            settings, rank = trial, r
            added.append(label)
    return settings, added


def depolarize(rho: DensityMatrix, p: float) -> DensityMatrix:
    """``(1 - p) rho + p I / 2**n``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing weight must lie in [0, 1], got {p}")
    d = rho.dim
    return DensityMatrix((1 - p) * rho.data + p * np.eye(d) / d)


@dataclass
class TomographyRun:
    records: list[MeasurementRecord]
    result: Reconstruction
    settings: list[DetectionSetting]
    augmented: list[str] = field(default_factory=list)


def tomograph(
    rho: DensityMatrix,
    settings: Sequence[DetectionSetting],
    sigma: float = 0.0,
    seed: int = 0,
    *,
    augment: bool = True,
    label: str = "readout",
) -> TomographyRun:
    """Simulate every setting and reconstruct.

    Setting ``k`` draws its noise from ``rng.stream(seed, label, k)``.
    """
    settings = list(settings)
    added: list[str] = []
    if augment:
        settings, added = augment_settings(settings)
    records = [
        simulate_readout(rho, s, sigma, rngmod.stream(seed, label, k) if sigma > 0 else None)
        for k, s in enumerate(settings)
    ]
    return TomographyRun(records, reconstruct_linear_inversion(records), settings, added)


def scheme_settings(scheme: str) -> tuple[list[DetectionSetting], Optional[list[int]]]:
    """Settings and kept qubits for ``3q``, ``2q-AB`` or ``2q-BC``."""
    s = scheme.lower()
    if s == "3q":
        return detection_settings_3q(), None
    if s == "2q-ab":
        return detection_settings_2q("AB"), [1, 2]
    if s == "2q-bc":
        return detection_settings_2q("BC"), [2, 3]
    raise ValueError(f"unknown tomography scheme {scheme!r}")
