"""Jones calculus, the Sagnac dual-rail storage channel, and process tomography.

Conventions
-----------
Jones vectors are ``(c_H, c_V)``. ``D = (H+V)/sqrt2``, ``A = (H-V)/sqrt2``,
``R = (H-iV)/sqrt2``, ``L = (H+iV)/sqrt2``. Waveplate angles are measured
from the horizontal axis; a plate with fast axis at ``theta`` is
``rot(theta) @ diag(1, exp(-i*delta)) @ rot(-theta)``. With this choice a
quarter-wave plate at 45 degrees maps ``H -> L`` and ``V -> iR`` with a common
phase, which is the transformation used by the OAM interference setup. For a
half-wave plate, measuring from the vertical axis only changes the global phase.

Process matrices use the operator basis ``(I, X, Y, Z)`` with
``E(rho) = sum_mn chi[m, n] B_m rho B_n^dagger``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .errors import IllConditionedReconstruction, InvalidArgument
from .streams import derive_seeds, make_rng

SQRT1_2 = 1.0 / math.sqrt(2.0)

STATES = {
    "H": (1.0, 0.0),
    "V": (0.0, 1.0),
    "D": (SQRT1_2, SQRT1_2),
    "A": (SQRT1_2, -SQRT1_2),
    "R": (SQRT1_2, -1j * SQRT1_2),
    "L": (SQRT1_2, 1j * SQRT1_2),
}
TOMOGRAPHY_INPUTS = ("H", "V", "D", "R")
ANALYZERS = ("H", "V", "D", "A", "R", "L")

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_BASIS = (I2, PAULI_X, PAULI_Y, PAULI_Z)
BASIS_LABELS = ("I", "X", "Y", "Z")


@dataclass(frozen=True)
class PolarizationState:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(2)
        n = np.vdot(a, a).real
        if abs(n - 1.0) > 1e-10:
            raise InvalidArgument(f"Jones vector must be normalized (norm^2 = {n})")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, amplitudes) -> "PolarizationState":
        a = np.asarray(amplitudes, dtype=complex).reshape(2)
        return cls(a / np.linalg.norm(a))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


class DensityMatrix(np.ndarray):
    """2x2 Hermitian, unit-trace, positive semidefinite ndarray."""

    def __new__(cls, rho):
        arr = np.asarray(rho, dtype=complex).reshape(2, 2).view(cls)
        check_density_matrix(arr)
        return arr


def check_density_matrix(rho, tol: float = 1e-10) -> None:
    rho = np.asarray(rho)
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidArgument("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise InvalidArgument(f"density matrix trace {np.trace(rho).real} != 1")
    if np.min(np.linalg.eigvalsh(rho)) < -1e-8:
        raise InvalidArgument("density matrix has a negative eigenvalue")


@dataclass(frozen=True)
class ProcessMatrix:
    chi: np.ndarray

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=complex).reshape(4, 4)
        if np.max(np.abs(chi - chi.conj().T)) > 1e-8:
            raise InvalidArgument("process matrix is not Hermitian")
        object.__setattr__(self, "chi", chi)

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        out = np.zeros((2, 2), dtype=complex)
        for m, bm in enumerate(PAULI_BASIS):
            for n, bn in enumerate(PAULI_BASIS):
                out += self.chi[m, n] * bm @ rho @ bn.conj().T
        return out

    def trace_preservation_residual(self) -> float:
        acc = np.zeros((2, 2), dtype=complex)
        for m, bm in enumerate(PAULI_BASIS):
            for n, bn in enumerate(PAULI_BASIS):
                acc += self.chi[m, n] * bn.conj().T @ bm
        return float(np.linalg.norm(acc - I2))

    def to_json(self) -> str:
        return json.dumps({
            "basis": list(BASIS_LABELS),
            "real": self.chi.real.round(12).tolist(),
            "imag": self.chi.imag.round(12).tolist(),
            "trace_preservation_residual": self.trace_preservation_residual(),
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ProcessMatrix":
        d = json.loads(text)
        return cls(np.array(d["real"]) + 1j * np.array(d["imag"]))


@dataclass(frozen=True)
class ChannelParams:
    loss: float = 0.925
    phase_noise_sigma: float = 0.30   # rad, relative phase jitter between the two rails
    depolarization: float = 0.06

    def __post_init__(self):
        if not 0 <= self.loss <= 1 or not 0 <= self.depolarization <= 1:
            raise InvalidArgument("loss and depolarization must lie in [0, 1]")
        if self.phase_noise_sigma < 0:
            raise InvalidArgument("phase_noise_sigma must be >= 0")

    @property
    def coherence(self) -> float:
        """Factor multiplying the H/V coherence of any input."""
        return (1.0 - self.depolarization) * math.exp(-self.phase_noise_sigma ** 2 / 2.0)


class StoredState(NamedTuple):
    rho: np.ndarray
    success_probability: float


# ---------------------------------------------------------------------------
# states and plates

def prepare_state(label: str) -> PolarizationState:
    try:
        return PolarizationState(np.array(STATES[label], dtype=complex))
    except KeyError:
        raise InvalidArgument(f"unknown polarization label {label!r}; "
                              f"expected one of {', '.join(STATES)}") from None


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def waveplate(theta: float, retardance: float) -> np.ndarray:
    """Linear retarder with fast axis at ``theta`` from horizontal."""
    core = np.diag([1.0, np.exp(-1j * retardance)])
    return _rot(theta) @ core @ _rot(-theta)


def hwp(theta: float) -> np.ndarray:
    return waveplate(theta, math.pi)


def qwp(theta: float) -> np.ndarray:
    return waveplate(theta, math.pi / 2.0)


def equal_up_to_phase(a, b, tol: float = 1e-10) -> bool:
    """True if ``a = exp(i phi) b`` for some global phase."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    k = int(np.argmax(np.abs(b)))
    if abs(b[k]) < tol:
        return bool(np.max(np.abs(a)) < tol)
    phase = a[k] / b[k]
    if abs(abs(phase) - 1.0) > tol:
        return False
    return bool(np.max(np.abs(a - phase * b)) < tol)


# ---------------------------------------------------------------------------
# channel and measurement

def sagnac_store(state: PolarizationState, ch: ChannelParams, seed: int = 0,
                 samples: int | None = None) -> StoredState:
    """Store a polarization qubit in the two counter-propagating rails.

    The relative rail phase is Gaussian with width ``phase_noise_sigma``,
    which damps the H/V coherence by ``exp(-sigma**2 / 2)``; a depolarizing
    admixture follows. Loss is post-selected out and reported as the success
    probability. With ``samples`` the phase average is done by Monte Carlo.
    """
    psi = state.amplitudes
    rho = np.outer(psi, psi.conj())
    if samples is None:
        damp = math.exp(-ch.phase_noise_sigma ** 2 / 2.0)
        rho_p = rho.copy()
        rho_p[0, 1] *= damp
        rho_p[1, 0] *= damp
    else:
        rng = make_rng(seed)
        phi = rng.normal(0.0, ch.phase_noise_sigma, int(samples))
        mean_phase = np.mean(np.exp(-1j * phi))
        rho_p = rho.copy()
        rho_p[0, 1] *= mean_phase
        rho_p[1, 0] *= np.conj(mean_phase)
    out = (1.0 - ch.depolarization) * rho_p + ch.depolarization * I2 / 2.0
    return StoredState(DensityMatrix(out), 1.0 - ch.loss)


def born_probability(rho, analyzer: PolarizationState) -> float:
    a = analyzer.amplitudes
    p = float(np.real(np.vdot(a, np.asarray(rho) @ a)))
    return min(max(p, 0.0), 1.0)


def measure_projection(rho, analyzer: PolarizationState, shots: int,
                       seed: int) -> tuple[int, int]:
    """Sample ``shots`` heralded detections behind a projective analyzer."""
    if shots <= 0:
        raise InvalidArgument("shots must be positive")
    rng = make_rng(seed)
    return int(rng.binomial(int(shots), born_probability(rho, analyzer))), int(shots)


def state_fidelity(rho, psi: PolarizationState) -> float:
    return born_probability(rho, psi)


# ---------------------------------------------------------------------------
# reconstruction

def _analyzer_design(analyzers) -> np.ndarray:
    """Rows map a Bloch vector (1, rx, ry, rz) to the click probability."""
    rows = []
    for label in analyzers:
        proj = prepare_state(label).projector()
        rows.append([0.5 * np.trace(proj @ B).real for B in PAULI_BASIS])
    return np.array(rows)


def reconstruct_state(frequencies: Mapping[str, float]) -> np.ndarray:
    """Least-squares single-qubit state from analyzer click frequencies.

    The estimate is clipped to the Bloch ball (eigenvalues >= 0, trace 1).
    """
    labels = [k for k in ANALYZERS if k in frequencies]
    design = _analyzer_design(labels)
    if np.linalg.matrix_rank(design[:, 1:]) < 3:
        raise IllConditionedReconstruction(f"analyzers {labels} do not span the Bloch sphere")
    p = np.array([float(frequencies[k]) for k in labels])
    bloch, *_ = np.linalg.lstsq(design[:, 1:], p - design[:, 0], rcond=None)
    rho = 0.5 * (I2 + sum(r * B for r, B in zip(bloch, PAULI_BASIS[1:])))
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    rho = (v * w) @ v.conj().T
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def _basis_superoperators() -> np.ndarray:
    """16x16 matrix whose column (m,n) is vec(B_m . B_n^dagger) as a superoperator."""
    cols = []
    for bm in PAULI_BASIS:
        for bn in PAULI_BASIS:
            cols.append(np.kron(bn.conj(), bm).ravel(order="F"))
    return np.array(cols).T


def process_from_outputs(inputs: Mapping[str, np.ndarray], outputs: Mapping[str, np.ndarray]) -> ProcessMatrix:
    """Linear inversion of chi from input and output density matrices.

    The channel is extended linearly from the given inputs to the full
    operator space; the inputs must span it.
    """
    labels = list(inputs)
    # column-stacked vec of every input density matrix
    vin = np.array([np.asarray(inputs[k]).ravel(order="F") for k in labels]).T
    vout = np.array([np.asarray(outputs[k]).ravel(order="F") for k in labels]).T
    if vin.shape[1] < 4 or np.linalg.matrix_rank(vin, tol=1e-9) < 4:
        raise IllConditionedReconstruction(f"input states {labels} do not span the operator space")
    cond = np.linalg.cond(vin)
    if not math.isfinite(cond) or cond > 1e8:
        raise IllConditionedReconstruction(f"input states are ill-conditioned (cond={cond:.3g})")
    # superoperator S with S vin = vout
    S = vout @ np.linalg.pinv(vin)
    chi_vec = np.linalg.solve(_basis_superoperators(), S.ravel(order="F"))
    chi = chi_vec.reshape(4, 4)
    return ProcessMatrix(0.5 * (chi + chi.conj().T))


def reconstruct_process(data: Mapping[str, Mapping[str, float]]) -> ProcessMatrix:
    """Process matrix from measured frequencies.

    ``data[input][analyzer]`` is the fraction of heralded clicks for that
    input state and analyzer; inputs default to ``H, V, D, R`` and analyzers
    to the six cardinal projectors.
    """
    for inp, freqs in data.items():
        for an, f in freqs.items():
            if not (0.0 <= float(f) <= 1.0) or math.isnan(float(f)):
                raise InvalidArgument(f"frequency {inp}/{an} = {f} outside [0, 1]")
    inputs = {k: prepare_state(k).projector() for k in data}
    outputs = {k: reconstruct_state(v) for k, v in data.items()}
    return process_from_outputs(inputs, outputs)


def chi_from_kraus(kraus) -> ProcessMatrix:
    """chi of a channel given in operator-sum form."""
    chi = np.zeros((4, 4), dtype=complex)
    for K in kraus:
        coeffs = np.array([0.5 * np.trace(B.conj().T @ K) for B in PAULI_BASIS])
        chi += np.outer(coeffs, coeffs.conj())
    return ProcessMatrix(chi)


# ---------------------------------------------------------------------------
# experiment helpers and I/O

def simulate_tomography(ch: ChannelParams, shots: int, seed: int,
                        inputs=TOMOGRAPHY_INPUTS, analyzers=ANALYZERS) -> dict:
    """Clicks for every (input, analyzer) setting through the Sagnac channel.

    Returns ``{input: {analyzer: (clicks, shots)}}``; each setting draws from
    its own derived seed.
    """
    seeds = iter(derive_seeds(seed, len(inputs) * len(analyzers)))
    out = {}
    for inp in inputs:
        rho = sagnac_store(prepare_state(inp), ch).rho
        out[inp] = {an: measure_projection(rho, prepare_state(an), shots, next(seeds))
                    for an in analyzers}
    return out


def frequencies(counts: Mapping[str, Mapping[str, tuple[int, int]]]) -> dict:
    return {inp: {an: c / n for an, (c, n) in row.items()} for inp, row in counts.items()}


def tomography_fidelities(counts) -> dict:
    """Fidelity of each reconstructed output with its input state."""
    freqs = frequencies(counts)
    return {inp: state_fidelity(reconstruct_state(f), prepare_state(inp)) for inp, f in freqs.items()}


def write_counts_json(counts, path) -> None:
    payload = {inp: {an: {"clicks": c, "shots": n} for an, (c, n) in row.items()}
               for inp, row in counts.items()}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_counts_json(path) -> dict:
    with open(path) as fh:
        payload = json.load(fh)
    return {inp: {an: (int(v["clicks"]), int(v["shots"])) for an, v in row.items()}
            for inp, row in payload.items()}
