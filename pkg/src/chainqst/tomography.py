"""Readout error model, Bayes-rule correction, and single-qubit state/process tomography.

Conventions: populations are ordered (P_g, P_e); Bloch vectors use
z = P_g - P_e; the process matrix is expressed in the operator basis
{I, X, Y, Z} with E(rho) = sum_mn chi_mn P_m rho P_n^dagger.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import NumericalError, ValidationError
from .model.operators import PAULI_BASIS, SIGMA_X, SIGMA_Y, SIGMA_Z

#: the four tomography input states (|g>, |e>, (|g>+|e>)/sqrt2, (|g>-i|e>)/sqrt2)
INPUT_STATES = (
    np.array([1, 0], complex),
    np.array([0, 1], complex),
    np.array([1, 1], complex) / np.sqrt(2),
    np.array([1, -1j], complex) / np.sqrt(2),
)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Column-stochastic readout matrix [[F_g, 1-F_e], [1-F_g, F_e]]."""

    fid_g: float
    fid_e: float

    def __post_init__(self):
        for name in ("fid_g", "fid_e"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{v} not in [0, 1]", name)
        if self.fid_g + self.fid_e - 1.0 <= 0:
            raise ValidationError("confusion matrix not invertible (F_g + F_e <= 1)", "fid_e")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fid_g, 1.0 - self.fid_e], [1.0 - self.fid_g, self.fid_e]])

    @property
    def determinant(self) -> float:
        return self.fid_g + self.fid_e - 1.0

    @classmethod
    def from_qubit(cls, qubit) -> "ConfusionMatrix":
        return cls(qubit.readout_fid_g, qubit.readout_fid_e)

    @classmethod
    def ideal(cls) -> "ConfusionMatrix":
        return cls(1.0, 1.0)


def _as_confusion(c) -> np.ndarray:
    if isinstance(c, ConfusionMatrix):
        return c.matrix
    m = np.asarray(c, dtype=float)
    if m.shape != (2, 2):
        raise ValidationError(f"confusion matrix must be 2x2, got {m.shape}", "confusion")
    return m


def _check_probs(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise ValidationError(f"invalid probability vector {p}", "populations")
    return np.clip(p, 0.0, 1.0)


def _seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def sample_readout(populations, confusion, shots: int, seed) -> np.ndarray:
    """Counts (n_g, n_e) of ``shots`` single-shot readouts."""
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}", "shots")
    p = _check_probs(populations)
    q = _as_confusion(confusion) @ p
    q = np.clip(q, 0.0, None)
    rng = np.random.default_rng(seed)
    return rng.multinomial(shots, q / q.sum())


def correct_readout(measured, confusion, clamp: bool = False) -> np.ndarray:
    """P_f = F^-1 P_m. With ``clamp`` the result is projected onto the simplex."""
    m = _as_confusion(confusion)
    det = np.linalg.det(m)
    if abs(det) < 1e-12:
        raise NumericalError("singular confusion matrix")
    pf = np.linalg.solve(m, np.asarray(measured, dtype=float))
    if clamp:
        pf = np.clip(pf, 0.0, None)
        s = pf.sum()
        pf = pf / s if s > 0 else np.array([0.5, 0.5])
    return pf


def corrected_sigma(true_populations, confusion, shots: int) -> float:
    """Binomial standard error of the corrected P_e estimate."""
    m = _as_confusion(confusion)
    q = (m @ _check_probs(true_populations))[1]
    return float(np.sqrt(q * (1 - q) / shots) / abs(np.linalg.det(m)))


# ---------------------------------------------------------------- state tomography

def bloch_vector(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.real([np.trace(rho @ s) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)])


def density_from_bloch(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 0.5 * (np.eye(2) + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)


@dataclass(frozen=True)
class StateEstimate:
    bloch: np.ndarray
    bloch_physical: np.ndarray

    @property
    def rho(self) -> np.ndarray:
        return density_from_bloch(self.bloch)

    @property
    def rho_physical(self) -> np.ndarray:
        return density_from_bloch(self.bloch_physical)


def _physical(r: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(r)
    return r / nrm if nrm > 1.0 else r.copy()


def state_tomography(data) -> StateEstimate:
    """Estimate a single-qubit state.

    ``data`` is either a 2x2 density matrix (exact path) or a mapping from
    basis name ("x", "y", "z") to corrected populations (P_+, P_-) of that
    basis, where "+" is the eigenvalue +1 outcome (|g> for z).
    """
    if isinstance(data, Mapping):
        missing = [b for b in "xyz" if b not in data]
        if missing:
            raise ValidationError(f"missing basis {missing}", "data")
        r = np.array([float(data[b][0] - data[b][1]) for b in "xyz"])
    else:
        rho = np.asarray(data, dtype=complex)
        if rho.shape != (2, 2):
            raise ValidationError(f"expected a 2x2 density matrix, got shape {rho.shape}", "data")
        r = bloch_vector(rho)
    return StateEstimate(r, _physical(r))


def basis_probabilities(rho: np.ndarray, basis: str) -> np.ndarray:
    """(P_+, P_-) of measuring sigma_basis on rho."""
    s = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}[basis]
    e = float(np.real(np.trace(rho @ s)))
    p = np.array([(1 + e) / 2, (1 - e) / 2])
    return np.clip(p, 0.0, 1.0) / np.clip(p, 0.0, 1.0).sum()


def measure_state(rho: np.ndarray, confusion, shots: int, seed, clamp: bool = False) -> dict:
    """Simulated pre-rotated readout of x, y, z with Bayes correction.

    The rotation maps the +1 eigenstate of each basis onto |g>, so the same
    confusion matrix applies to every basis. Seeds for the three bases are
    spawned from ``seed``.
    """
    seeds = _seed_sequence(seed).spawn(3)
    out = {}
    for b, ss in zip("xyz", seeds):
        counts = sample_readout(basis_probabilities(rho, b), confusion, shots, ss)
        out[b] = correct_readout(counts / shots, confusion, clamp=clamp)
    return out


# -------------------------------------------------------------- process tomography

def _vec(m):
    return np.asarray(m, dtype=complex).reshape(-1)


def _chi_basis_matrix() -> np.ndarray:
    # column (m, n) holds vec(P_m X P_n^dag) as a linear map on vec(X), row-major
    cols = []
    for pm in PAULI_BASIS:
        for pn in PAULI_BASIS:
            cols.append(_vec(np.kron(pm, pn.conj())))
    return np.array(cols).T


_CHI_B = _chi_basis_matrix()


def superoperator_from_pairs(inputs: Sequence[np.ndarray], outputs: Sequence[np.ndarray]) -> np.ndarray:
    """Row-major superoperator S with vec(E(rho)) = S vec(rho)."""
    if len(inputs) != 4 or len(outputs) != 4:
        raise ValidationError("process tomography needs exactly four input/output pairs", "pairs")
    rin = np.array([_vec(r) for r in inputs]).T
    rout = np.array([_vec(r) for r in outputs]).T
    if np.linalg.matrix_rank(rin, tol=1e-9) < 4:
        raise NumericalError("input states are not linearly independent")
    return rout @ np.linalg.inv(rin)


def chi_from_superoperator(s: np.ndarray) -> np.ndarray:
    chi = np.linalg.solve(_CHI_B, _vec(s)).reshape(4, 4)
    return 0.5 * (chi + chi.conj().T)


def superoperator_from_chi(chi: np.ndarray) -> np.ndarray:
    return (_CHI_B @ _vec(chi)).reshape(4, 4)


def apply_chi(chi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    out = np.zeros((2, 2), complex)
    for m, pm in enumerate(PAULI_BASIS):
        for n, pn in enumerate(PAULI_BASIS):
            out += chi[m, n] * pm @ rho @ pn.conj().T
    return out


def _as_density(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return np.outer(x, x.conj()) if x.ndim == 1 else x


def process_tomography(pairs) -> np.ndarray:
    """chi matrix from four (input, output) pairs.

    Inputs and outputs may be state vectors or density matrices. ``pairs``
    may also be a sequence of four outputs, in which case the standard
    inputs :data:`INPUT_STATES` are assumed.
    """
    pairs = list(pairs)
    if pairs and not isinstance(pairs[0], tuple):
        pairs = list(zip(INPUT_STATES, pairs))
    if len(pairs) != 4:
        raise ValidationError(f"need four input/output pairs, got {len(pairs)}", "pairs")
    ins = [_as_density(a) for a, _ in pairs]
    outs = [_as_density(b) for _, b in pairs]
    return chi_from_superoperator(superoperator_from_pairs(ins, outs))


def chi_of_unitary(u: np.ndarray) -> np.ndarray:
    """chi of rho -> U rho U^dag: outer product of the Pauli coefficients of U."""
    u = np.asarray(u, dtype=complex)
    c = np.array([np.trace(p.conj().T @ u) / 2 for p in PAULI_BASIS])
    return np.outer(c, c.conj())


CHI_IDENTITY = chi_of_unitary(np.eye(2))
CHI_DEPOLARIZING = np.eye(4, dtype=complex) / 4


def process_fidelity(chi_m: np.ndarray, chi_ideal: np.ndarray, clamp: bool = True) -> float:
    """Re tr(chi_m chi_ideal)."""
    a = np.asarray(chi_m, dtype=complex)
    b = np.asarray(chi_ideal, dtype=complex)
    if a.shape != b.shape or a.shape != (4, 4):
        raise ValidationError(f"dimension mismatch {a.shape} vs {b.shape}", "chi")
    for name, c in (("chi_m", a), ("chi_ideal", b)):
        if np.max(np.abs(c - c.conj().T)) > 1e-8:
            raise ValidationError("chi matrix is not Hermitian", name)
    f = float(np.real(np.trace(a @ b)))
    if clamp and (f < -1e-9 or f > 1 + 1e-9):
        f = min(max(f, 0.0), 1.0)
    return f


def rz(phi: float) -> np.ndarray:
    """Virtual z rotation adding phase phi to |e> relative to |g>."""
    return np.diag([1.0, np.exp(1j * phi)])


def chi_to_pairs(chi: np.ndarray) -> list:
    """[[re, im], ...] rows for serialisation."""
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(chi)]


def chi_from_pairs(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def tomography_outputs_sampled(outputs, confusion, shots: int, seed, clamp: bool = False) -> list:
    """Replace exact output states by sampled-and-corrected estimates."""
    seeds = _seed_sequence(seed).spawn(len(outputs))
    est = []
    for rho, ss in zip(outputs, seeds):
        est.append(state_tomography(measure_state(_as_density(rho), confusion, shots, ss, clamp)).rho)
    return est
