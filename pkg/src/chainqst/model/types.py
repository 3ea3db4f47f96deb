"""Domain types shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class QubitParams:
    """Static parameters of one qubit.

    Frequencies in GHz, coherence times in us. ``t1`` and ``t2_star`` are the
    values at the operating point, where transfers run. Sweet-spot coherence
    numbers are kept for the record only.
    """

    sweet_spot_freq: float
    operating_freq: float
    t1: float
    t2_star: float
    readout_fid_g: float = 1.0
    readout_fid_e: float = 1.0
    thermal_pop: float = 0.0
    t1_sweet: Optional[float] = None
    t2_star_sweet: Optional[float] = None
    t2_echo_sweet: Optional[float] = None

    def __post_init__(self):
        self.validate()

    def validate(self, path: str = ""):
        p = f"{path}." if path else ""
        if not self.t1 > 0:
            raise ValidationError("must be > 0", f"{p}t1")
        if not self.t2_star > 0:
            raise ValidationError("must be > 0", f"{p}t2_star")
        if self.t2_star > 2.0 * self.t1 * (1 + 1e-12):
            raise ValidationError(
                f"t2_star={self.t2_star} exceeds 2*t1={2 * self.t1} (negative pure-dephasing rate)",
                f"{p}t2_star",
            )
        for name in ("readout_fid_g", "readout_fid_e"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{v} not in [0, 1]", f"{p}{name}")
        if not 0.0 <= self.thermal_pop <= 0.5:
            raise ValidationError(f"{self.thermal_pop} not in [0, 0.5]", f"{p}thermal_pop")
        if self.sweet_spot_freq <= 0 or self.operating_freq <= 0:
            raise ValidationError("qubit frequencies must be positive", f"{p}operating_freq")

    @property
    def t_phi(self) -> float:
        """Pure-dephasing time (us): 1/t_phi = 1/t2* - 1/(2 t1); inf when t2* = 2 t1."""
        rate = 1.0 / self.t2_star - 0.5 / self.t1
        return np.inf if rate <= 0 else 1.0 / rate


@dataclass(frozen=True)
class ChainConfig:
    """An ordered chain of qubits with static nearest-neighbour couplings (MHz)."""

    qubits: tuple
    static_couplings: tuple

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "static_couplings", tuple(float(g) for g in self.static_couplings))
        if len(self.qubits) < 2:
            raise ValidationError(f"need at least 2 qubits, got {len(self.qubits)}", "qubits")
        for i, q in enumerate(self.qubits):
            if not isinstance(q, QubitParams):
                raise ValidationError("expected QubitParams", f"qubits[{i}]")
        if len(self.static_couplings) != len(self.qubits) - 1:
            raise ValidationError(
                f"expected {len(self.qubits) - 1} couplings for {len(self.qubits)} qubits, "
                f"got {len(self.static_couplings)}",
                "static_couplings",
            )
        for j, g in enumerate(self.static_couplings):
            if not g > 0:
                raise ValidationError(f"coupling must be > 0, got {g}", f"static_couplings[{j}]")

    @property
    def n(self) -> int:
        return len(self.qubits)

    @property
    def operating_freqs(self) -> np.ndarray:
        """Operating frequencies in GHz."""
        return np.array([q.operating_freq for q in self.qubits])

    def detunings_mhz(self) -> np.ndarray:
        """Delta_j = f_o,j - f_o,j-1 in MHz for links j = 1..N-1."""
        return np.diff(self.operating_freqs) * 1e3

    def check_alternating(self):
        """Raise unless sign(Delta_j) = (-1)^(j+1), i.e. +,-,+,... along the chain."""
        for j, d in enumerate(self.detunings_mhz(), start=1):
            want = 1.0 if j % 2 == 1 else -1.0
            if np.sign(d) != want:
                raise ValidationError(
                    f"detuning {d:.4f} MHz has the wrong sign for link {j} "
                    f"(odd links need Delta > 0, even links Delta < 0)",
                    f"qubits[{j}].operating_freq",
                )

    def with_couplings(self, couplings: Sequence[float]) -> "ChainConfig":
        return ChainConfig(self.qubits, tuple(couplings))

    def subchain(self, start: int, stop: int) -> "ChainConfig":
        return ChainConfig(self.qubits[start:stop], self.static_couplings[start : stop - 1])


@dataclass(frozen=True)
class ModulationSpec:
    """Sinusoidal frequency modulation eps*sin(nu*t + phi); eps and nu in MHz."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        for name in ("amplitude", "frequency", "phase"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.frequency > 0:
            raise ValidationError(f"modulation frequency must be > 0, got {self.frequency}", "frequency")
        if self.amplitude < 0:
            raise ValidationError(f"modulation amplitude must be >= 0, got {self.amplitude}", "amplitude")

    @property
    def alpha(self) -> float:
        return self.amplitude / self.frequency


@dataclass(frozen=True)
class TransferSchedule:
    """Modulations of qubits 1..N-1 plus the transfer duration tau (ns).

    ``effective_couplings`` caches g'_j (complex, MHz) as returned by the
    Bessel coupling map; use :func:`chainqst.coupling.make_schedule` to build
    one with a consistent cache.
    """

    modulations: tuple
    duration: float
    effective_couplings: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "modulations", tuple(self.modulations))
        object.__setattr__(self, "effective_couplings", tuple(complex(c) for c in self.effective_couplings))
        if self.duration <= 0:
            raise ValidationError(f"duration must be > 0, got {self.duration}", "duration")
        if self.effective_couplings and len(self.effective_couplings) != len(self.modulations):
            raise ValidationError("effective_couplings length differs from modulations", "effective_couplings")

    @property
    def n(self) -> int:
        return len(self.modulations) + 1

    @property
    def alphas(self) -> np.ndarray:
        return np.array([m.alpha for m in self.modulations])

    @property
    def phases(self) -> np.ndarray:
        return np.array([m.phase for m in self.modulations])

    def check_against(self, chain: ChainConfig, rtol: float = 1e-12):
        """Validate length and the cached couplings against a fresh evaluation."""
        from ..coupling.bessel import effective_couplings

        if len(self.modulations) != chain.n - 1:
            raise ValidationError(
                f"schedule has {len(self.modulations)} modulations, chain needs {chain.n - 1}",
                "modulations",
            )
        if self.effective_couplings:
            fresh = effective_couplings(chain.static_couplings, self.alphas, self.phases)
            cached = np.array(self.effective_couplings)
            scale = np.maximum(np.abs(fresh), 1e-300)
            if np.any(np.abs(np.abs(fresh) - np.abs(cached)) > rtol * scale + 1e-300):
                raise ValidationError("cached effective couplings are stale", "effective_couplings")

    def replace(self, **changes) -> "TransferSchedule":
        kw = dict(modulations=self.modulations, duration=self.duration, effective_couplings=())
        kw.update(changes)
        return TransferSchedule(**kw)


FULL = "full"
SECTOR = "sector"


@dataclass(frozen=True)
class QuantumState:
    """Pure (vector) or mixed (matrix) state of an N-qubit chain.

    ``representation`` is ``"full"`` (dimension 2^N, qubit 0 is the most
    significant bit, bit value 1 = excited) or ``"sector"`` (dimension N+1:
    index 0 is the all-ground vacuum, index k+1 has the single excitation on
    qubit k).
    """

    representation: str
    data: np.ndarray
    n_qubits: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "data", data)
        if self.representation not in (FULL, SECTOR):
            raise ValidationError(f"unknown representation {self.representation!r}", "representation")
        dim = 2**self.n_qubits if self.representation == FULL else self.n_qubits + 1
        if data.ndim not in (1, 2) or data.shape[0] != dim or (data.ndim == 2 and data.shape[1] != dim):
            raise ValidationError(f"data shape {data.shape} incompatible with dimension {dim}", "data")

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def validate(self, tol: float = 1e-9):
        if self.is_pure:
            nrm = np.linalg.norm(self.data)
            if abs(nrm - 1.0) > tol:
                raise ValidationError(f"state norm {nrm} differs from 1", "data")
        else:
            rho = self.data
            if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
                raise ValidationError("density matrix is not Hermitian", "data")
            tr = np.trace(rho).real
            if abs(tr - 1.0) > tol:
                raise ValidationError(f"trace {tr} differs from 1", "data")
            lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
            if lam < -tol:
                raise ValidationError(f"negative eigenvalue {lam}", "data")
        return self

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def to_density(self) -> "QuantumState":
        return QuantumState(self.representation, self.density(), self.n_qubits)

    def to_full(self) -> "QuantumState":
        if self.representation == FULL:
            return self
        idx = sector_indices(self.n_qubits)
        d = 2**self.n_qubits
        if self.is_pure:
            out = np.zeros(d, complex)
            out[idx] = self.data
        else:
            out = np.zeros((d, d), complex)
            out[np.ix_(idx, idx)] = self.data
        return QuantumState(FULL, out, self.n_qubits)

    def norm_or_trace(self) -> float:
        if self.is_pure:
            return float(np.linalg.norm(self.data))
        return float(np.trace(self.data).real)

    def populations(self) -> np.ndarray:
        """Excited-state probability of each qubit."""
        return excited_populations(self.data, self.representation, self.n_qubits)

    def reduced(self, qubit: int) -> np.ndarray:
        """2x2 reduced density matrix of one qubit, basis (|g>, |e>)."""
        return reduced_qubit(self.to_full().data, qubit, self.n_qubits)


def sector_indices(n: int) -> np.ndarray:
    """Full-space indices of the vacuum and single-excitation states."""
    return np.array([0] + [1 << (n - 1 - k) for k in range(n)])


def excited_masks(n: int) -> np.ndarray:
    """(n, 2^n) boolean table: whether qubit k is excited in basis state i."""
    i = np.arange(2**n)
    return np.array([(i >> (n - 1 - k)) & 1 for k in range(n)], dtype=bool)


def excited_populations(data: np.ndarray, representation: str, n: int) -> np.ndarray:
    probs = np.abs(data) ** 2 if data.ndim == 1 else np.real(np.diagonal(data))
    if representation == SECTOR:
        return np.asarray(probs[1:], dtype=float)
    return excited_masks(n) @ probs


def reduced_qubit(full: np.ndarray, qubit: int, n: int) -> np.ndarray:
    shape = (2**qubit, 2, 2 ** (n - qubit - 1))
    if full.ndim == 1:
        psi = full.reshape(shape)
        return np.einsum("aib,ajb->ij", psi, psi.conj())
    rho = full.reshape(shape + shape)
    return np.einsum("aibajb->ij", rho)


def single_qubit_state(alpha: complex, beta: complex) -> np.ndarray:
    """Normalised alpha|g> + beta|e>."""
    v = np.array([alpha, beta], dtype=complex)
    return v / np.linalg.norm(v)


def product_state(n: int, site_states: dict, representation: str = FULL) -> QuantumState:
    """Product state with given single-qubit vectors on some sites, |g> elsewhere.

    In the sector representation at most one site may carry an excited
    component.
    """
    if representation == SECTOR:
        if len(site_states) > 1:
            raise ValidationError("sector states support at most one non-ground site", "initial")
        v = np.zeros(n + 1, complex)
        if not site_states:
            v[0] = 1.0
        else:
            (k, s), = site_states.items()
            v[0], v[k + 1] = s[0], s[1]
        return QuantumState(SECTOR, v, n)
    v = np.array([1.0 + 0j])
    for k in range(n):
        v = np.kron(v, site_states.get(k, np.array([1.0, 0.0], complex)))
    return QuantumState(FULL, v, n)
