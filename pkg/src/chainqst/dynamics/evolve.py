"""Closed- and open-system time evolution of the chain."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import expm

from ..errors import NumericalError, ValidationError
from ..model import operators as ops
from ..model.hamiltonian import (
    ROTATING,
    TimeDependentOperator,
    build_effective_hamiltonian,
    lab_terms,
)
from ..model.types import FULL, SECTOR, ChainConfig, QuantumState, TransferSchedule
from ..units import US
from .kernel import SparseGenerator

#: max ||H|| * dt (plus the fastest explicit harmonic) per RK4 step
STEP_FACTOR = 0.05
MAX_TOTAL_STEPS = 500_000_000


@dataclass(frozen=True)
class NoiseModel:
    """Per-qubit Markovian noise: t1 and pure-dephasing t_phi in us, thermal population."""

    t1: tuple
    t_phi: tuple
    thermal: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "t1", tuple(float(x) for x in self.t1))
        object.__setattr__(self, "t_phi", tuple(float(x) for x in self.t_phi))
        object.__setattr__(self, "thermal", tuple(float(x) for x in self.thermal))
        if len(self.t1) != len(self.t_phi):
            raise ValidationError("t1 and t_phi lists differ in length", "noise")
        if self.thermal and len(self.thermal) != len(self.t1):
            raise ValidationError("thermal list length differs from t1", "noise.thermal")
        for k, (a, b) in enumerate(zip(self.t1, self.t_phi)):
            if not a > 0:
                raise ValidationError(f"t1 must be > 0, got {a}", f"noise.t1[{k}]")
            if not b > 0:
                raise ValidationError(
                    f"t_phi must be > 0, got {b} (t2_star > 2 t1 is unphysical)", f"noise.t_phi[{k}]"
                )
        for k, p in enumerate(self.thermal):
            if not 0 <= p < 1:
                raise ValidationError(f"thermal population {p} not in [0, 1)", f"noise.thermal[{k}]")

    @classmethod
    def from_pairs(cls, pairs, thermal=()):
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs], thermal)

    @classmethod
    def from_t2(cls, t1, t2_star, thermal=()):
        """Build from t1 and t2* via 1/t_phi = 1/t2* - 1/(2 t1)."""
        t_phi = []
        for k, (a, b) in enumerate(zip(t1, t2_star)):
            rate = 1.0 / b - 0.5 / a
            if rate < -1e-15:
                raise ValidationError(
                    f"t2_star={b} > 2*t1={2 * a} gives a negative dephasing rate", f"noise.t2_star[{k}]"
                )
            t_phi.append(math.inf if rate <= 0 else 1.0 / rate)
        return cls(t1, t_phi, thermal)

    @property
    def n(self) -> int:
        return len(self.t1)

    def collapse_operators(self) -> list:
        """Jump operators (full space, rates in 1/ns folded in)."""
        n = self.n
        out = []
        for k in range(n):
            g1 = 1.0 / (self.t1[k] * US)
            out.append(math.sqrt(g1) * ops.embed(ops.LOWER, k, n))
            if math.isfinite(self.t_phi[k]):
                out.append(math.sqrt(0.5 / (self.t_phi[k] * US)) * ops.embed(ops.SIGMA_Z, k, n))
            p = self.thermal[k] if self.thermal else 0.0
            if p > 0:
                out.append(math.sqrt(g1 * p / (1.0 - p)) * ops.embed(ops.RAISE, k, n))
        return out


def noise_from_chain(chain: ChainConfig, t2_star: Optional[float] = None, thermal: bool = False) -> NoiseModel:
    """Noise at the operating point; ``t2_star`` overrides every qubit's t2*."""
    t1 = [q.t1 for q in chain.qubits]
    t2 = [q.t2_star if t2_star is None else t2_star for q in chain.qubits]
    th = [q.thermal_pop for q in chain.qubits] if thermal else []
    return NoiseModel.from_t2(t1, t2, th)


LAB_SOURCE = "lab"
EFFECTIVE_SOURCE = "effective"
EXPLICIT_SOURCE = "explicit"


@dataclass
class EvolutionRequest:
    """What to evolve, from where, and on which time grid (ns)."""

    source: str
    initial: QuantumState
    times: Sequence[float]
    chain: Optional[ChainConfig] = None
    schedule: Optional[TransferSchedule] = None
    operator: Union[np.ndarray, TimeDependentOperator, None] = None
    noise: Union[NoiseModel, Sequence, None] = None
    frame: str = ROTATING
    counter_rotating: bool = True
    max_step: Optional[float] = None
    resonance_tol_mhz: float = 1e-3

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValidationError("time grid must be a non-empty 1-D list", "times")
        if t[0] != 0.0:
            raise ValidationError(f"time grid must start at 0, starts at {t[0]}", "times")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("time grid must be strictly increasing", "times")
        self.times = t
        if self.source not in (LAB_SOURCE, EFFECTIVE_SOURCE, EXPLICIT_SOURCE):
            raise ValidationError(f"unknown hamiltonian source {self.source!r}", "source")
        if self.source in (LAB_SOURCE, EFFECTIVE_SOURCE) and (self.chain is None or self.schedule is None):
            raise ValidationError(f"{self.source} source needs chain and schedule", "source")
        if self.source == EXPLICIT_SOURCE and self.operator is None:
            raise ValidationError("explicit source needs an operator", "operator")
        if self.noise is not None and not isinstance(self.noise, NoiseModel):
            self.noise = NoiseModel.from_pairs(self.noise)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    populations: np.ndarray
    norm_or_trace: np.ndarray = field(default=None)

    @property
    def final(self) -> QuantumState:
        return self.states[-1]

    def drift(self) -> float:
        return float(np.max(np.abs(self.norm_or_trace - 1.0)))

    def min_eigenvalue(self) -> float:
        vals = [np.linalg.eigvalsh(0.5 * (s.data + s.data.conj().T)).min() for s in self.states if not s.is_pure]
        return float(min(vals)) if vals else 0.0

    def columns(self) -> list:
        n = self.populations.shape[1]
        return ["time_ns"] + [f"p_e_q{k}" for k in range(n)] + ["norm_or_trace"]

    def rows(self):
        for t, p, s in zip(self.times, self.populations, self.norm_or_trace):
            yield [float(t)] + [float(x) for x in p] + [float(s)]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns())
            for r in self.rows():
                w.writerow([repr(x) for x in r])


def _make_trajectory(times, data, representation, n) -> Trajectory:
    states = [QuantumState(representation, d, n) for d in data]
    pops = np.array([s.populations() for s in states])
    nt = np.array([s.norm_or_trace() for s in states])
    return Trajectory(np.asarray(times, float), states, pops, nt)


def _resolve_hamiltonian(req: EvolutionRequest, representation: str) -> TimeDependentOperator:
    if req.source == LAB_SOURCE:
        if representation != FULL:
            raise ValidationError("lab-frame evolution needs a full-space state", "initial")
        return lab_terms(req.chain, req.schedule, req.frame, req.counter_rotating)
    if req.source == EFFECTIVE_SOURCE:
        h = build_effective_hamiltonian(req.chain, req.schedule, representation, req.resonance_tol_mhz)
        return TimeDependentOperator(h)
    op = req.operator
    if isinstance(op, TimeDependentOperator):
        return op
    return TimeDependentOperator(np.asarray(op, dtype=complex))


def _substeps(times, rate, max_step, factor=STEP_FACTOR):
    dts = np.diff(times)
    if rate <= 0 and max_step is None:
        return np.ones(dts.size, dtype=np.int64)
    if not math.isfinite(rate):
        raise NumericalError("step-size underflow: non-finite generator norm")
    h = factor / rate if rate > 0 else math.inf
    if max_step is not None:
        h = min(h, max_step)
    steps = np.ceil(dts / h - 1e-9).astype(np.int64)
    steps = np.maximum(steps, 1)
    if steps.sum() > MAX_TOTAL_STEPS or h < 1e-12:
        raise NumericalError(
            f"step-size underflow: {steps.sum()} RK4 steps of {h:.3g} ns needed (rate {rate:.3g} rad/ns)"
        )
    return steps


def evolve_unitary(req: EvolutionRequest) -> Trajectory:
    """Schroedinger evolution with fixed-step RK4."""
    if req.noise is not None:
        raise ValidationError("noise given: use evolve_lindblad", "noise")
    state = req.initial
    if req.source == LAB_SOURCE:
        state = state.to_full()
    if not state.is_pure:
        raise ValidationError("evolve_unitary needs a pure initial state", "initial")
    h = _resolve_hamiltonian(req, state.representation)
    if h.dim != state.dim:
        raise ValidationError(f"operator dimension {h.dim} != state dimension {state.dim}", "operator")
    terms = [(-1j * h.static, 1.0, 0.0, 0.0)] + [(-1j * d.op, d.amp, d.freq, d.phase) for d in h.drives]
    rate = h.norm_bound() + h.max_frequency()
    steps = _substeps(req.times, rate, req.max_step)
    data = SparseGenerator(terms, h.dim).integrate(state.data, req.times, steps)
    return _make_trajectory(req.times, data, state.representation, state.n_qubits)


def _check_hermitian(h):
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"operator must be square, got shape {h.shape}", "H")
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > 1e-12 * scale:
        raise ValidationError("operator is not Hermitian", "H")
    return h


def evolve_exact(h, psi0, t: float):
    """exp(-i H t) applied to a vector, density matrix or QuantumState."""
    h = _check_hermitian(h)
    lam, v = np.linalg.eigh(h)
    u = (v * np.exp(-1j * lam * t)) @ v.conj().T
    data = psi0.data if isinstance(psi0, QuantumState) else np.asarray(psi0, dtype=complex)
    out = u @ data if data.ndim == 1 else u @ data @ u.conj().T
    if isinstance(psi0, QuantumState):
        return QuantumState(psi0.representation, out, psi0.n_qubits)
    return out


def propagator_exact(h, t: float) -> np.ndarray:
    h = _check_hermitian(h)
    lam, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * lam * t)) @ v.conj().T


def _commutator_super(a):
    i = np.eye(a.shape[0])
    return -1j * (np.kron(a, i) - np.kron(i, a.T))


def _dissipator_super(ls):
    d = ls[0].shape[0] if ls else 0
    out = np.zeros((d * d, d * d), complex)
    i = np.eye(d)
    for l in ls:
        ld = l.conj().T @ l
        out += np.kron(l, l.conj()) - 0.5 * np.kron(ld, i) - 0.5 * np.kron(i, ld.T)
    return out


def liouvillian(h: np.ndarray, collapse: Sequence[np.ndarray]) -> np.ndarray:
    """Row-major vectorised Lindblad generator: d vec(rho)/dt = L vec(rho)."""
    sup = _commutator_super(h)
    if collapse:
        sup = sup + _dissipator_super(list(collapse))
    return sup


def evolve_lindblad(req: EvolutionRequest) -> Trajectory:
    """Lindblad master equation in the full 2^N space.

    Constant generators are propagated exactly with a matrix exponential per
    distinct sample spacing; time-dependent ones use the RK4 kernel.
    """
    if req.noise is None:
        raise ValidationError("evolve_lindblad needs a noise model", "noise")
    state = req.initial.to_full().to_density()
    n = state.n_qubits
    if req.noise.n != n:
        raise ValidationError(f"noise model covers {req.noise.n} qubits, chain has {n}", "noise")
    h = _resolve_hamiltonian(req, FULL)
    collapse = req.noise.collapse_operators()
    d = h.dim
    rho0 = state.data.reshape(-1)

    if h.is_constant:
        gen = liouvillian(h.static, collapse)
        cache = {}
        out = [rho0]
        v = rho0
        for dt in np.diff(req.times):
            key = round(float(dt), 12)
            if key not in cache:
                cache[key] = expm(gen * dt)
            v = cache[key] @ v
            out.append(v)
        data = [x.reshape(d, d) for x in out]
    else:
        static = liouvillian(h.static, collapse)
        terms = [(static, 1.0, 0.0, 0.0)] + [
            (_commutator_super(dr.op), dr.amp, dr.freq, dr.phase) for dr in h.drives
        ]
        diss = sum(np.linalg.norm(c, 2) ** 2 for c in collapse)
        rate = 2.0 * h.norm_bound() + 2.0 * diss + h.max_frequency()
        steps = _substeps(req.times, rate, req.max_step)
        flat = SparseGenerator(terms, d * d).integrate(rho0, req.times, steps)
        data = [x.reshape(d, d) for x in flat]
    return _make_trajectory(req.times, data, FULL, n)
