"""Lab-frame, rotating-frame and effective chain Hamiltonians (rad/ns)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import ResonanceError, ValidationError
from ..units import ghz, mhz
from . import operators as ops
from .types import ChainConfig, ModulationSpec, TransferSchedule, sector_indices

ROTATING = "rotating"
LAB = "lab"


@dataclass(frozen=True)
class Drive:
    """One harmonic term amp * exp(i (freq t + phase)) * op."""

    op: np.ndarray
    amp: complex
    freq: float
    phase: float = 0.0

    def coefficient(self, t):
        return self.amp * np.exp(1j * (self.freq * t + self.phase))


@dataclass(frozen=True)
class TimeDependentOperator:
    """H(t) = static + sum_k drives[k].coefficient(t) * drives[k].op."""

    static: np.ndarray
    drives: tuple = ()

    @property
    def dim(self) -> int:
        return self.static.shape[0]

    @property
    def is_constant(self) -> bool:
        return not self.drives

    def __call__(self, t: float) -> np.ndarray:
        h = self.static.astype(complex, copy=True)
        for d in self.drives:
            h += d.coefficient(t) * d.op
        return h

    def norm_bound(self) -> float:
        """Upper bound on the spectral norm of H(t) over all t."""
        b = np.linalg.norm(self.static, 2) if self.static.any() else 0.0
        for d in self.drives:
            b += abs(d.amp) * np.linalg.norm(d.op, 2)
        return float(b)

    def max_frequency(self) -> float:
        return max((abs(d.freq) for d in self.drives), default=0.0)


def chain_terms(
    freqs_ghz: Sequence[float],
    couplings_mhz: Sequence[float],
    modulations: Sequence[Optional[ModulationSpec]],
    frame: str = ROTATING,
    counter_rotating: bool = True,
) -> TimeDependentOperator:
    """Harmonic decomposition of the modulated chain Hamiltonian.

    ``modulations`` has one entry per qubit (None = unmodulated). In the
    rotating frame the carrier sum_j w_o,j/2 sigma_z_j is removed, leaving
    the modulation terms and phase-rotating couplings; populations are the
    same as in the lab frame.
    """
    n = len(freqs_ghz)
    if len(couplings_mhz) != n - 1 or len(modulations) != n:
        raise ValidationError("frequency, coupling and modulation lists disagree in length")
    w = ghz(np.asarray(freqs_ghz, float))
    g = mhz(np.asarray(couplings_mhz, float))
    dim = 2**n
    static = np.zeros((dim, dim), complex)
    drives = []

    for k, m in enumerate(modulations):
        if m is None or m.amplitude == 0:
            continue
        eps, nu = mhz(m.amplitude), mhz(m.frequency)
        # eps/2 sin(nu t + phi) = (eps/4i) e^{i(nu t + phi)} - (eps/4i) e^{-i(nu t + phi)}
        drives.append(Drive(ops.sz(k, n), -0.25j * eps, nu, m.phase))
        drives.append(Drive(ops.sz(k, n), 0.25j * eps, -nu, -m.phase))

    if frame == LAB:
        for k in range(n):
            static += 0.5 * w[k] * ops.sz(k, n)
        for j in range(1, n):
            xx = ops.sx(j - 1, n) @ ops.sx(j, n)
            if not counter_rotating:
                xx = ops.sp(j - 1, n) @ ops.sm(j, n) + ops.sm(j - 1, n) @ ops.sp(j, n)
            static += g[j - 1] * xx
    elif frame == ROTATING:
        for j in range(1, n):
            a, b = j - 1, j
            gj = g[j - 1]
            # sigma+ picks up e^{+i w t} in this frame, sigma- e^{-i w t}
            drives.append(Drive(ops.sp(a, n) @ ops.sm(b, n), gj, w[a] - w[b]))
            drives.append(Drive(ops.sm(a, n) @ ops.sp(b, n), gj, w[b] - w[a]))
            if counter_rotating:
                drives.append(Drive(ops.sp(a, n) @ ops.sp(b, n), gj, w[a] + w[b]))
                drives.append(Drive(ops.sm(a, n) @ ops.sm(b, n), gj, -(w[a] + w[b])))
    else:
        raise ValidationError(f"unknown frame {frame!r}", "frame")
    return TimeDependentOperator(static, tuple(drives))


def lab_terms(
    chain: ChainConfig,
    schedule: TransferSchedule,
    frame: str = ROTATING,
    counter_rotating: bool = True,
) -> TimeDependentOperator:
    if len(schedule.modulations) != chain.n - 1:
        raise ValidationError(
            f"schedule has {len(schedule.modulations)} modulations, chain needs {chain.n - 1}",
            "modulations",
        )
    return chain_terms(
        chain.operating_freqs,
        chain.static_couplings,
        (None,) + tuple(schedule.modulations),
        frame=frame,
        counter_rotating=counter_rotating,
    )


def build_lab_hamiltonian(
    chain: ChainConfig,
    schedule: TransferSchedule,
    t: float,
    frame: str = LAB,
    counter_rotating: bool = True,
) -> np.ndarray:
    """Chain Hamiltonian at time t (ns), full 2^N space, rad/ns."""
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}", "t")
    return lab_terms(chain, schedule, frame, counter_rotating)(t)


def check_resonance(chain: ChainConfig, schedule: TransferSchedule, tol_mhz: float = 1e-3):
    """Raise ResonanceError unless Delta_j = +nu_j (odd j) / -nu_j (even j)."""
    for j, (d, m) in enumerate(zip(chain.detunings_mhz(), schedule.modulations), start=1):
        want = m.frequency if j % 2 == 1 else -m.frequency
        if abs(d - want) > tol_mhz:
            raise ResonanceError(j, d - want, tol_mhz)


def hopping_matrix(couplings_rad: Sequence[complex]) -> np.ndarray:
    """Sector matrix of sum_j g'_j sigma+_{j-1} sigma-_j + h.c. (vacuum row/col zero)."""
    n = len(couplings_rad) + 1
    h = np.zeros((n + 1, n + 1), complex)
    for j, c in enumerate(couplings_rad, start=1):
        h[j + 1, j] = c
        h[j, j + 1] = np.conj(c)
    return h


def hopping_full(couplings_rad: Sequence[complex], n: int) -> np.ndarray:
    h = np.zeros((2**n, 2**n), complex)
    for j, c in enumerate(couplings_rad, start=1):
        term = c * (ops.sp(j - 1, n) @ ops.sm(j, n))
        h += term + term.conj().T
    return h


def build_effective_hamiltonian(
    chain: ChainConfig,
    schedule: TransferSchedule,
    representation: str = "sector",
    resonance_tol_mhz: float = 1e-3,
) -> np.ndarray:
    """RWA exchange Hamiltonian with Bessel-renormalised couplings, rad/ns."""
    from ..coupling.bessel import effective_couplings

    if len(schedule.modulations) != chain.n - 1:
        raise ValidationError("schedule length does not match chain", "modulations")
    check_resonance(chain, schedule, resonance_tol_mhz)
    gp = mhz(effective_couplings(chain.static_couplings, schedule.alphas, schedule.phases))
    if representation == "sector":
        return hopping_matrix(gp)
    if representation == "full":
        return hopping_full(gp, chain.n)
    raise ValidationError(f"unknown representation {representation!r}", "representation")


def project_to_sector(op: np.ndarray, n: int) -> np.ndarray:
    idx = sector_indices(n)
    return op[np.ix_(idx, idx)]
