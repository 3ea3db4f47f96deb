"""Perfect-transfer schedule synthesis by sequential Bessel inversion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from ..errors import InfeasibleTargetError, ValidationError
from ..model.types import ChainConfig, ModulationSpec, TransferSchedule
from .bessel import J1_ARGMAX, J1_MAX, bessel, effective_couplings


def duration_from_base(g_base_mhz: float) -> float:
    """tau = pi / (2 g') with g' given as cyclic MHz; returns ns."""
    return 1e3 / (4.0 * g_base_mhz)


def base_from_duration(tau_ns: float) -> float:
    return 1e3 / (4.0 * tau_ns)


@dataclass(frozen=True)
class CouplingTarget:
    """Perfect-transfer coupling profile |g'_j| = g' sqrt(j (N - j)).

    Give exactly one of ``base_coupling`` (MHz) or ``duration`` (ns).
    """

    n: int
    base_coupling: Optional[float] = None
    duration: Optional[float] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("chain length must be >= 2", "n")
        if (self.base_coupling is None) == (self.duration is None):
            raise ValidationError("give exactly one of base_coupling or duration", "target")
        if self.base_coupling is not None:
            if self.base_coupling <= 0:
                raise ValidationError("base coupling must be > 0", "base_coupling")
            object.__setattr__(self, "duration", duration_from_base(self.base_coupling))
        else:
            if self.duration <= 0:
                raise ValidationError("duration must be > 0", "duration")
            object.__setattr__(self, "base_coupling", base_from_duration(self.duration))

    @property
    def magnitudes(self) -> np.ndarray:
        j = np.arange(1, self.n)
        return self.base_coupling * np.sqrt(j * (self.n - j))


def invert_link(target: float, g: float, attenuation: float = 1.0) -> float:
    """Smallest alpha with g * J1(alpha) * attenuation = target.

    Only the rising branch alpha in [0, 1.8412] of J1 is used.
    """
    if target < 0:
        raise ValidationError(f"target must be >= 0, got {target}", "target")
    if not 0.0 < attenuation <= 1.0:
        raise ValidationError(f"upstream attenuation {attenuation} not in (0, 1]", "attenuation")
    peak = g * J1_MAX * attenuation
    if target > peak:
        raise InfeasibleTargetError(target, peak)
    if target == 0:
        return 0.0
    if target == peak:
        return J1_ARGMAX
    y = target / (g * attenuation)
    return brentq(lambda a: bessel(1, a) - y, 0.0, J1_ARGMAX, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def make_schedule(chain: ChainConfig, modulations: Sequence[ModulationSpec], duration: float) -> TransferSchedule:
    """Schedule with its effective-coupling cache filled in."""
    mods = tuple(modulations)
    if len(mods) != chain.n - 1:
        raise ValidationError(f"need {chain.n - 1} modulations, got {len(mods)}", "modulations")
    gp = effective_couplings(
        chain.static_couplings, [m.alpha for m in mods], [m.phase for m in mods]
    )
    return TransferSchedule(mods, duration, tuple(gp))


def synthesize_schedule(
    chain: ChainConfig, target: CouplingTarget, phases: Optional[Sequence[float]] = None
) -> TransferSchedule:
    """Modulation triples that realise ``target`` on ``chain`` at exact resonance."""
    if target.n != chain.n:
        raise ValidationError(f"target is for N={target.n}, chain has N={chain.n}", "target")
    chain.check_alternating()
    phases = np.zeros(chain.n - 1) if phases is None else np.asarray(phases, float)
    if len(phases) != chain.n - 1:
        raise ValidationError(f"need {chain.n - 1} phases, got {len(phases)}", "phases")

    nus = np.abs(chain.detunings_mhz())
    mods = []
    atten = 1.0
    for j, (tgt, g, nu, phi) in enumerate(zip(target.magnitudes, chain.static_couplings, nus, phases), start=1):
        try:
            a = invert_link(tgt, g, atten)
        except InfeasibleTargetError as exc:
            raise InfeasibleTargetError(exc.target, exc.maximum, link=j) from None
        mods.append(ModulationSpec(amplitude=a * nu, frequency=nu, phase=float(phi)))
        atten = bessel(0, a)
    return make_schedule(chain, mods, target.duration)


def feasibility_report(chain: ChainConfig, target: CouplingTarget) -> list:
    """Per-link headroom target/maximum given the upstream attenuation.

    Past an infeasible link the upstream qubit is assumed saturated at the J1
    peak, so later rows are indicative only.
    """
    rows = []
    atten = 1.0
    for j, (tgt, g) in enumerate(zip(target.magnitudes, chain.static_couplings), start=1):
        peak = g * J1_MAX * atten
        rows.append({"link": j, "target_mhz": float(tgt), "max_mhz": float(peak), "headroom": float(tgt / peak)})
        a = invert_link(tgt, g, atten) if tgt <= peak else J1_ARGMAX
        atten = bessel(0, a)
    return rows
