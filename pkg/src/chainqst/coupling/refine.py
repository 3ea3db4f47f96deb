"""Simplex refinement of modulation amplitudes and frequencies."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..model.types import ChainConfig, ModulationSpec, TransferSchedule
from . import neldermead
from .synthesis import make_schedule


@dataclass
class RefineResult:
    schedule: TransferSchedule
    fidelity: float
    initial_fidelity: float
    iterations: int
    evaluations: int
    converged: bool
    trace: list = field(default_factory=list)

    @property
    def hit_iteration_cap(self) -> bool:
        return not self.converged


def _pack(schedule: TransferSchedule) -> np.ndarray:
    eps = [m.amplitude for m in schedule.modulations]
    nus = [m.frequency for m in schedule.modulations]
    return np.array(eps + nus, float)


def _unpack(chain, schedule, x) -> TransferSchedule:
    k = len(schedule.modulations)
    mods = [
        ModulationSpec(amplitude=max(x[i], 0.0), frequency=x[k + i], phase=m.phase)
        for i, m in enumerate(schedule.modulations)
    ]
    return make_schedule(chain, mods, schedule.duration)


def refine_schedule(
    chain: ChainConfig,
    schedule: TransferSchedule,
    objective: Callable[[TransferSchedule], float],
    bounds: Optional[Sequence] = None,
    max_iter: int = 500,
    xtol: float = 1e-4,
    step: float = 0.02,
) -> RefineResult:
    """Maximise ``objective(schedule)`` over (eps_1.., nu_1..) with Nelder-Mead.

    ``bounds`` pairs follow the same ordering (all amplitudes, then all
    frequencies); default keeps amplitudes >= 0 and frequencies > 1 MHz.
    The returned schedule never scores below the input one.
    """
    x0 = _pack(schedule)
    k = len(schedule.modulations)
    if bounds is None:
        bounds = [(0.0, None)] * k + [(1.0, None)] * k

    def cost(x):
        return -objective(_unpack(chain, schedule, x))

    f0 = objective(schedule)
    res = neldermead.minimize(cost, x0, step=step, bounds=bounds, max_iter=max_iter, xtol=xtol)
    best = _unpack(chain, schedule, res.x)
    fbest = -res.fun
    if fbest < f0:
        best, fbest = schedule, f0
    trace = [(i, -v) for i, v in res.trace]
    return RefineResult(best, fbest, f0, res.nit, res.nfev + 1, res.converged, trace)
