"""In-silico versions of the chain-transfer measurement protocols."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import curve_fit

from . import tomography as tomo
from .coupling import bessel, effective_couplings, make_schedule, refine_schedule
from .dynamics import (
    EvolutionRequest,
    NoiseModel,
    Trajectory,
    evolve_exact,
    evolve_lindblad,
    evolve_unitary,
    liouvillian,
)
from .errors import FitError, ValidationError
from .model import (
    FULL,
    SECTOR,
    ChainConfig,
    ModulationSpec,
    QuantumState,
    TransferSchedule,
    build_effective_hamiltonian,
    chain_terms,
    product_state,
    reduced_qubit,
)
from .units import MHZ, US


def run_jobs(fn, jobs, workers: int = 1) -> list:
    """Map ``fn`` over ``jobs`` in order; a process pool when workers > 1."""
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# ---------------------------------------------------------------------- chevrons

SINGLE = "single-modulated"
BOTH = "both-modulated"


@dataclass
class ChevronMap:
    """Excitation exchange of one link vs modulation frequency and time.

    ``p_e`` holds the downstream (initially ground) qubit, shape
    (len(nu), len(times)). ``g_eff`` is |g'| in MHz from a cos^2(|g'| t) fit of
    the upstream population at ``nu_star``, where the population exchange
    runs at angular frequency 2|g'|.
    """

    pair: tuple
    mode: str
    epsilon: float
    nu: np.ndarray
    times: np.ndarray
    p_e: np.ndarray
    nu_star: float
    g_eff: float
    g_eff_err: float
    resonance_times: np.ndarray
    resonance_p_source: np.ndarray
    upstream_epsilon: float = 0.0

    @property
    def resonance_span(self) -> float:
        return float(np.ptp(self.resonance_p_source))


@dataclass(frozen=True)
class _PairJob:
    freqs: tuple
    coupling: float
    upstream: Optional[ModulationSpec]
    modulation: ModulationSpec
    times: tuple
    counter_rotating: bool


def _pair_trace(job: _PairJob) -> np.ndarray:
    """Populations (times x 2) of a two-qubit link, upstream qubit excited."""
    h = chain_terms(job.freqs, [job.coupling], [job.upstream, job.modulation], counter_rotating=job.counter_rotating)
    init = product_state(2, {0: np.array([0.0, 1.0])})
    req = EvolutionRequest("explicit", init, np.array(job.times), operator=h)
    return evolve_unitary(req).populations


def _lorentzian(nu, amp, center, width):
    return amp / (1.0 + ((nu - center) / width) ** 2)


def _fit_resonance(nu, peak):
    """Centre of the main resonance in the per-column maximum transfer.

    Only the contiguous half-maximum region around the highest column (plus
    one neighbour per side) enters the fit, so distant sideband resonances do
    not pull the centre.
    """
    i = int(np.argmax(peak))
    if peak[i] - peak.min() < 0.2:
        raise FitError("no resonance visible in the chevron (flat map)")
    half = 0.5 * peak[i]
    lo, hi = i, i
    while lo > 0 and peak[lo - 1] >= half:
        lo -= 1
    while hi < len(peak) - 1 and peak[hi + 1] >= half:
        hi += 1
    lo, hi = max(lo - 1, 0), min(hi + 1, len(peak) - 1)
    if hi - lo + 1 < 4:
        raise FitError("resonance narrower than the frequency grid; refine nu_grid")
    x, y = nu[lo : hi + 1], peak[lo : hi + 1]
    width0 = max((x[-1] - x[0]) / 4, np.min(np.diff(nu)))
    try:
        popt, _ = curve_fit(_lorentzian, x, y, p0=[peak[i], nu[i], width0], maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"resonance fit failed: {exc}") from None
    center = float(popt[1])
    if not x[0] <= center <= x[-1]:
        raise FitError(f"fitted resonance {center:.4f} MHz outside the peak region")
    return center


def _cos2(t, amp, g, base):
    return base + amp * np.cos(g * t) ** 2


def fit_exchange_rate(times, p_source):
    """|g'| (rad/ns) and its standard error from P(t) = base + amp cos^2(g t)."""
    times = np.asarray(times, float)
    p = np.asarray(p_source, float)
    if np.ptp(p) < 0.2:
        raise FitError("no oscillation to fit")
    # initial guess from the first minimum: cos^2 reaches 0 at g t = pi/2
    imin = int(np.argmin(p))
    if imin == len(p) - 1 or imin == 0:
        raise FitError("insufficient oscillation periods on the time grid (no full swap)")
    guesses = [np.pi / 2 / times[imin]]
    power = np.abs(np.fft.rfft(p - p.mean()))
    k = int(np.argmax(power[1:])) + 1
    guesses.append(np.pi * k / (times[-1] - times[0]))
    best = None
    for g0 in guesses:
        try:
            popt, pcov = curve_fit(_cos2, times, p, p0=[np.ptp(p), g0, p.min()], maxfev=20000)
        except (RuntimeError, ValueError):
            continue
        res = np.sum((_cos2(times, *popt) - p) ** 2)
        if best is None or res < best[0]:
            best = (res, popt, pcov)
    if best is None:
        raise FitError("cos^2 fit did not converge")
    _, popt, pcov = best
    g = abs(float(popt[1]))
    if g * times[-1] < np.pi / 2:
        raise FitError("insufficient oscillation periods on the time grid")
    err = float(np.sqrt(abs(pcov[1, 1]))) if np.all(np.isfinite(pcov)) else math.inf
    return g, err


def chevron_scan(
    chain: ChainConfig,
    pair: Sequence[int],
    epsilon: float,
    nu_grid: Sequence[float],
    t_grid: Sequence[float],
    mode: str = SINGLE,
    upstream_epsilon: Optional[float] = None,
    phase: float = 0.0,
    workers: int = 1,
    counter_rotating: bool = True,
) -> ChevronMap:
    """Lab-frame chevron of link (j-1, j) with the other qubits dropped.

    In ``both-modulated`` mode the upstream qubit j-1 (j >= 2) is driven at
    its own link resonance |Delta_{j-1}| with amplitude ``upstream_epsilon``
    (MHz). Every grid column is one trajectory; the resonance is located by
    a Lorentzian fit to the per-column maximum transfer and the on-resonance
    trace is then re-simulated at the fitted frequency.
    """
    a, b = int(pair[0]), int(pair[1])
    if b != a + 1 or a < 0 or b >= chain.n:
        raise ValidationError(f"pair {tuple(pair)} is not an adjacent link of the chain", "pair")
    if mode not in (SINGLE, BOTH):
        raise ValidationError(f"unknown chevron mode {mode!r}", "mode")
    freqs = (chain.qubits[a].operating_freq, chain.qubits[b].operating_freq)
    g = chain.static_couplings[a]
    upstream = None
    up_eps = 0.0
    if mode == BOTH:
        if a < 1:
            raise ValidationError("both-modulated mode needs an upstream qubit with its own link", "pair")
        up_eps = float(upstream_epsilon or 0.0)
        if up_eps > 0:
            nu_up = abs(chain.detunings_mhz()[a - 1])
            upstream = ModulationSpec(up_eps, nu_up, 0.0)
    nu = np.asarray(nu_grid, float)
    times = np.asarray(t_grid, float)
    if times[0] != 0:
        times = np.concatenate([[0.0], times])

    jobs = [
        _PairJob(freqs, g, upstream, ModulationSpec(epsilon, float(v), phase), tuple(times), counter_rotating)
        for v in nu
    ]
    traces = run_jobs(_pair_trace, jobs, workers)
    p_e = np.array([tr[:, 1] for tr in traces])

    if epsilon == 0:
        raise FitError("zero modulation amplitude: flat chevron, nothing to fit")
    nu_star = _fit_resonance(nu, p_e.max(axis=1))
    res = _pair_trace(_PairJob(freqs, g, upstream, ModulationSpec(epsilon, nu_star, phase), tuple(times), counter_rotating))
    g_rad, g_err = fit_exchange_rate(times, res[:, 0])
    return ChevronMap(
        pair=(a, b),
        mode=mode,
        epsilon=float(epsilon),
        nu=nu,
        times=times,
        p_e=p_e,
        nu_star=nu_star,
        g_eff=g_rad / MHZ,
        g_eff_err=g_err / MHZ,
        resonance_times=times,
        resonance_p_source=res[:, 0],
        upstream_epsilon=up_eps,
    )


def expected_link_coupling(
    chain: ChainConfig, pair, epsilon: float, mode: str = SINGLE, upstream_epsilon=None, nu: Optional[float] = None
):
    """|g'| (MHz) predicted by the Bessel map for a chevron configuration.

    alpha = epsilon / nu, with ``nu`` defaulting to the bare link detuning;
    pass the fitted resonance to evaluate the map at the applied frequency.
    """
    a = pair[0]
    dets = np.abs(chain.detunings_mhz())
    nu = dets[a] if nu is None else nu
    val = chain.static_couplings[a] * abs(bessel(1, epsilon / nu))
    if mode == BOTH and upstream_epsilon:
        val *= abs(bessel(0, upstream_epsilon / dets[a - 1]))
    return float(val)


# ------------------------------------------------------------ transfer dynamics

@dataclass
class PopulationTrace:
    trajectory: Trajectory
    transfer_time: float
    transfer_population: float


def initial_chain_state(n: int, qubit_state, representation: str = SECTOR) -> QuantumState:
    v = np.asarray(qubit_state, dtype=complex)
    v = v / np.linalg.norm(v)
    return product_state(n, {0: v}, representation)


def qst_population_trace(
    chain: ChainConfig,
    schedule: TransferSchedule,
    qubit_state,
    times: Sequence[float],
    noise: Optional[NoiseModel] = None,
    model: str = "effective",
    counter_rotating: bool = True,
) -> PopulationTrace:
    """Per-qubit excited populations with Q0 prepared in ``qubit_state``.

    ``model`` is "effective" (Bessel-renormalised exchange) or "lab" (full
    modulated chain in the rotating frame).
    """
    if model == "effective":
        rep = FULL if noise is not None else SECTOR
        req = EvolutionRequest(
            "effective", initial_chain_state(chain.n, qubit_state, rep), times, chain, schedule, noise=noise
        )
    elif model == "lab":
        req = EvolutionRequest(
            "lab",
            initial_chain_state(chain.n, qubit_state, FULL),
            times,
            chain,
            schedule,
            noise=noise,
            counter_rotating=counter_rotating,
        )
    else:
        raise ValidationError(f"unknown model {model!r}", "model")
    traj = evolve_lindblad(req) if noise is not None else evolve_unitary(req)
    last = traj.populations[:, -1]
    i = int(np.argmax(last))
    return PopulationTrace(traj, float(traj.times[i]), float(last[i]))


def transfer_amplitude(chain: ChainConfig, schedule: TransferSchedule, duration: Optional[float] = None) -> complex:
    """<Q_{N-1} excited | U(t) | Q_0 excited> under the effective model."""
    h = build_effective_hamiltonian(chain, schedule, "sector")
    t = schedule.duration if duration is None else duration
    psi = np.zeros(chain.n + 1, complex)
    psi[1] = 1.0
    return complex(evolve_exact(h, psi, t)[-1])


def transfer_phase(chain: ChainConfig, schedule: TransferSchedule) -> float:
    amp = transfer_amplitude(chain, schedule)
    if abs(amp) < 1e-6:
        raise FitError(f"transfer amplitude {abs(amp):.3g} too small to define a phase")
    return float(np.angle(amp))


def predicted_transfer_phase(chain: ChainConfig, schedule: TransferSchedule) -> float:
    """Sum of coupling phases minus the mirror-transfer constant (N-1) pi/2."""
    gp = effective_couplings(chain.static_couplings, schedule.alphas, schedule.phases)
    return float(np.sum(np.angle(gp)) - (chain.n - 1) * np.pi / 2)


@dataclass
class PhaseScan:
    which: int
    phis: np.ndarray
    phase: np.ndarray
    slope: float
    intercept: float


def _with_phase(chain, schedule, which, value):
    mods = list(schedule.modulations)
    m = mods[which - 1]
    mods[which - 1] = ModulationSpec(m.amplitude, m.frequency, float(value))
    return make_schedule(chain, mods, schedule.duration)


def phase_scan(chain: ChainConfig, schedule: TransferSchedule, which: int, grid: Sequence[float]) -> PhaseScan:
    """Transferred-state phase vs the modulation phase of qubit ``which`` (1..N-1)."""
    if not 1 <= which <= chain.n - 1:
        raise ValidationError(f"modulated qubit index must be in 1..{chain.n - 1}", "which")
    phis = np.asarray(grid, float)
    out = np.array([transfer_phase(chain, _with_phase(chain, schedule, which, p)) for p in phis])
    out = np.unwrap(out)
    slope, intercept = np.polyfit(phis, out, 1)
    return PhaseScan(which, phis, out, float(slope), float(intercept))


# ------------------------------------------------------------ repeated transfers

@dataclass
class DecayFit:
    m: np.ndarray
    fidelity: np.ndarray
    amplitude: float
    per_transfer: float
    amplitude_err: float
    per_transfer_err: float
    residual_norm: float
    chis: list = field(default_factory=list)

    def model(self, m):
        return self.amplitude * self.per_transfer ** np.asarray(m, float) + 0.25


def fit_decay(m, fidelity) -> tuple:
    """Least-squares fit of F = A P^m + 0.25; returns (A, P, dA, dP, residual)."""
    m = np.asarray(m, float)
    f = np.asarray(fidelity, float)
    model = lambda x, a, p: a * p**x + 0.25  # noqa: E731
    excess = np.clip(f - 0.25, 1e-12, None)
    slope, icpt = np.polyfit(m, np.log(excess), 1)
    p0 = [float(np.clip(np.exp(icpt), 1e-3, 1.0)), float(np.clip(np.exp(slope), 1e-6, 1.0))]
    try:
        popt, pcov = curve_fit(
            model, m, f, p0=p0, bounds=([0, 1e-6], [1.0, 1.0]), xtol=1e-15, ftol=1e-15, gtol=1e-15
        )
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"decay fit diverged: {exc}") from None
    perr = np.sqrt(np.abs(np.diag(pcov))) if np.all(np.isfinite(pcov)) else np.full(2, math.inf)
    resid = float(np.linalg.norm(model(m, *popt) - f))
    return float(popt[0]), float(popt[1]), float(perr[0]), float(perr[1]), resid


def transfer_channel_outputs(
    chain: ChainConfig,
    schedule: TransferSchedule,
    m_list: Sequence[int],
    noise: Optional[NoiseModel] = None,
) -> dict:
    """Output states of the last qubit for the four tomography inputs, per m.

    The chain runs continuously for m * tau under the effective model.
    """
    n = chain.n
    h = build_effective_hamiltonian(chain, schedule, "full")
    collapse = noise.collapse_operators() if noise is not None else []
    step = expm(liouvillian(h, collapse) * schedule.duration)
    d = 2**n
    rhos = []
    for v in tomo.INPUT_STATES:
        psi = product_state(n, {0: v}).data
        rhos.append(np.outer(psi, psi.conj()).reshape(-1))
    cur = np.array(rhos).T
    done = 0
    out = {}
    for m in sorted(set(int(x) for x in m_list)):
        cur = np.linalg.matrix_power(step, m - done) @ cur
        done = m
        out[m] = [reduced_qubit(cur[:, i].reshape(d, d), n - 1, n) for i in range(4)]
    return out


def _check_counts(m_list, minimum: int) -> np.ndarray:
    m_arr = np.array(sorted(set(int(x) for x in m_list)))
    if m_arr.size < minimum:
        raise ValidationError(f"need at least {minimum} transfer count(s)", "m_list")
    if np.any(m_arr % 4 != 1):
        raise ValidationError("transfer counts must have the form 4n+1", "m_list")
    return m_arr


def transfer_processes(
    chain: ChainConfig,
    schedule: TransferSchedule,
    m_list: Sequence[int],
    noise: Optional[NoiseModel] = None,
    readout: Optional[tomo.ConfusionMatrix] = None,
    shots: int = 10_000,
    seed=0,
) -> tuple:
    """(m, chi matrices, process fidelities) of Q0 -> Q_{N-1} after m transfers.

    The deterministic transfer phase is removed with a virtual z rotation
    calibrated once on the noiseless schedule. With ``readout`` the output
    states are estimated from sampled, Bayes-corrected counts.
    """
    m_arr = _check_counts(m_list, 1)
    fix = tomo.rz(-transfer_phase(chain, schedule))
    outputs = transfer_channel_outputs(chain, schedule, m_arr, noise)
    seeds = tomo._seed_sequence(seed).spawn(len(m_arr))
    fids, chis = [], []
    for m, ss in zip(m_arr, seeds):
        outs = [fix @ r @ fix.conj().T for r in outputs[m]]
        if readout is not None:
            outs = tomo.tomography_outputs_sampled(outs, readout, shots, ss)
        chi = tomo.process_tomography(outs)
        chis.append(chi)
        fids.append(tomo.process_fidelity(chi, tomo.CHI_IDENTITY, clamp=False))
    return m_arr, chis, np.array(fids)


def repeated_transfer(
    chain: ChainConfig,
    schedule: TransferSchedule,
    m_list: Sequence[int],
    noise: Optional[NoiseModel] = None,
    readout: Optional[tomo.ConfusionMatrix] = None,
    shots: int = 10_000,
    seed=0,
) -> DecayFit:
    """Process fidelity after m transfers and the fit F = A P^m + 0.25."""
    _check_counts(m_list, 2)
    m_arr, chis, fids = transfer_processes(chain, schedule, m_list, noise, readout, shots, seed)
    a, p, da, dp, resid = fit_decay(m_arr, fids)
    return DecayFit(m_arr, fids, a, p, da, dp, resid, chis)


@dataclass
class StateDecay:
    initial: str
    times: np.ndarray
    amplitude: np.ndarray
    decay_time: float
    """us; inf when no decay is resolved"""


NO_DECAY_SENTINEL = 1e6


def _fit_exponential(t_ns, y) -> float:
    y = np.asarray(y, float)
    if np.any(y <= 0):
        raise FitError("non-positive amplitude; cannot fit an exponential")
    slope, _ = np.polyfit(np.asarray(t_ns, float), np.log(y), 1)
    if slope >= 0:
        return math.inf
    t = -1.0 / slope / US
    return math.inf if t > NO_DECAY_SENTINEL else float(t)


def transferred_state_decay(
    chain: ChainConfig,
    schedule: TransferSchedule,
    initial: str,
    m_list: Sequence[int],
    noise: Optional[NoiseModel] = None,
) -> StateDecay:
    """Decay of the transferred component on the last qubit vs total time.

    ``initial`` "e" tracks P_e; "plus" tracks the coherence 2|rho_ge| after
    the phase correction. Only times m * tau with m = 4n+1 are used.
    """
    if initial not in ("e", "plus"):
        raise ValidationError(f"initial must be 'e' or 'plus', got {initial!r}", "initial")
    m_arr = _check_counts(m_list, 2)
    outputs = transfer_channel_outputs(chain, schedule, m_arr, noise)
    idx = 1 if initial == "e" else 2
    amp = []
    for m in m_arr:
        rho = outputs[m][idx]
        amp.append(rho[1, 1].real if initial == "e" else 2 * abs(rho[0, 1]))
    times = m_arr * schedule.duration
    return StateDecay(initial, times, np.array(amp), _fit_exponential(times, amp))


# ------------------------------------------------------------------ calibration

def lab_transfer_objective(chain: ChainConfig, counter_rotating: bool = False):
    """Objective for simplex refinement: P_e of the last qubit at tau, lab frame."""

    def objective(schedule: TransferSchedule) -> float:
        init = initial_chain_state(chain.n, [0.0, 1.0], FULL)
        req = EvolutionRequest(
            "lab", init, [0.0, schedule.duration], chain, schedule, counter_rotating=counter_rotating
        )
        return float(evolve_unitary(req).populations[-1, -1])

    return objective


def calibrate_schedule(chain: ChainConfig, schedule: TransferSchedule, max_iter: int = 500, counter_rotating=False):
    """Refine a synthesized schedule against the lab-frame transfer population."""
    return refine_schedule(chain, schedule, lab_transfer_objective(chain, counter_rotating), max_iter=max_iter)
