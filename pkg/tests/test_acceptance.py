"""Acceptance criteria; each test prints one PASS/FAIL line."""

import os
import time

import numpy as np
import pytest

from chainqst import calibration as cal
from chainqst import experiments as ex
from chainqst import tomography as tomo
from chainqst.coupling import synthesize_schedule
from chainqst.dynamics import EvolutionRequest, evolve_exact, evolve_unitary, noise_from_chain
from chainqst.model import FULL, hopping_matrix
from chainqst.units import MHZ

M_LIST = list(range(1, 106, 4))
M_TILDE = np.array(
    [
        [0.9934, 0.0822, 0.021, 0.0158],
        [-0.0714, 0.9843, 0.0595, 0.0361],
        [-0.0222, -0.1278, 0.9888, 0.074],
        [-0.0087, -0.057, -0.0414, 0.9447],
    ]
)


@pytest.fixture
def report(capsys):
    def emit(number, name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {number}. {name}: {detail}")
        assert ok, detail

    return emit


def test_1_perfect_transfer(report):
    start = time.perf_counter()
    g_base = 3.0 * MHZ
    tau = np.pi / (2 * g_base)
    worst = 0.0
    for n in (2, 3, 4, 6, 8):
        h = hopping_matrix([g_base * np.sqrt(j * (n - j)) for j in range(1, n)])
        psi = np.zeros(n + 1, complex)
        psi[1] = 1.0
        worst = max(worst, abs(abs(evolve_exact(h, psi, tau)[n]) - 1.0))
    elapsed = time.perf_counter() - start
    report(1, "perfect transfer", worst <= 1e-9 and elapsed < 1.0, f"max ||amp|-1| = {worst:.2e}, {elapsed:.3f} s")


def test_2_lab_frame_84ns(chain, config, report):
    start = time.perf_counter()
    bare = synthesize_schedule(chain, config.target)
    refined = ex.calibrate_schedule(chain, bare).schedule
    times = np.arange(0.0, 170.0, 0.5)
    init = ex.initial_chain_state(chain.n, [0.0, 1.0], FULL)
    pops = {}
    for label, sched in (("bare", bare), ("refined", refined)):
        req = EvolutionRequest("lab", init, times, chain, sched, counter_rotating=True)
        pops[label] = evolve_unitary(req).populations
    elapsed = time.perf_counter() - start
    window = np.abs(times - 84.0) <= 2.0
    q3 = pops["refined"][window, 3].max()
    q0 = pops["refined"][times == 168.0, 0][0]
    ok = q3 >= 0.98 and q0 >= 0.96 and elapsed < 60.0
    detail = (
        f"Q3(84+-2 ns) = {q3:.4f}, Q0(168 ns) = {q0:.4f}, {elapsed:.1f} s "
        f"(unrefined schedule: Q3 = {pops['bare'][window, 3].max():.4f}, Q0 = {pops['bare'][times == 168.0, 0][0]:.4f})"
    )
    report(2, "84 ns lab-frame transfer", ok, detail)


def test_3_fidelity_decay(chain, config, schedule, report):
    start = time.perf_counter()
    t2 = config.uniform_t2_star
    cold = ex.repeated_transfer(chain, schedule, M_LIST, noise_from_chain(chain, t2))
    warm = ex.repeated_transfer(chain, schedule, M_LIST, noise_from_chain(chain, t2, thermal=True))
    elapsed = time.perf_counter() - start
    dp = abs(warm.per_transfer - cold.per_transfer)
    ok = 0.990 <= cold.per_transfer <= 0.994 and dp <= 0.001 and elapsed < 600
    detail = f"P = {cold.per_transfer:.5f}, thermal P = {warm.per_transfer:.5f}, |dP| = {dp:.1e}, {elapsed:.1f} s"
    report(3, "fidelity decay", ok, detail)


CHEVRON_CASES = [(mode, alpha) for mode in (ex.SINGLE, ex.BOTH) for alpha in (0.3, 0.6, 1.0, 1.5, 2.0)]


@pytest.mark.slow
@pytest.mark.parametrize("mode, alpha", CHEVRON_CASES)
def test_4_coupling_map(chain, report, mode, alpha):
    det = np.abs(chain.detunings_mhz())
    pair, up = ((0, 1), None) if mode == ex.SINGLE else ((1, 2), 0.65 * det[0])
    d = det[pair[0]]
    eps = alpha * d
    start = time.perf_counter()
    guess = ex.expected_link_coupling(chain, pair, eps, mode, up)
    nu = np.linspace(d - 4 * guess, d + 4 * guess, 25)
    times = np.arange(0.0, max(300.0, 5e3 / (2 * guess)), 1.0)
    cm = ex.chevron_scan(chain, pair, eps, nu, times, mode, up, workers=os.cpu_count() or 1)
    pred = ex.expected_link_coupling(chain, pair, eps, mode, up, nu=cm.nu_star)
    elapsed = time.perf_counter() - start
    dev = cm.g_eff / pred - 1
    ok = abs(dev) <= 0.02 and elapsed < 300
    detail = f"{mode} alpha={alpha}: |g'| = {cm.g_eff:.4f} MHz vs {pred:.4f} MHz ({dev:+.2%}), {elapsed:.1f} s"
    report(4, "coupling map", ok, detail)


def test_5_phase_control(chain, schedule, report):
    start = time.perf_counter()
    grid = np.linspace(0, 2 * np.pi, 17)
    s1 = ex.phase_scan(chain, schedule, 1, grid).slope
    s2 = ex.phase_scan(chain, schedule, 2, grid).slope
    elapsed = time.perf_counter() - start
    ok = abs(s1 - 1) <= 0.01 and abs(s2 + 1) <= 0.01 and elapsed < 30
    report(5, "phase control", ok, f"slopes {s1:+.6f}, {s2:+.6f}, {elapsed:.2f} s")


def test_6_readout(chain, report):
    shots, truth = 10_000, np.array([0.3, 0.7])
    hits, trips = [], 0.0
    for q in chain.qubits:
        c = tomo.ConfusionMatrix.from_qubit(q)
        sigma = tomo.corrected_sigma(truth, c, shots)
        n = 0
        for seed in range(100):
            counts = tomo.sample_readout(truth, c, shots, seed)
            n += abs(tomo.correct_readout(counts / shots, c)[1] - truth[1]) <= 3 * sigma
        hits.append(int(n))
        for p in np.linspace(0, 1, 11):
            exact = np.array([1 - p, p])
            trips = max(trips, np.max(np.abs(tomo.correct_readout(c.matrix @ exact, c) - exact)))
    ok = min(hits) >= 95 and trips <= 1e-12
    report(6, "readout pipeline", ok, f"3-sigma coverage per qubit {hits}/100, round trip {trips:.1e}")


def test_7_calibration(report):
    m_z = np.linalg.inv(M_TILDE)
    corr = cal.orthogonalize(m_z)
    identity = np.max(np.abs(m_z @ corr - np.eye(4)))
    printed = np.max(np.abs(corr - M_TILDE))
    resp = cal.LineResponse.parametric()
    y = cal.step_waveform(400, 50)
    raw = cal.simulate_step_response(resp, y, step_index=50)
    fixed = cal.simulate_step_response(resp, cal.deconvolve(y, resp).drive, y, step_index=50)
    ok = identity <= 1e-12 and printed <= 1e-12 and fixed.settling_deviation < 0.01 and raw.settling_deviation > 0.02
    detail = (
        f"|M_z C - I| = {identity:.1e}, printed round trip {printed:.1e}, "
        f"settling deviation raw {raw.settling_deviation:.3f} vs deconvolved {fixed.settling_deviation:.4f}"
    )
    report(7, "calibration", ok, detail)


def test_8_simulated_analogs(chain, config, schedule, report):
    """Device-specific numbers are not asserted; the simulated analogs are reported."""
    noise = noise_from_chain(chain, config.uniform_t2_star)
    fit = ex.repeated_transfer(chain, schedule, M_LIST, noise)
    t_e = ex.transferred_state_decay(chain, schedule, "e", M_LIST, noise).decay_time
    t_plus = ex.transferred_state_decay(chain, schedule, "plus", M_LIST, noise).decay_time
    ok = 0 < fit.amplitude <= 0.75 + 1e-9 and np.isfinite(t_e) and np.isfinite(t_plus)
    detail = f"simulated A = {fit.amplitude:.4f}, decay times |e> {t_e:.2f} us, |+> {t_plus:.2f} us (reported only)"
    report(8, "simulated analogs", ok, detail)
