import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from chainqst import experiments as ex
from chainqst.coupling import (
    J1_ARGMAX,
    J1_MAX,
    CouplingTarget,
    base_from_duration,
    bessel,
    duration_from_base,
    effective_coupling,
    effective_couplings,
    feasibility_report,
    invert_link,
    make_schedule,
    refine_schedule,
    synthesize_schedule,
)
from chainqst.coupling import neldermead
from chainqst.errors import InfeasibleTargetError, ValidationError
from chainqst.dynamics import evolve_exact
from chainqst.model import ModulationSpec, build_effective_hamiltonian


def series_bessel(m, x, terms=60):
    """Power-series oracle: sum_k (-1)^k / (k! (k+m)!) (x/2)^(2k+m)."""
    return math.fsum((-1) ** k / (math.factorial(k) * math.factorial(k + m)) * (x / 2) ** (2 * k + m) for k in range(terms))


def integral_bessel(m, x):
    """Bessel's integral oracle: (1/pi) int_0^pi cos(m t - x sin t) dt."""
    return quad(lambda t: math.cos(m * t - x * math.sin(t)), 0, math.pi, epsabs=1e-13, epsrel=0, limit=200)[0] / math.pi


class TestBessel:
    def test_trivial_values(self):
        assert bessel(0, 0.0) == 1.0
        assert bessel(1, 0.0) == 0.0

    @pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.8412, 2.5, 4.0])
    @pytest.mark.parametrize("m", [0, 1])
    def test_matches_oracles(self, m, x):
        assert bessel(m, x) == pytest.approx(series_bessel(m, x), abs=1e-14)
        assert bessel(m, x) == pytest.approx(integral_bessel(m, x), abs=1e-12)

    def test_first_maximum(self):
        assert bessel(1, 1.8412) == pytest.approx(0.5819, abs=1e-4)
        assert series_bessel(1, J1_ARGMAX) == pytest.approx(J1_MAX, abs=1e-15)
        h = 1e-5
        slope = (series_bessel(1, J1_ARGMAX + h) - series_bessel(1, J1_ARGMAX - h)) / (2 * h)
        assert abs(slope) < 1e-9

    def test_derivative_identity(self):
        x = np.linspace(0, 5, 51)
        h = 1e-5
        d = (bessel(0, x + h) - bessel(0, x - h)) / (2 * h)
        np.testing.assert_allclose(d, -bessel(1, x), atol=1e-6)

    def test_rejects_other_orders(self):
        with pytest.raises(ValidationError):
            bessel(2, 1.0)


class TestEffectiveCoupling:
    def test_zero_index(self):
        assert effective_coupling(1, 16.68, None, 0.0, 0.0) == 0

    def test_first_link(self):
        c = effective_coupling(1, 16.68, None, 1.0, 0.0)
        assert abs(c) == pytest.approx(16.68 * series_bessel(1, 1.0), rel=1e-13)
        assert abs(c) == pytest.approx(7.34, abs=0.005)
        assert np.angle(c) == pytest.approx(np.pi / 2)

    def test_second_link(self):
        c = effective_coupling(2, 17.50, 1.0, 1.0, 0.0)
        assert abs(c) == pytest.approx(17.50 * series_bessel(1, 1.0) * series_bessel(0, 1.0), rel=1e-13)
        assert abs(c) == pytest.approx(5.89, abs=0.005)
        assert np.angle(c) == pytest.approx(np.pi / 2)

    @pytest.mark.parametrize("phi", np.linspace(0, 2 * np.pi, 13, endpoint=False))
    def test_phase_map(self, phi):
        def wrap(x):
            return (x + np.pi) % (2 * np.pi) - np.pi

        c = effective_couplings([10.0] * 4, [0.7] * 4, [phi] * 4)
        assert wrap(np.angle(c[0]) - phi - np.pi / 2) == pytest.approx(0, abs=1e-12)
        assert wrap(np.angle(c[1]) + phi - np.pi / 2) == pytest.approx(0, abs=1e-12)
        assert wrap(np.angle(c[2]) - phi - np.pi / 2) == pytest.approx(0, abs=1e-12)
        assert wrap(np.angle(c[3]) + phi - np.pi / 2) == pytest.approx(0, abs=1e-12)


class TestInversion:
    def test_zero(self):
        assert invert_link(0.0, 16.68) == 0.0

    def test_round_trip(self):
        g = 16.68
        assert invert_link(g * series_bessel(1, 1.0), g) == pytest.approx(1.0, abs=1e-10)

    def test_infeasible(self):
        with pytest.raises(InfeasibleTargetError):
            invert_link(1.01 * 16.68 * 0.5819, 16.68)

    def test_monotone(self):
        targets = np.linspace(0, 0.999 * J1_MAX * 10, 50)
        alphas = [invert_link(t, 10.0) for t in targets]
        assert np.all(np.diff(alphas) > 0)
        assert alphas[-1] <= J1_ARGMAX


class TestSynthesis:
    def test_duration_arithmetic(self):
        assert duration_from_base(base_from_duration(84.0)) == pytest.approx(84.0)
        assert base_from_duration(84.0) == pytest.approx(2.976, abs=5e-4)
        target = CouplingTarget(2, base_coupling=1e3 / (4 * 84.0))
        assert target.duration == pytest.approx(84.0)
        np.testing.assert_allclose(target.magnitudes, [target.base_coupling])

    def test_target_needs_one_spec(self):
        with pytest.raises(ValidationError):
            CouplingTarget(4)
        with pytest.raises(ValidationError):
            CouplingTarget(4, base_coupling=1.0, duration=2.0)

    def test_default_chain(self, chain, schedule):
        g = np.abs(schedule.effective_couplings)
        np.testing.assert_allclose(g, [5.1549, 5.9524, 5.1549], atol=1e-4)
        np.testing.assert_allclose(schedule.alphas, [0.65, 0.82, 0.75], atol=0.01)
        # recompute the map with the oracle
        a = schedule.alphas
        oracle = [
            16.68 * series_bessel(1, a[0]),
            17.50 * series_bessel(1, a[1]) * series_bessel(0, a[0]),
            17.52 * series_bessel(1, a[2]) * series_bessel(0, a[1]),
        ]
        np.testing.assert_allclose(g, oracle, rtol=1e-12)
        np.testing.assert_allclose([m.frequency for m in schedule.modulations], np.abs(chain.detunings_mhz()))

    def test_infeasible_link_two(self, chain):
        weak = chain.with_couplings([16.68, 10.0, 17.52])
        target = CouplingTarget(4, duration=84.0)
        with pytest.raises(InfeasibleTargetError) as err:
            synthesize_schedule(weak, target)
        assert err.value.link == 2
        rows = feasibility_report(weak, target)
        a1 = invert_link(target.magnitudes[0], 16.68)
        assert rows[1]["max_mhz"] == pytest.approx(10.0 * J1_MAX * series_bessel(0, a1), rel=1e-12)
        assert rows[1]["headroom"] > 1 > rows[0]["headroom"]

    @settings(max_examples=30, deadline=None)
    @given(duration=st.floats(60.0, 2000.0), n=st.integers(2, 5))
    def test_round_trip_property(self, chain, duration, n):
        freqs = [5.0 + (0.25 if k % 2 else 0.0) for k in range(n)]
        from helpers import make_chain

        ch = make_chain(freqs, [17.0] * (n - 1))
        target = CouplingTarget(n, duration=duration)
        sched = synthesize_schedule(ch, target)
        np.testing.assert_allclose(np.abs(sched.effective_couplings), target.magnitudes, rtol=1e-10)


class TestNelderMead:
    def test_quadratic(self):
        res = neldermead.minimize(lambda x: (x[0] - 1.3) ** 2 + 2 * (x[1] + 0.7) ** 2, [0.5, 0.5], step=0.2, xtol=1e-9, max_iter=2000)
        assert res.converged
        np.testing.assert_allclose(res.x, [1.3, -0.7], atol=1e-6)

    def test_bounds_respected(self):
        res = neldermead.minimize(lambda x: (x[0] + 5) ** 2, [1.0], bounds=[(0.0, None)], xtol=1e-8)
        assert res.x[0] >= 0 and res.x[0] == pytest.approx(0.0, abs=1e-6)

    def test_iteration_cap(self):
        res = neldermead.minimize(lambda x: np.sum(x**2), np.ones(4), max_iter=3)
        assert not res.converged and res.nit == 3


class TestRefine:
    def test_fixed_point(self, chain, schedule):
        def objective(s):
            # effective model evaluated at alpha = eps/nu; resonance check relaxed
            h = build_effective_hamiltonian(chain, s, resonance_tol_mhz=np.inf)
            psi = np.zeros(chain.n + 1, complex)
            psi[1] = 1.0
            return abs(evolve_exact(h, psi, s.duration)[-1]) ** 2

        res = refine_schedule(chain, schedule, objective, max_iter=100)
        assert res.fidelity >= res.initial_fidelity
        assert res.initial_fidelity == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose([m.amplitude for m in res.schedule.modulations], [m.amplitude for m in schedule.modulations], rtol=1e-3)

    def test_improves_perturbed(self, chain, schedule):
        mods = list(schedule.modulations)
        mods[1] = ModulationSpec(mods[1].amplitude * 1.05, mods[1].frequency)
        bad = make_schedule(chain, mods, schedule.duration)
        res = refine_schedule(chain, bad, ex.lab_transfer_objective(chain), max_iter=30)
        assert res.fidelity >= res.initial_fidelity
        assert res.evaluations > 30
