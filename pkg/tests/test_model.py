import numpy as np
import pytest

from chainqst.coupling import make_schedule
from chainqst.errors import ResonanceError, ValidationError
from chainqst.model import (
    FULL,
    LAB,
    ROTATING,
    SECTOR,
    ChainConfig,
    ModulationSpec,
    QuantumState,
    QubitParams,
    TransferSchedule,
    build_effective_hamiltonian,
    build_lab_hamiltonian,
    product_state,
    project_to_sector,
    reduced_qubit,
)
from chainqst.model import operators as ops
from chainqst.units import GHZ, MHZ

from helpers import make_chain


def _idle(chain):
    dets = np.abs(chain.detunings_mhz())
    return make_schedule(chain, [ModulationSpec(0.0, d) for d in dets], 84.0)


class TestQubitParams:
    def test_valid(self):
        q = QubitParams(5.0, 4.9, 20.0, 10.0, 0.95, 0.9, 0.02)
        assert q.t_phi == pytest.approx(1 / (1 / 10.0 - 1 / 40.0))

    @pytest.mark.parametrize(
        "kw, path",
        [
            (dict(t1=0.0), "t1"),
            (dict(t2_star=-1.0), "t2_star"),
            (dict(t2_star=50.0), "t2_star"),
            (dict(readout_fid_g=1.2), "readout_fid_g"),
            (dict(thermal_pop=0.6), "thermal_pop"),
        ],
    )
    def test_invalid(self, kw, path):
        base = dict(sweet_spot_freq=5.0, operating_freq=5.0, t1=20.0, t2_star=10.0)
        base.update(kw)
        with pytest.raises(ValidationError) as err:
            QubitParams(**base)
        assert err.value.path == path

    def test_t2_equal_two_t1_has_no_dephasing(self):
        assert QubitParams(5.0, 5.0, 10.0, 20.0).t_phi == np.inf


class TestChainConfig:
    def test_coupling_count(self):
        q = QubitParams(5.0, 5.0, 20.0, 10.0)
        with pytest.raises(ValidationError, match="static_couplings"):
            ChainConfig((q, q, q), (10.0,))

    def test_positive_couplings(self):
        q = QubitParams(5.0, 5.0, 20.0, 10.0)
        with pytest.raises(ValidationError, match=r"static_couplings\[0\]"):
            ChainConfig((q, q), (0.0,))

    def test_too_short(self):
        with pytest.raises(ValidationError):
            ChainConfig((QubitParams(5.0, 5.0, 20.0, 10.0),), ())

    def test_default_detunings_alternate(self, chain):
        np.testing.assert_allclose(chain.detunings_mhz(), [284.8, -203.3, 274.7], atol=1e-9)
        chain.check_alternating()

    def test_wrong_sign_is_reported(self):
        bad = make_chain([5.0, 4.8, 4.6], [10.0, 10.0])
        with pytest.raises(ValidationError, match="wrong sign"):
            bad.check_alternating()


class TestModulationSpec:
    def test_alpha_is_derived(self):
        m = ModulationSpec(np.float64(100.0), 200.0)
        assert m.alpha == 0.5 and type(m.amplitude) is float

    def test_invalid(self):
        with pytest.raises(ValidationError):
            ModulationSpec(1.0, 0.0)
        with pytest.raises(ValidationError):
            ModulationSpec(-1.0, 10.0)


class TestTransferSchedule:
    def test_stale_cache_detected(self, chain, schedule):
        bad = TransferSchedule(schedule.modulations, 84.0, tuple(np.array(schedule.effective_couplings) * 1.01))
        with pytest.raises(ValidationError, match="stale"):
            bad.check_against(chain)
        schedule.check_against(chain)

    def test_length_checked(self, chain):
        with pytest.raises(ValidationError):
            TransferSchedule((ModulationSpec(1.0, 10.0),), 84.0).check_against(chain)

    def test_mirror_symmetry(self, schedule):
        g = np.abs(schedule.effective_couplings)
        np.testing.assert_allclose(g, g[::-1], rtol=1e-10)


class TestQuantumState:
    def test_pure_norm(self):
        with pytest.raises(ValidationError):
            QuantumState(FULL, np.array([1.0, 1.0, 0, 0]), 2).validate()

    def test_mixed_checks(self):
        QuantumState(FULL, np.eye(4) / 4, 2).validate()
        with pytest.raises(ValidationError):
            QuantumState(FULL, np.diag([1.2, -0.2, 0, 0]), 2).validate()

    def test_sector_full_agree(self):
        v = np.array([1, 1], complex) / np.sqrt(2)
        s = product_state(3, {0: v}, SECTOR)
        f = product_state(3, {0: v}, FULL)
        np.testing.assert_allclose(s.to_full().data, f.data, atol=1e-15)
        np.testing.assert_allclose(s.populations(), [0.5, 0, 0], atol=1e-15)

    def test_reduced_state(self):
        v = np.array([0.6, 0.8j])
        full = product_state(3, {1: v}).data
        np.testing.assert_allclose(reduced_qubit(full, 1, 3), np.outer(v, v.conj()), atol=1e-15)


class TestLabHamiltonian:
    def test_static_two_qubit_block(self):
        ch = make_chain([5.0, 5.2848], [16.68])
        h = build_lab_hamiltonian(ch, _idle(ch), 0.0)
        # |ge> and |eg> are indices 1 and 2 (qubit 0 most significant)
        assert abs(h[1, 2]) == pytest.approx(16.68 * MHZ, rel=1e-14)
        assert abs(h[0, 3]) == pytest.approx(16.68 * MHZ, rel=1e-14)

    def test_no_coupling_is_diagonal(self):
        ch = make_chain([5.0, 5.3], [1e-300])
        h = build_lab_hamiltonian(ch, _idle(ch), 3.0)
        assert np.max(np.abs(h - np.diag(np.diag(h)))) < 1e-12
        w = ch.operating_freqs * GHZ
        expect = sorted(s0 * w[0] / 2 + s1 * w[1] / 2 for s0 in (1, -1) for s1 in (1, -1))
        np.testing.assert_allclose(sorted(np.diag(h).real), expect, rtol=1e-14)

    def test_modulated_frequency_at_phase_quarter(self):
        ch = make_chain([5.0, 5.25, 5.0], [10.0, 10.0])
        mods = [ModulationSpec(50.0, 250.0, np.pi / 2), ModulationSpec(0.0, 250.0)]
        h = build_lab_hamiltonian(ch, make_schedule(ch, mods, 84.0), 0.0)
        # energy splitting of qubit 1 with the others in |g>: index 0 (ggg) vs 2 (geg)
        split = (h[0, 0] - h[2, 2]).real
        assert split == pytest.approx(5.25 * GHZ + 50.0 * MHZ, rel=1e-13)

    @pytest.mark.parametrize("frame", [LAB, ROTATING])
    def test_hermitian(self, chain, schedule, frame):
        for t in (0.0, 13.7, 84.0):
            h = build_lab_hamiltonian(chain, schedule, t, frame=frame)
            assert np.max(np.abs(h - h.conj().T)) <= 1e-14 * max(1.0, np.max(np.abs(h)))

    def test_negative_time(self, chain, schedule):
        with pytest.raises(ValidationError):
            build_lab_hamiltonian(chain, schedule, -1.0)


class TestEffectiveHamiltonian:
    def test_zero_modulation_gives_zero(self, chain):
        assert np.all(build_effective_hamiltonian(chain, _idle(chain)) == 0)

    def test_perfect_ratio(self, schedule, chain):
        h = build_effective_hamiltonian(chain, schedule)
        off = np.abs(np.diag(h, -1))[1:]
        np.testing.assert_allclose(off / off[0], [1, 2 / np.sqrt(3), 1], rtol=1e-10)
        assert np.all(h[0] == 0) and np.all(h[:, 0] == 0)
        assert np.max(np.abs(h - h.conj().T)) <= 1e-14

    def test_single_link_value(self):
        ch = make_chain([5.0, 5.3], [16.68])
        sched = make_schedule(ch, [ModulationSpec(300.0, 300.0)], 84.0)
        h = build_effective_hamiltonian(ch, sched)
        assert abs(h[2, 1]) / MHZ == pytest.approx(16.68 * 0.44005058574493355, rel=1e-12)
        assert abs(h[2, 1]) / MHZ == pytest.approx(7.34, abs=0.005)

    def test_resonance_violation(self, chain, schedule):
        mods = list(schedule.modulations)
        m = mods[1]
        mods[1] = ModulationSpec(m.amplitude, m.frequency + 0.01, m.phase)
        with pytest.raises(ResonanceError) as err:
            build_effective_hamiltonian(chain, make_schedule(chain, mods, 84.0))
        assert err.value.link == 2

    def test_full_and_sector_agree(self, chain, schedule):
        full = build_effective_hamiltonian(chain, schedule, FULL)
        sec = build_effective_hamiltonian(chain, schedule, SECTOR)
        np.testing.assert_allclose(project_to_sector(full, chain.n), sec, atol=1e-15)

    def test_static_xy_band(self):
        # uniform XY chain: single-excitation energies 2 g cos(k pi / (N + 1))
        n, g = 6, 10.0
        h = ops.embed(np.zeros((2, 2)), 0, n)
        for j in range(1, n):
            term = g * MHZ * ops.sp(j - 1, n) @ ops.sm(j, n)
            h = h + term + term.conj().T
        ev = np.linalg.eigvalsh(project_to_sector(h, n)[1:, 1:])
        k = np.arange(1, n + 1)
        np.testing.assert_allclose(ev, np.sort(2 * g * MHZ * np.cos(k * np.pi / (n + 1))), atol=1e-12)
