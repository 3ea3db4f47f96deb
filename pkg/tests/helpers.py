"""Shared chain builders for the test suite."""

from chainqst.model import ChainConfig, QubitParams


def make_chain(freqs_ghz, couplings_mhz, t1=20.0, t2_star=10.0):
    qubits = [QubitParams(f, f, t1, t2_star) for f in freqs_ghz]
    return ChainConfig(tuple(qubits), tuple(couplings_mhz))


def alternating_chain(n, detuning_mhz=250.0, coupling_mhz=17.0, base_ghz=5.0):
    """Chain whose detunings alternate +D, -D, ... so that every link can be driven."""
    freqs = [base_ghz + (detuning_mhz * 1e-3 if k % 2 else 0.0) for k in range(n)]
    return make_chain(freqs, [coupling_mhz] * (n - 1))
