"""Single-qubit operators and their embedding in the chain Hilbert space.

Basis per qubit is (|g>, |e>) and sigma_z = |g><g| - |e><e|, so the Bloch z
component is P_g - P_e. ``SIGMA_PLUS`` = |g><e| and ``SIGMA_MINUS`` = |e><g|;
with this choice sigma+_{j-1} sigma-_j hops an excitation from qubit j-1 to
qubit j. All commutation relations are the standard ones.
"""

from functools import lru_cache

import numpy as np

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

#: e -> g
LOWER = SIGMA_PLUS
#: g -> e
RAISE = SIGMA_MINUS
PROJ_E = np.array([[0, 0], [0, 1]], dtype=complex)

PAULI_BASIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)


def embed(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """op acting on ``site`` of an n-qubit register (qubit 0 most significant)."""
    return np.kron(np.kron(np.eye(2**site), op), np.eye(2 ** (n - site - 1)))


def embed_pair(op_a: np.ndarray, a: int, op_b: np.ndarray, b: int, n: int) -> np.ndarray:
    return embed(op_a, a, n) @ embed(op_b, b, n)


@lru_cache(maxsize=None)
def _cached(name: str, site: int, n: int) -> np.ndarray:
    op = {"z": SIGMA_Z, "p": SIGMA_PLUS, "m": SIGMA_MINUS, "x": SIGMA_X, "e": PROJ_E}[name]
    out = embed(op, site, n)
    out.setflags(write=False)
    return out


def sz(site, n):
    return _cached("z", site, n)


def sp(site, n):
    return _cached("p", site, n)


def sm(site, n):
    return _cached("m", site, n)


def sx(site, n):
    return _cached("x", site, n)


def proj_e(site, n):
    return _cached("e", site, n)
