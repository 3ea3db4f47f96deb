"""Bessel coupling map: effective exchange strength of a parametrically driven link."""

import numpy as np
from scipy import special

from ..errors import ValidationError

#: first maximum of J_1
J1_ARGMAX = 1.8411837813406593
J1_MAX = 0.5818652242815963

_X_LIMIT = 50.0


def bessel(order: int, x):
    """J_order(x) for order 0 or 1, |x| <= 50."""
    if order not in (0, 1):
        raise ValidationError(f"only orders 0 and 1 are supported, got {order}", "order")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > _X_LIMIT) or not np.all(np.isfinite(xa)):
        raise ValidationError(f"argument outside |x| <= {_X_LIMIT}", "x")
    out = special.j0(xa) if order == 0 else special.j1(xa)
    return float(out) if np.ndim(x) == 0 else out


def effective_coupling(j: int, g: float, alpha_prev, alpha: float, phi: float) -> complex:
    """g'_j for link j (between qubits j-1 and j).

    ``alpha_prev`` is ignored for j = 1, where the upstream qubit is not
    modulated. Units of the result follow ``g``.
    """
    if j < 1:
        raise ValidationError(f"link index must be >= 1, got {j}", "j")
    if alpha < 0 or (j > 1 and (alpha_prev is None or alpha_prev < 0)):
        raise ValidationError("modulation indices must be >= 0", "alpha")
    mag = g * bessel(1, alpha)
    if j == 1:
        return mag * np.exp(1j * (phi + np.pi / 2))
    mag *= bessel(0, alpha_prev)
    if j % 2 == 0:
        return mag * np.exp(-1j * (phi - np.pi / 2))
    return mag * np.exp(1j * (phi + np.pi / 2))


def effective_couplings(static_couplings, alphas, phases) -> np.ndarray:
    """All g'_j of a chain at once; inputs indexed by link j-1."""
    out = np.empty(len(static_couplings), dtype=complex)
    for i, (g, a, p) in enumerate(zip(static_couplings, alphas, phases)):
        j = i + 1
        out[i] = effective_coupling(j, g, alphas[i - 1] if j > 1 else None, a, p)
    return out
