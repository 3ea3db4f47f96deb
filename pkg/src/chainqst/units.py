"""Unit conversions.

Configuration values follow lab convention: qubit frequencies in GHz, couplings
and modulation parameters in MHz (cyclic, i.e. the value of x/2pi), schedule
times in ns and coherence times in us. Internally every rate is an angular
frequency in rad/ns and every time is in ns.
"""

import numpy as np

TWO_PI = 2.0 * np.pi

#: rad/ns per GHz (cyclic)
GHZ = TWO_PI
#: rad/ns per MHz (cyclic)
MHZ = TWO_PI * 1e-3
#: ns per us
US = 1e3


def mhz(x):
    """Cyclic MHz -> rad/ns."""
    return np.multiply(x, MHZ)


def ghz(x):
    """Cyclic GHz -> rad/ns."""
    return np.multiply(x, GHZ)


def to_mhz(w):
    """rad/ns -> cyclic MHz (works for complex couplings too)."""
    return w / MHZ
