"""Fixed-step RK4 for linear ODEs dy/dt = G(t) y with a sparse harmonic generator.

G(t) = sum_k amp_k exp(i (freq_k t + phase_k)) A_k, each A_k stored as COO
entries tagged with its term index. A static part is a term with freq 0.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def _coefficients(t, amp, freq, phase, out):
    for k in range(amp.shape[0]):
        out[k] = amp[k] * np.exp(1j * (freq[k] * t + phase[k]))


@numba.njit(cache=True)
def _apply(coef, term, row, col, val, y, out):
    out[:] = 0.0
    for e in range(val.shape[0]):
        out[row[e]] += coef[term[e]] * val[e] * y[col[e]]


@numba.njit(cache=True)
def rk4_linear(y0, t_samples, substeps, amp, freq, phase, term, row, col, val):
    """Integrate from t_samples[0]; returns the state at every sample time.

    Interval i (t_samples[i] -> t_samples[i+1]) is split into substeps[i]
    equal steps.
    """
    d = y0.shape[0]
    nk = amp.shape[0]
    out = np.empty((t_samples.shape[0], d), dtype=np.complex128)
    y = y0.copy()
    out[0] = y
    c0 = np.empty(nk, dtype=np.complex128)
    c1 = np.empty(nk, dtype=np.complex128)
    c2 = np.empty(nk, dtype=np.complex128)
    k1 = np.empty(d, dtype=np.complex128)
    k2 = np.empty(d, dtype=np.complex128)
    k3 = np.empty(d, dtype=np.complex128)
    k4 = np.empty(d, dtype=np.complex128)
    tmp = np.empty(d, dtype=np.complex128)
    for i in range(t_samples.shape[0] - 1):
        t0 = t_samples[i]
        m = substeps[i]
        h = (t_samples[i + 1] - t0) / m
        _coefficients(t0, amp, freq, phase, c0)
        for s in range(m):
            t = t0 + s * h
            _coefficients(t + 0.5 * h, amp, freq, phase, c1)
            _coefficients(t + h, amp, freq, phase, c2)
            _apply(c0, term, row, col, val, y, k1)
            for q in range(d):
                tmp[q] = y[q] + 0.5 * h * k1[q]
            _apply(c1, term, row, col, val, tmp, k2)
            for q in range(d):
                tmp[q] = y[q] + 0.5 * h * k2[q]
            _apply(c1, term, row, col, val, tmp, k3)
            for q in range(d):
                tmp[q] = y[q] + h * k3[q]
            _apply(c2, term, row, col, val, tmp, k4)
            for q in range(d):
                y[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
            for k in range(nk):
                c0[k] = c2[k]
        out[i + 1] = y
    return out


class SparseGenerator:
    """Packed COO form of sum_k c_k(t) A_k for :func:`rk4_linear`."""

    def __init__(self, terms, dim):
        """``terms`` is an iterable of (matrix, amp, freq, phase)."""
        amp, freq, phase = [], [], []
        tags, rows, cols, vals = [], [], [], []
        for k, (mat, a, f, p) in enumerate(terms):
            r, c = np.nonzero(mat)
            amp.append(a)
            freq.append(f)
            phase.append(p)
            tags.append(np.full(r.size, k, dtype=np.int64))
            rows.append(r)
            cols.append(c)
            vals.append(np.asarray(mat)[r, c])
        self.dim = dim
        self.amp = np.array(amp, dtype=np.complex128)
        self.freq = np.array(freq, dtype=np.float64)
        self.phase = np.array(phase, dtype=np.float64)
        cat = lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt)  # noqa: E731
        self.term = cat(tags, np.int64)
        self.row = cat(rows, np.int64)
        self.col = cat(cols, np.int64)
        self.val = cat(vals, np.complex128)

    def integrate(self, y0, t_samples, substeps):
        return rk4_linear(
            np.ascontiguousarray(y0, dtype=np.complex128),
            np.ascontiguousarray(t_samples, dtype=np.float64),
            np.ascontiguousarray(substeps, dtype=np.int64),
            self.amp,
            self.freq,
            self.phase,
            self.term,
            self.row,
            self.col,
            self.val,
        )
