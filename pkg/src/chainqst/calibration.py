"""Flux-crosstalk orthogonalization and flux-line pulse predistortion."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericalError, ValidationError

MAX_CONDITION = 1e6


@dataclass(frozen=True)
class CrosstalkMatrix:
    """Line-to-qubit frequency response M_z and its inverse."""

    response: np.ndarray
    correction: np.ndarray
    residual: float

    @classmethod
    def from_response(cls, m) -> "CrosstalkMatrix":
        inv = orthogonalize(m)
        m = np.asarray(m, float)
        return cls(m, inv, float(np.max(np.abs(m @ inv - np.eye(len(m))))))

    @classmethod
    def from_correction(cls, m_tilde) -> "CrosstalkMatrix":
        m_tilde = np.asarray(m_tilde, float)
        resp = orthogonalize(m_tilde)
        return cls(resp, m_tilde, float(np.max(np.abs(resp @ m_tilde - np.eye(len(resp))))))


def diagonally_dominant(m) -> bool:
    m = np.abs(np.asarray(m, float))
    d = np.diag(m)
    return bool(np.all(d > m.sum(axis=1) - d))


def orthogonalize(m) -> np.ndarray:
    """Inverse of the crosstalk response matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"response matrix must be square, got {m.shape}", "M_z")
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond >= MAX_CONDITION:
        raise NumericalError(f"response matrix singular or ill-conditioned (cond={cond:.3g})")
    if not diagonally_dominant(m):
        warnings.warn("crosstalk matrix is not diagonally dominant", RuntimeWarning, stacklevel=2)
    return np.linalg.inv(m)


def apply_correction(correction, desired) -> np.ndarray:
    """Line drives that realise ``desired`` per-qubit frequency shifts."""
    c = np.asarray(correction, float)
    d = np.asarray(desired, float)
    if c.ndim != 2 or c.shape[1] != d.shape[0]:
        raise ValidationError(f"dimension mismatch: {c.shape} vs {d.shape}", "desired")
    return c @ d


# ------------------------------------------------------------------ line response

@dataclass(frozen=True)
class LineResponse:
    """Impulse response h[k] of a flux line sampled at ``sample_rate`` GS/s.

    Use :meth:`parametric` for the built-in model: step response
    1 - exp(-t/rise) + A exp(-t/decay) sin(2 pi f t), i.e. a first-order rise
    with one damped ringing mode (times in ns, f in MHz).
    """

    samples: np.ndarray
    sample_rate: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        h = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", h)
        if self.sample_rate <= 0:
            raise ValidationError("sample rate must be > 0", "sample_rate")
        if h.ndim != 1 or h.size == 0:
            raise ValidationError("impulse response must be a non-empty 1-D array", "samples")
        dc = h.sum()
        if not 0.5 < dc < 2.0:
            raise ValidationError(f"DC gain {dc:.4g} outside (0.5, 2.0)", "samples")

    @classmethod
    def parametric(
        cls,
        sample_rate: float = 2.0,
        rise_time: float = 2.0,
        ringing_amplitude: float = 0.05,
        ringing_frequency: float = 100.0,
        ringing_decay: float = 10.0,
        length: int = 256,
    ) -> "LineResponse":
        t = np.arange(length + 1) / sample_rate
        step = 1.0 - np.exp(-t / rise_time)
        step += ringing_amplitude * np.exp(-t / ringing_decay) * np.sin(2e-3 * np.pi * ringing_frequency * t)
        # sample k holds the response to a step that switched on at k = 0
        s = step[1:]
        h = np.diff(s, prepend=0.0)
        params = dict(
            sample_rate=sample_rate,
            rise_time=rise_time,
            ringing_amplitude=ringing_amplitude,
            ringing_frequency=ringing_frequency,
            ringing_decay=ringing_decay,
            length=length,
        )
        return cls(h, sample_rate, params)

    @property
    def dc_gain(self) -> float:
        return float(self.samples.sum())

    def step_response(self, n: int) -> np.ndarray:
        return convolve(np.ones(n), self)


def _next_pow2(n: int) -> int:
    return 1 << max(int(n) - 1, 1).bit_length()


def convolve(x, response: LineResponse) -> np.ndarray:
    """Causal linear convolution truncated to len(x)."""
    x = np.asarray(x, dtype=float)
    return np.convolve(x, response.samples)[: x.size]


@dataclass(frozen=True)
class Deconvolution:
    drive: np.ndarray
    regularization: float
    residual: float
    """max |h * x - y_d| over the waveform"""


def deconvolve(target, response: LineResponse, regularization: Optional[float] = None) -> Deconvolution:
    """Tikhonov-regularised spectral inverse of the line response.

    X = Y_d H* / (|H|^2 + lam). ``regularization`` defaults to 1e-6 of the
    peak |H|^2. Signals are zero-padded to a power of two of at least twice
    the combined length so that circular wrap-around stays outside the
    returned window.
    """
    y = np.asarray(target, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise ValidationError("target waveform must be a non-empty 1-D array", "target")
    h = response.samples
    nfft = _next_pow2(2 * (y.size + h.size))
    hf = np.fft.rfft(h, nfft)
    yf = np.fft.rfft(y, nfft)
    h2 = np.abs(hf) ** 2
    lam = 1e-6 * h2.max() if regularization is None else float(regularization)
    if lam < 0:
        raise ValidationError(f"regularization must be >= 0, got {lam}", "regularization")
    if lam == 0:
        live = np.abs(yf) > 1e-12 * np.abs(yf).max() if np.abs(yf).max() > 0 else np.zeros(yf.size, bool)
        if np.any(h2[live] < 1e-20 * h2.max()):
            raise NumericalError("response has a near-zero band where the target has energy; use lam > 0")
    xf = yf * np.conj(hf) / (h2 + lam)
    x = np.fft.irfft(xf, nfft)[: y.size]
    resid = float(np.max(np.abs(convolve(x, response) - y)))
    return Deconvolution(x, lam, resid)


@dataclass(frozen=True)
class StepTrace:
    times: np.ndarray
    trace: np.ndarray
    target: np.ndarray
    settling_deviation: float
    settle_ns: float


def simulate_step_response(
    response: LineResponse,
    drive,
    target=None,
    scale: float = 1.0,
    step_index: int = 0,
    settle_ns: float = 5.0,
) -> StepTrace:
    """Qubit-frequency trace seen through the line, and its settling error.

    ``scale`` converts line units to frequency (e.g. MHz per unit drive).
    The settling deviation is max |trace - target| / |step height| over
    samples at least ``settle_ns`` after ``step_index``; ``target`` defaults
    to the drive itself (an ideal line).
    """
    drive = np.asarray(drive, dtype=float)
    trace = scale * convolve(drive, response)
    tgt = scale * (drive if target is None else np.asarray(target, float))
    times = np.arange(drive.size) / response.sample_rate
    start = step_index + int(np.ceil(settle_ns * response.sample_rate))
    height = np.max(np.abs(tgt)) if tgt.size else 0.0
    if start >= drive.size or height == 0:
        dev = 0.0
    else:
        dev = float(np.max(np.abs(trace[start:] - tgt[start:])) / height)
    return StepTrace(times, trace, tgt, dev, settle_ns)


def step_waveform(n: int, step_index: int = 0, height: float = 1.0) -> np.ndarray:
    y = np.zeros(n)
    y[step_index:] = height
    return y
