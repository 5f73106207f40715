"""Complex-vector helpers shared by every other module.

Signals are plain complex128 numpy arrays wrapped in :class:`ComplexSignal`
when the sample rate matters. All filtering assumes zero prehistory so that
output length always equals input length.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import signal as sps


class NumericError(ArithmeticError):
    """Raised when a computation produces or receives non-finite values."""


class DivergenceError(NumericError):
    """Raised when adaptive learning blows up."""


@dataclass(frozen=True)
class ComplexSignal:
    """Complex baseband samples together with their sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128).reshape(-1)
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    def with_samples(self, samples) -> "ComplexSignal":
        return ComplexSignal(samples, self.sample_rate_hz)

    @property
    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


def as_samples(x) -> np.ndarray:
    """Return the complex128 sample array of a signal or array-like."""
    if isinstance(x, ComplexSignal):
        return x.samples
    return np.asarray(x, dtype=np.complex128).reshape(-1)


def fir_filter(taps, x):
    """Causal FIR filtering with zero prehistory.

    ``y[n] = sum_k taps[k] * x[n-k]``; the output has the same length as the
    input. A :class:`ComplexSignal` input yields a :class:`ComplexSignal`.
    """
    taps = np.asarray(taps, dtype=np.complex128).reshape(-1)
    if taps.size == 0:
        raise ValueError("FIR filter needs at least one tap")
    y = sps.lfilter(taps, [1.0], as_samples(x))
    if isinstance(x, ComplexSignal):
        return x.with_samples(y)
    return y


def solve_hermitian(a, b) -> np.ndarray:
    """Solve ``A x = b`` for Hermitian positive (semi)definite ``A``.

    The system is first equilibrated to unit diagonal (``D^-1 A D^-1`` with
    ``D = sqrt(diag(A))``), which removes the column scaling of polynomial
    bases. A load of ``1e-8`` is then added to the scaled diagonal before
    the Cholesky factorisation, and two refinement sweeps against the
    unloaded matrix remove the loading bias on well-conditioned systems
    while leaving directions far below the load regularised.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError("right-hand side does not match matrix size")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise NumericError("non-finite entries in linear system")
    diag = a.diagonal().real
    if np.any(diag <= 0):
        raise NumericError("matrix is not positive definite")
    d = np.sqrt(diag)
    scaled = a / np.outer(d, d)
    dim = a.shape[0]
    try:
        factor = np.linalg.cholesky(scaled + 1e-8 * np.eye(dim))
    except np.linalg.LinAlgError as exc:
        raise NumericError("matrix is not positive definite") from exc
    rhs = b / (d[:, None] if b.ndim == 2 else d)

    y = sla.cho_solve((factor, True), rhs)
    for _ in range(2):
        y = y + sla.cho_solve((factor, True), rhs - scaled @ y)
    return y / (d[:, None] if b.ndim == 2 else d)


def inverse_hermitian(a) -> np.ndarray:
    """Loaded inverse of a Hermitian matrix, via :func:`solve_hermitian`."""
    a = np.asarray(a, dtype=np.complex128)
    return solve_hermitian(a, np.eye(a.shape[0], dtype=np.complex128))


def estimate_delay_and_gain(reference, observed, max_lag: int | None = None):
    """Integer delay and complex gain mapping ``reference`` onto ``observed``.

    The delay maximises ``|xcorr|`` over integer lags (positive means
    ``observed`` lags ``reference``). The gain is the least-squares scalar
    ``g`` minimising ``sum |observed[n+delay] - g*reference[n]|^2`` over the
    overlapping samples.

    Returns:
        tuple: ``(delay, gain)``
    """
    ref = as_samples(reference)
    obs = as_samples(observed)
    if ref.size < 64 or obs.size < 64:
        raise ValueError("alignment needs at least 64 samples per signal")
    if not np.any(ref):
        raise ValueError("reference signal is all zeros")
    xc = sps.correlate(obs, ref, mode="full", method="fft")
    lags = sps.correlation_lags(obs.size, ref.size, mode="full")
    if max_lag is not None:
        keep = np.abs(lags) <= max_lag
        xc, lags = xc[keep], lags[keep]
    delay = int(lags[np.argmax(np.abs(xc))])
    r, o = _overlap(ref, obs, delay)
    gain = np.vdot(r, o) / np.vdot(r, r).real
    return delay, complex(gain)


def _overlap(ref, obs, delay):
    if delay >= 0:
        n = min(ref.size, obs.size - delay)
        return ref[:n], obs[delay:delay + n]
    n = min(ref.size + delay, obs.size)
    return ref[-delay:-delay + n], obs[:n]


def align_and_normalize(reference, observed, max_lag: int | None = None):
    """Shift ``observed`` by the estimated delay and divide out the gain.

    The result has the length of ``observed``; samples shifted in from
    outside the record are zero.

    Returns:
        tuple: ``(normalized, delay, gain)``
    """
    obs = as_samples(observed)
    delay, gain = estimate_delay_and_gain(reference, obs, max_lag=max_lag)
    out = np.zeros_like(obs)
    if delay >= 0:
        out[:obs.size - delay] = obs[delay:]
    else:
        out[-delay:] = obs[:obs.size + delay]
    out /= gain
    if isinstance(observed, ComplexSignal):
        out = observed.with_samples(out)
    return out, delay, gain


def normalize_peak(x, peak: float):
    """Scale a signal so that its largest magnitude equals ``peak``."""
    s = as_samples(x)
    current = np.max(np.abs(s))
    if current == 0:
        raise ValueError("cannot normalise an all-zero signal")
    y = s * (peak / current)
    if isinstance(x, ComplexSignal):
        return x.with_samples(y)
    return y
