"""Sample-adaptive parameter learning and the indirect-learning loop.

The ``*_step`` functions apply one update to a copy of a model and are the
reference for the update rules. The ``train_*`` functions stream a whole
record through the same rules in place, which is what :func:`run_ila` uses.
"""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .models import MpModel, SmpModel, SphModel, delayed, envelope, mp_basis
from .numerics import DivergenceError, NumericError, align_and_normalize, as_samples, inverse_hermitian

log = logging.getLogger(__name__)


@dataclass
class LearningConfig:
    mu_h: float = 0.01
    mu_c: float = 0.05
    mu_q: float | Sequence[float] = 0.05
    mu_w: float = 0.002
    ila_iterations: int = 5
    samples_per_iteration: int | None = None
    autocorr_block: int = 4096
    normalize_step: bool = False
    divergence_factor: float = 10.0
    divergence_block: int = 1000

    def __post_init__(self):
        mus = [self.mu_h, self.mu_c, self.mu_w, *np.atleast_1d(self.mu_q)]
        if any(not (m >= 0 and np.isfinite(m)) for m in mus):
            raise ValueError("step sizes must be finite and non-negative")
        if self.ila_iterations < 1:
            raise ValueError("need at least one ILA iteration")
        if self.autocorr_block < 1:
            raise ValueError("autocorrelation block must be positive")

    def branch_steps(self, memory: int) -> np.ndarray:
        mu = np.atleast_1d(np.asarray(self.mu_q, dtype=float))
        if mu.size == 1:
            return np.full(memory, mu[0])
        if mu.size != memory:
            raise ValueError(f"got {mu.size} SMP step sizes for {memory} branches")
        return mu

    def describe_steps(self) -> str:
        return f"mu_h={self.mu_h}, mu_c={self.mu_c}, mu_q={self.mu_q}, mu_w={self.mu_w}"


def _check_error(e, cfg: LearningConfig):
    if not np.isfinite(e):
        raise NumericError(f"non-finite error sample; step sizes {cfg.describe_steps()}")


# -- single-sample reference updates ---------------------------------------

def _window_weights(lut, z_window, magnitude):
    offset, w = lut.weights(envelope(z_window, magnitude))
    cols = offset[:, None] + np.arange(lut.config.order + 1)
    return cols, w


def sph_step(model: SphModel, z_window, x_dpd: complex, cfg: LearningConfig, s_window=None):
    """One simultaneous update of the FIR taps and the control points.

    Args:
        z_window: ``[z[n], z[n-1], ..., z[n-M+1]]``.
        s_window: injected samples for the same window. Computed from the
            current control points when omitted.

    Returns:
        tuple: ``(updated_model, error)``
    """
    z = np.asarray(z_window, dtype=np.complex128)
    cols, w = _window_weights(model.lut, z, model.magnitude)
    c = model.lut.control_points
    if s_window is None:
        s = z + z * np.sum(w * c[cols], axis=1)
    else:
        s = np.asarray(s_window, dtype=np.complex128)
    h = model.taps
    e = complex(x_dpd - h @ s)
    _check_error(e, cfg)
    new = model.copy()
    new.taps = h + cfg.mu_h * e * s.conj()
    direction = np.zeros_like(c)
    np.add.at(direction, cols.ravel(), (w * (z.conj() * h.conj())[:, None]).ravel())
    new.lut.control_points = c + cfg.mu_c * e * direction
    return new, e


def smp_step(model: SmpModel, z_window, x_dpd: complex, cfg: LearningConfig):
    """One update of every SMP branch from the same error sample."""
    z = np.asarray(z_window, dtype=np.complex128)
    cols, w = _window_weights(model.luts[0], z, model.magnitude)
    q = np.stack([lut.control_points for lut in model.luts])
    rows = np.arange(model.memory)[:, None]
    y = z[0] + np.sum(z * np.sum(w * q[rows, cols], axis=1))
    e = complex(x_dpd - y)
    _check_error(e, cfg)
    mu = cfg.branch_steps(model.memory)
    new = model.copy()
    for m, lut in enumerate(new.luts):
        lut.control_points[cols[m]] += mu[m] * e * z[m].conj() * w[m]
    return new, e


def autocorrelation(basis_rows) -> np.ndarray:
    """``R = mean(l_n l_n^H)`` over the rows of a regressor block."""
    rows = np.asarray(basis_rows, dtype=np.complex128)
    return rows.T @ rows.conj() / rows.shape[0]


def mp_step(model: MpModel, l_n, x_dpd: complex, r_inv, cfg: LearningConfig):
    """Self-orthogonalising LMS update ``w += mu e R^-1 l*``."""
    l_n = np.asarray(l_n, dtype=np.complex128)
    if l_n.size != model.weights.size:
        raise ValueError("basis vector does not match weight count")
    e = complex(x_dpd - model.weights @ l_n)
    _check_error(e, cfg)
    new = model.copy()
    new.weights = model.weights + cfg.mu_w * e * (np.asarray(r_inv) @ l_n.conj())
    return new, e


# -- streaming trainers ----------------------------------------------------

class _Monitor:
    """Block-wise divergence watch on the squared error."""

    def __init__(self, cfg: LearningConfig):
        self.cfg = cfg
        self.reference = None

    def check(self, err: np.ndarray, stop: int):
        block = self.cfg.divergence_block
        if stop % block:
            return
        mean = float(np.mean(np.abs(err[stop - block:stop]) ** 2))
        if not np.isfinite(mean):
            raise DivergenceError(
                f"error became non-finite after {stop} samples; "
                f"step sizes {self.cfg.describe_steps()}")
        if self.reference is None:
            self.reference = max(mean, 1e-30)
        elif mean > self.cfg.divergence_factor * self.reference:
            raise DivergenceError(
                f"mean squared error grew {mean / self.reference:.1f}x within one iteration "
                f"(after {stop} samples); step sizes {self.cfg.describe_steps()}")


def _quiet(fn):
    """Let overflow run to inf/nan; the monitor reports it as divergence."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(over="ignore", invalid="ignore"):
            return fn(*args, **kwargs)
    return wrapper


def _windows(values: np.ndarray, memory: int) -> np.ndarray:
    """``out[n, m] = values[n-m]`` with zero prehistory."""
    return np.stack([delayed(values, m) for m in range(memory)], axis=1)


def _step_scale(z, cfg):
    if not cfg.normalize_step:
        return 1.0
    return 1.0 / max(float(np.mean(np.abs(z) ** 2)), 1e-30)


@_quiet
def train_sph(model: SphModel, z, target, cfg: LearningConfig) -> np.ndarray:
    """Stream ``z`` through the SPH rules in place; returns the error sequence.

    Injected samples enter the delay line once, with the control points in
    force at their arrival time.
    """
    z = as_samples(z)
    x = as_samples(target)
    n_taps, order = model.memory, model.lut.config.order
    offset, w = model.lut.weights(envelope(z, model.magnitude))
    cols = offset[:, None] + np.arange(order + 1)
    zw = _windows(z, n_taps)
    col_win = np.stack([_delay_rows(cols, m) for m in range(n_taps)], axis=1)
    w_win = np.stack([_delay_rows(w, m) for m in range(n_taps)], axis=1)
    c = model.lut.control_points
    h = model.taps
    scale = _step_scale(z, cfg)
    mu_h, mu_c = cfg.mu_h * scale, cfg.mu_c * scale
    s_line = np.zeros(n_taps, dtype=np.complex128)
    err = np.empty(z.size, dtype=np.complex128)
    monitor = _Monitor(cfg)
    for n in range(z.size):
        zn = z[n]
        s_line[1:] = s_line[:-1]
        s_line[0] = zn + zn * (w[n] @ c[cols[n]])
        e = x[n] - h @ s_line
        err[n] = e
        v = (zw[n].conj() * h.conj())[:, None] * w_win[n]
        h += mu_h * e * s_line.conj()
        np.add.at(c, col_win[n].ravel(), (mu_c * e) * v.ravel())
        monitor.check(err, n + 1)
    return err


def _delay_rows(a: np.ndarray, d: int) -> np.ndarray:
    out = np.zeros_like(a)
    if d < a.shape[0]:
        out[d:] = a[:a.shape[0] - d]
    return out


@_quiet
def train_smp(model: SmpModel, z, target, cfg: LearningConfig) -> np.ndarray:
    """Stream ``z`` through the SMP rules in place; returns the error sequence.

    Regressors are computed once per sample and reused by the delayed
    branches.
    """
    z = as_samples(z)
    x = as_samples(target)
    memory, order = model.memory, model.config.order
    offset, w = model.luts[0].weights(envelope(z, model.magnitude))
    cols = offset[:, None] + np.arange(order + 1)
    zw = _windows(z, memory)
    col_win = np.stack([_delay_rows(cols, m) for m in range(memory)], axis=1)
    w_win = np.stack([_delay_rows(w, m) for m in range(memory)], axis=1)
    q = np.stack([lut.control_points for lut in model.luts])
    rows = np.arange(memory)[:, None]
    mu = cfg.branch_steps(memory)[:, None] * _step_scale(z, cfg)
    err = np.empty(z.size, dtype=np.complex128)
    monitor = _Monitor(cfg)
    for n in range(z.size):
        zn = zw[n]
        cn, wn = col_win[n], w_win[n]
        e = x[n] - z[n] - zn @ np.sum(wn * q[rows, cn], axis=1)
        err[n] = e
        q[rows, cn] += (mu * (e * zn.conj())[:, None]) * wn
        monitor.check(err, n + 1)
    for m, lut in enumerate(model.luts):
        lut.control_points = q[m].copy()
    return err


@_quiet
def train_mp(model: MpModel, z, target, cfg: LearningConfig, r_inv=None) -> np.ndarray:
    """Self-orthogonalising LMS over a record, in place.

    ``R`` is estimated from the first ``autocorr_block`` regressors and then
    frozen for the rest of the record.
    """
    x = as_samples(target)
    basis = mp_basis(z, model.order, model.memory)
    if r_inv is None:
        r_inv = inverse_hermitian(autocorrelation(basis[:cfg.autocorr_block]))
    direction = basis.conj() @ np.asarray(r_inv).T
    mu = cfg.mu_w * _step_scale(z, cfg)
    wts = model.weights
    err = np.empty(basis.shape[0], dtype=np.complex128)
    monitor = _Monitor(cfg)
    for n in range(basis.shape[0]):
        e = x[n] - basis[n] @ wts
        err[n] = e
        wts += (mu * e) * direction[n]
        monitor.check(err, n + 1)
    return err


def train(model, z, target, cfg: LearningConfig) -> np.ndarray:
    if isinstance(model, SphModel):
        return train_sph(model, z, target, cfg)
    if isinstance(model, SmpModel):
        return train_smp(model, z, target, cfg)
    if isinstance(model, MpModel):
        return train_mp(model, z, target, cfg)
    raise TypeError(f"cannot train {type(model).__name__}")


# -- indirect learning -----------------------------------------------------

@dataclass
class IlaSession:
    config: LearningConfig
    postdistorter: object
    error_history: list = field(default_factory=list)
    alignment: list = field(default_factory=list)
    metrics: list = field(default_factory=list)

    @property
    def predistorter(self):
        return self.postdistorter


def run_ila(pa, model, source: Callable[[int], object], cfg: LearningConfig,
            seed: int = 0, evaluate: Callable | None = None) -> IlaSession:
    """Train ``model`` as a postdistorter and copy it forward each iteration.

    Args:
        pa: object with ``apply(x, seed)`` (see :mod:`splinedpd.pa`).
        model: initial model, normally an identity configuration.
        source: ``source(iteration)`` returns the next drive signal.
        seed: base seed for the PA noise; iteration ``k`` uses ``seed + k``.
        evaluate: optional ``evaluate(predistorter, iteration)`` returning a
            dict of metrics. It is called with the predistorter in force
            during each iteration and once more with the trained model
            (``iteration == ila_iterations``, ``mean_sq_error`` NaN).

    Raises:
        DivergenceError: if the error blows up within an iteration.
    """
    post = model.copy()
    pre = model.copy()
    session = IlaSession(cfg, post)
    for it in range(cfg.ila_iterations):
        x = as_samples(source(it))
        if cfg.samples_per_iteration:
            x = x[:cfg.samples_per_iteration]
        x_dpd = as_samples(pre.forward(x))
        y = as_samples(pa.apply(x_dpd, seed=seed + it))
        z, delay, gain = align_and_normalize(x_dpd, y, max_lag=64)
        err = train(post, z, x_dpd, cfg)
        mse = float(np.mean(np.abs(err) ** 2))
        session.error_history.append(mse)
        session.alignment.append((delay, gain))
        row = {"iteration": it, "mean_sq_error": mse}
        if evaluate is not None:
            row.update(evaluate(pre, it))
        session.metrics.append(row)
        log.info("ILA iteration %d: mean |e|^2 = %.3e", it, mse)
        pre = post.copy()
    if evaluate is not None:
        row = {"iteration": cfg.ila_iterations, "mean_sq_error": float("nan")}
        row.update(evaluate(pre, cfg.ila_iterations))
        session.metrics.append(row)
    session.postdistorter = post
    return session
