"""Forward evaluation of the SPH, SMP and memory-polynomial predistorters.

All three share the same conventions: inputs are complex arrays (or
:class:`~splinedpd.numerics.ComplexSignal`), delay lines start from zero, and
forward passes never mutate the model.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import ceil

import numpy as np

from .numerics import ComplexSignal, as_samples, fir_filter
from .spline_lut import SplineConfig, SplineLut

# alpha-max-beta-min constants; fixture choice, not tied to any model
AMBM_ALPHA = 15 / 16
AMBM_BETA = 15 / 32


def envelope(z, mode: str = "exact") -> np.ndarray:
    """Magnitude of complex samples.

    ``mode="ambm"`` uses the multiplier-free alpha-max-beta-min estimate
    ``alpha*max(|I|,|Q|) + beta*min(|I|,|Q|)``.
    """
    z = np.asarray(z, dtype=np.complex128)
    if mode == "exact":
        return np.abs(z)
    if mode == "ambm":
        a, b = np.abs(z.real), np.abs(z.imag)
        return AMBM_ALPHA * np.maximum(a, b) + AMBM_BETA * np.minimum(a, b)
    raise ValueError(f"unknown magnitude mode {mode!r}")


def delayed(x: np.ndarray, d: int) -> np.ndarray:
    """``x[n-d]`` with zero prehistory, same length as ``x``."""
    if d == 0:
        return x
    out = np.zeros_like(x)
    if d < x.size:
        out[d:] = x[:x.size - d]
    return out


def _wrap(template, y):
    if isinstance(template, ComplexSignal):
        return template.with_samples(y)
    return y


@dataclass
class SphModel:
    """Spline LUT nonlinearity followed by an FIR filter."""

    lut: SplineLut
    taps: np.ndarray = None
    magnitude: str = "exact"

    kind = "sph"

    def __post_init__(self):
        if self.taps is None:
            self.taps = np.array([1.0], dtype=np.complex128)
        self.taps = np.array(self.taps, dtype=np.complex128).reshape(-1)
        if self.taps.size < 1:
            raise ValueError("SPH filter needs at least one tap")

    @classmethod
    def identity(cls, config: SplineConfig, memory: int, magnitude: str = "exact"):
        taps = np.zeros(memory, dtype=np.complex128)
        taps[0] = 1.0
        return cls(SplineLut(config), taps, magnitude)

    @property
    def memory(self) -> int:
        return self.taps.size

    def injected(self, x) -> np.ndarray:
        z = as_samples(x)
        return z + z * self.lut.evaluate(envelope(z, self.magnitude))

    def forward(self, x):
        return _wrap(x, fir_filter(self.taps, self.injected(x)))

    def copy(self) -> "SphModel":
        return SphModel(self.lut.copy(), self.taps.copy(), self.magnitude)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "magnitude": self.magnitude, "lut": self.lut.to_dict(),
                "taps": _pairs(self.taps)}


@dataclass
class SmpModel:
    """Parallel spline LUTs on a tapped delay line (injection form)."""

    luts: list
    magnitude: str = "exact"

    kind = "smp"

    def __post_init__(self):
        if not self.luts:
            raise ValueError("SMP model needs at least one LUT")
        configs = {lut.config for lut in self.luts}
        if len(configs) != 1:
            raise ValueError("all SMP branches must share one spline configuration")

    @classmethod
    def identity(cls, config: SplineConfig, memory: int, magnitude: str = "exact"):
        return cls([SplineLut(config) for _ in range(memory)], magnitude)

    @property
    def config(self) -> SplineConfig:
        return self.luts[0].config

    @property
    def memory(self) -> int:
        return len(self.luts)

    def forward(self, x):
        z = as_samples(x)
        offset, w = self.luts[0].weights(envelope(z, self.magnitude))
        cols = offset[:, None] + np.arange(self.config.order + 1)
        out = z.copy()
        for m, lut in enumerate(self.luts):
            branch = z * np.sum(w * lut.control_points[cols], axis=1)
            out += delayed(branch, m)
        return _wrap(x, out)

    def copy(self) -> "SmpModel":
        return SmpModel([lut.copy() for lut in self.luts], self.magnitude)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "magnitude": self.magnitude,
                "luts": [lut.to_dict() for lut in self.luts]}


def mp_size(order: int, memory: int) -> int:
    return ceil(order / 2) * memory


def _check_mp(order: int, memory: int):
    if order < 1 or order % 2 == 0:
        raise ValueError(f"memory polynomial order must be odd and positive, got {order}")
    if memory < 1:
        raise ValueError("memory depth must be at least 1")


def mp_basis(x, order: int, memory: int) -> np.ndarray:
    """Memory-polynomial regressors, one row ``l_n`` per sample.

    Columns are delay-major: for each delay ``d`` the odd-order terms
    ``x[n-d] |x[n-d]|^(p-1)`` for ``p = 1, 3, ..., order``.
    """
    _check_mp(order, memory)
    z = as_samples(x)
    mag2 = np.abs(z) ** 2
    per_delay = np.stack([z * mag2 ** k for k in range(ceil(order / 2))], axis=1)
    blocks = [np.stack([delayed(col, d) for col in per_delay.T], axis=1) for d in range(memory)]
    return np.concatenate(blocks, axis=1)


@dataclass
class MpModel:
    """Memory polynomial with complex weights on :func:`mp_basis` columns."""

    order: int
    memory: int
    weights: np.ndarray = None

    kind = "mp"

    def __post_init__(self):
        _check_mp(self.order, self.memory)
        m = mp_size(self.order, self.memory)
        if self.weights is None:
            self.weights = np.zeros(m, dtype=np.complex128)
            self.weights[0] = 1.0
        self.weights = np.array(self.weights, dtype=np.complex128).reshape(-1)
        if self.weights.size != m:
            raise ValueError(f"expected {m} weights, got {self.weights.size}")

    @classmethod
    def identity(cls, order: int, memory: int):
        return cls(order, memory)

    def forward(self, x):
        return _wrap(x, mp_basis(x, self.order, self.memory) @ self.weights)

    def copy(self) -> "MpModel":
        return MpModel(self.order, self.memory, self.weights.copy())

    def to_dict(self) -> dict:
        return {"kind": self.kind, "order": self.order, "memory": self.memory,
                "weights": _pairs(self.weights)}


def _pairs(values) -> list:
    return [[float(v.real), float(v.imag)] for v in values]


def _complex(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=np.complex128)


def model_from_dict(data: dict):
    kind = data.get("kind")
    if kind == "sph":
        return SphModel(SplineLut.from_dict(data["lut"]), _complex(data["taps"]),
                        data.get("magnitude", "exact"))
    if kind == "smp":
        return SmpModel([SplineLut.from_dict(d) for d in data["luts"]],
                        data.get("magnitude", "exact"))
    if kind == "mp":
        return MpModel(int(data["order"]), int(data["memory"]), _complex(data["weights"]))
    raise ValueError(f"unknown model kind {kind!r}")


def model_to_json(model) -> str:
    return json.dumps(model.to_dict(), indent=1)


def model_from_json(text: str):
    return model_from_dict(json.loads(text))


def sph_forward(model: SphModel, x):
    return model.forward(x)


def smp_forward(model: SmpModel, x):
    return model.forward(x)


def mp_forward(model: MpModel, x):
    return model.forward(x)
