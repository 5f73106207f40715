"""Behavioural power-amplifier models used as linearisation targets.

Every variant tends to a linear response with small-signal gain ``gain`` as
the drive level goes to zero (for the memory variants the linear response is
``gain`` times the memory filter). Noise is complex Gaussian, ``noise_floor_dbc``
below the noiseless output power, drawn from a seeded generator.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .models import mp_basis
from .numerics import ComplexSignal, as_samples, fir_filter

VARIANTS = ("static_polynomial", "rapp", "saleh", "wiener", "memory_polynomial")


def rapp_amplitude(a, gain_mag: float, saturation: float, smoothness: float):
    """Rapp AM/AM: ``G a / (1 + (G a / A_sat)^(2p))^(1/(2p))``."""
    ga = gain_mag * np.asarray(a, dtype=float)
    return ga / (1.0 + (ga / saturation) ** (2 * smoothness)) ** (1.0 / (2 * smoothness))


def rapp_phase(a, phase_gain: float):
    """AM/PM added to the Rapp stage: ``k a^3 / (1 + a^3)`` radians.

    ``a`` is the drive magnitude relative to the saturation level.
    """
    a3 = np.asarray(a, dtype=float) ** 3
    return phase_gain * a3 / (1.0 + a3)


@dataclass
class PaSimulator:
    """A PA model: ``variant`` tag plus its coefficients.

    ``params`` by variant:

    - ``static_polynomial``: ``coefficients`` for odd orders 1, 3, 5, ...
      (applied on top of ``gain``, first entry normally 1).
    - ``rapp``: ``saturation``, ``smoothness``, ``phase_gain``.
    - ``saleh``: ``beta_a``, ``alpha_phi``, ``beta_phi``; ``gain`` plays the
      role of the usual ``alpha_a``.
    - ``wiener``: ``taps`` then the Rapp parameters.
    - ``memory_polynomial``: ``order``, ``memory`` and delay-major
      ``coefficients`` (first entry normally 1).
    """

    variant: str
    params: dict = field(default_factory=dict)
    gain: complex = 1.0
    noise_floor_dbc: float | None = -60.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown PA variant {self.variant!r}")
        self.gain = complex(self.gain)
        if self.gain == 0:
            raise ValueError("small-signal gain must be nonzero")

    def noiseless(self, x) -> np.ndarray:
        x = as_samples(x)
        p = self.params
        if self.variant == "static_polynomial":
            coefs = _complex_list(p.get("coefficients", [1.0]))
            mag2 = np.abs(x) ** 2
            return self.gain * sum(a * x * mag2 ** k for k, a in enumerate(coefs))
        if self.variant == "rapp":
            return self._rapp(x)
        if self.variant == "saleh":
            r = np.abs(x)
            amp = 1.0 / (1.0 + p["beta_a"] * r ** 2)
            phase = p["alpha_phi"] * r ** 2 / (1.0 + p["beta_phi"] * r ** 2)
            return self.gain * x * amp * np.exp(1j * phase)
        if self.variant == "wiener":
            return self._rapp(fir_filter(_complex_list(p["taps"]), x))
        coefs = _complex_list(p["coefficients"])
        return self.gain * (mp_basis(x, int(p["order"]), int(p["memory"])) @ coefs)

    def _rapp(self, x):
        p = self.params
        r = np.abs(x)
        out = rapp_amplitude(r, abs(self.gain), p["saturation"], p["smoothness"])
        rel = abs(self.gain) * r / p["saturation"]
        phase = np.angle(self.gain) + rapp_phase(rel, p.get("phase_gain", 0.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r > 0, x / np.where(r > 0, r, 1.0), 0)
        return out * unit * np.exp(1j * phase)

    def linear_response(self, x) -> np.ndarray:
        """Small-signal limit of :meth:`noiseless`."""
        x = as_samples(x)
        p = self.params
        if self.variant == "static_polynomial":
            return self.gain * _complex_list(p.get("coefficients", [1.0]))[0] * x
        if self.variant == "wiener":
            return self.gain * fir_filter(_complex_list(p["taps"]), x)
        if self.variant == "memory_polynomial":
            taps = _complex_list(p["coefficients"])[::(int(p["order"]) + 1) // 2]
            return self.gain * fir_filter(taps, x)
        return self.gain * x

    def apply(self, x, seed: int = 0):
        """PA output for ``x`` including seeded noise."""
        y = self.noiseless(x)
        if self.noise_floor_dbc is not None:
            rng = np.random.default_rng(seed)
            power = np.mean(np.abs(y) ** 2) * 10 ** (self.noise_floor_dbc / 10)
            noise = rng.standard_normal(y.size) + 1j * rng.standard_normal(y.size)
            y = y + np.sqrt(power / 2) * noise
        if isinstance(x, ComplexSignal):
            return x.with_samples(y)
        return y

    def to_dict(self) -> dict:
        return {"variant": self.variant, "gain": [self.gain.real, self.gain.imag],
                "noise_floor_dbc": self.noise_floor_dbc, "params": _jsonable(self.params)}

    @classmethod
    def from_dict(cls, data: dict) -> "PaSimulator":
        unknown = set(data) - {"variant", "gain", "noise_floor_dbc", "params", "description"}
        if unknown:
            raise ValueError(f"unknown PA fixture keys: {sorted(unknown)}")
        gain = data.get("gain", 1.0)
        if isinstance(gain, (list, tuple)):
            gain = complex(*gain)
        return cls(data["variant"], dict(data.get("params", {})), gain,
                   data.get("noise_floor_dbc", -60.0))


def pa_apply(pa: PaSimulator, x, seed: int = 0):
    return pa.apply(x, seed=seed)


def _complex_list(values) -> np.ndarray:
    out = []
    for v in values:
        out.append(complex(*v) if isinstance(v, (list, tuple)) else complex(v))
    return np.array(out, dtype=np.complex128)


def _jsonable(params: dict) -> dict:
    def conv(v):
        if isinstance(v, complex):
            return [v.real, v.imag]
        if isinstance(v, (list, tuple, np.ndarray)):
            return [conv(x) for x in v]
        if isinstance(v, np.generic):
            return v.item()
        return v
    return {k: conv(v) for k, v in params.items()}


FIXTURE_VERSION = "v1"


def fixture_names() -> list:
    root = resources.files("splinedpd") / "fixtures" / FIXTURE_VERSION
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_fixture(name_or_path) -> PaSimulator:
    """Load a PA fixture by shipped name (e.g. ``"wiener"``) or file path."""
    path = Path(str(name_or_path))
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
    else:
        res = resources.files("splinedpd") / "fixtures" / FIXTURE_VERSION / f"{name_or_path}.json"
        if not res.is_file():
            raise FileNotFoundError(f"no PA fixture named {name_or_path!r}")
        text = res.read_text()
    return PaSimulator.from_dict(json.loads(text))
