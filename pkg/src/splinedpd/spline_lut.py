"""Uniform complex B-spline lookup tables.

A LUT with ``K`` regions of width ``delta`` and spline order ``P`` holds
``Q = K + P`` complex control points. A sample of magnitude ``a`` falls in
region ``i = floor(a/delta) + 1`` at in-region offset ``u = a - (i-1)*delta``;
only control points ``i-1 ... i-1+P`` (0-based) contribute, with weights
``[u^P, ..., u, 1] @ B``.

The LUT output is a gain *deviation*: :func:`inject` returns
``z + z * F(|z|)`` so an all-zero LUT is the identity map.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

SUPPORTED_ORDERS = (1, 2, 3)

# just below the top of the last region; keeps u inside [0, delta)
_EDGE = 1.0 - 2.0 ** -40


@lru_cache(maxsize=None)
def _unit_basis(order: int) -> tuple:
    """Exact uniform B-spline basis matrix on a unit knot grid.

    Column ``j`` holds the polynomial coefficients (highest power first) of
    the cardinal B-spline piece ``N(u + order - j)`` for ``u`` in ``[0, 1)``,
    built from the truncated-power form
    ``N(t) = 1/P! * sum_k (-1)^k C(P+1, k) (t - k)_+^P``.
    """
    rows = [[Fraction(0)] * (order + 1) for _ in range(order + 1)]
    for j in range(order + 1):
        for k in range(order - j + 1):
            shift = order - j - k
            sign = (-1) ** k * comb(order + 1, k)
            for power in range(order + 1):
                coef = comb(order, power) * Fraction(shift) ** (order - power)
                rows[order - power][j] += sign * coef
    scale = Fraction(1, factorial(order))
    return tuple(tuple(v * scale for v in row) for row in rows)


def basis_matrix(order: int, knot_spacing: float = 1.0) -> np.ndarray:
    """Uniform B-spline basis matrix of the given order.

    Rows correspond to powers ``u^order ... u^0`` and are scaled by
    ``knot_spacing**-power`` so that ``u`` is measured in input units.

    Raises:
        ValueError: for orders outside ``SUPPORTED_ORDERS`` or a
            non-positive knot spacing.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"spline order must be one of {SUPPORTED_ORDERS}, got {order}")
    if not knot_spacing > 0:
        raise ValueError("knot spacing must be positive")
    unit = np.array(_unit_basis(order), dtype=float)
    powers = np.arange(order, -1, -1)
    return unit / float(knot_spacing) ** powers[:, None]


@dataclass(frozen=True)
class SplineConfig:
    order: int = 3
    knot_spacing: float = 1.0
    region_count: int = 4

    def __post_init__(self):
        if self.order not in SUPPORTED_ORDERS:
            raise ValueError(f"spline order must be one of {SUPPORTED_ORDERS}")
        if not self.knot_spacing > 0:
            raise ValueError("knot spacing must be positive")
        if self.region_count < 1:
            raise ValueError("region count must be at least 1")

    @classmethod
    def from_points(cls, order: int, n_points: int, knot_spacing: float = 1.0):
        """Config with ``n_points`` control points (``K = Q - P``)."""
        return cls(order, knot_spacing, n_points - order)

    @property
    def n_points(self) -> int:
        return self.region_count + self.order

    @property
    def max_amplitude(self) -> float:
        return self.region_count * self.knot_spacing


@dataclass(frozen=True)
class RegionIndex:
    """1-based region ``span`` and in-region offset ``u`` in ``[0, delta)``."""

    span: int
    u: float

    @property
    def offset(self) -> int:
        """0-based index of the first contributing control point."""
        return self.span - 1


def region_index(magnitude: float, config: SplineConfig) -> RegionIndex:
    """Region and abscissa for one input magnitude (saturating at the top)."""
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    span, u = region_indices(np.array([magnitude], dtype=float), config)
    return RegionIndex(int(span[0]) + 1, float(u[0]))


def region_indices(magnitudes, config: SplineConfig):
    """Vectorised region lookup.

    Returns:
        tuple: 0-based offsets (int array) and abscissae ``u`` (float array).
    """
    a = np.asarray(magnitudes, dtype=float)
    delta = config.knot_spacing
    scaled = a / delta
    offset = np.floor(scaled).astype(np.int64)
    u = np.clip(a - offset * delta, 0.0, delta * _EDGE)
    top = offset >= config.region_count
    offset = np.where(top, config.region_count - 1, offset)
    u = np.where(top, delta * _EDGE, u)
    return offset, u


def abscissa_powers(u, order: int) -> np.ndarray:
    """Stack ``[u^order, ..., u, 1]`` along the last axis."""
    u = np.asarray(u, dtype=float)
    return u[..., None] ** np.arange(order, -1, -1)


@dataclass
class SplineLut:
    """Complex control points plus their (precomputed) basis matrix."""

    config: SplineConfig
    control_points: np.ndarray = None
    basis: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        q = self.config.n_points
        if self.control_points is None:
            self.control_points = np.zeros(q, dtype=np.complex128)
        else:
            self.control_points = np.array(self.control_points, dtype=np.complex128).reshape(-1)
        if self.control_points.size != q:
            raise ValueError(f"expected {q} control points, got {self.control_points.size}")
        self.basis = basis_matrix(self.config.order, self.config.knot_spacing)

    def copy(self) -> "SplineLut":
        return SplineLut(self.config, self.control_points.copy())

    def weights(self, magnitudes):
        """Offsets and the ``(N, P+1)`` block of nonzero regressor weights."""
        offset, u = region_indices(magnitudes, self.config)
        return offset, abscissa_powers(u, self.config.order) @ self.basis

    def evaluate(self, magnitudes) -> np.ndarray:
        """Gain deviation ``F(|z|)`` for an array of magnitudes."""
        offset, w = self.weights(magnitudes)
        cols = offset[:, None] + np.arange(self.config.order + 1)
        return np.sum(w * self.control_points[cols], axis=1)

    def apply(self, z) -> np.ndarray:
        """Injection output ``z + z*F(|z|)`` for an array of samples."""
        z = np.asarray(z, dtype=np.complex128)
        return z + z * self.evaluate(np.abs(z))

    def to_dict(self) -> dict:
        return {
            "order": self.config.order,
            "knot_spacing": self.config.knot_spacing,
            "region_count": self.config.region_count,
            "control_points": [[float(c.real), float(c.imag)] for c in self.control_points],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SplineLut":
        config = SplineConfig(int(data["order"]), float(data["knot_spacing"]),
                              int(data["region_count"]))
        points = [complex(re, im) for re, im in data["control_points"]]
        return cls(config, points)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SplineLut":
        return cls.from_dict(json.loads(text))


def regressor(idx: RegionIndex, lut: SplineLut) -> np.ndarray:
    """Dense length-``Q`` regressor with ``P+1`` contiguous nonzeros."""
    g = np.zeros(lut.config.n_points)
    block = abscissa_powers(idx.u, lut.config.order) @ lut.basis
    g[idx.offset:idx.offset + lut.config.order + 1] = block
    return g


def gain_deviation(z: complex, lut: SplineLut) -> complex:
    """``F_I(|z|) + j F_Q(|z|)`` for a single sample."""
    return complex(lut.evaluate(np.array([abs(z)]))[0])


def inject(z: complex, lut: SplineLut) -> complex:
    """Injection nonlinearity for a single sample."""
    return z + z * gain_deviation(z, lut)
