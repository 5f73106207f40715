"""
Spline-interpolated lookup tables
=================================

A table of Q complex control points describes a smooth gain deviation
F(|z|). The nonlinearity applied to a sample is z + z * F(|z|), so an
all-zero table passes the signal through untouched.
"""
import numpy as np

from splinedpd.spline_lut import SplineConfig, SplineLut, basis_matrix, region_index, regressor

# cubic segments, 7 control points, unit knot spacing
cfg = SplineConfig.from_points(order=3, n_points=7)
print("regions:", cfg.region_count, "  max amplitude:", cfg.max_amplitude)
print("cubic basis matrix x 6:\n", np.round(6 * basis_matrix(3, 1.0)).astype(int))

# a magnitude maps to a region offset and a position inside it
idx = region_index(2.5, cfg)
lut = SplineLut(cfg)
g = regressor(idx, lut)
print("regressor at |z| = 2.5:", np.round(g, 4), " sum =", g.sum())

# the zero table is the identity
z = np.array([0.3 + 0.1j, -1.2j, 2.9])
print("identity:", np.array_equal(lut.apply(z), z))

# a gentle compressive deviation, smooth through the knots
lut.control_points[:] = -0.02 * np.arange(cfg.n_points) ** 1.5
a = np.linspace(0, cfg.max_amplitude, 9)[:-1]
for amp, dev in zip(a, lut.evaluate(a)):
    print(f"  |z| = {amp:4.2f}   F = {dev.real:+.4f}")
