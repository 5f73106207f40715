"""Fast invariant checks runnable from an installed package.

Each check returns ``(ok, detail)``. The full test suite lives in the source
tree; this is the subset that needs nothing but the library itself.
"""
from __future__ import annotations

import numpy as np

from . import complexity, learning
from .models import MpModel, SmpModel, SphModel
from .pa import fixture_names, load_fixture
from .spline_lut import SplineConfig, SplineLut, basis_matrix
from .waveform import OfdmConfig, aclr, generate_ofdm


def _basis_cubic():
    expected = np.array([[-1, 3, -3, 1], [3, -6, 3, 0], [-3, 0, 3, 0], [1, 4, 1, 0]]) / 6
    err = np.max(np.abs(basis_matrix(3) - expected))
    return err < 1e-15, f"max deviation {err:.1e}"


def _partition_of_unity():
    u = np.linspace(0, 1, 257)[:-1]
    worst = 0.0
    for order in (1, 2, 3):
        rows = u[:, None] ** np.arange(order, -1, -1) @ basis_matrix(order)
        worst = max(worst, np.max(np.abs(rows.sum(axis=1) - 1)))
    return worst < 1e-12, f"max |sum - 1| = {worst:.1e}"


def _injection_identity():
    rng = np.random.default_rng(1)
    z = rng.standard_normal(500) + 1j * rng.standard_normal(500)
    lut = SplineLut(SplineConfig(3, 1.0, 5))
    ok = np.array_equal(lut.apply(z), z)
    return ok, "zero LUT returns the input bit-exactly" if ok else "zero LUT altered the input"


def _degeneracy():
    rng = np.random.default_rng(2)
    cfg = SplineConfig(3, 1.0, 4)
    pts = rng.standard_normal(cfg.n_points) * 0.1 + 1j * rng.standard_normal(cfg.n_points) * 0.1
    z = 2 * (rng.standard_normal(400) + 1j * rng.standard_normal(400))
    sph = SphModel(SplineLut(cfg, pts), [1.0]).forward(z)
    smp = SmpModel([SplineLut(cfg, pts)]).forward(z)
    mp = MpModel(7, 3).forward(z)
    err = max(np.max(np.abs(sph - smp)), np.max(np.abs(mp - z)))
    return err < 1e-12, f"max deviation {err:.1e}"


def _gradient():
    rng = np.random.default_rng(3)
    cfg = SplineConfig(2, 0.7, 4)
    pts = 0.1 * (rng.standard_normal(cfg.n_points) + 1j * rng.standard_normal(cfg.n_points))
    model = SmpModel([SplineLut(cfg, pts), SplineLut(cfg, pts[::-1].copy())])
    z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    target = complex(rng.standard_normal(), rng.standard_normal())
    lc = learning.LearningConfig(mu_q=1.0)
    new, e = learning.smp_step(model, z, target, lc)
    direction = new.luts[0].control_points - model.luts[0].control_points

    def cost(points):
        m = SmpModel([SplineLut(cfg, points), model.luts[1]])
        return abs(learning.smp_step(m, z, target, learning.LearningConfig(mu_q=0))[1]) ** 2

    h, worst = 1e-6, 0.0
    for k in range(cfg.n_points):
        for unit in (1.0, 1j):
            up, dn = pts.copy(), pts.copy()
            up[k] += h * unit
            dn[k] -= h * unit
            fd = (cost(up) - cost(dn)) / (2 * h)
            analytic = -2 * (direction[k].real if unit == 1.0 else direction[k].imag)
            worst = max(worst, abs(fd - analytic) / max(abs(analytic), 1e-3))
    return worst < 1e-5, f"max relative deviation {worst:.1e}"


def _complexity_tables():
    checks = [complexity.complexity_published("sph", 3, 4) == (40, 124),
              complexity.complexity_published("smp", 3, 4) == (63, 119),
              complexity.complexity_published("mp", 11, 4) == (112, 2514),
              complexity.flops("sph", 3, 3)[0] == 69,
              complexity.flops("smp", 3, 4)[0] == 99,
              complexity.flops("mp", 11, 4)[0] == 255]
    return all(checks), f"{sum(checks)}/{len(checks)} reference cells"


def _aclr_scale():
    cfg = OfdmConfig(num_symbols=4)
    x, _ = generate_ofdm(cfg)
    a = aclr(x.samples, cfg.occupied_bandwidth_hz, cfg.channel_bandwidth_hz, cfg.sample_rate_hz)
    b = aclr(7.3j * x.samples, cfg.occupied_bandwidth_hz, cfg.channel_bandwidth_hz,
             cfg.sample_rate_hz)
    err = max(abs(a[0] - b[0]), abs(a[1] - b[1]))
    return err < 1e-9, f"ACLR change under scaling {err:.1e} dB"


def _pa_small_signal():
    rng = np.random.default_rng(4)
    x = 1e-3 * (rng.standard_normal(2000) + 1j * rng.standard_normal(2000))
    worst = 0.0
    for name in fixture_names():
        pa = load_fixture(name)
        pa.noise_floor_dbc = None
        ref = pa.linear_response(x)
        worst = max(worst, np.linalg.norm(pa.apply(x) - ref) / np.linalg.norm(ref))
    return worst < 1e-3, f"worst relative deviation {worst:.1e}"


CHECKS = {
    "cubic basis matrix": _basis_cubic,
    "partition of unity": _partition_of_unity,
    "injection identity": _injection_identity,
    "structural degeneracies": _degeneracy,
    "SMP gradient vs finite differences": _gradient,
    "complexity reference cells": _complexity_tables,
    "ACLR scale invariance": _aclr_scale,
    "PA small-signal linearity": _pa_small_signal,
}


def run_selftest(report=print) -> bool:
    ok_all = True
    for name, check in CHECKS.items():
        try:
            ok, detail = check()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        ok_all &= bool(ok)
        report(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok_all
