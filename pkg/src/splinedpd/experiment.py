"""Reproducible linearisation experiments.

An :class:`ExperimentConfig` fixes everything a run depends on: waveform,
PA fixture, model structure, step sizes and seeds. Configs are flat
``key = value`` files (a single ``[experiment]`` section); unknown keys are
rejected.

Seeds:

- training iteration ``k`` draws a fresh payload burst seeded from
  ``(train_seed, k)`` and PA noise from ``noise_seed + k``;
- evaluation uses one burst with payload and PA-noise seed ``eval_seed``,
  never seen during training.
"""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .learning import LearningConfig, run_ila
from .models import MpModel, SmpModel, SphModel
from .numerics import ComplexSignal, normalize_peak
from .pa import load_fixture
from .spline_lut import SplineConfig
from .waveform import OfdmConfig, generate_ofdm, measure, reduce_papr

SECTION = "experiment"

# structures used for the headline comparison: (order, memory, n_points)
PRESETS = {
    "sph": (3, 3, 7),
    "smp": (3, 4, 7),
    "mp": (11, 4, None),
}


class ConfigError(ValueError):
    """Invalid or unknown experiment configuration entry."""


@dataclass(frozen=True)
class ExperimentConfig:
    waveform: OfdmConfig = field(default_factory=OfdmConfig)
    learning: LearningConfig = field(
        default_factory=lambda: LearningConfig(samples_per_iteration=150_000))
    pa: str = "wiener"
    kind: str = "smp"
    order: int = 3
    memory: int = 4
    n_points: int = 7
    knot_spacing: float = 1.0
    magnitude: str = "exact"
    drive_peak: float = 3.98
    target_papr_db: float = 7.0
    papr_iterations: int = 6
    train_seed: int = 0
    noise_seed: int = 0
    eval_seed: int = 1000

    def __post_init__(self):
        if self.kind not in PRESETS:
            raise ConfigError(f"kind must be one of {sorted(PRESETS)}, got {self.kind!r}")
        if not self.drive_peak > 0:
            raise ConfigError("drive_peak must be positive")
        if self.magnitude not in ("exact", "ambm"):
            raise ConfigError("magnitude must be 'exact' or 'ambm'")

    @classmethod
    def preset(cls, kind: str, **overrides) -> "ExperimentConfig":
        order, memory, n_points = PRESETS[kind]
        base = {"kind": kind, "order": order, "memory": memory}
        if n_points is not None:
            base["n_points"] = n_points
        return replace(cls(), **{**base, **overrides})

    @property
    def spline(self) -> SplineConfig:
        return SplineConfig.from_points(self.order, self.n_points, self.knot_spacing)

    def flat(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "waveform":
                out.update({k: v for k, v in asdict(value).items() if k != "seed"})
            elif f.name == "learning":
                out.update(asdict(value))
            else:
                out[f.name] = value
        return out

    def config_hash(self) -> str:
        text = json.dumps(self.flat(), sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def to_ini(self) -> str:
        lines = [f"[{SECTION}]"]
        for key, value in self.flat().items():
            if isinstance(value, (list, tuple, np.ndarray)):
                value = ", ".join(str(v) for v in value)
            lines.append(f"{key} = {'' if value is None else value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_mapping(cls, values: dict, base: "ExperimentConfig | None" = None):
        """Build a config from string (or typed) values over ``base``."""
        base = base or cls()
        wave_keys = {f.name: f for f in fields(OfdmConfig) if f.name != "seed"}
        learn_keys = {f.name: f for f in fields(LearningConfig)}
        top_keys = {f.name: f for f in fields(cls) if f.name not in ("waveform", "learning")}
        wave, learn, top = {}, {}, {}
        for key, raw in values.items():
            for table, target in ((wave_keys, wave), (learn_keys, learn), (top_keys, top)):
                if key in table:
                    target[key] = _coerce(key, raw, getattr(
                        base.waveform if table is wave_keys else
                        base.learning if table is learn_keys else base, key))
                    break
            else:
                raise ConfigError(f"unknown config key {key!r}")
        try:
            return replace(base, waveform=replace(base.waveform, **wave),
                           learning=replace(base.learning, **learn), **top)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_ini(cls, text: str, base: "ExperimentConfig | None" = None):
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        extra = [s for s in parser.sections() if s != SECTION]
        if extra:
            raise ConfigError(f"unknown config sections {extra}; expected [{SECTION}]")
        values = dict(parser[SECTION]) if parser.has_section(SECTION) else {}
        return cls.from_mapping(values, base)


def _coerce(key: str, raw, current):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if text == "" or text.lower() == "none":
            return None
        if key == "mu_q":
            parts = [float(p) for p in text.split(",")]
            return parts[0] if len(parts) == 1 else tuple(parts)
        if isinstance(current, bool):
            if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return text.lower() in ("true", "1", "yes")
        if isinstance(current, int):
            return int(text)
        if isinstance(current, float):
            return float(text)
        if current is None and key != "samples_per_iteration":
            parts = [float(p) for p in text.split(",")]
            return parts[0] if len(parts) == 1 else tuple(parts)
        if current is None:
            return int(text)
        return text
    except ValueError:
        raise ConfigError(f"invalid value {raw!r} for {key}") from None


# -- signals ---------------------------------------------------------------

def burst_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def shaped_burst(cfg: ExperimentConfig, seed: int):
    """One C&F OFDM burst scaled to the drive peak, with its QAM symbols."""
    wave = cfg.waveform.with_seed(seed)
    sig, symbols = generate_ofdm(wave)
    x = reduce_papr(sig, cfg.target_papr_db, cfg.papr_iterations, wave)
    return normalize_peak(x, cfg.drive_peak), symbols


def training_record(cfg: ExperimentConfig, iteration: int) -> ComplexSignal:
    """Fresh payload for one ILA iteration.

    The record is a single burst long enough to cover
    ``samples_per_iteration``; gluing separate bursts together would put
    discontinuities into the delay lines.
    """
    need = cfg.learning.samples_per_iteration or cfg.waveform.num_samples
    symbols = max(cfg.waveform.num_symbols, -(-need // cfg.waveform.symbol_samples))
    long_cfg = replace(cfg, waveform=replace(cfg.waveform, num_symbols=symbols))
    x, _ = shaped_burst(long_cfg, burst_seed(cfg.train_seed, iteration))
    return normalize_peak(x.with_samples(x.samples[:need]), cfg.drive_peak)


def evaluation_record(cfg: ExperimentConfig):
    return shaped_burst(cfg, cfg.eval_seed)


# -- models ----------------------------------------------------------------

def initial_model(cfg: ExperimentConfig):
    """Identity-initialised model of the configured kind."""
    if cfg.kind == "sph":
        return SphModel.identity(cfg.spline, cfg.memory, cfg.magnitude)
    if cfg.kind == "smp":
        return SmpModel.identity(cfg.spline, cfg.memory, cfg.magnitude)
    return MpModel(cfg.order, cfg.memory)


def evaluate_model(model, pa, x, symbols, wave: OfdmConfig, noise_seed: int):
    """Metrics of the PA output with ``model`` (``None`` = no DPD) in front."""
    drive = x if model is None else model.forward(x)
    y = pa.apply(drive, seed=noise_seed)
    return measure(y, symbols, wave, transmitted=x)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    model: object
    error_history: list
    log_rows: list

    @property
    def baseline(self) -> dict:
        return self.log_rows[0]

    @property
    def final(self) -> dict:
        return self.log_rows[-1]


def run_experiment(cfg: ExperimentConfig, pa=None) -> ExperimentResult:
    """Train with ILA and log held-out metrics for every predistorter used.

    Row ``k`` of the log describes the predistorter in force during ILA
    iteration ``k`` (row 0 is therefore the no-DPD reference); the last row
    is the trained model.
    """
    pa = load_fixture(cfg.pa) if pa is None else pa
    x_eval, symbols = evaluation_record(cfg)

    def evaluate(pre, it):
        rep = evaluate_model(pre, pa, x_eval, symbols, cfg.waveform, cfg.eval_seed)
        return {"aclr_db_left": float(rep.aclr_db_left),
                "aclr_db_right": float(rep.aclr_db_right), "evm_pct": rep.evm_pct}

    session = run_ila(pa, initial_model(cfg), lambda it: training_record(cfg, it),
                      cfg.learning, seed=cfg.noise_seed, evaluate=evaluate)
    return ExperimentResult(cfg, session.postdistorter, session.error_history, session.metrics)


LOG_COLUMNS = ("iteration", "mean_sq_error", "aclr_db_left", "aclr_db_right", "evm_pct")
