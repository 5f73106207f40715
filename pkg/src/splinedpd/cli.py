"""``splinedpd`` command line: generate, train, evaluate, complexity, selftest.

Exit codes: 0 success, 2 invalid configuration, 3 numeric divergence,
4 file I/O problems. Relative output paths are resolved against
``$SPLINEDPD_OUTPUT`` when it is set.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import complexity
from .experiment import (LOG_COLUMNS, ConfigError, ExperimentConfig, evaluate_model,
                         run_experiment, shaped_burst)
from .io import (FileFormatError, atomic_write, load_model, output_path, read_signal,
                 save_model, write_csv, write_signal)
from .numerics import NumericError
from .pa import load_fixture
from .selftest import run_selftest
from .waveform import OfdmConfig, generate_ofdm, papr_db

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 2, 3, 4

# (kind, P, M) cells of the reference complexity tables
REFERENCE_CASES = [
    ("sph", 3, 4), ("smp", 3, 4), ("mp", 11, 4),
    ("sph", 2, 3), ("sph", 3, 3), ("sph", 4, 3),
    ("smp", 2, 4), ("smp", 4, 4),
    ("sph", 2, 4), ("smp", 2, 5), ("smp", 3, 5), ("mp", 11, 5),
]


def _config_flags(parser):
    group = parser.add_argument_group("experiment settings (override the config file)")
    for key in ExperimentConfig().flat():
        group.add_argument(f"--{key.replace('_', '-')}", dest=f"set_{key}",
                           default=argparse.SUPPRESS, metavar="VALUE")
    parser.add_argument("--config", type=Path, help="experiment config file ([experiment] section)")


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config is not None:
        cfg = ExperimentConfig.from_ini(args.config.read_text())
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("set_")}
    return ExperimentConfig.from_mapping(overrides, cfg) if overrides else cfg


def cmd_generate(args) -> int:
    cfg = _load_config(args)
    seed = cfg.eval_seed if args.seed is None else args.seed
    x, _ = shaped_burst(cfg, seed)
    meta = {"config_hash": cfg.config_hash(), "seed": seed, "drive_peak": cfg.drive_peak,
            "waveform": {k: v for k, v in asdict(cfg.waveform).items() if k != "seed"}}
    out = output_path(args.out)
    write_signal(out, x, meta)
    print(f"wrote {out} ({x.samples.size} samples, PAPR {papr_db(x):.2f} dB at 1e-4)")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_config(args)
    out = output_path(args.out_dir)
    result = run_experiment(cfg)
    h = cfg.config_hash()
    save_model(out / "model.json", result.model, h, {"kind": cfg.kind})
    write_csv(out / "training_log.csv", LOG_COLUMNS, result.log_rows)
    atomic_write(out / "config.ini", f"# config_hash = {h}\n" + cfg.to_ini())
    base, final = result.baseline, result.final
    worst = lambda r: min(r["aclr_db_left"], r["aclr_db_right"])  # noqa: E731
    print(f"{cfg.kind.upper()} trained: worst ACLR {worst(base):.2f} -> {worst(final):.2f} dB, "
          f"EVM {base['evm_pct']:.2f} -> {final['evm_pct']:.2f} %")
    print(f"outputs in {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    x, meta = read_signal(args.signal)
    try:
        wave = OfdmConfig(**meta["waveform"], seed=meta["seed"])
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"{args.signal}: sidecar lacks waveform settings ({exc})") from exc
    _, symbols = generate_ofdm(wave)
    model = None
    if args.model is not None:
        model, _ = load_model(args.model)
    pa = load_fixture(args.pa)
    noise_seed = meta["seed"] if args.noise_seed is None else args.noise_seed
    rep = evaluate_model(model, pa, x, symbols, wave, noise_seed)
    out = output_path(args.out_dir)
    cols = ("evm_pct", "aclr_db_left", "aclr_db_right", "papr_db_at_1e4", "config_hash")
    row = {**asdict(rep), "config_hash": meta["config_hash"]}
    write_csv(out / f"{args.tag}metrics.csv", cols, [row])
    f, p = rep.psd
    write_csv(out / f"{args.tag}psd.csv", ("freq_hz", "psd_db_per_hz"),
              zip(f, 10 * np.log10(np.maximum(p, 1e-300))))
    print(f"EVM {rep.evm_pct:.3f} %, ACLR {rep.aclr_db_left:.2f} / {rep.aclr_db_right:.2f} dB, "
          f"PAPR {rep.papr_db_at_1e4:.2f} dB")
    return EXIT_OK


def cmd_complexity(args) -> int:
    cases = REFERENCE_CASES if args.kind is None else [(args.kind, args.order, args.memory)]
    if args.kind is not None and (args.order is None or args.memory is None):
        raise ConfigError("--kind needs --order and --memory")
    rows = []
    for kind, p, m in cases:
        try:
            rows.append(complexity.report(kind, p, m).as_dict())
        except complexity.NotCalibratedError as exc:
            raise ConfigError(str(exc)) from exc
    cols = complexity.REPORT_COLUMNS
    if args.format == "csv":
        print(",".join(cols))
        for r in rows:
            print(",".join(str(r[c]) for c in cols))
    else:
        width = [max(len(c), 6) for c in cols]
        print("  ".join(c.rjust(w) for c, w in zip(cols, width)))
        for r in rows:
            print("  ".join(str(r[c]).rjust(w) for c, w in zip(cols, width)))
    return EXIT_OK


def cmd_selftest(args) -> int:
    return EXIT_OK if run_selftest() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splinedpd", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a clipped OFDM drive signal")
    _config_flags(p)
    p.add_argument("--seed", type=int, help="payload seed (default: eval_seed)")
    p.add_argument("--out", required=True, help="signal file (sidecar written next to it)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a predistorter with indirect learning")
    _config_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="measure PA output for a signal file")
    p.add_argument("--signal", required=True, type=Path)
    p.add_argument("--model", type=Path, help="model file; omit for no predistortion")
    p.add_argument("--pa", default="wiener", help="fixture name or JSON path")
    p.add_argument("--noise-seed", type=int, help="PA noise seed (default: the signal seed)")
    p.add_argument("--tag", default="", help="prefix for the output file names")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("complexity", help="operation counts per sample")
    p.add_argument("--kind", choices=complexity.KINDS)
    p.add_argument("--order", type=int)
    p.add_argument("--memory", type=int)
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
