"""
Linearizing a Wiener amplifier
==============================

Trains the three predistorters with indirect learning on the simulated
Wiener PA and compares adjacent-channel leakage and EVM on a held-out
burst. The run is shortened (fewer samples per iteration) so it finishes
in a few seconds; the acceptance suite uses the full defaults.
"""
from splinedpd import complexity
from splinedpd.experiment import ExperimentConfig, run_experiment


def worst(row):
    return min(row["aclr_db_left"], row["aclr_db_right"])


print(f"{'model':6s} {'ACLR no DPD':>12s} {'ACLR DPD':>9s} {'EVM %':>6s} {'mults':>6s}")
for kind in ("sph", "smp", "mp"):
    cfg = ExperimentConfig.from_mapping({"samples_per_iteration": 60_000, "ila_iterations": 3},
                                        base=ExperimentConfig.preset(kind))
    result = run_experiment(cfg)
    mults, _ = complexity.complexity_published(kind, cfg.order, cfg.memory)
    print(f"{kind:6s} {worst(result.baseline):12.2f} {worst(result.final):9.2f} "
          f"{result.final['evm_pct']:6.2f} {mults:6d}")

# the per-iteration postdistorter error of the last run
print("MSE per ILA iteration:", ["%.2e" % m for m in result.error_history])
