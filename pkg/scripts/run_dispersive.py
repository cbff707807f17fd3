"""Dispersive profiles: harmonic near t = 0 and repulsive at moderate t, with refinement.

usage: python scripts/run_dispersive.py
"""
import sys

from tfmeta.explab import ExperimentConfig, dispersive_experiment, emit_report, experiment_passed


def main():
    ok = True
    for path in ("configs/dispersive_harmonic.cfg", "configs/dispersive_repulsive.cfg"):
        cfg = ExperimentConfig.from_file(path, refine=path.endswith("harmonic.cfg"))
        rep, rows = dispersive_experiment(cfg.kind, cfg.r, cfg.sweep_t(), cfg)
        emit_report(rows, cfg.out)
        ok &= experiment_passed(rep)
        print(f"{rep.name}: exponent {rep.fitted:+.4f} (profile {rep.predicted:+.3f}), "
              f"sup rho {rep.extra['sup_rho']:.6f}, refined {rep.extra.get('refined_sup_rho', float('nan')):.6f}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
