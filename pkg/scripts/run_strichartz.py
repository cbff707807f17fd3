"""Strichartz ensemble ratio at (q, r) = (8, 4), plus an exploratory q = 4 run.

usage: python scripts/run_strichartz.py
"""
import dataclasses
import sys

from tfmeta.explab import ExperimentConfig, emit_report, experiment_passed, strichartz_ratio_experiment


def main():
    cfg = ExperimentConfig.from_file("configs/strichartz_8_4.cfg", refine=True)
    rep, rows = strichartz_ratio_experiment(cfg.kind, (cfg.q, cfg.r), cfg.T, cfg)
    emit_report(rows, cfg.out)
    print(f"sup ratio {rep.fitted:.6f}, refined {rep.predicted:.6f}, pass {experiment_passed(rep)}")
    exp = dataclasses.replace(cfg, refine=False, ensemble=8, out="results/strichartz_exploratory.csv")
    rep2, rows2 = strichartz_ratio_experiment(exp.kind, ("4", "inf"), exp.T, exp, exploratory=True)
    emit_report(rows2, exp.out)
    print(f"exploratory (4, inf): sup ratio {rep2.fitted:.6f}")
    return 0 if experiment_passed(rep) else 1


if __name__ == "__main__":
    sys.exit(main())
