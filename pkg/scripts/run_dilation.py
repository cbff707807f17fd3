"""Dilation exponent sweep over the tested index pairs, both directions.

usage: python scripts/run_dilation.py [out.csv]
"""
import sys

from tfmeta.explab import ExperimentConfig, dilation_exponent_experiment, emit_report, experiment_passed

PAIRS = [("2", "2"), ("1", "inf"), ("inf", "1"), ("2", "inf"), ("2", "1")]


def main(out="results/dilation.csv"):
    rows, ok = [], True
    for direction, L in (("large", 8.0), ("small", 128.0)):
        cfg = ExperimentConfig(N=1024, L=L)
        for pq in PAIRS:
            rep, r = dilation_exponent_experiment(pq, direction, cfg)
            rows += r
            ok &= experiment_passed(rep)
            print(f"{direction:5s} {pq}: bound {rep.predicted:+.3f} fitted {rep.fitted:+.4f}")
    emit_report(rows, out)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
