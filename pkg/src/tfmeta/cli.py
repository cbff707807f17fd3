"""Command-line entry point ``tfmeta``.

Exit codes: 0 success (all tolerances pass), 1 a tolerance check failed,
2 invalid input (bad arguments, domain or admissibility errors).
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from . import bounds as bd
from .errors import TFMetaError
from .explab import (ExperimentConfig, ReportRow, dilation_exponent_experiment, dispersive_ensemble_sup,
                     dispersive_experiment, emit_report, eval_number, experiment_passed,
                     strichartz_ratio_experiment)
from .field import Grid, gaussian, load_field_csv, save_field_csv
from .metaplectic import propagate
from .symplectic import read_matrix_csv
from .tfnorm import IndexPair, modulation_norm, stft, wiener_amalgam_norm


def _num(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return repr(float(v))


def _input_field(args):
    if args.input:
        return load_field_csv(args.input)
    if args.grid:
        return gaussian(Grid.parse(args.grid), float(args.gaussian))
    raise SystemExit("error: give --input FILE or --grid d,N,L")


# -- tfnorm / propagate / bounds ------------------------------------------------------

def cmd_tfnorm(args) -> int:
    f = _input_field(args)
    idx = IndexPair.of(args.p, args.q)
    kw = {"dx": args.dx} if args.dx else {}
    if args.space == "mod":
        v = modulation_norm(f, idx, **kw)
        name = f"M({idx.p};{idx.q})"
    else:
        v = wiener_amalgam_norm(f, idx, **kw)
        name = f"W(FL^{idx.p};L^{idx.q})"
    if args.spectrogram:
        stft(f, **kw).to_csv(args.spectrogram)
    print(f"{name},{_num(v)}")
    return 0


def cmd_propagate(args) -> int:
    u0 = _input_field(args)
    B = None if args.B is None else np.diag([float(eval_number(b)) for b in args.B.split(",")])
    u = propagate(args.kind, float(eval_number(args.t)), u0, B=B, eps_t=args.eps_t, route=args.route)
    save_field_csv(u, args.out)
    return 0


def cmd_bounds(args) -> int:
    if args.what == "mu":
        idx = IndexPair.of(args.p, args.q)
        v = bd.mu1(idx) if args.which == "mu1" else bd.mu2(idx)
        print(f"{args.which}({idx.p};{idx.q}),{_num(v)}")
    elif args.what in ("alpha", "beta"):
        if not args.matrix:
            raise SystemExit("error: --matrix is required")
        with open(args.matrix) as fh:
            M = read_matrix_csv(fh.read())
        if args.what == "alpha":
            idx = IndexPair.of(args.p, args.q)
            print(f"alpha({idx.p};{idx.q}),{_num(bd.alpha(M, idx))}")
        else:
            print(f"beta,{_num(bd.beta(M))}")
    else:
        t = float(eval_number(args.t))
        v = bd.dispersive_bound(args.kind, t, args.r, args.d, eps_t=args.eps_t)
        print(f"dispersive:{args.kind}(t={_num(t)};r={args.r}),{_num(v)}")
    return 0


# -- experiments -------------------------------------------------------------------------

OVERRIDES = ("d", "N", "L", "p", "q", "r", "kind", "T", "steps", "ensemble", "seed", "out", "direction",
             "witness", "width", "tol", "stability_tol", "x_step", "t_min", "t_max", "t_count", "lambdas",
             "t_values", "fit_min", "fit_max", "expect")


def _config(args) -> ExperimentConfig:
    ov = {k: getattr(args, k) for k in OVERRIDES if getattr(args, k, None) is not None}
    if args.refine:
        ov["refine"] = True
    if args.config:
        return ExperimentConfig.from_file(args.config, **ov)
    return ExperimentConfig(**ov)


def _finish(cfg, rep, rows) -> int:
    if cfg.out:
        emit_report(rows, cfg.out)
    ok = experiment_passed(rep)
    print(f"{rep.name},predicted={_num(rep.predicted)},fitted={_num(rep.fitted)},"
          f"{'PASS' if ok else 'FAIL'}")
    for k in ("sup_rho", "refined_sup_rho"):
        if k in rep.extra:
            print(f"{k},{_num(rep.extra[k])}")
    return 0 if ok else 1


def cmd_exponent_fit(args) -> int:
    cfg = _config(args)
    rep, rows = dilation_exponent_experiment(cfg.index_pair, cfg.direction, cfg)
    return _finish(cfg, rep, rows)


def cmd_dispersive(args) -> int:
    cfg = _config(args)
    ts = cfg.sweep_t()
    if cfg.witness == "ensemble":
        sup, sups = dispersive_ensemble_sup(cfg.kind, cfg.r, ts, cfg)
        if cfg.out:
            rows = [ReportRow(f"dispersive-ensemble:{cfg.kind}:r={cfg.r}", i, v, float("nan"), float("nan"),
                              cfg.seed) for i, v in enumerate(sups)]
            emit_report(rows, cfg.out)
        print(f"sup_rho,{_num(sup)}")
        return 0 if np.isfinite(sup) else 1
    rep, rows = dispersive_experiment(cfg.kind, cfg.r, ts, cfg)
    return _finish(cfg, rep, rows)


def cmd_strichartz(args) -> int:
    cfg = _config(args)
    rep, rows = strichartz_ratio_experiment(cfg.kind, (cfg.q, cfg.r), cfg.T, cfg, exploratory=args.exploratory)
    return _finish(cfg, rep, rows)


def _add_experiment_flags(sp):
    sp.add_argument("--config", help="key=value configuration file")
    for k in OVERRIDES:
        sp.add_argument(f"--{k.replace('_', '-')}", dest=k, default=None)
    sp.add_argument("--refine", action="store_true", help="also run at doubled N and time steps")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tfmeta", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("tfnorm", help="modulation / Wiener amalgam norm of a field")
    sp.add_argument("--space", choices=("mod", "wiener"), default="mod")
    sp.add_argument("--p", required=True)
    sp.add_argument("--q", required=True)
    sp.add_argument("--input")
    sp.add_argument("--grid", help="d,N,L (with --gaussian, instead of --input)")
    sp.add_argument("--gaussian", default="1", help="width a of exp(-pi (a t)^2)")
    sp.add_argument("--dx", type=float)
    sp.add_argument("--spectrogram", help="write the STFT to this CSV")
    sp.set_defaults(func=cmd_tfnorm)

    sp = sub.add_parser("propagate", help="apply a quadratic-Hamiltonian propagator")
    sp.add_argument("--kind", choices=("harmonic", "repulsive", "free"), required=True)
    sp.add_argument("--t", required=True)
    sp.add_argument("--in", dest="input")
    sp.add_argument("--grid")
    sp.add_argument("--gaussian", default="1")
    sp.add_argument("--out", required=True)
    sp.add_argument("--route")
    sp.add_argument("--eps-t", dest="eps_t", type=float, default=1e-3)
    sp.add_argument("--B", help="diagonal of B for the free kind, comma separated")
    sp.set_defaults(func=cmd_propagate)

    sp = sub.add_parser("bounds", help="predicted constants and exponents")
    sp.add_argument("what", choices=("mu", "alpha", "beta", "dispersive"))
    sp.add_argument("--p", default="2")
    sp.add_argument("--q", default="2")
    sp.add_argument("--which", choices=("mu1", "mu2"), default="mu1")
    sp.add_argument("--matrix")
    sp.add_argument("--kind", choices=("harmonic", "repulsive", "free"), default="harmonic")
    sp.add_argument("--t", default="1")
    sp.add_argument("--r", default="inf")
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--eps-t", dest="eps_t", type=float, default=1e-3)
    sp.set_defaults(func=cmd_bounds)

    for name, fn, hlp in (("exponent-fit", cmd_exponent_fit, "dilation exponent fit"),
                          ("dispersive", cmd_dispersive, "dispersive ratio experiment"),
                          ("strichartz", cmd_strichartz, "Strichartz ratio experiment")):
        sp = sub.add_parser(name, help=hlp)
        _add_experiment_flags(sp)
        if name == "strichartz":
            sp.add_argument("--exploratory", action="store_true", help="allow inadmissible pairs, no pass/fail")
        sp.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TFMetaError, ValueError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
