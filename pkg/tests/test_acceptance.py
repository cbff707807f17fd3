"""Acceptance gate: ten criteria, each printing one PASS/FAIL line.

Run under pytest (lines are printed outside output capture) or directly:

    python tests/test_acceptance.py
"""
from __future__ import annotations

import filecmp
import itertools
import math
import sys
import tempfile
import time
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from tfmeta.bounds import classify_region, classical_bound, mu1, mu2, strichartz_admissible
from tfmeta.cli import main as cli_main
from tfmeta.explab import (ExperimentConfig, dilation_exponent_experiment, dispersive_experiment, emit_report,
                           experiment_passed, random_packets, render, strichartz_ratio_experiment)
from tfmeta.field import Grid, SampledField, aligned_error, chirp, gaussian, l2_norm, phase_align
from tfmeta.metaplectic import apply, classical_dispersive_check, propagate
from tfmeta.symplectic import SymplecticMatrix
from tfmeta.tfnorm import (IndexPair, chirp_wiener_norm_oracle, dilated_gaussian_mod_norm_oracle,
                           from_reciprocal, gaussian_stft_oracle, modulation_norms, stft, wiener_amalgam_norm)

EXPS = ("1", "2", "inf")


def _family(grid, n=4, seed=11):
    """Gaussian-chirp mixtures together with their packet parameters."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        pk = random_packets(rng, grid.d)
        out.append((pk, render(pk, grid)))
    return out


def _fourier_oracle(packets, grid):
    """Analytic Fourier transform of a 1-d packet mixture sampled on ``grid``."""
    w = grid.axis
    v = np.zeros(grid.shape, dtype=complex)
    for p in packets:
        Q = p.sigma ** 2 + 1j * p.R
        x0, xi0 = p.x0[0], p.xi0[0]
        v += p.c * Q ** -0.5 * np.exp(-np.pi * (w - xi0) ** 2 / Q) * np.exp(-2j * np.pi * x0 * (w - xi0))
    return SampledField(grid, v)


# -- criteria ---------------------------------------------------------------------------

def criterion_1():
    """Gaussian STFT closed form on a 9x9 probe grid, max relative deviation <= 1e-5."""
    worst = 0.0
    cases = [(Grid(1, 512, 16.0), 1.0), (Grid(1, 512, 16.0), 2.0),
             (Grid(2, 128, 16.0), np.eye(2)), (Grid(2, 128, 16.0), 2 * np.eye(2)),
             (Grid(2, 128, 16.0), np.diag([2.0, 0.5]))]
    for grid, A in cases:
        if grid.d == 1:
            xs = [np.array([v]) for v in np.linspace(-2, 2, 9)]
            ks = xs
            ext = 2.0
        else:
            pts = [np.array(p) for p in itertools.product((-1.5, 0.0, 1.5), repeat=2)]
            xs, ks, ext = pts, pts, 1.5
        S = stft(gaussian(grid, A), dx=0.5, dxi=0.5, x_extent=ext)
        for x in xs:
            ix = tuple(int(np.argmin(np.abs(S.x_axis - c))) for c in x)
            for k in ks:
                ik = tuple(int(np.argmin(np.abs(S.xi_axis - c))) for c in k)
                o = gaussian_stft_oracle(A, x, k)
                worst = max(worst, abs(S.values[ix + ik] - o) / abs(o))
    return worst <= 1e-5, f"max relative deviation {worst:.2e} (tol 1e-5)"


def criterion_2():
    """Dilated-Gaussian modulation norms vs the closed form, d=1."""
    grid = Grid(1, 512, 16.0)
    pairs = [IndexPair.of(p, q) for p in EXPS for q in EXPS]
    worst, worst22, pins = 0.0, 0.0, {}
    for lam in (0.5, 1.0, 2.0, 4.0):
        vals = modulation_norms(gaussian(grid, lam), pairs)
        for idx, v in zip(pairs, vals):
            err = abs(v / dilated_gaussian_mod_norm_oracle(lam, idx) - 1)
            if idx == IndexPair.of(2, 2):
                worst22 = max(worst22, err)
                pins[lam] = v
            else:
                worst = max(worst, err)
    pinned = abs(pins[1.0] - 2 ** -0.5) <= 1e-4 * 2 ** -0.5 and abs(pins[2.0] - 0.5) <= 1e-4 * 0.5
    ok = worst <= 1e-2 and worst22 <= 1e-4 and pinned
    return ok, f"max rel error {worst:.2e} (tol 1e-2), at (2,2) {worst22:.2e} (tol 1e-4), pins ok={pinned}"


def criterion_3():
    """Chirp W(FL^1, L^inf) norms vs |det(I+iR)|^{1/2}, relative error <= 2e-2."""
    errs = {}
    for R in (0.0, 1.0, 3.0):
        v = wiener_amalgam_norm(chirp(Grid(1, 512, 16.0), R, warn=False), (1, "inf"), x_extent=0.5)
        errs[f"R={R:g}"] = abs(v / chirp_wiener_norm_oracle(R) - 1)
        if R == 1.0:
            pin = abs(v / 2 ** 0.25 - 1)
    R2 = np.diag([1.0, 3.0])
    v = wiener_amalgam_norm(chirp(Grid(2, 128, 6.0), R2, warn=False), (1, "inf"), x_extent=0.5)
    errs["diag(1,3)"] = abs(v / chirp_wiener_norm_oracle(R2) - 1)
    worst = max(errs.values())
    return worst <= 2e-2 and pin <= 2e-2, f"max rel error {worst:.2e} (tol 2e-2), pin 2^(1/4) rel {pin:.1e}"


def criterion_4():
    """mu(J) = (-i)^{1/2} F, route consistency, unitarity and group law on the family."""
    grid = Grid(1, 512, 16.0)
    J = SymplecticMatrix.J(1)
    S1 = SymplecticMatrix(np.array([[1.2, 0.5], [0.3, (1 + 0.15) / 1.2]]))
    S2 = SymplecticMatrix(np.array([[0.8, -0.6], [1.1, (1 - 0.66) / 0.8]]))
    fj = routes = unit = group = 0.0
    for pk, f in _family(grid):
        ref = _fourier_oracle(pk, grid) * np.exp(-1j * np.pi / 4)
        u = apply(J, f)
        fj = max(fj, float(np.max(np.abs(phase_align(ref, u).values - ref.values))))
        outs = {r: apply(S1, f, r) for r in ("f3", "f5", "dense")}
        for r in ("f3", "f5"):
            routes = max(routes, aligned_error(outs["dense"], outs[r]))
        for u in list(outs.values()) + [apply(S1, f, "f4"), apply(J, f, "dense")]:
            unit = max(unit, abs(l2_norm(u) / l2_norm(f) - 1))
        group = max(group, aligned_error(apply(S1 @ S2, f), apply(S1, apply(S2, f))))
    ok = fj <= 1e-8 and routes <= 1e-7 and unit <= 1e-8 and group <= 1e-6
    return ok, (f"mu(J) vs F {fj:.1e} (1e-8), routes {routes:.1e} (1e-7), unitarity {unit:.1e} (1e-8), "
                f"group law {group:.1e} (1e-6)")


def criterion_5():
    """Propagators: quarter period, conservation, classical dispersive ratios."""
    grid = Grid(1, 512, 16.0)
    fam = _family(grid)
    quarter = cons = 0.0
    sweeps = {"harmonic": np.linspace(0.1, 3.0, 8), "repulsive": np.linspace(0.1, 1.0, 6),
              "free": np.linspace(0.1, 2.0, 6)}
    for pk, f in fam:
        u = propagate("harmonic", math.pi / 2, f)
        ref = _fourier_oracle(pk, grid)
        quarter = max(quarter, float(np.max(np.abs(phase_align(ref, u).values - ref.values))))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for kind, ts in sweeps.items():
                for t in ts:
                    cons = max(cons, abs(l2_norm(propagate(kind, t, f)) / l2_norm(f) - 1))
    g = gaussian(grid)
    ratios = [classical_dispersive_check("harmonic", t, g) for t in sweeps["harmonic"]]
    ratios += [classical_dispersive_check("repulsive", t, g) for t in sweeps["repulsive"]]
    rmax = max(ratios)
    ok = quarter <= 1e-8 and cons <= 1e-8 and rmax <= 1 + 1e-3
    return ok, f"t=pi/2 vs F {quarter:.1e} (1e-8), conservation {cons:.1e} (1e-8), max ratio {rmax:.6f} (<= 1.001)"


def criterion_6():
    """Index functions reproduce the proof-case exponents; duality holds exactly on a 9x9 grid."""
    F = Fraction
    want = {("inf", 1): (F(1), F(0)), (1, "inf"): (F(-1), F(-2)), (2, "inf"): (F(-1, 2), F(-1)),
            (2, 1): (F(0), F(-1, 2))}
    cases_ok = all((mu1(pq), mu2(pq)) == v for pq, v in want.items())
    dual_ok = True
    for a in range(9):
        for b in range(9):
            idx = IndexPair(F(a, 8), F(b, 8))
            c = idx.conjugate()
            dual_ok &= mu1(c) == -1 - mu2(idx) and mu2(c) == -1 - mu1(idx)
            classify_region(idx)
    return cases_ok and dual_ok, f"proof cases {cases_ok}, duality on 81 points {dual_ok}"


def criterion_7():
    """Dilation exponents: Gaussian witness rates and mu1/mu2 compliance."""
    wide = ExperimentConfig(N=1024, L=128.0, width=1 / 32, lambdas=(2, 4, 8, 16))
    rep, _ = dilation_exponent_experiment((2, "inf"), "large", wide)
    s2inf = rep.fitted
    rep, _ = dilation_exponent_experiment((2, 2), "large", ExperimentConfig(N=1024, L=8.0))
    s22 = rep.fitted
    compliant = True
    worst = []
    for pq in [IndexPair.of(p, q) for p in EXPS for q in EXPS]:
        for direction, L in (("large", 8.0), ("small", 128.0)):
            r, _ = dilation_exponent_experiment(pq, direction, ExperimentConfig(N=1024, L=L, tol=0.1))
            compliant &= r.passed
            if not r.passed:
                worst.append(f"{pq}:{direction}")
    ok = abs(s2inf + 0.5) <= 0.1 and abs(s22 + 0.5) <= 0.05 and compliant
    return ok, (f"(2,inf) slope {s2inf:+.4f} (-1/2 +- 0.1), (2,2) slope {s22:+.4f} (-1/2 +- 0.05), "
                f"bounds respected {compliant}{'' if compliant else ' ' + ','.join(worst)}")


def criterion_8():
    """Harmonic dispersive numerator exponent on [0.15, 0.6] and refinement-stable rho."""
    cfg = ExperimentConfig(N=8192, L=64.0, width=16.0, kind="harmonic", r="inf", t_min=0.15, t_max=0.6,
                           t_count=10, x_step=1 / 16, tol=0.15, refine=True)
    rep, _ = dispersive_experiment("harmonic", "inf", cfg.sweep_t(), cfg)
    slope = rep.fitted
    change = rep.extra["sup_rho"] / rep.extra["refined_sup_rho"] - 1
    ok = abs(slope + 1) <= 0.15 and abs(change) <= 0.1
    return ok, f"exponent {slope:+.4f} (-1 +- 0.15), sup rho change under refinement {change:+.2e} (+-10%)"


def _admissible_reference(q, r, d, endpoint):
    iq = Fraction(0) if q == "inf" else 1 / Fraction(q)
    ir = Fraction(0) if r == "inf" else 1 / Fraction(r)
    if not (2 * iq + d * ir == Fraction(d, 2) and ir <= Fraction(1, 2)):
        return False
    return iq < Fraction(1, 4) or (endpoint and d > 1 and iq == Fraction(1, 4) and ir == Fraction(d - 1, 2 * d))


def criterion_9():
    """Strichartz ensemble ratio at (8,4): finite and refinement-stable; admissibility predicate exact."""
    cfg = ExperimentConfig(N=256, L=16.0, q="8", r="4", T=1.0, steps=64, ensemble=32, seed=0, x_step=1 / 16,
                           refine=True)
    rep, _ = strichartz_ratio_experiment("harmonic", ("8", "4"), 1.0, cfg)
    sup, ref = rep.fitted, rep.predicted
    stable = math.isfinite(sup) and abs(sup / ref - 1) <= 0.1
    tests = [(q, r) for q in ("2", "4", "5", "6", "8", "12", "inf") for r in
             ("2", "12/5", "3", "4", "6", "8", "inf", "3/2")]
    adm_ok = True
    for d in (1, 2, 3):
        for q, r in tests:
            for ep in (False, True):
                adm_ok &= strichartz_admissible(q, r, d, ep) == _admissible_reference(q, r, d, ep)
    adm_ok &= strichartz_admissible(4, 4, 2, True) and strichartz_admissible(4, 3, 3, True)
    adm_ok &= not strichartz_admissible(4, 4, 2, False) and not strichartz_admissible(4, 3, 3, False)
    ok = stable and adm_ok
    return ok, f"sup ratio {sup:.6f}, refined {ref:.6f} (+-10%), admissibility exact {adm_ok}"


def criterion_10():
    """Byte-identical CSV output for repeated runs with the same config and seed."""
    same = True
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        runs = {
            "dilation": lambda: dilation_exponent_experiment(
                (2, "inf"), "large", ExperimentConfig(N=1024, L=8.0, seed=3))[1],
            "dispersive": lambda: dispersive_experiment(
                "repulsive", "inf", [0.5, 0.8, 1.1], ExperimentConfig(N=512, L=16.0, seed=3))[1],
            "strichartz": lambda: strichartz_ratio_experiment(
                "harmonic", ("8", "4"), 1.0, ExperimentConfig(N=256, L=16.0, ensemble=3, steps=8, seed=3))[1],
        }
        for name, fn in runs.items():
            paths = [emit_report(fn(), tmp / f"{name}{k}.csv") for k in range(2)]
            for a, b in zip(*paths):
                same &= filecmp.cmp(a, b, shallow=False)
        cfg = tmp / "c.cfg"
        cfg.write_text("N = 256\nL = 16\nq = 8\nr = 4\nensemble = 2\nsteps = 4\nseed = 5\n")
        for k in range(2):
            cli_main(["strichartz", "--config", str(cfg), "--out", str(tmp / f"cli{k}.csv")])
        same &= filecmp.cmp(tmp / "cli0.csv", tmp / "cli1.csv", shallow=False)
        same &= filecmp.cmp(tmp / "cli0.plot.csv", tmp / "cli1.plot.csv", shallow=False)
    return same, f"repeated runs byte-identical {same}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10]


def _line(n, ok, detail, secs):
    return f"ACCEPTANCE {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{secs:.1f}s]"


@pytest.mark.parametrize("n", range(1, 11))
def test_criterion(n, capsys):
    t0 = time.time()
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail, time.time() - t0))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, fn in enumerate(CRITERIA, 1):
        t0 = time.time()
        ok, detail = fn()
        failed += not ok
        print(_line(n, ok, detail, time.time() - t0), flush=True)
    sys.exit(1 if failed else 0)
