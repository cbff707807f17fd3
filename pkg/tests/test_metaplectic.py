import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tfmeta.errors import DimensionError, RouteError, SingularityError
from tfmeta.explab import random_packets, render
from tfmeta.field import (Grid, SampledField, aligned_error, evaluate, fourier, gaussian, l2_norm, packet,
                          phase_align)
from tfmeta.metaplectic import (apply, classical_dispersive_check, plan, propagate, propagator_matrix,
                                valid_routes)
from tfmeta.symplectic import SymplecticMatrix

G = Grid(1, 512, 16.0)


def family(grid=G):
    return (packet(grid, 0.7, -0.4, 1.1, 0.3) + packet(grid, -1.0, 0.8, 0.9, -0.2, 0.5))


def ft_packet(x0, xi0, sig, R, c, w):
    Q = sig ** 2 + 1j * R
    return c * Q ** -0.5 * np.exp(-np.pi * (w - xi0) ** 2 / Q) * np.exp(-2j * np.pi * x0 * (w - xi0))


def analytic_fourier():
    w = G.axis
    return SampledField(G, ft_packet(0.7, -0.4, 1.1, 0.3, 1, w) + ft_packet(-1.0, 0.8, 0.9, -0.2, 0.5, w))


def maxdev_aligned(ref, v):
    return float(np.max(np.abs(phase_align(ref, v).values - ref.values)))


S_GEN = SymplecticMatrix(np.array([[1.2, 0.5], [0.3, (1 + 0.15) / 1.2]]))


def test_phase_alignment_recovers_phase():
    f = family()
    assert maxdev_aligned(f, f * np.exp(2.1j)) <= 1e-14


def test_J_is_fourier():
    F = analytic_fourier()
    ref = F * np.exp(-1j * math.pi / 4)
    J = SymplecticMatrix.J(1)
    for r in ("f3", "dense"):
        u = apply(J, family(), r)
        assert maxdev_aligned(ref, u) <= 1e-8
    # the sign convention makes the identity hold without any phase alignment
    assert np.max(np.abs(apply(J, family()).values - ref.values)) <= 1e-8


def test_J_is_fourier_2d():
    g = Grid(2, 64, 8.0)  # self-dual: N / L = L
    f = packet(g, (0.3, -0.2), (0.5, 0.1), 1.0, 0.2)
    u = apply(SymplecticMatrix.J(2), f)
    F = fourier(f)
    assert F.grid == g
    assert np.max(np.abs(u.values - (-1j) * F.values)) <= 1e-8


def test_route_consistency_and_unitarity():
    f = family()
    outs = {r: apply(S_GEN, f, r) for r in ("f3", "f4", "f5", "dense")}
    for r, u in outs.items():
        assert aligned_error(outs["dense"], u) <= 1e-7
        assert abs(l2_norm(u) / l2_norm(f) - 1) <= 1e-8


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-1.5, 1.5), st.floats(0.3, 1.5))
def test_route_consistency_random(seed, b, a):
    if abs(b) < 0.2:
        b = 0.2
    c = 0.4
    S = SymplecticMatrix(np.array([[a, b], [c, (1 + b * c) / a]]))
    f = render(random_packets(np.random.default_rng(seed), 1), Grid(1, 256, 16.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u3, u5, ud = apply(S, f, "f3"), apply(S, f, "f5"), apply(S, f, "dense")
    assert aligned_error(ud, u3) <= 1e-7
    assert aligned_error(ud, u5) <= 1e-7


def test_special_routes():
    f = family()
    lower = SymplecticMatrix.from_blocks(1, 0, 1, 1)
    assert plan(lower, f).route == "lower-triangular"
    u = apply(lower, f)
    assert np.max(np.abs(u.values - np.exp(1j * math.pi * G.axis ** 2) * f.values)) <= 1e-14
    block = SymplecticMatrix.from_blocks(2, 0, 0, 0.5)
    assert plan(block, f).route == "block-diagonal"
    u = apply(block, f)
    want = 2 ** -0.5 * evaluate(f, G.axis[:, None] / 2)
    assert np.max(np.abs(u.values - want)) <= 1e-10


def test_group_law():
    f = family()
    S2 = SymplecticMatrix(np.array([[0.8, -0.6], [1.1, (1 - 0.66) / 0.8]]))
    a = apply(S_GEN, apply(S2, f))
    b = apply(S_GEN @ S2, f)
    assert aligned_error(b, a) <= 1e-6


def test_route_errors():
    f = family()
    lower = SymplecticMatrix.from_blocks(1, 0, 1, 1)
    with pytest.raises(SingularityError):
        apply(lower, f, "f3")
    with pytest.raises(RouteError) as e:
        apply(SymplecticMatrix.J(1), f, "lower")
    assert "b-invertible" in e.value.valid_routes
    with pytest.raises(RouteError):
        apply(SymplecticMatrix.J(1), f, "nonsense")
    assert valid_routes(SymplecticMatrix.J(1)) == ["b-invertible", "dense-kernel"]
    with pytest.raises(DimensionError):
        apply(SymplecticMatrix.J(2), f)


def test_dense_route_size_limit():
    f = gaussian(Grid(1, 2048, 64.0))
    with pytest.raises(RouteError):
        apply(SymplecticMatrix.J(1), f, "dense")


def test_harmonic_quarter_period_is_fourier():
    u = propagate("harmonic", math.pi / 2, family())
    assert maxdev_aligned(analytic_fourier(), u) <= 1e-8


def test_harmonic_period():
    f = family()
    u = propagate("harmonic", 2 * math.pi - 0.01, f)
    v = propagate("harmonic", -0.01, f)
    assert aligned_error(v, u) <= 1e-8
    assert aligned_error(f, u) <= 0.05


@pytest.mark.parametrize("kind,ts", [("harmonic", [0.3, 1.0, 2.0, 3.0, 4.5]),
                                     ("repulsive", [-0.5, 0.3, 0.7, 1.0]),
                                     ("free", [-1.0, 0.3, 1.0, 2.0])])
def test_conservation(kind, ts):
    f = family()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for t in ts:
            assert abs(l2_norm(propagate(kind, t, f)) / l2_norm(f) - 1) <= 1e-8


def test_free_with_matrix_2d():
    g = Grid(2, 128, 16.0)
    f = packet(g, (0.3, -0.2), (0.5, 0.1), 1.0, 0.2)
    B = np.diag([1.0, 2.0])
    u = propagate("free", 0.5, f, B=B)
    assert abs(l2_norm(u) / l2_norm(f) - 1) <= 1e-8
    np.testing.assert_allclose(propagator_matrix("free", 0.5, 2, B).B, 0.5 * B)


@pytest.mark.parametrize("kind", ["harmonic", "repulsive", "free"])
def test_semigroup(kind):
    f = family()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = propagate(kind, 0.4, propagate(kind, 0.3, f))
        b = propagate(kind, 0.7, f)
    assert aligned_error(b, a) <= 1e-6


def test_singular_times():
    f = family()
    with pytest.raises(SingularityError, match="pi"):
        propagate("harmonic", math.pi + 1e-4, f)
    with pytest.raises(SingularityError):
        propagate("repulsive", 1e-4, f)
    with pytest.raises(SingularityError):
        propagate("free", 0.0, f)
    propagate("harmonic", math.pi + 1e-4, f, eps_t=1e-5)


def test_classical_dispersive_ratios():
    g = gaussian(G)
    r1 = classical_dispersive_check("harmonic", math.pi / 2, g)
    r2 = classical_dispersive_check("repulsive", 1.0, g)
    assert r1 <= 1 + 1e-3 and r2 <= 1 + 1e-3
    assert classical_dispersive_check("repulsive", 1.0, g * 3.7) == pytest.approx(r2, rel=1e-12)
