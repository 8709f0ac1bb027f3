import math

import numpy as np
import pytest

from qtent.classical import (
    ClassicalMap,
    PhasePoint,
    SECTION_PRESETS,
    chaotic_mask,
    circle_points,
    classical_step,
    diffusion_estimate,
    diffusion_theory,
    force,
    jacobian,
    poincare_section,
    return_distance,
    trajectory,
)


@pytest.mark.parametrize("K", SECTION_PRESETS + (5.0,))
def test_fixed_points(K):
    cmap = ClassicalMap.from_K(K)
    for theta in (math.pi / 2, 3 * math.pi / 2):
        out = classical_step(PhasePoint(theta, 0.0), cmap)
        assert out.theta == pytest.approx(theta, abs=1e-15)
        assert out.p == pytest.approx(0.0, abs=1e-15)


def test_force_continuous_at_seams():
    k = 2.3
    left = force(math.pi - 1e-12, k)
    right = force(math.pi, k)
    assert left == pytest.approx(-k * math.pi / 2)
    assert right == pytest.approx(-k * math.pi / 2)
    assert force(2 * math.pi - 1e-12, k) == pytest.approx(force(0.0, k), abs=1e-10)


def test_theta_reduced():
    out = classical_step(PhasePoint(6.0, 3.0), ClassicalMap(1.0, 1.0))
    assert 0 <= out.theta < 2 * math.pi


def test_noise_bounded():
    cmap = ClassicalMap(1.7, 1.0)
    rng = np.random.default_rng(0)
    ideal = classical_step(PhasePoint(1.0, 0.5), cmap)
    for _ in range(200):
        noisy = classical_step(PhasePoint(1.0, 0.5), cmap, 0.01, rng)
        assert abs(noisy.p - ideal.p) <= 0.01


def test_area_preservation():
    cmap = ClassicalMap.from_K(1.7)
    for theta in np.linspace(0.1, 2 * math.pi - 0.1, 25):
        if min(abs(theta - math.pi), abs(theta - 2 * math.pi)) < 1e-3:
            continue
        for p in (-2.0, 0.0, 1.3):
            assert abs(np.linalg.det(jacobian(theta, p, cmap)) - 1) < 1e-8


def test_island_bounded_at_small_K():
    cmap = ClassicalMap.from_K(0.53)
    tr = trajectory(PhasePoint(1.5 * math.pi + 0.4, 0.0), cmap, 2000)
    assert np.abs(tr[:, 1]).max() < 1.0


def test_global_chaos_at_K17():
    cmap = ClassicalMap.from_K(1.7)
    tr = trajectory(PhasePoint(math.pi / 2 + 1e-3, 0.0), cmap, 20_000)
    visited = np.unique(np.floor(tr[:, 0] / (2 * math.pi) * 50).astype(int))
    assert visited.size >= 25


def test_section_zero_steps_echoes_initial():
    a = poincare_section(ClassicalMap.from_K(1.7), 10, 0, seed=3)
    b = poincare_section(ClassicalMap.from_K(1.7), 10, 0, seed=3)
    assert a.shape == (10, 2)
    np.testing.assert_array_equal(a, b)


def test_section_shape_and_range():
    cmap = ClassicalMap(2.0, 0.5)
    pts = poincare_section(cmap, 7, 30, seed=1)
    assert pts.shape == (7 * 31, 2)
    assert (pts[:, 1] >= 0).all() and (pts[:, 1] < 2 * math.pi / 0.5).all()
    assert poincare_section(cmap, 0, 10).shape == (0, 2)


def test_diffusion_k10():
    res = diffusion_estimate(10.0, 1.0, 10_000, 100, seed=0)
    assert res.valid
    assert res.D_theory == pytest.approx(82.25, rel=1e-3)
    assert abs(res.D / res.D_theory - 1) < 0.25


def test_diffusion_correlations_at_K5():
    # kick correlations at lag 2 push the K=5 rate well above the random-phase value
    res = diffusion_estimate(10.0, 0.5, 10_000, 100, seed=0)
    assert 1.3 < res.D / res.D_theory < 1.5


def test_diffusion_zero_k():
    with pytest.warns(UserWarning):
        res = diffusion_estimate(0.0, 0.5, 100, 10, seed=0)
    assert res.D == 0 and not res.valid


def test_diffusion_theory_quadratic():
    assert diffusion_theory(4.0) == pytest.approx(4 * diffusion_theory(2.0))


def test_exact_inverse_without_noise():
    cmap = ClassicalMap.from_K(1.7)
    th, p = circle_points(40)
    d = return_distance(th, p, cmap, 15, 0.0)
    assert d.max() < 1e-9


def test_noisy_irreversibility():
    cmap = ClassicalMap.from_K(1.7)
    th, p = circle_points(200)
    mask = chaotic_mask(th, p, cmap)
    assert mask.sum() > 20
    d = return_distance(th[mask], p[mask], cmap, 15, 0.01, seed=0)
    assert d.mean() > 10 * 0.01
