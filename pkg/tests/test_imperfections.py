import math

import numpy as np
import pytest

from qtent.circuit import TentMapParams, apply_sequence, build_map_sequence, gate_count
from qtent.imperfections import (
    NoiseConfig,
    NoisyStream,
    StaticDisorder,
    apply_static_kick,
    count_kicks,
    make_rng,
    perturb_gate,
    perturbed_gate_matrix,
    run_perturbed_map,
    sample_cap,
    sample_static_disorder,
)
from qtent.statevec import FLIP_AXIS, HALF_TURN_AXIS, ElementaryGate, GateError, StateVector

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def op_on(n, ops):
    """Kronecker product with qubit j as bit j of the index (qubit 0 rightmost)."""
    out = np.eye(1, dtype=complex)
    for j in reversed(range(n)):
        out = np.kron(out, ops.get(j, np.eye(2)))
    return out


def dense_dH(d: StaticDisorder):
    n = d.n_q
    H = sum(d.delta[j] * op_on(n, {j: SZ}) for j in range(n))
    H = H + sum(2 * d.J[j] * op_on(n, {j: SX, j + 1: SX}) for j in range(n - 1))
    return H


def expm_herm(H, scale=1j):
    w, v = np.linalg.eigh(H)
    return (v * np.exp(scale * w)) @ v.conj().T


def test_zero_eps_disorder_is_zero():
    d = sample_static_disorder(0.0, 5, seed=1)
    assert not d.delta.any() and not d.J.any()


def test_negative_eps_rejected():
    with pytest.raises(ValueError):
        sample_static_disorder(-1e-3, 4)


def test_disorder_bounds_and_variance():
    d = sample_static_disorder(0.02, 100_000, seed=2)
    bound = math.sqrt(3) * 0.02
    assert np.abs(d.delta).max() <= bound and np.abs(d.J).max() <= bound
    assert np.mean(d.delta**2) == pytest.approx(0.02**2, rel=0.02)


def test_disorder_trace_norm():
    d = sample_static_disorder(1e-2, 8, seed=3)
    H = dense_dH(d)
    expected = np.sum(d.delta**2) + 4 * np.sum(d.J**2)
    assert np.trace(H @ H).real / 256 == pytest.approx(expected)


def test_disorder_deterministic_and_text_roundtrip():
    a = sample_static_disorder(3e-4, 6, seed=11)
    b = sample_static_disorder(3e-4, 6, seed=11)
    np.testing.assert_array_equal(a.delta, b.delta)
    c = StaticDisorder.from_text(a.to_text())
    np.testing.assert_array_equal(a.delta, c.delta)
    np.testing.assert_array_equal(a.J, c.J)
    assert (c.eps, c.seed) == (a.eps, a.seed)


def test_static_kick_zero_is_identity():
    s = StateVector.random(4, np.random.default_rng(0))
    ref = s.amps.copy()
    apply_static_kick(s, sample_static_disorder(0.0, 4, 0))
    np.testing.assert_array_equal(s.amps, ref)


def test_static_kick_vs_dense_exponential():
    d = sample_static_disorder(1e-2, 4, seed=4)
    s = StateVector.random(4, np.random.default_rng(1))
    want = expm_herm(dense_dH(d)) @ s.amps
    apply_static_kick(s, d)
    assert np.linalg.norm(s.amps - want) < 1e-5
    assert abs(s.norm2() - 1) < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_splitting_error_bound(n):
    eps = 1e-2
    d = sample_static_disorder(eps, n, seed=n)
    s = StateVector.random(n, np.random.default_rng(n))
    want = expm_herm(dense_dH(d)) @ s.amps
    apply_static_kick(s, d)
    assert np.linalg.norm(s.amps - want) <= 5 * eps**3 * n


def test_static_kick_size_mismatch():
    with pytest.raises(GateError):
        apply_static_kick(StateVector.basis(3), sample_static_disorder(1e-3, 4, 0))


def test_perturb_zero_eps_unchanged():
    rng = make_rng(0)
    for g in (ElementaryGate("B1", 0, angle=0.3), ElementaryGate("CN", 0, 1), ElementaryGate("A", 2)):
        assert perturb_gate(g, NoiseConfig(0.0), rng) == g


def test_perturbed_angles_within_eps():
    rng = make_rng(1)
    g = ElementaryGate("B2", 0, 1, 0.5)
    angles = np.array([perturb_gate(g, NoiseConfig(0.05), rng).angle for _ in range(10_000)])
    assert np.abs(angles - 0.5).max() <= 0.05


def test_perturbed_gates_unitary():
    rng = make_rng(2)
    for g in (ElementaryGate("CN", 0, 1), ElementaryGate("A", 0), ElementaryGate("B1", 0, angle=1.0)):
        for _ in range(50):
            m = perturbed_gate_matrix(perturb_gate(g, NoiseConfig(0.1), rng))
            np.testing.assert_allclose(m.conj().T @ m, np.eye(2), atol=1e-12)


def test_reversal_never_perturbed():
    g = ElementaryGate("R", 3)
    assert perturb_gate(g, NoiseConfig(0.1), make_rng(0)) is g


@pytest.mark.parametrize("axis", [FLIP_AXIS, HALF_TURN_AXIS])
def test_cap_samples(axis):
    eps = 0.2
    n = sample_cap(make_rng(3), axis, eps, 20_000)
    np.testing.assert_allclose(np.linalg.norm(n, axis=1), 1, atol=1e-12)
    dist = np.linalg.norm(n - np.asarray(axis), axis=1)
    assert dist.max() <= eps + 1e-12
    # uniform in solid angle: the cosine to the axis is uniform on [1 - eps^2/2, 1]
    c = n @ np.asarray(axis)
    assert np.mean(c) == pytest.approx(1 - eps * eps / 4, abs=2e-4)


def test_ideal_axis_matrices():
    np.testing.assert_allclose(perturbed_gate_matrix(ElementaryGate("CN", 0, 1)), SX)
    np.testing.assert_allclose(
        perturbed_gate_matrix(ElementaryGate("A", 0)), np.array([[1, 1], [1, -1]]) / math.sqrt(2), atol=1e-15
    )


def test_channel_none_bit_exact():
    seq = build_map_sequence(TentMapParams(6))
    a = StateVector.random(6, np.random.default_rng(5))
    b = a.copy()
    run_perturbed_map(a, seq, None)
    apply_sequence(b, seq)
    np.testing.assert_array_equal(a.amps, b.amps)


def test_static_zero_eps_bit_exact():
    seq = build_map_sequence(TentMapParams(6))
    a = StateVector.random(6, np.random.default_rng(6))
    b = a.copy()
    run_perturbed_map(a, seq, sample_static_disorder(0.0, 6, 0))
    apply_sequence(b, seq)
    np.testing.assert_array_equal(a.amps, b.amps)


def test_kick_count_per_iteration():
    for n in (4, 7, 10):
        seq = build_map_sequence(TentMapParams(n))
        assert count_kicks(StateVector.basis(n), seq, sample_static_disorder(1e-4, n, 0)) == gate_count(n)


def test_static_channel_matches_hook_oracle():
    n = 5
    seq = build_map_sequence(TentMapParams(n))
    d = sample_static_disorder(1e-3, n, 7)
    kick = expm_herm(dense_dH(d))
    a = StateVector.random(n, np.random.default_rng(7))
    b = a.copy()
    run_perturbed_map(a, seq, d)

    def hook(state, i, gate):
        state.amps[:] = kick @ state.amps

    apply_sequence(b, seq, hook=hook)
    # splitting error per kick is O(eps^3)
    assert np.linalg.norm(a.amps - b.amps) < gate_count(n) * 5 * (1e-3) ** 3 * n


def test_noise_stream_matches_gatewise():
    n = 4
    seq = build_map_sequence(TentMapParams(n))
    cfg = NoiseConfig(0.05)
    # gate-by-gate oracle draws in the same order as the stream: phases, then CN axes, then A axes
    kinds, js, ks, angles, mats = NoisyStream(seq, cfg).draw(make_rng(9))
    s = StateVector.random(n, np.random.default_rng(8))
    ref = s.copy()
    run_perturbed_map(s, seq, cfg, make_rng(9))
    from qtent.circuit import run_compiled

    run_compiled(ref, seq, compiled=(kinds, js, ks, angles, mats))
    np.testing.assert_array_equal(s.amps, ref.amps)
    phase = [i for i, g in enumerate(seq.gates) if g.kind in ("B1", "B2")]
    d = angles[phase] - seq.compiled[3][phase]
    assert np.abs(d).max() <= 0.05 and np.abs(d).min() > 0


def test_noise_reproducible():
    seq = build_map_sequence(TentMapParams(6))
    a = StateVector.basis(6, 3)
    b = StateVector.basis(6, 3)
    for s in (a, b):
        rng = make_rng(42)
        for _ in range(5):
            run_perturbed_map(s, seq, NoiseConfig(0.01), rng)
    np.testing.assert_array_equal(a.amps, b.amps)


def test_static_reproducible_and_unitary():
    n = 6
    seq = build_map_sequence(TentMapParams(n))
    a = StateVector.random(n, np.random.default_rng(10))
    b = a.copy()
    for s in (a, b):
        d = sample_static_disorder(1e-3, n, seed=5)
        for _ in range(1000):
            run_perturbed_map(s, seq, d)
    np.testing.assert_array_equal(a.amps, b.amps)
    assert abs(a.norm2() - 1) < 1e-9


def test_noise_norm_drift():
    n = 6
    seq = build_map_sequence(TentMapParams(n))
    s = StateVector.random(n, np.random.default_rng(11))
    rng = make_rng(0)
    for _ in range(1000):
        run_perturbed_map(s, seq, NoiseConfig(0.05), rng)
    assert abs(s.norm2() - 1) < 1e-9


def test_unknown_channel():
    with pytest.raises(TypeError):
        run_perturbed_map(StateVector.basis(3), build_map_sequence(TentMapParams(3)), "noise")
