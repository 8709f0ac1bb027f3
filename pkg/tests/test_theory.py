import math

import numpy as np
import pytest
from scipy.integrate import quad

from qtent.circuit import gate_count
from qtent.theory import (
    LN_10_9,
    SIGMA,
    TheoryParams,
    b2_form_factor,
    chaos_border,
    chi,
    coupling_time,
    delta_chi,
    delta_chi_diffusive,
    ln_fidelity_theory,
    noise_time,
    tf_theory,
    timescales,
)


def delta_chi_quad(s, beta):
    f = lambda u: -2 * (s - u) * b2_form_factor(u, beta)
    pts = [x for x in (0.5, 1.0) if x < s]
    return quad(f, 0, s, points=pts or None, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def test_b2_values():
    assert b2_form_factor(0.0, 2) == 1
    assert b2_form_factor(0.5, 2) == 0.5
    assert b2_form_factor(1.5, 2) == 0
    assert b2_form_factor(0.0, 1) == 1


def test_b2_beta1_continuous_at_one():
    lo = b2_form_factor(1 - 1e-12, 1)
    hi = b2_form_factor(1 + 1e-12, 1)
    assert lo == pytest.approx(math.log(3) - 1, abs=1e-10)
    assert hi == pytest.approx(math.log(3) - 1, abs=1e-10)


def test_bad_beta():
    with pytest.raises(ValueError):
        b2_form_factor(0.1, 3)
    with pytest.raises(ValueError):
        delta_chi(0.1, 4)
    with pytest.raises(ValueError):
        TheoryParams(1.0, 1.0, beta=0)


@pytest.mark.parametrize("beta", [1, 2])
@pytest.mark.parametrize("s", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_delta_chi_matches_quadrature(s, beta):
    assert abs(delta_chi(s, beta) - delta_chi_quad(s, beta)) < 1e-8


def test_delta_chi_beta1_at_one():
    assert delta_chi(1.0, 1) == pytest.approx(-5 / 9, abs=1e-12)
    assert delta_chi(1 + 1e-13, 1) == pytest.approx(-5 / 9, abs=1e-10)


@pytest.mark.parametrize("beta", [1, 2])
def test_continuity_at_one(beta):
    for f in (delta_chi, chi):
        assert abs(f(1.0, beta) - f(1.0 + 1e-13, beta)) < 1e-12


def test_small_s_expansion():
    # next order of the expansion is -s^4/3
    for s in (0.01, 0.003):
        resid = delta_chi(s, 1) - (-s * s + 2 / 3 * s**3)
        assert resid == pytest.approx(-(s**4) / 3, rel=0.02)
    assert abs(delta_chi(0.01, 1) - delta_chi_quad(0.01, 1)) < 1e-14


def test_large_s_asymptote_corrected():
    # integral-consistent tail: -s + ln(2s)/6 + 1/3
    s = 50.0
    assert abs(delta_chi(s, 1) - (-s + math.log(2 * s) / 6 + 1 / 3)) < 1e-3


def test_chi_values():
    assert chi(0.0, 1) == 0
    assert chi(1e-4, 1) == pytest.approx(1e-4, rel=1e-3)
    # beta=2 above s=1 with the integral-consistent branch
    assert chi(2.0, 2) == pytest.approx(2 + 4 - 2 + 1 / 3)


def test_ln_fidelity_modes():
    P = TheoryParams(1000.0, 4096.0)
    assert ln_fidelity_theory(0.0, P) == 0
    t = 10.0
    for mode in ("full", "quadratic"):
        assert ln_fidelity_theory(t, P, mode) == pytest.approx(t / P.t_c, rel=0.05)
    t = SIGMA * P.t_H
    assert ln_fidelity_theory(t, P, "quadratic") == pytest.approx(3 * SIGMA * P.t_H / P.t_c)
    with pytest.raises(ValueError):
        ln_fidelity_theory(1.0, P, "cubic")


def test_diffusive_correction():
    assert delta_chi_diffusive(1.0, 10.0, 1, 1) == pytest.approx(4 / (1.5 * 2.5 * math.sqrt(40 * math.pi)))
    assert delta_chi_diffusive(1.0, 10.0, 1, 1) == pytest.approx(0.0952, abs=1e-4)
    a = delta_chi_diffusive(0.7, 5.0, 2)
    assert delta_chi_diffusive(0.7, 10.0, 2) == pytest.approx(a / 2)
    for d in (1, 2, 3):
        assert delta_chi_diffusive(0.3, 2.0, d, 2) > 0
    with pytest.raises(ValueError):
        delta_chi_diffusive(1.0, 1.0, 4)


def test_timescale_examples():
    assert coupling_time(5e-7, 10) == pytest.approx(2.512e6, rel=1e-3)
    assert noise_time(0.01, 10) == pytest.approx(1052.6, rel=1e-4)
    ts = timescales(3e-5, 10)
    assert ts["t_H"] == 1024
    assert ts["eps_ch"] == pytest.approx(2**-5 / (399 * math.sqrt(10)))
    assert chaos_border(10) == ts["eps_ch"]
    assert ts["t_f_simple"] == pytest.approx(ts["t_c"] * LN_10_9)
    with pytest.raises(ValueError):
        timescales(0.0, 10)


def test_chaos_border_means_tc_equals_tH():
    for n in (6, 10, 14):
        assert coupling_time(chaos_border(n), n) == pytest.approx(2.0**n)


def test_tf_limit():
    t_c = 100.0
    assert tf_theory(t_c, 1e9) == pytest.approx(t_c * LN_10_9, rel=0.01)


def test_tf_root():
    t_c, t_H = 500.0, 256.0
    t = tf_theory(t_c, t_H)
    assert t / t_c + 2 / SIGMA * t * t / (t_c * t_H) == pytest.approx(LN_10_9)


def test_tf_interior_maximum():
    n = np.arange(6, 19)
    tf = np.array([timescales(5e-7, int(q))["t_f_theory"] for q in n])
    top = int(np.argmax(tf))
    assert 0 < top < n.size - 1
    assert np.all(np.diff(tf[top:]) < 0)
    assert np.any(np.diff(tf[:top]) > 0)


def test_gate_count_used():
    assert coupling_time(1e-3, 8) == pytest.approx(1 / (1e-6 * 8 * gate_count(8) ** 2))
