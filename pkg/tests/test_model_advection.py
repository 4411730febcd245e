import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lowmach.core import total_variation
from lowmach.model_advection import (ALPHA, BETA, THETA_M, AdvectionParams, PulseBounds, RejectedStepError,
                                     advect_step_ars222, advect_step_mood, advect_step_o1, advect_step_tvd_ap,
                                     exact_advection, fourier_symbols, pulse, run_advection,
                                     solve_periodic_upwind)


def params(n=100, eps=1e-2, sigma_e=1.0, c_e=1.0, c_i=0.5):
    dx = 1.0 / n
    return AdvectionParams(c_e, c_i, eps, dx, sigma_e * dx / c_e)


def test_constants():
    assert BETA == pytest.approx(0.29289321881345254)
    assert ALPHA == pytest.approx(BETA - 1.0, abs=1e-15)
    assert THETA_M == pytest.approx(math.sqrt(2) - 1, abs=1e-15)


def test_params_validation():
    with pytest.raises(ValueError):
        AdvectionParams(1.0, 0.5, 0.0, 0.01, 0.01)
    p = AdvectionParams(1.0, 0.5, 1e-4, 0.01, 0.005)
    assert p.stiff_speed == pytest.approx(50.0)
    assert p.sigma_i == pytest.approx(25.0)


def test_periodic_upwind_solver_matches_dense():
    rng = np.random.default_rng(1)
    b = rng.normal(size=9)
    a = 3.7
    A = (1 + a) * np.eye(9) - a * np.roll(np.eye(9), -1, axis=1)
    np.testing.assert_allclose(solve_periodic_upwind(a, b), np.linalg.solve(A, b), rtol=0, atol=1e-13)


def test_o1_three_cell_dense():
    # sigma_e = 0.5, sigma_i = c_i dt / (sqrt(eps) dx) = 10
    p = AdvectionParams(1.0, 20.0, 1.0, 1.0, 0.5)
    w = np.array([1.0, 0.0, 0.0])
    shift = np.roll(np.eye(3), -1, axis=1)  # row j picks j - 1
    A = 11.0 * np.eye(3) - 10.0 * shift
    rhs = w - 0.5 * (w - shift @ w)
    np.testing.assert_allclose(advect_step_o1(w, p), np.linalg.solve(A, rhs), atol=1e-14)


def test_o1_vanishing_stiff_part_is_upwind():
    p = AdvectionParams(1.0, 1e-14, 1.0, 0.1, 0.05)
    w = np.sin(2 * np.pi * np.arange(10) / 10)
    np.testing.assert_allclose(advect_step_o1(w, p), w - 0.5 * (w - np.roll(w, 1)), atol=1e-12)


def test_cfl_violation_rejected():
    with pytest.raises(RejectedStepError):
        advect_step_o1(np.zeros(10), params(sigma_e=1.2))


@pytest.mark.parametrize("step", ["o1", "o2", "tvdap", "mood"])
def test_constants_preserved(step):
    p = params(eps=1e-4)
    w = np.full(30, 0.7)
    out = run_advection(step, w, p, 3)[0]
    np.testing.assert_allclose(out, 0.7, rtol=0, atol=1e-14)


def test_ars_second_order_in_time():
    # per-step error against the exact translation shrinks ~8x when dt halves
    n = 400
    x = (np.arange(n) + 0.5) / n
    w0 = lambda s: np.sin(2 * np.pi * s)
    errs = []
    for sigma in (0.4, 0.2):
        p = params(n, eps=1.0, sigma_e=sigma)
        w = advect_step_ars222(w0(x), p)[1]
        ref = advect_step_ars222(advect_step_ars222(w0(x), params(n, 1.0, sigma / 2))[1], params(n, 1.0, sigma / 2))[1]
        errs.append(np.abs(w - ref).max())
    assert errs[0] / errs[1] > 6


def test_ars_pulse_overshoots():
    eps = 1e-4
    n = 100
    p = params(n, eps)
    w = pulse(eps)((np.arange(n) + 0.5) / n)
    _, tr = run_advection("o2", w, p, 50)
    assert tr["linf"].max() > eps


def test_blend_endpoints():
    rng = np.random.default_rng(3)
    w = rng.normal(size=60)
    p = params(60, eps=1e-3)
    np.testing.assert_allclose(advect_step_tvd_ap(w, p, 0.0), advect_step_o1(w, p), atol=1e-13)
    np.testing.assert_allclose(advect_step_tvd_ap(w, p, 1.0), advect_step_ars222(w, p)[1], atol=1e-13)


def test_blend_is_not_two_solve_average():
    # the single blended solve is the scheme with the uniform TVD property; it
    # differs from averaging two separately solved steps at interior theta
    rng = np.random.default_rng(4)
    w = rng.normal(size=60)
    p = params(60, eps=1e-2)
    mix = THETA_M * advect_step_ars222(w, p)[1] + (1 - THETA_M) * advect_step_o1(w, p)
    assert np.abs(advect_step_tvd_ap(w, p) - mix).max() > 1e-3


def test_blend_rejects_theta():
    with pytest.raises(ValueError):
        advect_step_tvd_ap(np.zeros(5), params(5), 1.5)


def test_blend_keeps_pulse_bounds_1000_steps():
    eps = 1e-4
    n = 100
    w = pulse(eps)((np.arange(n) + 0.5) / n)
    _, tr = run_advection("tvdap", w, params(n, eps), 1000)
    assert tr["linf"].max() <= eps * (1 + 1e-12)
    assert np.all(np.diff(tr["tv"]) <= 1e-12 * tr["tv"][0])


random_field = arrays(np.float64, st.integers(8, 64), elements=st.floats(-1, 1))
eps_choice = st.sampled_from([1.0, 1e-2, 1e-4, 1e-8])


@settings(max_examples=150, deadline=None)
@given(random_field, eps_choice, st.floats(0.01, 1.0))
def test_o1_tvd_and_max_principle(w, eps, sigma):
    p = params(w.size, eps, sigma)
    out = advect_step_o1(w, p)
    assert total_variation(out) <= total_variation(w) + 1e-12
    assert np.abs(out).max() <= np.abs(w).max() + 1e-12


@settings(max_examples=150, deadline=None)
@given(random_field, eps_choice, st.floats(0.01, 1.0))
def test_blend_tvd_and_max_principle(w, eps, sigma):
    p = params(w.size, eps, sigma)
    out = advect_step_tvd_ap(w, p)
    assert total_variation(out) <= total_variation(w) + 1e-12
    assert np.abs(out).max() <= np.abs(w).max() + 1e-12


def test_mood_accepts_smooth():
    n = 100
    x = (np.arange(n) + 0.5) / n
    w = np.sin(2 * np.pi * x)
    p = params(n, eps=1.0, sigma_e=0.2)
    out, b, used = advect_step_mood(w, p, PulseBounds.from_initial(w))
    assert not used
    np.testing.assert_array_equal(out, advect_step_ars222(w, p)[1])
    assert b.w_max >= w.max()


def test_mood_falls_back_on_pulse():
    eps = 1e-4
    n = 100
    w = pulse(eps)((np.arange(n) + 0.5) / n)
    _, tr = run_advection("mood", w, params(n, eps), 20)
    assert tr["fallback"][1:5].any()
    assert tr["linf"].max() <= eps * (1 + 1e-12)


def test_mood_constant_accepted():
    w = np.full(20, -0.3)
    out, _, used = advect_step_mood(w, params(20), PulseBounds.from_initial(w))
    assert not used
    np.testing.assert_allclose(out, -0.3, atol=1e-15)


def test_bounds_monotone():
    b = PulseBounds.from_initial(np.array([0.0, 1.0]))
    b2 = b.updated(np.array([-0.5, 0.5]))
    assert b2.w_min == -0.5 and b2.w_max == 1.0 and b2.tv == b.tv


def test_symbols_constant_mode():
    f, g = fourier_symbols(0.7, 3.0, 0.0)
    assert f == pytest.approx(1.0) and g == pytest.approx(1.0)


def test_symbols_match_step():
    n = 32
    k = 3
    p = params(n, eps=1e-2, sigma_e=0.8)
    x = np.arange(n)
    mode = np.exp(2j * np.pi * k * x / n)
    f, g = fourier_symbols(p.sigma_e, p.sigma_i, 2 * np.pi * k / n)
    ws_r, wn_r = advect_step_ars222(mode.real, p)
    ws_i, wn_i = advect_step_ars222(mode.imag, p)
    np.testing.assert_allclose(ws_r + 1j * ws_i, f * mode, atol=1e-12)
    np.testing.assert_allclose(wn_r + 1j * wn_i, g * mode, atol=1e-12)


def test_symbol_sweep_bounded():
    kdx = np.arccos(np.linspace(-1, 1, 401))
    si = np.concatenate([[0.0], np.logspace(-8, 6, 400)])
    f, g = fourier_symbols(1.0, si[None, :], kdx[:, None])
    assert np.abs(f).max() <= 1 + 1e-12
    assert np.abs(g).max() <= 1 + 1e-12


def test_symbol_stiff_limit_finite():
    g8 = fourier_symbols(0.6, 1e8, 1.1)[1]
    g10 = fourier_symbols(0.6, 1e10, 1.1)[1]
    assert abs(abs(g8) ** 2 - abs(g10) ** 2) < 1e-6


@settings(max_examples=100)
@given(st.floats(0.0, 1.0 / BETA), st.floats(0.0, 1e4), st.floats(0.0, math.pi))
def test_first_stage_symbol_bounded(se, si, kdx):
    f, _ = fourier_symbols(se, si, kdx)
    assert abs(f) <= 1 + 1e-12


def test_exact_translation():
    p = params(100, eps=1e-2)
    w0 = pulse(1e-2)
    x = np.linspace(0, 1, 9, endpoint=False)
    np.testing.assert_array_equal(exact_advection(w0, x, 0.0, p), w0(x))
    period = 1.0 / (p.c_e + p.stiff_speed)
    np.testing.assert_array_equal(exact_advection(w0, x, period, p), w0(x))


def test_exact_quarter_shift_edges():
    p = params(100, eps=1e-2)
    t = 0.25 / (p.c_e + p.stiff_speed)
    eps = 1e-2
    x = np.array([0.49, 0.51, 0.99, 0.01])
    np.testing.assert_array_equal(exact_advection(pulse(eps), x, t, p), [-eps, eps, eps, -eps])
