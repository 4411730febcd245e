import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import bisect

from lowmach.core import Grid2D
from lowmach.reference import (IncompressibleState, PreShockError, ReferenceCache, SmoothBump, burgers_exact,
                               domega, fine_grid_reference, gamma3_exact, gamma3_initial, incompressible_step,
                               neg_laplacian, omega, poisson_periodic, project_average, run_incompressible)
from lowmach.runner import simulate


def test_bump_profile_values():
    assert omega(0.0) == 1.0
    assert omega(2.0) == 0.0 and omega(-2.0) == 0.0
    z = np.linspace(-3, 3, 601)
    w = omega(z)
    assert w.min() >= 0.0 and w.max() <= 1.0


def test_bump_smooth_at_support_edge():
    # value and first three derivatives vanish at |z| = 2
    h = 1e-3
    for k in range(1, 4):
        left = 2.0 - k * h
        assert omega(left) <= (k * h) ** 4
    d1 = (omega(2.0 + h) - omega(2.0 - h)) / (2 * h)
    d2 = (omega(2.0 + h) - 2 * omega(2.0) + omega(2.0 - h)) / h**2
    assert abs(d1) < 1e-8 and abs(d2) < 1e-5


def test_bump_derivative_matches_difference():
    z = np.linspace(-2.5, 2.5, 41)
    h = 1e-6
    np.testing.assert_allclose(domega(z), (omega(z + h) - omega(z - h)) / (2 * h), atol=1e-7)
    b = SmoothBump(0.1)
    x = np.linspace(0, 1, 21)
    np.testing.assert_allclose(b.derivative(x), (b(x + h) - b(x - h)) / (2 * h), atol=1e-6)
    assert b.amplitude == 0.05


def test_burgers_initial_time():
    x = np.linspace(0, 1, 11)
    phi0 = lambda s: np.sin(s)
    np.testing.assert_array_equal(burgers_exact(phi0, x, 0.0), phi0(x))


def test_burgers_constant():
    x = np.linspace(0, 1, 5)
    np.testing.assert_allclose(burgers_exact(lambda s: np.full_like(s, 0.7), x, 3.0), 0.7)


def _bisection_oracle(phi0, x, t):
    g = lambda s: s + float(phi0(np.array([s]))[0]) * t - x
    return float(phi0(np.array([bisect(g, x - 10, x + 10, xtol=1e-15, maxiter=400)]))[0])


@pytest.mark.parametrize("sign", [1, -1])
def test_burgers_bump_against_bisection(sign):
    eps = 1.0
    b = SmoothBump(eps)
    k = math.sqrt(3.0 / eps)
    rho0, u0 = gamma3_initial(eps)
    phi0 = lambda s: u0(s) - sign * k * rho0(s)
    dphi0 = lambda s: b.derivative(s) * (1 + sign * k)
    got = burgers_exact(phi0, np.array([0.5]), 0.007, dphi0)[0]
    assert got == pytest.approx(_bisection_oracle(phi0, 0.5, 0.007), abs=1e-10)


def test_burgers_detects_crossing():
    phi0 = lambda s: -np.tanh(50 * s)
    dphi0 = lambda s: -50 / np.cosh(50 * s) ** 2
    with pytest.raises(PreShockError):
        burgers_exact(phi0, np.linspace(-1, 1, 21), 1.0, dphi0)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([1.0, 1e-2, 1e-4]), st.floats(0.0, 1.0))
def test_gamma3_invariant_relations(eps, frac):
    t = frac * {1.0: 0.007, 1e-2: 0.005, 1e-4: 0.0005}[eps]
    x = np.linspace(0.0, 1.0, 33)
    rho, q = gamma3_exact(x, t, eps)
    u = q / rho
    k = math.sqrt(3.0 / eps)
    rho0, u0 = gamma3_initial(eps)
    phi_p = burgers_exact(lambda s: u0(s) - k * rho0(s), x, t)
    phi_m = burgers_exact(lambda s: u0(s) + k * rho0(s), x, t)
    np.testing.assert_allclose(u - k * rho, phi_p, atol=1e-10 * k)
    np.testing.assert_allclose(u + k * rho, phi_m, atol=1e-10 * k)


def _grid(n=32):
    return Grid2D(0, 2 * math.pi, 0, 2 * math.pi, n, n)


def test_poisson_eigenfunction():
    g = _grid(40)
    x, y = g.xy
    w = np.sin(x) * np.sin(y)
    lam = (2 - 2 * math.cos(g.dx)) / g.dx**2 + (2 - 2 * math.cos(g.dy)) / g.dy**2
    np.testing.assert_allclose(poisson_periodic(w, g), w / lam, atol=1e-10)


def test_poisson_zero():
    g = _grid(8)
    assert np.all(poisson_periodic(np.zeros(g.shape), g) == 0)


def test_poisson_random_residual_and_mean():
    g = _grid(24)
    w = np.random.default_rng(2).normal(size=g.shape)
    w -= w.mean()
    psi = poisson_periodic(w, g)
    assert np.abs(neg_laplacian(psi, g) - w).max() <= 1e-8
    assert abs(psi.mean()) <= 1e-12


def test_poisson_projects_mean():
    g = _grid(16)
    w = np.random.default_rng(3).normal(size=g.shape) + 5.0
    psi = poisson_periodic(w, g)
    np.testing.assert_allclose(neg_laplacian(psi, g), w - w.mean(), atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_poisson_self_adjoint(seed):
    g = _grid(16)
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(2, *g.shape))
    a -= a.mean()
    b -= b.mean()
    lhs = np.sum(poisson_periodic(a, g) * b)
    rhs = np.sum(poisson_periodic(b, g) * a)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_incompressible_constant_vorticity_still():
    g = _grid(16)
    s = IncompressibleState(np.full(g.shape, 0.4), g)
    u, v = s.velocity()
    assert np.abs(u).max() < 1e-14 and np.abs(v).max() < 1e-14
    np.testing.assert_array_equal(incompressible_step(s, 0.1).omega, s.omega)


def test_incompressible_single_mode_decays():
    g = _grid(32)
    x, y = g.xy
    w0 = np.sin(x) + 0.5 * np.cos(2 * y)
    s, n = run_incompressible(w0, g, 1.0)
    assert n > 0 and s.t == 1.0
    assert np.abs(s.omega).max() <= np.abs(w0).max() + 1e-12


def test_incompressible_conserves_sum():
    g = _grid(32)
    x, y = g.xy
    w0 = np.sin(x) * np.cos(y) + 0.3 * np.sin(3 * y)
    s, _ = run_incompressible(w0, g, 0.5)
    assert abs(s.omega.sum() - w0.sum()) <= 1e-12 * np.abs(w0).sum()


def test_projection_linear_exact():
    x = (np.arange(12) + 0.5) / 12
    coarse = (np.arange(3) + 0.5) / 3
    np.testing.assert_allclose(project_average(2 + 3 * x, 4), 2 + 3 * coarse, rtol=1e-14)
    f = np.arange(16.0).reshape(4, 4)
    np.testing.assert_allclose(project_average(f, 2), [[2.5, 4.5], [10.5, 12.5]])


def test_projection_rejects_uneven():
    with pytest.raises(ValueError):
        project_average(np.zeros(10), 3)


def test_reference_factor_one_is_plain_run(tmp_path):
    ref = fine_grid_reference("degond-tang", 1.0, 50, 0.02, 1, cache=ReferenceCache(tmp_path))
    np.testing.assert_array_equal(ref, simulate("degond-tang", "o1", 1.0, 50, 0.02).W)


def test_reference_cache_bit_identical(tmp_path):
    c = ReferenceCache(tmp_path)
    a = fine_grid_reference("shock-tube", 1.0, 20, 0.05, 4, cache=c)
    b = fine_grid_reference("shock-tube", 1.0, 20, 0.05, 4, cache=c)
    np.testing.assert_array_equal(a, b)
    assert (tmp_path / "manifest.txt").read_text().count("shock-tube") == 1


def test_cache_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("LOWMACH_CACHE", str(tmp_path / "c"))
    assert ReferenceCache().root == tmp_path / "c"
