import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lowmach.core import (NEUMANN, PERIODIC, BoundaryCondition, DimensionError, ErrorReport, Grid1D,
                          Grid2D, InvalidFieldError, cfl_time_step, clamp_step, fit_orders, linf_error,
                          linf_norm, read_snapshot_csv, snapshot_csv, total_variation, write_atomic)

finite = st.floats(-1e3, 1e3, allow_nan=False)
fields = arrays(np.float64, st.integers(2, 40), elements=finite)


def test_grid1d_centers():
    g = Grid1D(0.0, 1.0, 4)
    assert g.dx == 0.25
    np.testing.assert_allclose(g.x, [0.125, 0.375, 0.625, 0.875])


@pytest.mark.parametrize("n", [0, 1])
def test_grid1d_rejects_tiny(n):
    with pytest.raises(ValueError):
        Grid1D(0.0, 1.0, n)


def test_grid2d_shape_and_spacing():
    g = Grid2D(0.0, 2.0, -1.0, 1.0, 4, 8)
    assert g.shape == (4, 8)
    assert g.spacing == (0.5, 0.25)
    x, y = g.xy
    assert x.shape == y.shape == (4, 8)
    assert y[0, 0] == pytest.approx(-1.0 + 0.125)


def test_dirichlet_needs_evaluator():
    with pytest.raises(ValueError):
        BoundaryCondition("dirichlet")


def test_tv_constant_is_zero():
    assert total_variation(np.full(7, 3.2), PERIODIC) == 0.0


def test_tv_pulse_wraps():
    eps = 1e-2
    assert total_variation([-eps, eps, eps, -eps], PERIODIC) == pytest.approx(4 * eps, abs=1e-15)


def test_tv_ramp_neumann():
    assert total_variation([0, 1, 2, 3], NEUMANN) == 3


def test_tv_rejects_nan():
    with pytest.raises(InvalidFieldError):
        total_variation([0.0, math.nan, 1.0])


@given(fields, finite)
def test_tv_shift_invariant(f, c):
    tv = total_variation(f)
    assert tv >= 0
    assert total_variation(f + c) == pytest.approx(tv, rel=1e-12, abs=1e-9)


@given(fields)
def test_tv_zero_iff_constant(f):
    assert (total_variation(f) == 0) == bool(np.all(f == f[0]))


def test_linf():
    assert linf_norm([1, -2, 0.5]) == 2
    f = np.arange(5.0)
    assert linf_error(f, f) == 0


def test_linf_shape_mismatch():
    with pytest.raises(DimensionError):
        linf_error(np.zeros(3), np.zeros(4))


@given(st.integers(2, 20).flatmap(lambda n: st.tuples(*[arrays(np.float64, n, elements=finite)] * 3)))
def test_linf_error_metric(fgh):
    f, g, h = fgh
    assert linf_error(f, g) == linf_error(g, f)
    assert linf_error(f, h) <= linf_error(f, g) + linf_error(g, h) + 1e-9


def test_cfl_examples():
    assert cfl_time_step(np.ones(5), 0.01, 0.9) == pytest.approx(0.0045)
    assert cfl_time_step(np.array([1.0, -3.0, 2.0]), 0.1, 0.45) == pytest.approx(0.0075)


def test_cfl_still_fluid_cap():
    assert cfl_time_step(np.zeros(4), 0.01, 0.9) == 0.01
    assert cfl_time_step(np.zeros(4), 0.01, 0.9, dt_max=0.5) == 0.5


@given(st.floats(0.01, 10), st.floats(1e-3, 1), st.floats(0.05, 1), st.floats(0.1, 10))
def test_cfl_scaling(umax, dx, C, k):
    u = np.array([umax, -0.5 * umax])
    dt = cfl_time_step(u, dx, C)
    assert cfl_time_step(u, k * dx, C) == pytest.approx(k * dt, rel=1e-12)
    assert cfl_time_step(u, dx, k * C) == pytest.approx(k * dt, rel=1e-12)
    assert cfl_time_step(k * u, dx, C) == pytest.approx(dt / k, rel=1e-12)


def test_clamp_lands_on_end():
    assert clamp_step(0.3, 0.9, 1.0) == pytest.approx(0.1)
    assert clamp_step(0.05, 0.0, 1.0) == 0.05


def test_orders_power_law():
    r = fit_orders(ErrorReport([10, 20], {"rho": [4e-2, 1e-2]}))
    assert r.orders["rho"][1] == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("e, expected", [((4.30e-2, 3.36e-2), 0.35), ((1.57e-4, 3.31e-5), 2.25)])
def test_orders_2d_total_cells(e, expected):
    r = fit_orders(ErrorReport.for_2d([625, 2500], {"rho": list(e)}))
    assert r.orders["rho"][1] == pytest.approx(expected, abs=0.01)


@given(st.floats(1e-6, 1e3), st.floats(0.5, 3.0), st.lists(st.integers(2, 5000), min_size=2, max_size=5, unique=True))
def test_orders_recover_exponent(A, p, ns):
    ns = sorted(ns)
    r = fit_orders(ErrorReport(ns, {"w": [A * (1.0 / n) ** p for n in ns]}))
    assert all(abs(o - p) <= 1e-12 * max(1.0, p) * 10 for o in r.orders["w"][1:])


def test_orders_flag_zero_error():
    r = fit_orders(ErrorReport([10, 20], {"w": [1e-3, 0.0]}))
    assert math.isnan(r.orders["w"][1])


def test_report_csv_layout():
    r = fit_orders(ErrorReport([50, 100], {"rho": [1e-2, 2.5e-3], "q": [2e-2, 1e-2]}))
    lines = r.to_csv().splitlines()
    assert lines[0] == "N,e_inf_rho,order_rho,e_inf_q,order_q"
    assert lines[1].startswith("50,1.000000e-02,,")
    assert lines[2].split(",")[2] == "2.0000"


def test_snapshot_roundtrip(tmp_path):
    x = np.linspace(0, 1, 5)
    p = tmp_path / "a" / "snap.csv"
    write_atomic(p, snapshot_csv([x], {"rho": x**2 + 1, "q": -x}))
    d = read_snapshot_csv(p)
    np.testing.assert_array_equal(d["rho"], x**2 + 1)
    np.testing.assert_array_equal(d["x"], x)
    assert not [f for f in p.parent.iterdir() if f.name.startswith(".tmp")]
