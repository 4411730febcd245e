"""One test per acceptance criterion.

Each test pins its tolerances as literals, checks them against the constants
used by ``lowmach.acceptance`` and prints the measured pass/fail line.
"""

import numpy as np

from lowmach import acceptance as A


def _check(k, report_line, **kw):
    c = A.run(k, **kw)
    line = c.line()
    print(line)
    report_line(line)
    return c


def test_criterion_01_model_tvd(report_line):
    assert A.TV_SLACK == 1e-12
    c = _check(1, report_line)
    for (eps, scheme), (tv_inc, sup_inc, steps) in ((k, v) for k, v in c.data.items() if k[1] != "o2"):
        assert steps >= 500
        assert tv_inc <= 1e-12 and sup_inc <= 1e-12
    assert c.passed


def test_criterion_02_fourier_symbols(report_line):
    assert A.SYMBOL_SLACK == 1e-12
    c = _check(2, report_line)
    assert c.data["f"] <= 1 + 1e-12
    assert c.data["g"] <= 1 + 1e-12
    assert c.passed


def test_criterion_03_asymptotic_consistency(report_line):
    assert (A.AP_EPS, A.AP_DENSITY_OSC, A.AP_VELOCITY_DIV) == (1e-8, 1e-6, 1e-4)
    c = _check(3, report_line)
    for osc, div in c.data.values():
        assert osc <= 1e-6 and div <= 1e-4
    assert c.passed


def test_criterion_04_monolithic_oracle(report_line):
    assert A.ORACLE_TOL == 1e-9
    c = _check(4, report_line)
    assert max(max(d.values()) for d in c.data.values()) <= 1e-9
    assert c.passed


def test_criterion_05_1d_orders(report_line):
    c = _check(5, report_line)
    for eps in (1e-2, 1e-4):
        o = {s: c.data[eps, s][1] for s in ("o1", "o2", "mood", "tvdap")}
        assert 0.8 <= o["o1"] <= 1.2
        assert 1.7 <= o["o2"] <= 2.3
        assert o["mood"] >= 1.5
        assert o["tvdap"] >= 0.9
        assert all(np.asarray(c.data[eps, "tvdap"][0]) < np.asarray(c.data[eps, "o1"][0]))
    assert c.passed


def test_criterion_06_vortex_tables(report_line):
    assert (A.TABLE_FACTOR, A.TABLE_ORDER_TOL) == (2.0, 0.5)
    c = _check(6, report_line)
    for block in c.data.values():
        assert all(0.5 <= r <= 2.0 for r in block["ratios"])
        assert all(abs(d) <= 0.5 for d in block["order_diff"])
    assert c.passed


def test_criterion_07_conservation(report_line):
    assert A.CONSERVATION_TOL == 1e-12
    c = _check(7, report_line)
    assert max(c.data.values()) <= 1e-12
    assert c.passed


def test_criterion_08_eps_uniform_stability(report_line):
    assert A.BLOWUP_FACTOR == 10.0
    c = _check(8, report_line)
    assert max(ratio for ratio, _, _ in c.data.values()) <= 10.0
    assert c.passed


def test_criterion_09_mood_evaluations(report_line):
    assert A.MAX_EVALUATIONS == 2
    c = _check(9, report_line)
    assert max(v[0] for v in c.data.values()) <= 2
    assert c.passed


def test_criterion_10_incompressible_reference(report_line):
    assert (A.POISSON_TOL, A.VORTICITY_SUM_TOL, A.EXTREMA_REL) == (1e-10, 1e-12, 0.25)
    c = _check(10, report_line)
    assert c.data["poisson"] <= 1e-10
    assert c.data["vorticity_sum"] <= 1e-12
    assert c.data["rel"] <= 0.25
    assert c.passed
