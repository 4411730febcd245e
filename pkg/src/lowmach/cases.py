"""Registry of the test cases: initial data, domain, boundary kind and
default parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DIRICHLET, NEUMANN, PERIODIC, BoundaryCondition, Grid1D, Grid2D
from .euler2d import VORTEX_DOMAIN, shear_layer_init, vortex_conserved
from .reference import gamma3_conserved


@dataclass(frozen=True)
class Case:
    name: str
    ndim: int
    gamma: float
    bc_kind: str
    domain: tuple
    build: Callable  # (n_per_axis, eps, gamma) -> (grid, bcs, W0)
    t_end: Callable  # eps -> default final time
    cells: Callable  # eps -> default cells per axis
    exact: Optional[Callable] = None  # (eps, gamma) -> evaluator (coords, t) -> W
    grids: tuple = ()
    eps_default: float = 1.0
    notes: dict = field(default_factory=dict)

    @property
    def has_exact(self) -> bool:
        return self.exact is not None


def _by_eps(table: dict, fallback: Callable):
    def f(eps):
        for k, v in table.items():
            if math.isclose(eps, k, rel_tol=1e-12):
                return v
        return fallback(eps)

    return f


def _geometric(v1, v4):
    """Log-linear interpolation through ``(1, v1)`` and ``(1e-4, v4)``."""
    slope = math.log(v4 / v1) / math.log(1e-4)
    return lambda eps: v1 * eps**slope


# ------------------------------------------------------------------ builders
def _shock_tube(n, eps, gamma):
    g = Grid1D(0.0, 1.0, n)
    rho = np.where(g.x < 0.5, 1.0 + eps, 1.0)
    return g, (BoundaryCondition(NEUMANN),), np.stack([rho, np.ones(n)])


def _degond_tang(n, eps, gamma):
    g = Grid1D(0.0, 1.0, n)
    x = g.x
    rho = np.full(n, 2.0)
    q = np.full(n, 1.0 - eps / 2)
    m1 = (x > 0.2) & (x <= 0.3)
    m2 = (x > 0.3) & (x <= 0.7)
    m3 = (x > 0.7) & (x < 0.8)
    rho[m1], q[m1] = 2.0 + eps, 1.0
    q[m2] = 1.0 + eps / 2
    rho[m3], q[m3] = 2.0 - eps, 1.0
    return g, (BoundaryCondition(PERIODIC),), np.stack([rho, q])


def _smooth_gamma3(n, eps, gamma):
    g = Grid1D(0.0, 1.0, n)
    f = gamma3_conserved(eps)
    return g, (BoundaryCondition(DIRICHLET, f),), f(g.centers(), 0.0)


def _vortex(n, eps, gamma):
    g = Grid2D(*VORTEX_DOMAIN, n, n)
    f = vortex_conserved(eps, gamma)
    bc = BoundaryCondition(DIRICHLET, f)
    return g, (bc, bc), f(g.xy, 0.0)


def _shear(n, eps, gamma):
    g = Grid2D(0.0, 2 * math.pi, 0.0, 2 * math.pi, n, n)
    s = shear_layer_init(g)
    return g, s.bcs, s.W


def _pulse(n, eps, gamma):
    from .model_advection import pulse

    g = Grid1D(0.0, 1.0, n)
    return g, (BoundaryCondition(PERIODIC),), pulse(eps)(g.x)[None]


# model-problem speeds; the slow speed and grid give c_e dt / dx = 1 at dt = 0.01
ADVECTION_CE = 1.0
ADVECTION_CI = 0.5
ADVECTION_STEPS = 500

CASES = {
    "advection-pulse": Case(
        "advection-pulse", 1, 1.0, PERIODIC, (0.0, 1.0), _pulse,
        t_end=lambda eps: ADVECTION_STEPS * 0.01, cells=lambda eps: 100, eps_default=1e-2,
    ),
    "shock-tube": Case(
        "shock-tube", 1, 1.4, NEUMANN, (0.0, 1.0), _shock_tube,
        t_end=_by_eps({1.0: 0.125, 1e-2: 0.02, 1e-4: 0.0025}, _geometric(0.125, 0.0025)),
        cells=_by_eps({1.0: 50, 1e-2: 125, 1e-4: 500}, lambda eps: 500),
    ),
    "smooth-gamma3": Case(
        "smooth-gamma3", 1, 3.0, DIRICHLET, (0.0, 1.0), _smooth_gamma3,
        t_end=_by_eps({1.0: 0.007, 1e-2: 0.005, 1e-4: 0.0005}, _geometric(0.007, 0.0005)),
        cells=lambda eps: 200,
        exact=lambda eps, gamma: gamma3_conserved(eps),
        grids=(50, 100, 200, 400, 800),
    ),
    "degond-tang": Case(
        "degond-tang", 1, 1.4, PERIODIC, (0.0, 1.0), _degond_tang,
        t_end=_by_eps({1.0: 0.075, 1e-4: 0.0015}, _geometric(0.075, 0.0015)),
        cells=_by_eps({1.0: 100, 1e-4: 1500}, lambda eps: 100),
    ),
    "vortex2d": Case(
        "vortex2d", 2, 1.0, DIRICHLET, VORTEX_DOMAIN, _vortex,
        t_end=lambda eps: 1.0, cells=lambda eps: 50,
        exact=lambda eps, gamma: vortex_conserved(eps, gamma),
        grids=(625, 2500, 10000),
    ),
    "shear-layer": Case(
        "shear-layer", 2, 1.0, PERIODIC, (0.0, 2 * math.pi, 0.0, 2 * math.pi), _shear,
        t_end=_by_eps({1e-5: 6.0, 1.0: 10.0}, lambda eps: 6.0),
        cells=_by_eps({1e-5: 200, 1.0: 40}, lambda eps: 200), eps_default=1e-5,
    ),
}


def get_case(name: str) -> Case:
    try:
        return CASES[name]
    except KeyError:
        raise ValueError(f"unknown case {name!r}; choose from {', '.join(CASES)}") from None


def cells_per_axis(case: Case, n_total: int) -> int:
    """Grid lists count total cells; a 2D entry must be a perfect square."""
    if case.ndim == 1:
        return n_total
    m = math.isqrt(n_total)
    if m * m != n_total:
        raise ValueError(f"{n_total} cells is not a square grid")
    return m
