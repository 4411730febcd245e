"""Two-dimensional isentropic Euler: state container, scheme dispatch and the
traveling-vortex and double-shear-layer set-ups."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DIRICHLET, PERIODIC, BoundaryCondition, Grid2D, InvalidFieldError
from .isentropic import (
    EulerParams,
    IsentropicSolver,
    SolverOptions,
    StepStats,
    cached_solver,
)


@dataclass
class EulerState2D:
    rho: np.ndarray
    qx: np.ndarray
    qy: np.ndarray
    grid: Grid2D
    bcs: tuple = (BoundaryCondition(), BoundaryCondition())

    def __post_init__(self):
        for name in ("rho", "qx", "qy"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != self.grid.shape:
                raise InvalidFieldError(f"{name} has shape {a.shape}, grid is {self.grid.shape}")
            if not np.all(np.isfinite(a)):
                raise InvalidFieldError(f"{name} has non-finite values")
            setattr(self, name, a)
        if np.any(self.rho <= 0):
            raise InvalidFieldError("density must be positive")
        self.bcs = tuple(self.bcs)

    @property
    def W(self) -> np.ndarray:
        return np.stack([self.rho, self.qx, self.qy])

    @classmethod
    def from_W(cls, W, grid, bcs):
        return cls(W[0], W[1], W[2], grid, bcs)

    def velocity(self):
        return self.qx / self.rho, self.qy / self.rho


@dataclass(frozen=True)
class VortexParams:
    rho_inf: float = 1.0
    a: float = 1.0
    b: float = 0.0
    d: float = 2.0
    x0: float = 0.0
    y0: float = 0.0
    u_inf: float = 1.0
    v_inf: float = 0.0


VORTEX_DOMAIN = (-1.5, 2.5, -2.0, 2.0)


def vortex_exact(x, y, t: float, eps: float, gamma: float = 1.0, p: VortexParams = VortexParams()):
    """Density and velocity ``(rho, u, v)`` of the translating vortex."""
    xb = np.asarray(x, dtype=float) - p.x0 - p.u_inf * t
    yb = np.asarray(y, dtype=float) - p.y0 - p.v_inf * t
    r2 = xb**2 + yb**2
    amp = p.a**2 * eps / (8.0 * p.d)
    if amp * math.exp(2.0 * p.d * p.b) >= p.rho_inf:
        raise ValueError("vortex parameters give a non-positive density at the center")
    e = np.exp(p.d * (p.b - r2))
    rho = p.rho_inf - amp * e**2
    s = p.a * math.sqrt(gamma / 2.0) * e * rho ** (gamma / 2.0 - 1.0)
    return rho, p.u_inf + yb * s, p.v_inf - xb * s


def vortex_conserved(eps, gamma=1.0, p: VortexParams = VortexParams()):
    """Exact-solution evaluator ``(coords, t) -> W`` for Dirichlet ghosts."""

    def f(coords, t):
        rho, u, v = vortex_exact(coords[0], coords[1], t, eps, gamma, p)
        return np.stack([rho, rho * u, rho * v])

    return f


def vortex_setup(n_per_axis: int, eps: float, gamma: float = 1.0, p: VortexParams = VortexParams()):
    grid = Grid2D(*VORTEX_DOMAIN, n_per_axis, n_per_axis)
    bc = BoundaryCondition(DIRICHLET, vortex_conserved(eps, gamma, p))
    W0 = vortex_conserved(eps, gamma, p)(grid.xy, 0.0)
    return EulerState2D.from_W(W0, grid, (bc, bc))


def vortex_errors(state: EulerState2D, t: float, eps: float, gamma: float = 1.0,
                  p: VortexParams = VortexParams()):
    """``(e_inf(rho), e_inf(rho |U|))`` against the exact vortex."""
    x, y = state.grid.xy
    rho, u, v = vortex_exact(x, y, t, eps, gamma, p)
    e_rho = float(np.max(np.abs(state.rho - rho)))
    m = np.hypot(state.qx, state.qy)
    e_m = float(np.max(np.abs(m - rho * np.hypot(u, v))))
    return e_rho, e_m


SHEAR_RHO = math.pi / 15.0


def shear_layer_init(grid: Grid2D, delta: float = SHEAR_RHO, amplitude: float = 0.05):
    """Double shear layer on a periodic ``[0, 2 pi]^2`` box.

    The constant density equals the layer width ``delta``.
    """
    x, y = grid.xy
    u = np.where(y <= math.pi, np.tanh((y - math.pi / 2) / delta), np.tanh((3 * math.pi / 2 - y) / delta))
    v = amplitude * np.sin(x)
    rho = np.full(grid.shape, delta)
    bc = BoundaryCondition(PERIODIC)
    return EulerState2D(rho, rho * u, rho * v, grid, (bc, bc))


def shear_layer_grid(n: int) -> Grid2D:
    return Grid2D(0.0, 2 * math.pi, 0.0, 2 * math.pi, n, n)


def vorticity(state: EulerState2D) -> np.ndarray:
    """``dv/dx - du/dy`` by periodic centred differences."""
    u, v = state.velocity()
    g = state.grid
    dvdx = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2 * g.dx)
    dudy = (np.roll(u, -1, axis=1) - np.roll(u, 1, axis=1)) / (2 * g.dy)
    return dvdx - dudy


def step2d(scheme: str, state: EulerState2D, params: EulerParams, dt: float, t: float = 0.0,
           bounds=None, options: Optional[SolverOptions] = None,
           stats: Optional[StepStats] = None):
    """One step of ``scheme``; returns ``(state, bounds)``.

    ``bounds`` is only used by ``mood`` and defaults to the invariants of
    ``state``.
    """
    solver = cached_solver(state.grid, state.bcs, params, options)
    if scheme == "mood" and bounds is None:
        bounds = solver.invariant_bounds(state.W)
    W, bounds = solver.step(scheme, state.W, t, dt, bounds, stats)
    return EulerState2D.from_W(W, state.grid, state.bcs), bounds


def solver_for(state: EulerState2D, params: EulerParams,
               options: Optional[SolverOptions] = None) -> IsentropicSolver:
    return cached_solver(state.grid, state.bcs, params, options)
