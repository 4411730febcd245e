"""One-dimensional isentropic Euler schemes.

Thin state-level wrappers around :class:`lowmach.isentropic.IsentropicSolver`:
first-order AP, ARS(2,2,2) with MUSCL reconstruction, the theta-blended
TVD-AP scheme and the a-posteriori MOOD switch on Riemann invariants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BoundaryCondition, Grid1D, InvalidFieldError
from .isentropic import (
    BETA,
    MOOD_SLACK,
    SLOPES,
    THETA_M,
    EulerParams,
    PositivityError,
    SolverOptions,
    StepStats,
    cached_solver,
    explicit_face_flux,
    minmod,
)

__all__ = [
    "BETA", "THETA_M", "MOOD_SLACK", "EulerParams", "EulerState1D", "InterfaceStates",
    "RiemannInvariantBounds", "riemann_invariants", "muscl_slopes", "explicit_flux",
    "minmod", "step_o1", "step_ars222", "step_tvd_ap", "step_mood", "march",
]


@dataclass
class EulerState1D:
    rho: np.ndarray
    q: np.ndarray
    grid: Grid1D
    bc: BoundaryCondition = BoundaryCondition()

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        for name, a in (("rho", self.rho), ("q", self.q)):
            if a.shape != self.grid.shape:
                raise InvalidFieldError(f"{name} has shape {a.shape}, grid is {self.grid.shape}")
            if not np.all(np.isfinite(a)):
                raise InvalidFieldError(f"{name} has non-finite values")
        if np.any(self.rho <= 0):
            raise PositivityError("density must be positive")

    @property
    def W(self) -> np.ndarray:
        return np.stack([self.rho, self.q])

    @property
    def u(self) -> np.ndarray:
        return self.q / self.rho

    def with_W(self, W) -> "EulerState1D":
        return EulerState1D(W[0], W[1], self.grid, self.bc)


@dataclass
class InterfaceStates:
    """Reconstructed values either side of every face.

    ``left[:, k]`` is the state ``W_{k-1,+}`` and ``right[:, k]`` is
    ``W_{k,-}`` at face ``k`` (face ``k`` sits left of cell ``k``; there are
    ``n + 1`` faces). ``slopes`` holds the cell slopes ``sigma_j``.
    """

    left: np.ndarray
    right: np.ndarray
    slopes: np.ndarray


@dataclass
class RiemannInvariantBounds:
    m_plus: float
    m_minus: float

    @classmethod
    def from_state(cls, state: EulerState1D, params: EulerParams) -> "RiemannInvariantBounds":
        pp, pm = riemann_invariants(state, params)
        return cls(float(np.max(np.abs(pp))), float(np.max(np.abs(pm))))

    def admits(self, state, params, slack: float = MOOD_SLACK) -> bool:
        pp, pm = riemann_invariants(state, params)
        return (np.max(np.abs(pp)) <= self.m_plus * (1 + slack)
                and np.max(np.abs(pm)) <= self.m_minus * (1 + slack))

    def updated(self, state, params) -> "RiemannInvariantBounds":
        pp, pm = riemann_invariants(state, params)
        return RiemannInvariantBounds(max(self.m_plus, float(np.max(np.abs(pp)))),
                                      max(self.m_minus, float(np.max(np.abs(pm)))))

    def as_dict(self):
        return {(0, "+"): self.m_plus, (0, "-"): self.m_minus}

    @classmethod
    def from_dict(cls, d):
        return cls(d[0, "+"], d[0, "-"])


def riemann_invariants(state: EulerState1D, params: EulerParams):
    """``(phi_plus, phi_minus) = (u - h(rho), u + h(rho))``."""
    h = params.enthalpy(state.rho)
    u = state.q / state.rho
    return u - h, u + h


def _solver(state: EulerState1D, params: EulerParams, options=None):
    return cached_solver(state.grid, (state.bc,), params, options)


def muscl_slopes(state: EulerState1D, mode: str = "minmod", t: float = 0.0,
                 params: Optional[EulerParams] = None) -> InterfaceStates:
    """Piecewise-linear reconstruction with ``mode`` in ``none``, ``unlimited``, ``minmod``."""
    if mode not in SLOPES:
        raise ValueError(f"unknown slope mode {mode!r}")
    s = _solver(state, params or EulerParams())
    Wp = s.pad(state.W, t)
    dl = s.half_slopes(Wp, mode)
    WL, WR = s.face_states(Wp, dl, 0)
    ng = s.ng
    sig = 2.0 * dl[0][:, ng:ng + state.grid.n_cells] / state.grid.dx
    return InterfaceStates(WL, WR, sig)


def explicit_flux(WL, WR) -> np.ndarray:
    """Explicit convective face flux for stacked ``(rho, q)`` face states."""
    return explicit_face_flux(np.asarray(WL, dtype=float), np.asarray(WR, dtype=float), 0)


def step_o1(state: EulerState1D, params: EulerParams, dt: float, t: float = 0.0,
            options: Optional[SolverOptions] = None, stats: Optional[StepStats] = None):
    return state.with_W(_solver(state, params, options).step_o1(state.W, t, dt, stats))


def step_ars222(state: EulerState1D, params: EulerParams, dt: float, slopes: str = "unlimited",
                t: float = 0.0, options: Optional[SolverOptions] = None,
                stats: Optional[StepStats] = None):
    """Both ARS(2,2,2) stages; returns ``(state_star, state_next)``."""
    Ws, Wn = _solver(state, params, options).step_ars(state.W, t, dt, slopes, stats)
    return state.with_W(Ws), state.with_W(Wn)


def step_tvd_ap(state: EulerState1D, params: EulerParams, dt: float, t: float = 0.0,
                options: Optional[SolverOptions] = None, stats: Optional[StepStats] = None):
    return state.with_W(_solver(state, params, options).step_tvd_ap(state.W, t, dt, stats))


def step_mood(state: EulerState1D, params: EulerParams, dt: float,
              bounds: Optional[RiemannInvariantBounds] = None, t: float = 0.0,
              options: Optional[SolverOptions] = None, stats: Optional[StepStats] = None):
    """Returns ``(state, bounds, used_fallback)``."""
    if bounds is None:
        bounds = RiemannInvariantBounds.from_state(state, params)
    W, new, used = _solver(state, params, options).step_mood(state.W, t, dt, bounds.as_dict(), stats)
    return state.with_W(W), RiemannInvariantBounds.from_dict(new), used


def march(scheme: str, state: EulerState1D, params: EulerParams, t_end: float,
          C: Optional[float] = None, options: Optional[SolverOptions] = None, callback=None):
    """Integrate to ``t_end`` with the uniform CFL step; returns ``(state, n_steps)``."""
    from .isentropic import default_cfl

    s = _solver(state, params, options)
    W, _, n = s.march(scheme, state.W, t_end, default_cfl(scheme) if C is None else C, callback)
    return state.with_W(W), n
