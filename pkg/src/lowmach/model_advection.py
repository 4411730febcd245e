"""Linear two-speed advection ``w_t + c_e w_x + (c_i / sqrt(eps)) w_x = 0``.

The slow speed ``c_e`` is integrated explicitly and the stiff speed
``c_i / sqrt(eps)`` implicitly, with upwind differences on a periodic grid.
Four time discretizations are provided: first-order IMEX, ARS(2,2,2), the
theta-limited blend and the a-posteriori MOOD switch between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import lfilter

from .core import total_variation

BETA = 1.0 - math.sqrt(2.0) / 2.0
ALPHA = 1.0 - 1.0 / (2.0 * BETA)
THETA_M = BETA / (1.0 - BETA)

# round-off allowance of the a-posteriori detector
MOOD_SLACK = 1e-12


class RejectedStepError(ValueError):
    """The explicit CFL restriction of the slow speed is violated."""


@dataclass(frozen=True)
class AdvectionParams:
    c_e: float
    c_i: float
    eps: float
    dx: float
    dt: float

    def __post_init__(self):
        for name in ("c_e", "c_i", "eps", "dx", "dt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def stiff_speed(self) -> float:
        return self.c_i / math.sqrt(self.eps)

    @property
    def sigma_e(self) -> float:
        return self.c_e * self.dt / self.dx

    @property
    def sigma_i(self) -> float:
        return self.stiff_speed * self.dt / self.dx


@dataclass(frozen=True)
class PulseBounds:
    """Bounds from the initial data used by the MOOD detector."""

    w_min: float
    w_max: float
    tv: float

    @classmethod
    def from_initial(cls, w0) -> "PulseBounds":
        w0 = np.asarray(w0, dtype=float)
        return cls(float(w0.min()), float(w0.max()), total_variation(w0))

    def admits(self, w, slack: float = MOOD_SLACK) -> bool:
        scale = max(abs(self.w_min), abs(self.w_max), np.finfo(float).tiny)
        if w.min() < self.w_min - slack * scale:
            return False
        if w.max() > self.w_max + slack * scale:
            return False
        return total_variation(w) <= self.tv * (1.0 + slack) + slack * scale

    def updated(self, w) -> "PulseBounds":
        return PulseBounds(min(self.w_min, float(w.min())), max(self.w_max, float(w.max())), self.tv)


def _upwind_diff(w):
    return w - np.roll(w, 1)


def solve_periodic_upwind(a: float, rhs) -> np.ndarray:
    """Solve ``(1 + a) x_j - a x_{j-1} = rhs_j`` with periodic wrap.

    A forward sweep with ``x_{-1} = 0`` followed by the rank-one correction
    of the corner entry.
    """
    rhs = np.asarray(rhs, dtype=float)
    r = a / (1.0 + a)
    y = lfilter([1.0 / (1.0 + a)], [1.0, -r], rhs)
    L = rhs.size
    powers = r ** np.arange(1, L + 1)
    x_last = y[-1] / (1.0 - powers[-1])
    return y + powers * x_last


def _check_cfl(p: AdvectionParams, limit: float = 1.0):
    if p.sigma_e > limit * (1.0 + 1e-12):
        raise RejectedStepError(
            f"c_e dt/dx = {p.sigma_e:.6g} exceeds {limit:.6g}"
        )


def advect_step_o1(w, p: AdvectionParams) -> np.ndarray:
    _check_cfl(p)
    w = np.asarray(w, dtype=float)
    return solve_periodic_upwind(p.sigma_i, w - p.sigma_e * _upwind_diff(w))


def _ars_stage_one(w, p: AdvectionParams) -> np.ndarray:
    return solve_periodic_upwind(BETA * p.sigma_i, w - BETA * p.sigma_e * _upwind_diff(w))


def advect_step_ars222(w, p: AdvectionParams):
    """ARS(2,2,2) step; returns ``(w_star, w_next)``."""
    _check_cfl(p)
    w = np.asarray(w, dtype=float)
    se, si = p.sigma_e, p.sigma_i
    w_star = _ars_stage_one(w, p)
    rhs = (
        w
        - (BETA - 1.0) * se * _upwind_diff(w)
        - ((1.0 - BETA) * si + (2.0 - BETA) * se) * _upwind_diff(w_star)
    )
    return w_star, solve_periodic_upwind(BETA * si, rhs)


def advect_step_tvd_ap(w, p: AdvectionParams, theta: float = THETA_M) -> np.ndarray:
    """Theta-limited step, a single implicit solve for the blended update.

    ``theta`` weights the ARS(2,2,2) part of the update and ``1 - theta`` the
    first-order part: ``theta = 0`` is the first-order scheme and
    ``theta = 1`` the ARS scheme. Uniform TVD and maximum principle hold for
    ``theta <= THETA_M`` under ``c_e dt/dx <= 1``.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    _check_cfl(p)
    w = np.asarray(w, dtype=float)
    se, si = p.sigma_e, p.sigma_i
    w_star = _ars_stage_one(w, p)
    rhs = (
        w
        - (theta * (BETA - 1.0) + (1.0 - theta)) * se * _upwind_diff(w)
        - theta * ((1.0 - BETA) * si + (2.0 - BETA) * se) * _upwind_diff(w_star)
    )
    return solve_periodic_upwind((theta * BETA + 1.0 - theta) * si, rhs)


def advect_step_mood(w, p: AdvectionParams, b: PulseBounds):
    """ARS candidate, replaced by the ``THETA_M`` blend when it leaves the bounds.

    Returns ``(w_next, bounds, used_fallback)``.
    """
    _, cand = advect_step_ars222(w, p)
    if b.admits(cand):
        return cand, b.updated(cand), False
    w_next = advect_step_tvd_ap(w, p, THETA_M)
    return w_next, b.updated(w_next), True


def fourier_symbols(sigma_e: float, sigma_i: float, kdx):
    """Amplification factors ``(f, g)`` of the two ARS(2,2,2) stages.

    ``w_star_k = f w_k`` and ``w_next_k = g w_k`` for the mode ``exp(i k x)``.
    Broadcasts over array arguments.
    """
    if np.any(np.asarray(sigma_e) < 0) or np.any(np.asarray(sigma_i) < 0):
        raise ValueError("CFL numbers must be non-negative")
    z = 1.0 - np.cos(kdx) + 1j * np.sin(kdx)
    den = 1.0 + BETA * sigma_i * z
    f = (1.0 - BETA * sigma_e * z) / den
    g = (1.0 - (BETA - 1.0) * sigma_e * z) / den - (
        ((1.0 - BETA) * sigma_i + (2.0 - BETA) * sigma_e) * z * (1.0 - BETA * sigma_e * z)
    ) / den**2
    return f, g


def exact_advection(w0: Callable, x, t: float, p: AdvectionParams, period: float = 1.0, x_min: float = 0.0):
    """Translate the profile ``w0`` at speed ``c_e + c_i / sqrt(eps)``."""
    shift = (p.c_e + p.stiff_speed) * t
    xs = x_min + np.mod(np.asarray(x, dtype=float) - shift - x_min, period)
    return w0(xs)


def pulse(eps: float):
    """Rectangular pulse: ``eps`` on ``(0.25, 0.75]`` and ``-eps`` elsewhere."""

    def w0(x):
        x = np.asarray(x, dtype=float)
        return np.where((x > 0.25) & (x <= 0.75), eps, -eps)

    return w0


SCHEMES = ("o1", "o2", "tvdap", "mood")


def run_advection(scheme: str, w0, p: AdvectionParams, n_steps: int):
    """March ``n_steps`` and record per-step TV, sup norm and fallback flags."""
    w = np.asarray(w0, dtype=float).copy()
    bounds = PulseBounds.from_initial(w)
    tv = [total_variation(w)]
    sup = [float(np.abs(w).max())]
    flags = [False]
    for _ in range(n_steps):
        used = False
        if scheme == "o1":
            w = advect_step_o1(w, p)
        elif scheme == "o2":
            w = advect_step_ars222(w, p)[1]
        elif scheme == "tvdap":
            w = advect_step_tvd_ap(w, p, THETA_M)
        elif scheme == "mood":
            w, bounds, used = advect_step_mood(w, p, bounds)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        tv.append(total_variation(w))
        sup.append(float(np.abs(w).max()))
        flags.append(used)
    return w, {"tv": np.array(tv), "linf": np.array(sup), "fallback": np.array(flags)}
