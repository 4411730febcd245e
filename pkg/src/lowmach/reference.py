"""Exact solutions and reference solvers used to measure errors.

* the smooth compact bump and the gamma = 3 solution built from two Burgers
  equations for the Riemann invariants,
* a periodic Poisson solver and a vorticity / stream-function stepper for the
  incompressible limit,
* fine-grid first-order references with an on-disk cache.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .core import Grid2D, write_atomic


class PreShockError(ValueError):
    """Characteristics have crossed; the smooth solution no longer exists."""


class RejectedStepError(ValueError):
    pass


# ------------------------------------------------------------------ bump
def omega(z):
    """Compactly supported ``((2 - |z|) / 2)**4 (1 + 2|z|)``, zero for ``|z| > 2``."""
    a = np.abs(np.asarray(z, dtype=float))
    return np.where(a <= 2.0, ((2.0 - np.minimum(a, 2.0)) / 2.0) ** 4 * (1.0 + 2.0 * a), 0.0)


def domega(z):
    z = np.asarray(z, dtype=float)
    a = np.abs(z)
    # d/da [(1 - a/2)^4 (1 + 2a)] = -5 a (1 - a/2)^3
    m = np.minimum(a, 2.0)
    return np.where(a <= 2.0, -5.0 * z * (1.0 - m / 2.0) ** 3, 0.0)


@dataclass(frozen=True)
class SmoothBump:
    """``amplitude * omega((x - center) / (half_width / 2))``."""

    eps: float
    center: float = 0.5
    half_width: float = 0.25

    @property
    def amplitude(self) -> float:
        return self.eps / 2.0

    def z(self, x):
        return 2.0 / self.half_width * (np.asarray(x, dtype=float) - self.center)

    def __call__(self, x):
        return self.amplitude * omega(self.z(x))

    def derivative(self, x):
        return self.amplitude * 2.0 / self.half_width * domega(self.z(x))


# --------------------------------------------------------------- Burgers
def burgers_exact(phi0: Callable, x, t: float, dphi0: Optional[Callable] = None,
                  tol: float = 1e-14, max_iter: int = 50):
    """Solution of ``phi_t + phi phi_x = 0`` by the implicit relation
    ``phi = phi0(x - phi t)``.

    Newton's method runs on the foot ``xi`` of the characteristic through
    ``x``; points where it fails are finished by bracketed bisection.
    ``dphi0`` enables the Newton path and the crossing check.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t == 0:
        return phi0(x)
    if t < 0:
        raise ValueError("t must be non-negative")
    xi = x - phi0(x) * t
    done = np.zeros(x.shape, dtype=bool)
    if dphi0 is not None:
        slope = 1.0 + dphi0(xi) * t
        for _ in range(max_iter):
            g = xi + phi0(xi) * t - x
            slope = 1.0 + dphi0(xi) * t
            if np.any(slope <= 0):
                raise PreShockError(f"characteristics cross before t = {t}")
            step = g / slope
            xi = xi - step
            done = np.abs(step) <= tol * (1.0 + np.abs(xi))
            if done.all():
                break
    for k in np.flatnonzero(~done):
        xi[k] = _bisect_foot(phi0, x[k], t)
    return phi0(xi)


def _bisect_foot(phi0, x, t):
    """Bracket and bisect ``xi + phi0(xi) t = x``."""

    def g(s):
        return s + float(phi0(np.array([s]))[0]) * t - x

    width = 1.0
    lo, hi = x - width, x + width
    while g(lo) > 0 or g(hi) < 0:
        width *= 2.0
        lo, hi = x - width, x + width
        if width > 1e12:
            raise PreShockError("no characteristic foot found")
    return brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def gamma3_initial(eps: float):
    """``(rho0, u0)`` of the smooth accuracy test on ``[0, 1]``."""
    bump = SmoothBump(eps)
    return (lambda x: 1.0 - bump(x)), (lambda x: 1.0 + bump(x))


def gamma3_exact(x, t: float, eps: float):
    """``(rho, q)`` of the gamma = 3 smooth test at time ``t``.

    With ``p = rho**3`` both Riemann invariants ``u -/+ sqrt(3 / eps) rho``
    obey Burgers' equation, so the solution follows from two scalar
    characteristic solves.
    """
    bump = SmoothBump(eps)
    k = math.sqrt(3.0 / eps)

    def phi_p(s):
        return 1.0 + bump(s) - k * (1.0 - bump(s))

    def phi_m(s):
        return 1.0 + bump(s) + k * (1.0 - bump(s))

    def dphi_p(s):
        return (1.0 + k) * bump.derivative(s)

    def dphi_m(s):
        return (1.0 - k) * bump.derivative(s)

    pp = burgers_exact(phi_p, x, t, dphi_p)
    pm = burgers_exact(phi_m, x, t, dphi_m)
    if np.any(pm <= pp):
        raise PreShockError("invariants give a non-positive density")
    rho = (pm - pp) / (2.0 * k)
    u = 0.5 * (pp + pm)
    return rho, rho * u


def gamma3_conserved(eps: float):
    def f(coords, t):
        rho, q = gamma3_exact(coords[0], t, eps)
        return np.stack([rho, q])

    return f


# ---------------------------------------------------------- incompressible
def poisson_eigenvalues(grid: Grid2D) -> np.ndarray:
    kx = 2.0 * np.pi * np.fft.fftfreq(grid.n_x)
    ky = 2.0 * np.pi * np.fft.fftfreq(grid.n_y)
    lx = (2.0 - 2.0 * np.cos(kx)) / grid.dx**2
    ly = (2.0 - 2.0 * np.cos(ky)) / grid.dy**2
    return lx[:, None] + ly[None, :]


def poisson_periodic(w: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Zero-mean ``psi`` with ``-Lap_h psi = w - mean(w)`` (5-point, periodic).

    The FFT diagonalizes the periodic 5-point operator, so the solve is
    exact up to round-off.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != grid.shape:
        raise ValueError("vorticity does not match the grid")
    lam = poisson_eigenvalues(grid)
    lam[0, 0] = 1.0
    wh = np.fft.fft2(w)
    wh[0, 0] = 0.0
    return np.fft.ifft2(wh / lam).real


def neg_laplacian(psi, grid: Grid2D):
    return (
        (2 * psi - np.roll(psi, 1, 0) - np.roll(psi, -1, 0)) / grid.dx**2
        + (2 * psi - np.roll(psi, 1, 1) - np.roll(psi, -1, 1)) / grid.dy**2
    )


@dataclass
class IncompressibleState:
    omega: np.ndarray
    grid: Grid2D
    t: float = 0.0

    def psi(self):
        return poisson_periodic(self.omega, self.grid)

    def velocity(self):
        """``(d psi / dy, -d psi / dx)`` by centred differences."""
        psi = self.psi()
        g = self.grid
        u = (np.roll(psi, -1, 1) - np.roll(psi, 1, 1)) / (2 * g.dy)
        v = -(np.roll(psi, -1, 0) - np.roll(psi, 1, 0)) / (2 * g.dx)
        return u, v


def incompressible_cfl(u, v, grid: Grid2D, C: float = 0.9) -> float:
    s = float(np.max(np.abs(u) / grid.dx + np.abs(v) / grid.dy))
    return math.inf if s == 0 else C / s


def incompressible_step(s: IncompressibleState, dt: float) -> IncompressibleState:
    """Donor-cell transport of the vorticity by the stream-function velocity.

    Written in flux form with face velocities averaged from the centred
    cell velocities, which are discretely divergence free, so the sum of the
    vorticity is conserved.
    """
    g = s.grid
    u, v = s.velocity()
    if dt * float(np.max(np.abs(u) / g.dx + np.abs(v) / g.dy)) > 1.0 + 1e-12:
        raise RejectedStepError("vorticity transport step violates the CFL bound")
    w = s.omega
    uf = 0.5 * (u + np.roll(u, -1, 0))  # face i+1/2
    vf = 0.5 * (v + np.roll(v, -1, 1))
    Fx = np.where(uf > 0, uf * w, uf * np.roll(w, -1, 0))
    Fy = np.where(vf > 0, vf * w, vf * np.roll(w, -1, 1))
    wn = w - dt * ((Fx - np.roll(Fx, 1, 0)) / g.dx + (Fy - np.roll(Fy, 1, 1)) / g.dy)
    return IncompressibleState(wn, g, s.t + dt)


def run_incompressible(w0, grid: Grid2D, t_end: float, C: float = 0.9, callback=None):
    s = IncompressibleState(np.array(w0, dtype=float), grid)
    n = 0
    while s.t < t_end * (1 - 1e-14):
        u, v = s.velocity()
        dt = min(incompressible_cfl(u, v, grid, C), t_end - s.t)
        s = incompressible_step(s, dt)
        if t_end - s.t < 1e-14 * t_end:
            s.t = t_end
        n += 1
        if callback is not None:
            callback(n, s)
    return s, n


# --------------------------------------------------------- fine references
def project_average(f: np.ndarray, factor: int) -> np.ndarray:
    """Average blocks of ``factor`` cells per axis onto the coarse grid."""
    if factor == 1:
        return np.array(f, copy=True)
    f = np.asarray(f)
    shape = []
    for n in f.shape:
        if n % factor:
            raise ValueError("fine grid is not an integer refinement")
        shape += [n // factor, factor]
    out = f.reshape(shape)
    return out.mean(axis=tuple(range(1, 2 * f.ndim, 2)))


def cache_dir() -> Path:
    d = os.environ.get("LOWMACH_CACHE")
    if d:
        return Path(d)
    return Path(os.path.expanduser("~")) / ".cache" / "lowmach"


class ReferenceCache:
    """Snapshots keyed by ``(case, eps, N, t_end, scheme)`` with a text manifest.

    Arrays are stored in ``.npy`` format, so a cache hit is a bit-identical
    re-read of what was written.
    """

    def __init__(self, root=None):
        self.root = Path(root) if root is not None else cache_dir()

    @staticmethod
    def key(case, eps, n, t_end, scheme) -> str:
        return f"{case}|eps={float(eps)!r}|N={int(n)}|t_end={float(t_end)!r}|scheme={scheme}"

    def _path(self, key):
        return self.root / (hashlib.sha256(key.encode()).hexdigest()[:24] + ".npy")

    def get(self, key):
        p = self._path(key)
        if p.exists():
            return np.load(p)
        return None

    def put(self, key, arr) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        p = self._path(key)
        tmp = p.with_suffix(".tmp.npy")
        np.save(tmp, np.asarray(arr))
        os.replace(tmp, p)
        manifest = self.root / "manifest.txt"
        lines = manifest.read_text().splitlines() if manifest.exists() else []
        entry = f"{p.name}\t{key}"
        if entry not in lines:
            lines.append(entry)
            write_atomic(manifest, "\n".join(lines) + "\n")
        return p


def fine_grid_reference(case: str, eps: float, n_coarse: int, t_end: float, factor: int,
                        scheme: str = "o1", gamma: Optional[float] = None,
                        cache: Optional[ReferenceCache] = None):
    """Run ``scheme`` at ``factor`` times the resolution and project on the coarse grid.

    Returns the projected conserved state, shape ``(ncomp, *coarse_shape)``.
    """
    from .cases import get_case
    from .runner import simulate

    c = get_case(case)
    n_fine = n_coarse * factor
    key = ReferenceCache.key(case, eps, n_fine, t_end, scheme)
    W = cache.get(key) if cache is not None else None
    if W is None:
        res = simulate(c, scheme, eps, n_fine, t_end, gamma=gamma)
        W = res.W
        if cache is not None:
            cache.put(key, W)
    return np.stack([project_average(Wk, factor) for Wk in W])
