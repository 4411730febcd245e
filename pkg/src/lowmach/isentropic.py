"""Uncoupled IMEX finite-volume engine for the rescaled isentropic Euler system.

Works in one or two space dimensions on uniform Cartesian grids. The
conserved state is an array ``W`` of shape ``(1 + d, *grid.shape)`` holding
the density followed by the momentum components.

Every implicit stage has the same structure: a nonlinear elliptic equation for
the density, solved by Newton's method, followed by linear solves for the
momentum components. Stage coefficients select the first-order scheme or one
of the two ARS(2,2,2) stages.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import DIRICHLET, PERIODIC, BoundaryCondition, GhostMap

log = logging.getLogger(__name__)

BETA = 1.0 - math.sqrt(2.0) / 2.0
THETA_M = BETA / (1.0 - BETA)

SLOPES = ("none", "unlimited", "minmod")
SCHEMES = ("o1", "o2", "tvdap", "mood")

# relative slack on the Riemann-invariant bounds
MOOD_SLACK = 1e-10


class SolverError(RuntimeError):
    pass


class NewtonError(SolverError):
    def __init__(self, msg, residual):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


class PositivityError(SolverError):
    pass


@dataclass(frozen=True)
class EulerParams:
    """Pressure law ``p = rho**gamma`` scaled by the squared Mach number ``eps``."""

    gamma: float = 1.4
    eps: float = 1.0

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def pressure(self, rho):
        return rho**self.gamma

    def dpressure(self, rho):
        return self.gamma * rho ** (self.gamma - 1.0)

    def enthalpy(self, rho):
        """Riemann-invariant enthalpy ``h`` with ``h' = sqrt(p'/eps) / rho``."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho <= 0):
            raise PositivityError("enthalpy needs a positive density")
        g = self.gamma
        if g == 1.0:
            return np.log(rho) / math.sqrt(self.eps)
        return 2.0 / (g - 1.0) * np.sqrt(g * rho ** (g - 1.0) / self.eps)


@dataclass
class SolverOptions:
    viscosity: str = "full"  # on every component; "zero" drops it (L2-stable variant)
    newton_rtol: float = 1e-10
    newton_max_iter: int = 50


@dataclass
class StepStats:
    """Per-step instrumentation; ``evaluations`` counts whole-scheme evaluations
    (a TVD-AP blend counts once)."""

    evaluations: int = 0
    newton_iterations: list = field(default_factory=list)
    fallback: bool = False


# above this many unknowns sparse LU gives way to algebraic multigrid
DIRECT_SOLVE_LIMIT = 20000


def linear_solver(A, shape, circulant: bool = False, tol: float = 1e-13):
    """Return ``solve(b)`` for the sparse system ``A x = b``.

    ``circulant`` marks a constant-coefficient operator on a fully periodic
    grid, which the FFT diagonalizes exactly. Otherwise small systems are
    factorized and large ones use multigrid-preconditioned GMRES.
    """
    A = A.tocsr()
    n = A.shape[0]
    if circulant:
        col = A[:, [0]].toarray().reshape(shape)
        lam = np.fft.fftn(col)
        if np.min(np.abs(lam)) <= 10 * np.finfo(float).eps * np.max(np.abs(lam)):
            raise SolverError("periodic operator is numerically singular")
        return lambda b: np.fft.ifftn(np.fft.fftn(b.reshape(shape)) / lam).real.ravel()
    if len(shape) == 1 or n <= DIRECT_SOLVE_LIMIT:
        lu = spla.splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A")
        return lu.solve
    import pyamg

    ml = pyamg.smoothed_aggregation_solver(A, symmetry="nonsymmetric")

    def solve(b):
        res = []
        x = ml.solve(b, tol=tol, accel="gmres", maxiter=200, residuals=res)
        if res[-1] > 10 * tol * max(res[0], np.finfo(float).tiny):
            raise SolverError(f"multigrid solve stalled at relative residual {res[-1] / res[0]:.2e}")
        return x

    return solve


def explicit_face_flux(WL, WR, axis: int = 0):
    """Centred convective flux ``(0, q u_axis)`` with upwind viscosity.

    The viscosity ``max(|u_L|, |u_R|)`` multiplies ``-(W_R - W_L)``, which
    makes it dissipative.
    """
    uL, uR = WL[1 + axis] / WL[0], WR[1 + axis] / WR[0]
    F = np.zeros(np.broadcast(WL, WR).shape)
    F[1:] = 0.5 * (WL[1:] * uL + WR[1:] * uR)
    F -= np.maximum(np.abs(uL), np.abs(uR)) * (WR - WL)
    return F


def minmod(a, b):
    return np.where((a > 0) & (b > 0), np.minimum(a, b),
                    np.where((a < 0) & (b < 0), np.maximum(a, b), 0.0))


class IsentropicSolver:
    """Spatial operators and implicit stage solves on one grid.

    ``bcs`` holds one :class:`BoundaryCondition` per axis. Dirichlet axes take
    ghost values from the attached exact solution at the stage time.
    """

    ng = 2

    def __init__(self, grid, bcs: Sequence[BoundaryCondition], params: EulerParams,
                 options: Optional[SolverOptions] = None):
        self.grid = grid
        self.bcs = tuple(bcs)
        if len(self.bcs) != grid.ndim:
            raise ValueError("one boundary condition per axis is required")
        self.params = params
        self.options = options or SolverOptions()
        self.d = grid.ndim
        self.shape = grid.shape
        self.h = grid.spacing
        self.gm = GhostMap(self.shape, [bc.kind for bc in self.bcs], self.ng)
        self.N = grid.size
        self._exact = next((bc.exact for bc in self.bcs if bc.kind == DIRICHLET), None)
        self._pad_coords = grid.centers(self.ng) if self._exact is not None else None
        self._nbr = {(a, s): self.gm.neighbor(a, s) for a in range(self.d) for s in (-1, 0, 1)}
        self._LP = (self._laplacian_matrix() @ self.gm.P).tocsr()
        self._periodic = all(bc.kind == PERIODIC for bc in self.bcs)

    # ------------------------------------------------------------------ ghosts
    def ghost(self, t: float) -> Optional[np.ndarray]:
        if self._exact is None:
            return None
        return np.asarray(self._exact(self._pad_coords, t), dtype=float)

    def pad(self, W: np.ndarray, t: float, ghost=None) -> np.ndarray:
        if ghost is None and self._exact is not None:
            ghost = self.ghost(t)
        out = np.empty((W.shape[0],) + self.gm.padded_shape)
        for k in range(W.shape[0]):
            out[k] = self.gm.pad(W[k], None if ghost is None else ghost[k])
        return out

    # ---------------------------------------------------------------- slicing
    def _along(self, axis: int, start: int, stop: int):
        s = list(self.gm.interior)
        s[axis] = slice(start, stop)
        return (Ellipsis,) + tuple(s)

    def faces(self, arr: np.ndarray, axis: int):
        """Values left and right of every face along ``axis`` (interior elsewhere)."""
        n, ng = self.shape[axis], self.ng
        return arr[self._along(axis, ng - 1, ng + n)], arr[self._along(axis, ng, ng + n + 1)]

    def div(self, flux: np.ndarray, axis: int) -> np.ndarray:
        return np.diff(flux, axis=flux.ndim - self.d + axis) / self.h[axis]

    # --------------------------------------------------------- reconstruction
    def half_slopes(self, Wp: np.ndarray, mode: str) -> np.ndarray:
        """Half increments ``(dx/2) sigma`` per axis, shape ``(d, ncomp, *padded)``.

        Zero on the outermost ghost layer, where no slope is needed.
        """
        if mode not in SLOPES:
            raise ValueError(f"unknown slope mode {mode!r}")
        out = np.zeros((self.d,) + Wp.shape)
        if mode == "none":
            return out
        for a in range(self.d):
            ax = Wp.ndim - self.d + a
            m = Wp.shape[ax]
            lo = [slice(None)] * Wp.ndim
            mid = list(lo)
            hi = list(lo)
            lo[ax], mid[ax], hi[ax] = slice(0, m - 2), slice(1, m - 1), slice(2, m)
            back = Wp[tuple(mid)] - Wp[tuple(lo)]
            fwd = Wp[tuple(hi)] - Wp[tuple(mid)]
            if mode == "unlimited":
                s = 0.25 * (back + fwd)
            else:
                s = 0.5 * minmod(back, fwd)
            tgt = [slice(None)] * Wp.ndim
            tgt[ax] = slice(1, m - 1)
            out[a][tuple(tgt)] = s
        return out

    def face_states(self, Wp, dl, axis):
        """Reconstructed ``(W_{j,+}, W_{j+1,-})`` at every face along ``axis``."""
        L, R = self.faces(Wp, axis)
        dL, dR = self.faces(dl[axis], axis)
        return L + dL, R - dR

    def _check_rho(self, *rhos):
        for r in rhos:
            if np.any(r <= 0) or not np.all(np.isfinite(r)):
                raise PositivityError("non-positive or non-finite density")

    # ------------------------------------------------------------------ fluxes
    def explicit_div(self, Wp, dl):
        """Divergence of the explicit convective flux with its upwind viscosity."""
        out = np.zeros((1 + self.d,) + self.shape)
        for a in range(self.d):
            WL, WR = self.face_states(Wp, dl, a)
            self._check_rho(WL[0], WR[0])
            out += self.div(explicit_face_flux(WL, WR, a), a)
        return out

    def implicit_viscosity(self, Wp, dl):
        """Face coefficients ``D_i``, half the largest acoustic speed, per axis."""
        if self.options.viscosity == "zero":
            return [np.zeros(self.faces(Wp[0], a)[0].shape) for a in range(self.d)]
        eps = self.params.eps
        out = []
        for a in range(self.d):
            WL, WR = self.face_states(Wp, dl, a)
            self._check_rho(WL[0], WR[0])
            cL = np.sqrt(self.params.dpressure(WL[0]) / eps)
            cR = np.sqrt(self.params.dpressure(WR[0]) / eps)
            out.append(0.5 * np.maximum(cL, cR))
        return out

    def centered_mass_div(self, Wp, dl):
        """Divergence of the centred momentum part of the implicit mass flux."""
        out = np.zeros(self.shape)
        for a in range(self.d):
            WL, WR = self.face_states(Wp, dl, a)
            out += self.div(0.5 * (WL[1 + a] + WR[1 + a]), a)
        return out

    def pressure_div(self, rho_p, dl_rho):
        """Divergence of the centred pressure flux ``p / eps``, one row per axis."""
        out = np.zeros((self.d,) + self.shape)
        for a in range(self.d):
            L, R = self.faces(rho_p, a)
            dL, dR = self.faces(dl_rho[a], a)
            rL, rR = L + dL, R - dR
            self._check_rho(rL, rR)
            P = 0.5 * (self.params.pressure(rL) + self.params.pressure(rR))
            # a constant offset leaves the divergence unchanged and limits round-off at small eps
            out[a] = self.div((P - P.flat[0]) / self.params.eps, a)
        return out

    def implicit_full_div(self, Wp, dl):
        """Divergence of the whole implicit flux evaluated on a known state."""
        D = self.implicit_viscosity(Wp, dl)
        out = np.zeros((1 + self.d,) + self.shape)
        out[0] = self.centered_mass_div(Wp, dl)
        out[1:] = self.pressure_div(Wp[0], dl[:, 0])
        for k in range(1 + self.d):
            out[k] -= self.dissipation_div(Wp[k], D, dl[:, k])
        return out

    def dissipation_div(self, fp, D, dl_f):
        """Flux-form ``sum_a d_a (D_a [f])`` with time-lagged reconstruction jumps."""
        out = np.zeros(self.shape)
        for a in range(self.d):
            L, R = self.faces(fp, a)
            dL, dR = self.faces(dl_f[a], a)
            out += self.div(D[a] * ((R - dR) - (L + dL)), a)
        return out

    def laplacian(self, fp):
        out = np.zeros(self.shape)
        for a in range(self.d):
            L, R = self.faces(fp, a)
            out += self.div(R - L, a) / self.h[a]
        return out

    def hessian_flux(self, Wp):
        """``grad^2 : (rho U x U)`` by centred second differences."""
        rho = Wp[0]
        out = np.zeros(self.shape)
        for a in range(self.d):
            out += self.laplacian_axis(Wp[1 + a] ** 2 / rho, a)
        if self.d == 2:
            f = Wp[1] * Wp[2] / rho
            ng = self.ng
            nx, ny = self.shape
            g = f[ng - 1:ng + nx + 1, ng + 1:ng + ny + 1] - f[ng - 1:ng + nx + 1, ng - 1:ng + ny - 1]
            out += 2.0 * (g[2:] - g[:-2]) / (4.0 * self.h[0] * self.h[1])
        return out

    def laplacian_axis(self, fp, axis):
        L, R = self.faces(fp, axis)
        return self.div(R - L, axis) / self.h[axis]

    # ------------------------------------------------------------ sparse ops
    def _laplacian_matrix(self):
        rows = np.arange(self.N)
        M = sp.csr_matrix((self.N, self.gm.P.shape[0]))
        for a in range(self.d):
            w = 1.0 / self.h[a] ** 2
            data = np.concatenate([np.full(self.N, w), np.full(self.N, -2 * w), np.full(self.N, w)])
            cols = np.concatenate([self._nbr[a, 1], self._nbr[a, 0], self._nbr[a, -1]])
            M = M + sp.csr_matrix((data, (np.tile(rows, 3), cols)), shape=M.shape)
        return M

    def _dissipation_matrix(self, D):
        """Sparse ``N x Npad`` matrix of ``sum_a d_a (D_a [f])`` on padded ``f``."""
        rows = np.arange(self.N)
        data, cols, rr = [], [], []
        for a in range(self.d):
            ax = a
            Dm = np.take(D[a], np.arange(self.shape[a]), axis=ax).ravel() / self.h[a]
            Dp = np.take(D[a], np.arange(1, self.shape[a] + 1), axis=ax).ravel() / self.h[a]
            data += [Dp, -(Dp + Dm), Dm]
            cols += [self._nbr[a, 1], self._nbr[a, 0], self._nbr[a, -1]]
            rr += [rows, rows, rows]
        return sp.csr_matrix(
            (np.concatenate(data), (np.concatenate(rr), np.concatenate(cols))),
            shape=(self.N, self.gm.P.shape[0]),
        )

    # ----------------------------------------------------------- stage solve
    def implicit_stage(self, rho_rhs, q_rhs, c, dt, D, dl, t_new, stats: StepStats, guess=None):
        """Solve one implicit stage for ``(rho, q)`` at ``t_new``.

        Density: ``rho = rho_rhs + c dt Dis(rho) + (c dt)^2 / eps Lap p(rho)``.
        Momentum: ``q = q_rhs - c dt / eps grad p(rho) + c dt Dis(q)``.
        ``D`` are the implicit viscosity faces and ``dl`` the time-lagged half
        slopes, both taken from the start of the step.
        """
        prm = self.params
        gh = self.ghost(t_new)
        a_dis = c * dt
        b_lap = (c * dt) ** 2 / prm.eps
        shape = self.shape
        gm = self.gm

        def rho_pad(r):
            return gm.pad(r.reshape(shape), None if gh is None else gh[0])

        def p_pad(r):
            return gm.pad(prm.pressure(r.reshape(shape)),
                          None if gh is None else prm.pressure(gh[0]))

        def assemble(r):
            rp = rho_pad(r)
            return (rho_rhs + a_dis * self.dissipation_div(rp, D, dl[:, 0])
                    + b_lap * self.laplacian(p_pad(r))).ravel()

        KP = (self._dissipation_matrix(D) @ gm.P).tocsr()
        A0 = sp.identity(self.N, format="csr") - a_dis * KP
        rho = np.array(guess if guess is not None else rho_rhs, dtype=float).ravel()
        circ = self._periodic and all(np.ptp(Da) == 0 for Da in D)
        rho = self._newton(rho, assemble, A0, b_lap, stats, circ)
        # The flux-form density carries the round-off of the stiff Laplacian times
        # dt^2 / (eps h^2); apply only its mean, which restores the discrete
        # conservation and moves rho by less than the Newton tolerance.
        rho = (rho + np.mean(assemble(rho) - rho)).reshape(shape)
        self._check_rho(rho)

        rp = rho_pad(rho.ravel())
        gradp = self.pressure_div(rp, dl[:, 0])
        qhat = q_rhs - a_dis * gradp
        q = np.empty_like(q_rhs)
        solve = None
        for k in range(self.d):
            ghk = None if gh is None else gh[1 + k]
            const = a_dis * self.dissipation_div(gm.pad(np.zeros(shape), ghk), D, dl[:, 1 + k])
            if solve is None:
                solve = linear_solver(A0, shape, circ)
            sol = solve((qhat[k] + const).ravel()).reshape(shape)
            q[k] = qhat[k] + a_dis * self.dissipation_div(gm.pad(sol, ghk), D, dl[:, 1 + k])
        return np.concatenate([rho[None], q])

    def _newton(self, rho, assemble, A0, b_lap, stats, circ=False):
        opts = self.options
        P_LP = self._LP
        G = rho - assemble(rho)
        g0 = float(np.max(np.abs(G)))
        scale = float(np.max(np.abs(rho)))
        # the stiff Laplacian term sets a round-off floor on the residual
        pmax = float(np.max(self.params.pressure(rho)))
        stencil = sum(4.0 / hh**2 for hh in self.h)
        floor = 64.0 * np.finfo(float).eps * (scale + b_lap * stencil * pmax)
        tol = max(opts.newton_rtol * (g0 + 1.0), floor)
        it = 0
        polished = False
        while True:
            nG = float(np.max(np.abs(G)))
            if nG <= tol and (polished or nG <= 1e-15 * scale):
                break
            if nG <= tol:
                polished = True
            if it >= opts.newton_max_iter:
                raise NewtonError(f"density Newton did not converge in {it} iterations", nG)
            dp = self.params.dpressure(rho)
            J = A0 - b_lap * P_LP @ sp.diags(dp)
            delta = linear_solver(J, self.shape, circ and np.ptp(dp) == 0)(G)
            lam = 1.0
            while True:
                trial = rho - lam * delta
                if np.all(trial > 0):
                    Gt = trial - assemble(trial)
                    nt = float(np.max(np.abs(Gt)))
                    if nt <= nG or nt <= tol or lam < 1e-3:
                        break
                lam *= 0.5
                if lam < 1e-6:
                    raise PositivityError("density Newton step left the positive cone")
            rho, G = trial, Gt
            it += 1
        stats.newton_iterations.append(it)
        return rho

    # --------------------------------------------------------------- schemes
    def _rhs_parts(self, W, t, mode):
        Wp = self.pad(W, t)
        dl = self.half_slopes(Wp, mode)
        return Wp, dl

    def step_o1(self, W, t, dt, stats: Optional[StepStats] = None, mode: str = "none"):
        stats = stats if stats is not None else StepStats()
        stats.evaluations += 1
        return self._o1(W, t, dt, stats, mode)

    def _o1(self, W, t, dt, stats, mode):
        Wp, dl = self._rhs_parts(W, t, mode)
        E = self.explicit_div(Wp, dl)
        rho_rhs = W[0] - dt * (E[0] + self.centered_mass_div(Wp, dl)) + dt**2 * self.hessian_flux(Wp)
        q_rhs = W[1:] - dt * E[1:]
        D = self.implicit_viscosity(Wp, dl)
        return self.implicit_stage(rho_rhs, q_rhs, 1.0, dt, D, dl, t + dt, stats, W[0])

    def step_ars(self, W, t, dt, mode="unlimited", stats: Optional[StepStats] = None):
        """Both ARS(2,2,2) stages; returns ``(W_star, W_next)``."""
        stats = stats if stats is not None else StepStats()
        stats.evaluations += 1
        return self._ars(W, t, dt, mode, stats)

    def _ars(self, W, t, dt, mode, stats):
        b = BETA
        Wp, dl = self._rhs_parts(W, t, mode)
        En = self.explicit_div(Wp, dl)
        Cn = self.centered_mass_div(Wp, dl)
        Hn = self.hessian_flux(Wp)
        Dn = self.implicit_viscosity(Wp, dl)

        rho_rhs = W[0] - b * dt * (En[0] + Cn) + (b * dt) ** 2 * Hn
        q_rhs = W[1:] - b * dt * En[1:]
        Ws = self.implicit_stage(rho_rhs, q_rhs, b, dt, Dn, dl, t + b * dt, stats, W[0])

        Wsp = self.pad(Ws, t + b * dt)
        dls = self.half_slopes(Wsp, mode)
        Es = self.explicit_div(Wsp, dls)
        Is = self.implicit_full_div(Wsp, dls)
        Hs = self.hessian_flux(Wsp)
        lap_ps = self.laplacian(self.params.pressure(Wsp[0]))
        rho_rhs = (W[0] - dt * ((b - 1) * En[0] + (2 - b) * Es[0] + (1 - b) * Is[0] + b * Cn)
                   + b * dt**2 * ((b - 1) * Hn + (2 - b) * Hs + (1 - b) / self.params.eps * lap_ps))
        q_rhs = W[1:] - dt * ((b - 1) * En[1:] + (2 - b) * Es[1:] + (1 - b) * Is[1:])
        Wn = self.implicit_stage(rho_rhs, q_rhs, b, dt, Dn, dl, t + dt, stats, Ws[0])
        return Ws, Wn

    def step_tvd_ap(self, W, t, dt, stats: Optional[StepStats] = None, o2=None):
        """Convex blend ``THETA_M * O1 + (1 - THETA_M) * O2``.

        Both parts use minmod-limited MUSCL fluxes: the first-order part is the
        one-stage implicit scheme with limited reconstruction, the second the
        limited ARS(2,2,2) step. ``o2`` lets a caller pass an ARS result it
        already computed with the same slopes.
        """
        stats = stats if stats is not None else StepStats()
        stats.evaluations += 1
        if o2 is None:
            o2 = self._ars(W, t, dt, "minmod", stats)[1]
        o1 = self._o1(W, t, dt, stats, "minmod")
        return THETA_M * o1 + (1.0 - THETA_M) * o2

    # ---------------------------------------------------------------- MOOD
    def riemann_invariants(self, W):
        """``{(axis, sign): u_axis -/+ h(rho)}`` for every axis."""
        h = self.params.enthalpy(W[0])
        out = {}
        for a in range(self.d):
            u = W[1 + a] / W[0]
            out[a, "+"] = u - h
            out[a, "-"] = u + h
        return out

    def invariant_bounds(self, W):
        return {k: float(np.max(np.abs(v))) for k, v in self.riemann_invariants(W).items()}

    def step_mood(self, W, t, dt, bounds, stats: Optional[StepStats] = None):
        """Accept the unlimited ARS candidate unless a Riemann invariant exceeds its bound,
        in which case the step is recomputed with the TVD-AP scheme.

        Returns ``(W_next, new_bounds, used_fallback)``.
        """
        stats = stats if stats is not None else StepStats()
        cand = self.step_ars(W, t, dt, "unlimited", stats)[1]
        norms = self.invariant_bounds(cand)
        ok = all(norms[k] <= bounds[k] * (1.0 + MOOD_SLACK) for k in bounds)
        if ok:
            Wn = cand
        else:
            Wn = self.step_tvd_ap(W, t, dt, stats)
            norms = self.invariant_bounds(Wn)
        stats.fallback = not ok
        new = {k: max(bounds[k], norms[k]) for k in bounds}
        return Wn, new, not ok

    # --------------------------------------------------------------- march
    def cfl_dt(self, W, C):
        u = np.sqrt(np.sum((W[1:] / W[0]) ** 2, axis=0))
        lam = 2.0 * float(np.max(u))
        hmin = min(self.h)
        if lam == 0.0:
            return hmin
        return C * hmin / lam

    def step(self, scheme, W, t, dt, bounds=None, stats=None):
        stats = stats if stats is not None else StepStats()
        if scheme == "o1":
            return self.step_o1(W, t, dt, stats), bounds
        if scheme == "o2":
            return self.step_ars(W, t, dt, "unlimited", stats)[1], bounds
        if scheme == "o2-minmod":
            return self.step_ars(W, t, dt, "minmod", stats)[1], bounds
        if scheme == "o2-first-order-space":
            return self.step_ars(W, t, dt, "none", stats)[1], bounds
        if scheme == "tvdap":
            return self.step_tvd_ap(W, t, dt, stats), bounds
        if scheme == "mood":
            Wn, bounds, _ = self.step_mood(W, t, dt, bounds, stats)
            return Wn, bounds
        raise ValueError(f"unknown scheme {scheme!r}")

    def march(self, scheme, W0, t_end, C, callback=None, max_steps=10**7):
        """Integrate from ``t = 0`` to ``t_end``; the last step lands on ``t_end``.

        ``callback(n, t, W, stats)`` is invoked after each step.
        """
        W = np.array(W0, dtype=float)
        t = 0.0
        bounds = self.invariant_bounds(W) if scheme == "mood" else None
        n = 0
        while t < t_end * (1 - 1e-14) and n < max_steps:
            dt = min(self.cfl_dt(W, C), t_end - t)
            stats = StepStats()
            W, bounds = self.step(scheme, W, t, dt, bounds, stats)
            t = t + dt if t + dt < t_end else t_end
            n += 1
            if callback is not None:
                callback(n, t, W, stats)
        return W, t, n


def default_cfl(scheme: str) -> float:
    return 0.9 if scheme == "o1" else 0.45


_SOLVERS: "dict[tuple, IsentropicSolver]" = {}
_SOLVER_CACHE_SIZE = 16


def cached_solver(grid, bcs, params: EulerParams, options: Optional[SolverOptions] = None):
    """Reuse a solver (and its sparse operators) across calls on the same set-up."""
    options = options or SolverOptions()
    key = (grid, tuple((bc.kind, id(bc.exact)) for bc in bcs), params,
           tuple(sorted(vars(options).items())))
    s = _SOLVERS.get(key)
    if s is None:
        if len(_SOLVERS) >= _SOLVER_CACHE_SIZE:
            _SOLVERS.pop(next(iter(_SOLVERS)))
        # the solver holds the bcs, which keeps id(bc.exact) valid for the key
        s = _SOLVERS[key] = IsentropicSolver(grid, bcs, params, SolverOptions(**vars(options)))
    return s
