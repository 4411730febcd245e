"""Loop-based reference for the 1D periodic fully discrete schemes.

Written cell by cell with modular indexing and solved monolithically: the
density and momentum unknowns of a stage form one vector of length ``2N``
and a dense damped Newton iteration with a finite-difference Jacobian drives
the full residual to zero. It imports nothing from the rest of the package,
so it serves as an independent check of the uncoupled sparse solver. Only
practical for a handful of cells.
"""

import math

import numpy as np

BETA = 1.0 - math.sqrt(2.0) / 2.0


def _minmod(a, b):
    if a > 0 and b > 0:
        return min(a, b)
    if a < 0 and b < 0:
        return max(a, b)
    return 0.0


class Periodic1D:
    def __init__(self, n, dx, gamma, eps):
        self.n, self.dx, self.gamma, self.eps = n, dx, gamma, eps

    def p(self, r):
        return r ** self.gamma

    def dp(self, r):
        return self.gamma * r ** (self.gamma - 1)

    def half_slopes(self, f, mode):
        n = self.n
        out = [0.0] * n
        for j in range(n):
            back = f[j] - f[(j - 1) % n]
            fwd = f[(j + 1) % n] - f[j]
            if mode == "unlimited":
                out[j] = 0.25 * (back + fwd)
            elif mode == "minmod":
                out[j] = 0.5 * _minmod(back, fwd)
        return out

    def explicit_div(self, rho, q, mode):
        """Divergence of the explicit flux, mass and momentum rows."""
        n, dx = self.n, self.dx
        dr, dq = self.half_slopes(rho, mode), self.half_slopes(q, mode)
        F0, F1 = [], []
        for j in range(n):  # face j+1/2
            k = (j + 1) % n
            rL, qL = rho[j] + dr[j], q[j] + dq[j]
            rR, qR = rho[k] - dr[k], q[k] - dq[k]
            uL, uR = qL / rL, qR / rR
            D = max(abs(uL), abs(uR))
            F0.append(-D * (rR - rL))
            F1.append(0.5 * (qL * uL + qR * uR) - D * (qR - qL))
        m = [(F0[j] - F0[j - 1]) / dx for j in range(n)]
        k1 = [(F1[j] - F1[j - 1]) / dx for j in range(n)]
        return m, k1

    def visc(self, rho, mode):
        n = self.n
        dr = self.half_slopes(rho, mode)
        out = []
        for j in range(n):
            k = (j + 1) % n
            rL, rR = rho[j] + dr[j], rho[k] - dr[k]
            out.append(0.5 * max(math.sqrt(self.dp(rL) / self.eps), math.sqrt(self.dp(rR) / self.eps)))
        return out

    def centered_q_div(self, q, dq):
        n = self.n
        F = [0.5 * ((q[j] + dq[j]) + (q[(j + 1) % n] - dq[(j + 1) % n])) for j in range(n)]
        return [(F[j] - F[j - 1]) / self.dx for j in range(n)]

    def pressure_div(self, rho, dr):
        n = self.n
        F = [0.5 * (self.p(rho[j] + dr[j]) + self.p(rho[(j + 1) % n] - dr[(j + 1) % n])) / self.eps
             for j in range(n)]
        return [(F[j] - F[j - 1]) / self.dx for j in range(n)]

    def dissipation(self, f, df, D):
        n = self.n
        F = [D[j] * ((f[(j + 1) % n] - df[(j + 1) % n]) - (f[j] + df[j])) for j in range(n)]
        return [(F[j] - F[j - 1]) / self.dx for j in range(n)]

    def lap(self, f):
        n = self.n
        return [(f[(j + 1) % n] - 2 * f[j] + f[j - 1]) / self.dx**2 for j in range(n)]


def _damped_newton(R, x0, tol=1e-13, max_iter=100):
    x = np.array(x0, dtype=float)
    r = R(x)
    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol * (1 + np.max(np.abs(x))):
            return x
        m = x.size
        J = np.empty((m, m))
        for k in range(m):
            h = 1e-7 * max(1.0, abs(x[k]))
            e = np.zeros(m)
            e[k] = h
            J[:, k] = (R(x + e) - R(x - e)) / (2 * h)
        dx = np.linalg.solve(J, -r)
        lam = 1.0
        while lam > 1e-8:
            xt = x + lam * dx
            rho_t = xt[: m // 2]
            if np.all(rho_t > 0):
                rt = R(xt)
                if np.max(np.abs(rt)) < np.max(np.abs(r)) or np.max(np.abs(rt)) < 1e-15:
                    break
            lam *= 0.5
        x, r = xt, rt
        if np.max(np.abs(lam * dx)) <= 1e-15 * (1 + np.max(np.abs(x))):
            return x
    raise RuntimeError("oracle Newton did not converge")


def _stage(o, rho_rhs, q_rhs, c, dt, D, dr, dq, guess):
    n = o.n

    def R(x):
        rho, q = list(x[:n]), list(x[n:])
        dis_r = o.dissipation(rho, dr, D)
        dis_q = o.dissipation(q, dq, D)
        lp = o.lap([o.p(r) for r in rho])
        gp = o.pressure_div(rho, dr)
        r1 = [rho[j] - rho_rhs[j] - c * dt * dis_r[j] - (c * dt) ** 2 / o.eps * lp[j] for j in range(n)]
        r2 = [q[j] - q_rhs[j] + c * dt * gp[j] - c * dt * dis_q[j] for j in range(n)]
        return np.array(r1 + r2)

    x = _damped_newton(R, np.concatenate([guess[0], guess[1]]))
    return np.array([x[:n], x[n:]])


def o1_step(rho, q, dx, dt, gamma, eps):
    o = Periodic1D(len(rho), dx, gamma, eps)
    rho, q = list(rho), list(q)
    zero = [0.0] * o.n
    Em, Eq = o.explicit_div(rho, q, "none")
    C = o.centered_q_div(q, zero)
    H = o.lap([q[j] ** 2 / rho[j] for j in range(o.n)])
    rr = [rho[j] - dt * (Em[j] + C[j]) + dt**2 * H[j] for j in range(o.n)]
    qr = [q[j] - dt * Eq[j] for j in range(o.n)]
    return _stage(o, rr, qr, 1.0, dt, o.visc(rho, "none"), zero, zero, (rho, q))


def ars_stages(rho, q, dx, dt, gamma, eps, mode="unlimited"):
    """Return ``(W_star, W_next)`` of the ARS(2,2,2) scheme."""
    b = BETA
    o = Periodic1D(len(rho), dx, gamma, eps)
    n = o.n
    rho, q = list(rho), list(q)
    dr, dq = o.half_slopes(rho, mode), o.half_slopes(q, mode)
    Em, Eq = o.explicit_div(rho, q, mode)
    C = o.centered_q_div(q, dq)
    H = o.lap([q[j] ** 2 / rho[j] for j in range(n)])
    D = o.visc(rho, mode)
    rr = [rho[j] - b * dt * (Em[j] + C[j]) + (b * dt) ** 2 * H[j] for j in range(n)]
    qr = [q[j] - b * dt * Eq[j] for j in range(n)]
    Ws = _stage(o, rr, qr, b, dt, D, dr, dq, (rho, q))

    rs, qs = list(Ws[0]), list(Ws[1])
    drs, dqs = o.half_slopes(rs, mode), o.half_slopes(qs, mode)
    Esm, Esq = o.explicit_div(rs, qs, mode)
    Ds = o.visc(rs, mode)
    Ism = [a - c for a, c in zip(o.centered_q_div(qs, dqs), o.dissipation(rs, drs, Ds))]
    Isq = [a - c for a, c in zip(o.pressure_div(rs, drs), o.dissipation(qs, dqs, Ds))]
    Hs = o.lap([qs[j] ** 2 / rs[j] for j in range(n)])
    lps = o.lap([o.p(r) for r in rs])
    rr = [rho[j] - dt * ((b - 1) * Em[j] + (2 - b) * Esm[j] + (1 - b) * Ism[j] + b * C[j])
          + b * dt**2 * ((b - 1) * H[j] + (2 - b) * Hs[j] + (1 - b) / eps * lps[j]) for j in range(n)]
    qr = [q[j] - dt * ((b - 1) * Eq[j] + (2 - b) * Esq[j] + (1 - b) * Isq[j]) for j in range(n)]
    Wn = _stage(o, rr, qr, b, dt, D, dr, dq, (rs, qs))
    return Ws, Wn
