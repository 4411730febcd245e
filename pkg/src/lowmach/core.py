"""Grids, boundary handling, norms and tabular output shared by all solvers."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

PERIODIC = "periodic"
NEUMANN = "neumann"
DIRICHLET = "dirichlet"
BC_KINDS = (PERIODIC, NEUMANN, DIRICHLET)


class InvalidFieldError(ValueError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError("a grid needs at least 2 cells")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_cells,)

    @property
    def spacing(self) -> tuple[float, ...]:
        return (self.dx,)

    @property
    def ndim(self) -> int:
        return 1

    @property
    def size(self) -> int:
        return self.n_cells

    @property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def centers(self, ng: int = 0) -> tuple[np.ndarray, ...]:
        """Cell centers, extended by ``ng`` ghost layers on each side."""
        j = np.arange(-ng, self.n_cells + ng)
        return (self.x_min + (j + 0.5) * self.dx,)


@dataclass(frozen=True)
class Grid2D:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n_x: int
    n_y: int

    def __post_init__(self):
        if self.n_x < 2 or self.n_y < 2:
            raise ValueError("a grid needs at least 2 cells per axis")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("empty extent")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.n_y

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_x, self.n_y)

    @property
    def spacing(self) -> tuple[float, ...]:
        return (self.dx, self.dy)

    @property
    def ndim(self) -> int:
        return 2

    @property
    def size(self) -> int:
        return self.n_x * self.n_y

    def centers(self, ng: int = 0) -> tuple[np.ndarray, ...]:
        """Meshgrid (``indexing='ij'``) of cell centers with ``ng`` ghost layers."""
        i = np.arange(-ng, self.n_x + ng)
        j = np.arange(-ng, self.n_y + ng)
        x = self.x_min + (i + 0.5) * self.dx
        y = self.y_min + (j + 0.5) * self.dy
        return tuple(np.meshgrid(x, y, indexing="ij"))

    @property
    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        return self.centers(0)


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary kind applied on both ends of one axis.

    ``exact`` is required for the Dirichlet kind: it is called as
    ``exact(coords, t)`` with cell-center coordinate arrays and must return
    the conserved state stacked along the first axis.
    """

    kind: str = PERIODIC
    exact: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == DIRICHLET and self.exact is None:
            raise ValueError("dirichlet boundary needs an exact-solution evaluator")


def _axis_source(k: int, n: int, kind: str) -> Optional[int]:
    """Interior index feeding padded-free index ``k`` (may be out of range)."""
    if 0 <= k < n:
        return k
    if kind == PERIODIC:
        return k % n
    if kind == NEUMANN:
        # mirror about the boundary face
        return -k - 1 if k < 0 else 2 * n - k - 1
    return None


class GhostMap:
    """Linear map from interior cell values to a ghost-padded array.

    ``padded = P @ interior + ghost`` where ghost values are only non-zero on
    Dirichlet ghost cells. Periodic and Neumann ghosts are pure copies, so any
    pointwise function commutes with ``P``.
    """

    def __init__(self, shape: Sequence[int], kinds: Sequence[str], ng: int = 2):
        if len(shape) != len(kinds):
            raise DimensionError("one boundary kind per axis is required")
        self.shape = tuple(shape)
        self.kinds = tuple(kinds)
        self.ng = ng
        self.padded_shape = tuple(n + 2 * ng for n in self.shape)
        n_int = int(np.prod(self.shape))
        n_pad = int(np.prod(self.padded_shape))

        sources = []
        for n, kind in zip(self.shape, self.kinds):
            src = [_axis_source(k - ng, n, kind) for k in range(n + 2 * ng)]
            sources.append(np.array([-1 if s is None else s for s in src]))
        mesh = np.meshgrid(*sources, indexing="ij")
        dirichlet = np.zeros(self.padded_shape, dtype=bool)
        for m in mesh:
            dirichlet |= m < 0
        keep = ~dirichlet.ravel()
        rows = np.arange(n_pad)[keep]
        cols = np.ravel_multi_index([m.ravel()[keep] for m in mesh], self.shape)
        self.P = sp.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n_pad, n_int)
        )
        self.dirichlet = dirichlet
        self.has_dirichlet = bool(dirichlet.any())
        # interior cells as flat padded indices
        inner = tuple(slice(ng, ng + n) for n in self.shape)
        self.interior = inner
        self.interior_flat = np.ravel_multi_index(
            np.meshgrid(*[np.arange(ng, ng + n) for n in self.shape], indexing="ij"),
            self.padded_shape,
        ).ravel()

    def pad(self, f: np.ndarray, ghost: Optional[np.ndarray] = None) -> np.ndarray:
        out = (self.P @ f.ravel()).reshape(self.padded_shape)
        if ghost is not None and self.has_dirichlet:
            out[self.dirichlet] = ghost[self.dirichlet]
        return out

    def neighbor(self, axis: int, offset: int) -> np.ndarray:
        """Flat padded index of the ``offset`` neighbor of each interior cell."""
        grids = list(np.meshgrid(
            *[np.arange(self.ng, self.ng + n) for n in self.shape], indexing="ij"
        ))
        grids[axis] = grids[axis] + offset
        return np.ravel_multi_index(grids, self.padded_shape).ravel()


def _check_finite(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise InvalidFieldError("field contains non-finite values")
    return f


def total_variation(f, bc: str = PERIODIC) -> float:
    """Sum of absolute jumps between neighbouring cells.

    Periodic fields include the wrap-around jump; with Neumann the ghost jump
    vanishes.
    """
    f = _check_finite(f)
    if bc == PERIODIC:
        return float(np.abs(np.diff(f, append=f[:1])).sum())
    if bc == NEUMANN:
        return float(np.abs(np.diff(f)).sum())
    raise ValueError(f"total variation needs periodic or neumann, got {bc!r}")


def linf_norm(f) -> float:
    return float(np.max(np.abs(np.asarray(f, dtype=float))))


def linf_error(f, g) -> float:
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise DimensionError(f"shape mismatch {f.shape} vs {g.shape}")
    return float(np.max(np.abs(f - g)))


def cfl_time_step(u, dx: float, C: float, dt_max: Optional[float] = None) -> float:
    """Uniform CFL step ``C dx / max(2|u|)``.

    ``u`` may be a speed field; for a still fluid the step falls back to
    ``dt_max`` (default: ``dx``).
    """
    if C <= 0 or dx <= 0:
        raise ValueError("C and dx must be positive")
    lam = 2.0 * float(np.max(np.abs(u)))
    if lam == 0.0:
        return dx if dt_max is None else dt_max
    return C * dx / lam


def clamp_step(dt: float, t: float, t_end: float) -> float:
    """Shrink ``dt`` so the march lands exactly on ``t_end``."""
    return min(dt, t_end - t)


@dataclass
class ErrorReport:
    """L-infinity errors per grid, one column per variable.

    ``h`` is the mesh size used for order fitting; in 2D it is ``N**-0.5``
    for ``N`` total cells.
    """

    n_cells: list
    errors: dict
    h: list = None
    orders: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.h is None:
            self.h = [1.0 / n for n in self.n_cells]
        for name, errs in self.errors.items():
            if len(errs) != len(self.n_cells):
                raise DimensionError(f"{name}: one error per grid expected")

    @classmethod
    def for_2d(cls, n_total: Sequence[int], errors: dict) -> "ErrorReport":
        return cls(list(n_total), errors, h=[n ** -0.5 for n in n_total])

    def to_csv(self) -> str:
        names = list(self.errors)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["N"]
        for name in names:
            header += [f"e_inf_{name}", f"order_{name}"]
        w.writerow(header)
        for k, n in enumerate(self.n_cells):
            row = [n]
            for name in names:
                row.append(f"{self.errors[name][k]:.6e}")
                o = self.orders.get(name, [None] * len(self.n_cells))[k]
                row.append("" if o is None or not math.isfinite(o) else f"{o:.4f}")
            w.writerow(row)
        return buf.getvalue()


def fit_orders(report: ErrorReport) -> ErrorReport:
    """Observed orders between consecutive grids.

    The first grid has no order; a non-positive error gives ``nan``.
    """
    if len(report.n_cells) < 2:
        raise ValueError("at least two grids are needed")
    orders = {}
    for name, errs in report.errors.items():
        col = [None]
        for k in range(1, len(errs)):
            e0, e1 = errs[k - 1], errs[k]
            if e0 <= 0 or e1 <= 0:
                col.append(float("nan"))
                continue
            col.append(math.log(e0 / e1) / math.log(report.h[k - 1] / report.h[k]))
        orders[name] = col
    report.orders = orders
    return report


def write_atomic(path, text: str) -> None:
    """Write ``text`` through a temporary file and rename it into place."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def snapshot_csv(coords: Sequence[np.ndarray], columns: dict) -> str:
    """Comma-separated per-cell snapshot: coordinates then named fields."""
    names = ["x", "y"][: len(coords)] + list(columns)
    arrays = [np.ravel(c) for c in coords] + [np.ravel(v) for v in columns.values()]
    buf = io.StringIO()
    buf.write(",".join(names) + "\n")
    np.savetxt(buf, np.column_stack(arrays), delimiter=",", fmt="%.17g")
    return buf.getvalue()


def read_snapshot_csv(path) -> dict:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.asarray(data[name]) for name in data.dtype.names}
