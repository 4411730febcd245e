"""PNG figures written next to the CSV outputs (non-interactive backend)."""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(".tmp-" + path.name)
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(tmp, dpi=110, metadata={"Software": None})
    plt.close(fig)
    os.replace(tmp, path)
    return path


def plot_snapshot(res, path) -> Path:
    W, g = res.W, res.grid
    title = f"{res.case}  {res.scheme}  eps={res.eps:g}  t={res.t:.4g}"
    if W[0].ndim == 1:
        names = ["w"] if W.shape[0] == 1 else ["rho", "q"]
        fig, axes = plt.subplots(1, len(names), figsize=(5 * len(names), 3.6), squeeze=False)
        for ax, name, f in zip(axes[0], names, W):
            ax.plot(g.x, f, ".-", ms=3, lw=0.8)
            ax.set_xlabel("x")
            ax.set_ylabel(name)
        fig.suptitle(title)
        fig.tight_layout()
        return _save(fig, path)
    from .runner import snapshot_columns

    cols = snapshot_columns(res)
    field, name = (cols["vorticity"], "vorticity") if "vorticity" in cols else (W[0], "rho")
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    x, y = g.xy
    im = ax.pcolormesh(x, y, field, shading="auto", cmap="RdBu_r")
    fig.colorbar(im, ax=ax, label=name)
    ax.set_aspect("equal")
    ax.set_title(title, fontsize=9)
    return _save(fig, path)


def plot_diagnostics(res, path) -> Path:
    d = res.diagnostics
    t = np.array([r["t"] for r in d])
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    axes[0].plot(t, [r["tv_rho"] for r in d])
    axes[0].set_ylabel("TV")
    axes[1].plot(t, [r["linf_rho"] for r in d])
    axes[1].set_ylabel("max |rho|")
    fb = [r["t"] for r in d if r["fallback"]]
    if fb:
        axes[1].plot(fb, np.interp(fb, t, [r["linf_rho"] for r in d]), "rx", label="fallback")
        axes[1].legend()
    for ax in axes:
        ax.set_xlabel("t")
    fig.tight_layout()
    return _save(fig, path)


def plot_convergence(report, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    for name, errs in report.errors.items():
        ax.loglog(report.n_cells, errs, "o-", label=name)
    ax.set_xlabel("N")
    ax.set_ylabel("L-infinity error")
    ax.legend()
    ax.grid(True, which="both", lw=0.3)
    fig.tight_layout()
    return _save(fig, path)
