"""``key = value`` experiment configuration with line-numbered errors."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

from .cases import CASES
from .isentropic import SCHEMES, default_cfl


class ConfigError(ValueError):
    pass


VISCOSITY = ("full", "zero")


@dataclass
class ExperimentConfig:
    case: str = "shock-tube"
    scheme: str = "o1"
    epsilon: Optional[float] = None
    gamma: Optional[float] = None
    cells: Optional[int] = None
    cfl: Optional[float] = None  # None: 0.9 for o1, 0.45 otherwise
    tend: Optional[float] = None
    out: str = "out"
    viscosity: str = "full"
    grids: Optional[list] = None
    plots: bool = True

    # resolved values, filled by ``resolve``
    def resolved(self) -> "ExperimentConfig":
        c = CASES[self.case]
        r = ExperimentConfig(**asdict(self))
        if r.epsilon is None:
            r.epsilon = c.eps_default
        if r.gamma is None:
            r.gamma = c.gamma
        if r.cells is None:
            r.cells = c.cells(r.epsilon)
        if r.tend is None:
            r.tend = c.t_end(r.epsilon)
        if r.cfl is None:
            r.cfl = default_cfl(r.scheme)
        if r.grids is None:
            r.grids = list(c.grids)
        return r

    def to_dict(self):
        return asdict(self)

    def digest(self) -> str:
        """Hash of the resolved configuration, excluding the output location."""
        d = self.resolved().to_dict()
        d.pop("out")
        d.pop("plots")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


_FIELDS = {f.name for f in fields(ExperimentConfig)}
_ALIASES = {"eps": "epsilon", "t_end": "tend", "cfl_c": "cfl", "n_cells": "cells", "C": "cfl"}


def _parse_bool(s):
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _positive_float(s):
    v = float(s)
    if not (math.isfinite(v) and v > 0):
        raise ValueError("must be a positive number")
    return v


def _nonneg_float(s):
    v = float(s)
    if not (math.isfinite(v) and v >= 0):
        raise ValueError("must be a non-negative number")
    return v


def _cells(s):
    v = int(s)
    if v < 2:
        raise ValueError("must be an integer >= 2")
    return v


def _grids(s):
    if isinstance(s, (list, tuple)):
        vals = [int(v) for v in s]
    else:
        vals = [int(v) for v in str(s).replace(" ", "").split(",") if v]
    if len(vals) < 2 or any(v < 2 for v in vals):
        raise ValueError("needs at least two grid sizes >= 2")
    return vals


def _choice(options):
    def f(s):
        if s not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return s

    return f


def _gamma(s):
    v = float(s)
    if not (math.isfinite(v) and v >= 1):
        raise ValueError("must be >= 1")
    return v


PARSERS = {
    "case": _choice(tuple(CASES)),
    "scheme": _choice(SCHEMES),
    "epsilon": _positive_float,
    "gamma": _gamma,
    "cells": _cells,
    "cfl": _positive_float,
    "tend": _nonneg_float,
    "out": str,
    "viscosity": _choice(VISCOSITY),
    "grids": _grids,
    "plots": _parse_bool,
}


def _set(cfg, key, raw, where):
    key = _ALIASES.get(key, key)
    if key not in _FIELDS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        value = PARSERS[key](raw)
    except ValueError as e:
        raise ConfigError(f"{where}: bad value for {key}: {e}") from None
    setattr(cfg, key, value)


def parse_config(text: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment), then apply overrides.

    Overrides come from command-line flags and win over the file. The CFL
    constant follows the final scheme unless it was set explicitly.
    """
    cfg = ExperimentConfig()
    seen = set()
    for i, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {i}: expected key = value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ConfigError(f"line {i}: empty key")
        name = _ALIASES.get(k, k)
        if name in seen:
            raise ConfigError(f"line {i}: duplicate key {k!r}")
        _set(cfg, k, v, f"line {i}")
        seen.add(name)
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        _set(cfg, k, v if isinstance(v, (list, tuple)) else str(v), f"option --{k}")
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    case = CASES[cfg.case]
    if case.name == "smooth-gamma3" and cfg.gamma is not None and cfg.gamma != 3.0:
        raise ConfigError("smooth-gamma3 has an exact solution only for gamma = 3")
    if case.name == "advection-pulse" and cfg.viscosity != "full":
        raise ConfigError("the viscosity policy does not apply to advection-pulse")
    if case.name == "advection-pulse" and cfg.gamma is not None:
        raise ConfigError("gamma does not apply to advection-pulse")
    if case.ndim == 2 and cfg.cells is not None and cfg.cells > 2000:
        raise ConfigError("cells is per axis; more than 2000 per axis is not supported")
