"""Run configuration: flat ``key = value`` files with flag overrides."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .flow import StepperConfig
from .kernel import FlowParams
from .quadrature import QuadratureScheme
from .torus import (
    GridSpec,
    PeriodicField,
    field_from_modes,
    random_band_limited,
    read_snapshot,
)

DEFAULTS = {
    "dim": 1,
    "grid": 256,
    "alpha": 0.5,
    "beta": 0.6,
    "gamma": 0.9,
    "cells": 4,
    "seed": 12345,
    "dt": 1e-3,
    "t_end": 0.1,
    "scheme": "imex_cn",
    "sigma": 1.0,
    "snapshot_every": 10,
    "u0": "0.5 1:0.01",
    "out_dir": "fracflow_out",
    "threads": 0,
}

_TYPES = {"dim": int, "grid": int, "cells": int, "seed": int, "snapshot_every": int, "threads": int,
          "alpha": float, "beta": float, "gamma": float, "dt": float, "t_end": float, "sigma": float,
          "scheme": str, "u0": str, "out_dir": str}


@dataclass(frozen=True)
class RunConfig:
    params: FlowParams
    grid: GridSpec
    scheme: QuadratureScheme
    stepper: StepperConfig
    seed: int
    out_dir: Path
    u0: str
    threads: int = 0

    @property
    def holder_metadata(self) -> tuple[float, float, float]:
        return (self.params.alpha, self.params.beta, self.params.gamma)

    @property
    def nonconforming(self) -> bool:
        return not self.params.holder_conforming()

    def resolved_lines(self) -> list[str]:
        p, g = self.params, self.grid
        out = [
            f"dim = {g.dim}",
            f"grid = {g.points_per_axis}",
            f"alpha = {p.alpha!r}",
            f"beta = {p.beta!r}",
            f"gamma = {p.gamma!r}",
            f"holder_exponents = {'nonconforming' if self.nonconforming else 'conforming'}",
            f"seed = {self.seed}",
            f"dt = {self.stepper.dt!r}",
            f"t_end = {self.stepper.t_end!r}",
            f"scheme = {self.stepper.scheme}",
            f"sigma = {self.stepper.implicit_symbol_scale!r}",
            f"snapshot_every = {self.stepper.snapshot_every}",
            f"u0 = {self.u0}",
            f"out_dir = {self.out_dir}",
            f"threads = {self.threads}",
        ]
        out += [f"quadrature.{k} = {v!r}" for k, v in asdict(self.scheme).items()]
        return out

    def write_resolved(self) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / "config.resolved"
        path.write_text("\n".join(self.resolved_lines()) + "\n", encoding="ascii")
        return path


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _coerce(values: dict) -> dict:
    out = dict(DEFAULTS)
    quad = {}
    for k, v in values.items():
        if v is None:
            continue
        if k.startswith("quadrature."):
            name = k.split(".", 1)[1]
            quad[name] = float(v) if name == "inner_radius" else int(v)
            continue
        if k not in _TYPES:
            if k == "holder_exponents":
                continue
            raise ValueError(f"unknown config key {k!r}")
        out[k] = _TYPES[k](v)
    out["quadrature"] = quad
    return out


def parse_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the file (if any), then non-None ``overrides``."""
    values = {}
    if path is not None:
        values.update(read_config_file(path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    v = _coerce(values)
    params = FlowParams(v["alpha"], dim=v["dim"], beta=v["beta"], gamma=v["gamma"])
    grid = GridSpec(v["dim"], v["grid"])
    kmax = int(np.ceil(grid.points_per_axis // 2 * np.sqrt(grid.dim)))
    scheme = QuadratureScheme.for_band(kmax, grid.dim, v["cells"])
    if v["quadrature"]:
        scheme = QuadratureScheme(**{**asdict(scheme), **v["quadrature"]})
    stepper = StepperConfig(v["dt"], v["t_end"], v["scheme"], v["sigma"], v["snapshot_every"])
    stepper = stepper.with_budget(grid, params.alpha)
    return RunConfig(params, grid, scheme, stepper, v["seed"], Path(v["out_dir"]), v["u0"], v["threads"])


def initial_field(spec: str, grid: GridSpec, seed: int) -> PeriodicField:
    """Build u0 from ``spec``.

    Accepted forms: a snapshot file path; ``random`` or ``random:AMP``
    (band-limited, seeded); or whitespace-separated terms where a bare number
    is the mean and ``k:amp`` / ``k1,k2:amp`` adds ``amp*cos(k.x)``
    (``k:a:b`` adds ``a cos + b sin``).
    """
    spec = spec.strip()
    if Path(spec).is_file():
        f, _, _ = read_snapshot(spec)
        if f.grid != grid:
            raise ValueError(f"snapshot grid {f.grid} differs from configured grid {grid}")
        return f
    if spec.startswith("random"):
        amp = float(spec.split(":", 1)[1]) if ":" in spec else 0.3
        return random_band_limited(grid, np.random.default_rng(seed), amplitude=amp)
    mean, modes = 0.0, []
    for term in spec.split():
        parts = term.split(":")
        if len(parts) == 1:
            mean += float(parts[0])
            continue
        k = tuple(int(x) for x in parts[0].split(","))
        amp = float(parts[1]) if len(parts) == 2 else (float(parts[1]), float(parts[2]))
        if len(k) != grid.dim:
            raise ValueError(f"mode {parts[0]!r} does not match dimension {grid.dim}")
        if max(abs(x) for x in k) >= grid.points_per_axis // 2:
            raise ValueError(f"mode {parts[0]!r} is not resolved by the grid")
        modes.append((k if grid.dim > 1 else k[0], amp))
    return field_from_modes(grid, modes, mean)


__all__ = ["DEFAULTS", "RunConfig", "initial_field", "parse_config", "read_config_file"]
_ = fields  # keep dataclass helpers importable for callers that introspect RunConfig
