"""Descriptor fields on rectangular grids of initial conditions.

Values are stored flat in row-major order with y varying slowest: node
(i, j) lives at index j*nx + i and sits at (x_i, y_j).  The CSV/PGM writers
and the derivative/ridge code all rely on this layout.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._backend import BACKEND, kernels
from .fields import VectorFieldDef
from .integrate import IntegratorConfig

__all__ = ["GridSpec", "FieldMeta", "ScalarField", "compute_field"]


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid of initial conditions."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (np.isfinite(self.xmin) and np.isfinite(self.xmax)
                and self.xmin < self.xmax):
            raise ValueError(f"need xmin < xmax, got [{self.xmin}, {self.xmax}]")
        if not (np.isfinite(self.ymin) and np.isfinite(self.ymax)
                and self.ymin < self.ymax):
            raise ValueError(f"need ymin < ymax, got [{self.ymin}, {self.ymax}]")
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"need at least 2 nodes per axis, got {self.nx}x{self.ny}")

    @property
    def hx(self) -> float:
        return (self.xmax - self.xmin) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.ymax - self.ymin) / (self.ny - 1)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def x_coords(self) -> np.ndarray:
        return np.linspace(self.xmin, self.xmax, self.nx)

    def y_coords(self) -> np.ndarray:
        return np.linspace(self.ymin, self.ymax, self.ny)

    def node_coords(self):
        """Flattened (x, y) node coordinates in storage order."""
        xs = np.tile(self.x_coords(), self.ny)
        ys = np.repeat(self.y_coords(), self.nx)
        return xs, ys


@dataclass(frozen=True)
class FieldMeta:
    field_name: str
    t0: float
    tau: float
    config_digest: str


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Grid plus one float per node and a per-node validity flag.

    Treated as immutable once constructed; values are finite wherever
    valid is True.
    """

    grid: GridSpec
    values: np.ndarray          # float64, shape (nx*ny,)
    valid: np.ndarray           # bool, shape (nx*ny,)
    meta: Optional[FieldMeta] = None

    def __post_init__(self):
        if self.values.shape != (self.grid.size,):
            raise ValueError(
                f"values has shape {self.values.shape}, expected ({self.grid.size},)")
        if self.valid.shape != (self.grid.size,):
            raise ValueError(
                f"valid has shape {self.valid.shape}, expected ({self.grid.size},)")

    def as_grid(self) -> np.ndarray:
        """Values as a (ny, nx) view."""
        return self.values.reshape(self.grid.ny, self.grid.nx)

    def valid_as_grid(self) -> np.ndarray:
        return self.valid.reshape(self.grid.ny, self.grid.nx)


def _config_digest(cfg: IntegratorConfig) -> str:
    text = f"{cfg.method}|{cfg.step!r}|{cfg.rtol!r}|{cfg.atol!r}|{cfg.escape_radius!r}"
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def _worker_count(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("LDESC_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def compute_field(field: VectorFieldDef, grid: GridSpec, t0: float, tau: float,
                  cfg: Optional[IntegratorConfig] = None,
                  workers: Optional[int] = None) -> ScalarField:
    """Descriptor value at every grid node.

    Nodes are independent work items and the result is a pure gather, so
    the output is bitwise identical for any worker count.  The compiled
    backend releases the GIL and is parallelized with threads over row
    blocks; the NumPy backend vectorizes whole rows internally and ignores
    the worker count for the fixed-step method.
    """
    cfg = cfg if cfg is not None else IntegratorConfig()
    if not (tau >= 0.0 and np.isfinite(tau)):
        raise ValueError(f"tau must be non-negative, got {tau}")
    xs, ys = grid.node_coords()
    values = np.zeros(grid.size, dtype=np.float64)
    valid = np.zeros(grid.size, dtype=np.uint8)
    nsteps, h = cfg.resolve_steps(tau)
    args = field.kernel_args()
    nworkers = _worker_count(workers)

    def run_slice(lo, hi):
        kernels.compute_m_batch(
            *args, xs[lo:hi], ys[lo:hi], t0, tau, cfg.method_id(), nsteps, h,
            cfg.rtol, cfg.atol, cfg.escape_radius,
            values[lo:hi], valid[lo:hi])

    if BACKEND == "compiled" and nworkers > 1 and grid.ny >= 2:
        # split by row blocks; each task writes a disjoint output slice
        blocks = min(nworkers * 4, grid.ny)
        bounds = np.linspace(0, grid.ny, blocks + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            futures = [
                pool.submit(run_slice, int(j0) * grid.nx, int(j1) * grid.nx)
                for j0, j1 in zip(bounds[:-1], bounds[1:]) if j1 > j0
            ]
            for fut in futures:
                fut.result()
    else:
        run_slice(0, grid.size)

    meta = FieldMeta(field_name=field.name, t0=t0, tau=tau,
                     config_digest=_config_digest(cfg))
    return ScalarField(grid=grid, values=values, valid=valid.astype(bool), meta=meta)
