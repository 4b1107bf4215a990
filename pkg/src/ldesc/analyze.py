"""Differentiate descriptor fields and extract manifold ridges.

The detection signal is a sign change of a partial derivative of the
descriptor field between adjacent grid nodes, not any property of the
field's contour lines.  For a saddle oriented like the benchmark fields,
sign changes of dM/dx0 along x trace the stable manifold and sign changes
of dM/dy0 along y trace the unstable one; for general fields the two
crossing sets are reported without a stable/unstable label (the CSV writer
calls them candidates).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from .mfield import GridSpec, ScalarField

__all__ = [
    "DerivativeField",
    "Crossing",
    "ManifoldMask",
    "partial_derivative",
    "detect_manifolds",
]


@dataclass(frozen=True, eq=False)
class DerivativeField:
    """A ScalarField holding one partial derivative of a parent field."""

    field: ScalarField
    axis: str       # "x" or "y"
    spacing: float  # grid step along the differentiation axis


@dataclass(frozen=True)
class Crossing:
    """One sign change, located on the grid edge starting at node (i, j).

    position is the interpolated coordinate along the scanned axis (x for
    dM/dx0 crossings, y for dM/dy0 crossings).  Exact zeros sit on the node
    itself.  jump is the absolute difference of the derivative across the
    crossing.
    """

    i: int
    j: int
    position: float
    jump: float


@dataclass(eq=False)
class ManifoldMask:
    grid: GridSpec
    x_crossings: List[Crossing]
    y_crossings: List[Crossing]


def partial_derivative(field: ScalarField, axis: str) -> DerivativeField:
    """Finite-difference partial derivative of a gridded field.

    Central differences at interior nodes (exact for quadratics), first
    order one-sided at the boundary.  A node is valid only where every
    stencil input is valid.
    """
    grid = field.grid
    if axis == "x":
        n = grid.nx
        h = grid.hx
        v = field.as_grid()
        ok = field.valid_as_grid()
    elif axis == "y":
        n = grid.ny
        h = grid.hy
        v = field.as_grid().T
        ok = field.valid_as_grid().T
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    if n < 3:
        raise ValueError(f"need at least 3 nodes along {axis} for derivatives, got {n}")

    d = np.empty_like(v)
    d[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2.0 * h)
    d[:, 0] = (v[:, 1] - v[:, 0]) / h
    d[:, -1] = (v[:, -1] - v[:, -2]) / h

    dok = np.empty_like(ok)
    dok[:, 1:-1] = ok[:, 2:] & ok[:, :-2]
    dok[:, 0] = ok[:, 0] & ok[:, 1]
    dok[:, -1] = ok[:, -1] & ok[:, -2]

    if axis == "y":
        d = d.T
        dok = dok.T
    # invalid entries may hold non-finite garbage; zero them for hygiene
    d = np.where(dok, d, 0.0)
    out = ScalarField(grid=grid, values=d.reshape(-1).copy(),
                      valid=dok.reshape(-1).copy(), meta=field.meta)
    return DerivativeField(field=out, axis=axis, spacing=h)


def _scan_line(values, ok, coords, h, emit):
    """Emit crossings along one line of derivative samples.

    Adjacent valid samples of strictly opposite sign give an interpolated
    crossing; an exact zero counts as a crossing at its own node (symmetric
    grids put nodes exactly on the manifold).  A run of zeros is a plateau,
    not a crossing.
    """
    n = len(values)
    for k in range(n - 1):
        if not (ok[k] and ok[k + 1]):
            continue
        a = values[k]
        b = values[k + 1]
        if a == 0.0 and b == 0.0:
            continue
        if a == 0.0:
            emit(k, coords[k], _node_jump(values, ok, k))
        elif b == 0.0:
            if k + 1 == n - 1:  # zero at the line's last node has no right pair
                emit(k, coords[k + 1], _node_jump(values, ok, k + 1))
        elif (a < 0.0) != (b < 0.0):
            frac = a / (a - b)
            emit(k, coords[k] + h * frac, abs(b - a))


def _node_jump(values, ok, k):
    left = values[k - 1] if k > 0 and ok[k - 1] else 0.0
    right = values[k + 1] if k + 1 < len(values) and ok[k + 1] else 0.0
    return abs(right - left)


def _quantile_filter(crossings, quantile):
    if not crossings or quantile <= 0.0:
        return crossings
    jumps = np.asarray([c.jump for c in crossings])
    threshold = float(np.quantile(jumps, quantile))
    return [c for c in crossings if c.jump >= threshold]


def detect_manifolds(dmdx: DerivativeField, dmdy: DerivativeField,
                     min_jump_quantile: float = 0.0) -> ManifoldMask:
    """Collect sign-change crossings of both derivative fields.

    x_crossings scan dM/dx0 along grid rows, y_crossings scan dM/dy0 along
    grid columns.  Crossings whose jump magnitude falls strictly below the
    requested quantile of their own family are dropped (quantile 0 keeps
    everything).  The jump magnitudes let callers separate abrupt changes
    from smooth zeros; no automatic classification is attempted.
    """
    if dmdx.axis != "x" or dmdy.axis != "y":
        raise ValueError("detect_manifolds expects (x-derivative, y-derivative)")
    if dmdx.field.grid != dmdy.field.grid:
        raise ValueError("derivative fields live on different grids")
    if not (0.0 <= min_jump_quantile < 1.0):
        raise ValueError(f"min_jump_quantile must be in [0, 1), got {min_jump_quantile}")

    grid = dmdx.field.grid
    xcoords = grid.x_coords()
    ycoords = grid.y_coords()

    x_crossings: List[Crossing] = []
    vx = dmdx.field.as_grid()
    okx = dmdx.field.valid_as_grid()
    for j in range(grid.ny):
        _scan_line(vx[j], okx[j], xcoords, grid.hx,
                   lambda i, pos, jump, j=j: x_crossings.append(
                       Crossing(i=i, j=j, position=pos, jump=jump)))

    y_crossings: List[Crossing] = []
    vy = dmdy.field.as_grid()
    oky = dmdy.field.valid_as_grid()
    for i in range(grid.nx):
        _scan_line(vy[:, i], oky[:, i], ycoords, grid.hy,
                   lambda j, pos, jump, i=i: y_crossings.append(
                       Crossing(i=i, j=j, position=pos, jump=jump)))

    return ManifoldMask(
        grid=grid,
        x_crossings=_quantile_filter(x_crossings, min_jump_quantile),
        y_crossings=_quantile_filter(y_crossings, min_jump_quantile),
    )
