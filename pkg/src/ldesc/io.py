"""Portable serialization of descriptor fields and manifold masks.

Formats are plain text (CSV, 17 significant digits so doubles round-trip
exactly) and binary PGM (P5, writable without any imaging dependency;
users apply their own colormaps downstream).  Exact layouts are documented
in the README together with a hex dump of a small PGM.
"""

from __future__ import annotations

import numpy as np

from .analyze import ManifoldMask
from .mfield import GridSpec, ScalarField

__all__ = [
    "CsvFormatError",
    "write_csv",
    "read_csv",
    "write_pgm",
    "write_mask_csv",
]

_CSV_HEADER = "x,y,value,valid"
_SPACING_RTOL = 1e-9


class CsvFormatError(ValueError):
    """Malformed or inconsistent field CSV input."""


def write_csv(field: ScalarField) -> bytes:
    """Serialize a field as ``x,y,value,valid`` rows in storage order."""
    xs, ys = field.grid.node_coords()
    lines = [_CSV_HEADER]
    values = field.values
    valid = field.valid
    for k in range(field.grid.size):
        lines.append(
            f"{xs[k]:.17g},{ys[k]:.17g},{values[k]:.17g},{1 if valid[k] else 0}")
    return ("\n".join(lines) + "\n").encode("ascii")


def _check_uniform(coords, span, what):
    n = len(coords)
    lo, hi = coords[0], coords[-1]
    if not hi > lo:
        raise CsvFormatError(f"{what} coordinates do not increase")
    step = (hi - lo) / (n - 1)
    expected = lo + step * np.arange(n)
    if np.max(np.abs(coords - expected)) > _SPACING_RTOL * span:
        raise CsvFormatError(f"non-uniform {what} spacing (tolerance {_SPACING_RTOL:g} relative)")


def read_csv(data) -> ScalarField:
    """Parse bytes or text produced by write_csv back into a ScalarField.

    The grid is reconstructed from the node coordinates; inconsistent node
    counts or non-uniform spacing (beyond 1e-9 relative) are rejected with
    the offending line where one exists.
    """
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    lines = text.splitlines()
    if not lines:
        raise CsvFormatError("line 1: empty input")
    if lines[0].strip() != _CSV_HEADER:
        raise CsvFormatError(f"line 1: expected header {_CSV_HEADER!r}, got {lines[0]!r}")

    xs, ys, values, valid = [], [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise CsvFormatError(f"line {lineno}: blank line")
        parts = line.split(",")
        if len(parts) != 4:
            raise CsvFormatError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        try:
            xs.append(float(parts[0]))
            ys.append(float(parts[1]))
            values.append(float(parts[2]))
        except ValueError:
            raise CsvFormatError(f"line {lineno}: malformed number") from None
        flag = parts[3].strip()
        if flag not in ("0", "1"):
            raise CsvFormatError(f"line {lineno}: valid flag must be 0 or 1, got {flag!r}")
        valid.append(flag == "1")

    total = len(values)
    if total < 4:
        raise CsvFormatError(f"only {total} data rows; need at least a 2x2 grid")
    xs = np.asarray(xs)
    ys = np.asarray(ys)

    nx = 1
    while nx < total and ys[nx] == ys[0]:
        nx += 1
    if nx < 2 or total % nx != 0:
        raise CsvFormatError(f"inconsistent node counts (row length {nx} of {total} rows)")
    ny = total // nx
    if ny < 2:
        raise CsvFormatError("need at least 2 rows of nodes")

    xpat = xs[:nx]
    spanx = xpat[-1] - xpat[0]
    if not spanx > 0:
        raise CsvFormatError("x coordinates do not increase")
    if np.max(np.abs(xs.reshape(ny, nx) - xpat)) > _SPACING_RTOL * spanx:
        raise CsvFormatError("x coordinates differ between rows")
    ycol = ys.reshape(ny, nx)
    _check_uniform(xpat, spanx, "x")
    yvals = ycol[:, 0]
    spany = yvals[-1] - yvals[0]
    if not spany > 0:
        raise CsvFormatError("y coordinates do not increase")
    if np.max(np.abs(ycol - yvals[:, None])) > _SPACING_RTOL * spany:
        raise CsvFormatError("y varies within a row block")
    _check_uniform(yvals, spany, "y")

    grid = GridSpec(xmin=float(xpat[0]), xmax=float(xpat[-1]),
                    ymin=float(yvals[0]), ymax=float(yvals[-1]),
                    nx=nx, ny=ny)
    return ScalarField(grid=grid,
                       values=np.asarray(values, dtype=np.float64),
                       valid=np.asarray(valid, dtype=bool),
                       meta=None)


def write_pgm(field: ScalarField) -> bytes:
    """Render a field as a binary PGM (P5) image.

    Valid values map linearly from [min, max] onto [0, 255]; a constant
    field maps to 128 and invalid nodes to 0.  Image row 0 is the ymax grid
    row.  Output bytes are deterministic for a given field.
    """
    if not field.valid.any():
        raise ValueError("cannot render a field with no valid nodes")
    nx, ny = field.grid.nx, field.grid.ny
    v = field.as_grid()
    ok = field.valid_as_grid()
    vmin = float(v[ok].min())
    vmax = float(v[ok].max())
    if vmax > vmin:
        scaled = (v - vmin) * (255.0 / (vmax - vmin))
        pix = np.clip(np.floor(scaled + 0.5), 0.0, 255.0).astype(np.uint8)
    else:
        pix = np.full((ny, nx), 128, dtype=np.uint8)
    pix = np.where(ok, pix, np.uint8(0))
    header = f"P5\n{nx} {ny}\n255\n".encode("ascii")
    return header + pix[::-1].tobytes()


def write_mask_csv(mask: ManifoldMask) -> bytes:
    """Serialize crossings as ``kind,x,y,jump`` rows.

    x-derivative crossings are stable-manifold candidates located at
    (position, y_row); y-derivative crossings are unstable-manifold
    candidates at (x_column, position).
    """
    xcoords = mask.grid.x_coords()
    ycoords = mask.grid.y_coords()
    lines = ["kind,x,y,jump"]
    for c in mask.x_crossings:
        lines.append(f"stable_candidate,{c.position:.17g},{ycoords[c.j]:.17g},{c.jump:.17g}")
    for c in mask.y_crossings:
        lines.append(f"unstable_candidate,{xcoords[c.i]:.17g},{c.position:.17g},{c.jump:.17g}")
    return ("\n".join(lines) + "\n").encode("ascii")
