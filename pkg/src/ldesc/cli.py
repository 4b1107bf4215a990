"""Command-line front end.

Computes a descriptor field over a grid of initial conditions, takes both
partial derivatives, extracts sign-change crossings, and serializes
whatever outputs were requested.  Presets encode the benchmark parameter
sets (see the README table).

Exit codes: 0 success, 2 usage error, 3 computation produced no valid
nodes, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from typing import Optional

from . import analyze, fields
from . import io as field_io
from .expr import ParseError
from .integrate import IntegratorConfig
from .mfield import GridSpec, compute_field
from .reference import AnalyticSaddleFlow, oracle_m

__all__ = ["RunConfig", "parse_args", "run", "main", "PRESETS"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_VALID = 3
EXIT_IO = 4

_DEFAULT_GRID = "-1:1:201,-1:1:201"

# Benchmark parameter sets.  fig2 uses tanh(x) as a stand-in profile: the
# original f is not published, and any f with a hyperbolic origin
# (f(0)=0, f'(0)>0) exercises the same structure.  fig3b/fig3d share the
# parameters of fig3a/fig3c; the pairs correspond to the dM/dx0 and dM/dy0
# panels of the same computation.
PRESETS = {
    "fig1": dict(field="saddle(1,1)", tau=20.0, grid=_DEFAULT_GRID),
    "fig2": dict(field="separable(tanh(x))", tau=10.0, grid=_DEFAULT_GRID),
    "fig3a": dict(field="saddle(1,2)", tau=10.0, grid=_DEFAULT_GRID),
    "fig3b": dict(field="saddle(1,2)", tau=10.0, grid=_DEFAULT_GRID),
    "fig3c": dict(field="saddle(2,1)", tau=10.0, grid=_DEFAULT_GRID),
    "fig3d": dict(field="saddle(2,1)", tau=10.0, grid=_DEFAULT_GRID),
}

_METHOD_NAMES = {"rk4": "rk4-fixed", "rk45": "rk45-adaptive"}


@dataclass
class RunConfig:
    field_spec: Optional[str]
    dx: Optional[str]
    dy: Optional[str]
    grid: GridSpec
    t0: float
    tau: float
    method: str
    step: Optional[float]
    rtol: float
    atol: float
    quantile: float
    out_m: Optional[str]
    out_dx: Optional[str]
    out_dy: Optional[str]
    out_mask: Optional[str]
    pgm: Optional[str]
    oracle: Optional[tuple]
    preset: Optional[str]


def _parse_grid(text: str) -> GridSpec:
    try:
        xpart, ypart = text.split(",")
        xmin, xmax, nx = xpart.split(":")
        ymin, ymax, ny = ypart.split(":")
        return GridSpec(xmin=float(xmin), xmax=float(xmax),
                        ymin=float(ymin), ymax=float(ymax),
                        nx=int(nx), ny=int(ny))
    except ValueError as exc:
        raise ValueError(
            f"malformed grid {text!r}; expected XMIN:XMAX:NX,YMIN:YMAX:NY ({exc})"
        ) from None


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ldesc",
        description="Compute trajectory-arclength descriptor fields for planar "
                    "vector fields and locate invariant manifolds as sign "
                    "changes of the field's partial derivatives.")
    p.add_argument("--preset", choices=sorted(PRESETS),
                   help="benchmark parameter set; explicit flags override its entries")
    p.add_argument("--field", dest="field_spec", metavar="SPEC",
                   help="saddle(L,M) | separable(EXPR) | custom")
    p.add_argument("--dx", metavar="EXPR", help="x-component expression (custom field)")
    p.add_argument("--dy", metavar="EXPR", help="y-component expression (custom field)")
    p.add_argument("--grid", metavar="XMIN:XMAX:NX,YMIN:YMAX:NY",
                   help=f"initial-condition grid (default {_DEFAULT_GRID})")
    p.add_argument("--t0", type=float, default=None, metavar="R",
                   help="center of the time interval (default 0)")
    p.add_argument("--tau", type=float, default=None, metavar="R",
                   help="half-width of the time interval")
    p.add_argument("--method", choices=sorted(_METHOD_NAMES), default=None,
                   help="integrator (default rk4)")
    p.add_argument("--step", type=float, default=None, metavar="R",
                   help="fixed step size (default tau/4000)")
    p.add_argument("--rtol", type=float, default=None, metavar="R",
                   help="adaptive relative tolerance (default 1e-8)")
    p.add_argument("--atol", type=float, default=None, metavar="R",
                   help="adaptive absolute tolerance (default 1e-10)")
    p.add_argument("--quantile", type=float, default=None, metavar="Q",
                   help="drop crossings with jump below this quantile (default 0)")
    p.add_argument("--out-m", metavar="PATH", help="write the descriptor field CSV")
    p.add_argument("--out-dx", metavar="PATH", help="write the dM/dx0 field CSV")
    p.add_argument("--out-dy", metavar="PATH", help="write the dM/dy0 field CSV")
    p.add_argument("--out-mask", metavar="PATH", help="write the crossing CSV")
    p.add_argument("--pgm", metavar="PATH", help="write the descriptor field as binary PGM")
    p.add_argument("--oracle", metavar="X,Y",
                   help="print the quadrature oracle value at one point "
                        "(linear saddle fields only) and exit")
    return p


def _merge_value_flags(argv):
    # argparse refuses option values that start with '-'; grid bounds,
    # oracle points and expressions routinely do, so fold them into
    # --flag=value form
    merged = []
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg in ("--grid", "--oracle", "--dx", "--dy") and i + 1 < len(argv):
            merged.append(arg + "=" + argv[i + 1])
            i += 2
        else:
            merged.append(arg)
            i += 1
    return merged


def parse_args(argv) -> RunConfig:
    """Resolve flags and preset into a validated RunConfig.

    Raises SystemExit(2) on usage errors, like argparse does.
    """
    parser = _build_parser()
    ns = parser.parse_args(_merge_value_flags(list(argv)))

    preset = PRESETS.get(ns.preset, {})
    field_spec = ns.field_spec if ns.field_spec is not None else preset.get("field")
    tau = ns.tau if ns.tau is not None else preset.get("tau")
    grid_text = ns.grid if ns.grid is not None else preset.get("grid", _DEFAULT_GRID)

    if field_spec is None and (ns.dx is not None or ns.dy is not None):
        field_spec = "custom"
    if field_spec is None:
        parser.error("a field is required: --preset, --field, or --dx/--dy")
    if tau is None:
        parser.error("--tau is required (or provided by a preset)")
    if not tau >= 0.0:
        parser.error(f"--tau must be non-negative, got {tau}")

    try:
        grid = _parse_grid(grid_text)
    except ValueError as exc:
        parser.error(str(exc))
    if grid.nx < 3 or grid.ny < 3:
        parser.error("grids smaller than 3x3 cannot carry derivative fields")

    quantile = ns.quantile if ns.quantile is not None else 0.0
    if not 0.0 <= quantile < 1.0:
        parser.error(f"--quantile must be in [0, 1), got {quantile}")

    oracle = None
    if ns.oracle is not None:
        try:
            ox, oy = ns.oracle.split(",")
            oracle = (float(ox), float(oy))
        except ValueError:
            parser.error(f"malformed --oracle point {ns.oracle!r}; expected X,Y")

    return RunConfig(
        field_spec=field_spec,
        dx=ns.dx,
        dy=ns.dy,
        grid=grid,
        t0=ns.t0 if ns.t0 is not None else 0.0,
        tau=float(tau),
        method=_METHOD_NAMES[ns.method] if ns.method else "rk4-fixed",
        step=ns.step,
        rtol=ns.rtol if ns.rtol is not None else 1e-8,
        atol=ns.atol if ns.atol is not None else 1e-10,
        quantile=quantile,
        out_m=ns.out_m,
        out_dx=ns.out_dx,
        out_dy=ns.out_dy,
        out_mask=ns.out_mask,
        pgm=ns.pgm,
        oracle=oracle,
        preset=ns.preset,
    )


def _write(path: str, payload: bytes):
    with open(path, "wb") as handle:
        handle.write(payload)


def run(config: RunConfig) -> int:
    """Execute one computation; returns the process exit code."""
    err = sys.stderr
    try:
        field = fields.from_spec(config.field_spec, config.dx, config.dy)
    except ParseError as exc:
        print(f"ldesc: expression error: {exc}", file=err)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"ldesc: {exc}", file=err)
        return EXIT_USAGE

    if config.oracle is not None:
        if field.kind != "saddle":
            print("ldesc: --oracle requires a saddle(L,M) field", file=err)
            return EXIT_USAGE
        flow = AnalyticSaddleFlow(field.saddle.lam, field.saddle.mu)
        print(f"{oracle_m(flow, config.oracle, config.tau):.17g}")
        return EXIT_OK

    try:
        cfg = IntegratorConfig(method=config.method, step=config.step,
                               rtol=config.rtol, atol=config.atol)
    except ValueError as exc:
        print(f"ldesc: {exc}", file=err)
        return EXIT_USAGE

    started = time.perf_counter()
    m_field = compute_field(field, config.grid, config.t0, config.tau, cfg)
    n_valid = int(m_field.valid.sum())
    if n_valid == 0:
        print("ldesc: no grid node produced a finite trajectory; "
              "nothing to analyze", file=err)
        return EXIT_NO_VALID
    dmdx = analyze.partial_derivative(m_field, "x")
    dmdy = analyze.partial_derivative(m_field, "y")
    mask = analyze.detect_manifolds(dmdx, dmdy, config.quantile)
    wall = time.perf_counter() - started

    try:
        if config.out_m:
            _write(config.out_m, field_io.write_csv(m_field))
        if config.out_dx:
            _write(config.out_dx, field_io.write_csv(dmdx.field))
        if config.out_dy:
            _write(config.out_dy, field_io.write_csv(dmdy.field))
        if config.out_mask:
            _write(config.out_mask, field_io.write_mask_csv(mask))
        if config.pgm:
            _write(config.pgm, field_io.write_pgm(m_field))
    except OSError as exc:
        print(f"ldesc: cannot write output: {exc}", file=err)
        return EXIT_IO

    grid = config.grid
    pct = 100.0 * n_valid / grid.size
    print(f"field {field.name}  grid {grid.nx}x{grid.ny}  tau {config.tau:g}  "
          f"method {cfg.method}")
    print(f"valid {pct:.2f}%  x-crossings {len(mask.x_crossings)}  "
          f"y-crossings {len(mask.y_crossings)}  wall {wall:.2f}s")
    return EXIT_OK


def main(argv=None) -> int:
    code = run(parse_args(sys.argv[1:] if argv is None else argv))
    sys.exit(code)
