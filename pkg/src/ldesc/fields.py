"""Planar vector fields: the saddle benchmark family and expression-defined fields.

A VectorFieldDef packages the right-hand side of dx/dt = v(x, t) together
with a pre-compiled program for the integration kernels.  The built-in
saddle carries closed-form parameters so the hot loop never touches an
expression tree; expression-backed fields go through the stack machine.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np

from . import _vm
from . import expr as _expr
from ._backend import KIND_EXPR, KIND_SADDLE

__all__ = [
    "SaddleParams",
    "VectorFieldDef",
    "linear_saddle",
    "separable_incompressible",
    "from_expressions",
    "from_spec",
]

_DUMMY_OPS = np.zeros(1, dtype=np.int32)
_DUMMY_CONSTS = np.zeros(1, dtype=np.float64)


@dataclass(frozen=True)
class SaddleParams:
    """Expansion rate lam (along x) and contraction rate mu (along y), both 1/time."""

    lam: float
    mu: float

    def __post_init__(self):
        if not (self.lam > 0.0 and np.isfinite(self.lam)):
            raise ValueError(f"expansion rate must be positive, got {self.lam}")
        if not (self.mu > 0.0 and np.isfinite(self.mu)):
            raise ValueError(f"contraction rate must be positive, got {self.mu}")


@dataclass(frozen=True, eq=False)
class VectorFieldDef:
    """Immutable definition of a planar vector field v(x, y, t).

    kind is "saddle" (closed form) or "expression"; expression fields hold
    the component ASTs plus their compiled programs.
    """

    name: str
    kind: str
    saddle: Optional[SaddleParams] = None
    dx_ast: Optional[_expr.ExprAst] = None
    dy_ast: Optional[_expr.ExprAst] = None
    autonomous: bool = True
    _prog_dx: Optional[_vm.Program] = dataclass_field(default=None, repr=False)
    _prog_dy: Optional[_vm.Program] = dataclass_field(default=None, repr=False)

    def eval_at(self, x: float, y: float, t: float = 0.0):
        """Field value (vx, vy) at one phase-space point."""
        if self.kind == "saddle":
            return self.saddle.lam * x, -(self.saddle.mu * y)
        return (_expr.evaluate(self.dx_ast, x, y, t),
                _expr.evaluate(self.dy_ast, x, y, t))

    def kernel_args(self):
        """(kind, p0, p1, ops/args/consts for both components) for the kernels."""
        if self.kind == "saddle":
            return (KIND_SADDLE, self.saddle.lam, self.saddle.mu,
                    _DUMMY_OPS, _DUMMY_OPS, _DUMMY_CONSTS,
                    _DUMMY_OPS, _DUMMY_OPS, _DUMMY_CONSTS)
        return (KIND_EXPR, 0.0, 0.0,
                self._prog_dx.ops, self._prog_dx.args, self._prog_dx.consts,
                self._prog_dy.ops, self._prog_dy.args, self._prog_dy.consts)


def linear_saddle(params: SaddleParams) -> VectorFieldDef:
    """The saddle dx/dt = lam*x, dy/dt = -mu*y.

    The origin is a hyperbolic fixed point; the y-axis is its stable
    manifold and the x-axis its unstable manifold.
    """
    return VectorFieldDef(
        name=f"saddle({params.lam:g},{params.mu:g})",
        kind="saddle",
        saddle=params,
    )


def _expression_field(name, dx_ast, dy_ast):
    used = _expr.variables_used(dx_ast) | _expr.variables_used(dy_ast)
    return VectorFieldDef(
        name=name,
        kind="expression",
        dx_ast=dx_ast,
        dy_ast=dy_ast,
        autonomous="t" not in used,
        _prog_dx=_vm.compile_ast(dx_ast),
        _prog_dy=_vm.compile_ast(dy_ast),
    )


def separable_incompressible(f: _expr.ExprAst) -> VectorFieldDef:
    """Field dx/dt = f(x), dy/dt = -y * f'(x), divergence-free by construction.

    f must reference x only; f' is obtained symbolically.
    """
    used = _expr.variables_used(f)
    if not used <= {"x"}:
        raise ValueError(
            f"separable field requires f = f(x); found variables {sorted(used - {'x'})}"
        )
    fprime = _expr.differentiate(f, "x")
    dy_ast = _expr.Unary("neg", _expr.Binary("mul", _expr.Var("y"), fprime))
    return _expression_field(f"separable({_expr.pretty_print(f)})", f, dy_ast)


def from_expressions(dx: _expr.ExprAst, dy: _expr.ExprAst) -> VectorFieldDef:
    """General field with both components given as expressions in x, y, t."""
    return _expression_field("custom", dx, dy)


def from_spec(text: str, dx_source: Optional[str] = None,
              dy_source: Optional[str] = None) -> VectorFieldDef:
    """Build a field from a registry string.

    Accepted forms: ``saddle(LAM,MU)``, ``separable(F-EXPR)``,
    ``custom(DX-EXPR,DY-EXPR)``, or bare ``custom`` with the components
    supplied separately (the CLI's --dx/--dy flags).
    """
    spec = text.strip()
    if spec == "custom":
        if dx_source is None or dy_source is None:
            raise ValueError("field 'custom' needs --dx and --dy expressions")
        return from_expressions(_expr.parse(dx_source), _expr.parse(dy_source))
    head, sep, rest = spec.partition("(")
    head = head.strip()
    if not sep or not rest.endswith(")"):
        raise ValueError(f"malformed field spec {text!r}; "
                         "expected saddle(L,M), separable(EXPR) or custom")
    body = rest[:-1]
    if head == "saddle":
        parts = body.split(",")
        if len(parts) != 2:
            raise ValueError(f"saddle takes two rates, got {body!r}")
        try:
            lam, mu = float(parts[0]), float(parts[1])
        except ValueError:
            raise ValueError(f"saddle rates must be numbers, got {body!r}") from None
        return linear_saddle(SaddleParams(lam, mu))
    if head == "separable":
        return separable_incompressible(_expr.parse(body))
    if head == "custom":
        # the grammar has no commas except argument separators, so a plain
        # split is unambiguous
        parts = body.split(",")
        if len(parts) != 2:
            raise ValueError(f"custom takes two component expressions, got {body!r}")
        return from_expressions(_expr.parse(parts[0]), _expr.parse(parts[1]))
    raise ValueError(f"unknown field {head!r}; expected saddle, separable or custom")
