"""Arithmetic expressions over the phase-space variables x, y and time t.

Expressions define vector-field components and are the wire format used on
the command line.  Grammar (EBNF, also documented in the README):

    expression = term { ("+" | "-") term } ;
    term       = unary { ("*" | "/") unary } ;
    unary      = ("+" | "-") unary | power ;
    power      = atom [ "^" unary ] ;
    atom       = number | variable | function "(" expression ")"
               | "(" expression ")" ;
    variable   = "x" | "y" | "t" ;
    function   = "sin" | "cos" | "tan" | "tanh" | "exp" | "log" | "sqrt"
               | "abs" | "sign" ;

"^" binds tighter than unary minus and associates to the right; "+", "-",
"*", "/" associate to the left.  Numbers are double-precision decimal
literals (scientific notation allowed).

Evaluation never raises: domain violations (division by zero, log of a
non-positive number, ...) produce IEEE infinities or NaNs that propagate to
the caller.

``sign`` exists mainly so that ``differentiate`` can express the derivative
of ``abs``; by convention sign(0) = 0, which makes d|u|/du equal 0 at the
kink.  The derivative of ``sign`` itself is taken to be 0 everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

__all__ = [
    "Const",
    "Var",
    "Unary",
    "Binary",
    "ExprAst",
    "ParseError",
    "parse",
    "evaluate",
    "differentiate",
    "pretty_print",
    "constant_fold",
    "variables_used",
    "FUNCTIONS",
    "VARIABLES",
]

FUNCTIONS = ("sin", "cos", "tan", "tanh", "exp", "log", "sqrt", "abs", "sign")
VARIABLES = ("x", "y", "t")

_BINARY_OPS = ("add", "sub", "mul", "div", "pow")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # one of VARIABLES


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a FUNCTIONS entry
    arg: "ExprAst"


@dataclass(frozen=True)
class Binary:
    op: str  # one of _BINARY_OPS
    lhs: "ExprAst"
    rhs: "ExprAst"


ExprAst = Union[Const, Var, Unary, Binary]


class ParseError(ValueError):
    """Expression source text that cannot be parsed.

    Carries the byte offset of the offending token and the token text
    itself (empty at end of input).
    """

    def __init__(self, message: str, offset: int, token: str = ""):
        detail = f"{message} at offset {offset}"
        if token:
            detail += f" (near {token!r})"
        super().__init__(detail)
        self.message = message
        self.offset = offset
        self.token = token


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_OPERATOR_CHARS = "+-*/^(),"


def _tokenize(source):
    """Yield (kind, text, offset) triples; kinds: num, ident, op, end."""
    tokens = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPERATOR_CHARS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            start = i
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if source[start:i] == ".":
                raise ParseError("malformed number", start, source[start:i + 1])
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j >= n or not source[j].isdigit():
                    raise ParseError("malformed number", start, source[start:min(j + 1, n)])
                i = j
                while i < n and source[i].isdigit():
                    i += 1
            tokens.append(("num", source[start:i], start))
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(("ident", source[start:i], start))
            continue
        raise ParseError("unexpected character", i, c)
    tokens.append(("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# parser (recursive descent)
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, source):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message):
        kind, text, offset = self.peek()
        raise ParseError(message, offset, text)

    def expect_op(self, char, message):
        kind, text, offset = self.peek()
        if kind != "op" or text != char:
            self.fail(message)
        return self.advance()

    def expression(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.term()
                node = Binary("add" if text == "+" else "sub", node, rhs)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                rhs = self.unary()
                node = Binary("mul" if text == "*" else "div", node, rhs)
            else:
                return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text in "+-":
            self.advance()
            arg = self.unary()
            if text == "+":
                return arg
            # fold a minus applied directly to a literal so that printed
            # negative constants round-trip to a single Const node
            if isinstance(arg, Const):
                return Const(-arg.value)
            return Unary("neg", arg)
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            exponent = self.unary()  # right-associative, allows x^-2
            return Binary("pow", base, exponent)
        return base

    def atom(self):
        kind, text, offset = self.advance()
        if kind == "num":
            try:
                value = float(text)
            except ValueError:
                raise ParseError("malformed number", offset, text) from None
            if not math.isfinite(value):
                raise ParseError("number overflows double precision", offset, text)
            return Const(value)
        if kind == "ident":
            if text in VARIABLES:
                return Var(text)
            if text in FUNCTIONS:
                self.expect_op("(", f"expected '(' after function {text!r}")
                arg = self.expression()
                self.expect_op(")", "unbalanced parentheses")
                return Unary(text, arg)
            raise ParseError("unknown identifier", offset, text)
        if kind == "op" and text == "(":
            node = self.expression()
            self.expect_op(")", "unbalanced parentheses")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", offset, text)
        raise ParseError("unexpected token", offset, text)


def parse(source: str) -> ExprAst:
    """Parse expression source text into an AST.

    Raises ParseError (with byte offset and offending token) on unknown
    identifiers, unbalanced parentheses, malformed numbers or empty input.
    """
    parser = _Parser(source)
    if parser.peek()[0] == "end":
        raise ParseError("empty input", 0)
    node = parser.expression()
    kind, text, offset = parser.peek()
    if kind != "end":
        raise ParseError("trailing input", offset, text)
    return node


# ---------------------------------------------------------------------------
# evaluation with IEEE semantics (never raises)
# ---------------------------------------------------------------------------


def _is_odd_integer(b):
    return math.isfinite(b) and b == math.floor(b) and abs(b) < 2.0**53 and int(b) % 2 != 0


def ieee_div(a, b):
    if b == 0.0:
        if a == 0.0 or a != a:
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def ieee_pow(a, b):
    # math.pow raises where C99 pow returns an infinity or NaN; translate.
    try:
        return math.pow(a, b)
    except OverflowError:
        if a < 0.0 and _is_odd_integer(b):
            return -math.inf
        return math.inf
    except ValueError:
        if a == 0.0 and b < 0.0:
            if math.copysign(1.0, a) < 0.0 and _is_odd_integer(b):
                return -math.inf
            return math.inf
        return math.nan


def ieee_log(a):
    if a > 0.0:
        return math.log(a)
    if a == 0.0:
        return -math.inf
    return math.nan  # negative or NaN


def ieee_sqrt(a):
    if a >= 0.0:
        return math.sqrt(a)
    if a != a:
        return a
    return math.nan


def ieee_exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


def ieee_sign(a):
    if a > 0.0:
        return 1.0
    if a < 0.0:
        return -1.0
    if a != a:
        return a
    return 0.0


_UNARY_EVAL = {
    "neg": lambda v: -v,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "tanh": math.tanh,
    "exp": ieee_exp,
    "log": ieee_log,
    "sqrt": ieee_sqrt,
    "abs": abs,
    "sign": ieee_sign,
}

_BINARY_EVAL = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": ieee_div,
    "pow": ieee_pow,
}


def evaluate(ast: ExprAst, x: float, y: float, t: float) -> float:
    """Evaluate an AST at (x, y, t); non-finite results propagate."""
    if isinstance(ast, Const):
        return ast.value
    if isinstance(ast, Var):
        if ast.name == "x":
            return x
        if ast.name == "y":
            return y
        return t
    if isinstance(ast, Unary):
        return _UNARY_EVAL[ast.op](evaluate(ast.arg, x, y, t))
    return _BINARY_EVAL[ast.op](evaluate(ast.lhs, x, y, t), evaluate(ast.rhs, x, y, t))


def variables_used(ast: ExprAst) -> set:
    """Set of variable names appearing in the AST."""
    if isinstance(ast, Var):
        return {ast.name}
    if isinstance(ast, Unary):
        return variables_used(ast.arg)
    if isinstance(ast, Binary):
        return variables_used(ast.lhs) | variables_used(ast.rhs)
    return set()


# ---------------------------------------------------------------------------
# constant folding and symbolic differentiation
# ---------------------------------------------------------------------------


def constant_fold(ast: ExprAst) -> ExprAst:
    """Collapse subtrees whose leaves are all literals.

    A subtree is folded only when its value is finite, preserving the
    invariant that Const nodes hold finite reals (so e.g. 1/0 stays an
    expression).
    """
    if isinstance(ast, (Const, Var)):
        return ast
    if isinstance(ast, Unary):
        arg = constant_fold(ast.arg)
        if isinstance(arg, Const):
            value = _UNARY_EVAL[ast.op](arg.value)
            if math.isfinite(value):
                return Const(value)
        return Unary(ast.op, arg)
    lhs = constant_fold(ast.lhs)
    rhs = constant_fold(ast.rhs)
    if isinstance(lhs, Const) and isinstance(rhs, Const):
        value = _BINARY_EVAL[ast.op](lhs.value, rhs.value)
        if math.isfinite(value):
            return Const(value)
    return Binary(ast.op, lhs, rhs)


_ZERO = Const(0.0)
_ONE = Const(1.0)


def _is_const(node, value):
    return isinstance(node, Const) and node.value == value


def _add(a, b):
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Binary("add", a, b)


def _sub(a, b):
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return Unary("neg", b)
    return Binary("sub", a, b)


def _mul(a, b):
    # dropping a 0-factor changes values only where the other factor is
    # non-finite, which is acceptable for derivative trees
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Binary("mul", a, b)


def _div(a, b):
    if _is_const(a, 0.0):
        return _ZERO
    if _is_const(b, 1.0):
        return a
    return Binary("div", a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    return Unary("neg", a)


def _pow_node(a, b):
    if _is_const(b, 1.0):
        return a
    return Binary("pow", a, b)


def _derivative(ast, var):
    if isinstance(ast, Const):
        return _ZERO
    if isinstance(ast, Var):
        return _ONE if ast.name == var else _ZERO
    if isinstance(ast, Unary):
        u = ast.arg
        du = _derivative(u, var)
        op = ast.op
        if op == "neg":
            return _neg(du)
        if op == "sin":
            return _mul(Unary("cos", u), du)
        if op == "cos":
            return _neg(_mul(Unary("sin", u), du))
        if op == "tan":
            return _div(du, Binary("pow", Unary("cos", u), Const(2.0)))
        if op == "tanh":
            return _mul(_sub(_ONE, Binary("pow", Unary("tanh", u), Const(2.0))), du)
        if op == "exp":
            return _mul(Unary("exp", u), du)
        if op == "log":
            return _div(du, u)
        if op == "sqrt":
            return _div(du, _mul(Const(2.0), Unary("sqrt", u)))
        if op == "abs":
            return _mul(Unary("sign", u), du)
        if op == "sign":
            return _ZERO  # piecewise constant; the jump at 0 is ignored
        raise ValueError(f"unknown unary op {op!r}")
    u, v = ast.lhs, ast.rhs
    du = _derivative(u, var)
    dv = _derivative(v, var)
    op = ast.op
    if op == "add":
        return _add(du, dv)
    if op == "sub":
        return _sub(du, dv)
    if op == "mul":
        return _add(_mul(du, v), _mul(u, dv))
    if op == "div":
        return _div(_sub(_mul(du, v), _mul(u, dv)), Binary("pow", v, Const(2.0)))
    if op == "pow":
        if isinstance(v, Const):
            # power rule; keeps negative bases valid (e.g. d/dx x^2 at x<0)
            return _mul(_mul(v, _pow_node(u, Const(v.value - 1.0))), du)
        # u^v = exp(v log u); valid on u > 0 like the expression itself
        term = _add(_mul(dv, Unary("log", u)), _mul(v, _div(du, u)))
        return _mul(Binary("pow", u, v), term)
    raise ValueError(f"unknown binary op {op!r}")


def differentiate(ast: ExprAst, var: str) -> ExprAst:
    """Symbolic derivative with respect to one of x, y, t.

    The result is constant-folded but not otherwise simplified; correctness
    is checked by evaluation, not by shape.
    """
    if var not in VARIABLES:
        raise ValueError(f"variable must be one of {VARIABLES}, got {var!r}")
    return constant_fold(_derivative(ast, var))


# ---------------------------------------------------------------------------
# pretty printer
# ---------------------------------------------------------------------------

# precedence levels used for parenthesization
_LEVEL_ADD = 1
_LEVEL_MUL = 2
_LEVEL_NEG = 3
_LEVEL_POW = 4
_LEVEL_ATOM = 5


def _level(node):
    if isinstance(node, Const):
        # negative literals print with a leading '-', so they bind like neg
        return _LEVEL_NEG if math.copysign(1.0, node.value) < 0 else _LEVEL_ATOM
    if isinstance(node, Var):
        return _LEVEL_ATOM
    if isinstance(node, Unary):
        return _LEVEL_NEG if node.op == "neg" else _LEVEL_ATOM
    return {"add": _LEVEL_ADD, "sub": _LEVEL_ADD,
            "mul": _LEVEL_MUL, "div": _LEVEL_MUL,
            "pow": _LEVEL_POW}[node.op]


def _print_node(node, min_level):
    text = _render(node)
    if _level(node) < min_level:
        return f"({text})"
    return text


def _render(node):
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return "-" + _print_node(node.arg, _LEVEL_NEG)
        return f"{node.op}({_render(node.arg)})"
    op = node.op
    if op in ("add", "sub"):
        sym = " + " if op == "add" else " - "
        return _print_node(node.lhs, _LEVEL_ADD) + sym + _print_node(node.rhs, _LEVEL_MUL)
    if op in ("mul", "div"):
        sym = "*" if op == "mul" else "/"
        return _print_node(node.lhs, _LEVEL_MUL) + sym + _print_node(node.rhs, _LEVEL_NEG)
    # pow: base must be an atom, exponent may be any unary expression
    return _print_node(node.lhs, _LEVEL_ATOM) + "^" + _print_node(node.rhs, _LEVEL_NEG)


def pretty_print(ast: ExprAst) -> str:
    """Render an AST as source text.

    The output reparses to an AST structurally identical to the
    constant-folded input (folding happens before printing so that literal
    subexpressions like 2^3 print as a single number).
    """
    return _render(constant_fold(ast))
