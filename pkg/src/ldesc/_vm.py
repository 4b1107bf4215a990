"""Flat postfix programs compiled from expression ASTs.

The integration kernels cannot walk Python AST objects in their inner loop,
so vector-field components are compiled once into parallel opcode/argument
arrays executed by a tiny stack machine.  Three interpreters exist: a C one
in ``_kernels.pyx``, and the scalar/array ones here used by the pure-Python
backend.  The opcode numbering is shared with the C enum (checked by a
test against ``_kernels.OPCODES``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as _expr

OP_CONST = 0
OP_X = 1
OP_Y = 2
OP_T = 3
OP_NEG = 4
OP_ADD = 5
OP_SUB = 6
OP_MUL = 7
OP_DIV = 8
OP_POW = 9
OP_SIN = 10
OP_COS = 11
OP_TAN = 12
OP_TANH = 13
OP_EXP = 14
OP_LOG = 15
OP_SQRT = 16
OP_ABS = 17
OP_SIGN = 18
OP_SQR = 19

OPCODES = {
    "const": OP_CONST, "x": OP_X, "y": OP_Y, "t": OP_T,
    "neg": OP_NEG, "add": OP_ADD, "sub": OP_SUB, "mul": OP_MUL,
    "div": OP_DIV, "pow": OP_POW, "sin": OP_SIN, "cos": OP_COS,
    "tan": OP_TAN, "tanh": OP_TANH, "exp": OP_EXP, "log": OP_LOG,
    "sqrt": OP_SQRT, "abs": OP_ABS, "sign": OP_SIGN, "sqr": OP_SQR,
}

_UNARY_OPS = {
    "neg": OP_NEG, "sin": OP_SIN, "cos": OP_COS, "tan": OP_TAN,
    "tanh": OP_TANH, "exp": OP_EXP, "log": OP_LOG, "sqrt": OP_SQRT,
    "abs": OP_ABS, "sign": OP_SIGN,
}
_BINARY_OPS = {
    "add": OP_ADD, "sub": OP_SUB, "mul": OP_MUL, "div": OP_DIV, "pow": OP_POW,
}
_VAR_OPS = {"x": OP_X, "y": OP_Y, "t": OP_T}

# operand-stack slots reserved by the C interpreter
KERNEL_STACK_LIMIT = 128


@dataclass(frozen=True)
class Program:
    ops: np.ndarray     # int32, one opcode per instruction
    args: np.ndarray    # int32, constant-pool index for OP_CONST, else 0
    consts: np.ndarray  # float64 constant pool
    max_stack: int


def compile_ast(ast) -> Program:
    """Flatten an AST into a postfix Program."""
    ops, args, consts = [], [], []

    def emit(node):
        if isinstance(node, _expr.Const):
            ops.append(OP_CONST)
            args.append(len(consts))
            consts.append(node.value)
        elif isinstance(node, _expr.Var):
            ops.append(_VAR_OPS[node.name])
            args.append(0)
        elif isinstance(node, _expr.Unary):
            emit(node.arg)
            ops.append(_UNARY_OPS[node.op])
            args.append(0)
        elif (node.op == "pow" and isinstance(node.rhs, _expr.Const)
                and node.rhs.value == 2.0):
            # squaring via pow costs a libm call; multiply instead
            emit(node.lhs)
            ops.append(OP_SQR)
            args.append(0)
        else:
            emit(node.lhs)
            emit(node.rhs)
            ops.append(_BINARY_OPS[node.op])
            args.append(0)

    emit(ast)

    depth = max_depth = 0
    for op in ops:
        if op in (OP_CONST, OP_X, OP_Y, OP_T):
            depth += 1
        elif op in (OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW):
            depth -= 1
        max_depth = max(max_depth, depth)
    if max_depth > KERNEL_STACK_LIMIT:
        raise ValueError(
            f"expression nests too deeply for the evaluation stack "
            f"({max_depth} > {KERNEL_STACK_LIMIT})"
        )
    return Program(
        ops=np.asarray(ops, dtype=np.int32),
        args=np.asarray(args, dtype=np.int32),
        consts=np.asarray(consts if consts else [0.0], dtype=np.float64),
        max_stack=max_depth,
    )


def eval_scalar(program: Program, x: float, y: float, t: float) -> float:
    """Scalar stack-machine evaluation (libm semantics, never raises)."""
    stack = []
    push = stack.append
    ops = program.ops
    args = program.args
    consts = program.consts
    for i in range(len(ops)):
        op = ops[i]
        if op == OP_CONST:
            push(consts[args[i]])
        elif op == OP_X:
            push(x)
        elif op == OP_Y:
            push(y)
        elif op == OP_T:
            push(t)
        elif op == OP_NEG:
            stack[-1] = -stack[-1]
        elif op == OP_ADD:
            b = stack.pop()
            stack[-1] = stack[-1] + b
        elif op == OP_SUB:
            b = stack.pop()
            stack[-1] = stack[-1] - b
        elif op == OP_MUL:
            b = stack.pop()
            stack[-1] = stack[-1] * b
        elif op == OP_DIV:
            b = stack.pop()
            stack[-1] = _expr.ieee_div(stack[-1], b)
        elif op == OP_POW:
            b = stack.pop()
            stack[-1] = _expr.ieee_pow(stack[-1], b)
        elif op == OP_SIN:
            stack[-1] = math.sin(stack[-1])
        elif op == OP_COS:
            stack[-1] = math.cos(stack[-1])
        elif op == OP_TAN:
            stack[-1] = math.tan(stack[-1])
        elif op == OP_TANH:
            stack[-1] = math.tanh(stack[-1])
        elif op == OP_EXP:
            stack[-1] = _expr.ieee_exp(stack[-1])
        elif op == OP_LOG:
            stack[-1] = _expr.ieee_log(stack[-1])
        elif op == OP_SQRT:
            stack[-1] = _expr.ieee_sqrt(stack[-1])
        elif op == OP_ABS:
            stack[-1] = abs(stack[-1])
        elif op == OP_SIGN:
            stack[-1] = _expr.ieee_sign(stack[-1])
        else:  # OP_SQR
            b = stack[-1]
            stack[-1] = b * b
    return stack[0]


def eval_array(program: Program, x, y, t):
    """Vectorized evaluation; x and y are float64 arrays, t a scalar.

    Returns an array shaped like x.  Domain violations yield inf/NaN
    entries silently.
    """
    ops = program.ops
    args = program.args
    consts = program.consts
    stack = []
    push = stack.append
    with np.errstate(all="ignore"):
        for i in range(len(ops)):
            op = ops[i]
            if op == OP_CONST:
                push(consts[args[i]])
            elif op == OP_X:
                push(x)
            elif op == OP_Y:
                push(y)
            elif op == OP_T:
                push(t)
            elif op == OP_NEG:
                stack[-1] = np.negative(stack[-1])
            elif op == OP_ADD:
                b = stack.pop()
                stack[-1] = np.add(stack[-1], b)
            elif op == OP_SUB:
                b = stack.pop()
                stack[-1] = np.subtract(stack[-1], b)
            elif op == OP_MUL:
                b = stack.pop()
                stack[-1] = np.multiply(stack[-1], b)
            elif op == OP_DIV:
                b = stack.pop()
                stack[-1] = np.divide(stack[-1], b)
            elif op == OP_POW:
                b = stack.pop()
                stack[-1] = np.power(stack[-1], b)
            elif op == OP_SIN:
                stack[-1] = np.sin(stack[-1])
            elif op == OP_COS:
                stack[-1] = np.cos(stack[-1])
            elif op == OP_TAN:
                stack[-1] = np.tan(stack[-1])
            elif op == OP_TANH:
                stack[-1] = np.tanh(stack[-1])
            elif op == OP_EXP:
                stack[-1] = np.exp(stack[-1])
            elif op == OP_LOG:
                stack[-1] = np.log(stack[-1])
            elif op == OP_SQRT:
                stack[-1] = np.sqrt(stack[-1])
            elif op == OP_ABS:
                stack[-1] = np.abs(stack[-1])
            elif op == OP_SIGN:
                stack[-1] = np.sign(stack[-1])
            else:  # OP_SQR
                b = stack[-1]
                stack[-1] = np.multiply(b, b)
        result = stack[0]
    if np.isscalar(result) or result.shape != np.shape(x):
        result = np.broadcast_to(np.float64(result), np.shape(x)).copy()
    return result
