"""Built-in library of example walks, addressable as ``@name`` or ``@name(args)``."""

from __future__ import annotations

import ast
import math
import operator
import re
from typing import Callable

import numpy as np

from .errors import SchemaError
from .symbol import LaurentPoly, WalkDefinition, make_walk

P = LaurentPoly.from_pairs


def _b(a: float) -> float:
    if not 0.0 <= a <= 1.0:
        raise SchemaError(f"coin parameter a={a} must lie in [0, 1]")
    return math.sqrt(1.0 - a * a)


def coin(a: float = 0.6) -> WalkDefinition:
    """[[aS, -bS], [b, a]]: one chirality moves, the other stays."""
    b = _b(a)
    return make_walk([[{1: a}, {1: -b}], [{0: b}, {0: a}]], name=f"coin({a:g})")


def coin_decomposable(a: float = 0.6) -> WalkDefinition:
    """[[aS^-1, -bS^-1], [bS, aS]]; splits into two 2pi-periodic model walks."""
    b = _b(a)
    return make_walk(
        [[{-1: a}, {-1: -b}], [{1: b}, {1: a}]], name=f"coin-decomposable({a:g})"
    )


def coin_realizable(a: float = 0.6) -> WalkDefinition:
    """[[aS^-1, bS^-1], [bS, -aS]]; reflection coin, both windings vanish."""
    b = _b(a)
    return make_walk(
        [[{-1: a}, {-1: b}], [{1: b}, {1: -a}]], name=f"coin-realizable({a:g})"
    )


def _diag_times(shifts, coin_matrix, scale, d=1, name="walk") -> WalkDefinition:
    n = len(shifts)
    entries = [
        [P([(shifts[i], scale * coin_matrix[i][j])]) for j in range(n)] for i in range(n)
    ]
    return make_walk(entries, d=d, name=name)


def _grover_coin(n: int) -> np.ndarray:
    # sign convention of the worked examples: +1 on the diagonal for n = 4
    if n == 3:
        return np.array([[1, -2, -2], [-2, 1, -2], [-2, -2, 1]], dtype=float)
    return np.where(np.eye(n, dtype=bool), 1.0, -1.0)


def grover3() -> WalkDefinition:
    return _diag_times([(-1,), (0,), (1,)], _grover_coin(3), 1 / 3, name="grover3")


def grover4() -> WalkDefinition:
    return _diag_times([(-3,), (-1,), (1,), (3,)], _grover_coin(4), 1 / 2, name="grover4")


def cube() -> WalkDefinition:
    return make_walk([[0, {1: 1}, 0], [0, 0, {1: 1}], [1, 0, 0]], name="cube")


def shift() -> WalkDefinition:
    return make_walk([[{1: 1}]], name="shift")


def identity() -> WalkDefinition:
    return make_walk([[1]], name="identity")


def s3_walk() -> WalkDefinition:
    h = 0.5
    return make_walk(
        [
            [{3: h, 1: h}, {1: h, -1: -h}],
            [{1: h, -1: -h}, {-1: h, -3: h}],
        ],
        name="s3-walk",
    )


def grover2d_4state() -> WalkDefinition:
    shifts = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    return _diag_times(shifts, _grover_coin(4), 1 / 2, d=2, name="grover2d-4state")


def grover2d() -> WalkDefinition:
    """Two-state walk on Z^2 without a differentiable eigenvalue function."""
    h = 0.5
    r, r_, u, u_ = (1, 0), (-1, 0), (0, 1), (0, -1)
    return make_walk(
        [
            [P([(r, h), (u, h)]), P([(r_, -h), (u_, h)])],
            [P([(r, h), (u, -h)]), P([(r_, h), (u_, h)])],
        ],
        d=2,
        name="grover2d",
    )


REGISTRY: dict[str, Callable[..., WalkDefinition]] = {
    "coin": coin,
    "coin-decomposable": coin_decomposable,
    "coin-realizable": coin_realizable,
    "grover3": grover3,
    "grover4": grover4,
    "cube": cube,
    "shift": shift,
    "identity": identity,
    "s3-walk": s3_walk,
    "grover2d": grover2d,
    "grover2d-4state": grover2d_4state,
}

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def _eval_number(node) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_number(node.left), _eval_number(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval_number(node.operand))
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id == "sqrt"
        and len(node.args) == 1
    ):
        return math.sqrt(_eval_number(node.args[0]))
    raise SchemaError(f"unsupported parameter expression: {ast.dump(node)}")


def parse_number(text: str) -> float:
    """Evaluate a plain arithmetic expression such as ``1/sqrt(2)`` or ``2*pi``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise SchemaError(f"bad parameter {text!r}") from exc
    return _eval_number(tree.body)


_REF = re.compile(r"^@?([A-Za-z0-9\-]+)\s*(?:\((.*)\))?$")


def resolve(ref: str) -> WalkDefinition:
    """Resolve ``@name`` or ``@name(arg, ...)`` to a registry walk."""
    m = _REF.match(ref.strip())
    if not m or m.group(1) not in REGISTRY:
        raise SchemaError(f"unknown registry walk {ref!r}; known: {sorted(REGISTRY)}")
    args = [parse_number(a) for a in m.group(2).split(",")] if m.group(2) else []
    return REGISTRY[m.group(1)](*args)


def one_dimensional() -> list[str]:
    return [name for name in REGISTRY if REGISTRY[name]().d == 1]
