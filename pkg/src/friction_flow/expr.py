"""Small arithmetic expression language for data fields.

Expressions are Python-syntax arithmetic over the variables ``t, x, y``
and the constant ``pi``, with the functions ``sin, cos, exp, min, max``.
Anything else (attributes, subscripts, comparisons, other names) is
rejected at parse time, so evaluation is total on finite inputs.
"""

from __future__ import annotations

import ast
import functools
from dataclasses import dataclass

import numpy as np
import sympy

VARIABLES = ("t", "x", "y")
FUNCTIONS = ("sin", "cos", "exp", "min", "max")

_SYMBOLS = {name: sympy.Symbol(name, real=True) for name in VARIABLES}
_SYMPY_FUNCS = {"sin": sympy.sin, "cos": sympy.cos, "exp": sympy.exp, "min": sympy.Min, "max": sympy.Max}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}
_NUMPY_MODULE = [
    {
        "Min": lambda *a: functools.reduce(np.minimum, a),
        "Max": lambda *a: functools.reduce(np.maximum, a),
    },
    "numpy",
]


class ExprError(ValueError):
    """Parse error at 1-based ``column`` of the expression text."""

    def __init__(self, message: str, column: int = 1):
        super().__init__(f"column {column}: {message}")
        self.message = message
        self.column = column


def _to_sympy(node, allowed):
    if isinstance(node, ast.Expression):
        return _to_sympy(node.body, allowed)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExprError(f"unsupported literal {node.value!r}", node.col_offset + 1)
        return sympy.Float(node.value) if isinstance(node.value, float) else sympy.Integer(node.value)
    if isinstance(node, ast.Name):
        if node.id == "pi":
            return sympy.pi
        if node.id in allowed:
            return _SYMBOLS[node.id]
        raise ExprError(f"unknown name {node.id!r} (allowed: {', '.join(allowed)}, pi)", node.col_offset + 1)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        val = _to_sympy(node.operand, allowed)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_to_sympy(node.left, allowed), _to_sympy(node.right, allowed))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            raise ExprError(f"unknown function (allowed: {', '.join(FUNCTIONS)})", node.col_offset + 1)
        if node.keywords:
            raise ExprError("keyword arguments are not supported", node.col_offset + 1)
        name = node.func.id
        nargs = len(node.args)
        if name in ("min", "max") and nargs < 2:
            raise ExprError(f"{name} needs at least two arguments", node.col_offset + 1)
        if name not in ("min", "max") and nargs != 1:
            raise ExprError(f"{name} takes one argument", node.col_offset + 1)
        return _SYMPY_FUNCS[name](*(_to_sympy(a, allowed) for a in node.args))
    col = getattr(node, "col_offset", 0) + 1
    raise ExprError(f"unsupported syntax {type(node).__name__}", col)


@dataclass(frozen=True, eq=False)
class Expr:
    """A parsed expression; call with arrays for the declared variables."""

    text: str
    variables: tuple
    sym: sympy.Expr

    def __post_init__(self):
        fn = sympy.lambdify([_SYMBOLS[v] for v in self.variables], self.sym, modules=_NUMPY_MODULE)
        object.__setattr__(self, "_fn", fn)

    def __call__(self, *args):
        shape = np.broadcast(*[np.asarray(a, dtype=float) for a in args]).shape if args else ()
        with np.errstate(all="ignore"):
            val = self._fn(*args)
        return np.broadcast_to(np.asarray(val, dtype=float), shape).copy()

    def diff(self, var: str) -> "Expr":
        return Expr(f"d({self.text})/d{var}", self.variables, sympy.diff(self.sym, _SYMBOLS[var]))

    def is_constant(self) -> bool:
        return not self.sym.free_symbols


def parse_expr(text: str, variables=VARIABLES) -> Expr:
    """Parse ``text`` into an :class:`Expr` over ``variables``."""
    variables = tuple(variables)
    src = text.strip()
    lead = len(text) - len(text.lstrip())
    if not src:
        raise ExprError("empty expression", 1)
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ExprError(exc.msg, lead + (exc.offset or 1)) from None
    try:
        sym = _to_sympy(tree, variables)
    except ExprError as exc:
        raise ExprError(exc.message, lead + exc.column) from None
    return Expr(text=src, variables=variables, sym=sym)


def negative_laplacian(expr: Expr, nu: float) -> Expr:
    """``-nu (d_xx + d_yy) expr`` as a new expression."""
    x, y = _SYMBOLS["x"], _SYMBOLS["y"]
    sym = -nu * (sympy.diff(expr.sym, x, 2) + sympy.diff(expr.sym, y, 2))
    return Expr(f"-nu lap({expr.text})", expr.variables, sympy.simplify(sym))
