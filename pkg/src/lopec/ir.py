"""Stencil IR, kernel lowering, and storage-layout index mapping.

The IR is a small expression tree over per-point reads: ``Read(array,
offsets)`` fetches the element at the launch point displaced by constant
offsets, ``ScalarRead`` fetches a scalar parameter or kernel local.  Surface
binary minus is normalized away (``a - b`` becomes ``Add(a, Neg(b))``) so
consumers handle one additive form.

``StorageLayout`` describes the per-image padded block: interior extents
plus halo widths per side, column-major linearization (stride of dim 1 is
1).  ``map_local_to_global`` turns (centre, offset) into the flat storage
index; the distributed runtime and the emitted C use exactly this formula.

``run_body`` interprets a kernel body against a caller-supplied read
callback.  Operands flow through numpy, so the same code evaluates whole
slabs (vectorized launches, the dense oracle) and single float64 points
(scrambled-order launches) with bit-identical arithmetic per element.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import ast
from .checks import Footprint, KernelInfo


@dataclass(frozen=True)
class Const:
    value: float

    def __repr__(self):
        return f"Const({self.value!r})"


@dataclass(frozen=True)
class ScalarRead:
    name: str

    def __repr__(self):
        return f"ScalarRead({self.name})"


@dataclass(frozen=True)
class Read:
    array: str
    offsets: tuple[int, ...]

    def __repr__(self):
        return f"Read({self.array},{self.offsets})"


@dataclass(frozen=True)
class Add:
    left: "IRExpr"
    right: "IRExpr"

    def __repr__(self):
        return f"Add({self.left!r},{self.right!r})"


@dataclass(frozen=True)
class Mul:
    left: "IRExpr"
    right: "IRExpr"

    def __repr__(self):
        return f"Mul({self.left!r},{self.right!r})"


@dataclass(frozen=True)
class Div:
    left: "IRExpr"
    right: "IRExpr"

    def __repr__(self):
        return f"Div({self.left!r},{self.right!r})"


@dataclass(frozen=True)
class Neg:
    operand: "IRExpr"

    def __repr__(self):
        return f"Neg({self.operand!r})"


@dataclass(frozen=True)
class IntrinsicCall:
    fn: str                       # abs | min | max | sqrt
    args: tuple["IRExpr", ...]

    def __repr__(self):
        return f"{self.fn}({','.join(map(repr, self.args))})"


IRExpr = Union[Const, ScalarRead, Read, Add, Mul, Div, Neg, IntrinsicCall]


@dataclass(frozen=True)
class IRAssign:
    target: str
    is_array: bool                # True: centre store; False: local scalar
    expr: IRExpr


@dataclass
class KernelIR:
    name: str
    array_params: list[str]
    scalar_params: list[str]
    param_rank: dict[str, int]
    param_types: dict[str, str]
    local_scalars: list[str]
    footprints: dict[str, Footprint]
    body: list[IRAssign]

    @property
    def rank(self) -> int:
        return self.param_rank[self.array_params[0]]

    @property
    def stored_arrays(self) -> list[str]:
        seen = []
        for st in self.body:
            if st.is_array and st.target not in seen:
                seen.append(st.target)
        return seen


# ---------------------------------------------------------------------------
# Lowering


def lower_kernel(info: KernelInfo) -> KernelIR:
    """Lower a checked kernel to IR.  The kernel must be diagnostic-free."""
    body = []
    for stmt in info.kernel.body:
        assert isinstance(stmt, ast.Assign)
        expr = _lower_expr(stmt.rhs)
        lhs = stmt.lhs
        if isinstance(lhs, ast.OffsetRef):
            body.append(IRAssign(lhs.array, True, expr))
        else:
            assert isinstance(lhs, ast.Ident)
            body.append(IRAssign(lhs.name, False, expr))
    return KernelIR(info.kernel.name, list(info.array_params),
                    list(info.scalar_params), dict(info.param_rank),
                    dict(info.param_types), list(info.local_scalars),
                    dict(info.footprints), body)


def _lower_expr(e: ast.Expr) -> IRExpr:
    if isinstance(e, ast.IntLit):
        return Const(float(e.value))
    if isinstance(e, ast.RealLit):
        return Const(e.value)
    if isinstance(e, ast.Ident):
        return ScalarRead(e.name)
    if isinstance(e, ast.OffsetRef):
        return Read(e.array, e.offsets)
    if isinstance(e, ast.Neg):
        return Neg(_lower_expr(e.operand))
    if isinstance(e, ast.Bin):
        left = _lower_expr(e.left)
        right = _lower_expr(e.right)
        if e.op == "+":
            return Add(left, right)
        if e.op == "-":
            return Add(left, Neg(right))
        if e.op == "*":
            return Mul(left, right)
        if e.op == "/":
            return Div(left, right)
    if isinstance(e, ast.Call):
        return IntrinsicCall(e.name, tuple(_lower_expr(a) for a in e.args))
    raise TypeError(f"cannot lower {type(e).__name__}")


# ---------------------------------------------------------------------------
# Storage layout


@dataclass(frozen=True)
class StorageLayout:
    """Padded column-major block: interior extents and halo widths per side."""

    interior: tuple[int, ...]
    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.interior) == len(self.lo) == len(self.hi)):
            raise ValueError("layout tuples must have equal length")
        if any(m < 1 for m in self.interior):
            raise ValueError("interior extents must be positive")
        if any(w < 0 for w in self.lo + self.hi):
            raise ValueError("halo widths must be non-negative")

    @property
    def rank(self) -> int:
        return len(self.interior)

    def padded(self) -> tuple[int, ...]:
        return tuple(m + a + b
                     for m, a, b in zip(self.interior, self.lo, self.hi))

    def count(self) -> int:
        return math.prod(self.padded())

    def strides(self) -> tuple[int, ...]:
        s = []
        acc = 1
        for e in self.padded():
            s.append(acc)
            acc *= e
        return tuple(s)

    def linear(self, coords: tuple[int, ...]) -> int:
        """Flat index of 0-based padded-space coordinates."""
        for c, e in zip(coords, self.padded()):
            if not 0 <= c < e:
                raise ValueError(f"coordinate {coords} outside padded "
                                 f"extents {self.padded()}")
        return sum(c * s for c, s in zip(coords, self.strides()))


def map_local_to_global(offsets: tuple[int, ...], center: tuple[int, ...],
                        layout: StorageLayout):
    """Flat storage index of the element ``offsets`` away from ``center``.

    ``center`` is 1-based in the interior; the returned index addresses the
    padded block (halo cells included), column-major.  Components may be
    ints (returns an int) or broadcastable integer ndarrays (returns the
    ndarray of flat indices); either way an out-of-box coordinate raises
    ``ValueError``.
    """
    coords = tuple(c - 1 + lo + o
                   for c, lo, o in zip(center, layout.lo, offsets))
    if any(isinstance(c, np.ndarray) for c in coords):
        for c, e in zip(coords, layout.padded()):
            if np.any(c < 0) or np.any(c >= e):
                raise ValueError(f"coordinates outside padded extents "
                                 f"{layout.padded()}")
        return sum(c * s for c, s in zip(coords, layout.strides()))
    return layout.linear(coords)


# ---------------------------------------------------------------------------
# Interpretation


def run_body(ir: KernelIR, read: Callable[[str, tuple[int, ...]], object],
             scalars: dict[str, object] | None = None) -> dict[str, object]:
    """Evaluate the kernel body; returns pending centre values per array.

    ``read(array, offsets)`` supplies operands — float64 scalars for a
    single point or ndarray slabs for a whole range.  A centre read that
    follows a centre store observes the pending value, matching the
    double-buffered launch semantics.
    """
    env: dict[str, object] = dict(scalars or {})
    pending: dict[str, object] = {}

    def ev(e: IRExpr):
        if isinstance(e, Const):
            return np.float64(e.value)
        if isinstance(e, ScalarRead):
            if e.name not in env:
                raise KeyError(f"kernel local '{e.name}' read before "
                               f"assignment")
            return env[e.name]
        if isinstance(e, Read):
            if e.array in pending and all(o == 0 for o in e.offsets):
                return pending[e.array]
            return read(e.array, e.offsets)
        if isinstance(e, Add):
            return ev(e.left) + ev(e.right)
        if isinstance(e, Mul):
            return ev(e.left) * ev(e.right)
        if isinstance(e, Div):
            return ev(e.left) / ev(e.right)
        if isinstance(e, Neg):
            return -ev(e.operand)
        if isinstance(e, IntrinsicCall):
            args = [ev(a) for a in e.args]
            if e.fn == "abs":
                return np.abs(args[0])
            if e.fn == "sqrt":
                return np.sqrt(args[0])
            if e.fn == "min":
                return functools.reduce(np.minimum, args)
            if e.fn == "max":
                return functools.reduce(np.maximum, args)
        raise TypeError(f"cannot evaluate {type(e).__name__}")

    for st in ir.body:
        value = ev(st.expr)
        if st.is_array:
            pending[st.target] = value
        else:
            env[st.target] = value
    return pending
