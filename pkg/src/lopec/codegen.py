"""Deterministic C-dialect (OpenCL-style) kernel emission.

Each array parameter becomes an input buffer ``<name>_in`` plus, when the
kernel stores to it, an output buffer ``<name>_out``; every dimension
contributes extent/halo size parameters (``M, hlo0, hhi0, N, hlo1, hhi1``,
and ``L``/``hlo2``/``hhi2`` for rank 3).  Work-item ids ``i, j, k`` come
from ``get_global_id`` and are zero-based over the launch range; the flat
index follows the column-major padded layout, highest dimension first::

    const int idx = (j+hlo1)*(M+hlo0+hhi0) + (i+hlo0);
    ... u_in[(j+hlo1)*(M+hlo0+hhi0) + (i+hlo0) + (-1)] ...   // U(-1,0)

Emission is pure text generation from the IR: same IR, same bytes.  A
centre read that follows a centre store reads the output buffer so the C
matches the interpreter's pending-centre semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir import (Add, Const, Div, IntrinsicCall, IRExpr, KernelIR, Mul, Neg,
                 Read, ScalarRead)


class CodegenError(ValueError):
    pass


@dataclass(frozen=True)
class EmitConfig:
    real_c_type: str = "float"
    extent_symbols: tuple[str, ...] = ("M", "N", "L")
    id_symbols: tuple[str, ...] = ("i", "j", "k")
    indent: str = "    "


_INTRINSIC_C = {"abs": "fabs", "min": "fmin", "max": "fmax", "sqrt": "sqrt"}


def emit_kernel_source(ir: KernelIR, config: EmitConfig = EmitConfig()) -> str:
    """Render one kernel as C-dialect source (deterministic bytes)."""
    if not ir.array_params:
        raise CodegenError(f"kernel '{ir.name}' has no array parameter")
    rank = ir.rank
    if rank > len(config.extent_symbols):
        raise CodegenError(f"rank {rank} exceeds the emitter's dimension "
                           f"symbols")
    for p in ir.array_params:
        if ir.param_rank[p] != rank:
            raise CodegenError("array parameters must share one rank")
        if ir.param_types[p] != "real":
            raise CodegenError(
                f"unsupported element type '{ir.param_types[p]}' for "
                f"parameter '{p}'")
    stored = set(ir.stored_arrays)

    params: list[str] = []
    for p in ir.array_params:
        params.append(f"__global const {config.real_c_type}* {p}_in")
        if p in stored:
            params.append(f"__global {config.real_c_type}* {p}_out")
    for d in range(rank):
        params.append(f"const int {config.extent_symbols[d]}")
        params.append(f"const int hlo{d}")
        params.append(f"const int hhi{d}")
    for p in ir.scalar_params:
        ctype = config.real_c_type if ir.param_types[p] == "real" else "int"
        params.append(f"const {ctype} {p}")

    emitter = _Emitter(ir, config, stored)
    lines = [f"__kernel void {ir.name}({', '.join(params)})", "{"]
    ind = config.indent
    for d in range(rank):
        lines.append(f"{ind}const int {config.id_symbols[d]} = "
                     f"get_global_id({d});")
    lines.append(f"{ind}const int idx = "
                 f"{emitter.index_expr((0,) * rank)};")
    for name in ir.local_scalars:
        ctype = (config.real_c_type
                 if ir.param_types.get(name, "real") == "real" else "int")
        lines.append(f"{ind}{ctype} {name};")
    for st in ir.body:
        rhs = emitter.expr(st.expr, 0)
        if st.is_array:
            lines.append(f"{ind}{st.target}_out[idx] = {rhs};")
            emitter.center_stored.add(st.target)
        else:
            lines.append(f"{ind}{st.target} = {rhs};")
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass
class _Emitter:
    ir: KernelIR
    config: EmitConfig
    stored: set[str]
    center_stored: set[str] = field(default_factory=set)

    def padded_extent(self, d: int) -> str:
        return f"({self.config.extent_symbols[d]}+hlo{d}+hhi{d})"

    def index_expr(self, offsets: tuple[int, ...]) -> str:
        terms = []
        for d in range(len(offsets) - 1, 0, -1):
            off = f"+({offsets[d]})" if offsets[d] else ""
            coord = f"({self.config.id_symbols[d]}+hlo{d}{off})"
            factors = "".join("*" + self.padded_extent(e)
                              for e in range(d - 1, -1, -1))
            terms.append(coord + factors)
        terms.append(f"({self.config.id_symbols[0]}+hlo0)")
        if offsets[0]:
            terms.append(f"({offsets[0]})")
        return " + ".join(terms)

    def read(self, e: Read) -> str:
        if all(o == 0 for o in e.offsets):
            buffer = "_out" if e.array in self.center_stored else "_in"
            return f"{e.array}{buffer}[idx]"
        return f"{e.array}_in[{self.index_expr(e.offsets)}]"

    def const(self, v: float) -> str:
        text = repr(v)
        if self.config.real_c_type == "float":
            return text + "f"
        return text

    # Precedence: additive 1, multiplicative 2, unary 3, primary 4.
    def expr(self, e: IRExpr, parent_prec: int) -> str:
        if isinstance(e, Const):
            return self.const(e.value)
        if isinstance(e, ScalarRead):
            return e.name
        if isinstance(e, Read):
            return self.read(e)
        if isinstance(e, Add):
            if isinstance(e.right, Neg):
                text = (f"{self.expr(e.left, 0)} - "
                        f"{self.expr(e.right.operand, 1)}")
            else:
                text = f"{self.expr(e.left, 0)} + {self.expr(e.right, 1)}"
            return f"({text})" if parent_prec >= 1 else text
        if isinstance(e, Mul):
            text = f"{self.expr(e.left, 1)}*{self.expr(e.right, 1)}"
            return f"({text})" if parent_prec >= 2 else text
        if isinstance(e, Div):
            text = f"{self.expr(e.left, 1)}/{self.expr(e.right, 2)}"
            return f"({text})" if parent_prec >= 2 else text
        if isinstance(e, Neg):
            return f"-{self.expr(e.operand, 3)}"
        if isinstance(e, IntrinsicCall):
            args = ", ".join(self.expr(a, 0) for a in e.args)
            return f"{_INTRINSIC_C[e.fn]}({args})"
        raise TypeError(type(e).__name__)  # pragma: no cover
