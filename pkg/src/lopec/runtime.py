"""SPMD execution simulator.

P images run the same desugared host plan over an MP x NP process grid.
Each coarray is a set of per-image blocks: interior ``m x n`` plus halo
padding, stored flat in column-major order (the same linearization the
emitted C uses) and viewed through numpy's Fortran-order reshape.

Device subimages are simulated as per-image mirror buffers.  ``get_subimage``
returns a handle distinct from every image index when a device is present
and falls back to ``this_image()`` otherwise; mirror allocation, mirror
copies, and the per-dimension pull/push traffic of a device-resident halo
exchange are all modelled and instrumented (event log + per-image counters).

Launches are double-buffered: reads come from a snapshot taken at launch,
stores go to the live buffer, and a centre read after a centre store sees
the pending value.  The default path evaluates whole ranges vectorized; a
point-at-a-time path (forward, reverse, or seeded-shuffle order) exists to
demonstrate order independence, and both produce bit-identical results
because they run the same float64 operation tree per element.

Halo exchange is collective: the scheduler advances images round-robin to
their next ``halo_transfer`` and performs the exchange once all arrive.
Sweeps run dimension-ascending; every image finishes dimension d before any
starts d+1, and slabs span the full padded extent of the other dimensions,
so corner cells become correct transitively.  Boundaries wrap cyclically
(an image can be its own neighbour).

``oracle_step`` is the brute-force reference: it applies a kernel densely
to the gathered global field with periodic indexing via ``numpy.roll`` —
no grid, no halo machinery — so distributed runs can be checked against it.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import ast
from . import plan as hostplan
from .checks import CheckResult
from .diagnostics import ALLOC_SHAPE, GRID_FACTOR, UNALLOCATED, RuntimeFault, SourcePos
from .grid import ProcessGrid, create_grid
from .ir import KernelIR, StorageLayout, lower_kernel, run_body
from .symbols import ArrayEntity, ScalarEntity

DEFAULT_EXTENT_1D = 64
DEFAULT_EXTENT_2D = 32


@dataclass
class RunConfig:
    images: int = 1
    grid_rows: int = 1
    devices: int = 0
    steps: int = 1
    order: str = "vector"            # vector | forward | reverse | shuffle
    shuffle_seed: Optional[int] = None

    def validate(self) -> None:
        if self.devices < 0:
            raise ValueError("devices must be non-negative")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.order not in ("vector", "forward", "reverse", "shuffle"):
            raise ValueError(f"unknown execution order {self.order!r}")


class DistributedArray:
    """Per-image blocks (and optional device mirrors) of one coarray."""

    def __init__(self, entity: ArrayEntity, layout: StorageLayout,
                 grid: ProcessGrid):
        self.entity = entity
        self.layout = layout
        self.grid = grid
        self.blocks: dict[int, np.ndarray] = {}
        self.mirrors: dict[int, np.ndarray] = {}
        self.mirror_handle: dict[int, int] = {}
        self.state: dict[int, str] = {}

    def view(self, image: int) -> np.ndarray:
        return self.blocks[image].reshape(self.layout.padded(), order="F")

    def mirror_view(self, image: int) -> np.ndarray:
        return self.mirrors[image].reshape(self.layout.padded(), order="F")

    def interior_index(self) -> tuple[slice, ...]:
        return tuple(slice(lo, lo + m)
                     for lo, m in zip(self.layout.lo, self.layout.interior))


class Machine:
    """Builds the grid and images for a checked program and runs its plan."""

    def __init__(self, check: CheckResult, config: RunConfig,
                 input_field: Optional[np.ndarray] = None):
        if not check.ok:
            raise ValueError("cannot run a program with diagnostics")
        config.validate()
        self.check = check
        self.program = check.program
        self.config = config
        self.kernels: dict[str, KernelIR] = {
            name: lower_kernel(info) for name, info in check.kernels.items()}
        self.grid = create_grid(config.images, config.grid_rows)

        coarrays = [e for e in check.symtab.arrays() if e.corank > 0]
        self.primary: Optional[ArrayEntity] = coarrays[0] if coarrays else None
        self.input_field = input_field
        self._setup_extents()

        p = self.grid.p
        self.images = list(range(1, p + 1))
        self.env: dict[int, dict] = {}
        self.counters: dict[int, dict[str, int]] = {}
        for k in self.images:
            pcol, prow = self.grid.coords(k)
            self.env[k] = {
                "p": p, "mp": self.grid.mp, "np": self.grid.np,
                "pcol": pcol, "prow": prow,
                "m": self.m, "n": self.n, "nsteps": config.steps,
            }
            self.counters[k] = {"launches": 0, "device_launches": 0,
                                "halo_transfers": 0, "d2h": 0, "h2d": 0}
        self.arrays: dict[str, DistributedArray] = {}
        self.events: list[tuple] = []

    # -- setup ------------------------------------------------------------

    def _setup_extents(self) -> None:
        grid = self.grid
        if self.primary is None:
            self.rank = 0
            self.global_extents = (0, 0)
            self.m = self.n = 0
            if self.input_field is not None:
                raise RuntimeFault(ALLOC_SHAPE,
                                   "program declares no coarray to hold the "
                                   "input field")
            return
        rank = self.primary.rank
        if rank > 2:
            raise RuntimeFault(ALLOC_SHAPE,
                               f"execution supports rank 1 and 2; "
                               f"'{self.primary.name}' has rank {rank}",
                               self.primary.decl_pos)
        self.rank = rank
        if self.input_field is not None:
            mg, ng = self.input_field.shape
            if rank == 1 and ng != 1:
                raise RuntimeFault(ALLOC_SHAPE,
                                   f"input field is {mg} x {ng} but "
                                   f"'{self.primary.name}' is 1-D",
                                   self.primary.decl_pos)
        elif rank == 1:
            mg, ng = DEFAULT_EXTENT_1D, 1
        else:
            mg, ng = DEFAULT_EXTENT_2D, DEFAULT_EXTENT_2D
        if rank == 1:
            if grid.mp != 1:
                raise RuntimeFault(
                    GRID_FACTOR,
                    f"a 1-D coarray distributes over a 1 x P grid; grid "
                    f"rows must be 1, not {grid.mp}",
                    self.primary.decl_pos)
            if mg % grid.np != 0:
                raise RuntimeFault(
                    GRID_FACTOR,
                    f"global extent {mg} is not divisible by {grid.np} "
                    f"image(s)", self.primary.decl_pos)
            self.m, self.n = mg // grid.np, 1
        else:
            if mg % grid.np != 0:
                raise RuntimeFault(
                    GRID_FACTOR,
                    f"global extent {mg} (dim 1) is not divisible by the "
                    f"{grid.np} grid column(s)", self.primary.decl_pos)
            if ng % grid.mp != 0:
                raise RuntimeFault(
                    GRID_FACTOR,
                    f"global extent {ng} (dim 2) is not divisible by the "
                    f"{grid.mp} grid row(s)", self.primary.decl_pos)
            self.m, self.n = mg // grid.np, ng // grid.mp
        self.global_extents = (mg, ng)

    # -- host expression evaluation ---------------------------------------

    def eval(self, e: ast.Expr, k: int):
        env = self.env[k]
        if isinstance(e, ast.IntLit):
            return e.value
        if isinstance(e, ast.RealLit):
            return e.value
        if isinstance(e, ast.Ident):
            if e.name not in env:
                raise RuntimeFault(UNALLOCATED,
                                   f"'{e.name}' has no value at this point",
                                   e.pos)
            return env[e.name]
        if isinstance(e, ast.Bin):
            lv = self.eval(e.left, k)
            rv = self.eval(e.right, k)
            if e.op == "+":
                return lv + rv
            if e.op == "-":
                return lv - rv
            if e.op == "*":
                return lv * rv
            try:
                if isinstance(lv, int) and isinstance(rv, int):
                    q = abs(lv) // abs(rv)
                    return q if (lv < 0) == (rv < 0) else -q
                return lv / rv
            except ZeroDivisionError:
                raise RuntimeFault(ALLOC_SHAPE, "division by zero", e.pos)
        if isinstance(e, ast.Neg):
            return -self.eval(e.operand, k)
        if isinstance(e, ast.Cmp):
            lv = self.eval(e.left, k)
            rv = self.eval(e.right, k)
            return {"==": lv == rv, "/=": lv != rv,
                    "<": lv < rv, ">": lv > rv}[e.op]
        if isinstance(e, ast.Call):
            args = [self.eval(a, k) for a in e.args]
            if e.name == "this_image":
                return k
            if e.name == "abs":
                return abs(args[0])
            if e.name == "sqrt":
                return math.sqrt(args[0])
            if e.name == "min":
                return min(args)
            if e.name == "max":
                return max(args)
        if isinstance(e, ast.SectionRef):
            return self._read_element(e, k)
        raise RuntimeFault(ALLOC_SHAPE,
                           f"cannot evaluate this expression on the host",
                           e.pos)

    def _int(self, e: ast.Expr, k: int, what: str) -> int:
        v = self.eval(e, k)
        if isinstance(v, bool) or not isinstance(v, int):
            raise RuntimeFault(ALLOC_SHAPE,
                               f"{what} must be an integer", e.pos)
        return v

    def _read_element(self, e: ast.SectionRef, k: int) -> float:
        if any(isinstance(s, ast.FullRange) for s in e.subs):
            raise RuntimeFault(ALLOC_SHAPE,
                               "array section used where a scalar is "
                               "required", e.pos)
        arr = self._live_array(e.array, k, e.pos)
        owner = self._resolve_image(e.cosubs, k) if e.cosubs else k
        self._require_allocated(arr, owner, e.pos)
        idx = self._section_index(e, arr, k)
        return float(arr.view(owner)[idx])

    def _resolve_image(self, cosubs: list[ast.Expr], k: int) -> int:
        values = [self._int(c, k, "cosubscript") for c in cosubs]
        if len(values) == 1:
            return self.grid.image_at(values[0], 1)
        return self.grid.image_at(values[0], values[1])

    # -- array helpers -----------------------------------------------------

    def _live_array(self, name: str, k: int, pos: SourcePos) -> DistributedArray:
        arr = self.arrays.get(name)
        if arr is None:
            raise RuntimeFault(UNALLOCATED,
                               f"'{name}' is used before it is allocated",
                               pos)
        return arr

    def _require_allocated(self, arr: DistributedArray, k: int,
                           pos: SourcePos) -> None:
        if arr.state.get(k) != "allocated":
            raise RuntimeFault(UNALLOCATED,
                               f"'{arr.entity.name}' is not allocated on "
                               f"image {k}", pos)

    def _section_index(self, ref: ast.SectionRef, arr: DistributedArray,
                       k: int) -> tuple:
        layout = arr.layout
        idx = []
        for d, sub in enumerate(ref.subs):
            if isinstance(sub, ast.FullRange):
                idx.append(slice(layout.lo[d], layout.lo[d]
                                 + layout.interior[d]))
                continue
            v = self._int(sub, k, "subscript")
            coord = v - 1 + layout.lo[d]
            if not 0 <= coord < layout.padded()[d]:
                raise RuntimeFault(ALLOC_SHAPE,
                                   f"subscript {v} of '{ref.array}' is "
                                   f"outside the allocated bounds in dim "
                                   f"{d + 1}", ref.pos)
            idx.append(coord)
        return tuple(idx)

    # -- plan execution ----------------------------------------------------

    def run(self) -> None:
        """Execute the whole program under the round-robin reference schedule."""
        actions = hostplan.desugar(self.program).actions
        gens = {k: self._exec(actions, k) for k in self.images}
        finished: set[int] = set()
        while len(finished) < len(self.images):
            requests: dict[int, tuple] = {}
            for k in self.images:
                if k in finished:
                    continue
                try:
                    requests[k] = next(gens[k])
                except StopIteration:
                    finished.add(k)
            if not requests:
                break
            kinds = {(r[0], r[1]) for r in requests.values()}
            if finished or len(kinds) != 1:
                raise RuntimeFault(
                    UNALLOCATED,
                    "images diverged at a collective operation")
            kind, name, action = next(iter(requests.values()))
            if kind == "halo":
                self._halo_exchange(name, action.pos)
            elif kind == "alloc":
                for k in requests:
                    self._alloc_host(action, k)
            else:
                for k in requests:
                    self._dealloc(action, k)

    def _exec(self, actions: list, k: int):
        for a in actions:
            if isinstance(a, hostplan.HaloTransfer):
                self.counters[k]["halo_transfers"] += 1
                yield ("halo", a.array, a)
            elif isinstance(a, hostplan.AllocCoarray):
                # allocating a coarray synchronizes all images
                yield ("alloc", a.entity, a)
            elif isinstance(a, hostplan.Deallocate):
                yield ("dealloc", a.entity, a)
            elif isinstance(a, hostplan.LoopCounted):
                lo = self._int(a.lo, k, "loop bound")
                hi = self._int(a.hi, k, "loop bound")
                for v in range(lo, hi + 1):
                    self.env[k][a.var] = v
                    yield from self._exec(a.body, k)
            elif isinstance(a, hostplan.CondGroup):
                if self.eval(a.cond, k) is True:
                    yield from self._exec(a.body, k)
            else:
                self._do(a, k)

    def _do(self, a, k: int) -> None:
        if isinstance(a, hostplan.GridSetup):
            return
        if isinstance(a, hostplan.GetSubimage):
            self.env[k][a.var] = self._subimage_handle(a.image, k)
            return
        if isinstance(a, hostplan.ScalarAssign):
            value = self.eval(a.expr, k)
            ent = self.check.symtab.lookup(a.var)
            if isinstance(ent, ScalarEntity) and ent.elem_type == "real":
                value = float(value)
            elif isinstance(value, float):
                value = int(value)
            self.env[k][a.var] = value
            return
        if isinstance(a, hostplan.DeviceAllocFrom):
            self._alloc_device(a, k)
            return
        if isinstance(a, hostplan.MirrorCopy):
            self._mirror_copy(a, k)
            return
        if isinstance(a, hostplan.SectionCopy):
            self._section_copy(a, k)
            return
        if isinstance(a, hostplan.LaunchConcurrent):
            self._launch(a, k)
            return
        raise TypeError(type(a).__name__)  # pragma: no cover

    def _dealloc(self, a: hostplan.Deallocate, k: int) -> None:
        arr = self._live_array(a.entity, k, a.pos)
        self._require_allocated(arr, k, a.pos)
        arr.state[k] = "deallocated"
        arr.blocks.pop(k, None)
        arr.mirrors.pop(k, None)
        arr.mirror_handle.pop(k, None)

    def _subimage_handle(self, requested: int, k: int) -> int:
        if 1 <= requested <= self.config.devices:
            return requested * self.grid.p + k
        return k

    def _device_handle(self, var: str, k: int, pos: SourcePos) -> int:
        env = self.env[k]
        if var not in env:
            raise RuntimeFault(UNALLOCATED,
                               f"'{var}' holds no subimage handle at this "
                               f"point", pos)
        return env[var]

    # -- allocation --------------------------------------------------------

    def _block_interior(self) -> tuple[int, ...]:
        return (self.m,) if self.rank == 1 else (self.m, self.n)

    def _alloc_host(self, a: hostplan.AllocCoarray, k: int) -> None:
        ent = self.check.symtab.lookup(a.entity)
        assert isinstance(ent, ArrayEntity)
        arr = self.arrays.get(a.entity)
        if arr is not None and arr.state.get(k) == "allocated":
            raise RuntimeFault(UNALLOCATED,
                               f"'{a.entity}' is already allocated", a.pos)
        if ent.corank > 0 and self.rank == 0:
            raise RuntimeFault(ALLOC_SHAPE,
                               "no distributed extents are configured", a.pos)
        interior = (self._block_interior() if ent.corank > 0
                    else None)
        los, his, ms = [], [], []
        for d, (lo_e, hi_e) in enumerate(a.bounds):
            lo_v = self._int(lo_e, k, "allocate bound")
            hi_v = self._int(hi_e, k, "allocate bound")
            if ent.corank > 0:
                if d >= len(interior):
                    raise RuntimeFault(ALLOC_SHAPE,
                                       f"too many bounds for '{a.entity}'",
                                       a.pos)
                m_d = interior[d]
            else:
                m_d = hi_v - lo_v + 1
            halo = ent.halo.dims[d] if (ent.halo is not None
                                        and d < len(ent.halo.dims)) else None
            if halo is not None and not halo.is_deferred:
                want_lo, want_hi = 1 - halo.lo, m_d + halo.hi
                if (lo_v, hi_v) != (want_lo, want_hi):
                    raise RuntimeFault(
                        ALLOC_SHAPE,
                        f"allocate bounds {lo_v}:{hi_v} for dim {d + 1} of "
                        f"'{a.entity}' do not match the interior 1:{m_d} "
                        f"plus halo ({halo.lo},{halo.hi}); expected "
                        f"{want_lo}:{want_hi}", a.pos)
                w_lo, w_hi = halo.lo, halo.hi
            else:
                w_lo, w_hi = 1 - lo_v, hi_v - m_d
                if w_lo < 0 or w_hi < 0 or w_lo > 8 or w_hi > 8:
                    raise RuntimeFault(
                        ALLOC_SHAPE,
                        f"allocate bounds {lo_v}:{hi_v} for dim {d + 1} of "
                        f"'{a.entity}' imply halo widths ({w_lo},{w_hi}) "
                        f"outside 0..8", a.pos)
            los.append(w_lo)
            his.append(w_hi)
            ms.append(m_d)
        layout = StorageLayout(tuple(ms), tuple(los), tuple(his))
        if arr is None:
            arr = DistributedArray(ent, layout, self.grid)
            self.arrays[a.entity] = arr
        elif arr.layout != layout:
            raise RuntimeFault(ALLOC_SHAPE,
                               f"images allocate '{a.entity}' with "
                               f"different shapes", a.pos)
        arr.blocks[k] = np.zeros(layout.count(), dtype=np.float64)
        arr.state[k] = "allocated"
        if (self.primary is not None and ent.name == self.primary.name
                and self.input_field is not None):
            self._scatter_block(arr, k)

    def _scatter_block(self, arr: DistributedArray, k: int) -> None:
        pcol, prow = self.grid.coords(k)
        view = arr.view(k)
        if self.rank == 1:
            part = self.input_field[(pcol - 1) * self.m: pcol * self.m, 0]
            view[arr.interior_index()] = part
        else:
            part = self.input_field[(pcol - 1) * self.m: pcol * self.m,
                                    (prow - 1) * self.n: prow * self.n]
            view[arr.interior_index()] = part

    def _alloc_device(self, a: hostplan.DeviceAllocFrom, k: int) -> None:
        handle = self._device_handle(a.device, k, a.pos)
        if handle == k:
            return      # fallback handle: no device, nothing to mirror
        arr = self._live_array(a.array, k, a.pos)
        self._require_allocated(arr, k, a.pos)
        arr.mirrors[k] = arr.blocks[k].copy()
        arr.mirror_handle[k] = handle
        self.counters[k]["h2d"] += 1
        self.events.append(("device_alloc", k, a.array))

    def _mirror_copy(self, a: hostplan.MirrorCopy, k: int) -> None:
        arr = self._live_array(a.array, k, a.pos)
        self._require_allocated(arr, k, a.pos)
        handle = self._device_handle(a.device, k, a.pos)
        if handle == k:
            return      # fallback: host and "device" are the same memory
        if k not in arr.mirrors:
            raise RuntimeFault(UNALLOCATED,
                               f"'{a.array}' has no device mirror on image "
                               f"{k}", a.pos)
        if a.direction == "device_to_host":
            arr.blocks[k][:] = arr.mirrors[k]
            self.counters[k]["d2h"] += 1
            self.events.append(("d2h", k, a.array, -1))
        else:
            arr.mirrors[k][:] = arr.blocks[k]
            self.counters[k]["h2d"] += 1
            self.events.append(("h2d", k, a.array, -1))

    # -- section copies ----------------------------------------------------

    def _section_copy(self, a: hostplan.SectionCopy, k: int) -> None:
        arr = self._live_array(a.dst.array, k, a.pos)
        self._require_allocated(arr, k, a.pos)
        dst_idx = self._section_index(a.dst, arr, k)
        if isinstance(a.src, ast.SectionRef):
            src_arr = self._live_array(a.src.array, k, a.pos)
            owner = (self._resolve_image(a.src.cosubs, k)
                     if a.src.cosubs else k)
            self._require_allocated(src_arr, owner, a.pos)
            src_idx = self._section_index(a.src, src_arr, k)
            value = src_arr.view(owner)[src_idx].copy()
        else:
            value = self.eval(a.src, k)
        try:
            arr.view(k)[dst_idx] = value
        except ValueError:
            raise RuntimeFault(ALLOC_SHAPE,
                               "section extents do not conform", a.pos)

    # -- launches ----------------------------------------------------------

    def _launch(self, a: hostplan.LaunchConcurrent, k: int) -> None:
        kir = self.kernels[a.kernel]
        handle = self._device_handle(a.target, k, a.pos)
        on_device = handle != k
        ranges = []
        interior = None
        for r in a.ranges:
            lo = self._int(r.lo, k, "launch range")
            hi = self._int(r.hi, k, "launch range")
            ranges.append((lo, hi))

        arrays: dict[str, DistributedArray] = {}
        buffers: dict[str, np.ndarray] = {}
        scalars: dict[str, object] = {}
        kernel_params = self.check.kernels[a.kernel].kernel.params
        for p, arg in zip(kernel_params, a.args):
            if isinstance(arg, ast.ElementArg):
                arr = self._live_array(arg.array, k, a.pos)
                self._require_allocated(arr, k, a.pos)
                if on_device:
                    if k not in arr.mirrors:
                        raise RuntimeFault(
                            UNALLOCATED,
                            f"'{arg.array}' is not allocated on the device",
                            a.pos)
                    buffers[p] = arr.mirror_view(k)
                else:
                    buffers[p] = arr.view(k)
                arrays[p] = arr
                if interior is None:
                    interior = arr.layout.interior
            else:
                value = self.eval(arg, k)
                if kir.param_types[p] == "real":
                    scalars[p] = np.float64(value)
                else:
                    scalars[p] = np.int64(value)

        if interior is None:
            raise RuntimeFault(ALLOC_SHAPE,
                               f"kernel '{a.kernel}' was launched without an "
                               f"array argument", a.pos)
        for d, (lo, hi) in enumerate(ranges):
            if lo < 1 or hi > interior[d]:
                raise RuntimeFault(
                    ALLOC_SHAPE,
                    f"launch range {lo}:{hi} lies outside the interior "
                    f"1:{interior[d]} in dim {d + 1}", a.pos)

        self.counters[k]["launches"] += 1
        if on_device:
            self.counters[k]["device_launches"] += 1
        self.events.append(("launch", k, a.kernel, on_device))
        if any(lo > hi for lo, hi in ranges):
            return
        snapshots = {p: buf.copy() for p, buf in buffers.items()}
        layouts = {p: arrays[p].layout for p in buffers}
        if self.config.order == "vector":
            self._launch_vector(kir, ranges, buffers, snapshots, layouts,
                                scalars)
        else:
            self._launch_pointwise(kir, ranges, buffers, snapshots, layouts,
                                   scalars)

    def _launch_vector(self, kir, ranges, buffers, snapshots, layouts,
                       scalars) -> None:
        def read(name: str, offsets: tuple[int, ...]):
            lay = layouts[name]
            idx = tuple(slice(lo - 1 + hl + o, hi + hl + o)
                        for (lo, hi), hl, o in zip(ranges, lay.lo, offsets))
            return snapshots[name][idx]

        pending = run_body(kir, read, scalars)
        for name, value in pending.items():
            lay = layouts[name]
            out_idx = tuple(slice(lo - 1 + hl, hi + hl)
                            for (lo, hi), hl in zip(ranges, lay.lo))
            buffers[name][out_idx] = value

    def _launch_pointwise(self, kir, ranges, buffers, snapshots, layouts,
                          scalars) -> None:
        points = list(itertools.product(
            *[range(lo, hi + 1) for lo, hi in ranges]))
        if self.config.order == "reverse":
            points.reverse()
        elif self.config.order == "shuffle":
            random.Random(self.config.shuffle_seed).shuffle(points)
        for pt in points:
            def read(name: str, offsets: tuple[int, ...]):
                lay = layouts[name]
                idx = tuple(c - 1 + hl + o
                            for c, hl, o in zip(pt, lay.lo, offsets))
                return snapshots[name][idx]

            pending = run_body(kir, read, scalars)
            for name, value in pending.items():
                lay = layouts[name]
                idx = tuple(c - 1 + hl for c, hl in zip(pt, lay.lo))
                buffers[name][idx] = value

    # -- halo exchange -----------------------------------------------------

    def _halo_exchange(self, name: str, pos: SourcePos) -> None:
        arr = self.arrays.get(name)
        if arr is None:
            raise RuntimeFault(UNALLOCATED,
                               f"halo_transfer of '{name}' before it is "
                               f"allocated", pos)
        for k in self.images:
            self._require_allocated(arr, k, pos)
        layout = arr.layout
        self.events.append(("halo_transfer", name))
        for d in range(layout.rank):
            w_lo, w_hi = layout.lo[d], layout.hi[d]
            if w_lo == 0 and w_hi == 0:
                continue
            m_d = layout.interior[d]

            def slab(sl: slice) -> tuple:
                idx: list = [slice(None)] * layout.rank
                idx[d] = sl
                return tuple(idx)

            low_halo = slab(slice(0, w_lo))
            high_halo = slab(slice(w_lo + m_d, w_lo + m_d + w_hi))
            low_interior = slab(slice(w_lo, w_lo + w_hi))
            high_interior = slab(slice(m_d, m_d + w_lo))

            # Device path, phase 1: refresh the host copy of the slabs the
            # neighbours will read from this image.
            for k in self.images:
                if k not in arr.mirrors:
                    continue
                hv, mv = arr.view(k), arr.mirror_view(k)
                if w_hi:
                    hv[low_interior] = mv[low_interior]
                    self.counters[k]["d2h"] += 1
                    self.events.append(("d2h", k, name, d))
                if w_lo:
                    hv[high_interior] = mv[high_interior]
                    self.counters[k]["d2h"] += 1
                    self.events.append(("d2h", k, name, d))

            # Exchange on the host: every image completes dimension d
            # before any image starts d+1 (corners become correct
            # transitively because slabs span the full padded extent of the
            # other dimensions).
            for k in self.images:
                hv = arr.view(k)
                if w_lo:
                    nb = self.grid.neighbor(k, 0 if d == 0 else 1, -1)
                    hv[low_halo] = arr.view(nb)[high_interior].copy()
                    self.events.append(("halo_fill", k, name, d, "low"))
                if w_hi:
                    nb = self.grid.neighbor(k, 0 if d == 0 else 1, +1)
                    hv[high_halo] = arr.view(nb)[low_interior].copy()
                    self.events.append(("halo_fill", k, name, d, "high"))

            # Device path, phase 2: push the received halo slabs back down.
            for k in self.images:
                if k not in arr.mirrors:
                    continue
                hv, mv = arr.view(k), arr.mirror_view(k)
                if w_lo:
                    mv[low_halo] = hv[low_halo]
                    self.counters[k]["h2d"] += 1
                    self.events.append(("h2d", k, name, d))
                if w_hi:
                    mv[high_halo] = hv[high_halo]
                    self.counters[k]["h2d"] += 1
                    self.events.append(("h2d", k, name, d))

    # -- gather / scatter --------------------------------------------------

    def gather(self, name: Optional[str] = None) -> np.ndarray:
        """Assemble the global interior field (from the host copies)."""
        if name is None:
            if self.primary is None:
                raise RuntimeFault(ALLOC_SHAPE,
                                   "program declares no coarray to gather")
            name = self.primary.name
        arr = self.arrays.get(name)
        if arr is None:
            raise RuntimeFault(UNALLOCATED,
                               f"'{name}' was never allocated")
        mg, ng = self.global_extents
        out = np.empty((mg, max(ng, 1)), dtype=np.float64)
        for k in self.images:
            self._require_allocated(arr, k, arr.entity.decl_pos)
            pcol, prow = self.grid.coords(k)
            block = arr.view(k)[arr.interior_index()]
            if self.rank == 1:
                out[(pcol - 1) * self.m: pcol * self.m, 0] = block
            else:
                out[(pcol - 1) * self.m: pcol * self.m,
                    (prow - 1) * self.n: prow * self.n] = block
        return out


# ---------------------------------------------------------------------------
# Dense reference oracle


def oracle_step(field: np.ndarray, kir: KernelIR,
                scalars: dict | None = None) -> np.ndarray:
    """One dense kernel application with periodic (cyclic) boundaries.

    ``field`` is the global interior (1-D or 2-D, float64).  Every point is
    updated; reads use numpy.roll shifts, entirely independent of the
    distributed halo machinery.
    """
    work = field.astype(np.float64, copy=True)
    rank = work.ndim

    def read(name: str, offsets: tuple[int, ...]):
        if all(o == 0 for o in offsets):
            return work.copy()
        return np.roll(work, shift=tuple(-o for o in offsets),
                       axis=tuple(range(rank)))

    prepared = {k: (np.float64(v) if not isinstance(v, np.generic) else v)
                for k, v in (scalars or {}).items()}
    pending = run_body(kir, read, prepared)
    target = kir.stored_arrays[0]
    return np.asarray(pending[target], dtype=np.float64)
