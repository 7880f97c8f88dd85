"""Gradient tape: recording protocol, stream layout and graph statistics.

A tape owns two append-only streams: the structure stream ``s`` (signed
8-byte integers) and the partials stream ``d`` (8-byte doubles).  The layout
of ``s`` is: the input vertex ids first, then for every recorded elemental
its predecessor ids in operand order, the predecessor count, and the result
id.  ``d`` carries one local partial derivative per predecessor entry of
``s``, in the same order.  The stream is parsed backwards during the
adjoint sweep.

Two recording modes exist:

* ``DAG``: pure single-assignment recording; every vertex gets the next
  non-negative index, assignments rebind.
* ``DCG``: named program variables (L-values) get dedicated negative ids
  ``-1, -2, ...`` that persist across overwrites; expression temporaries
  (the remainder) are numbered densely ``0, 1, ...``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

from .blockstore import DEFAULT_BLOCK_ENTRIES, BlockStore

DAG = "dag"
DCG = "dcg"

#: result kinds accepted by Tape.record besides an explicit L-value id
REMAINDER = "remainder"
FRESH_LVALUE = "fresh_lvalue"


class TapeError(Exception):
    pass


class Elemental(NamedTuple):
    """One parsed tape entry group: predecessors in operand order."""
    result: int
    preds: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class TapeStats:
    mode: str
    num_vertices: int
    num_inputs: int
    num_outputs: int
    num_edges: int
    num_elementals: int
    beta: int
    beta_r: int
    p_l: int
    num_remainder: int
    s_len: int
    d_len: int


class Tape:
    """Single-writer recording tape; immutable once finalized."""

    def __init__(self, mode: str = DAG,
                 block_entries: int = DEFAULT_BLOCK_ENTRIES,
                 budget_blocks: int | None = None,
                 spill_dir: str | None = None,
                 prefetch: bool = False):
        if mode not in (DAG, DCG):
            raise TapeError(f"unknown tape mode {mode!r}")
        self.mode = mode
        self.prefetch = prefetch
        self._s = BlockStore("q", name="s", block_entries=block_entries,
                             budget_blocks=budget_blocks, spill_dir=spill_dir)
        self._d = BlockStore("d", name="d", block_entries=block_entries,
                             budget_blocks=budget_blocks, spill_dir=spill_dir)
        self.n = 0
        self.q = 0
        self.edge_count = 0
        self.beta = 0
        self.beta_r = 0
        self.p_l = 0
        self.outputs: list[int] = []
        self._output_set: set[int] = set()
        self._next_ssa = 0        # DAG vertex counter
        self._next_remainder = 0  # DCG remainder counter
        self.finalized = False

    @property
    def m(self) -> int:
        return len(self.outputs)

    @property
    def s_len(self) -> int:
        return len(self._s)

    @property
    def d_len(self) -> int:
        return len(self._d)

    # -- recording ----------------------------------------------------------

    def register_input(self) -> int:
        self._require_recording()
        if self.q > 0:
            raise TapeError("inputs must be registered before the first elemental")
        if self.mode == DAG:
            vid = self._next_ssa
            self._next_ssa += 1
        else:
            self.p_l += 1
            vid = -self.p_l
        self.n += 1
        self._s.append((vid,))
        return vid

    def declare_lvalue(self) -> int:
        """Allocate the next L-value id without recording an elemental."""
        self._require_recording()
        if self.mode != DCG:
            raise TapeError("L-values exist only on DCG tapes")
        self.p_l += 1
        return -self.p_l

    def record(self, preds: Iterable[tuple[int, float]],
               result: int | str = REMAINDER) -> int:
        """Record one elemental; returns the result vertex id.

        ``preds`` is the (vertex, partial) list in operand order; duplicate
        operands are merged with summed partials.  ``result`` is REMAINDER,
        FRESH_LVALUE (DCG only) or an existing negative L-value id (DCG
        only).  An empty ``preds`` records a zero-arity overwrite whose
        reverse action only zeroes the result's adjoint slot.
        """
        self._require_recording()
        order: list[int] = []
        partials: dict[int, float] = {}
        for vid, part in preds:
            if not math.isfinite(part):
                raise TapeError(f"non-finite partial {part!r} for vertex {vid}")
            self._check_known(vid)
            if vid in partials:
                partials[vid] += part
            else:
                partials[vid] = part
                order.append(vid)

        if result == REMAINDER:
            if self.mode == DAG:
                rid = self._next_ssa
                self._next_ssa += 1
            else:
                rid = self._next_remainder
                self._next_remainder += 1
        elif result == FRESH_LVALUE:
            if self.mode == DAG:
                rid = None
            else:
                self.p_l += 1
                rid = -self.p_l
        elif isinstance(result, int) and result < 0:
            rid = result if self.mode == DCG and -result <= self.p_l else None
        else:
            raise TapeError(f"bad result kind {result!r}")
        if rid is None:
            raise TapeError(f"L-value result {result!r} not allowed on this tape")

        if self.mode == DAG:
            for vid in order:
                if rid - vid > self.beta:
                    self.beta = rid - vid
        elif rid >= 0:
            for vid in order:
                if vid >= 0 and rid - vid > self.beta_r:
                    self.beta_r = rid - vid

        self._s.append(order + [len(order), rid])
        self._d.append(partials[v] for v in order)
        self.q += 1
        self.edge_count += len(order)
        return rid

    def register_output(self, vid: int) -> None:
        self._require_recording()
        self._check_known(vid)
        if self.mode == DCG and vid >= 0:
            raise TapeError(f"DCG outputs must be L-values, got vertex {vid}")
        if vid in self._output_set:
            raise TapeError(f"vertex {vid} already registered as output")
        self._output_set.add(vid)
        self.outputs.append(vid)

    def finalize(self) -> TapeStats:
        self._require_recording()
        if self.n < 1:
            raise TapeError("cannot finalize a tape without inputs")
        if not self.outputs:
            raise TapeError("cannot finalize a tape without outputs")
        self._s.seal()
        self._d.seal()
        self.finalized = True
        return self.stats()

    def stats(self) -> TapeStats:
        if self.mode == DAG:
            num_vertices = self._next_ssa
            num_remainder = num_vertices
            p_l = 0
        else:
            num_vertices = self.p_l + self._next_remainder
            num_remainder = self._next_remainder
            p_l = self.p_l
        return TapeStats(
            mode=self.mode,
            num_vertices=num_vertices,
            num_inputs=self.n,
            num_outputs=self.m,
            num_edges=self.edge_count,
            num_elementals=self.q,
            beta=self.beta,
            beta_r=self.beta_r,
            p_l=p_l,
            num_remainder=num_remainder,
            s_len=self.s_len,
            d_len=self.d_len,
        )

    # -- reading ------------------------------------------------------------

    def dump(self) -> tuple[list[int], list[float]]:
        """Exact stream contents, for golden tests and the CLI."""
        self._require_finalized()
        return self._s.tolist(), self._d.tolist()

    def reverse_elementals(self, prefetch: bool | None = None
                           ) -> Iterator[tuple[int, list[tuple[int, float]]]]:
        """Parse the streams backwards, yielding (result, preds).

        Predecessors come out in reverse operand order, which is the order
        the adjoint sweep applies them in.
        """
        self._require_finalized()
        if prefetch is None:
            prefetch = self.prefetch
        si = self._s.reverse_iter(prefetch=prefetch)
        di = self._d.reverse_iter(prefetch=prefetch)
        for _ in range(self.q):
            result = next(si)
            count = next(si)
            preds = [(next(si), next(di)) for _ in range(count)]
            yield result, preds

    def parse(self) -> tuple[list[int], list[Elemental]]:
        """Forward-order view: (input ids, elementals with operand order)."""
        self._require_finalized()
        elems = []
        si = self._s.reverse_iter()
        di = self._d.reverse_iter()
        for _ in range(self.q):
            result = next(si)
            count = next(si)
            preds = tuple((next(si), next(di)) for _ in range(count))[::-1]
            elems.append(Elemental(result, preds))
        inputs = [next(si) for _ in range(self.n)][::-1]
        elems.reverse()
        return inputs, elems

    def visit_sequence(self) -> list[int]:
        """Vertex ids in reverse-interpretation order, consecutive
        duplicates collapsed (a result immediately re-read as the next
        predecessor is one visit)."""
        self._require_finalized()
        seq: list[int] = []

        def visit(v):
            if not seq or seq[-1] != v:
                seq.append(v)

        si = self._s.reverse_iter()
        for _ in range(self.q):
            visit(next(si))
            count = next(si)
            for _ in range(count):
                visit(next(si))
        for _ in range(self.n):
            visit(next(si))
        return seq

    def store_stats(self) -> dict:
        return {"s": self._s.stats(), "d": self._d.stats()}

    # -- internal -----------------------------------------------------------

    def _check_known(self, vid: int) -> None:
        if self.mode == DAG:
            if not 0 <= vid < self._next_ssa:
                raise TapeError(f"unknown vertex {vid}")
        else:
            if vid < 0:
                if -vid > self.p_l:
                    raise TapeError(f"unknown L-value {vid}")
            elif vid >= self._next_remainder:
                raise TapeError(f"unknown vertex {vid}")

    def _require_recording(self) -> None:
        if self.finalized:
            raise TapeError("tape is finalized")

    def _require_finalized(self) -> None:
        if not self.finalized:
            raise TapeError("tape is not finalized")


def new_tape(mode: str = DAG, **store_config) -> Tape:
    return Tape(mode, **store_config)
