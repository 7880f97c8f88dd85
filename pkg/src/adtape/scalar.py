"""Overloading frontend: scalars whose arithmetic records onto a tape.

Programs are written once against a :class:`Recorder` context and run in
three ways: with a DAG tape (single-assignment recording, assignments
rebind), with a DCG tape (named L-values keep their negative vertex id
across overwrites, assignments record copy elementals), or with no tape at
all, in which case everything degrades to plain Python floats.  The primal
value sequence is identical in all three cases.

Comparison operators act on primal values and return plain booleans, so
control flow is frozen per recording.
"""

from __future__ import annotations

import math
from typing import Sequence

from .tape import DAG, DCG, Tape, TapeError


class ActiveScalar:
    """A numeric value carrying a tape handle and a vertex identity."""

    __slots__ = ("tape", "value", "vertex", "is_lvalue", "active")

    def __init__(self, tape: Tape, value: float, vertex: int,
                 is_lvalue: bool = False, active: bool = True):
        self.tape = tape
        self.value = value
        self.vertex = vertex
        self.is_lvalue = is_lvalue
        self.active = active

    def __repr__(self):
        kind = "lvalue" if self.is_lvalue else "temp"
        return f"ActiveScalar({self.value!r}, vertex={self.vertex}, {kind})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return _binary(self, other, lambda a, b: a + b, lambda a, b: (1.0, 1.0))

    __radd__ = __add__

    def __sub__(self, other):
        return _binary(self, other, lambda a, b: a - b, lambda a, b: (1.0, -1.0))

    def __rsub__(self, other):
        return _binary(other, self, lambda a, b: a - b, lambda a, b: (1.0, -1.0))

    def __mul__(self, other):
        return _binary(self, other, lambda a, b: a * b, lambda a, b: (b, a))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return _binary(self, other, lambda a, b: a / b,
                       lambda a, b: (1.0 / b, -a / (b * b)))

    def __rtruediv__(self, other):
        return _binary(other, self, lambda a, b: a / b,
                       lambda a, b: (1.0 / b, -a / (b * b)))

    def __neg__(self):
        return _unary(self, -self.value, -1.0)

    def __pos__(self):
        return self

    # -- comparisons on primal values ---------------------------------------

    def __lt__(self, other):
        return self.value < value_of(other)

    def __le__(self, other):
        return self.value <= value_of(other)

    def __gt__(self, other):
        return self.value > value_of(other)

    def __ge__(self, other):
        return self.value >= value_of(other)

    def __float__(self):
        return float(self.value)


def value_of(x) -> float:
    """Primal value of an active or passive scalar."""
    return x.value if isinstance(x, ActiveScalar) else float(x)


def _is_active(x) -> bool:
    return isinstance(x, ActiveScalar) and x.active


def _tape_of(a, b) -> Tape:
    ta = a.tape if _is_active(a) else None
    tb = b.tape if _is_active(b) else None
    if ta is not None and tb is not None and ta is not tb:
        raise TapeError("operands belong to different tapes")
    return ta or tb


def _binary(a, b, fval, fpart) -> "ActiveScalar | float":
    av, bv = value_of(a), value_of(b)
    tape = _tape_of(a, b)
    v = fval(av, bv)
    if tape is None:
        return v
    da, db = fpart(av, bv)
    preds = []
    if _is_active(a):
        preds.append((a.vertex, da))
    if _is_active(b):
        preds.append((b.vertex, db))
    rid = tape.record(preds)
    return ActiveScalar(tape, v, rid)


def _unary(a, v, partial) -> "ActiveScalar | float":
    if not _is_active(a):
        return v
    rid = a.tape.record([(a.vertex, partial)])
    return ActiveScalar(a.tape, v, rid)


# -- elemental math functions, generic over active/passive scalars ----------

def sin(x):
    v = value_of(x)
    return _unary(x, math.sin(v), math.cos(v))


def cos(x):
    v = value_of(x)
    return _unary(x, math.cos(v), -math.sin(v))


def exp(x):
    v = value_of(x)
    e = math.exp(v)
    return _unary(x, e, e)


def ln(x):
    v = value_of(x)
    if v <= 0.0:
        raise ValueError(f"ln of non-positive value {v}")
    return _unary(x, math.log(v), 1.0 / v)


def sqrt(x):
    v = value_of(x)
    if v <= 0.0:
        raise ValueError(f"sqrt of non-positive value {v}")
    r = math.sqrt(v)
    return _unary(x, r, 0.5 / r)


def pow_const(x, c: float):
    v = value_of(x)
    if v <= 0.0 and c != int(c):
        raise ValueError(f"pow of non-positive value {v} with non-integer exponent {c}")
    return _unary(x, v ** c, c * v ** (c - 1.0))


def input(tape: Tape, value: float) -> ActiveScalar:  # noqa: A001 - domain term
    """Register a differentiated input on the tape."""
    vid = tape.register_input()
    return ActiveScalar(tape, float(value), vid,
                        is_lvalue=(tape.mode == DCG), active=True)


def declare_lvalue(tape: Tape, initial: float = 0.0) -> ActiveScalar:
    """Allocate a dedicated L-value id on a DCG tape; passive until the
    first assignment."""
    vid = tape.declare_lvalue()
    return ActiveScalar(tape, float(initial), vid, is_lvalue=True, active=False)


class Recorder:
    """Execution context threading one tape (or none) through a program.

    Programs must write assignments as ``name = ctx.assign(name, expr)``;
    with a DCG tape this records a copy into the variable's dedicated
    L-value, with a DAG tape it rebinds, without a tape it is a plain
    assignment.
    """

    def __init__(self, tape: Tape | None = None):
        self.tape = tape
        self.outputs: list[float] = []

    @property
    def mode(self) -> str | None:
        return self.tape.mode if self.tape is not None else None

    def input(self, value: float):
        if self.tape is None:
            return float(value)
        return input(self.tape, value)

    def lvalue(self, initial: float = 0.0):
        if self.tape is not None and self.tape.mode == DCG:
            return declare_lvalue(self.tape, initial)
        return float(initial)

    def assign(self, lhs, rhs):
        if self.tape is None:
            return value_of(rhs)
        if self.tape.mode == DAG:
            return rhs if _is_active(rhs) else value_of(rhs)
        # DCG: lhs must be a declared L-value of this tape
        if not (isinstance(lhs, ActiveScalar) and lhs.is_lvalue
                and lhs.tape is self.tape):
            raise TapeError("assignment target is not an L-value of this tape")
        if _is_active(rhs):
            if rhs.tape is not self.tape:
                raise TapeError("operands belong to different tapes")
            self.tape.record([(rhs.vertex, 1.0)], result=lhs.vertex)
            lhs.value = rhs.value
            lhs.active = True
        else:
            # passive overwrite: zero-arity record kills the adjoint slot
            self.tape.record([], result=lhs.vertex)
            lhs.value = value_of(rhs)
            lhs.active = False
        return lhs

    def output(self, s) -> None:
        if self.tape is None:
            self.outputs.append(value_of(s))
            return
        if not _is_active(s):
            raise TapeError("cannot register a passive value as output")
        self.tape.register_output(s.vertex)


def run_passive(problem, x: Sequence[float]) -> list[float]:
    """Evaluate a generically written program with plain floats."""
    ctx = Recorder(None)
    problem.run(ctx, list(x))
    return ctx.outputs


def record_problem(problem, x: Sequence[float], mode: str = DAG,
                   **store_config) -> Tape:
    """Record a program at the given point and finalize the tape."""
    tape = Tape(mode, **store_config)
    ctx = Recorder(tape)
    problem.run(ctx, list(x))
    tape.finalize()
    return tape
