import math

import pytest

from adtape import DAG, DCG, Recorder, Tape, TapeError
from adtape import scalar as ops
from adtape.scalar import declare_lvalue


def dag_ctx():
    return Recorder(Tape(DAG))


def dcg_ctx():
    return Recorder(Tape(DCG))


def last_record(tape):
    """(preds, partials, result) of the most recent elemental."""
    tape._s.seal()
    tape._d.seal()
    si = tape._s.tolist()
    di = tape._d.tolist()
    count = si[-2]
    return si[-2 - count:-2], di[len(di) - count:], si[-1]


def test_input_vertices():
    ctx = dag_ctx()
    a = ctx.input(1.0)
    assert a.vertex == 0 and a.value == 1.0
    b = ctx.input(2.0)
    assert b.vertex == 1
    ctx2 = dcg_ctx()
    assert ctx2.input(1.0).vertex == -1


@pytest.mark.parametrize("op,expected_partials", [
    (lambda a, b: a + b, (1.0, 1.0)),
    (lambda a, b: a - b, (1.0, -1.0)),
    (lambda a, b: a * b, (5.0, 3.0)),
    (lambda a, b: a / b, (1.0 / 5.0, -3.0 / 25.0)),
])
def test_binary_partials(op, expected_partials):
    ctx = dag_ctx()
    a, b = ctx.input(3.0), ctx.input(5.0)
    op(a, b)
    preds, partials, _ = last_record(ctx.tape)
    assert preds == [0, 1]
    assert partials == pytest.approx(list(expected_partials))


def test_square_merges_to_single_edge():
    ctx = dag_ctx()
    u = ctx.input(math.sin(1.0))
    r = u * u
    preds, partials, _ = last_record(ctx.tape)
    assert preds == [0]
    assert partials[0] == pytest.approx(2.0 * math.sin(1.0))
    assert r.value == pytest.approx(math.sin(1.0) ** 2)


@pytest.mark.parametrize("fn,x,val,partial", [
    (ops.sin, 1.0, math.sin(1.0), math.cos(1.0)),
    (ops.sin, 1.7080734, math.sin(1.7080734), math.cos(1.7080734)),
    (ops.cos, 0.5, math.cos(0.5), -math.sin(0.5)),
    (ops.exp, 0.0, 1.0, 1.0),
    (ops.ln, 2.0, math.log(2.0), 0.5),
    (ops.sqrt, 4.0, 2.0, 0.25),
])
def test_unary_partials(fn, x, val, partial):
    ctx = dag_ctx()
    a = ctx.input(x)
    r = fn(a)
    _, partials, _ = last_record(ctx.tape)
    assert r.value == pytest.approx(val)
    assert partials[0] == pytest.approx(partial)


def test_pow_const():
    ctx = dag_ctx()
    a = ctx.input(2.0)
    r = ops.pow_const(a, 3.0)
    _, partials, _ = last_record(ctx.tape)
    assert r.value == pytest.approx(8.0)
    assert partials[0] == pytest.approx(12.0)


def test_neg_partial():
    ctx = dag_ctx()
    a = ctx.input(2.0)
    r = -a
    _, partials, _ = last_record(ctx.tape)
    assert r.value == -2.0 and partials == [-1.0]


def test_domain_errors_carry_value():
    ctx = dag_ctx()
    a = ctx.input(-2.0)
    with pytest.raises(ValueError, match="-2.0"):
        ops.ln(a)
    with pytest.raises(ValueError, match="-2.0"):
        ops.sqrt(a)


def test_passive_operand_not_recorded():
    ctx = dag_ctx()
    a = ctx.input(2.0)
    r = a + 5.0
    preds, partials, _ = last_record(ctx.tape)
    assert r.value == 7.0
    assert preds == [0] and partials == [1.0]


def test_passive_only_arithmetic_stays_passive():
    assert ops.sin(0.5) == math.sin(0.5)
    ctx = dcg_ctx()
    cell = ctx.lvalue(0.25)  # declared but never assigned: passive
    assert isinstance(cell * 2.0, float)
    assert ctx.tape.q == 0


def test_cross_tape_mix_rejected():
    a = dag_ctx().input(1.0)
    b = dag_ctx().input(2.0)
    with pytest.raises(TapeError, match="different tapes"):
        a + b


def test_comparisons_use_primal_values():
    ctx = dag_ctx()
    a = ctx.input(2.0)
    assert (a > 1.5) is True and (a <= 1.5) is False
    assert ctx.tape.q == 0  # comparing records nothing


def test_dag_assign_rebinds_without_record():
    ctx = dag_ctx()
    a = ctx.input(1.0)
    cell = ctx.lvalue()
    cell = ctx.assign(cell, ops.sin(a))
    assert cell.vertex == 1
    assert ctx.tape.q == 1  # only the sin itself


def test_dag_assign_passive_goes_passive():
    ctx = dag_ctx()
    ctx.input(1.0)
    cell = ctx.lvalue()
    cell = ctx.assign(cell, 3.5)
    assert cell == 3.5 and isinstance(cell, float)


def test_dcg_assign_records_copy():
    ctx = dcg_ctx()
    x = ctx.input(1.0)
    u = ctx.lvalue()
    u = ctx.assign(u, ops.sin(x))
    preds, partials, result = last_record(ctx.tape)
    assert (preds, partials, result) == ([0], [1.0], -2)
    assert u.vertex == -2 and u.value == pytest.approx(math.sin(1.0))


def test_dcg_lvalue_keeps_vertex_across_assignments():
    ctx = dcg_ctx()
    x = ctx.input(1.0)
    u = ctx.lvalue()
    u = ctx.assign(u, ops.sin(x))
    first = u.vertex
    u = ctx.assign(u, u * 2.0)
    assert u.vertex == first == -2


def test_dcg_passive_assign_records_kill():
    ctx = dcg_ctx()
    ctx.input(1.0)
    u = ctx.lvalue()
    u = ctx.assign(u, 3.5)
    preds, partials, result = last_record(ctx.tape)
    assert (preds, partials, result) == ([], [], -2)
    assert u.value == 3.5 and not u.active


def test_dcg_assign_to_non_lvalue_rejected():
    ctx = dcg_ctx()
    x = ctx.input(1.0)
    temp = ops.sin(x)
    with pytest.raises(TapeError, match="L-value"):
        ctx.assign(temp, x)


def test_declare_order_matches_registration():
    tape = Tape(DCG)
    tape.register_input()
    u = declare_lvalue(tape, 0.0)
    v1 = declare_lvalue(tape, 0.0)
    v2 = declare_lvalue(tape, 0.0)
    assert (u.vertex, v1.vertex, v2.vertex) == (-2, -3, -4)
    assert tape.p_l == 4


def test_declare_lvalue_rejected_on_dag():
    with pytest.raises(TapeError, match="DCG"):
        declare_lvalue(Tape(DAG), 0.0)


def test_passive_output_rejected():
    ctx = dag_ctx()
    ctx.input(1.0)
    with pytest.raises(TapeError, match="passive"):
        ctx.output(2.0)


def test_branching_on_value_rerecords():
    class Branchy:
        def run(self, ctx, x):
            a = ctx.input(x[0])
            out = ctx.lvalue()
            if a > 0.0:
                out = ctx.assign(out, a * a)
            else:
                out = ctx.assign(out, a * 3.0)
            ctx.output(out)

    from adtape.scalar import record_problem
    pos = record_problem(Branchy(), [2.0], mode=DAG)
    neg = record_problem(Branchy(), [-2.0], mode=DAG)
    _, d_pos = pos.dump()
    _, d_neg = neg.dump()
    assert d_pos == [4.0]   # merged square partial 2a
    assert d_neg == [3.0]   # the other branch
