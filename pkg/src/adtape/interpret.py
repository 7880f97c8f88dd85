"""Back-propagation over a finalized tape: flat, bandwidth-modulo and
dedicated-L-value strategies, plus the finite-difference gradient check.

All three sweeps share the same reverse consumption of the structure and
partials streams; they differ only in how a vertex id maps to an adjoint
slot.  Every slot is zeroed immediately after it is read (reset-after-read),
which is what makes slot reuse safe in the modulo strategies.
"""

from __future__ import annotations

from typing import Callable, Sequence

from .tape import DAG, DCG, Tape, TapeStats, TapeError

FLAT = "flat"
BANDWIDTH = "bandwidth"
LVALUE = "lvalue"

STRATEGIES = (FLAT, BANDWIDTH, LVALUE)

#: recording mode each strategy interprets
STRATEGY_MODE = {FLAT: DAG, BANDWIDTH: DAG, LVALUE: DCG}


class SeedError(TapeError):
    pass


class SlotCollisionError(TapeError):
    """A modulo slot still holding a live seeded output was clobbered."""


def adjoint_slot_count(stats: TapeStats, strategy: str) -> int:
    """Number of adjoint RAM slots the strategy allocates for this tape."""
    if strategy == FLAT:
        _require_mode(stats, DAG, strategy)
        return stats.num_vertices
    if strategy == BANDWIDTH:
        _require_mode(stats, DAG, strategy)
        return max(stats.beta, stats.num_inputs, stats.num_outputs)
    if strategy == LVALUE:
        _require_mode(stats, DCG, strategy)
        return stats.p_l + _remainder_slots(stats)
    raise ValueError(f"unknown strategy {strategy!r}")


def _remainder_slots(stats: TapeStats) -> int:
    # the remainder-bandwidth formula yields 0 slots when no
    # remainder-to-remainder edge exists, yet any temporary still needs one
    if stats.num_remainder == 0:
        return 0
    return max(stats.beta_r, 1)


def _require_mode(obj, mode: str, what: str) -> None:
    if obj.mode != mode:
        raise TapeError(f"{what} requires a {mode.upper()} tape, got {obj.mode.upper()}")


def _check_seed(tape: Tape, seed: Sequence[float]) -> None:
    if len(seed) != tape.m:
        raise SeedError(f"seed length {len(seed)} != {tape.m} outputs")


def propagate_flat(tape: Tape, seed: Sequence[float],
                   on_step: Callable[[list[float]], None] | None = None,
                   return_slots: bool = False):
    """One adjoint slot per vertex; seeds outputs, sweeps in reverse,
    harvests the inputs."""
    _require_mode(tape, DAG, "flat strategy")
    tape._require_finalized()
    _check_seed(tape, seed)
    vbar = [0.0] * tape.stats().num_vertices
    for ybar, j in zip(seed, tape.outputs):
        vbar[j] = ybar
    for result, preds in tape.reverse_elementals():
        w = vbar[result]
        vbar[result] = 0.0
        for i, d in preds:
            vbar[i] += w * d
        if on_step is not None:
            on_step(list(vbar))
    grad = [vbar[i] for i in range(tape.n)]
    return (grad, vbar) if return_slots else grad


def propagate_bandwidth(tape: Tape, seed: Sequence[float],
                        on_step: Callable[[list[float]], None] | None = None,
                        return_slots: bool = False):
    """All slot indices taken modulo max(beta, n, m).

    Two seeded outputs mapping to one slot, or an elemental result slot
    colliding with a still-live seeded output, raise SlotCollisionError
    rather than silently corrupting adjoints.
    """
    _require_mode(tape, DAG, "bandwidth strategy")
    tape._require_finalized()
    _check_seed(tape, seed)
    stats = tape.stats()
    width = adjoint_slot_count(stats, BANDWIDTH)
    vbar = [0.0] * width
    live: dict[int, int] = {}  # slot -> seeded output vertex not yet consumed
    for ybar, j in zip(seed, tape.outputs):
        slot = j % width
        if slot in live:
            raise SlotCollisionError(
                f"outputs {live[slot]} and {j} both seed slot {slot}")
        live[slot] = j
        vbar[slot] = ybar
    for result, preds in tape.reverse_elementals():
        slot = result % width
        if slot in live:
            if live[slot] == result:
                del live[slot]
            else:
                raise SlotCollisionError(
                    f"result vertex {result} clobbers live seeded output "
                    f"{live[slot]} in slot {slot}")
        w = vbar[slot]
        vbar[slot] = 0.0
        for i, d in preds:
            vbar[i % width] += w * d
        if on_step is not None:
            on_step(list(vbar))
    grad = [vbar[i % width] for i in range(tape.n)]
    return (grad, vbar) if return_slots else grad


def propagate_lvalue(tape: Tape, seed: Sequence[float],
                     on_step: Callable[[list[float]], None] | None = None,
                     return_slots: bool = False):
    """Dedicated slots for L-values, modulo remainder bandwidth for the
    rest.  L-value ``-k`` maps to slot ``k-1``; remainder vertex ``r`` to
    slot ``p_l + r % B_R``."""
    _require_mode(tape, DCG, "lvalue strategy")
    tape._require_finalized()
    _check_seed(tape, seed)
    stats = tape.stats()
    p_l = stats.p_l
    b_r = _remainder_slots(stats)
    vbar = [0.0] * (p_l + b_r)
    for ybar, j in zip(seed, tape.outputs):
        vbar[-j - 1] = ybar
    for result, preds in tape.reverse_elementals():
        slot = (-result - 1) if result < 0 else p_l + result % b_r
        w = vbar[slot]
        vbar[slot] = 0.0
        for i, d in preds:
            islot = (-i - 1) if i < 0 else p_l + i % b_r
            vbar[islot] += w * d
        if on_step is not None:
            on_step(list(vbar))
    grad = [vbar[i] for i in range(tape.n)]
    return (grad, vbar) if return_slots else grad


_PROPAGATORS = {
    FLAT: propagate_flat,
    BANDWIDTH: propagate_bandwidth,
    LVALUE: propagate_lvalue,
}


def propagate(tape: Tape, seed: Sequence[float], strategy: str,
              **kwargs):
    try:
        fn = _PROPAGATORS[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}") from None
    return fn(tape, seed, **kwargs)


def gradient_check(problem, x: Sequence[float] | None = None,
                   seed: Sequence[float] | None = None,
                   fd_step: float = 1e-6, strategy: str = FLAT,
                   tape: Tape | None = None,
                   **store_config) -> float:
    """Compare the harvested gradient against central differences.

    Returns the maximum component error, relative where the adjoint
    component exceeds one in magnitude and absolute below that.
    """
    from .problems import fd_oracle
    from .scalar import record_problem

    if x is None:
        x = problem.default_point()
    if tape is None:
        tape = record_problem(problem, x, mode=STRATEGY_MODE[strategy],
                              **store_config)
    if seed is None:
        seed = [1.0] * tape.m
    grad = propagate(tape, seed, strategy)
    worst = 0.0
    for i in range(len(x)):
        direction = [0.0] * len(x)
        direction[i] = 1.0
        fd = fd_oracle(problem, x, direction, fd_step, seed=seed)
        err = abs(grad[i] - fd) / max(1.0, abs(grad[i]))
        if err > worst:
            worst = err
    return worst
