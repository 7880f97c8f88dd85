"""Graphviz DOT rendering of a finalized tape."""

from __future__ import annotations

from .tape import Tape


def to_dot(tape: Tape, name: str = "tape") -> str:
    """Render vertices and partial-labelled edges; inputs are boxes,
    outputs are double circles, L-values are shaded."""
    inputs, elems = tape.parse()
    input_set = set(inputs)
    output_set = set(tape.outputs)
    vertices = set(inputs)
    for elem in elems:
        vertices.add(elem.result)
        vertices.update(v for v, _ in elem.preds)
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for v in sorted(vertices):
        attrs = []
        if v in input_set:
            attrs.append("shape=box")
        elif v in output_set:
            attrs.append("shape=doublecircle")
        if v < 0:
            attrs.append('style=filled fillcolor="lightgrey"')
        suffix = f" [{' '.join(attrs)}]" if attrs else ""
        lines.append(f'  "{v}"{suffix};')
    for elem in elems:
        for pred, partial in elem.preds:
            lines.append(f'  "{pred}" -> "{elem.result}" [label="{partial:.2f}"];')
    lines.append("}")
    return "\n".join(lines)
