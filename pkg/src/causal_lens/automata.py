"""One-step reversible cellular automata on rings and their two neighbourhoods.

An automaton is built from layers of identical-dimension gates placed at
cyclic positions; its step channel is the ordered composition of the layers.
For each cell the causal neighbourhood comes from the probe process of the
iterated step, the signalling set from pairwise signalling tests. The
signalling set is always contained in the causal neighbourhood; a strict gap
is the classical phenomenon that disappears when the same layout is quantized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .causal import embed_on, iterate, neighbourhood
from .classical import ClassicalChannel
from .errors import BudgetError, ConsistencyError, SpecError
from .quantum import DEFAULT_TOL, UnitaryChannel
from .systems import CompositeSystem, composite

__all__ = [
    "CellNeighbourhood",
    "ConeRow",
    "RingAutomaton",
    "build_ring",
    "cone_growth",
    "neighbourhood_map",
]

DEFAULT_MAX_DIM = {"classical": 4096, "quantum": 64}


def _cell_name(i: int) -> str:
    return f"c{i}"


@dataclass(frozen=True, eq=False)
class RingAutomaton:
    """A reversible one-step update on a ring of identical cells."""

    cells: int
    cell_dim: int
    step: ClassicalChannel | UnitaryChannel
    layers: tuple[tuple[tuple[str, int], ...], ...]
    model: str
    boundary: str = "ring"

    @property
    def system(self) -> CompositeSystem:
        return self.step.input


def build_ring(
    layers: Sequence[Sequence[tuple[ClassicalChannel | UnitaryChannel, int]]],
    cells: int,
    cell_dim: int,
    model: str = "classical",
    boundary: str = "ring",
    max_dim: Optional[int] = None,
) -> RingAutomaton:
    """Compose gate layers into a one-step automaton.

    Each layer is a sequence of ``(gate, at)`` pairs; a gate of arity k covers
    cells ``at .. at+k-1`` with cyclic indexing (no wrap-around when
    ``boundary="open"``). Gates within one layer must not overlap.
    """
    if cells < 2 or cell_dim < 2:
        raise SpecError("a ring needs at least 2 cells of dimension >= 2")
    if model not in DEFAULT_MAX_DIM:
        raise SpecError(f"model must be one of {sorted(DEFAULT_MAX_DIM)}")
    cap = max_dim if max_dim is not None else DEFAULT_MAX_DIM[model]
    if cell_dim**cells > cap:
        raise BudgetError(
            f"ring dimension {cell_dim}**{cells} exceeds the cap of {cap}"
        )
    ring = composite(*((_cell_name(i), cell_dim) for i in range(cells)))
    cls = ClassicalChannel if model == "classical" else UnitaryChannel
    step = cls.identity(ring)
    described = []
    for layer_no, layer in enumerate(layers):
        occupied: set[int] = set()
        layer_channel = cls.identity(ring)
        layer_desc = []
        for gate, at in layer:
            if not isinstance(gate, cls):
                raise SpecError(f"layer {layer_no}: gate model does not match {model!r}")
            arity = len(gate.input)
            if arity > cells:
                raise SpecError(f"layer {layer_no}: gate arity {arity} exceeds ring size")
            if any(d != cell_dim for d in gate.input.dims) or gate.input.dims != gate.output.dims:
                raise SpecError(
                    f"layer {layer_no}: gate wires must all have the cell dimension {cell_dim}"
                )
            span = [(at + k) % cells for k in range(arity)]
            if boundary == "open" and any((at + k) >= cells for k in range(arity)):
                raise SpecError(f"layer {layer_no}: gate at {at} spills past the open boundary")
            if occupied & set(span):
                raise SpecError(f"layer {layer_no}: overlapping gates at cells {sorted(span)}")
            occupied |= set(span)
            names = [_cell_name(i) for i in span]
            placed = embed_on(gate.with_names(names, names), ring)
            layer_channel = placed.compose(layer_channel)
            layer_desc.append((getattr(gate, "label", gate.__class__.__name__), at))
        step = layer_channel.compose(step)
        described.append(tuple(layer_desc))
    return RingAutomaton(
        cells=cells,
        cell_dim=cell_dim,
        step=step,
        layers=tuple(described),
        model=model,
        boundary=boundary,
    )


@dataclass(frozen=True)
class CellNeighbourhood:
    cell: str
    causal: frozenset[str]
    signalling: frozenset[str]


def neighbourhood_map(
    a: RingAutomaton, steps: int, tol: float = DEFAULT_TOL
) -> tuple[CellNeighbourhood, ...]:
    """Per-cell causal neighbourhood and signalling set of the iterated step."""
    if steps < 1:
        raise SpecError("steps must be >= 1")
    u = iterate(a.step, steps)
    out = []
    for name in a.system.names:
        causal = neighbourhood(u, [name], tol)
        sig = frozenset(t for t in a.system.names if u.signals([name], [t], tol))
        if not sig <= causal:
            raise ConsistencyError(
                f"signalling set of {name} escapes its causal neighbourhood"
            )
        out.append(CellNeighbourhood(cell=name, causal=causal, signalling=sig))
    return tuple(out)


@dataclass(frozen=True)
class ConeRow:
    step: int
    causal_sizes: tuple[int, ...]
    signalling_sizes: tuple[int, ...]


def cone_growth(
    a: RingAutomaton, max_steps: int, tol: float = DEFAULT_TOL
) -> tuple[ConeRow, ...]:
    """Sizes of both cones per cell for each step count up to ``max_steps``."""
    bits = a.cells * math.log2(a.cell_dim)
    limit = 12 if a.model == "classical" else 6
    if bits > limit:
        raise BudgetError(
            f"cone growth capped at {limit} cell-bits for the {a.model} model, got {bits:.1f}"
        )
    rows = []
    for t in range(1, max_steps + 1):
        nm = neighbourhood_map(a, t, tol)
        rows.append(
            ConeRow(
                step=t,
                causal_sizes=tuple(len(c.causal) for c in nm),
                signalling_sizes=tuple(len(c.signalling) for c in nm),
            )
        )
    return tuple(rows)
