"""Named composite systems and big-endian mixed-radix joint indexing.

A composite system is an ordered tuple of named finite wires. Joint indices
use big-endian mixed radix: the leftmost wire is the most significant digit,
matching top-to-bottom circuit wire order. The empty composite is the trivial
system (total dimension 1), so tensoring with it is a no-op by construction.

Wires are identified by name, not position, so subset queries survive
reordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import SpecError

__all__ = ["SubsystemLabel", "CompositeSystem", "composite", "reorder_permutation"]


@dataclass(frozen=True)
class SubsystemLabel:
    """A named finite wire; ``dim`` is the alphabet size or Hilbert dimension.

    ``dim == 1`` denotes a trivial wire.
    """

    name: str
    dim: int

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise SpecError("subsystem name must be a non-empty string")
        if self.dim < 1:
            raise SpecError(f"subsystem {self.name!r}: dim must be >= 1, got {self.dim}")


@dataclass(frozen=True)
class CompositeSystem:
    """An ordered sequence of uniquely named wires."""

    parts: tuple[SubsystemLabel, ...]

    def __post_init__(self) -> None:
        parts = tuple(self.parts)
        object.__setattr__(self, "parts", parts)
        names = [p.name for p in parts]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise SpecError(f"duplicate wire names {dup} in composite system")
        object.__setattr__(self, "_positions", {n: k for k, n in enumerate(names)})
        object.__setattr__(self, "_total_dim", math.prod(p.dim for p in parts))

    # -- basic views ---------------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parts)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(p.dim for p in self.parts)

    @property
    def total_dim(self) -> int:
        return self._total_dim

    def __len__(self) -> int:
        return len(self.parts)

    def position(self, name: str) -> int:
        try:
            return self._positions[name]
        except KeyError:
            raise SpecError(
                f"unknown wire name {name!r}; system has {list(self.names)}"
            ) from None

    def subset_positions(self, names: Iterable[str]) -> tuple[int, ...]:
        """Positions of the named wires, ascending; rejects unknowns and duplicates."""
        wanted = list(names)
        if len(set(wanted)) != len(wanted):
            raise SpecError(f"duplicate names in subset: {wanted}")
        return tuple(sorted(self.position(n) for n in wanted))

    def complement(self, names: Iterable[str]) -> tuple[str, ...]:
        """Names of the wires not in ``names``, in system order."""
        inside = set(names)
        self.subset_positions(inside)  # validate
        return tuple(n for n in self.names if n not in inside)

    def restrict(self, names: Iterable[str]) -> "CompositeSystem":
        """Sub-composite of the named wires, kept in system order."""
        keep = set(names)
        self.subset_positions(keep)  # validate
        return CompositeSystem(tuple(p for p in self.parts if p.name in keep))

    def select(self, order: Sequence[str]) -> "CompositeSystem":
        """Sub-composite of the named wires, in the order given."""
        self.subset_positions(order)  # validate
        return CompositeSystem(tuple(self.parts[self.position(n)] for n in order))

    def concat(self, other: "CompositeSystem") -> "CompositeSystem":
        return CompositeSystem(self.parts + other.parts)

    # -- joint-index codec ---------------------------------------------------

    def flatten(self, values: Sequence[int]) -> int:
        """Encode one value per wire into a joint index (big-endian)."""
        if len(values) != len(self.parts):
            raise SpecError(
                f"expected {len(self.parts)} components, got {len(values)}"
            )
        idx = 0
        for k, (v, part) in enumerate(zip(values, self.parts)):
            if not 0 <= v < part.dim:
                raise IndexError(
                    f"component {k} ({part.name}): value {v} out of range for dim {part.dim}"
                )
            idx = idx * part.dim + v
        return idx

    def unflatten(self, index: int) -> tuple[int, ...]:
        """Decode a joint index into one value per wire; inverse of :meth:`flatten`."""
        if not 0 <= index < self.total_dim:
            raise IndexError(f"joint index {index} out of range for total_dim {self.total_dim}")
        out = [0] * len(self.parts)
        for k in range(len(self.parts) - 1, -1, -1):
            index, out[k] = divmod(index, self.parts[k].dim)
        return tuple(out)

    @property
    def strides(self) -> tuple[int, ...]:
        """Big-endian strides: ``strides[k]`` is the weight of wire ``k``'s digit."""
        out = []
        acc = 1
        for p in reversed(self.parts):
            out.append(acc)
            acc *= p.dim
        return tuple(reversed(out))


def composite(*parts: tuple[str, int] | SubsystemLabel) -> CompositeSystem:
    """Build a system from ``(name, dim)`` pairs or labels: ``composite(("A", 2), ("B", 2))``."""
    labels = tuple(
        p if isinstance(p, SubsystemLabel) else SubsystemLabel(p[0], p[1]) for p in parts
    )
    return CompositeSystem(labels)


def reorder_permutation(system: CompositeSystem, new_order: Sequence[str]) -> tuple[int, ...]:
    """Joint-index bijection induced by reading the wires in ``new_order``.

    Returns ``p`` with ``p[old_index] = new_index``. Composing with the
    permutation for the inverse order yields the identity.
    """
    order = list(new_order)
    if sorted(order) != sorted(system.names):
        raise SpecError(
            f"new order {order} is not a permutation of wire names {list(system.names)}"
        )
    idx = np.arange(system.total_dim)
    strides = system.strides
    dims = system.dims
    new = np.zeros_like(idx)
    for name in order:
        p = system.position(name)
        new = new * dims[p] + (idx // strides[p]) % dims[p]
    return tuple(int(v) for v in new)
