"""Reversible quantum channels as unitaries over tensor-product spaces.

Matrices are dense, row-major, and indexed by big-endian joint indices, so
``np.kron`` agrees with wire concatenation. Reversibility is unitarity: the
inverse of a channel is its adjoint. All comparisons are absolute entrywise
with a configurable tolerance (default 1e-9); the intended scale is joint
dimension <= 64.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import SpecError
from .systems import CompositeSystem, composite

__all__ = [
    "DEFAULT_TOL",
    "DensityOperator",
    "StateMap",
    "UnitaryChannel",
    "cnot",
    "from_classical",
    "hadamard",
    "partial_trace",
    "random_unitary",
    "swap_gate",
]

DEFAULT_TOL = 1e-9


def _as_tensor(matrix: np.ndarray, out_dims: Sequence[int], in_dims: Sequence[int]) -> np.ndarray:
    return matrix.reshape(tuple(out_dims) + tuple(in_dims))


def _grouped(
    matrix: np.ndarray,
    out_sys: CompositeSystem,
    in_sys: CompositeSystem,
    out_first: Sequence[str],
    in_first: Sequence[str],
) -> np.ndarray:
    """Matrix with wires transposed so the named groups come first on each side.

    Output shape: (d_out_first, d_out_rest, d_in_first, d_in_rest).
    """
    out_order = list(out_first) + [n for n in out_sys.names if n not in set(out_first)]
    in_order = list(in_first) + [n for n in in_sys.names if n not in set(in_first)]
    t = _as_tensor(matrix, out_sys.dims, in_sys.dims)
    axes = [out_sys.position(n) for n in out_order] + [
        len(out_sys) + in_sys.position(n) for n in in_order
    ]
    t = t.transpose(axes)
    d_of = out_sys.select(out_first).total_dim
    d_if = in_sys.select(in_first).total_dim
    return t.reshape(d_of, out_sys.total_dim // d_of, d_if, in_sys.total_dim // d_if)


@dataclass(frozen=True, eq=False)
class UnitaryChannel:
    """A unitarity-certified complex matrix typed by input/output systems."""

    input: CompositeSystem
    output: CompositeSystem
    matrix: np.ndarray
    atol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        n = self.input.total_dim
        if self.output.total_dim != n:
            raise SpecError(
                f"reversible channel needs equal dimensions, got {n} -> {self.output.total_dim}"
            )
        if m.shape != (n, n):
            raise SpecError(f"matrix shape {m.shape} does not match joint dimension {n}")
        defect = np.max(np.abs(m.conj().T @ m - np.eye(n))) if n else 0.0
        if defect > self.atol:
            raise SpecError(f"unitarity certificate failed: max |U+U - I| = {defect:.3e}")

    # -- evaluation ----------------------------------------------------------

    def apply(self, rho: "DensityOperator") -> "DensityOperator":
        if rho.system.dims != self.input.dims:
            raise SpecError("state system does not match channel input")
        return DensityOperator(self.output, self.matrix @ rho.matrix @ self.matrix.conj().T)

    # -- constructors ----------------------------------------------------------

    @classmethod
    def identity(cls, system: CompositeSystem) -> "UnitaryChannel":
        return cls(system, system, np.eye(system.total_dim))

    @classmethod
    def from_index_permutation(
        cls, input: CompositeSystem, output: CompositeSystem, table: Sequence[int]
    ) -> "UnitaryChannel":
        """The unitary sending basis state ``x`` to basis state ``table[x]``."""
        n = input.total_dim
        m = np.zeros((n, n))
        for x, y in enumerate(table):
            m[y, x] = 1.0
        return cls(input, output, m)

    # -- algebra -------------------------------------------------------------

    def compose(self, first: "UnitaryChannel") -> "UnitaryChannel":
        """``self  first``: run ``first``, then ``self``."""
        if first.output.dims != self.input.dims:
            raise SpecError(
                f"cannot compose: inner output dims {first.output.dims} != outer input dims {self.input.dims}"
            )
        return UnitaryChannel(first.input, self.output, self.matrix @ first.matrix)

    def tensor(self, other: "UnitaryChannel") -> "UnitaryChannel":
        return UnitaryChannel(
            self.input.concat(other.input),
            self.output.concat(other.output),
            np.kron(self.matrix, other.matrix),
        )

    def dagger(self) -> "UnitaryChannel":
        return UnitaryChannel(self.output, self.input, self.matrix.conj().T)

    def invert(self) -> "UnitaryChannel":
        """The inverse channel; for a unitary this is the adjoint."""
        return self.dagger()

    def with_names(
        self,
        input_names: Optional[Sequence[str]] = None,
        output_names: Optional[Sequence[str]] = None,
    ) -> "UnitaryChannel":
        inp, out = self.input, self.output
        if input_names is not None:
            inp = composite(*zip(input_names, inp.dims))
        if output_names is not None:
            out = composite(*zip(output_names, out.dims))
        return UnitaryChannel(inp, out, self.matrix)

    # -- causal-structure primitives -----------------------------------------

    def signals(
        self, from_in: Iterable[str], to_out: Iterable[str], tol: float = DEFAULT_TOL
    ) -> bool:
        """True iff the ``to_out`` marginal can depend on the ``from_in`` factor.

        No-signalling means the map X -> Tr_rest[U X U+] annihilates the
        traceless part of the ``from_in`` factor. Concretely, on matrix units
        E_ab (from factor) and E_kl (its complement), the kept marginal of
        U (E_ab x E_kl) U+ must equal delta_ab times the a=b=0 reference,
        entrywise within ``tol``.
        """
        frm = tuple(from_in)
        to = tuple(to_out)
        self.input.subset_positions(frm)
        self.output.subset_positions(to)
        d_from = self.input.select(frm).total_dim
        d_to = self.output.select(to).total_dim
        if d_from == 1 or d_to == 1:
            return False
        g = _grouped(self.matrix, self.output, self.input, to, frm)
        # m[t, u, a, k, b, l] = sum_s U[(t,s),(a,k)] conj(U[(u,s),(b,l)])
        m = np.einsum("tsak,usbl->tuakbl", g, g.conj())
        ref = m[:, :, 0:1, :, 0:1, :]
        delta = np.eye(d_from).reshape(1, 1, d_from, 1, d_from, 1)
        return bool(np.max(np.abs(m - delta * ref)) > tol)

    def factors_as_identity(
        self, idle: Iterable[str], tol: float = DEFAULT_TOL
    ) -> Optional["UnitaryChannel"]:
        """Factor ``W`` with the channel equal to ``W`` tensor identity-on-``idle``.

        Wires are paired by name between input and output. The candidate is the
        idle-index-zero block; it is returned iff the full matrix matches the
        block-tensor-identity pattern within ``tol`` and the block certifies as
        unitary. An exact tensor factor is recovered exactly.
        """
        idle = tuple(idle)
        self.input.subset_positions(idle)
        self.output.subset_positions(idle)
        for name in idle:
            din = self.input.parts[self.input.position(name)].dim
            dout = self.output.parts[self.output.position(name)].dim
            if din != dout:
                raise SpecError(f"idle wire {name!r} has input dim {din} != output dim {dout}")
        comp_in = self.input.complement(idle)
        comp_out = self.output.complement(idle)
        # idle last on both sides, in a shared canonical order
        v = _grouped(self.matrix, self.output, self.input, comp_out, comp_in)
        # v has shape (dc_out, d_idle, dc_in, d_idle)
        w = v[:, 0, :, 0]
        d_idle = v.shape[1]
        pattern = np.einsum("ij,kl->ikjl", w, np.eye(d_idle))
        if np.max(np.abs(v - pattern)) > tol:
            return None
        w_in = self.input.restrict(comp_in)
        w_out = self.output.restrict(comp_out)
        try:
            return UnitaryChannel(w_in, w_out, w, atol=max(tol, DEFAULT_TOL))
        except SpecError:
            return None


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A positive semidefinite unit-trace matrix on a composite system."""

    system: CompositeSystem
    matrix: np.ndarray
    atol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        n = self.system.total_dim
        if m.shape != (n, n):
            raise SpecError(f"state shape {m.shape} does not match system dimension {n}")
        if np.max(np.abs(m - m.conj().T)) > self.atol:
            raise SpecError("state is not Hermitian within tolerance")
        if abs(np.trace(m) - 1.0) > self.atol:
            raise SpecError(f"state trace {np.trace(m):.6f} is not 1 within tolerance")
        if np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)) < -self.atol:
            raise SpecError("state has a negative eigenvalue beyond tolerance")

    @classmethod
    def computational(cls, system: CompositeSystem, values: Sequence[int]) -> "DensityOperator":
        """The basis state |values><values|."""
        idx = system.flatten(values)
        m = np.zeros((system.total_dim, system.total_dim))
        m[idx, idx] = 1.0
        return cls(system, m)

    @classmethod
    def from_vector(cls, system: CompositeSystem, vec: Sequence[complex]) -> "DensityOperator":
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(system, np.outer(v, v.conj()))

    def partial_trace(self, keep: Iterable[str]) -> "DensityOperator":
        """Trace out every wire not named in ``keep``; kept wires stay in system order."""
        keep = tuple(keep)
        self.system.subset_positions(keep)
        keep_set = set(keep)
        t = _as_tensor(self.matrix, self.system.dims, self.system.dims)
        n = len(self.system)
        traced = 0
        for pos in range(n):
            if self.system.names[pos] not in keep_set:
                ax = pos - traced
                rest = n - traced
                t = np.trace(t, axis1=ax, axis2=ax + rest)
                traced += 1
        kept = self.system.restrict(keep)
        d = kept.total_dim
        # floor relaxed to 1e-8: repeated arithmetic may nudge eigenvalues
        return DensityOperator(kept, t.reshape(d, d), atol=max(self.atol, 1e-8))


def partial_trace(rho: DensityOperator, keep: Iterable[str]) -> DensityOperator:
    return rho.partial_trace(keep)


@dataclass(frozen=True, eq=False)
class StateMap:
    """A channel in evaluator form: a closure acting on density matrices.

    Used for the non-reversible legs of a memory decomposition, where a
    unitary representation does not exist.
    """

    input: CompositeSystem
    output: CompositeSystem
    evaluate: Callable[[np.ndarray], np.ndarray]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.input.total_dim,) * 2:
            raise SpecError("state shape does not match the map's input system")
        return self.evaluate(rho)


# -- gate constructors ---------------------------------------------------------


def cnot(
    names: Sequence[str] = ("A", "B"), out_names: Optional[Sequence[str]] = None
) -> UnitaryChannel:
    """Two-qubit controlled-NOT, control on the first wire."""
    inp = composite((names[0], 2), (names[1], 2))
    out = composite(*zip(out_names, (2, 2))) if out_names else inp
    return UnitaryChannel.from_index_permutation(inp, out, (0, 1, 3, 2))


def swap_gate(
    dim: int = 2,
    names: Sequence[str] = ("A", "B"),
    out_names: Optional[Sequence[str]] = None,
) -> UnitaryChannel:
    inp = composite((names[0], dim), (names[1], dim))
    out = composite(*zip(out_names, (dim, dim))) if out_names else inp
    table = [b * dim + a for a in range(dim) for b in range(dim)]
    return UnitaryChannel.from_index_permutation(inp, out, table)


def hadamard(name: str = "A", out_name: Optional[str] = None) -> UnitaryChannel:
    inp = composite((name, 2))
    out = composite((out_name, 2)) if out_name else inp
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    return UnitaryChannel(inp, out, h)


def from_classical(channel) -> UnitaryChannel:
    """Lift a reversible classical channel to the permutation unitary with the same table."""
    return UnitaryChannel.from_index_permutation(channel.input, channel.output, channel.table)


def random_unitary(
    system: CompositeSystem,
    rng: np.random.Generator,
    out_system: Optional[CompositeSystem] = None,
) -> UnitaryChannel:
    """Haar-ish random unitary from the QR decomposition of a complex Gaussian matrix."""
    n = system.total_dim
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return UnitaryChannel(system, out_system or system, q)
