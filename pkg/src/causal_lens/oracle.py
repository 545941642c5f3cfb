"""Brute-force verification of the definition-level influence condition.

This module re-decides causal influence straight from its definition: quantify
over interventions on the probed block extended by a bounded environment, and
for each one search exhaustively for a post-evolution intervention that
reproduces its effect locally. It shares no code path with the probe-process
criterion, which makes it a usable oracle for that faster path on small
instances.

Soundness direction: whenever the oracle reports influence, the probe process
must as well. The converse can fail only because the environment bound or the
intervention class was too small, which is reported as budget-limited, not as
an error.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .causal import has_causal_influence
from .classical import ClassicalChannel
from .errors import BudgetError, SpecError

__all__ = [
    "CrossValidationReport",
    "OracleBudget",
    "OracleVerdict",
    "PairComparison",
    "cross_validate",
    "definition_check",
]

INTERVENTION_CLASSES = ("constants", "atoms", "all-functions")

# hard cap on one deterministic-table enumeration; 4^4 interventions on a
# bit probed with a 2-level environment stay comfortably below it
MAX_FUNCTION_TABLES = 4096


@dataclass(frozen=True)
class OracleBudget:
    """Bounds on the quantified-intervention search.

    ``max_env_dim`` bounds the environment dimension (hard limit 4: the
    enumeration is exponential). ``intervention_class`` selects which
    interventions are tried: constant preparations, those plus
    measure-and-prepare atoms, or every deterministic function table.
    The copy-swap intervention is always included when the environment
    matches the probed block, since it decides influence exactly.
    """

    max_env_dim: int = 2
    intervention_class: str = "all-functions"
    exhaustive_inputs: bool = True

    def __post_init__(self) -> None:
        if self.intervention_class not in INTERVENTION_CLASSES:
            raise SpecError(
                f"intervention_class must be one of {INTERVENTION_CLASSES}"
            )
        if self.max_env_dim < 1:
            raise SpecError("max_env_dim must be >= 1")
        if self.max_env_dim > 4:
            raise BudgetError("max_env_dim above 4 is not supported (combinatorial blow-up)")


@dataclass(frozen=True)
class OracleVerdict:
    """Outcome of one definition-level check."""

    influence: bool
    env_dim: Optional[int] = None
    witness_table: Optional[tuple[Optional[int], ...]] = None
    interventions_checked: int = 0

    @property
    def summary(self) -> str:
        return "influence" if self.influence else "no-influence-up-to-budget"


def _tables(m: int) -> Iterator[tuple[int, ...]]:
    if m**m > MAX_FUNCTION_TABLES:
        raise BudgetError(
            f"enumerating {m}^{m} deterministic tables exceeds the cap of {MAX_FUNCTION_TABLES}"
        )
    return itertools.product(range(m), repeat=m)


def _interventions(
    budget: OracleBudget, env_dim: int, d_from: int
) -> Iterator[tuple[Optional[int], ...]]:
    m = env_dim * d_from
    if budget.intervention_class == "constants":
        for j in range(m):
            yield tuple([j] * m)
    elif budget.intervention_class == "atoms":
        for j in range(m):
            yield tuple([j] * m)
        for i in range(m):
            for j in range(m):
                table: list[Optional[int]] = [None] * m
                table[i] = j
                yield tuple(table)
    else:
        for table in _tables(m):
            yield table
        for i in range(m):
            for j in range(m):
                atom: list[Optional[int]] = [None] * m
                atom[i] = j
                yield tuple(atom)
    if env_dim == d_from:
        yield tuple(a * d_from + e for e in range(d_from) for a in range(d_from))


def definition_check(
    u: ClassicalChannel,
    from_in: Iterable[str],
    to_out: Iterable[str],
    budget: OracleBudget,
) -> OracleVerdict:
    """Decide influence by quantifying over interventions within the budget.

    For each intervention A on (environment, probed block), search every
    candidate A' on (environment, non-target outputs) for the identity
    "intervene then evolve equals evolve then intervene locally", comparing the
    two sides pointwise over all inputs. An intervention with no matching
    candidate witnesses influence.
    """
    frm = tuple(n for n in u.input.names if n in set(from_in))
    u.input.subset_positions(frm)
    to = tuple(n for n in u.output.names if n in set(to_out))
    u.output.subset_positions(to)

    from_sys = u.input.select(frm)
    d_from = from_sys.total_dim
    in_from_pos = [u.input.position(n) for n in frm]
    rest_names = u.output.complement(to)
    rest_sys = u.output.restrict(rest_names)
    to_sys = u.output.restrict(to)
    d_rest, d_to = rest_sys.total_dim, to_sys.total_dim
    rest_pos = [u.output.position(n) for n in rest_names]
    to_pos = [u.output.position(n) for n in to]

    n_inputs = u.input.total_dim
    if budget.exhaustive_inputs:
        input_points = range(n_inputs)
    else:
        input_points = range(0, n_inputs, max(1, n_inputs // 64))

    # static data: per input, the from-digit, and the output split of u(x)
    from_digit = []
    out_split = []
    for x in range(n_inputs):
        vals = u.input.unflatten(x)
        from_digit.append(from_sys.flatten([vals[p] for p in in_from_pos]))
        z = u.output.unflatten(u.table[x])
        out_split.append(
            (rest_sys.flatten([z[p] for p in rest_pos]), to_sys.flatten([z[p] for p in to_pos]))
        )
    # per (input, replacement from-digit): the evolved output split
    def evolved(x: int, a2: int) -> tuple[int, int]:
        vals = list(u.input.unflatten(x))
        for p, v in zip(in_from_pos, from_sys.unflatten(a2)):
            vals[p] = v
        z = u.output.unflatten(u.table[u.input.flatten(vals)])
        return (
            rest_sys.flatten([z[p] for p in rest_pos]),
            to_sys.flatten([z[p] for p in to_pos]),
        )

    checked = 0
    for env_dim in range(1, budget.max_env_dim + 1):
        for table in _interventions(budget, env_dim, d_from):
            checked += 1
            # left side: intervene on (env, from block), then evolve
            lhs: dict[tuple[int, int], Optional[tuple[int, int, int]]] = {}
            for e in range(env_dim):
                for x in input_points:
                    hit = table[e * d_from + from_digit[x]]
                    if hit is None:
                        lhs[(e, x)] = None
                    else:
                        e2, a2 = divmod(hit, d_from)
                        rest, tgt = evolved(x, a2)
                        lhs[(e, x)] = (e2, rest, tgt)
            if not _exists_local_match(
                lhs, table, env_dim, d_rest, d_to, input_points, out_split
            ):
                return OracleVerdict(
                    influence=True,
                    env_dim=env_dim,
                    witness_table=table,
                    interventions_checked=checked,
                )
    return OracleVerdict(influence=False, interventions_checked=checked)


def _candidate_locals(
    deterministic: bool, m: int
) -> Iterator[tuple[Optional[int], ...]]:
    if deterministic:
        yield from _tables(m)
    else:
        for i in range(m):
            for j in range(m):
                table: list[Optional[int]] = [None] * m
                table[i] = j
                yield tuple(table)


def _exists_local_match(
    lhs, table, env_dim, d_rest, d_to, input_points, out_split
) -> bool:
    """Search for a post-evolution intervention on (env, non-target outputs)."""
    m = env_dim * d_rest
    deterministic = all(v is not None for v in table)
    for cand in _candidate_locals(deterministic, m):
        ok = True
        for e in range(env_dim):
            for x in input_points:
                rest0, tgt0 = out_split[x]
                hit = cand[e * d_rest + rest0]
                rhs = None
                if hit is not None:
                    e2, rest2 = divmod(hit, d_rest)
                    rhs = (e2, rest2, tgt0)
                if lhs[(e, x)] != rhs:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False


@dataclass(frozen=True)
class PairComparison:
    from_wire: str
    to_wire: str
    oracle_influence: bool
    tprocess_influence: bool

    @property
    def status(self) -> str:
        if self.oracle_influence == self.tprocess_influence:
            return "agree"
        if self.tprocess_influence and not self.oracle_influence:
            return "budget-limited"
        return "soundness-violation"


@dataclass(frozen=True)
class CrossValidationReport:
    pairs: tuple[PairComparison, ...]

    @property
    def sound(self) -> bool:
        """No pair where the oracle finds influence the probe process misses."""
        return all(p.status != "soundness-violation" for p in self.pairs)

    @property
    def full_agreement(self) -> bool:
        return all(p.status == "agree" for p in self.pairs)

    def to_dict(self) -> dict:
        return {
            "pairs": [
                {
                    "from": p.from_wire,
                    "to": p.to_wire,
                    "oracle": p.oracle_influence,
                    "t_process": p.tprocess_influence,
                    "status": p.status,
                }
                for p in self.pairs
            ],
            "sound": self.sound,
            "full_agreement": self.full_agreement,
        }


def cross_validate(u: ClassicalChannel, budget: OracleBudget) -> CrossValidationReport:
    """Compare oracle and probe-process verdicts on every single-wire pair.

    A soundness violation (oracle influence, probe process none) indicates an
    implementation bug; budget-limited disagreements are expected when the
    environment bound is small.
    """
    if not isinstance(u, ClassicalChannel):
        raise SpecError("the oracle only covers the classical model")
    if len(u.input) > 3 or any(d > 3 for d in u.input.dims):
        raise SpecError("cross_validate is desk-scale only: at most 3 wires of dim <= 3")
    pairs = []
    for i in u.input.names:
        for j in u.output.names:
            verdict = definition_check(u, [i], [j], budget)
            fast = has_causal_influence(u, [i], [j])
            pairs.append(
                PairComparison(
                    from_wire=i,
                    to_wire=j,
                    oracle_influence=verdict.influence,
                    tprocess_influence=fast,
                )
            )
    return CrossValidationReport(pairs=tuple(pairs))
