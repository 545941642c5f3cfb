"""Command-line surface: parse channel/rule files, run analyses, emit reports.

Exit codes: 0 success, 1 parse or usage error, 2 internal consistency
violation (a bug, never expected), 3 budget exceeded.

File formats (JSON throughout):

* channel file: ``{"model": "classical"|"quantum", "inputs": [{"name", "dim"}...],
  "outputs": [...], "data": ...}`` where ``data`` is a permutation array of
  joint indices (classical) or a row-major matrix of ``[re, im]`` pairs
  (quantum).
* automaton rule file: ``{"cell_dim": d, "layers": [[{"gate": builtin-or-path,
  "at": index}, ...], ...]}`` with builtins cnot, swap, identity, hadamard.

``CAUSAL_LENS_MAX_DIM`` caps the joint dimension (default 4096 classical,
64 quantum).
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import classical as cl
from . import quantum as qm
from .automata import build_ring, cone_growth, neighbourhood_map
from .causal import (
    check_interaction_without_disturbance,
    hierarchy_report,
    neighbourhood,
)
from .classical import ClassicalChannel
from .errors import BudgetError, ConsistencyError, SpecError
from .oracle import OracleBudget, cross_validate
from .quantum import DEFAULT_TOL, UnitaryChannel
from .systems import composite

MAX_DIM_ENV = "CAUSAL_LENS_MAX_DIM"


def _max_dim(model: str) -> int:
    raw = os.environ.get(MAX_DIM_ENV)
    if raw is not None:
        try:
            return int(raw)
        except ValueError:
            raise SpecError(f"{MAX_DIM_ENV} must be an integer, got {raw!r}") from None
    return 4096 if model == "classical" else 64


# -- file loading -----------------------------------------------------------------


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise SpecError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None


def _system_from(path: str, key: str, entries) -> "composite":
    try:
        return composite(*((e["name"], int(e["dim"])) for e in entries))
    except (TypeError, KeyError):
        raise SpecError(f"{path}: {key} must be a list of {{name, dim}} objects") from None


def load_channel_file(
    path: str, model_override: Optional[str] = None, tol: float = DEFAULT_TOL
):
    """Parse and certify a channel file, optionally coercing it to the other model."""
    data = _load_json(path)
    for key in ("model", "inputs", "outputs", "data"):
        if key not in data:
            raise SpecError(f"{path}: missing key {key!r}")
    declared = data["model"]
    if declared not in ("classical", "quantum"):
        raise SpecError(f"{path}: model must be 'classical' or 'quantum'")
    model = model_override or declared
    inputs = _system_from(path, "inputs", data["inputs"])
    outputs = _system_from(path, "outputs", data["outputs"])
    if inputs.total_dim > _max_dim(model):
        raise BudgetError(
            f"{path}: joint dimension {inputs.total_dim} exceeds the {model} cap"
        )
    try:
        if declared == "classical":
            chan = ClassicalChannel(inputs, outputs, tuple(data["data"]))
            return qm.from_classical(chan) if model == "quantum" else chan
        matrix = np.array(
            [[complex(re, im) for re, im in row] for row in data["data"]], dtype=complex
        )
        chan = UnitaryChannel(inputs, outputs, matrix, atol=tol)
        if model == "classical":
            table = _permutation_from_matrix(chan.matrix, tol)
            if table is None:
                raise SpecError(
                    f"{path}: matrix is not a permutation; cannot force --model classical"
                )
            return ClassicalChannel(inputs, outputs, table)
        return chan
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"{path}: malformed data: {exc}") from None


def _permutation_from_matrix(matrix: np.ndarray, tol: float):
    n = matrix.shape[0]
    table = []
    for x in range(n):
        col = matrix[:, x]
        hits = np.nonzero(np.abs(col) > tol)[0]
        if len(hits) != 1 or abs(col[hits[0]] - 1.0) > tol:
            return None
        table.append(int(hits[0]))
    return tuple(table)


_BUILTIN_ARITY = {"cnot": 2, "swap": 2, "identity": 1, "hadamard": 1}


def _builtin_gate(name: str, model: str, cell_dim: int):
    if name == "cnot":
        if model == "classical":
            return cl.cnot(dim=cell_dim)
        return qm.from_classical(cl.cnot(dim=cell_dim))
    if name == "swap":
        gate = cl.swap_gate(dim=cell_dim)
        return gate if model == "classical" else qm.from_classical(gate)
    if name == "identity":
        sys1 = composite(("A", cell_dim))
        cls = ClassicalChannel if model == "classical" else UnitaryChannel
        return cls.identity(sys1)
    if name == "hadamard":
        if model != "quantum":
            raise SpecError("the hadamard builtin needs --model quantum")
        if cell_dim != 2:
            raise SpecError("the hadamard builtin needs cell_dim 2")
        return qm.hadamard()
    raise SpecError(f"unknown builtin gate {name!r}; known: {sorted(_BUILTIN_ARITY)}")


def load_rule_file(path: str, model: str, tol: float = DEFAULT_TOL):
    """Parse an automaton rule file into (cell_dim, layers)."""
    data = _load_json(path)
    for key in ("cell_dim", "layers"):
        if key not in data:
            raise SpecError(f"{path}: missing key {key!r}")
    cell_dim = int(data["cell_dim"])
    layers = []
    for layer in data["layers"]:
        built = []
        for entry in layer:
            try:
                gate_ref, at = entry["gate"], int(entry["at"])
            except (TypeError, KeyError):
                raise SpecError(f"{path}: each gate entry needs 'gate' and 'at'") from None
            if gate_ref in _BUILTIN_ARITY:
                gate = _builtin_gate(gate_ref, model, cell_dim)
            else:
                gate_path = str(Path(path).parent / gate_ref) if not os.path.isabs(gate_ref) else gate_ref
                gate = load_channel_file(gate_path, model_override=model, tol=tol)
            built.append((gate, at))
        layers.append(built)
    return cell_dim, layers


# -- rendering ---------------------------------------------------------------------


def _yn(flag: bool) -> str:
    return "yes" if flag else "no"


def _render_matrix(title: str, rows, cols, cells) -> list[str]:
    if not rows or not cols:
        return [title, "  (no wires)"]
    width = max([len(c) for c in cols] + [3]) + 2
    head = " " * max(len(r) for r in rows) + "  " + "".join(c.ljust(width) for c in cols)
    lines = [title, head]
    for r in rows:
        line = r.ljust(max(len(x) for x in rows)) + "  "
        line += "".join(_yn(cells[r][c]).ljust(width) for c in cols)
        lines.append(line)
    return lines


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        if getattr(args, "timestamps", False):
            print(f"generated at {datetime.datetime.now().isoformat()}")
        print("\n".join(text_lines))


# -- commands ----------------------------------------------------------------------


def cmd_analyze(args) -> int:
    u = load_channel_file(args.file, args.model, args.tol)
    ins, outs = list(u.input.names), list(u.output.names)
    causal = {}
    signalling = {}
    hoods = {}
    for i in ins:
        hood = neighbourhood(u, [i], args.tol)
        hoods[i] = [o for o in outs if o in hood]
        causal[i] = {o: o in hood for o in outs}
        signalling[i] = {o: u.signals([i], [o], args.tol) for o in outs}
    for i in ins:
        for o in outs:
            if signalling[i][o] and not causal[i][o]:
                raise ConsistencyError(f"signalling without causal influence at ({i}, {o})")
    payload = {
        "file": args.file,
        "model": "classical" if isinstance(u, ClassicalChannel) else "quantum",
        "inputs": ins,
        "outputs": outs,
        "causal": causal,
        "signalling": signalling,
        "neighbourhoods": hoods,
        "consistent": True,
    }
    lines = [f"model: {payload['model']}   wires: {','.join(ins)} -> {','.join(outs)}"]
    lines += _render_matrix("causal influence", ins, outs, causal)
    lines += _render_matrix("signalling", ins, outs, signalling)
    lines.append("neighbourhoods")
    for i in ins:
        lines.append(f"  {i} -> {','.join(hoods[i]) if hoods[i] else '(none)'}")
    lines.append("consistent: yes")
    _emit(args, payload, lines)
    return 0


def _names_list(raw: str) -> list[str]:
    names = [part.strip() for part in raw.split(",") if part.strip()]
    if not names:
        raise SpecError("expected a comma-separated list of wire names")
    return names


def cmd_hierarchy(args) -> int:
    u = load_channel_file(args.file, args.model, args.tol)
    rep = hierarchy_report(u, _names_list(args.from_in), _names_list(args.to_out), args.tol)
    payload = {"file": args.file, **rep.to_dict()}
    lines = [
        f"from {','.join(rep.from_in)} to {','.join(rep.to_out)}:",
        f"  causal influence:    {_yn(rep.causal_influence)}",
        f"  memory decomposable: {_yn(rep.memory_decomposable)}",
        f"  signalling:          {_yn(rep.signalling)}",
        f"  consistent:          {_yn(rep.consistent)}",
    ]
    if rep.witness is not None:
        lines.append(f"  witness: {rep.witness.kind} ({json.dumps(rep.witness.detail, sort_keys=True)})")
    _emit(args, payload, lines)
    if not rep.consistent:
        raise ConsistencyError("hierarchy implication chain violated")
    return 0


def cmd_oracle(args) -> int:
    u = load_channel_file(args.file, args.model, args.tol)
    if not isinstance(u, ClassicalChannel):
        raise SpecError("the oracle covers the classical model only")
    budget = OracleBudget(max_env_dim=args.env_dim, intervention_class=args.intervention_class)
    report = cross_validate(u, budget)
    payload = {
        "file": args.file,
        "budget": {"env_dim": args.env_dim, "class": args.intervention_class},
        **report.to_dict(),
    }
    lines = [f"oracle cross-validation (env dim {args.env_dim}, class {args.intervention_class})"]
    for p in report.pairs:
        lines.append(
            f"  {p.from_wire} -> {p.to_wire}: oracle {_yn(p.oracle_influence)}, "
            f"probe {_yn(p.tprocess_influence)} [{p.status}]"
        )
    lines.append(f"sound: {_yn(report.sound)}   full agreement: {_yn(report.full_agreement)}")
    _emit(args, payload, lines)
    if not report.sound:
        raise ConsistencyError("oracle found influence the probe process missed")
    return 0


def cmd_ca(args) -> int:
    cell_dim, layers = load_rule_file(args.rulefile, args.model, args.tol)
    auto = build_ring(
        layers, args.cells, cell_dim, model=args.model, max_dim=_max_dim(args.model)
    )
    entries = neighbourhood_map(auto, args.steps, args.tol)
    cones = cone_growth(auto, args.steps, args.tol)
    payload = {
        "file": args.rulefile,
        "model": args.model,
        "cells": args.cells,
        "cell_dim": cell_dim,
        "steps": args.steps,
        "neighbourhoods": {
            e.cell: {"causal": sorted(e.causal), "signalling": sorted(e.signalling)}
            for e in entries
        },
        "cones": [
            {
                "step": row.step,
                "causal_sizes": list(row.causal_sizes),
                "signalling_sizes": list(row.signalling_sizes),
            }
            for row in cones
        ],
    }
    lines = [f"{args.model} ring, {args.cells} cells of dim {cell_dim}, {args.steps} step(s)"]
    for e in entries:
        lines.append(
            f"  {e.cell}: causal {{{','.join(sorted(e.causal))}}} "
            f"signalling {{{','.join(sorted(e.signalling))}}}"
        )
    lines.append("cone sizes per step (causal | signalling)")
    for row in cones:
        lines.append(
            f"  step {row.step}: {list(row.causal_sizes)} | {list(row.signalling_sizes)}"
        )
    _emit(args, payload, lines)
    return 0


def cmd_niwd(args) -> int:
    u = load_channel_file(args.file, args.model, args.tol)
    acting = _names_list(args.from_in) if args.from_in else None
    res = check_interaction_without_disturbance(u, acting, args.tol)
    payload = {"file": args.file, **res.to_dict()}
    lines = [
        f"acting block: {','.join(res.acting)}   bystander: {','.join(res.bystander)}",
        f"  premise (discard acting leaves bystander alone): {_yn(res.premise_holds)}",
        f"  factorizes as local action x identity:           {_yn(res.factorizes)}",
        f"verdict: {res.verdict}",
    ]
    if res.forced_influence is not None:
        lines.append(f"forced causal influence onto bystander confirmed: {_yn(res.forced_influence)}")
    _emit(args, payload, lines)
    if res.forced_influence is False:
        raise ConsistencyError("premise held without factorization, yet no causal influence")
    return 0


# -- entry point -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped onto the parse-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(prog="causal-lens", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_model=True):
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--timestamps", action="store_true", help="add a timestamp in text mode")
        if with_model:
            p.add_argument("--model", choices=("classical", "quantum"), default=None)

    p = sub.add_parser("analyze", help="pairwise causal and signalling matrices")
    p.add_argument("file")
    common(p)
    p.set_defaults(run=cmd_analyze)

    p = sub.add_parser("hierarchy", help="causal / memory / signalling triple for one pair")
    p.add_argument("file")
    p.add_argument("--from", dest="from_in", required=True, metavar="NAMES")
    p.add_argument("--to", dest="to_out", required=True, metavar="NAMES")
    common(p)
    p.set_defaults(run=cmd_hierarchy)

    p = sub.add_parser("oracle", help="brute-force cross-validation of the probe process")
    p.add_argument("file")
    p.add_argument("--env-dim", type=int, default=2)
    p.add_argument(
        "--class",
        dest="intervention_class",
        choices=("constants", "atoms", "all-functions"),
        default="all-functions",
    )
    common(p)
    p.set_defaults(run=cmd_oracle)

    p = sub.add_parser("ca", help="ring automaton neighbourhoods and cone growth")
    p.add_argument("rulefile")
    p.add_argument("--cells", type=int, required=True)
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--timestamps", action="store_true")
    p.add_argument("--model", choices=("classical", "quantum"), default="classical")
    p.set_defaults(run=cmd_ca)

    p = sub.add_parser("niwd", help="no-interaction-without-disturbance classification")
    p.add_argument("file")
    p.add_argument("--from", dest="from_in", default=None, metavar="NAMES")
    common(p)
    p.set_defaults(run=cmd_niwd)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except ConsistencyError as exc:
        print(f"internal consistency violation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
