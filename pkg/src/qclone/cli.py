"""Command-line interface: verify, synthesize, simulate, emit-matrix.

Exit codes are a stable contract: 0 pass, 1 check failure, 2 input error,
3 empty post-selection. All numbers print with 17 significant digits;
``--json`` switches reports to JSON lines.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import cloning, simulator, synthesis
from .gates import parse_circuit, serialize_circuit
from .linalg import (
    TAU_UNITARY,
    matrix_from_text,
    matrix_to_text,
    unitarity_residual,
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _source_matrix(name: str):
    if name == "paper-u":
        return cloning.cloning_unitary()
    if name == "oracle-u":
        return cloning.oracle_cloning_unitary()
    if name == "paper-v":
        return cloning.mixing_matrix()
    return None


def cmd_verify(args) -> int:
    tol_v = args.tolerance if args.tolerance is not None else TAU_UNITARY
    tol_u = args.tolerance if args.tolerance is not None else 1e-9
    tol_clone = args.tolerance if args.tolerance is not None else cloning.TAU_CLONE
    task = cloning.default_task()
    records = []

    def check(name, value, limit):
        records.append({"check": name, "value": float(value),
                        "limit": float(limit), "pass": bool(abs(value) <= limit)})

    def report(name, value, expected, limit):
        records.append({"check": name, "value": float(value), "expected": float(expected),
                        "limit": float(limit), "pass": bool(abs(value - expected) <= limit)})

    check("V unitarity residual", unitarity_residual(cloning.mixing_matrix()), tol_v)

    sources = []
    if not args.skip_paper_u:
        sources.append(("paper-u", cloning.cloning_unitary()))
    sources.append(("oracle-u", cloning.oracle_cloning_unitary(task)))

    for name, u in sources:
        check(f"{name} unitarity residual", unitarity_residual(u), tol_u)
        verdict = cloning.verify_cloning_condition(u, task)
        for lab, res in zip(cloning.STATE_LABELS, verdict.residuals):
            check(f"{name} cloning residual {lab}", res, tol_clone)

    u_run = sources[0][1]
    for idx, lab in enumerate(cloning.STATE_LABELS):
        psi = u_run @ cloning.task_input(task, idx)
        p, succ = simulator.postselect(psi, task.flag_qubits, task.success_outcome)
        report(f"{lab} success", p, task.gammas[idx], tol_clone)
        fid = simulator.fidelity(succ, cloning.success_target(task, idx)) if succ is not None else 0.0
        report(f"{lab} clone fidelity", fid, 1.0, tol_clone)
        result = simulator.clone_experiment(lab, engine="matrix", task=task) if not args.skip_paper_u else None
        if result is not None:
            report(f"{lab} failure AB |0000> weight", abs(result.failure_ab_state[0]) ** 2, 1.0, tol_clone)
            report(f"{lab} probability sum", result.success_probability + result.failure_probability, 1.0, tol_clone)

    ok = all(r["pass"] for r in records)
    if args.json:
        for rec in records:
            print(json.dumps(rec))
    else:
        width = max(len(r["check"]) for r in records)
        for rec in records:
            mark = "ok" if rec["pass"] else "FAIL"
            print(f"{rec['check']:<{width}}  {_fmt(rec['value'])}  {mark}")
        print(f"verify: {'all checks passed' if ok else 'FAILED'}")
    if not ok:
        failing = next(r["check"] for r in records if not r["pass"])
        print(f"failed check: {failing}", file=sys.stderr)
        return 1
    return 0


def cmd_synthesize(args) -> int:
    if args.matrix is not None:
        try:
            with open(args.matrix) as fh:
                u = matrix_from_text(fh.read())
        except (OSError, ValueError) as e:
            print(f"cannot read matrix: {e}", file=sys.stderr)
            return 2
    else:
        u = _source_matrix(args.source) if args.source else None
        if u is None:
            print("need a source: paper-u, oracle-u, or --matrix <file>", file=sys.stderr)
            return 2
    res = unitarity_residual(u)
    if res > TAU_UNITARY:
        print(f"input is not unitary: residual {_fmt(res)} exceeds {TAU_UNITARY:g}", file=sys.stderr)
        return 2

    try:
        if args.matrix is None and args.source == "paper-u":
            circuit, report = simulator.synthesized_cloning_network()
        else:
            circuit, report = synthesis.synthesize(u)
    except synthesis.SynthesisError as e:
        print(f"synthesis failed: {e}", file=sys.stderr)
        return 1

    text = serialize_circuit(circuit)
    report_stream = sys.stdout
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        report_stream = sys.stderr

    records = [
        {"stage": s.stage, "count": s.count, "residual": s.residual}
        for s in report.stages
    ]
    for rec in records:
        if args.json:
            report_stream.write(json.dumps(rec) + "\n")
        else:
            report_stream.write(f"stage {rec['stage']}: count {rec['count']}, residual {_fmt(rec['residual'])}\n")

    tol = args.tolerance if args.tolerance is not None else synthesis.TOL_ELEMENTARY
    if report.max_residual > tol:
        print(f"final residual {_fmt(report.max_residual)} exceeds {tol:g}", file=sys.stderr)
        return 1
    return 0


def _parse_postselect(spec: str):
    lhs, _, rhs = spec.partition("=")
    if not rhs:
        raise ValueError(f"expected '<q1>,<q2>,...=<bits>', got {spec!r}")
    qubits = [int(tok.strip().lstrip("qQ")) for tok in lhs.split(",") if tok.strip()]
    bits = [int(ch) for ch in rhs.strip()]
    if len(qubits) != len(bits) or not all(b in (0, 1) for b in bits):
        raise ValueError(f"qubit list and outcome bits disagree in {spec!r}")
    return qubits, bits


def cmd_simulate(args) -> int:
    try:
        with open(args.circuit) as fh:
            circuit = parse_circuit(fh.read())
    except (OSError, ValueError) as e:
        print(f"cannot read circuit: {e}", file=sys.stderr)
        return 2

    if args.input is not None:
        try:
            psi = cloning.input_state(args.input)
        except ValueError as e:
            print(str(e), file=sys.stderr)
            return 2
    elif args.state is not None:
        try:
            with open(args.state) as fh:
                psi = simulator.state_from_text(fh.read())
        except (OSError, ValueError) as e:
            print(f"cannot read state: {e}", file=sys.stderr)
            return 2
    else:
        print("need --input <label> or --state <file>", file=sys.stderr)
        return 2

    if psi.shape[0] != 1 << circuit.num_qubits:
        print(
            f"state has {psi.shape[0]} amplitudes but the circuit expects {1 << circuit.num_qubits}",
            file=sys.stderr,
        )
        return 2

    out = simulator.run_circuit(circuit, psi)

    if args.postselect:
        try:
            qubits, bits = _parse_postselect(args.postselect)
        except ValueError as e:
            print(str(e), file=sys.stderr)
            return 2
        prob, state = simulator.postselect(out, qubits, bits)
        if state is None:
            print(f"post-selection is empty: probability {_fmt(prob)}", file=sys.stderr)
            return 3
        if args.json:
            print(json.dumps({"probability": prob}))
        else:
            print(f"probability {_fmt(prob)}")
        out = state
    sys.stdout.write(simulator.state_to_text(out))
    return 0


def cmd_emit_matrix(args) -> int:
    u = _source_matrix(args.source)
    if u is None:
        print(f"unknown source {args.source!r}", file=sys.stderr)
        return 2
    text = matrix_to_text(u)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qclone", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run all construction and experiment checks")
    pv.add_argument("--tolerance", type=float, default=None, help="override every check tolerance")
    pv.add_argument("--skip-paper-u", action="store_true", help="verify only the oracle construction")
    pv.add_argument("--json", action="store_true")
    pv.set_defaults(func=cmd_verify)

    ps = sub.add_parser("synthesize", help="lower a unitary to CNOT + single-qubit gates")
    ps.add_argument("source", nargs="?", choices=["paper-u", "oracle-u"], default=None)
    ps.add_argument("--matrix", help="matrix text file to synthesize instead of a named source")
    ps.add_argument("-o", "--output", help="write the circuit here (default: stdout)")
    ps.add_argument("--tolerance", type=float, default=None, help="final residual bound")
    ps.add_argument("--json", action="store_true")
    ps.set_defaults(func=cmd_synthesize)

    pm = sub.add_parser("simulate", help="run a circuit file on an input state")
    pm.add_argument("circuit")
    pm.add_argument("--input", choices=list(cloning.STATE_LABELS), help="prepared cloning input")
    pm.add_argument("--state", help="state text file")
    pm.add_argument("--postselect", help="e.g. 4,5=00")
    pm.add_argument("--json", action="store_true")
    pm.set_defaults(func=cmd_simulate)

    pe = sub.add_parser("emit-matrix", help="dump a named matrix in text format")
    pe.add_argument("source", choices=["paper-u", "paper-v", "oracle-u"])
    pe.add_argument("-o", "--output")
    pe.set_defaults(func=cmd_emit_matrix)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
