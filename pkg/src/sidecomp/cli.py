"""``sidecomp`` command line.

Exit codes: 0 success (or a unique verdict), 2 a not-unique verdict, 1 any
error, including a verdict that could not be reached.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .commutant import IdempotentFamily, JordanSumModel, Summand, conjugate_idempotent_families
from .errors import ParseError, SidecompError
from .field import (
    OperatorField,
    field_from_json,
    field_to_json,
    matrix_from_json,
    matrix_to_json,
    scalar_from_json,
    scalar_to_json,
    validate_field,
)
from .irreducibility import field_si_check
from .linalg import parse_rational
from .reduction import build_similarity, perturb_superdiagonals
from .report import perturbation_json, emit_report, report_text, run_analysis
from .verify import verify_text

EXIT_OK, EXIT_ERROR, EXIT_NOT_UNIQUE = 0, 1, 2


# ---------------------------------------------------------------------------
# parsing with positions


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _locate(text: str, message: str, nth: int = 0):
    """Position of the quoted token named in ``message``, if it occurs in ``text``."""
    quoted = re.findall(r"'([^']*)'", message)
    for token in reversed(quoted):
        needle = json.dumps(token)
        hits = [m.start() for m in re.finditer(re.escape(needle), text)]
        if len(hits) > nth:
            return _line_col(text, hits[nth])
        if hits:
            return _line_col(text, hits[-1])
    return None, None


def parse_field_text(text: str, source: str = "<input>") -> OperatorField:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    try:
        F = field_from_json(obj)
    except (ValueError, TypeError) as exc:
        line, col = _locate(text, str(exc))
        raise ParseError(f"{source}: {exc}", line, col) from None
    report = validate_field(F)
    if not report.ok:
        problem = report.problems[0]
        nth = 1 if problem.startswith("duplicate cell id") else 0
        line, col = _locate(text, problem, nth)
        extra = f" (+{len(report.problems) - 1} more)" if len(report.problems) > 1 else ""
        raise ParseError(f"{source}: {problem}{extra}", line, col)
    return F


def parse_field_file(path, fmt: str = "json") -> OperatorField:
    if fmt != "json":
        raise ParseError(f"unsupported field format {fmt!r}")
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return parse_field_text(text, str(path))


def _model_from_obj(obj, source: str) -> JordanSumModel:
    if "model" in obj:
        summands = []
        for k, s in enumerate(obj["model"]):
            z = scalar_from_json(s.get("value", "0"), f"{source}: model[{k}].value")
            summands.append(Summand(s["n"], s["multiplicity"], z))
        summands.sort(key=lambda s: (s.spectral_value.sort_key(), -s.block_size))
        return JordanSumModel(tuple(summands))
    if "field" in obj:
        return JordanSumModel.from_field(field_from_json(obj["field"]))
    raise ParseError(f"{source}: family file needs a 'model' or a 'field'")


def parse_family_file(path) -> IdempotentFamily:
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    try:
        model = _model_from_obj(obj, str(path))
        members = [matrix_from_json(m, f"members[{k}]") for k, m in enumerate(obj["members"])]
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    return IdempotentFamily(model, tuple(members))


def _model_json(model: JordanSumModel) -> list:
    return [
        {"n": s.block_size, "multiplicity": s.multiplicity, "value": scalar_to_json(s.spectral_value)}
        for s in model.summands
    ]


# ---------------------------------------------------------------------------
# commands


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _write(args, text: str) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    F = parse_field_file(args.field)
    rep = validate_field(F)
    if args.json:
        _write(args, _dump({"ok": rep.ok, "cells": rep.cell_count, "problems": list(rep.problems)}))
    else:
        _write(args, f"valid: {len(F.cells)} cells, block sizes {F.block_sizes()}\n")
    return EXIT_OK


def cmd_si_check(args) -> int:
    F = parse_field_file(args.field)
    eps = parse_rational(args.eps) if args.eps else 0
    rep = field_si_check(F, eps)
    rows = [
        {
            "id": c.cell_id,
            "n": c.block_size,
            "strongly_irreducible": c.result.strongly_irreducible,
            "reason": c.result.reason,
            "zero_superdiagonal": [list(p) for p in c.zero_superdiagonal],
            "near_singular": [list(p) for p in c.near_singular],
        }
        for c in rep.cells
    ]
    if args.json:
        _write(args, _dump({"cells": rows, "invertible_superdiagonals": rep.hypothesis_ii}))
    else:
        out = [f"{r['id']} (n={r['n']}): {'SI' if r['strongly_irreducible'] else 'not SI'}; {r['reason']}" for r in rows]
        out.append(f"invertible superdiagonals: {'yes' if rep.hypothesis_ii else 'no'}")
        _write(args, "\n".join(out) + "\n")
    return EXIT_OK


def cmd_perturb(args) -> int:
    F = parse_field_file(args.field)
    cert = perturb_superdiagonals(F, args.k)
    doc = {"kind": "perturbation", "field": field_to_json(F)}
    doc.update(perturbation_json(cert))
    doc["perturbed_field"] = field_to_json(cert.perturbed)
    _write(args, _dump(doc))
    return EXIT_OK


def cmd_reduce(args) -> int:
    F = parse_field_file(args.field)
    cert = build_similarity(F)
    doc = {
        "kind": "similarity",
        "field": field_to_json(F),
        "cells": [
            {
                "id": c.cell_id,
                "X": matrix_to_json(c.X),
                "X_inverse": matrix_to_json(c.X_inverse),
                "source": matrix_to_json(c.source),
                "target": matrix_to_json(c.target),
            }
            for c in cert.cells
        ],
        "canonical_field": field_to_json(cert.target),
    }
    _write(args, _dump(doc))
    return EXIT_OK


def _stage_command(stage: str, args) -> int:
    F = parse_field_file(args.field)
    rep = run_analysis(F, perturb=getattr(args, "perturb", None))
    result = rep.stages[stage]
    if args.json:
        _write(args, _dump(result))
    else:
        text = report_text(rep)
        # the requested section only
        block = []
        keep = False
        header = {"commutant": "[commutant]", "invariants": "[invariants]", "verdict": "[verdict]"}[stage]
        for line in text.splitlines():
            if line.startswith("["):
                keep = line.startswith(header)
            if keep:
                block.append(line)
        _write(args, "\n".join(block) + "\n")
    if result["status"] != "ok":
        msg = result.get("error") or result.get("reason") or f"{stage} did not run"
        print(f"sidecomp: {msg}", file=sys.stderr)
        return EXIT_ERROR
    if stage == "verdict":
        return EXIT_OK if result["unique"] else EXIT_NOT_UNIQUE
    return EXIT_OK


def cmd_commutant(args) -> int:
    return _stage_command("commutant", args)


def cmd_k0(args) -> int:
    return _stage_command("invariants", args)


def cmd_decide(args) -> int:
    return _stage_command("verdict", args)


def cmd_sequence(args) -> int:
    F = parse_field_file(args.field)
    rep = run_analysis(F, sequence=args.k_max)
    result = rep.stages["sequence"]
    if args.json:
        _write(args, _dump(result))
    elif result["status"] == "ok":
        lines = [
            f"k={s['k']} bound={s['bound']} hypotheses={'ok' if s['hypotheses_hold'] else 'fail'}" for s in result["steps"]
        ]
        _write(args, "\n".join(lines) + "\n")
    if result["status"] != "ok":
        print(f"sidecomp: {result.get('error') or result.get('reason')}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_analyze(args) -> int:
    F = parse_field_file(args.field)
    rep = run_analysis(F, perturb=args.perturb, sequence=args.sequence, timing=args.timing)
    mode = "structured" if args.format == "json" else "text"
    _write(args, emit_report(rep, mode))
    return rep.exit_code


def cmd_masa_match(args) -> int:
    P = parse_family_file(args.P)
    Q = parse_family_file(args.Q)
    if P.model != Q.model:
        raise SidecompError("the two family files describe different operators")
    fc = conjugate_idempotent_families(P.model, P, Q)
    doc = {
        "kind": "masa-match",
        "model": _model_json(P.model),
        "P": [matrix_to_json(m) for m in P.members],
        "Q": [matrix_to_json(m) for m in Q.members],
        "X": matrix_to_json(fc.X),
        "X_inverse": matrix_to_json(fc.X_inverse),
        "P_atoms": [matrix_to_json(m) for m in fc.P_atoms],
        "Q_atoms": [matrix_to_json(m) for m in fc.Q_atoms],
        "matching": [list(p) for p in fc.matching],
    }
    # dense matrices: keep the certificate compact
    _write(args, json.dumps(doc, separators=(",", ":")) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    text = Path(args.report).read_text(encoding="utf-8")
    try:
        res = verify_text(text)
    except (KeyError, ValueError, TypeError) as exc:
        raise ParseError(f"{args.report}: malformed document: {exc}") from None
    sys.stdout.write(res.summary() if args.verbose or not res.ok else f"verified: {len(res.checks)} checks passed\n")
    return EXIT_OK if res.ok else EXIT_ERROR


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sidecomp", description="Exact strongly irreducible decompositions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, field=True, json_flag=True):
        p = sub.add_parser(name, help=help_)
        if field:
            p.add_argument("field", help="operator field file (JSON)")
        if json_flag:
            p.add_argument("--json", action="store_true", help="structured output")
        p.add_argument("-o", "--output", help="write to this file instead of stdout")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check a field file")
    p = add("si-check", cmd_si_check, "strong irreducibility of every fiber")
    p.add_argument("--eps", help="also flag superdiagonal entries with modulus below this rational")
    p = add("perturb", cmd_perturb, "lift small superdiagonal entries, with a norm certificate", json_flag=False)
    p.add_argument("--k", type=_positive_int, required=True)
    add("reduce", cmd_reduce, "similarity onto the canonical Jordan form", json_flag=False)
    for name, func, help_ in (
        ("commutant", cmd_commutant, "dimension of the commutant of the canonical form"),
        ("k0", cmd_k0, "rank function, V and K0 descriptors"),
        ("decide", cmd_decide, "uniqueness of the strongly irreducible decomposition"),
    ):
        p = add(name, func, help_)
        p.add_argument("--perturb", type=_positive_int, metavar="K", help="perturb with this k first")
    p = add("sequence", cmd_sequence, "approximating sequence A_k for k = 1..K")
    p.add_argument("--k-max", type=_positive_int, required=True)
    p = add("analyze", cmd_analyze, "run the full pipeline", json_flag=False)
    p.add_argument("--perturb", type=_positive_int, metavar="K")
    p.add_argument("--sequence", type=_positive_int, metavar="K_MAX")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--timing", action="store_true", help="include per-stage timings (breaks byte stability)")
    p = add("masa-match", cmd_masa_match, "conjugate one maximal idempotent family onto another", field=False, json_flag=False)
    p.add_argument("P", help="family file for P")
    p.add_argument("Q", help="family file for Q")
    p = add("verify", cmd_verify, "independently recheck a report or certificate", field=False, json_flag=False)
    p.add_argument("report")
    p.add_argument("-v", "--verbose", action="store_true", help="list every check")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SidecompError as exc:
        print(f"sidecomp {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
