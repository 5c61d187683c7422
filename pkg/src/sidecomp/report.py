"""The analysis pipeline and its two renderings.

``run_analysis`` walks validate, SI check, hypotheses, optional
perturbation and approximating sequence, reduction, commutant, invariants
and the verdict.  A stage whose preconditions fail is recorded as skipped
with the reason, and everything downstream of it is skipped too.  The
structured rendering carries every certificate with exact rational strings
so that ``verify`` can recheck it without trusting this module.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable

from .commutant import JordanSumModel, commutant_dimension_formula, structured_commutant_basis, sylvester_kernel
from .errors import SidecompError
from .field import (
    OperatorField,
    field_to_json,
    matrix_to_json,
    multiplicity_profile,
    scalar_to_json,
    validate_field,
)
from .invariants import compute_V_K0, decide_uniqueness
from .irreducibility import field_si_check
from .reduction import approximation_sequence, is_canonical, perturb_superdiagonals, reduce_field_to_canonical

REPORT_FORMAT = "sidecomp-report/1"
STAGES = ("validate", "si", "hypotheses", "perturbation", "sequence", "reduction", "commutant", "invariants", "verdict")

# the Sylvester oracle is quadratic in the model dimension; skip it above this
ORACLE_MAX_DIM = 16

OK, SKIPPED, ERROR, NOT_REQUESTED = "ok", "skipped", "error", "not-requested"


@dataclass
class AnalysisReport:
    field: OperatorField
    flags: dict
    stages: dict = dc_field(default_factory=dict)
    timing: dict | None = None

    def status(self, stage: str) -> str:
        return self.stages[stage]["status"]

    @property
    def verdict(self) -> bool | None:
        v = self.stages.get("verdict", {})
        return v.get("unique") if v.get("status") == OK else None

    @property
    def exit_code(self) -> int:
        if self.verdict is None:
            return 1
        return 0 if self.verdict else 2

    def to_json(self) -> dict:
        out = {
            "format": REPORT_FORMAT,
            "field": field_to_json(self.field),
            "flags": dict(self.flags),
        }
        for name in STAGES:
            out[name] = self.stages[name]
        if self.timing is not None:
            out["timing"] = self.timing
        return out


def _profile_json(F: OperatorField) -> list:
    return [
        {
            "n": e.block_size,
            "value": scalar_to_json(e.spectral_value),
            "multiplicity": e.multiplicity.to_json(),
            "total_weight": str(e.total_weight),
            "cells": list(e.cell_ids),
        }
        for e in multiplicity_profile(F).entries
    ]


def _pos_key(i: int, j: int) -> str:
    return f"{i},{j}"


def perturbation_json(cert) -> dict:
    return {
        "k": cert.k,
        "bound": str(cert.bound),
        "bound_below_1_over_k": cert.bound < Fraction(1, cert.k),
        "per_block": {str(n): str(b) for n, b in cert.detail.per_block.items()},
        "per_position": {
            str(n): {_pos_key(i, j): str(u) for (i, j), u in pos.items()} for n, pos in cert.detail.per_position.items()
        },
        "replaced": [[cid, i, j] for cid, i, j in cert.replaced],
    }


def _stage_validate(rep: AnalysisReport, ctx: dict) -> dict:
    v = validate_field(rep.field)
    if not v.ok:
        return {"status": ERROR, "problems": list(v.problems)}
    return {
        "status": OK,
        "cells": v.cell_count,
        "simple_multiplicity": {str(n): s for n, s in v.simple_multiplicity.items()},
    }


def _stage_si(rep: AnalysisReport, ctx: dict) -> dict:
    report = field_si_check(ctx["working"])
    return {
        "status": OK,
        "cells": [
            {
                "id": c.cell_id,
                "n": c.block_size,
                "strongly_irreducible": c.result.strongly_irreducible,
                "reason": c.result.reason,
                "zero_superdiagonal": [list(p) for p in c.zero_superdiagonal],
            }
            for c in report.cells
        ],
    }


def _stage_hypotheses(rep: AnalysisReport, ctx: dict) -> dict:
    F = ctx["working"]
    si = field_si_check(F)
    ctx["hyp_ii"] = si.hypothesis_ii
    profile = multiplicity_profile(F)
    ctx["bounded"] = not profile.has_infinite()
    return {
        "status": OK,
        "simple_multiplicity": True,
        "invertible_superdiagonals": si.hypothesis_ii,
        "bounded_multiplicity": ctx["bounded"],
        "profile": _profile_json(F),
    }


def _stage_perturbation(rep: AnalysisReport, ctx: dict) -> dict:
    k = rep.flags.get("perturb")
    if k is None:
        return {"status": NOT_REQUESTED}
    cert = perturb_superdiagonals(rep.field, k)
    if not cert.verify():
        raise SidecompError("perturbation certificate failed self-check")
    ctx["working"] = cert.perturbed
    ctx["hyp_ii"] = field_si_check(cert.perturbed).hypothesis_ii
    out = {"status": OK}
    out.update(perturbation_json(cert))
    out["invertible_superdiagonals_after"] = ctx["hyp_ii"]
    out["perturbed_field"] = field_to_json(cert.perturbed)
    return out


def _stage_sequence(rep: AnalysisReport, ctx: dict) -> dict:
    k_max = rep.flags.get("sequence")
    if k_max is None:
        return {"status": NOT_REQUESTED}
    steps = approximation_sequence(rep.field, k_max)
    out_steps = []
    for s in steps:
        d = perturbation_json(s.certificate)
        d["hypotheses_hold"] = s.hypotheses_hold
        out_steps.append(d)
    return {"status": OK, "k_max": k_max, "steps": out_steps}


def _stage_reduction(rep: AnalysisReport, ctx: dict) -> dict:
    F = ctx["working"]
    if not ctx.get("hyp_ii"):
        return {
            "status": SKIPPED,
            "reason": "a superdiagonal entry vanishes; rerun with --perturb K to apply the perturbation step first",
        }
    cert, canonical = reduce_field_to_canonical(F)
    ctx["canonical"] = canonical
    return {
        "status": OK,
        "already_canonical": is_canonical(F),
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
        "canonical_field": field_to_json(canonical),
    }


def _stage_commutant(rep: AnalysisReport, ctx: dict) -> dict:
    canonical = ctx.get("canonical")
    if canonical is None:
        return {"status": SKIPPED, "reason": "no canonical field (reduction did not run)"}
    if not ctx.get("bounded"):
        return {"status": SKIPPED, "reason": "infinite multiplicity cannot be materialized as a finite Jordan sum"}
    model = JordanSumModel.from_field(canonical)
    basis = structured_commutant_basis(model)
    out = {
        "status": OK,
        "model": [
            {"n": s.block_size, "multiplicity": s.multiplicity, "value": scalar_to_json(s.spectral_value)}
            for s in model.summands
        ],
        "dimension": model.dimension,
        "commutant_dimension": basis.dimension,
        "formula_dimension": commutant_dimension_formula(model),
        "minimal_idempotents": model.total_copies,
    }
    if model.dimension <= ORACLE_MAX_DIM:
        out["oracle_dimension"] = len(sylvester_kernel(model.matrix, model.matrix))
    else:
        out["oracle_dimension"] = None
    return out


def _stage_invariants(rep: AnalysisReport, ctx: dict) -> dict:
    canonical = ctx.get("canonical")
    if canonical is None:
        return {"status": SKIPPED, "reason": "no canonical field (reduction did not run)"}
    desc = compute_V_K0(canonical)
    return {
        "status": OK,
        "by_value": [
            {
                "spectral_value": scalar_to_json(e.spectral_value),
                "r": e.r,
                "V": e.semigroup,
                "K0": e.group,
                "block_sizes": list(e.identity_class.block_sizes),
                "identity_class": list(e.identity_class.counts),
                "vanishing_sizes": list(e.vanishing_sizes),
                "unique": e.unique,
            }
            for e in desc.by_value
        ],
    }


def _stage_verdict(rep: AnalysisReport, ctx: dict) -> dict:
    if not ctx.get("hyp_ii"):
        return {
            "status": SKIPPED,
            "reason": "a superdiagonal entry vanishes; rerun with --perturb K",
        }
    v = decide_uniqueness(ctx["working"])
    return {
        "status": OK,
        "unique": v.unique,
        "witnesses": [
            {"spectral_value": scalar_to_json(z), "n": n, "multiplicity": m.to_json()} for z, n, m in v.witnesses
        ],
        "narrative": v.narrative,
    }


_RUNNERS: dict[str, Callable] = {
    "validate": _stage_validate,
    "si": _stage_si,
    "hypotheses": _stage_hypotheses,
    "perturbation": _stage_perturbation,
    "sequence": _stage_sequence,
    "reduction": _stage_reduction,
    "commutant": _stage_commutant,
    "invariants": _stage_invariants,
    "verdict": _stage_verdict,
}


def run_analysis(
    F: OperatorField,
    perturb: int | None = None,
    sequence: int | None = None,
    timing: bool = False,
) -> AnalysisReport:
    rep = AnalysisReport(F, {"perturb": perturb, "sequence": sequence})
    ctx: dict = {"working": F}
    times = {}
    halted = None
    for name in STAGES:
        if halted is not None:
            rep.stages[name] = {"status": SKIPPED, "reason": f"stage {halted!r} failed"}
            continue
        t0 = time.perf_counter()
        try:
            result = _RUNNERS[name](rep, ctx)
        except SidecompError as exc:
            result = {"status": ERROR, "error": f"{name}: {exc}", "error_type": type(exc).__name__}
        times[name] = round(time.perf_counter() - t0, 6)
        rep.stages[name] = result
        if result["status"] == ERROR and name != "sequence":
            halted = name
    if timing:
        rep.timing = times
    return rep


# ---------------------------------------------------------------------------
# rendering


def report_json(rep: AnalysisReport) -> str:
    return json.dumps(rep.to_json(), indent=2, ensure_ascii=False) + "\n"


def _scalar_text(obj) -> str:
    re_, im_ = obj["re"], obj["im"]
    if im_ == "0":
        return re_
    if re_ == "0":
        return f"{im_}i"
    sign = "-" if im_.startswith("-") else "+"
    return f"{re_}{sign}{im_.lstrip('-')}i"


def report_text(rep: AnalysisReport) -> str:
    s = rep.stages
    lines = [f"field: {rep.field.name} ({len(rep.field.cells)} cells)"]

    def head(title, stage):
        lines.append("")
        lines.append(f"[{title}] {s[stage]['status']}")
        if "reason" in s[stage]:
            lines.append(f"  {s[stage]['reason']}")
        if "error" in s[stage]:
            lines.append(f"  error: {s[stage]['error']}")

    head("validate", "validate")
    for p in s["validate"].get("problems", []):
        lines.append(f"  problem: {p}")

    head("strong irreducibility", "si")
    for c in s["si"].get("cells", []):
        mark = "SI" if c["strongly_irreducible"] else "not SI"
        lines.append(f"  {c['id']} (n={c['n']}): {mark}; {c['reason']}")

    head("hypotheses", "hypotheses")
    h = s["hypotheses"]
    if h["status"] == OK:
        lines.append("  simple multiplicity: yes")
        lines.append(f"  invertible superdiagonals: {'yes' if h['invertible_superdiagonals'] else 'no'}")
        lines.append(f"  bounded multiplicity: {'yes' if h['bounded_multiplicity'] else 'no'}")
        for e in h["profile"]:
            lines.append(f"  n={e['n']} z={_scalar_text(e['value'])}: multiplicity {e['multiplicity']}")

    head("perturbation", "perturbation")
    p = s["perturbation"]
    if p["status"] == OK:
        lines.append(f"  k={p['k']} bound={p['bound']} (< 1/{p['k']}: {p['bound_below_1_over_k']})")
        lines.append(f"  replaced {len(p['replaced'])} superdiagonal entries")

    head("sequence", "sequence")
    q = s["sequence"]
    if q["status"] == OK:
        for st in q["steps"]:
            lines.append(f"  k={st['k']} bound={st['bound']} hypotheses={'ok' if st['hypotheses_hold'] else 'fail'}")

    head("reduction", "reduction")
    r = s["reduction"]
    if r["status"] == OK:
        lines.append(f"  {len(r['cells'])} cell similarities; input already canonical: {r['already_canonical']}")

    head("commutant", "commutant")
    c = s["commutant"]
    if c["status"] == OK:
        model = " + ".join(
            f"J_{m['n']}({_scalar_text(m['value'])})^({m['multiplicity']})" for m in c["model"]
        )
        lines.append(f"  model: {model}")
        lines.append(f"  dim {{A}}' = {c['commutant_dimension']} (oracle: {c['oracle_dimension']})")
        lines.append(f"  minimal idempotents: {c['minimal_idempotents']}")

    head("invariants", "invariants")
    inv = s["invariants"]
    if inv["status"] == OK:
        for e in inv["by_value"]:
            ic = ",".join(str(x) for x in e["identity_class"])
            lines.append(
                f"  z={_scalar_text(e['spectral_value'])}: r={e['r']} V={e['V']} K0={e['K0']} [I]=({ic})"
                + (f" vanishing at sizes {e['vanishing_sizes']}" if e["vanishing_sizes"] else "")
            )

    head("verdict", "verdict")
    v = s["verdict"]
    if v["status"] == OK:
        lines.append("  unique up to similarity" if v["unique"] else "  NOT unique up to similarity")
        for line in v["narrative"].splitlines():
            lines.append(f"  {line}")

    if rep.timing is not None:
        lines.append("")
        lines.append("[timing]")
        for k, t in rep.timing.items():
            lines.append(f"  {k}: {t:.6f}s")
    return "\n".join(lines) + "\n"


def emit_report(rep: AnalysisReport, mode: str = "text") -> str:
    if mode == "text":
        return report_text(rep)
    if mode in ("structured", "json"):
        return report_json(rep)
    raise ValueError(f"unknown report mode {mode!r}")
