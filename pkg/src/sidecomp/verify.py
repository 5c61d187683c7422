"""Independent re-checking of structured reports and certificates.

Nothing here imports the constructors: fibers, perturbations, Jordan sums
and Sylvester systems are rebuilt from the JSON with exact-linalg alone,
and every claim is checked by multiplying and comparing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .linalg import ExactMatrix, GaussianRational, ONE, ZERO, direct_sum, jordan_block, mat_kernel, parse_rational


@dataclass
class VerifyResult:
    checks: list = field(default_factory=list)

    def record(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((name, bool(ok), detail))
        return ok

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    @property
    def failures(self) -> list:
        return [(n, d) for n, ok, d in self.checks if not ok]

    def summary(self) -> str:
        lines = [f"{'PASS' if ok else 'FAIL'} {name}" + (f": {d}" if d and not ok else "") for name, ok, d in self.checks]
        lines.append(f"{sum(ok for _, ok, _ in self.checks)}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


# -- minimal readers ----------------------------------------------------------


def _scalar(obj) -> GaussianRational:
    if isinstance(obj, str):
        return GaussianRational(parse_rational(obj))
    return GaussianRational(parse_rational(obj["re"]), parse_rational(obj.get("im", "0")))


def _matrix(rows) -> ExactMatrix:
    return ExactMatrix.from_rows([[_scalar(x) for x in r] for r in rows])


def _cells(field_obj) -> dict:
    out = {}
    for c in field_obj["cells"]:
        entries = {}
        for key, v in c.get("entries", {}).items():
            i, j = (int(p) for p in key.split(","))
            entries[(i, j)] = _scalar(v)
        out[c["id"]] = {
            "n": c["n"],
            "z": _scalar(c["value"]),
            "weight": parse_rational(c["weight"]),
            "continuous": c["mass"]["type"] == "continuous",
            "count": c["mass"].get("count", 1),
            "entries": entries,
        }
    return out


def _entry(cell, i, j) -> GaussianRational:
    return cell["entries"].get((i, j), ZERO)


def _fiber(cell) -> ExactMatrix:
    n = cell["n"]
    rows = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = cell["z"]
    for (i, j), v in cell["entries"].items():
        rows[i - 1][j - 1] = v
    return ExactMatrix.from_rows(rows)


def _same_cells(a: dict, b: dict) -> bool:
    if set(a) != set(b):
        return False
    for cid in a:
        x, y = a[cid], b[cid]
        for key in ("n", "z", "weight", "continuous", "count"):
            if x[key] != y[key]:
                return False
        ex = {p: v for p, v in x["entries"].items() if v}
        ey = {p: v for p, v in y["entries"].items() if v}
        if ex != ey:
            return False
    return True


def _perturb_by_rule(cells: dict, k: int) -> dict:
    out = {}
    for cid, c in cells.items():
        n = c["n"]
        floor = Fraction(1, 2 * k * n)
        entries = dict(c["entries"])
        for i in range(1, n):
            if _entry(c, i, i + 1).modulus_squared() < floor * floor:
                entries[(i, i + 1)] = GaussianRational(floor)
        out[cid] = dict(c, entries=entries)
    return out


def _check_perturbation(res: VerifyResult, tag: str, original: dict, cert: dict, perturbed: dict | None) -> dict:
    k = cert["k"]
    rebuilt = _perturb_by_rule(original, k)
    if perturbed is not None:
        res.record(f"{tag}: perturbed field follows the 1/(2kn) rule", _same_cells(rebuilt, perturbed))
    # squared-modulus differences per (n, position)
    worst: dict = {}
    for cid, c in original.items():
        d = rebuilt[cid]
        n = c["n"]
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                m2 = (_entry(c, i, j) - _entry(d, i, j)).modulus_squared()
                if m2:
                    key = (n, i, j)
                    worst[key] = max(worst.get(key, Fraction(0)), m2)
    claimed = {}
    for n, pos in cert["per_position"].items():
        for key, u in pos.items():
            i, j = (int(p) for p in key.split(","))
            claimed[(int(n), i, j)] = parse_rational(u)
    covered = all(key in claimed and claimed[key] >= 0 and claimed[key] ** 2 >= m2 for key, m2 in worst.items())
    res.record(f"{tag}: per-position bounds dominate entry differences", covered)
    sums: dict = {}
    for (n, _, _), u in claimed.items():
        sums[n] = sums.get(n, Fraction(0)) + u
    per_block = {int(n): parse_rational(b) for n, b in cert["per_block"].items()}
    res.record(f"{tag}: per-block sums", all(sums.get(n, Fraction(0)) <= b for n, b in per_block.items()) and set(sums) <= set(per_block))
    bound = parse_rational(cert["bound"])
    res.record(f"{tag}: bound dominates every block", all(b <= bound for b in per_block.values()))
    res.record(f"{tag}: bound < 1/{k}", bound < Fraction(1, k), f"bound {bound}")
    floor_ok = True
    for cid, c in rebuilt.items():
        n = c["n"]
        floor2 = Fraction(1, 2 * k * n) ** 2
        for i in range(1, n):
            if _entry(c, i, i + 1).modulus_squared() < floor2:
                floor_ok = False
    res.record(f"{tag}: superdiagonal moduli above 1/(2kn)", floor_ok)
    return rebuilt


def _check_similarity_cells(res: VerifyResult, tag: str, working: dict, cells: list) -> None:
    seen = set()
    for c in cells:
        cid = c["id"]
        seen.add(cid)
        X, Xi = _matrix(c["X"]), _matrix(c["X_inverse"])
        A, J = _matrix(c["source"]), _matrix(c["target"])
        cell = working.get(cid)
        n = X.rows
        ident = ExactMatrix.identity(n)
        res.record(f"{tag} {cid}: source is the cell fiber", cell is not None and A == _fiber(cell))
        res.record(
            f"{tag} {cid}: target is the Jordan block",
            cell is not None and J == jordan_block(cell["n"], cell["z"]),
        )
        res.record(f"{tag} {cid}: X X^-1 = I = X^-1 X", X @ Xi == ident and Xi @ X == ident)
        res.record(f"{tag} {cid}: X A = J X", X @ A == J @ X)
    res.record(f"{tag}: every cell certified", seen == set(working))


def _jordan_sum(model: list) -> ExactMatrix:
    blocks = []
    for s in model:
        blocks.extend([jordan_block(s["n"], _scalar(s["value"]))] * s["multiplicity"])
    return direct_sum(*blocks)


def _commutant_dim(A: ExactMatrix) -> int:
    d = A.rows
    rows = []
    for i in range(d):
        for j in range(d):
            row = [ZERO] * (d * d)
            for k in range(d):
                if A[i, k]:
                    row[k * d + j] = row[k * d + j] + A[i, k]
                if A[k, j]:
                    row[i * d + k] = row[i * d + k] - A[k, j]
            rows.append(row)
    return len(mat_kernel(ExactMatrix.from_rows(rows)))


def _groups(cells: dict) -> dict:
    """``(z, n) -> multiplicity`` with None for infinite."""
    out: dict = {}
    for c in cells.values():
        key = (c["z"], c["n"])
        prev = out.get(key, 0)
        if prev is None or c["continuous"]:
            out[key] = None
        else:
            out[key] = prev + c["count"]
    return out


def _invertible(cells: dict) -> bool:
    return all(all(_entry(c, i, i + 1) for i in range(1, c["n"])) for c in cells.values())


def verify_analysis(doc: dict) -> VerifyResult:
    res = VerifyResult()
    original = _cells(doc["field"])
    working = original
    if doc["validate"]["status"] != "ok":
        res.record("validate: report marks the field invalid", True)
        return res

    p = doc["perturbation"]
    if p["status"] == "ok":
        working = _check_perturbation(res, "perturbation", original, p, _cells(p["perturbed_field"]))

    q = doc["sequence"]
    if q["status"] == "ok":
        res.record("sequence: one certificate per k", [s["k"] for s in q["steps"]] == list(range(1, q["k_max"] + 1)))
        for s in q["steps"]:
            rebuilt = _check_perturbation(res, f"sequence k={s['k']}", original, s, None)
            res.record(f"sequence k={s['k']}: hypotheses hold", _invertible(rebuilt) and s["hypotheses_hold"])

    res.record("hypotheses: invertible superdiagonals flag", doc["hypotheses"]["invertible_superdiagonals"] == _invertible(original))
    hyp_ii = _invertible(working)
    if p["status"] == "ok":
        res.record("perturbation: invertible superdiagonals after perturbing", p["invertible_superdiagonals_after"] == hyp_ii)
    groups = _groups(working)
    bounded = all(v is not None for v in groups.values())
    res.record("hypotheses: bounded multiplicity flag", doc["hypotheses"]["bounded_multiplicity"] == bounded)

    r = doc["reduction"]
    canonical = None
    if r["status"] == "ok":
        _check_similarity_cells(res, "reduction", working, r["cells"])
        canonical = _cells(r["canonical_field"])
        target = {
            cid: dict(c, entries={(i, i + 1): ONE for i in range(1, c["n"])}) for cid, c in working.items()
        }
        res.record("reduction: canonical field matches targets", _same_cells(canonical, target))
    else:
        res.record("reduction: skipped only when a superdiagonal vanishes", not hyp_ii)

    c = doc["commutant"]
    if c["status"] == "ok":
        model_groups = {(_scalar(s["value"]), s["n"]): s["multiplicity"] for s in c["model"]}
        res.record("commutant: model matches the canonical field", canonical is not None and model_groups == _groups(canonical))
        A = _jordan_sum(c["model"])
        dim = _commutant_dim(A)
        res.record("commutant: dimension of {A}' by direct kernel", dim == c["commutant_dimension"], f"{dim} vs {c['commutant_dimension']}")
        if c.get("oracle_dimension") is not None:
            res.record("commutant: oracle dimension", dim == c["oracle_dimension"])
        res.record("commutant: minimal idempotent count", c["minimal_idempotents"] == sum(model_groups.values()))

    inv = doc["invariants"]
    if inv["status"] == "ok" and canonical is not None:
        by_value: dict = {}
        for (z, n), m in _groups(canonical).items():
            by_value.setdefault(z, {})[n] = m
        entries = {_scalar(e["spectral_value"]): e for e in inv["by_value"]}
        res.record("invariants: one entry per spectral value", set(entries) == set(by_value))
        for z, sizes in by_value.items():
            e = entries.get(z)
            if e is None:
                continue
            order = sorted(sizes, reverse=True)
            ident = [sizes[n] if sizes[n] is not None else 0 for n in order]
            vanishing = [n for n in order if sizes[n] is None]
            r_ = len(order)
            ok = (
                e["r"] == r_
                and e["V"] == f"N^{r_}"
                and e["K0"] == f"Z^{r_}"
                and e["block_sizes"] == order
                and e["identity_class"] == ident
                and e["vanishing_sizes"] == vanishing
            )
            res.record(f"invariants at {z}: r, V, K0 and [I]", ok)

    v = doc["verdict"]
    if v["status"] == "ok":
        witnesses = sorted((str(z), n) for (z, n), m in groups.items() if m is None)
        claimed = sorted((str(_scalar(w["spectral_value"])), w["n"]) for w in v["witnesses"])
        res.record("verdict: unique iff every multiplicity is finite", v["unique"] == (not witnesses))
        res.record("verdict: witnesses are the infinite-multiplicity groups", claimed == witnesses)
        res.record("verdict: narrative present when not unique", v["unique"] or bool(v["narrative"]))
    else:
        res.record("verdict: skipped only when a superdiagonal vanishes", not hyp_ii)
    return res


def verify_perturbation(doc: dict) -> VerifyResult:
    res = VerifyResult()
    _check_perturbation(res, "perturbation", _cells(doc["field"]), doc, _cells(doc["perturbed_field"]))
    return res


def verify_similarity(doc: dict) -> VerifyResult:
    res = VerifyResult()
    working = _cells(doc["field"])
    _check_similarity_cells(res, "similarity", working, doc["cells"])
    return res


def verify_masa_match(doc: dict) -> VerifyResult:
    res = VerifyResult()
    A = _jordan_sum(doc["model"])
    d = A.rows
    ident = ExactMatrix.identity(d)
    X, Xi = _matrix(doc["X"]), _matrix(doc["X_inverse"])
    P = [_matrix(m) for m in doc["P"]]
    Q = [_matrix(m) for m in doc["Q"]]
    res.record("masa-match: X X^-1 = I", X @ Xi == ident and Xi @ X == ident)
    res.record("masa-match: X commutes with A", A @ X == X @ A)
    for k, q in enumerate(Q):
        m = X @ q @ Xi
        ok = m @ m == m and all(m @ p == p @ m for p in P)
        res.record(f"masa-match: X Q_{k} X^-1 lies in the commutant of family P", ok)
    for qa, pa in doc.get("matching", []):
        ok = X @ _matrix(doc["Q_atoms"][qa]) @ Xi == _matrix(doc["P_atoms"][pa])
        res.record(f"masa-match: Q atom {qa} maps to P atom {pa}", ok)
    return res


def verify_document(doc: dict) -> VerifyResult:
    kind = doc.get("kind")
    if kind is None and str(doc.get("format", "")).startswith("sidecomp-report/"):
        return verify_analysis(doc)
    if kind == "perturbation":
        return verify_perturbation(doc)
    if kind == "similarity":
        return verify_similarity(doc)
    if kind == "masa-match":
        return verify_masa_match(doc)
    res = VerifyResult()
    res.record("document kind recognised", False, f"unknown kind {kind!r}")
    return res


def verify_text(text: str) -> VerifyResult:
    return verify_document(json.loads(text))
