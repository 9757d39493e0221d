"""Machine-checkable certificates for a constructed free action.

A certificate records the quotient torus presentation, both generators,
the group relation checks, and one obstruction row per nonidentity
element proving that element has no fixed point.  The verifier trusts
nothing but the parameters: it rebuilds the torus and generators from
them, recomputes every linear part and translation, and checks each
stated obstruction row u against the rebuilt data (u integral,
u @ (A - I) = 0 and u . t not integral certify emptiness of the fixed
locus).  Stored witnesses must also coincide with the recomputed
canonical ones, so even a swap for a different valid obstruction row
is reported.  Any single mutated field therefore fails verification.

Serialized rationals are canonical "p/q" with positive denominator and
coprime entries; non-canonical strings are rejected on parse.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .affine_actions import (
    check_relations,
    contains_no_translations,
    evaluate_word,
    generate_group,
    is_free_action,
)
from .d4_family import (
    BuildRejection,
    CaseTag,
    D4Action,
    D4Parameters,
    build_general,
    check_freeness_conditions,
    lattice_inclusion_check,
)
from .exact_linear import IntegerMatrix, RationalMatrix
from .torus import EllipticCurveParam, TorsionPoint

SCHEMA_VERSION = "1.0"

RELATION_WORDS = ("rrrr", "ss", "rsrs")
WITNESS_WORDS = ("r", "s", "rr", "rs", "sr", "rrr", "rrs")

_RATIONAL_RE = re.compile(r"^(-?\d+)/(\d+)$")
_COMPLEX_RE = re.compile(r"^(-?\d+/\d+)\+(-?\d+/\d+)i$")


class CertificateFormatError(ValueError):
    """The document is not a certificate at all (wrong shape or schema)."""


def rational_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    if not isinstance(s, str):
        raise ValueError(f"expected rational string, got {type(s).__name__}")
    m = _RATIONAL_RE.match(s)
    if m is None:
        raise ValueError(f"malformed rational {s!r}")
    num, den = int(m.group(1)), int(m.group(2))
    if den == 0:
        raise ValueError(f"zero denominator in {s!r}")
    if gcd(num, den) != 1 and not (num == 0 and den == 1):
        raise ValueError(f"non-canonical rational {s!r}")
    if num == 0 and den != 1:
        raise ValueError(f"non-canonical rational {s!r}")
    return Fraction(num, den)


def complex_str(p: EllipticCurveParam) -> str:
    return f"{rational_str(p.tau_re)}+{rational_str(p.tau_im)}i"


def parse_complex(s) -> EllipticCurveParam:
    if not isinstance(s, str):
        raise ValueError(f"expected complex string, got {type(s).__name__}")
    m = _COMPLEX_RE.match(s)
    if m is None:
        raise ValueError(f"malformed complex number {s!r}")
    return EllipticCurveParam(parse_rational(m.group(1)), parse_rational(m.group(2)))


def point_json(p: TorsionPoint) -> list[str]:
    return [rational_str(c) for c in p.coords]


def parse_point(data, length: int) -> TorsionPoint:
    if not isinstance(data, list) or len(data) != length:
        raise ValueError(f"expected {length} coordinates")
    return TorsionPoint(tuple(parse_rational(c) for c in data))


def integer_matrix_json(m: IntegerMatrix) -> dict:
    return {"rows": m.rows, "cols": m.cols, "entries": list(m.entries)}


def parse_integer_matrix(data) -> IntegerMatrix:
    if not isinstance(data, dict):
        raise ValueError("expected matrix object")
    rows, cols, entries = data.get("rows"), data.get("cols"), data.get("entries")
    if not isinstance(rows, int) or not isinstance(cols, int) or not isinstance(entries, list):
        raise ValueError("malformed matrix object")
    if len(entries) != rows * cols or not all(isinstance(e, int) and not isinstance(e, bool) for e in entries):
        raise ValueError("malformed matrix entries")
    return IntegerMatrix(rows, cols, tuple(entries))


def rational_matrix_json(m: RationalMatrix) -> dict:
    return {"rows": m.rows, "cols": m.cols, "entries": [rational_str(e) for e in m.entries]}


def parse_rational_matrix(data) -> RationalMatrix:
    if not isinstance(data, dict):
        raise ValueError("expected matrix object")
    rows, cols, entries = data.get("rows"), data.get("cols"), data.get("entries")
    if not isinstance(rows, int) or not isinstance(cols, int) or not isinstance(entries, list):
        raise ValueError("malformed matrix object")
    if len(entries) != rows * cols:
        raise ValueError("malformed matrix entries")
    return RationalMatrix(rows, cols, tuple(parse_rational(e) for e in entries))


def _parameters_json(params: D4Parameters) -> dict:
    out = {
        "tau": complex_str(params.tau),
        "tau_prime": complex_str(params.tau_prime),
        "s_shift1": point_json(params.s_shift1),
        "s_shift2": point_json(params.s_shift2),
        "r_shift": point_json(params.r_shift),
        "subgroup_generators": [point_json(g) for g in params.subgroup_gens],
    }
    if params.s_shift3 is not None:
        out["s_shift3"] = point_json(params.s_shift3)
    return out


def parse_parameters(data) -> D4Parameters:
    if not isinstance(data, dict):
        raise ValueError("parameters must be an object")
    gens_data = data.get("subgroup_generators")
    if not isinstance(gens_data, list):
        raise ValueError("missing subgroup generators")
    s3 = data.get("s_shift3")
    return D4Parameters(
        tau=parse_complex(data.get("tau")),
        tau_prime=parse_complex(data.get("tau_prime")),
        s_shift1=parse_point(data.get("s_shift1"), 2),
        s_shift2=parse_point(data.get("s_shift2"), 2),
        r_shift=parse_point(data.get("r_shift"), 2),
        s_shift3=None if s3 is None else parse_point(s3, 2),
        subgroup_gens=tuple(parse_point(g, 6) for g in gens_data),
    )


def build_certificate(action: D4Action) -> dict:
    """Assemble the certificate document for a built, free action.

    Raises ValueError when the action fails the relations, contains a
    translation, or has an element with a fixed point: those cannot be
    certified, only reported.
    """
    gens = {"r": action.r, "s": action.s}
    grp = generate_group(gens)
    relations = check_relations(gens, list(RELATION_WORDS))
    if grp.order != 8 or not all(relations.values()):
        raise ValueError("action does not satisfy the dihedral relations of order 8")
    cert = is_free_action(grp, method="all")
    if not cert.free:
        raise ValueError(f"element {cert.failure.word} has a fixed point")
    trans = contains_no_translations(grp)
    if not trans.ok:
        raise ValueError(f"element {trans.offending_word} acts as a translation")

    witnesses = []
    for w in cert.witnesses:
        witnesses.append(
            {
                "word": w.word,
                "row": list(w.obstruction.row),
                "value": rational_str(w.obstruction.value),
            }
        )
    torus = action.torus
    doc = {
        "schema": SCHEMA_VERSION,
        "case": action.case.value,
        "parameters": _parameters_json(action.params),
        "torus": {
            "rank": torus.rank,
            "complex_structure": rational_matrix_json(torus.j),
            "basis_change": rational_matrix_json(torus.basis_change),
        },
        "generators": {
            "r": {
                "linear": integer_matrix_json(action.r.a),
                "translation": point_json(action.r.t),
            },
            "s": {
                "linear": integer_matrix_json(action.s.a),
                "translation": point_json(action.s.t),
            },
        },
        "group": {
            "order": grp.order,
            "elements": [
                {
                    "word": g.word,
                    "linear": integer_matrix_json(g.aut.a),
                    "translation": point_json(g.aut.t),
                }
                for g in grp.elements
            ],
            "relations": {w: bool(v) for w, v in relations.items()},
        },
        "fixed_point_witnesses": witnesses,
        "no_translations": True,
        "lattice_inclusion": _inclusion_json(action),
    }
    if action.case is CaseTag.CASE1:
        doc["freeness_conditions"] = {
            k: bool(v) for k, v in check_freeness_conditions(action.params).as_dict().items()
        }
    return doc


def _inclusion_json(action: D4Action) -> dict:
    rep = lattice_inclusion_check(action.torus, action.case)
    return {
        "splitting_ok": bool(rep.splitting_ok),
        "block_denominators": list(rep.block_denominators),
        "denominator_bound_ok": bool(rep.denominator_bound_ok),
        "quotient_divisors": list(rep.quotient_divisors),
        "quotient_exponent": rep.quotient_exponent,
        "exponent_ok": bool(rep.exponent_ok),
    }


@dataclass(frozen=True)
class VerificationResult:
    """Outcome of checking a certificate against a fresh rebuild."""

    ok: bool
    failures: tuple[str, ...]


def _schema_supported(doc) -> str | None:
    schema = doc.get("schema")
    if not isinstance(schema, str) or not re.match(r"^\d+\.\d+$", schema):
        return None
    return schema


def verify_certificate(doc) -> VerificationResult:
    """Recompute everything the certificate claims, from parameters only.

    Raises CertificateFormatError when the document is not a
    recognizable certificate (wrong shape or unsupported schema major);
    returns failures for everything else, so a tampered field yields a
    checked-and-failed outcome rather than a parse error.
    """
    if not isinstance(doc, dict):
        raise CertificateFormatError("certificate must be a JSON object")
    schema = _schema_supported(doc)
    if schema is None:
        raise CertificateFormatError("missing or malformed schema version")
    if schema.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
        raise CertificateFormatError(f"unsupported schema major version {schema}")

    failures: list[str] = []

    case_value = doc.get("case")
    try:
        case = CaseTag(case_value)
    except ValueError:
        return VerificationResult(False, (f"unknown case {case_value!r}",))

    try:
        params = parse_parameters(doc.get("parameters"))
        built = build_general(case, params)
    except ValueError as exc:
        return VerificationResult(False, (f"parameters: {exc}",))
    if isinstance(built, BuildRejection):
        return VerificationResult(False, (f"build rejected: {built.reason}",))

    # Stored presentation must match the rebuild exactly.
    torus_doc = doc.get("torus")
    if not isinstance(torus_doc, dict):
        failures.append("torus: missing")
    else:
        try:
            if torus_doc.get("rank") != built.torus.rank:
                failures.append("torus: rank mismatch")
            if parse_rational_matrix(torus_doc.get("complex_structure")) != built.torus.j:
                failures.append("torus: complex structure mismatch")
            if parse_rational_matrix(torus_doc.get("basis_change")) != built.torus.basis_change:
                failures.append("torus: basis change mismatch")
        except ValueError as exc:
            failures.append(f"torus: {exc}")

    gens_doc = doc.get("generators")
    rebuilt = {"r": built.r, "s": built.s}
    if not isinstance(gens_doc, dict):
        failures.append("generators: missing")
    else:
        for name in ("r", "s"):
            g_doc = gens_doc.get(name)
            if not isinstance(g_doc, dict):
                failures.append(f"generators: {name} missing")
                continue
            try:
                lin = parse_integer_matrix(g_doc.get("linear"))
                trans = parse_point(g_doc.get("translation"), built.torus.rank)
            except ValueError as exc:
                failures.append(f"generators: {name}: {exc}")
                continue
            if lin != rebuilt[name].a:
                failures.append(f"generators: {name}: linear part mismatch")
            if trans != rebuilt[name].t:
                failures.append(f"generators: {name}: translation mismatch")

    grp = generate_group(rebuilt)
    relations = check_relations(rebuilt, list(RELATION_WORDS))
    group_doc = doc.get("group")
    if not isinstance(group_doc, dict):
        failures.append("group: missing")
    else:
        if group_doc.get("order") != grp.order:
            failures.append("group: order mismatch")
        elems_doc = group_doc.get("elements")
        if not isinstance(elems_doc, list) or len(elems_doc) != len(grp.elements):
            failures.append("group: elements missing or wrong count")
        else:
            for entry, rebuilt_elem in zip(elems_doc, grp.elements):
                word = entry.get("word") if isinstance(entry, dict) else None
                if word != rebuilt_elem.word:
                    failures.append(f"group: element word mismatch ({word!r})")
                    continue
                try:
                    lin = parse_integer_matrix(entry.get("linear"))
                    trans = parse_point(entry.get("translation"), built.torus.rank)
                except ValueError as exc:
                    failures.append(f"group: element {word}: {exc}")
                    continue
                if lin != rebuilt_elem.aut.a or trans != rebuilt_elem.aut.t:
                    failures.append(f"group: element {word} does not match the rebuild")
        rel_doc = group_doc.get("relations")
        if rel_doc != {w: True for w in RELATION_WORDS}:
            failures.append("group: relations not all satisfied")
        if not all(relations.values()) or grp.order != 8:
            failures.append("group: rebuilt action violates the relations")

    if doc.get("no_translations") is not True:
        failures.append("no_translations: not asserted")
    elif not contains_no_translations(grp).ok:
        failures.append("no_translations: rebuilt action contains a translation")

    # Independent freeness recomputation.  The canonical rows also pin
    # the stored witnesses exactly: swapping a row for a different but
    # still valid obstruction must not go unnoticed.
    freeness = is_free_action(grp, method="all")
    if not freeness.free:
        failures.append(f"rebuilt element {freeness.failure.word} has a fixed point")
    canonical = {
        w.word: (tuple(w.obstruction.row), w.obstruction.value) for w in freeness.witnesses
    }

    wit_doc = doc.get("fixed_point_witnesses")
    if not isinstance(wit_doc, list):
        failures.append("witnesses: missing")
        wit_doc = []
    words_seen = []
    ident = IntegerMatrix.identity(built.torus.rank)
    for entry in wit_doc:
        if not isinstance(entry, dict):
            failures.append("witness: malformed entry")
            continue
        word = entry.get("word")
        if word not in WITNESS_WORDS:
            failures.append(f"witness: unknown word {word!r}")
            continue
        words_seen.append(word)
        row = entry.get("row")
        if (
            not isinstance(row, list)
            or len(row) != built.torus.rank
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in row)
        ):
            failures.append(f"witness {word}: malformed obstruction row")
            continue
        try:
            value = parse_rational(entry.get("value"))
        except ValueError as exc:
            failures.append(f"witness {word}: {exc}")
            continue
        elem = evaluate_word(rebuilt, word)
        a_minus_i = elem.a - ident
        left = tuple(
            sum(row[i] * a_minus_i.at(i, j) for i in range(a_minus_i.rows))
            for j in range(a_minus_i.cols)
        )
        if any(x != 0 for x in left):
            failures.append(f"witness {word}: row is not a left null vector of (A - I)")
            continue
        recomputed = -sum(r * t for r, t in zip(row, elem.t.coords))
        if recomputed != value:
            failures.append(f"witness {word}: stated value does not match the row")
            continue
        if value.denominator == 1:
            failures.append(f"witness {word}: obstruction value is integral, proves nothing")
        if word in canonical and (tuple(row), value) != canonical[word]:
            failures.append(f"witness {word}: does not match the recomputed obstruction")
    if sorted(words_seen) != sorted(WITNESS_WORDS):
        failures.append("witnesses: words do not cover the seven nonidentity elements")

    if doc.get("lattice_inclusion") != _inclusion_json(built):
        failures.append("lattice_inclusion: does not match the rebuild")

    if case is CaseTag.CASE1:
        expected_flags = {
            k: bool(v) for k, v in check_freeness_conditions(params).as_dict().items()
        }
        if doc.get("freeness_conditions") != expected_flags:
            failures.append("freeness_conditions: do not match the rebuild")
        elif not all(expected_flags.values()):
            failures.append("freeness_conditions: a condition fails on the rebuilt action")

    return VerificationResult(not failures, tuple(failures))
