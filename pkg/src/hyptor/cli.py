"""Command-line front end.

Subcommands: construct (build a quotient and emit its certificate),
verify (re-check a certificate from its parameters), classify (run a
census sweep), invariants (Hodge and Betti numbers of a certified
quotient).  Exit codes: 0 success, 1 checked-and-failed, 2 invalid
input.  Malformed input never produces a traceback.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction

from .affine_actions import GroupGenerationError, generate_group
from .certificates import (
    CertificateFormatError,
    build_certificate,
    complex_str,
    parse_complex,
    parse_parameters,
    parse_rational,
    verify_certificate,
)
from .classify import (
    SearchSpace,
    enumerate_case1,
    enumerate_case2,
    is_expected_survivor,
)
from .d4_family import (
    BuildRejection,
    CaseTag,
    D4Parameters,
    build_general,
    check_freeness_conditions,
)
from .exact_linear import IntegerMatrix, RationalMatrix
from .torus import TorsionPoint

WORKERS_ENV = "HYPTOR_WORKERS"

# Human phrasing for each failed construction condition, keyed by the
# flag names of the freeness-condition report.
_CONDITION_PHRASES = {
    "factors_embed": "no nonzero element of H may be supported in a single elliptic factor",
    "rel_r4_member": "four times h' must lie in H's third components (r^4 = id fails)",
    "rel_s2_member": "twice h must lie in H (s^2 = id fails: h must be 2-torsion modulo H)",
    "rel_rs2_member": "(h + k, -(h + k), 0) must lie in H ((rs)^2 = id fails)",
    "excl_r_free": "h' must avoid H's third components (r would have a fixed point)",
    "excl_r2_free": "twice h' must avoid H's third components (r^2 would have a fixed point)",
    "excl_s_free": "h must be a nonzero 2-torsion point outside H's first components (s would have a fixed point)",
    "excl_rs_free": "h + k must be nonzero and avoid H's second-minus-first components (rs would have a fixed point)",
}

_REJECTION_PHRASES = {
    "subgroup_not_exponent_two": "h + k must be 2-torsion: the subgroup it generates must have exponent 2",
    "lattice_not_preserved:r": "the subgroup H is not stable under the rotation",
    "lattice_not_preserved:s": "the subgroup H is not stable under the reflection",
}


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".hyptor-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit(args, doc: dict, text_lines: list[str]) -> None:
    """Write the JSON artifact to --out or stdout; text format swaps in
    a human summary on stdout (the artifact still goes to --out)."""
    payload = json.dumps(doc, indent=2) + "\n"
    if args.out:
        _atomic_write(args.out, payload)
        if args.format == "text":
            for line in text_lines:
                print(line)
        else:
            print(json.dumps({"ok": True, "out": args.out}))
    else:
        if args.format == "text":
            for line in text_lines:
                print(line)
        else:
            sys.stdout.write(payload)


def _parse_point2(text: str) -> TorsionPoint:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated rationals, got {text!r}")
    return TorsionPoint((parse_rational(parts[0]), parse_rational(parts[1])))


# ---------------------------------------------------------------------------
# construct
# ---------------------------------------------------------------------------


def cmd_construct(args) -> int:
    try:
        tau = parse_complex(args.tau)
        tau_prime = parse_complex(args.tau_prime)
        h = _parse_point2(args.h)
        k = _parse_point2(args.k)
        h_prime = _parse_point2(args.h_prime)
    except ValueError as exc:
        _err(str(exc))
        return 2

    omega = h.add(k)
    subgroup_gen = TorsionPoint(omega.coords + omega.coords + (Fraction(0), Fraction(0)))
    try:
        params = D4Parameters(
            tau=tau,
            tau_prime=tau_prime,
            s_shift1=h,
            s_shift2=k,
            r_shift=h_prime,
            subgroup_gens=(subgroup_gen,),
        )
    except ValueError as exc:
        _err(str(exc))
        return 2

    built = build_general(CaseTag.CASE1, params)
    if isinstance(built, BuildRejection):
        phrase = _REJECTION_PHRASES.get(built.reason, built.reason)
        _err(f"construction failed: {phrase}")
        return 1

    try:
        doc = build_certificate(built)
    except (ValueError, GroupGenerationError) as exc:
        _err(f"construction failed: {exc}")
        report = check_freeness_conditions(params)
        for flag, value in report.as_dict().items():
            if not value:
                _err(f"violated condition: {_CONDITION_PHRASES[flag]}")
        return 1

    lines = [
        f"constructed free action on the quotient torus (tau = {complex_str(tau)}, tau' = {complex_str(tau_prime)})",
        f"group order {doc['group']['order']}, {len(doc['fixed_point_witnesses'])} fixed-point obstructions, no translations",
    ]
    _emit(args, doc, lines)
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def cmd_verify(args) -> int:
    try:
        doc = _load_json(args.certificate)
    except OSError as exc:
        _err(f"cannot read certificate: {exc}")
        return 2
    except json.JSONDecodeError as exc:
        _err(f"malformed JSON: {exc}")
        return 2
    try:
        result = verify_certificate(doc)
    except CertificateFormatError as exc:
        _err(str(exc))
        return 2
    if result.ok:
        if args.format == "json":
            print(json.dumps({"ok": True, "failures": []}))
        else:
            print("certificate verified: all checks pass")
        return 0
    if args.format == "json":
        print(json.dumps({"ok": False, "failures": list(result.failures)}))
    else:
        print("certificate INVALID:")
        for f in result.failures:
            print(f"  - {f}")
    return 1


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------


def _resolve_workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env is None:
        return 1
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"invalid {WORKERS_ENV} value {env!r}")


def cmd_classify(args) -> int:
    try:
        case = {"1": CaseTag.CASE1, "2": CaseTag.CASE2, "case1": CaseTag.CASE1, "case2": CaseTag.CASE2}[
            args.case
        ]
    except KeyError:
        _err(f"unknown case {args.case!r}")
        return 2
    try:
        workers = _resolve_workers(args)
        if workers < 1:
            raise ValueError("workers must be at least 1")
        space = SearchSpace(
            case=case,
            shift_denominator=args.max_denominator,
            third_denominator=args.max_denominator,
            h_generators_max=args.h_generators_max,
            tau=parse_complex(args.tau),
            tau_prime=parse_complex(args.tau_prime),
        )
    except ValueError as exc:
        _err(str(exc))
        return 2

    if case is CaseTag.CASE1:
        report = enumerate_case1(space, workers=workers)
        expected = bool(report.survivors) and all(
            is_expected_survivor(s) for s in report.survivors
        )
    else:
        report = enumerate_case2(space, workers=workers)
        expected = not report.survivors

    doc = report.to_json_dict()
    lines = [
        f"{case.value}: scanned {report.total} tuples over {report.h_family_size} subgroups",
        f"survivors: {len(report.survivors)}",
        "failure counts: "
        + ", ".join(f"{k}={v}" for k, v in report.failure_counts.items() if v),
        f"expected outcome: {'yes' if expected else 'no'}",
    ]
    _emit(args, doc, lines)
    return 0 if expected else 1


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianRational:
    """Element of Q(i), exact."""

    re: Fraction
    im: Fraction

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def scaled(self, f: Fraction) -> "GaussianRational":
        return GaussianRational(self.re * f, self.im * f)


_G_ZERO = GaussianRational(Fraction(0), Fraction(0))
_G_ONE = GaussianRational(Fraction(1), Fraction(0))


def _holomorphic_power_sums(a: IntegerMatrix, j: RationalMatrix) -> list[GaussianRational]:
    """Power sums p_1, p_2, p_3 of the eigenvalues on the holomorphic side.

    The +i eigenspace of J has projector (I - iJ)/2, so the trace of
    A^k there is (tr A^k - i tr(A^k J)) / 2.
    """
    out = []
    power = a
    for _ in range(3):
        tr_a = Fraction(sum(power.at(i, i) for i in range(power.rows)))
        aj = power.to_rational() @ j
        tr_aj = sum(aj.at(i, i) for i in range(aj.rows))
        out.append(GaussianRational(tr_a / 2, -tr_aj / 2))
        power = power @ a
    return out


def _elementary_symmetric(p: list[GaussianRational]) -> list[GaussianRational]:
    """e_0..e_3 from p_1..p_3 by Newton's identities."""
    e1 = p[0]
    e2 = (e1 * p[0] - p[1]).scaled(Fraction(1, 2))
    e3 = (p[2] - e1 * p[1] + e2 * p[0]).scaled(Fraction(1, 3))
    return [_G_ONE, e1, e2, e3]


@dataclass(frozen=True)
class InvariantReport:
    """Hodge and Betti numbers of the quotient.

    Validated at construction: integrality, nonnegativity, conjugation
    and duality symmetries, h^{0,0} = 1.
    """

    hodge: tuple[tuple[int, ...], ...]
    betti: tuple[int, ...]

    def __post_init__(self) -> None:
        h = self.hodge
        if len(h) != 4 or any(len(row) != 4 for row in h):
            raise RuntimeError("internal error: Hodge table must be 4 x 4")
        for p in range(4):
            for q in range(4):
                if h[p][q] < 0:
                    raise RuntimeError("internal error: negative Hodge number")
                if h[p][q] != h[q][p]:
                    raise RuntimeError("internal error: Hodge conjugation symmetry fails")
                if h[p][q] != h[3 - p][3 - q]:
                    raise RuntimeError("internal error: Hodge duality symmetry fails")
        if h[0][0] != 1:
            raise RuntimeError("internal error: h^{0,0} must be 1")
        expected = tuple(
            sum(h[p][k - p] for p in range(4) if 0 <= k - p <= 3) for k in range(7)
        )
        if self.betti != expected:
            raise RuntimeError("internal error: Betti numbers inconsistent with Hodge table")

    def to_json_dict(self) -> dict:
        return {
            "hodge": [list(row) for row in self.hodge],
            "betti": list(self.betti),
        }


def hodge_numbers(elements: list[tuple[IntegerMatrix, RationalMatrix]]) -> InvariantReport:
    """Invariants from the lattice linear parts of a finite free group.

    Each entry pairs an element's lattice matrix with the complex
    structure of the torus it acts on.  h^{p,q} is the average over the
    group of e_p(eigenvalues) times the conjugate of e_q(eigenvalues),
    computed exactly; a non-integer anywhere is a hard error.
    """
    order = len(elements)
    sym = []
    for a, j in elements:
        p = _holomorphic_power_sums(a, j)
        sym.append(_elementary_symmetric(p))
    hodge_rows = []
    for p in range(4):
        row = []
        for q in range(4):
            total = _G_ZERO
            for e in sym:
                total = total + e[p] * e[q].conjugate()
            total = total.scaled(Fraction(1, order))
            if total.im != 0 or total.re.denominator != 1:
                raise RuntimeError(
                    f"internal error: h^{{{p},{q}}} is not an integer: {total}"
                )
            row.append(int(total.re))
        hodge_rows.append(tuple(row))
    hodge = tuple(hodge_rows)
    betti = tuple(
        sum(hodge[p][k - p] for p in range(4) if 0 <= k - p <= 3) for k in range(7)
    )
    return InvariantReport(hodge=hodge, betti=betti)


def cmd_invariants(args) -> int:
    try:
        doc = _load_json(args.certificate)
    except OSError as exc:
        _err(f"cannot read certificate: {exc}")
        return 2
    except json.JSONDecodeError as exc:
        _err(f"malformed JSON: {exc}")
        return 2
    try:
        result = verify_certificate(doc)
    except CertificateFormatError as exc:
        _err(str(exc))
        return 2
    if not result.ok:
        _err("certificate does not verify; refusing to compute invariants")
        for f in result.failures:
            _err(f"  - {f}")
        return 1

    # Verification already rebuilt the action and compared it against
    # the document, so the rebuilt group is the certified one.
    params = parse_parameters(doc["parameters"])
    built = build_general(CaseTag(doc["case"]), params)
    grp = generate_group({"r": built.r, "s": built.s})
    report = hodge_numbers([(g.aut.a, built.torus.j) for g in grp.elements])

    lines = ["Hodge numbers h^{p,q} (rows p = 0..3, columns q = 0..3):"]
    for row in report.hodge:
        lines.append("  " + "  ".join(str(v) for v in row))
    lines.append("Betti numbers b_0..b_6: " + " ".join(str(b) for b in report.betti))
    _emit(args, report.to_json_dict(), lines)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyptor",
        description="Construct, certify and classify free dihedral actions on complex tori.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common_output(p):
        p.add_argument("--out", help="write the JSON artifact to this file (atomic)")
        p.add_argument("--format", choices=("json", "text"), default="json")

    p_con = sub.add_parser("construct", help="build a free action and emit its certificate")
    p_con.add_argument("--tau", required=True, help='first curve parameter, "p/q+p/qi"')
    p_con.add_argument("--tau-prime", required=True, help="third curve parameter")
    p_con.add_argument("--h", default="1/2,0/1", help='reflection shift on the first factor, "p/q,p/q"')
    p_con.add_argument("--k", default="0/1,1/2", help="reflection shift on the second factor")
    p_con.add_argument("--h-prime", default="1/4,0/1", help="rotation shift on the third factor")
    common_output(p_con)
    p_con.set_defaults(func=cmd_construct)

    p_ver = sub.add_parser("verify", help="re-check a certificate from its parameters")
    p_ver.add_argument("certificate", help="path to a certificate JSON file")
    common_output(p_ver)
    p_ver.set_defaults(func=cmd_verify)

    p_cls = sub.add_parser("classify", help="run a census sweep over the parameter grid")
    p_cls.add_argument("--case", required=True, help="1 or 2")
    p_cls.add_argument("--max-denominator", type=int, default=4)
    p_cls.add_argument("--h-generators-max", type=int, default=2)
    p_cls.add_argument("--workers", type=int, default=None)
    p_cls.add_argument("--tau", default="0/1+1/1i")
    p_cls.add_argument("--tau-prime", default="0/1+2/1i")
    common_output(p_cls)
    p_cls.set_defaults(func=cmd_classify)

    p_inv = sub.add_parser("invariants", help="Hodge and Betti numbers of a certified quotient")
    p_inv.add_argument("certificate", help="path to a certificate JSON file")
    common_output(p_inv)
    p_inv.set_defaults(func=cmd_invariants)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except OSError as exc:
        # unwritable --out and similar environment problems
        _err(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
