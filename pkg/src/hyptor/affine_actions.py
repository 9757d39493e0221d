"""Holomorphic affine automorphisms of a complex torus.

An automorphism is a pair (A, t): a unimodular integer matrix on the
lattice coordinates commuting with the complex structure, plus a
torsion translation part.  The fixed-point question for (A, t) is the
solvability of (A - I) x = -t modulo the lattice and is decided exactly
through the Smith form, never by search; both answers come with a
witness that can be re-checked by plain arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from .exact_linear import (
    DimensionError,
    IntegerMatrix,
    NotUnimodularError,
    RationalMatrix,
    solve_affine_mod_lattice,
)
from .torus import ComplexTorus, HolomorphyError, TorsionPoint


@lru_cache(maxsize=64)
def _scaled_complex_structure(j: RationalMatrix) -> IntegerMatrix:
    """Denominator-cleared J; commuting with it is the same condition
    and keeps the per-automorphism validation in integer arithmetic."""
    scaled, _ = j.scaled_integer()
    return scaled


class TorusMismatchError(ValueError):
    """Automorphisms of different tori cannot be composed."""


class GroupGenerationError(RuntimeError):
    """Closure exceeded the element cap."""


class UnknownLetterError(KeyError):
    """A relation word uses a letter with no assigned generator."""


@dataclass(frozen=True)
class AffineAut:
    """Affine automorphism z -> A z + t of a torus."""

    torus: ComplexTorus
    a: IntegerMatrix
    t: TorsionPoint

    def __post_init__(self) -> None:
        n = self.torus.rank
        if self.a.rows != n or self.a.cols != n:
            raise DimensionError("linear part must be 2g x 2g")
        if len(self.t) != n:
            raise DimensionError("translation part must have length 2g")
        if abs(self.a.det()) != 1:
            raise NotUnimodularError("linear part must be unimodular")
        j_int = _scaled_complex_structure(self.torus.j)
        if (self.a @ j_int).entries != (j_int @ self.a).entries:
            raise HolomorphyError("linear part does not commute with J")

    def key(self) -> tuple:
        return (self.a.entries, self.t.coords)

    def apply(self, p: TorsionPoint) -> TorsionPoint:
        return TorsionPoint(self.a.apply(p.coords)).add(self.t)


def identity_aut(t: ComplexTorus) -> AffineAut:
    return AffineAut(t, IntegerMatrix.identity(t.rank), TorsionPoint.zero(t.rank))


def compose(f: AffineAut, g: AffineAut) -> AffineAut:
    """f after g: z -> f(g(z))."""
    if f.torus != g.torus:
        raise TorusMismatchError("different tori")
    a = f.a @ g.a
    t = TorsionPoint(f.a.apply(g.t.coords)).add(f.t)
    return AffineAut(f.torus, a, t)


def inverse(f: AffineAut) -> AffineAut:
    ainv_rat = f.a.to_rational().inverse()
    if not ainv_rat.is_integral():
        raise NotUnimodularError("linear part inverse is not integral")
    ainv = ainv_rat.to_integer()
    t = TorsionPoint(ainv.apply(f.t.coords)).neg()
    return AffineAut(f.torus, ainv, t)


def is_translation(f: AffineAut) -> bool:
    """Nontrivial pure translation."""
    return f.a.is_identity() and not f.t.is_zero()


@dataclass(frozen=True)
class Obstruction:
    """Certified reason that (A - I) x = -t has no solution mod Z^(2g).

    row is an integer row with row @ (A - I) == 0 while value = row . (-t)
    is not an integer; index records which zero row of the Smith form
    produced it.
    """

    index: int
    row: tuple[int, ...]
    value: Fraction


@dataclass(frozen=True)
class FixedPointResult:
    exists: bool
    point: tuple[Fraction, ...] | None = None
    obstruction: Obstruction | None = None


def has_fixed_point(f: AffineAut) -> FixedPointResult:
    """Exact fixed-point decision for an affine automorphism.

    Solves (A - I) x = -t + m over rational x, integral m.  A returned
    fixed point is canonicalized into [0, 1)^(2g) and re-checked; a
    negative answer carries the Smith-form obstruction row.
    """
    n = f.torus.rank
    a_minus_i = (f.a - IntegerMatrix.identity(n)).to_rational()
    b = tuple(-c for c in f.t.coords)
    res = solve_affine_mod_lattice(a_minus_i, b)
    if not res.solvable:
        return FixedPointResult(
            exists=False,
            obstruction=Obstruction(res.obstruction_index, res.obstruction_row, res.obstruction_value),
        )
    x = TorsionPoint(res.x)
    if f.apply(x) != x:
        raise RuntimeError("internal error: claimed fixed point does not verify")
    return FixedPointResult(exists=True, point=x.coords)


@dataclass(frozen=True)
class GroupElement:
    word: str
    aut: AffineAut


@dataclass(frozen=True)
class GeneratedGroup:
    """Finite group closure of named generators.

    Elements are ordered by word length then lexicographically, with the
    identity word "e" first.  table[i][j] is the index of
    elements[i] composed with elements[j].
    """

    elements: tuple[GroupElement, ...]
    table: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def element(self, word: str) -> AffineAut:
        for e in self.elements:
            if e.word == word:
                return e.aut
        raise KeyError(word)

    def nonidentity(self) -> tuple[GroupElement, ...]:
        return tuple(e for e in self.elements if e.word != "e")

    def word_table(self) -> tuple[tuple[str, ...], ...]:
        return tuple(tuple(self.elements[k].word for k in row) for row in self.table)


def generate_group(gens: Mapping[str, AffineAut], cap: int = 64) -> GeneratedGroup:
    """Breadth-first closure of the generators under composition.

    For a finite group, products of generators exhaust the closure
    (inverses are positive powers); generation aborts once more than
    cap distinct elements appear.
    """
    if not gens:
        raise ValueError("no generators")
    torus = next(iter(gens.values())).torus
    for gaut in gens.values():
        if gaut.torus != torus:
            raise TorusMismatchError("generators live on different tori")
    ident = identity_aut(torus)
    seen: dict[tuple, str] = {ident.key(): "e"}
    auts: dict[str, AffineAut] = {"e": ident}
    frontier = ["e"]
    names = sorted(gens)
    while frontier:
        nxt: list[str] = []
        for word in frontier:
            for name in names:
                new_aut = compose(auts[word], gens[name])
                new_word = name if word == "e" else word + name
                k = new_aut.key()
                if k not in seen:
                    if len(seen) >= cap:
                        raise GroupGenerationError(f"generated more than {cap} elements")
                    seen[k] = new_word
                    auts[new_word] = new_aut
                    nxt.append(new_word)
        frontier = nxt
    words = sorted(auts, key=lambda w: (0 if w == "e" else len(w), w))
    elements = tuple(GroupElement(w, auts[w]) for w in words)
    index = {e.aut.key(): i for i, e in enumerate(elements)}
    table = tuple(
        tuple(index[compose(ei.aut, ej.aut).key()] for ej in elements) for ei in elements
    )
    return GeneratedGroup(elements, table)


def evaluate_word(gens: Mapping[str, AffineAut], word: str) -> AffineAut:
    """Evaluate a word left to right as a composition of maps.

    The word "rs" denotes the map z -> r(s(z)).
    """
    torus = next(iter(gens.values())).torus
    acc = identity_aut(torus)
    for letter in word:
        if letter not in gens:
            raise UnknownLetterError(letter)
        acc = compose(acc, gens[letter])
    return acc


def check_relations(gens: Mapping[str, AffineAut], relations: Sequence[str]) -> dict[str, bool]:
    """Whether each relation word evaluates to the identity map."""
    out: dict[str, bool] = {}
    for rel in relations:
        aut = evaluate_word(gens, rel)
        out[rel] = aut.a.is_identity() and aut.t.is_zero()
    return out


@dataclass(frozen=True)
class FreenessWitness:
    word: str
    a: IntegerMatrix
    t: TorsionPoint
    obstruction: Obstruction


@dataclass(frozen=True)
class FixedPointFailure:
    word: str
    point: tuple[Fraction, ...]


@dataclass(frozen=True)
class FreenessCertificate:
    free: bool
    method: str
    witnesses: tuple[FreenessWitness, ...]
    failure: FixedPointFailure | None = None


def _element_order(g: GeneratedGroup, idx: int) -> int:
    order = 1
    cur = idx
    identity_idx = 0
    while cur != identity_idx:
        cur = g.table[cur][idx]
        order += 1
        if order > g.order:
            raise RuntimeError("internal error: element order exceeds group order")
    return order


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def is_free_action(g: GeneratedGroup, method: str = "all") -> FreenessCertificate:
    """Fixed-point freeness of every nonidentity element.

    method "all" checks all nonidentity elements and returns one
    obstruction witness per element.  method "prime_order" checks only
    the elements of prime order, which decides freeness of the whole
    action: a fixed point of any element is a fixed point of the prime
    order power of that element.
    """
    if method not in ("all", "prime_order"):
        raise ValueError(f"unknown method {method!r}")
    targets: list[GroupElement] = []
    for i, e in enumerate(g.elements):
        if e.word == "e":
            continue
        if method == "prime_order" and not _is_prime(_element_order(g, i)):
            continue
        targets.append(e)
    witnesses: list[FreenessWitness] = []
    for e in targets:
        res = has_fixed_point(e.aut)
        if res.exists:
            return FreenessCertificate(
                free=False,
                method=method,
                witnesses=tuple(witnesses),
                failure=FixedPointFailure(e.word, res.point),
            )
        witnesses.append(FreenessWitness(e.word, e.aut.a, e.aut.t, res.obstruction))
    return FreenessCertificate(free=True, method=method, witnesses=tuple(witnesses))


@dataclass(frozen=True)
class TranslationCheck:
    ok: bool
    offending_word: str | None = None


def contains_no_translations(g: GeneratedGroup) -> TranslationCheck:
    """No nonidentity element of the group is a pure translation."""
    for e in g.nonidentity():
        if is_translation(e.aut):
            return TranslationCheck(ok=False, offending_word=e.word)
    return TranslationCheck(ok=True)
