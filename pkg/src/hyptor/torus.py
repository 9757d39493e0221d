"""Complex tori with exact rational period data.

A torus of dimension g is presented by the lattice Z^(2g) together with
a rational matrix J acting as multiplication by i on lattice
coordinates (J * J = -I).  An elliptic curve with parameter tau lives in
the basis (1, tau); products are block diagonal; quotients by finite
subgroups re-present the points of the enlarged lattice in a new basis
recorded in ``basis_change``.

Coordinates of torsion points are always taken in [0, 1) componentwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

from .exact_linear import (
    DimensionError,
    IntegerMatrix,
    RationalMatrix,
    Sublattice,
    SmithDecomposition,
    column_hnf,
    image_saturation,
    kernel_sublattice,
    lattice_membership,
    rational_rank,
    saturate,
    snf,
)


class HolomorphyError(ValueError):
    """A lattice map does not commute with the complex structure."""


@dataclass(frozen=True)
class EllipticCurveParam:
    """Upper half plane parameter tau = tau_re + tau_im * i, exact."""

    tau_re: Fraction
    tau_im: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau_re", Fraction(self.tau_re))
        object.__setattr__(self, "tau_im", Fraction(self.tau_im))
        if self.tau_im <= 0:
            raise ValueError("tau must have positive imaginary part")


@dataclass(frozen=True)
class ComplexTorus:
    """Dimension g torus: lattice Z^(2g) with complex structure J.

    basis_change holds the current lattice basis written in the
    coordinates of the reference lattice this torus was built from
    (identity for primitive constructions, composed through quotients).
    blocks records which reference coordinates belong to which factor
    of the underlying product.
    """

    g: int
    j: RationalMatrix
    basis_change: RationalMatrix
    blocks: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        n = 2 * self.g
        if self.j.rows != n or self.j.cols != n:
            raise DimensionError("J must be 2g x 2g")
        if self.basis_change.rows != n or self.basis_change.cols != n:
            raise DimensionError("basis_change must be 2g x 2g")
        jj = self.j @ self.j
        minus_one = RationalMatrix.identity(n).scale(-1)
        if jj.entries != minus_one.entries:
            raise ValueError("J * J != -I")
        if self.basis_change.det() == 0:
            raise ValueError("basis_change is singular")

    @property
    def rank(self) -> int:
        return 2 * self.g


@dataclass(frozen=True)
class TorsionPoint:
    """Point of finite order, coordinates canonicalized into [0, 1)."""

    coords: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(Fraction(c) % 1 for c in self.coords))

    @classmethod
    def zero(cls, n: int) -> "TorsionPoint":
        return cls((Fraction(0),) * n)

    def __len__(self) -> int:
        return len(self.coords)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def order(self) -> int:
        return lcm(*(c.denominator for c in self.coords)) if self.coords else 1

    def add(self, other: "TorsionPoint") -> "TorsionPoint":
        if len(other) != len(self):
            raise DimensionError("point length mismatch")
        return TorsionPoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def neg(self) -> "TorsionPoint":
        return TorsionPoint(tuple(-a for a in self.coords))

    def sub(self, other: "TorsionPoint") -> "TorsionPoint":
        return self.add(other.neg())

    def scale(self, n: int) -> "TorsionPoint":
        return TorsionPoint(tuple(n * a for a in self.coords))


def point(*coords) -> TorsionPoint:
    """Convenience constructor from ints / Fractions / strings."""
    return TorsionPoint(tuple(Fraction(c) for c in coords))


@dataclass(frozen=True)
class FiniteSubgroup:
    """Finite subgroup of a torus, closed under the group law.

    The element set is computed at construction by closing the
    generators under addition, so it is a subgroup by construction.
    """

    ambient: ComplexTorus
    generators: tuple[TorsionPoint, ...]
    elements: frozenset[TorsionPoint] = field(init=False)

    def __post_init__(self) -> None:
        n = self.ambient.rank
        for gpt in self.generators:
            if len(gpt) != n:
                raise DimensionError("generator length must be 2g")
        elems = {TorsionPoint.zero(n)}
        frontier = [TorsionPoint.zero(n)]
        while frontier:
            nxt = []
            for e in frontier:
                for gpt in self.generators:
                    s = e.add(gpt)
                    if s not in elems:
                        elems.add(s)
                        nxt.append(s)
            frontier = nxt
        object.__setattr__(self, "elements", frozenset(elems))

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def exponent(self) -> int:
        return lcm(*(e.order() for e in self.elements))

    def contains(self, p: TorsionPoint) -> bool:
        return p in self.elements

    def sorted_elements(self) -> list[TorsionPoint]:
        return sorted(self.elements, key=lambda e: e.coords)

    def invariants(self) -> tuple[int, ...]:
        """Elementary divisors > 1 of the subgroup as an abstract group.

        Computed from the Smith form of the lattice extension matrix:
        the subgroup equals (Z^n + lifts) / Z^n.
        """
        n = self.ambient.rank
        ext = _extended_lattice_basis(n, self.generators)
        # invariants of ext_lattice / Z^n: Smith form of the matrix of
        # Z^n written in the extension basis
        inv = ext.inverse()
        if not inv.is_integral():
            raise RuntimeError("internal error: extension basis does not contain Z^n")
        dec = snf(inv.to_integer())
        return tuple(d for d in dec.elementary_divisors if d > 1)


def elliptic_curve(param: EllipticCurveParam) -> ComplexTorus:
    """Torus of an elliptic curve in the lattice basis (1, tau).

    Multiplication by i sends the basis vector 1 to (-x/y, 1/y) and tau
    to (-(x^2 + y^2)/y, x/y), for tau = x + i y.
    """
    x, y = param.tau_re, param.tau_im
    j = RationalMatrix.from_rows(
        [
            [-x / y, -(x * x + y * y) / y],
            [Fraction(1) / y, x / y],
        ]
    )
    return ComplexTorus(1, j, RationalMatrix.identity(2), ((0, 2),))


def product(factors: Sequence[ComplexTorus]) -> ComplexTorus:
    """Product torus with block diagonal J and block bookkeeping."""
    if not factors:
        raise ValueError("empty product")
    g = sum(t.g for t in factors)
    n = 2 * g
    jrows = [[Fraction(0)] * n for _ in range(n)]
    brows = [[Fraction(0)] * n for _ in range(n)]
    blocks: list[tuple[int, int]] = []
    off = 0
    for t in factors:
        m = t.rank
        for i in range(m):
            for k in range(m):
                jrows[off + i][off + k] = t.j.at(i, k)
                brows[off + i][off + k] = t.basis_change.at(i, k)
        blocks.append((off, m))
        off += m
    return ComplexTorus(g, RationalMatrix.from_rows(jrows), RationalMatrix.from_rows(brows), tuple(blocks))


def _extended_lattice_basis(n: int, gens: Sequence[TorsionPoint]) -> RationalMatrix:
    """Column basis of Z^n + sum Z * lift(gen), by column Hermite form."""
    d = 1
    for gpt in gens:
        for c in gpt.coords:
            d = lcm(d, c.denominator)
    cols: list[list[int]] = []
    for i in range(n):
        cols.append([d if k == i else 0 for k in range(n)])
    for gpt in gens:
        cols.append([int(c * d) for c in gpt.coords])
    m = IntegerMatrix.from_columns(cols)
    h, _ = column_hnf(m)
    nz = [jj for jj in range(h.cols) if any(h.at(i, jj) != 0 for i in range(h.rows))]
    if len(nz) != n:
        raise RuntimeError("internal error: extended lattice not full rank")
    basis = h.submatrix_columns(nz)
    return RationalMatrix(
        n, n, tuple(Fraction(e, d) for e in basis.entries)
    )


def quotient_by_finite_subgroup(t: ComplexTorus, h: FiniteSubgroup) -> ComplexTorus:
    """Torus T / H: same vector space, lattice enlarged by the lifts of H.

    The new basis B (current coordinates) satisfies |det B| = 1/|H|;
    the returned torus has J rewritten as B^{-1} J B and basis_change
    composed with B.
    """
    if h.ambient != t:
        raise ValueError("subgroup does not live on this torus")
    b = _extended_lattice_basis(t.rank, h.generators)
    if (Fraction(1) / abs(b.det())) != h.order:
        raise RuntimeError("internal error: quotient index mismatch")
    binv = b.inverse()
    j_new = binv @ t.j @ b
    return ComplexTorus(t.g, j_new, t.basis_change @ b, t.blocks)


def coordinate_change(t_from: ComplexTorus, t_to: ComplexTorus) -> RationalMatrix:
    """Matrix converting t_from coordinates to t_to coordinates.

    Both tori must share the same reference lattice (same construction
    chain); the change is bc_to^{-1} @ bc_from.
    """
    return t_to.basis_change.inverse() @ t_from.basis_change


def transport_point(t_from: ComplexTorus, t_to: ComplexTorus, p: TorsionPoint) -> TorsionPoint:
    """Rewrite a torsion point in the coordinates of another presentation."""
    c = coordinate_change(t_from, t_to)
    return TorsionPoint(c.apply(p.coords))


def transport_matrix(t_from: ComplexTorus, t_to: ComplexTorus, a: IntegerMatrix) -> RationalMatrix:
    """Rewrite a lattice endomorphism in the coordinates of t_to."""
    c = coordinate_change(t_from, t_to)
    return c @ a.to_rational() @ c.inverse()


def _check_commutes(t: ComplexTorus, a: IntegerMatrix) -> None:
    ar = a.to_rational()
    if (ar @ t.j).entries != (t.j @ ar).entries:
        raise HolomorphyError("matrix does not commute with the complex structure")


def connected_kernel(t: ComplexTorus, a: IntegerMatrix) -> Sublattice:
    """Lattice of the connected component of ker(a) on the torus.

    This is the saturated lattice of rational kernel vectors of a; it
    presents the subtorus (ker a)^0.
    """
    if a.rows != t.rank or a.cols != t.rank:
        raise DimensionError("endomorphism must be 2g x 2g")
    _check_commutes(t, a)
    return kernel_sublattice(a)


def image_subtorus(t: ComplexTorus, a: IntegerMatrix) -> Sublattice:
    """Saturated lattice of the subtorus a(T)."""
    if a.rows != t.rank or a.cols != t.rank:
        raise DimensionError("endomorphism must be 2g x 2g")
    _check_commutes(t, a)
    return image_saturation(a)


def lattice_intersection(w_basis: RationalMatrix, t: ComplexTorus) -> Sublattice:
    """Saturated lattice (Q-span of the given columns) meet Z^(2g)."""
    if w_basis.rows != t.rank:
        raise DimensionError("subspace basis rows must equal 2g")
    if w_basis.cols == 0:
        return Sublattice(t.rank, IntegerMatrix(t.rank, 0, ()), saturated=True)
    if rational_rank(w_basis) != w_basis.cols:
        raise ValueError("subspace basis columns are not independent")
    scaled, _ = w_basis.scaled_integer()
    return image_saturation(scaled)


def component_group(t: ComplexTorus, lat: Sublattice) -> tuple[FiniteSubgroup, tuple[int, ...]]:
    """Quotient of the lattice of t by a full sublattice, as torus points.

    Returns the finite group Lambda / lat together with its elementary
    divisors > 1.  The group elements are presented as torsion points in
    the coordinates of the sublattice basis, i.e. as points of the torus
    the sublattice presents.
    """
    n = t.rank
    if lat.ambient_rank != n or lat.rank != n:
        raise DimensionError("component group needs a full-rank sublattice")
    m = lat.basis
    dec = snf(m)
    gens: list[TorsionPoint] = []
    divisors: list[int] = []
    for i in range(n):
        d = dec.d.at(i, i)
        if d > 1:
            divisors.append(d)
            col = dec.v.column(i)
            gens.append(TorsionPoint(tuple(Fraction(x, d) for x in col)))
    m_rat = m.to_rational()
    sub_torus = ComplexTorus(
        t.g,
        m_rat.inverse() @ t.j @ m_rat,
        t.basis_change @ m_rat,
        t.blocks,
    )
    return FiniteSubgroup(sub_torus, tuple(gens)), tuple(sorted(divisors))
