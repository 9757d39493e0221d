"""The dihedral-of-order-8 family of affine actions on E x E x E'.

The group is generated by an order-4 element r and an involution s.
On complex coordinates (z1, z2, z3) of the product of two copies of a
curve E and a third curve E':

    r(z) = (z2, -z1, z3 + r_shift)
    s(z) = (z1 + s_shift1, -z2 + s_shift2, eps * z3 + s_shift3)

where eps = -1 in Case 1 and eps = +1 in Case 2; the two cases are the
two ways the reflection can act on the third factor.  In Case 1 the
origin of the third curve is normalized so that s_shift3 = 0.  The
action is taken on the quotient of the product by a finite subgroup H,
so both linear parts must preserve the enlarged lattice.

Everything here works on the lattice presentation: one 2-dimensional
real block per curve factor, with the swap z1 <-> z2 realized as a
block swap and sign flips as -I on a block.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .exact_linear import (
    IntegerMatrix,
    RationalMatrix,
    Sublattice,
    lattice_membership,
    snf,
)
from .torus import (
    ComplexTorus,
    EllipticCurveParam,
    FiniteSubgroup,
    TorsionPoint,
    component_group,
    connected_kernel,
    coordinate_change,
    elliptic_curve,
    image_subtorus,
    lattice_intersection,
    product,
    quotient_by_finite_subgroup,
)
from .affine_actions import AffineAut


class CaseTag(enum.Enum):
    """Shape of the reflection on the third factor.

    CASE1: eigenvalue pattern (1, -1, -1) on (z1, z2, z3).
    CASE2: eigenvalue pattern (1, -1, 1).
    """

    CASE1 = "case1"
    CASE2 = "case2"


@dataclass(frozen=True)
class CaseMatrices:
    """Complex 3x3 and lattice 6x6 matrices of the two generators."""

    rotation_complex: tuple[tuple[int, ...], ...]
    reflection_complex: tuple[tuple[int, ...], ...]
    rotation_lattice: IntegerMatrix
    reflection_lattice: IntegerMatrix


_ROTATION_COMPLEX = ((0, 1, 0), (-1, 0, 0), (0, 0, 1))

_ROTATION_LATTICE = IntegerMatrix.from_rows(
    [
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [-1, 0, 0, 0, 0, 0],
        [0, -1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 1],
    ]
)


def case_matrices(case: CaseTag) -> CaseMatrices:
    eps = -1 if case is CaseTag.CASE1 else 1
    refl_complex = ((1, 0, 0), (0, -1, 0), (0, 0, eps))
    refl_lattice = IntegerMatrix.diagonal([1, 1, -1, -1, eps, eps])
    return CaseMatrices(_ROTATION_COMPLEX, refl_complex, _ROTATION_LATTICE, refl_lattice)


@dataclass(frozen=True)
class D4Parameters:
    """Translation data of the family.

    s_shift1, s_shift2 are points of E (lattice coordinates of length
    2), r_shift and s_shift3 points of E'.  subgroup_gens are points of
    the product (length 6) generating the subgroup H that gets divided
    out.  s_shift3 is only meaningful in Case 2 and must be None in
    Case 1, where the origin normalization removes it.
    """

    tau: EllipticCurveParam
    tau_prime: EllipticCurveParam
    s_shift1: TorsionPoint
    s_shift2: TorsionPoint
    r_shift: TorsionPoint
    s_shift3: TorsionPoint | None = None
    subgroup_gens: tuple[TorsionPoint, ...] = ()

    def __post_init__(self) -> None:
        for name in ("s_shift1", "s_shift2", "r_shift"):
            if len(getattr(self, name)) != 2:
                raise ValueError(f"{name} must be a point of a single curve")
        if self.s_shift3 is not None and len(self.s_shift3) != 2:
            raise ValueError("s_shift3 must be a point of a single curve")
        for gpt in self.subgroup_gens:
            if len(gpt) != 6:
                raise ValueError("subgroup generators must be points of the product")


def normal_form_parameters(tau: EllipticCurveParam, tau_prime: EllipticCurveParam) -> D4Parameters:
    """The distinguished parameter point: shifts 1/2, tau/2 and 1/4.

    H is generated by the sum of the two reflection shifts placed on the
    first two factors.
    """
    half = Fraction(1, 2)
    return D4Parameters(
        tau=tau,
        tau_prime=tau_prime,
        s_shift1=TorsionPoint((half, Fraction(0))),
        s_shift2=TorsionPoint((Fraction(0), half)),
        r_shift=TorsionPoint((Fraction(1, 4), Fraction(0))),
        subgroup_gens=(TorsionPoint((half, half, half, half, Fraction(0), Fraction(0))),),
    )


def embed_block(p: TorsionPoint, block: int) -> TorsionPoint:
    """Place a curve point into factor block 0, 1 or 2 of the product."""
    coords = [Fraction(0)] * 6
    coords[2 * block] = p.coords[0]
    coords[2 * block + 1] = p.coords[1]
    return TorsionPoint(tuple(coords))


def block_component(p: TorsionPoint, block: int) -> TorsionPoint:
    return TorsionPoint((p.coords[2 * block], p.coords[2 * block + 1]))


@dataclass(frozen=True)
class D4Action:
    """A constructed family member: quotient torus plus both generators."""

    case: CaseTag
    params: D4Parameters
    product_torus: ComplexTorus
    subgroup: FiniteSubgroup
    torus: ComplexTorus
    r: AffineAut
    s: AffineAut


@dataclass(frozen=True)
class BuildRejection:
    """Soft rejection of a parameter tuple, with a stable reason tag."""

    reason: str
    detail: str


def build_general(case: CaseTag, params: D4Parameters) -> D4Action | BuildRejection:
    """Assemble (T, r, s) for a parameter tuple, or reject it.

    Rejections (not exceptions) cover the conditions a search has to
    filter on: subgroup generators of exponent > 2, and linear parts
    that do not preserve the enlarged lattice.
    """
    if case is CaseTag.CASE1 and params.s_shift3 is not None and not params.s_shift3.is_zero():
        raise ValueError("s_shift3 must be absent in Case 1 (origin normalization)")
    if case is CaseTag.CASE2 and params.s_shift3 is None:
        raise ValueError("s_shift3 is required in Case 2")

    for gpt in params.subgroup_gens:
        if not gpt.scale(2).is_zero():
            return BuildRejection("subgroup_not_exponent_two", f"generator {gpt.coords} has order > 2")

    e = elliptic_curve(params.tau)
    e_prime = elliptic_curve(params.tau_prime)
    t_prod = product([e, e, e_prime])
    h = FiniteSubgroup(t_prod, params.subgroup_gens)
    t_quot = quotient_by_finite_subgroup(t_prod, h)

    mats = case_matrices(case)
    c = coordinate_change(t_prod, t_quot)
    c_inv = coordinate_change(t_quot, t_prod)
    for name, m in (("r", mats.rotation_lattice), ("s", mats.reflection_lattice)):
        conj = c @ m.to_rational() @ c_inv
        if not conj.is_integral():
            return BuildRejection(
                f"lattice_not_preserved:{name}",
                f"linear part of {name} does not stabilize the enlarged lattice",
            )

    a_r = (c @ mats.rotation_lattice.to_rational() @ c_inv).to_integer()
    a_s = (c @ mats.reflection_lattice.to_rational() @ c_inv).to_integer()

    t_r_prod = embed_block(params.r_shift, 2)
    s3 = params.s_shift3 if params.s_shift3 is not None else TorsionPoint.zero(2)
    t_s_prod = embed_block(params.s_shift1, 0).add(embed_block(params.s_shift2, 1)).add(embed_block(s3, 2))

    r = AffineAut(t_quot, a_r, TorsionPoint(c.apply(t_r_prod.coords)))
    s = AffineAut(t_quot, a_s, TorsionPoint(c.apply(t_s_prod.coords)))
    return D4Action(case, params, t_prod, h, t_quot, r, s)


def build_normal_form(tau: EllipticCurveParam, tau_prime: EllipticCurveParam) -> D4Action:
    """The distinguished family member; its construction cannot fail."""
    out = build_general(CaseTag.CASE1, normal_form_parameters(tau, tau_prime))
    if isinstance(out, BuildRejection):
        raise RuntimeError(f"internal error: normal form rejected: {out.reason}")
    return out


@dataclass(frozen=True)
class FreenessConditionReport:
    """Membership and exclusion conditions on H for a Case-1 tuple.

    The three memberships are equivalent to the three defining
    relations of the group closing up on the quotient; the four
    exclusions are equivalent to fixed-point freeness of r, r^2 (and
    r^3), s, and rs respectively.  factors_embed is the normalization
    on H itself: no nonzero element supported in a single curve factor,
    so that each factor still embeds into the quotient.
    """

    factors_embed: bool
    rel_r4_member: bool
    rel_s2_member: bool
    rel_rs2_member: bool
    excl_r_free: bool
    excl_r2_free: bool
    excl_s_free: bool
    excl_rs_free: bool

    @property
    def equivalence_flags_pass(self) -> bool:
        """The seven flags matched against the generic engine verdict."""
        return all(
            (
                self.rel_r4_member,
                self.rel_s2_member,
                self.rel_rs2_member,
                self.excl_r_free,
                self.excl_r2_free,
                self.excl_s_free,
                self.excl_rs_free,
            )
        )

    @property
    def all_pass(self) -> bool:
        return self.factors_embed and self.equivalence_flags_pass

    def as_dict(self) -> dict[str, bool]:
        return {
            "factors_embed": self.factors_embed,
            "rel_r4_member": self.rel_r4_member,
            "rel_s2_member": self.rel_s2_member,
            "rel_rs2_member": self.rel_rs2_member,
            "excl_r_free": self.excl_r_free,
            "excl_r2_free": self.excl_r2_free,
            "excl_s_free": self.excl_s_free,
            "excl_rs_free": self.excl_rs_free,
        }


def check_freeness_conditions(params: D4Parameters) -> FreenessConditionReport:
    """Evaluate the Case-1 membership and exclusion conditions on H.

    All conditions are stated upstairs on the product: H is the set of
    points divided out, a1 = s_shift1, a2 = s_shift2, c = r_shift.

    memberships: (0,0,4c) in H; (2 a1, 0, 0) in H;
    (a1 + a2, -(a1 + a2), 0) in H.
    exclusions: no element of H has third component c (freeness of r
    and r^3) or 2c (freeness of r^2); no element has first component
    a1 (freeness of s); no element (d1, d2, d3) has d1 + a2 = d2 - a1
    (freeness of rs).

    The first and second factors are copies of the same curve, so the
    mixed comparisons are componentwise on shared coordinates; on the
    2-torsion where the surviving tuples live, this agrees with the
    transport along the rotation, which is z -> -z between the factors.
    """
    e = elliptic_curve(params.tau)
    e_prime = elliptic_curve(params.tau_prime)
    t_prod = product([e, e, e_prime])
    h = FiniteSubgroup(t_prod, params.subgroup_gens)

    a1 = params.s_shift1
    a2 = params.s_shift2
    c = params.r_shift

    mem_r4 = h.contains(embed_block(c.scale(4), 2))
    mem_s2 = h.contains(embed_block(a1.scale(2), 0))
    omega = a1.add(a2)
    mem_rs2 = h.contains(embed_block(omega, 0).add(embed_block(omega.neg(), 1)))

    c2 = c.scale(2)
    embed = True
    excl_r = True
    excl_r2 = True
    excl_s = True
    excl_rs = True
    for d in h.elements:
        d1 = block_component(d, 0)
        d2 = block_component(d, 1)
        d3 = block_component(d, 2)
        if not d.is_zero() and (d1.is_zero() + d2.is_zero() + d3.is_zero()) >= 2:
            embed = False
        if d3 == c:
            excl_r = False
        if d3 == c2:
            excl_r2 = False
        if d1 == a1:
            excl_s = False
        if d1.add(a2) == d2.sub(a1):
            excl_rs = False
    return FreenessConditionReport(embed, mem_r4, mem_s2, mem_rs2, excl_r, excl_r2, excl_s, excl_rs)


@dataclass(frozen=True)
class LatticeInclusionReport:
    """Decomposition bounds of the quotient lattice against its blocks.

    block_denominators[i] is the largest denominator appearing in the
    block-i coordinates when lattice basis vectors are written in the
    basis of Lambda_1 + Lambda_2 + Lambda_3; the splitting identities
    are 2 v = (I + S) v + (I - S) v and the analogous one with the
    square of the rotation.
    """

    splitting_ok: bool
    block_denominators: tuple[int, int, int]
    denominator_bound_ok: bool
    quotient_divisors: tuple[int, ...]
    quotient_exponent: int
    exponent_ok: bool


def block_sublattices(t_quot: ComplexTorus) -> tuple[Sublattice, ...]:
    """Lattices of the coordinate subtori inside the quotient lattice.

    Block i spans reference coordinates; in the current basis its
    subspace is spanned by the matching columns of basis_change^{-1},
    and the block lattice is that subspace's intersection with Z^(2g).
    """
    inv = t_quot.basis_change.inverse()
    out = []
    for off, length in t_quot.blocks:
        cols = [inv.column(off + k) for k in range(length)]
        w = RationalMatrix.from_columns(cols)
        out.append(lattice_intersection(w, t_quot))
    return tuple(out)


def lattice_inclusion_check(t_quot: ComplexTorus, case: CaseTag = CaseTag.CASE1) -> LatticeInclusionReport:
    """Check the block-splitting identities and denominator bounds.

    For every basis vector v of the quotient lattice:
    2 v = (I + S) v + (I - S) v with the first summand in Lambda_1 and
    the second in the lattice; then with w = (I - S) v,
    2 w = (I + R^2) w + (I - R^2) w with summands in Lambda_3 and
    Lambda_2.  The denominators of lattice vectors against the block
    sum are bounded by 2 on each block, and the component group of the
    block sum has exponent dividing 2.
    """
    n = t_quot.rank
    mats = case_matrices(case)
    bc = t_quot.basis_change
    c = bc.inverse()
    s_cur = (c @ mats.reflection_lattice.to_rational() @ bc).to_integer()
    r_cur = (c @ mats.rotation_lattice.to_rational() @ bc).to_integer()
    r2_cur = r_cur @ r_cur

    lam1, lam2, lam3 = block_sublattices(t_quot)

    splitting_ok = True
    for jdx in range(n):
        v = tuple(Fraction(1) if i == jdx else Fraction(0) for i in range(n))
        sv = tuple(Fraction(x) for x in s_cur.apply(v))
        plus = tuple(a + b for a, b in zip(v, sv))
        minus = tuple(a - b for a, b in zip(v, sv))
        if any(2 * a != p + q for a, p, q in zip(v, plus, minus)):
            splitting_ok = False
        ok1, _ = lattice_membership(plus, lam1)
        if not ok1 or any(x.denominator != 1 for x in minus):
            splitting_ok = False
        w = minus
        r2w = tuple(Fraction(x) for x in r2_cur.apply(w))
        plus3 = tuple(a + b for a, b in zip(w, r2w))
        minus2 = tuple(a - b for a, b in zip(w, r2w))
        ok3, _ = lattice_membership(plus3, lam3)
        ok2, _ = lattice_membership(minus2, lam2)
        if not ok3 or not ok2:
            splitting_ok = False
        if any(2 * a != p + q for a, p, q in zip(w, plus3, minus2)):
            splitting_ok = False

    block_basis = IntegerMatrix.from_columns(
        [lam1.basis.column(k) for k in range(lam1.rank)]
        + [lam2.basis.column(k) for k in range(lam2.rank)]
        + [lam3.basis.column(k) for k in range(lam3.rank)]
    )
    inv = block_basis.to_rational().inverse()
    denoms = [1, 1, 1]
    sizes = (lam1.rank, lam2.rank, lam3.rank)
    for jdx in range(n):
        coords = inv.column(jdx)
        pos = 0
        for b, sz in enumerate(sizes):
            for k in range(sz):
                d = coords[pos + k].denominator
                if d > denoms[b]:
                    denoms[b] = d
            pos += sz
    dec = snf(block_basis)
    divisors = tuple(d for d in dec.elementary_divisors if d > 1)
    exponent = divisors[-1] if divisors else 1
    return LatticeInclusionReport(
        splitting_ok=splitting_ok,
        block_denominators=(denoms[0], denoms[1], denoms[2]),
        denominator_bound_ok=all(d <= 2 for d in denoms),
        quotient_divisors=divisors,
        quotient_exponent=exponent,
        exponent_ok=exponent in (1, 2),
    )


@dataclass(frozen=True)
class StructureReport:
    """Structural facts about a constructed action used for auditing.

    kernel_image_agree: the connected fixed locus of the reflection
    equals the image of (I + S) as a subtorus (first factor).
    rotated_block_agree: the rotation carries the first block lattice
    onto the second block, which equals the intersection of the second
    coordinate subspace with the lattice.
    component_divisors / omega_matches: the component group of the
    block sum, and whether it is generated by the image of the expected
    2-torsion point.
    """

    kernel_image_agree: bool
    rotated_block_agree: bool
    component_divisors: tuple[int, ...]
    omega_matches: bool
    inclusion: LatticeInclusionReport


def structure_report(action: D4Action) -> StructureReport:
    t = action.torus
    n = t.rank
    mats = case_matrices(action.case)
    c = coordinate_change(action.product_torus, t)
    c_inv = coordinate_change(t, action.product_torus)
    s_cur = (c @ mats.reflection_lattice.to_rational() @ c_inv).to_integer()
    r_cur = (c @ mats.rotation_lattice.to_rational() @ c_inv).to_integer()
    ident = IntegerMatrix.identity(n)

    ker = connected_kernel(t, s_cur - ident)
    img = image_subtorus(t, s_cur + ident)
    kernel_image_agree = ker.canonical().basis.entries == img.canonical().basis.entries

    lam1, lam2, lam3 = block_sublattices(t)
    rotated = Sublattice(n, r_cur @ lam1.basis).canonical()
    rotated_block_agree = rotated.basis.entries == lam2.canonical().basis.entries

    block_basis = IntegerMatrix.from_columns(
        [lam1.basis.column(k) for k in range(lam1.rank)]
        + [lam2.basis.column(k) for k in range(lam2.rank)]
        + [lam3.basis.column(k) for k in range(lam3.rank)]
    )
    cg, divisors = component_group(t, Sublattice(n, block_basis))

    # omega upstairs is an element of H, hence a lattice vector of the
    # quotient; its class generates Lambda / (block sum) iff it is a
    # nonzero element of the component group.  Work with the raw lift,
    # not a torsion point: reduction mod 1 would kill it too early.
    omega_matches = False
    if divisors == (2,):
        shift_sum = action.params.s_shift1.add(action.params.s_shift2)
        omega_prod = embed_block(shift_sum, 0).add(embed_block(shift_sum, 1))
        omega_lift = c.apply(omega_prod.coords)
        block_inv = block_basis.to_rational().inverse()
        omega_block = TorsionPoint(tuple(block_inv.apply(omega_lift)))
        omega_matches = omega_block in cg.elements and not omega_block.is_zero()

    return StructureReport(
        kernel_image_agree=kernel_image_agree,
        rotated_block_agree=rotated_block_agree,
        component_divisors=divisors,
        omega_matches=omega_matches,
        inclusion=lattice_inclusion_check(t, action.case),
    )
