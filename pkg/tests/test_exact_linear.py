"""Exact integer/rational linear algebra tests.

Oracles come first and are deliberately naive: determinants by Laplace
expansion, Smith divisors by minor gcds, solvability by grid search.
"""

import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from hyptor.exact_linear import (
    DimensionError,
    IntegerMatrix,
    NotUnimodularError,
    RationalMatrix,
    Sublattice,
    column_hnf,
    hnf,
    image_saturation,
    kernel_sublattice,
    lattice_membership,
    rational_rank,
    rational_solve,
    saturate,
    snf,
    solve_affine_mod_lattice,
    unimodular_inverse,
)

# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------


def laplace_det(rows):
    """Integer determinant by first-row Laplace expansion."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = 0
    for j, entry in enumerate(rows[0]):
        if entry == 0:
            continue
        minor = [r[:j] + r[j + 1 :] for r in rows[1:]]
        total += (-1) ** j * entry * laplace_det(minor)
    return total


def minor_gcd_divisors(m: IntegerMatrix):
    """Elementary divisors via determinantal divisors: d_k = D_k / D_{k-1}
    where D_k is the gcd of all k x k minors (D_0 = 1)."""
    rows = m.to_rows()
    n, c = m.rows, m.cols
    divisors = []
    prev = 1
    for k in range(1, min(n, c) + 1):
        g = 0
        for ri in itertools.combinations(range(n), k):
            for ci in itertools.combinations(range(c), k):
                sub = [[rows[i][j] for j in ci] for i in ri]
                g = math.gcd(g, abs(laplace_det(sub)))
        if g == 0:
            break
        divisors.append(g // prev)
        prev = g
    return tuple(divisors)


def grid_solvable(a: RationalMatrix, b, box: int, denominator: int) -> bool:
    """Exhaustive search for x with a x = b + (integer vector).

    Scans x with coordinates k/denominator over [0, box).  Complete only
    when box and denominator are chosen per instance (see callers).
    """
    n = a.rows
    coords = [Fraction(k, denominator) for k in range(box * denominator)]
    bvec = [Fraction(t) for t in b]
    for x in itertools.product(coords, repeat=n):
        ax = a.apply(x)
        if all((ax[i] - bvec[i]).denominator == 1 for i in range(n)):
            return True
    return False


def rand_int_matrix(rng, n, c, lo=-4, hi=4) -> IntegerMatrix:
    return IntegerMatrix.from_rows(
        [[rng.randint(lo, hi) for _ in range(c)] for _ in range(n)]
    )


def rand_unimodular(rng, n) -> IntegerMatrix:
    """Product of random elementary row operations on the identity."""
    m = IntegerMatrix.identity(n).to_rows()
    for _ in range(3 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        f = rng.randint(-2, 2)
        m[i] = [a + f * b for a, b in zip(m[i], m[j])]
    if rng.random() < 0.5:
        rng.shuffle(m)
    return IntegerMatrix.from_rows(m)


def is_unimodular(m: IntegerMatrix) -> bool:
    return m.rows == m.cols and abs(laplace_det(m.to_rows())) == 1


# ---------------------------------------------------------------------------
# Hermite form
# ---------------------------------------------------------------------------


def test_hnf_shape_and_transform():
    rng = random.Random(11)
    for _ in range(120):
        n, c = rng.randint(1, 5), rng.randint(1, 5)
        m = rand_int_matrix(rng, n, c)
        h, u = hnf(m)
        assert is_unimodular(u)
        assert (u @ m).entries == h.entries
        # echelon: pivot columns strictly increase, zero rows trail
        pivots = []
        for i in range(n):
            row = h.row(i)
            nz = [j for j, x in enumerate(row) if x != 0]
            if not nz:
                assert all(not any(h.row(k)) for k in range(i, n))
                break
            assert not pivots or nz[0] > pivots[-1][1]
            pivots.append((i, nz[0]))
        for i, j in pivots:
            p = h.at(i, j)
            assert p > 0
            for k in range(i):
                assert 0 <= h.at(k, j) < p


def test_hnf_invariant_of_row_space():
    rng = random.Random(12)
    for _ in range(60):
        n, c = rng.randint(1, 4), rng.randint(1, 4)
        m = rand_int_matrix(rng, n, c)
        g = rand_unimodular(rng, n)
        h1, _ = hnf(m)
        h2, _ = hnf(g @ m)
        assert h1.entries == h2.entries


def test_hnf_zero_and_identity():
    z = IntegerMatrix.from_rows([[0, 0], [0, 0]])
    h, u = hnf(z)
    assert h.entries == z.entries and is_unimodular(u)
    i3 = IntegerMatrix.identity(3)
    h, _ = hnf(i3)
    assert h.entries == i3.entries


def test_column_hnf_transform():
    rng = random.Random(13)
    for _ in range(40):
        m = rand_int_matrix(rng, rng.randint(1, 4), rng.randint(1, 4))
        h, v = column_hnf(m)
        assert is_unimodular(v)
        assert (m @ v).entries == h.entries


# ---------------------------------------------------------------------------
# Smith form
# ---------------------------------------------------------------------------


def test_snf_properties_random():
    rng = random.Random(21)
    for _ in range(150):
        n, c = rng.randint(1, 5), rng.randint(1, 5)
        m = rand_int_matrix(rng, n, c)
        dec = snf(m)
        assert is_unimodular(dec.u) and is_unimodular(dec.v)
        assert (dec.u @ m @ dec.v).entries == dec.d.entries
        diag = dec.diagonal
        for i in range(len(diag) - 1):
            assert diag[i] >= 0
            if diag[i + 1] != 0:
                assert diag[i] != 0 and diag[i + 1] % diag[i] == 0
        # off-diagonal must vanish
        for i in range(dec.d.rows):
            for j in range(dec.d.cols):
                if i != j:
                    assert dec.d.at(i, j) == 0


def test_snf_divisors_match_minor_gcd_oracle():
    rng = random.Random(22)
    for _ in range(120):
        n, c = rng.randint(1, 4), rng.randint(1, 4)
        m = rand_int_matrix(rng, n, c, -5, 5)
        assert snf(m).elementary_divisors == minor_gcd_divisors(m)


def test_snf_regression_cycling_matrix():
    # This matrix made the reduction cycle forever before the exact
    # single-elimination fast path: non-canonical Bezout coefficients
    # kept mixing a pivot row back into cleared entries.
    m = IntegerMatrix.from_rows(
        [
            [-2, 0, -2, 0, 0, 0],
            [0, -1, 1, -1, 0, 0],
            [1, 0, 0, 0, 0, 0],
            [1, 1, 1, -1, 0, 0],
            [0, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 0],
        ]
    )
    dec = snf(m)
    assert dec.elementary_divisors == (1, 1, 2, 2)
    assert dec.zero_rows == (4, 5)
    assert dec.elementary_divisors == minor_gcd_divisors(m)


def test_rank_matches_numpy():
    rng = random.Random(23)
    for _ in range(80):
        n, c = rng.randint(1, 5), rng.randint(1, 5)
        m = rand_int_matrix(rng, n, c)
        expected = np.linalg.matrix_rank(np.array(m.to_rows(), dtype=float))
        assert rational_rank(m.to_rational()) == expected
        assert snf(m).rank == expected


# ---------------------------------------------------------------------------
# congruence solver
# ---------------------------------------------------------------------------


def test_solve_affine_matches_grid_search():
    rng = random.Random(31)
    checked = 0
    while checked < 250:
        n = rng.randint(1, 3)
        a = rand_int_matrix(rng, n, n, -3, 3)
        den_b = rng.choice((1, 2, 3, 4))
        b = [Fraction(rng.randint(-4, 4), den_b) for _ in range(n)]
        # completeness: a solution, if any, exists with denominator
        # dividing lcm(divisors) * den(b); integer linear part means
        # solutions are invariant mod Z^n, so box = 1
        divisors = minor_gcd_divisors(a)
        lcm_d = math.lcm(*divisors) if divisors else 1
        g = lcm_d * den_b
        if g**n > 30000:
            continue
        checked += 1
        res = solve_affine_mod_lattice(a.to_rational(), b)
        assert res.solvable == grid_solvable(a.to_rational(), b, 1, g)
        if res.solvable:
            ax = a.to_rational().apply(res.x)
            for i in range(n):
                assert (ax[i] - b[i]).denominator == 1
                assert ax[i] - b[i] == res.m[i]
        else:
            # obstruction row certifies unsolvability
            u = res.obstruction_row
            lhs = [sum(u[i] * a.at(i, j) for i in range(n)) for j in range(n)]
            assert all(x == 0 for x in lhs)
            assert res.obstruction_value.denominator != 1
            assert res.obstruction_value == sum(
                Fraction(u[i]) * b[i] for i in range(n)
            )


def test_solve_affine_rational_linear_part():
    rng = random.Random(32)
    checked = 0
    while checked < 120:
        n = rng.randint(1, 2)
        den_a = rng.choice((1, 2))
        a = RationalMatrix.from_rows(
            [
                [Fraction(rng.randint(-3, 3), den_a) for _ in range(n)]
                for _ in range(n)
            ]
        )
        den_b = rng.choice((1, 2, 4))
        b = [Fraction(rng.randint(-3, 3), den_b) for _ in range(n)]
        a_int, s = a.scaled_integer()
        divisors = minor_gcd_divisors(a_int)
        lcm_d = math.lcm(*divisors) if divisors else 1
        # x is only invariant under s * Z^n here, so scan a box of side s
        g = lcm_d * den_b
        if (s * g) ** n > 40000:
            continue
        checked += 1
        res = solve_affine_mod_lattice(a, b)
        assert res.solvable == grid_solvable(a, b, s, g)


def test_solve_affine_naive_grid_is_incomplete():
    # Solvable, but every solution needs denominator far beyond the
    # inputs' denominators: searching on the inputs' grid finds nothing.
    a = RationalMatrix.from_rows([[4, Fraction(1, 8)], [0, 4]])
    b = (Fraction(1, 8), Fraction(1, 8))
    res = solve_affine_mod_lattice(a, b)
    assert res.solvable
    ax = a.apply(res.x)
    assert all((ax[i] - b[i]).denominator == 1 for i in range(2))
    assert not grid_solvable(a, b, 8, 8)
    assert max(Fraction(t).denominator for t in res.x) > 8


def test_solve_affine_dimension_errors():
    a = RationalMatrix.from_rows([[1, 2]])
    with pytest.raises(DimensionError):
        solve_affine_mod_lattice(a, (1,))
    sq = RationalMatrix.from_rows([[1, 0], [0, 1]])
    with pytest.raises(DimensionError):
        solve_affine_mod_lattice(sq, (1,))


def test_rational_solve_matches_numpy():
    rng = random.Random(33)
    for _ in range(80):
        n = rng.randint(1, 4)
        m = rand_int_matrix(rng, n, n, -3, 3).to_rational()
        b = [Fraction(rng.randint(-3, 3)) for _ in range(n)]
        x = rational_solve(m, b)
        arr = np.array([[float(m.at(i, j)) for j in range(n)] for i in range(n)])
        bf = np.array([float(t) for t in b])
        aug_rank = np.linalg.matrix_rank(np.column_stack([arr, bf]))
        solvable = aug_rank == np.linalg.matrix_rank(arr)
        assert (x is not None) == solvable
        if x is not None:
            assert m.apply(x) == tuple(b)


# ---------------------------------------------------------------------------
# unimodular inverse, sublattices
# ---------------------------------------------------------------------------


def test_unimodular_inverse_roundtrip():
    rng = random.Random(41)
    for _ in range(40):
        n = rng.randint(1, 5)
        g = rand_unimodular(rng, n)
        ginv = unimodular_inverse(g)
        assert (g @ ginv).entries == IntegerMatrix.identity(n).entries
    with pytest.raises(NotUnimodularError):
        unimodular_inverse(IntegerMatrix.from_rows([[2, 0], [0, 1]]))


def test_lattice_membership_basics():
    basis = IntegerMatrix.from_rows([[2, 0], [0, 3]])
    lat = Sublattice(2, basis)
    ok, coords = lattice_membership((4, 3), lat)
    assert ok and coords == (2, 1)
    ok, coords = lattice_membership((1, 0), lat)
    assert not ok and coords is None
    zero = Sublattice(3, IntegerMatrix(3, 0, ()))
    assert lattice_membership((0, 0, 0), zero)[0]
    assert not lattice_membership((1, 0, 0), zero)[0]


def test_lattice_membership_random_roundtrip():
    rng = random.Random(42)
    for _ in range(60):
        n, r = rng.randint(1, 4), rng.randint(1, 3)
        basis = rand_int_matrix(rng, n, r, -3, 3)
        if rational_rank(basis.to_rational()) != r:
            continue
        lat = Sublattice(n, basis)
        coeff = [rng.randint(-3, 3) for _ in range(r)]
        v = tuple(
            sum(basis.at(i, j) * coeff[j] for j in range(r)) for i in range(n)
        )
        ok, coords = lattice_membership(v, lat)
        assert ok and coords == tuple(coeff)


def test_saturate_examples():
    lat = Sublattice(2, IntegerMatrix.from_rows([[2, 0], [0, 2]]))
    sat = saturate(lat)
    assert sat.saturated
    assert lattice_membership((1, 0), sat)[0]
    assert lattice_membership((0, 1), sat)[0]
    # index-preserving direction: rank stays, span only grows
    diag = Sublattice(3, IntegerMatrix.from_rows([[2, 0], [0, 0], [0, 6]]))
    sat = saturate(diag)
    assert sat.rank == 2
    assert lattice_membership((1, 0, 0), sat)[0]
    assert lattice_membership((0, 0, 1), sat)[0]
    assert not lattice_membership((0, 1, 0), sat)[0]


def test_kernel_and_image_lattices():
    rng = random.Random(43)
    for _ in range(60):
        n, c = rng.randint(1, 4), rng.randint(1, 4)
        a = rand_int_matrix(rng, n, c, -3, 3)
        ker = kernel_sublattice(a)
        assert ker.rank == c - snf(a).rank
        for j in range(ker.rank):
            col = tuple(ker.basis.at(i, j) for i in range(c))
            assert all(x == 0 for x in a.apply(col))
        img = image_saturation(a)
        assert img.rank == snf(a).rank
        # every column of a lies in the saturation
        for j in range(c):
            col = tuple(a.at(i, j) for i in range(n))
            assert lattice_membership(col, img)[0]


def test_sublattice_canonical_equality():
    rng = random.Random(44)
    for _ in range(40):
        n, r = rng.randint(1, 4), rng.randint(1, 3)
        basis = rand_int_matrix(rng, n, r, -3, 3)
        if rational_rank(basis.to_rational()) != r:
            continue
        g = rand_unimodular(rng, r)
        lat1 = Sublattice(n, basis).canonical()
        lat2 = Sublattice(n, basis @ g).canonical()
        assert lat1.basis.entries == lat2.basis.entries
