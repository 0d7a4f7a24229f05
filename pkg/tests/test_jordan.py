"""Spectral analysis: exact structure, normalized power asymptotics, limit
operators, cone checks."""

import mpmath as mp
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerdyn import (
    ExactMatrix,
    char_poly,
    eigen_structure,
    lambda_infinity,
    perron_frobenius_check,
    power_asymptotics,
)
from kahlerdyn.errors import ConeNotPreserved, NotInvertible, ThetaNotResolved
from kahlerdyn.jordan import limit_matrices, mp_matrix_inf_norm

x = sp.Symbol("x")

J22 = ExactMatrix([[2, 1], [0, 2]])
CAT = ExactMatrix([[2, 1], [1, 1]])
ROT = ExactMatrix([[0, -2], [2, 0]])
CUBIC = ExactMatrix([[0, 0, 1], [1, 0, 0], [0, 1, -1]])  # companion of x^3 + x^2 - 1


class TestCharPoly:
    def test_fibonacci_like(self):
        # 2x2 determinant expansion by hand: (x-2)(x-1) - 1
        res = char_poly(CAT)
        assert res.poly == sp.Poly(x**2 - 3 * x + 1, x)
        assert len(res.factors) == 1

    def test_identity_cubed(self):
        res = char_poly(ExactMatrix.identity(3))
        assert res.poly == sp.Poly((x - 1) ** 3, x, expand=True)
        assert res.factors == [(sp.Poly(x - 1, x), 3)]

    def test_rotation(self):
        res = char_poly(ROT)
        assert res.poly == sp.Poly(x**2 + 4, x)

    def test_monic_and_degree(self):
        res = char_poly(CUBIC)
        assert res.poly.LC() == 1
        assert res.poly.degree() == 3


class TestEigenStructure:
    def test_jordan_block(self):
        info = eigen_structure(J22)
        assert info.multiplicity == 2
        assert len(info.blocks) == 1
        assert info.blocks[0][1] == 2
        assert abs(info.spectral_radius - 2) < mp.mpf(2) ** -100
        assert info.theta == [0]
        assert str(info.theta_group) == "Trivial"

    def test_cat_map(self):
        info = eigen_structure(CAT)
        golden = (3 + mp.sqrt(5)) / 2
        assert info.multiplicity == 1
        assert abs(info.spectral_radius - golden) < mp.mpf(2) ** -100
        assert info.theta == [0]
        assert str(info.theta_group) == "Trivial"

    def test_rotation_angles(self):
        info = eigen_structure(ROT)
        assert abs(info.spectral_radius - 2) < mp.mpf(2) ** -100
        assert info.multiplicity == 1
        assert info.nu == 2
        angles = sorted(float(t) for t in info.theta)
        assert angles == pytest.approx([float(mp.pi / 2), float(3 * mp.pi / 2)])
        assert str(info.theta_group) == "FiniteCyclic(4)"

    def test_positive_dimensional_closure(self):
        info = eigen_structure(CUBIC)
        assert info.theta_group.kind == "PositiveDimensional"

    def test_not_invertible(self):
        with pytest.raises(NotInvertible):
            eigen_structure(ExactMatrix([[1, 1], [1, 1]]))

    def test_block_sizes_sum_to_dim(self):
        for m in (J22, CAT, ROT, CUBIC, ExactMatrix.identity(4)):
            info = eigen_structure(m)
            assert sum(size for _, size in info.blocks) == m.dim

    def test_gaussian_entries(self):
        m = ExactMatrix([["i", "1"], ["0", "1+i"]])
        info = eigen_structure(m)
        assert abs(info.spectral_radius - mp.sqrt(2)) < mp.mpf(2) ** -100

    def test_exact_sign_tie(self):
        # 2 and -2 tie in modulus; the group generated by the angles has order 2
        info = eigen_structure(ExactMatrix([[2, 0], [0, -2]]))
        assert info.nu == 2
        assert str(info.theta_group) == "FiniteCyclic(2)"
        assert info.dim_strict_dominant == 1

    def test_mixed_block_sizes_one_eigenvalue(self):
        info = eigen_structure(ExactMatrix([[2, 0, 0], [0, 2, 1], [0, 0, 2]]))
        assert sorted(s for _, s in info.blocks) == [1, 2]
        assert info.multiplicity == 2
        assert info.nu == 1  # only the size-2 block is dominant

    def test_conjugate_structures_separated_for_gaussian(self):
        # rational characteristic polynomial, non-real matrix: the two
        # conjugate eigenvalues carry different block structures
        m = ExactMatrix([["i", "1", "0", "0"], ["0", "i", "0", "0"],
                         ["0", "0", "-i", "0"], ["0", "0", "0", "-i"]])
        info = eigen_structure(m)
        by_value = {}
        for ev, size in info.blocks:
            key = mp.nstr(ev, 10)
            by_value.setdefault(key, []).append(size)
        assert sorted(map(sorted, by_value.values())) == [[1, 1], [2]]


def _brute_force_block_sizes(matrix, eigenvalue, prec=256):
    """Independent numeric route: Jordan sizes from SVD nullities of
    (M - lambda I)^j at high precision."""
    with mp.workprec(prec):
        m_num = matrix.to_mp()
        dim = matrix.dim
        shift = m_num - eigenvalue * mp.eye(dim)
        tol = mp.mpf(2) ** (-prec // 2)
        nullities = [0]
        power = mp.eye(dim)
        for _ in range(dim):
            power = power * shift
            svals = mp.svd_c(power.copy(), compute_uv=False)
            top = max(svals)
            rank = sum(1 for s in svals if top > 0 and s > tol * top) if top > 0 else 0
            nullities.append(dim - rank)
            if len(nullities) > 2 and nullities[-1] == nullities[-2]:
                break
        counts_ge = [nullities[j] - nullities[j - 1] for j in range(1, len(nullities))]
        sizes = []
        for size in range(len(counts_ge), 0, -1):
            above = counts_ge[size] if size < len(counts_ge) else 0
            sizes.extend([size] * (counts_ge[size - 1] - above))
        return sorted((s for s in sizes if s > 0), reverse=True)


@pytest.mark.parametrize(
    "rows",
    [
        [[2, 1], [0, 2]],
        [[2, 1], [1, 1]],
        [[0, -2], [2, 0]],
        [[1, 1, 0], [0, 1, 0], [0, 0, 3]],
        [[2, 1, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 5]],
        [[1, 2, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 3, 1, 0], [0, 0, 0, 3, 0], [0, 0, 0, 0, 7]],
        [
            [2, 1, 0, 0, 0, 0],
            [1, 1, 0, 0, 0, 0],
            [0, 0, 2, 1, 0, 0],
            [0, 0, 0, 2, 0, 0],
            [0, 0, 0, 0, 0, -2],
            [0, 0, 0, 0, 2, 0],
        ],
    ],
)
def test_block_sizes_match_brute_force_rank(rows):
    m = ExactMatrix(rows)
    info = eigen_structure(m)
    seen = set()
    for idx, (ev, size) in enumerate(info.blocks):
        key = (mp.nstr(ev, 20), )
        if key in seen:
            continue
        seen.add(key)
        expected = _brute_force_block_sizes(m, ev)
        mine = sorted(
            (s for e2, s in info.blocks if abs(e2 - ev) < mp.mpf(2) ** -60), reverse=True
        )
        assert mine == expected


class TestPowerAsymptotics:
    def test_jordan_block_corner_entry(self):
        # the (1,2) entry of the n-th power is n * 2^(n-1), exactly
        for n, rows in J22.power_sequence(40):
            assert rows[0][1][0] == n * 2 ** (n - 1)
            assert rows[0][0][0] == 2**n

    def test_identity_normalized_constant(self):
        ident = ExactMatrix.identity(3)
        info = eigen_structure(ident)
        rep = power_asymptotics(ident, info, (5, 40))
        assert all(v == 1 for v in rep.normalized_norms)
        assert rep.rate_kind == "exact"

    def test_cat_map_geometric_rate(self):
        info = eigen_structure(CAT)
        rep = power_asymptotics(CAT, info, (10, 60))
        assert rep.within_interval
        assert rep.rate_kind == "geometric"

    def test_bounded_window_protocol(self):
        info = eigen_structure(J22)
        rep = power_asymptotics(J22, info, (20, 200))
        assert rep.within_interval
        c1, c2 = rep.interval
        assert 0 < c1 <= c2 < mp.inf


class TestLambdaInfinity:
    def test_jordan_block_closed_form(self):
        # J^n = [[2^n, n 2^(n-1)], [0, 2^n]] gives the limit [[0, 1/2], [0, 0]]
        info = eigen_structure(J22)
        ops = lambda_infinity(J22, info, n_range=(20, 120))
        expected = mp.matrix([[0, mp.mpf(1) / 2], [0, 0]])
        assert mp_matrix_inf_norm(ops.limit - expected) < mp.mpf(2) ** -90
        assert ops.rank_averaged == 1 == ops.dim_strict_dominant
        assert ops.twisted_report.bound.holds
        assert ops.averaged_report.bound.holds

    def test_rotation_average_is_zero(self):
        # direct Cesàro summation of (+-2i)^n / 2^n oscillates to zero
        info = eigen_structure(ROT)
        ops = lambda_infinity(ROT, info, n_range=(20, 200))
        assert mp_matrix_inf_norm(ops.averaged_limit) < mp.mpf(2) ** -90
        assert ops.rank_averaged == 0 == ops.dim_strict_dominant
        oracle = mp.zeros(2)
        power = mp.eye(2)
        for n in range(1, 401):
            power = power * ROT.to_mp()
            oracle = oracle + power / mp.mpf(2) ** n
        assert mp_matrix_inf_norm(oracle / 400) < mp.mpf("0.02")

    def test_scaled_identity(self):
        m = ExactMatrix([[2, 0], [0, 2]])
        info = eigen_structure(m)
        ops = lambda_infinity(m, info, n_range=(20, 60))
        assert mp_matrix_inf_norm(ops.limit - mp.eye(2)) < mp.mpf(2) ** -90

    def test_trivial_closure_has_subsequence_free_limit(self):
        # limits along even and odd times agree when the closure is trivial
        info = eigen_structure(CAT)
        lim, _, _, _ = limit_matrices(CAT, info)
        lam, m = info.spectral_radius, info.multiplicity
        vals = {}
        for n, rows in CAT.power_sequence(121):
            if n in (120, 121):
                mat = mp.matrix([[mp.mpf(int(e[0].numerator)) / int(e[0].denominator) for e in row] for row in rows])
                vals[n] = mat / (mp.mpf(n) ** (m - 1) * lam**n)
        assert mp_matrix_inf_norm(vals[120] - lim) < mp.mpf(10) ** -20
        assert mp_matrix_inf_norm(vals[121] - lim) < mp.mpf(10) ** -20

    def test_untwisted_refused_for_positive_dimensional(self):
        info = eigen_structure(CUBIC)
        with pytest.raises(ThetaNotResolved):
            lambda_infinity(CUBIC, info, n_range=(20, 40), untwisted=True)

    def test_rank_counts_strictly_dominant_blocks(self):
        m = ExactMatrix([[2, 0, 0], [0, 2, 0], [0, 0, 1]])
        info = eigen_structure(m)
        ops = lambda_infinity(m, info, n_range=(20, 60))
        assert ops.rank_averaged == 2 == ops.dim_strict_dominant


class TestPerronFrobenius:
    def test_cat_map_positive_quadrant(self):
        report = perron_frobenius_check(CAT, [[1, 0], [0, 1]])
        assert report.cone_preserved and not report.falsified
        golden = (1 + mp.sqrt(5)) / 2
        ratio = report.eigenvector[0] / report.eigenvector[1]
        assert abs(ratio - golden) < 1e-9
        assert all(c >= -1e-9 for c in report.cone_coordinates)

    def test_identity_any_cone(self):
        report = perron_frobenius_check(ExactMatrix.identity(2), [[2, 1], [1, 3]])
        assert report.cone_preserved and not report.falsified
        assert abs(report.spectral_radius - 1) < 1e-20

    def test_rotation_leaves_quadrant(self):
        with pytest.raises(ConeNotPreserved):
            perron_frobenius_check(ExactMatrix([[0, -1], [1, 0]]), [[1, 0], [0, 1]])

    def test_no_dominant_real_eigenvalue_is_falsification(self):
        # scaled rotation preserves no standard cone; feed the whole plane
        gens = [[1, 0], [0, 1], [-1, 0], [0, -1]]
        report = perron_frobenius_check(ROT, gens)
        assert report.cone_preserved
        assert report.falsified and not report.has_dominant_real_eigenvalue


@settings(max_examples=20, deadline=None)
@given(
    st.lists(
        st.lists(st.integers(min_value=-3, max_value=3), min_size=3, max_size=3),
        min_size=3,
        max_size=3,
    )
)
def test_cayley_hamilton_and_block_sums(rows):
    m = ExactMatrix(rows)
    res = char_poly(m)
    evaluated = sp.zeros(3, 3)
    eye = sp.eye(3)
    for c in res.poly.all_coeffs():
        evaluated = evaluated * m.mat + c * eye
    assert evaluated == sp.zeros(3, 3)
    if m.det() != 0:
        info = eigen_structure(m)
        assert sum(size for _, size in info.blocks) == 3
