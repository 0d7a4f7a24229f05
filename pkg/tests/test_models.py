"""Model construction: torus pullbacks with their wedge structure, the
double-cover involution lattice, raw ingestion."""

import itertools

import mpmath as mp
import pytest
import sympy as sp

from kahlerdyn import (
    TorusAutomorphism,
    dynamical_degrees,
    eigen_structure,
    mazur_action,
    mazur_involutions,
    raw_action,
    torus_action,
)
from kahlerdyn.errors import (
    CupIncompatible,
    EmptyWord,
    NotUnitDeterminant,
    ValidationError,
)
from kahlerdyn.models import intersection_form_invariance

x = sp.Symbol("x")


class TestTorusAction:
    def test_identity(self):
        act = torus_action(TorusAutomorphism(2, [[1, 0], [0, 1]]))
        for p in range(3):
            assert act.blocks[p].mat == sp.eye(act.dim(p))

    def test_cat_map_block_dimensions(self, cat_action):
        assert [cat_action.dim(p) for p in range(3)] == [1, 4, 1]

    def test_cat_map_degree_one_radius(self, cat_action):
        info = eigen_structure(cat_action.blocks[1])
        golden_sq = ((3 + mp.sqrt(5)) / 2) ** 2
        assert abs(info.spectral_radius - golden_sq) < mp.mpf(10) ** -30

    def test_top_block_is_unit(self, cat_action, cubic_torus):
        assert cat_action.blocks[2].mat == sp.ImmutableMatrix([[1]])
        act3 = torus_action(cubic_torus)
        entry = act3.blocks[3].mat[0, 0]
        assert abs(entry) == 1

    def test_determinant_must_be_unit(self):
        with pytest.raises(NotUnitDeterminant):
            TorusAutomorphism(2, [["1+i", "0"], ["0", "1"]])
        with pytest.raises(NotUnitDeterminant):
            TorusAutomorphism(2, [[2, 0], [0, 1]])

    def test_gaussian_unit_determinant_accepted(self):
        t = TorusAutomorphism(2, [["1", "1+i"], ["0", "i"]])
        assert t.A.det() == sp.I

    def test_entries_must_be_integral(self):
        with pytest.raises(ValidationError):
            TorusAutomorphism(2, [["1/2", "0"], ["0", "2"]])

    @pytest.mark.parametrize(
        "rows,k",
        [
            ([[2, 1], [1, 1]], 2),
            ([["1", "1+i"], ["0", "i"]], 2),
            ([[0, 0, 1], [1, 0, 0], [0, 1, -1]], 3),
        ],
    )
    def test_tensor_eigenvalue_multiset(self, rows, k):
        """Brute-force oracle: eigenvalues of the (p,p) block are the
        products of p-subsets of eigenvalues with conjugated p-subsets."""
        torus = TorusAutomorphism(k, rows)
        act = torus_action(torus)
        eigs = []
        for val, mult in torus.A.mat.eigenvals().items():
            eigs.extend([complex(sp.N(val, 30))] * mult)
        for p in range(k + 1):
            expected = []
            for idx_i in itertools.combinations(range(k), p):
                for idx_j in itertools.combinations(range(k), p):
                    prod = 1
                    for i in idx_i:
                        prod *= eigs[i]
                    for j in idx_j:
                        prod *= eigs[j].conjugate()
                    expected.append(prod)
            got = []
            for val, mult in act.blocks[p].mat.eigenvals().items():
                got.extend([complex(sp.N(val, 30))] * mult)
            assert len(got) == len(expected)
            for a, b in zip(
                sorted(got, key=lambda z: (round(z.real, 8), round(z.imag, 8))),
                sorted(expected, key=lambda z: (round(z.real, 8), round(z.imag, 8))),
            ):
                assert abs(a - b) < 1e-8

    def test_cup_compatibility_exact(self, cat_action):
        assert cat_action.check_cup_compatibility() > 0

    def test_kahler_powers(self, cat_action):
        # omega^2 doubles the volume basis vector on a 2-torus
        assert cat_action.kahler_class[2] == [sp.Integer(2)]
        assert cat_action.kahler_class[1].count(sp.I) == 2

    def test_pushforward_inverse(self, cat_action):
        prod = cat_action.blocks[1] * cat_action.pushforward_blocks[1]
        assert prod.mat == sp.eye(4)

    def test_duality_pushforward_radius(self, cat_action):
        """The pushforward on the complementary degree grows like d_p."""
        d1 = eigen_structure(cat_action.blocks[1]).spectral_radius
        dual = eigen_structure(cat_action.pushforward_blocks[1]).spectral_radius
        assert abs(d1 - dual) < mp.mpf(10) ** -25


class TestMazurModel:
    def test_closed_form_k2(self, wehler_surface_model):
        tau1 = wehler_surface_model.involutions[0]
        assert tau1.mat == sp.ImmutableMatrix([[-1, 0, 0], [2, 1, 0], [2, 0, 1]])

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_pushpull_matches_closed_form(self, k):
        model = mazur_involutions(k)
        n = k + 1
        for i, tau in enumerate(model.involutions, start=1):
            for j in range(1, n + 1):
                col = [tau.mat[r, j - 1] for r in range(n)]
                if j != i:
                    assert col == [1 if r == j - 1 else 0 for r in range(n)]
                else:
                    expected = [2] * n
                    expected[i - 1] = -1
                    assert col == expected

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_involutions_square_to_identity(self, k):
        model = mazur_involutions(k)
        for tau in model.involutions:
            assert (tau * tau).mat == sp.eye(k + 1)

    def test_intersection_form_preserved(self, wehler_surface_model):
        for tau in wehler_surface_model.involutions:
            assert intersection_form_invariance(wehler_surface_model, tau) > 0

    def test_word_action_spectral_radius(self, wehler_surface_model):
        act = mazur_action(wehler_surface_model.with_word((1, 2, 3)))
        poly = act.blocks[1].mat.charpoly(x)
        largest = max(
            (sp.CRootOf(poly.as_expr(), i) for i in range(3) if sp.CRootOf(poly.as_expr(), i).is_real),
            key=lambda r: abs(r),
        )
        info = eigen_structure(act.blocks[1])
        assert abs(info.spectral_radius - mp.mpf(str(largest.evalf(40)))) < mp.mpf(10) ** -30
        assert info.spectral_radius > 1

    def test_single_letter_word_is_isometry(self, wehler_surface_model):
        act = mazur_action(wehler_surface_model.with_word((1,)))
        info = eigen_structure(act.blocks[1])
        assert info.spectral_radius_is_one()

    def test_repeated_letter_cancels(self, wehler_surface_model):
        act = mazur_action(wehler_surface_model.with_word((1, 1)))
        assert act.blocks[1].mat == sp.eye(3)

    def test_empty_word(self, wehler_surface_model):
        with pytest.raises(EmptyWord):
            mazur_action(wehler_surface_model)

    def test_reversed_word_same_radius(self, wehler_surface_model):
        a = mazur_action(wehler_surface_model.with_word((1, 2, 3)))
        b = mazur_action(wehler_surface_model.with_word((3, 2, 1)))
        ra = eigen_structure(a.blocks[1]).spectral_radius
        rb = eigen_structure(b.blocks[1]).spectral_radius
        assert abs(ra - rb) < mp.mpf(10) ** -30

    def test_word_preserves_intersection_form(self, wehler_surface_model):
        act = mazur_action(wehler_surface_model.with_word((1, 2, 3)))
        assert intersection_form_invariance(wehler_surface_model, act.blocks[1]) > 0

    def test_sublattice_flags(self, wehler_surface_model):
        act = mazur_action(wehler_surface_model.with_word((1, 2, 3)))
        assert act.sublattice_flags == [False, True, False]

    def test_k3_intermediate_degree_flagged(self):
        act = mazur_action(mazur_involutions(3).with_word((1, 2, 3, 4)))
        assert act.sublattice_flags == [False, True, True, False]
        assert act.dim(2) == 6  # exterior square of the rank-4 sublattice


class TestRawAction:
    def test_trivial_blocks(self):
        act = raw_action({"blocks": [[[1]], [[1]], [[1]]]})
        profile = dynamical_degrees(act)
        assert [float(d) for d in profile.degrees] == [1.0, 1.0, 1.0]

    def test_cup_corruption_detected(self, cat_action):
        blocks = [[[str(e) for e in row] for row in b.mat.tolist()] for b in cat_action.blocks]
        kahler = [[str(e) for e in v] for v in cat_action.kahler_class]
        cup = {}
        for p in range(3):
            for q in range(3 - p):
                entries = [
                    [i, j, t, str(c)] for i, j, t, c in cat_action.cup.pairs(p, q)
                ]
                if entries:
                    cup[(p, q)] = entries
        # corrupt one structure constant
        cup[(1, 1)][0][3] = "7"
        with pytest.raises(CupIncompatible):
            raw_action({"blocks": blocks, "kahler": kahler, "cup": cup})

    def test_torus_round_trip_same_profile(self, cat_action):
        blocks = [[[str(e) for e in row] for row in b.mat.tolist()] for b in cat_action.blocks]
        kahler = [[str(e) for e in v] for v in cat_action.kahler_class]
        cup = {}
        for p in range(3):
            for q in range(3 - p):
                entries = [[i, j, t, str(c)] for i, j, t, c in cat_action.cup.pairs(p, q)]
                if entries:
                    cup[(p, q)] = entries
        act2 = raw_action({"blocks": blocks, "kahler": kahler, "cup": cup})
        p1 = dynamical_degrees(cat_action)
        p2 = dynamical_degrees(act2)
        for a, b in zip(p1.degrees, p2.degrees):
            assert abs(a - b) < mp.mpf(10) ** -30
        assert p1.multiplicities == p2.multiplicities

    def test_dimension_mismatch(self):
        with pytest.raises(Exception):
            raw_action({"blocks": [[[1]], [[1, 0], [0, 1]], [[1]]], "kahler": [[1], [1], [1], [1]]})

    def test_top_block_modulus_enforced(self):
        with pytest.raises(ValidationError):
            raw_action({"blocks": [[[1]], [[2, 0], [0, 2]], [[2]]]})
