"""Exact character correlations, grid cross-validation, time averages."""

import warnings

import numpy as np
import pytest
import sympy as sp

from kahlerdyn import (
    TorusAutomorphism,
    TrigPolynomial,
    ergodic_average_check,
    grid_correlation,
    haar_character_correlation,
    random_hyperbolic_automorphism,
)
from kahlerdyn.errors import AliasWarning, NotHyperbolic, ValidationError, ZeroFrequency
from kahlerdyn.mixing import (
    _matvec_int,
    _transpose,
    check_hyperbolic,
    realified_lattice_map,
)


@pytest.fixture(scope="module")
def cat():
    return TorusAutomorphism(2, [[2, 1], [1, 1]])


def pullback_freq(torus, m, n=1):
    bt = _transpose(realified_lattice_map(torus))
    v = tuple(m)
    for _ in range(n):
        v = _matvec_int(bt, v)
    return v


class TestRealification:
    def test_real_matrix_doubles(self, cat):
        b = realified_lattice_map(cat)
        assert b == [[2, 1, 0, 0], [1, 1, 0, 0], [0, 0, 2, 1], [0, 0, 1, 1]]

    def test_gaussian_entries_mix_blocks(self):
        t = TorusAutomorphism(1, [["i"]])
        assert realified_lattice_map(t) == [[0, -1], [1, 0]]

    def test_hyperbolic_check(self, cat):
        assert check_hyperbolic(realified_lattice_map(cat))
        with pytest.raises(NotHyperbolic):
            check_hyperbolic([[0, -1], [1, 0]])


class TestCharacterCorrelation:
    def test_generic_pair_never_meets(self, cat):
        rep = haar_character_correlation(cat, (1, 0, 0, 0), (0, 1, 0, 0), (1, 100))
        assert all(v == 0 for v in rep.values)
        assert rep.decay_flag
        assert rep.last_coincidence is None
        assert rep.certificate in ("escaped", "unique-coincidence")

    def test_constructed_coincidence_unique(self, cat):
        m1 = (1, 0, 0, 0)
        m2 = tuple(-x for x in pullback_freq(cat, m1, 1))
        rep = haar_character_correlation(cat, m1, m2, (1, 100))
        assert rep.values[0] == 1
        assert all(v == 0 for v in rep.values[1:])
        assert rep.last_coincidence == 1
        assert rep.certificate == "unique-coincidence"

    def test_later_coincidence(self, cat):
        m1 = (1, 1, 0, 0)
        m2 = tuple(-x for x in pullback_freq(cat, m1, 5))
        rep = haar_character_correlation(cat, m1, m2, (1, 50))
        assert rep.last_coincidence == 5
        assert rep.values[4] == 1
        assert sum(rep.values) == 1

    def test_zero_frequency(self, cat):
        with pytest.raises(ZeroFrequency):
            haar_character_correlation(cat, (0, 0, 0, 0), (1, 0, 0, 0))

    def test_correlation_symmetry_under_inverse(self, cat):
        """C_n(phi, psi) for f equals C_n(psi, phi) for the inverse."""
        inv = cat.inverse()
        m1 = (1, 0, 1, 0)
        m2 = tuple(-x for x in pullback_freq(cat, m1, 3))
        fwd = haar_character_correlation(cat, m1, m2, (1, 30))
        bwd = haar_character_correlation(inv, m2, m1, (1, 30))
        assert fwd.values == bwd.values


class TestTrigPolynomial:
    def test_product_and_mean(self):
        phi = TrigPolynomial.cosine((1, 0))
        sq = phi * phi
        assert sq.mean() == sp.Rational(1, 2)

    def test_l2_norm(self):
        phi = TrigPolynomial.cosine((3, 1))
        assert phi.l2_norm_sq() == sp.Rational(1, 2)

    def test_pullback_moves_frequencies(self, cat):
        bt = _transpose(realified_lattice_map(cat))
        phi = TrigPolynomial.character((1, 0, 0, 0))
        moved = phi.pullback(bt)
        assert set(moved.coeffs) == {(2, 1, 0, 0)}

    def test_grid_mean_detects_aliasing(self):
        phi = TrigPolynomial.character((8, 0))
        assert phi.grid_mean(8) == 1  # frequency folds to zero on a grid of 8
        assert phi.grid_mean(16) == 0
        assert phi.mean() == 0


class TestGridCorrelation:
    def test_exact_match_with_characters(self, cat):
        m1 = (1, 0, 0, 0)
        m2 = tuple(-x for x in pullback_freq(cat, m1, 1))
        char_rep = haar_character_correlation(cat, m1, m2, (1, 40))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AliasWarning)
            grid_rep = grid_correlation(
                cat,
                TrigPolynomial.character(m1),
                TrigPolynomial.character(m2),
                (1, 40),
                resolution=2**10,
            )
        # inside the alias-safe window the exact values agree bit for bit
        assert len(grid_rep.n_values) >= 5
        for n, v in zip(grid_rep.n_values, grid_rep.values):
            assert v == char_rep.values[n - 1]

    def test_alias_truncation_warns(self, cat):
        with pytest.warns(AliasWarning):
            rep = grid_correlation(
                cat,
                TrigPolynomial.character((1, 0, 0, 0)),
                TrigPolynomial.character((0, 1, 0, 0)),
                (1, 60),
                resolution=2**8,
            )
        assert rep.aliased_from is not None
        assert max(rep.n_values) < rep.aliased_from

    def test_orthogonal_cosines_vanish(self, cat):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AliasWarning)
            rep = grid_correlation(
                cat,
                TrigPolynomial.cosine((1, 0, 0, 0)),
                TrigPolynomial.cosine((0, 0, 1, 0)),
                (1, 12),
                resolution=2**10,
            )
        assert all(v == 0 for v in rep.values)

    def test_random_trig_pair_exact_decay(self, cat):
        rng = np.random.default_rng(11)
        freqs1 = [tuple(int(x) for x in rng.integers(-3, 4, size=4)) for _ in range(2)]
        freqs2 = [tuple(int(x) for x in rng.integers(-3, 4, size=4)) for _ in range(2)]
        freqs1 = [f for f in freqs1 if any(f)] or [(1, 0, 0, 0)]
        freqs2 = [f for f in freqs2 if any(f)] or [(0, 1, 0, 0)]
        phi = TrigPolynomial({f: sp.Rational(1, 2) for f in freqs1})
        psi = TrigPolynomial({f: sp.Rational(1, 3) for f in freqs2})
        # oracle: enumerate the finitely many frequency pairs and find every
        # coincidence index by exact orbit search
        coincidences = set()
        for a in phi.coeffs:
            for b in psi.coeffs:
                rep = haar_character_correlation(cat, a, tuple(-x for x in b), (1, 60))
                if rep.last_coincidence:
                    coincidences.add(rep.last_coincidence)
        last = max(coincidences, default=0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AliasWarning)
            rep = grid_correlation(cat, phi, psi, (1, 60), resolution=2**12)
        for n, v in zip(rep.n_values, rep.values):
            if n > last:
                assert v == 0

    def test_parseval_bound(self, cat):
        phi = TrigPolynomial.cosine((1, 0, 0, 0))
        psi = TrigPolynomial.cosine((1, 1, 0, 0))
        bound = sp.sqrt(phi.l2_norm_sq() * psi.l2_norm_sq())
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AliasWarning)
            rep = grid_correlation(cat, phi, psi, (1, 20), resolution=2**12)
        for v in rep.values:
            assert sp.Abs(v) <= bound

    def test_float_path_agrees(self, cat):
        res = 2**4
        phi = TrigPolynomial.character((1, 0, 0, 0))
        psi = TrigPolynomial.character((-2, -1, 0, 0))
        arr_rep = grid_correlation(cat, phi.sample(res), psi.sample(res), (1, 4), resolution=res)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AliasWarning)
            exact_rep = grid_correlation(cat, phi, psi, (1, 4), resolution=res)
        for n, v in zip(exact_rep.n_values, exact_rep.values):
            approx = arr_rep.values[n - 1]
            assert abs(complex(v) - approx) < 1e-12


class TestErgodicAverage:
    def test_single_character(self, cat):
        rep = ergodic_average_check(cat, TrigPolynomial.character((1, 0, 0, 0)), (1, 100))
        assert rep.decay_flag
        assert all(a == 0 for a in rep.averages)

    def test_zero_mean_required(self, cat):
        with pytest.raises(ValidationError):
            ergodic_average_check(cat, TrigPolynomial({(0, 0, 0, 0): 1}), (1, 10))

    def test_random_polynomial_average_decays(self, cat):
        phi = TrigPolynomial(
            {(1, 0, 0, 0): sp.Rational(1, 2), (0, 1, 0, 0): sp.Rational(-1, 3),
             (1, 1, -1, 0): sp.Rational(1, 5)}
        )
        rep = ergodic_average_check(cat, phi, (1, 120))
        assert rep.decay_flag
        # averages of finitely many coincidences decay like 1/n
        tail = [abs(sp.Float(a)) for n, a in zip(rep.n_values, rep.averages) if n > 60]
        assert all(t <= sp.Float(4) / 60 for t in tail)


class TestRandomHyperbolic:
    def test_draws_are_hyperbolic_units(self):
        rng = np.random.default_rng(3)
        for _ in range(4):
            t = random_hyperbolic_automorphism(rng, k=2)
            assert t.A.det() in (1, -1, sp.I, -sp.I)
            check_hyperbolic(realified_lattice_map(t))
