import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from kahlerdyn.errors import OverflowBudget, ValidationError
from kahlerdyn.exact import ExactMatrix, format_exact, parse_exact


@pytest.mark.parametrize(
    "text,expected",
    [
        ("3/2", sp.Rational(3, 2)),
        ("1.5", sp.Rational(3, 2)),
        ("-1", sp.Integer(-1)),
        ("0.1+0.2i", sp.Rational(1, 10) + sp.I * sp.Rational(1, 5)),
        ("1+2i", 1 + 2 * sp.I),
        ("i", sp.I),
        ("-i", -sp.I),
        ("2i", 2 * sp.I),
        ("3/2-1/3i", sp.Rational(3, 2) - sp.I * sp.Rational(1, 3)),
        (7, sp.Integer(7)),
    ],
)
def test_parse_exact(text, expected):
    assert parse_exact(text) == expected


def test_parse_exact_rejects_floats():
    with pytest.raises(ValidationError):
        parse_exact(0.1)


def test_parse_exact_rejects_garbage():
    with pytest.raises(ValidationError):
        parse_exact("1+2i+3")
    with pytest.raises(ValidationError):
        parse_exact("x")


def test_format_round_trip():
    for text in ["3/2", "0.1+0.2i", "-i", "5", "-7/3-2i"]:
        value = parse_exact(text)
        assert parse_exact(format_exact(value)) == value


def test_matrix_requires_square():
    with pytest.raises(Exception):
        ExactMatrix([[1, 2, 3], [4, 5, 6]])


def test_power_sequence_matches_sympy():
    m = ExactMatrix([["2", "1"], ["1", "1"]])
    powers = dict(m.power_sequence(6))
    expected = m.mat**6
    got = powers[6]
    for i in range(2):
        for j in range(2):
            assert got[i][j][0] == sp.Rational(expected[i, j])
            assert got[i][j][1] == 0


def test_gaussian_matrix_arithmetic():
    m = ExactMatrix([["1+i", "0"], ["0", "1-i"]])
    sq = m * m
    # entries are normalized to literal a + b*I form
    assert sq.mat[0, 0] == 2 * sp.I
    assert sq.mat[1, 1] == -2 * sp.I
    assert m.is_gaussian
    assert m.det() == 2


def test_inf_norm_max_row_sum():
    m = ExactMatrix([[3, -4], [1, 1]])
    assert m.inf_norm() == 7


def test_digit_budget_guard():
    m = ExactMatrix([[2, 0], [0, 2]])
    with pytest.raises(OverflowBudget):
        list(m.power_sequence(400, digit_budget=64))


@settings(max_examples=25, deadline=None)
@given(
    st.lists(
        st.lists(st.integers(min_value=-4, max_value=4), min_size=3, max_size=3),
        min_size=3,
        max_size=3,
    )
)
def test_matmul_pairs_agrees_with_sympy(rows):
    m = ExactMatrix(rows)
    prod = ExactMatrix.matmul_pairs(m.pairs(), m.pairs())
    expected = m.mat * m.mat
    for i in range(3):
        for j in range(3):
            assert prod[i][j][0] == sp.Rational(expected[i, j])
