"""Exact matrices over the rationals and the Gaussian rationals.

Entries are sympy ``Rational`` or ``Rational + I*Rational`` expressions; all
construction and arithmetic is exact.  Hot loops (powers, orbit sequences)
run on plain ``Fraction`` pairs, which are considerably faster than sympy
objects, and only the final norm evaluations touch floating point.

The norm conventions are fixed once for the whole library: vectors carry the
max-norm, matrices the induced operator norm (maximum absolute row sum).
"""

from __future__ import annotations

import re
from fractions import Fraction

import mpmath as mp
import sympy as sp

from .errors import DimensionMismatch, NotInvertible, OverflowBudget, ValidationError

#: bit budget for a single exact entry before powering aborts
DEFAULT_DIGIT_BUDGET = 200_000

_EXACT_TOKEN = re.compile(
    r"""^\s*
        (?P<sign>[+-])?\s*
        (?P<num>(\d+(\.\d*)?|\.\d+)(/\d+)?)?
        \s*(?P<imag>[ij])?
        \s*$""",
    re.VERBOSE,
)


def _parse_part(text):
    """One signed real token like '3', '-1/2', '0.25' -> Fraction."""
    return Fraction(text.replace(" ", ""))


def parse_exact(value):
    """Parse an exact scalar: int, 'a/b', decimal string, or 'a+bi' forms.

    Decimal strings convert exactly ('0.1' becomes 1/10).  Floats are
    rejected: binary floats do not round-trip to the intended decimal.
    """
    if isinstance(value, sp.Expr):
        re_, im_ = value.as_real_imag()
        if not (re_.is_Rational and im_.is_Rational):
            raise ValidationError(f"entry {value!r} is not an exact rational or Gaussian rational")
        return value
    if isinstance(value, bool):
        raise ValidationError("boolean is not an exact scalar")
    if isinstance(value, int):
        return sp.Integer(value)
    if isinstance(value, Fraction):
        return sp.Rational(value.numerator, value.denominator)
    if isinstance(value, float):
        raise ValidationError(
            f"float {value!r} rejected for an exact field; pass a string like '3/2' or '0.1'"
        )
    if not isinstance(value, str):
        raise ValidationError(f"cannot parse exact scalar from {type(value).__name__}")

    text = value.strip().replace("I", "i").replace("J", "i").replace("*", "")
    if not text:
        raise ValidationError("empty exact scalar")
    # split into signed tokens: e.g. '1+2i' -> ['+1', '+2i']
    tokens = re.findall(r"[+-]?[^+-]+", text)
    re_part = Fraction(0)
    im_part = Fraction(0)
    seen_re = seen_im = False
    for tok in tokens:
        m = _EXACT_TOKEN.match(tok)
        if not m or (m.group("num") is None and m.group("imag") is None):
            raise ValidationError(f"cannot parse exact scalar {value!r}")
        sign = -1 if m.group("sign") == "-" else 1
        num = m.group("num")
        if m.group("imag"):
            if seen_im:
                raise ValidationError(f"duplicate imaginary part in {value!r}")
            im_part = sign * (_parse_part(num) if num else Fraction(1))
            seen_im = True
        else:
            if seen_re:
                raise ValidationError(f"duplicate real part in {value!r}")
            re_part = sign * _parse_part(num)
            seen_re = True
    out = sp.Rational(re_part.numerator, re_part.denominator)
    if im_part:
        out = out + sp.I * sp.Rational(im_part.numerator, im_part.denominator)
    return out


def format_exact(value):
    """Inverse of :func:`parse_exact`, producing 'a/b' / 'a/b+c/di' strings."""
    re_, im_ = sp.sympify(value).as_real_imag()
    if im_ == 0:
        return str(re_)
    im_str = str(im_) if im_ > 0 or re_ == 0 else str(im_)
    if re_ == 0:
        return f"{im_str}i"
    sign = "+" if im_ > 0 else ""
    return f"{re_}{sign}{im_str}i"


def _to_pair(entry):
    """sympy exact scalar -> (Fraction re, Fraction im)."""
    re_, im_ = entry.as_real_imag()
    return (
        Fraction(re_.p, re_.q),
        Fraction(im_.p, im_.q),
    )


def _pair_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _pair_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def pair_to_mp(pair):
    """(Fraction, Fraction) -> mpf or mpc at the ambient precision."""
    re_ = mp.mpf(pair[0].numerator) / pair[0].denominator
    if pair[1] == 0:
        return re_
    return mp.mpc(re_, mp.mpf(pair[1].numerator) / pair[1].denominator)


def pair_abs(pair):
    """|a+bi| at the ambient mpmath precision."""
    if pair[1] == 0:
        a = pair[0]
        return mp.mpf(abs(a.numerator)) / a.denominator
    return abs(pair_to_mp(pair))


def _pair_bits(pair):
    return max(
        pair[0].numerator.bit_length(),
        pair[0].denominator.bit_length(),
        pair[1].numerator.bit_length(),
        pair[1].denominator.bit_length(),
    )


class ExactMatrix:
    """Square matrix with exact rational or Gaussian-rational entries."""

    def __init__(self, rows):
        if isinstance(rows, sp.MatrixBase):
            mat = sp.ImmutableMatrix(rows)
        else:
            mat = sp.ImmutableMatrix([[parse_exact(e) for e in row] for row in rows])
        if mat.rows != mat.cols:
            raise DimensionMismatch(f"matrix is {mat.rows}x{mat.cols}, expected square")
        # normalize to literal a + b*I form; products of Gaussian numbers can
        # arrive as unevaluated powers
        mat = sp.ImmutableMatrix(mat.applyfunc(sp.expand))
        for e in mat:
            re_, im_ = e.as_real_imag()
            if not (re_.is_Rational and im_.is_Rational):
                raise ValidationError(f"entry {e!r} is not exact")
        self.mat = mat
        self.dim = mat.rows
        self.is_gaussian = any(e.as_real_imag()[1] != 0 for e in mat)
        self._pairs = None

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, dim):
        return cls(sp.ImmutableMatrix.eye(dim))

    @classmethod
    def jordan_block(cls, eigenvalue, size):
        lam = parse_exact(eigenvalue)
        rows = [
            [lam if i == j else (sp.Integer(1) if j == i + 1 else sp.Integer(0)) for j in range(size)]
            for i in range(size)
        ]
        return cls(sp.ImmutableMatrix(rows))

    # -- exact structure ----------------------------------------------

    def det(self):
        return self.mat.det()

    def is_invertible(self):
        return self.det() != 0

    def inverse(self):
        if not self.is_invertible():
            raise NotInvertible("cannot invert a singular matrix")
        return ExactMatrix(self.mat.inv())

    def transpose(self):
        return ExactMatrix(self.mat.T)

    def conjugate(self):
        return ExactMatrix(self.mat.conjugate())

    def is_integral(self):
        """True when every entry is a (Gaussian) integer."""
        for e in self.mat:
            re_, im_ = e.as_real_imag()
            if re_.q != 1 or im_.q != 1:
                return False
        return True

    def __mul__(self, other):
        if isinstance(other, ExactMatrix):
            return ExactMatrix(self.mat * other.mat)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, ExactMatrix):
            return ExactMatrix(self.mat + other.mat)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, ExactMatrix):
            return ExactMatrix(self.mat - other.mat)
        return NotImplemented

    def __eq__(self, other):
        return isinstance(other, ExactMatrix) and self.mat == other.mat

    def __hash__(self):
        return hash(self.mat)

    def __repr__(self):
        return f"ExactMatrix({self.mat.tolist()!r})"

    # -- fast representations ------------------------------------------

    def pairs(self):
        """Entries as a list of rows of (Fraction, Fraction) pairs."""
        if self._pairs is None:
            self._pairs = [[_to_pair(self.mat[i, j]) for j in range(self.dim)] for i in range(self.dim)]
        return self._pairs

    def matvec_pairs(self, vec):
        """Exact matrix-vector product on pair-encoded vectors."""
        rows = self.pairs()
        out = []
        for i in range(self.dim):
            acc = (Fraction(0), Fraction(0))
            row = rows[i]
            for j, v in enumerate(vec):
                acc = _pair_add(acc, _pair_mul(row[j], v))
            out.append(acc)
        return out

    @staticmethod
    def matmul_pairs(a, b):
        n = len(a)
        return [
            [
                _sum_pairs([_pair_mul(a[i][l], b[l][j]) for l in range(n)])
                for j in range(n)
            ]
            for i in range(n)
        ]

    def power_sequence(self, n_max, digit_budget=DEFAULT_DIGIT_BUDGET):
        """Yield (n, self^n as pair rows) for n = 1..n_max, guarding entry size."""
        cur = self.pairs()
        base = self.pairs()
        yield 1, cur
        for n in range(2, n_max + 1):
            cur = ExactMatrix.matmul_pairs(cur, base)
            if max(_pair_bits(e) for row in cur for e in row) > digit_budget:
                raise OverflowBudget(
                    f"exact entries exceeded {digit_budget} bits at power {n}; lower the range"
                )
            yield n, cur

    def vector_orbit(self, vec, n_max, digit_budget=DEFAULT_DIGIT_BUDGET):
        """Yield (n, self^n @ vec) as pair vectors for n = 1..n_max."""
        cur = [_to_pair(parse_exact(v)) if not isinstance(v, tuple) else v for v in vec]
        for n in range(1, n_max + 1):
            cur = self.matvec_pairs(cur)
            if max(_pair_bits(e) for e in cur) > digit_budget:
                raise OverflowBudget(
                    f"exact entries exceeded {digit_budget} bits at power {n}; lower the range"
                )
            yield n, cur

    # -- numeric views ---------------------------------------------------

    def to_mp(self):
        """mpmath matrix at the ambient precision."""
        out = mp.matrix(self.dim)
        for i in range(self.dim):
            for j in range(self.dim):
                out[i, j] = pair_to_mp(self.pairs()[i][j])
        return out

    def inf_norm(self):
        """Operator norm induced by the coordinate max-norm (max row sum)."""
        return matrix_inf_norm_pairs(self.pairs())


def _sum_pairs(pairs):
    re_ = Fraction(0)
    im_ = Fraction(0)
    for p in pairs:
        re_ += p[0]
        im_ += p[1]
    return (re_, im_)


def vector_inf_norm_pairs(vec):
    """Max-norm of a pair-encoded vector at the ambient precision."""
    return max(pair_abs(v) for v in vec) if vec else mp.mpf(0)


def matrix_inf_norm_pairs(rows):
    """Max absolute row sum at the ambient precision."""
    best = mp.mpf(0)
    for row in rows:
        s = mp.fsum(pair_abs(e) for e in row)
        if s > best:
            best = s
    return best


def mp_matrix_inf_norm(m):
    best = mp.mpf(0)
    for i in range(m.rows):
        s = mp.fsum(abs(m[i, j]) for j in range(m.cols))
        if s > best:
            best = s
    return best


def mp_vector_inf_norm(v):
    return max(abs(x) for x in v) if len(v) else mp.mpf(0)
