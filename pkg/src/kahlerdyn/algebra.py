"""Exact spectral bookkeeping behind the Jordan analysis.

Discrete data (characteristic polynomial, irreducible factors, Jordan block
sizes, equalities between eigenvalue moduli, finite orders of angle ratios)
is decided exactly; only magnitudes and angles are evaluated in floating
point, at the caller's precision.

The exact decision procedures avoid minimal-polynomial computations, which
are far too slow for repeated use.  Instead each eigenvalue carries a
squarefree *container* polynomial over the integers that it is a root of,
and equality questions between algebraic numbers are settled by evaluating
both sides beyond the Mahler root-separation bound of a common container.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import mpmath as mp
import sympy as sp
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

_x = sp.Symbol("x")
_y = sp.Symbol("y")
_z = sp.Symbol("z")


# ---------------------------------------------------------------------------
# characteristic polynomial and factorization


def charpoly(mat):
    """Monic characteristic polynomial of a sympy matrix, exact."""
    return sp.Poly(mat.charpoly(_x).as_expr(), _x)


def is_gaussian_poly(poly):
    return any(sp.im(c) != 0 for c in poly.all_coeffs())


def factor_irreducible(poly, gaussian=None):
    """Factor a monic exact polynomial into irreducibles over QQ, or over
    QQ(i) when the coefficients are Gaussian.  Returns [(Poly, mult)]."""
    if gaussian is None:
        gaussian = is_gaussian_poly(poly)
    _, factors = sp.factor_list(poly.as_expr(), _x, gaussian=gaussian)
    out = []
    for f, mult in factors:
        fp = sp.Poly(f, _x)
        lc = fp.LC()
        if lc != 1:
            fp = sp.Poly(fp.as_expr() / lc, _x)
        out.append((fp, int(mult)))
    out.sort(key=lambda fm: (fm[0].degree(), sp.default_sort_key(fm[0].as_expr())))
    return out


def horner_matrix(poly, mat):
    """Exact evaluation of a polynomial at a square sympy matrix.

    Entries are re-expanded at every step: sympy keeps Gaussian products
    like (1+I)**2 unevaluated, which trips the exact-domain conversions."""
    n = mat.rows
    acc = sp.zeros(n, n)
    eye = sp.eye(n)
    for c in poly.all_coeffs():
        acc = (acc * mat + c * eye).applyfunc(sp.expand)
    return acc


def jordan_block_sizes(mat, factor, mult, gaussian):
    """Jordan block sizes attached to each root of an irreducible factor.

    All roots of one irreducible factor share the same block structure, and
    the nullity of factor(M)^j over the base field equals deg(factor) times
    the per-root nullity of (M - root)^j.
    """
    domain = QQ_I if gaussian else QQ
    degq = factor.degree()
    dim = mat.rows
    qm = horner_matrix(factor, mat)
    base = DomainMatrix.from_Matrix(sp.Matrix(qm)).convert_to(domain)
    power = base
    nullities = [0]
    for _ in range(1, mult + 1):
        rank = len(power.rref()[1])
        total_nullity = dim - rank
        if total_nullity % degq != 0:
            raise RuntimeError("nullity not divisible by factor degree; factorization inconsistent")
        nu = total_nullity // degq
        nullities.append(nu)
        if nu == mult or nu == nullities[-2]:
            break
        power = power * base
    while nullities[-1] < mult:
        # chain stabilized early only when it already accounts for everything
        if nullities[-1] == nullities[-2]:
            raise RuntimeError("nullity chain stabilized below algebraic multiplicity")
        nullities.append(nullities[-1])
    counts_ge = [nullities[j] - nullities[j - 1] for j in range(1, len(nullities))]
    sizes = []
    for size in range(len(counts_ge), 0, -1):
        above = counts_ge[size] if size < len(counts_ge) else 0
        sizes.extend([size] * (counts_ge[size - 1] - above))
    sizes.sort(reverse=True)
    if sum(sizes) != mult:
        raise RuntimeError("block sizes do not sum to the algebraic multiplicity")
    return sizes


# ---------------------------------------------------------------------------
# rational container polynomials and separation bounds


def _primitive_int_poly(poly):
    """Scale a rational polynomial to primitive integer coefficients."""
    p = sp.Poly(poly.as_expr(), _x)
    content, prim = p.clear_denoms()[1].primitive()
    return prim


def squarefree_part(poly):
    p = sp.Poly(poly.as_expr(), _x)
    g = sp.gcd(p, p.diff(_x))
    if g.degree() == 0:
        return p
    return sp.Poly(sp.quo(p, g), _x)


def rational_container(factor):
    """A squarefree integer polynomial having every root of ``factor`` among
    its roots.  For rational factors this is the factor itself; a Gaussian
    factor q is embedded into the rational polynomial q * conjugate(q)."""
    if not is_gaussian_poly(factor):
        return _primitive_int_poly(squarefree_part(factor))
    conj = sp.Poly([sp.conjugate(c) for c in factor.all_coeffs()], _x)
    prod = sp.Poly(sp.expand(factor.as_expr() * conj.as_expr()), _x)
    if is_gaussian_poly(prod):
        raise RuntimeError("q * conj(q) should have rational coefficients")
    return _primitive_int_poly(squarefree_part(prod))


@functools.lru_cache(maxsize=256)
def _container_cached(coeff_tuple):
    return sp.Poly(list(coeff_tuple), _x)


def _key(poly):
    return tuple(sp.Integer(c) for c in poly.all_coeffs())


@functools.lru_cache(maxsize=256)
def product_container(coeffs):
    """Squarefree integer polynomial whose roots include all pairwise
    products of roots of the given container (hence every |root|^2 when the
    container is closed under conjugation)."""
    p = _container_cached(coeffs)
    d = p.degree()
    py = p.as_expr().subs(_x, _y)
    pzy = sp.expand(_y**d * p.as_expr().subs(_x, _z / _y))
    res = sp.expand(sp.resultant(py, pzy, _y)).subs(_z, _x)
    return _primitive_int_poly(squarefree_part(sp.Poly(res, _x)))


@functools.lru_cache(maxsize=256)
def ratio_container(coeffs):
    """Squarefree integer polynomial whose roots include all ratios r_a/r_b
    of roots of the given container."""
    p = _container_cached(coeffs)
    py = p.as_expr().subs(_x, _y)
    pzy = sp.expand(p.as_expr().subs(_x, _z * _y))
    res = sp.expand(sp.resultant(py, pzy, _y)).subs(_z, _x)
    return _primitive_int_poly(squarefree_part(sp.Poly(res, _x)))


def mahler_separation(int_poly):
    """Rigorous lower bound for the distance between distinct roots of a
    squarefree integer polynomial (Mahler 1964), halved for slack."""
    p = _primitive_int_poly(int_poly)
    d = p.degree()
    if d < 2:
        return mp.mpf(1)
    disc = abs(sp.discriminant(p.as_expr(), _x))
    if disc == 0:
        raise RuntimeError("separation bound requested for a non-squarefree polynomial")
    norm2 = mp.sqrt(mp.fsum(mp.mpf(int(c)) ** 2 for c in p.all_coeffs()))
    with mp.workprec(mp.mp.prec + 64):
        bound = mp.sqrt(mp.mpf(3) * mp.mpf(int(disc))) / (
            mp.mpf(d) ** mp.mpf((d + 2) / 2.0) * norm2 ** (d - 1)
        )
    return bound / 2


# ---------------------------------------------------------------------------
# eigenvalue handles


@dataclass
class EigenvalueHandle:
    """One eigenvalue with exact provenance.

    value:      floating approximation at the working precision
    factor:     irreducible factor over the base field it is a root of
    alg_mult:   its algebraic multiplicity
    block_sizes: Jordan block sizes attached to it (largest first)
    container:  squarefree integer polynomial with this value among its roots
    root_index: index of the value in CRootOf(container, .)
    conj_index: index of its complex conjugate in the same container
    """

    value: object
    factor: sp.Poly
    alg_mult: int
    block_sizes: list
    container: sp.Poly
    root_index: int
    conj_index: int

    @property
    def rootof(self):
        return sp.CRootOf(self.container.as_expr(), self.root_index)

    @property
    def is_real(self):
        return self.rootof.is_real

    @property
    def is_real_positive(self):
        r = self.rootof
        return bool(r.is_real) and bool(r.is_positive)

    def certified_value(self, digits):
        """(value, error bound) with the error certified by root isolation."""
        r = self.rootof
        val = r.evalf(digits + 4)
        out = mp.mpc(sp.re(val), sp.im(val))
        err = mp.mpf(10) ** (-digits) * max(mp.mpf(1), abs(out))
        return out, err

    def abs2_value(self, digits):
        v, err = self.certified_value(digits)
        bound = 2 * (abs(v) + err) * err * (1 + mp.mpf(2) ** -40)
        return abs(v) ** 2, bound


def _q2mpf(q):
    return mp.mpf(int(q.numerator)) / int(q.denominator)


def _interval_contains(root, interval, z, pad):
    re_, im_ = mp.re(z), mp.im(z)
    if root.is_real:
        return abs(im_) <= pad and _q2mpf(interval.a) - pad <= re_ <= _q2mpf(interval.b) + pad
    return (
        _q2mpf(interval.ax) - pad <= re_ <= _q2mpf(interval.bx) + pad
        and _q2mpf(interval.ay) - pad <= im_ <= _q2mpf(interval.by) + pad
    )


def locate_root_index(container, approx, prec):
    """Index of the CRootOf of ``container`` matching the approximation.

    Matching is done against the exact isolating intervals, refining them
    until the approximation lies in exactly one; this avoids the costly
    high-precision refinement that a numeric comparison would trigger."""
    p = sp.Poly(container.as_expr(), _x)
    n = p.degree()
    roots = [sp.CRootOf(p.as_expr(), i) for i in range(n)]
    # rational and Gaussian-rational roots auto-evaluate to plain numbers
    intervals = [
        r._get_interval() if isinstance(r, sp.polys.rootoftools.ComplexRootOf) else None
        for r in roots
    ]
    pad = mp.mpf(2) ** (-prec // 2) * max(mp.mpf(1), abs(approx))

    def point_value(i):
        v = roots[i].evalf(int(prec * 0.3010) + 10)
        return mp.mpc(sp.re(v), sp.im(v))

    def contains(i):
        if intervals[i] is None:
            return abs(point_value(i) - approx) <= 4 * pad
        return _interval_contains(roots[i], intervals[i], approx, pad)

    candidates = list(range(n))
    for _ in range(80):
        inside = [i for i in candidates if contains(i)]
        if len(inside) == 1:
            return inside[0]
        if not inside:
            break
        candidates = inside
        for i in candidates:
            if intervals[i] is not None:
                intervals[i] = intervals[i].refine()
    # fall back to the nearest midpoint (approximation coarser than expected)
    def midpoint(i):
        iv = intervals[i]
        if iv is None:
            return point_value(i)
        if roots[i].is_real:
            return (_q2mpf(iv.a) + _q2mpf(iv.b)) / 2
        return mp.mpc(
            (_q2mpf(iv.ax) + _q2mpf(iv.bx)) / 2,
            (_q2mpf(iv.ay) + _q2mpf(iv.by)) / 2,
        )

    dists = [abs(midpoint(i) - approx) for i in range(n)]
    return min(range(n), key=dists.__getitem__)


def polyroots_exact(factor, prec):
    """Numeric roots of an exact irreducible factor at precision ``prec``."""
    coeffs = []
    with mp.workprec(prec + 64):
        for c in factor.all_coeffs():
            re_, im_ = sp.sympify(c).as_real_imag()
            cre = mp.mpf(re_.p) / re_.q
            if im_ == 0:
                coeffs.append(cre)
            else:
                coeffs.append(mp.mpc(cre, mp.mpf(im_.p) / im_.q))
        roots = mp.polyroots(coeffs, extraprec=prec // 2 + 80, maxsteps=2000)
    return [mp.mpc(r) for r in roots]


def build_handles(mat, prec):
    """All eigenvalue handles of an exact sympy matrix, with Jordan sizes.

    Matrices with Gaussian entries are factored over QQ(i) even when the
    characteristic polynomial happens to be rational: conjugate eigenvalues
    of a non-real matrix can carry different block structures, which only
    the finer factorization separates.
    """
    p = charpoly(mat)
    gaussian = is_gaussian_poly(p) or any(sp.im(e) != 0 for e in mat)
    factors = factor_irreducible(p, gaussian=gaussian)
    handles = []
    for fac, mult in factors:
        sizes = jordan_block_sizes(mat, fac, mult, gaussian)
        container = rational_container(fac)
        roots = polyroots_exact(fac, prec)
        for r in roots:
            idx = locate_root_index(container, r, prec)
            cidx = locate_root_index(container, mp.conj(r), prec)
            handles.append(
                EigenvalueHandle(
                    value=r,
                    factor=fac,
                    alg_mult=mult,
                    block_sizes=list(sizes),
                    container=container,
                    root_index=idx,
                    conj_index=cidx,
                )
            )
    return handles, p, factors


# ---------------------------------------------------------------------------
# rigorous comparisons


def _combined_separation(cont_a, cont_b):
    if cont_a == cont_b:
        return mahler_separation(cont_a)
    prod = sp.Poly(sp.expand(cont_a.as_expr() * cont_b.as_expr()), _x)
    return mahler_separation(_primitive_int_poly(squarefree_part(prod)))


def compare_abs2(ha, hb, prec):
    """Sign of |a|^2 - |b|^2, decided rigorously (-1, 0, or +1)."""
    if ha.container == hb.container and hb.root_index in (ha.root_index, ha.conj_index):
        return 0  # conjugate roots share their modulus
    cont_a = product_container(_key(ha.container))
    cont_b = product_container(_key(hb.container))
    sep = _combined_separation(cont_a, cont_b)
    digits = int(prec * 0.3010) + 8
    for _ in range(12):
        va, ea = ha.abs2_value(digits)
        vb, eb = hb.abs2_value(digits)
        err = ea + eb
        diff = va - vb
        if abs(diff) > 4 * err:
            return 1 if diff > 0 else -1
        if err < sep / 8:
            return 0 if abs(diff) < sep / 2 else (1 if diff > 0 else -1)
        digits *= 2
    raise RuntimeError("modulus comparison did not resolve")


def abs2_equals_one(h, prec):
    """Exact test |value| == 1."""
    cont = product_container(_key(h.container))
    one = sp.Poly(_x - 1, _x)
    sep = _combined_separation(cont, one)
    digits = int(prec * 0.3010) + 8
    for _ in range(12):
        v, e = h.abs2_value(digits)
        diff = v - 1
        if abs(diff) > 4 * e:
            return False
        if e < sep / 8:
            return abs(diff) < sep / 2
        digits *= 2
    raise RuntimeError("modulus-one test did not resolve")


# ---------------------------------------------------------------------------
# angle structure: finite order detection for ratios to the conjugate


def _max_order_for_degree(deg_bound):
    """Largest t with totient(t) <= deg_bound."""
    limit = 2 * deg_bound * deg_bound + 2
    best = 1
    for t in range(1, limit + 1):
        if sp.totient(t) <= deg_bound:
            best = t
    return best


@functools.lru_cache(maxsize=256)
def _order_search_bound(coeffs):
    cont = ratio_container(coeffs)
    return _max_order_for_degree(cont.degree()), cont


def unity_order_of_conj_ratio(handle, prec):
    """Finite order of value/conjugate(value), or None when the ratio is not
    a root of unity.  The answer is exact: candidate orders are screened by
    a certified angle test and confirmed against cyclotomic polynomials via
    gcds with the exact ratio container."""
    if handle.is_real:
        return 1
    tmax, cont = _order_search_bound(_key(handle.container))
    work = max(prec, 160)
    with mp.workprec(work):
        # the stored root value carries ample guard bits from its isolation;
        # marginal distances trigger a certified re-evaluation below
        v = mp.mpc(handle.value)
        beta = mp.arg(v) / mp.pi  # ratio has angle 2*arg(v)
        threshold = mp.mpf(2) ** -60
        marginal = mp.mpf(2) ** -40
        candidates, needs_certified = [], False
        for t in range(2, tmax + 1):
            frac = t * beta
            dist = abs(frac - mp.nint(frac))
            if dist < threshold:
                candidates.append(t)
            elif dist < marginal:
                needs_certified = True
        if needs_certified:
            v, err = handle.certified_value(int(work * 0.3010) + 8)
            beta = mp.arg(v) / mp.pi
            candidates = [
                t
                for t in range(2, tmax + 1)
                if abs(t * beta - mp.nint(t * beta)) < max(threshold, 8 * tmax * err / abs(v))
            ]
    for t in candidates:
        if _confirm_ratio_order(handle, cont, t, prec):
            return t
    return None


def _confirm_ratio_order(handle, ratio_cont, t, prec):
    """Exact check that value/conj(value) is a primitive t-th root of unity."""
    cyc = sp.Poly(sp.cyclotomic_poly(t, _x), _x)
    g = sp.gcd(sp.Poly(ratio_cont.as_expr(), _x), cyc)
    if g.degree() == 0:
        return False
    prod = sp.Poly(sp.expand(ratio_cont.as_expr() * cyc.as_expr()), _x)
    sep = mahler_separation(_primitive_int_poly(squarefree_part(prod)))
    digits = int(max(prec * 0.3010, -mp.log10(sep))) + 12
    v, err = handle.certified_value(digits)
    ratio = v / mp.conj(v)
    ratio_err = 8 * err / abs(v)
    ks = [k for k in range(1, t + 1) if math.gcd(k, t) == 1]
    for k in ks:
        target = mp.expjpi(mp.mpf(2 * k) / t)
        if abs(ratio - target) < sep / 2 and ratio_err < sep / 8:
            return True
    return False


def dominant_angle_order(handle, prec):
    """Finite order of value/|value| (the normalized angle), or None."""
    if handle.is_real_positive:
        return 1
    if handle.is_real:
        return 2
    d = unity_order_of_conj_ratio(handle, prec)
    if d is None:
        return None
    # zeta := value/|value| satisfies zeta^2 = value/conj(value); its order is
    # d when d is odd and value^d > 0, else 2d.
    if d % 2 == 1:
        digits = int(prec * 0.3010) + 8
        v, _ = handle.certified_value(digits)
        power = v**d
        if mp.re(power) > 0:
            return d
    return 2 * d
