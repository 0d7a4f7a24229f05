"""Graded pullback actions for the three model families.

A model packages, for each bidegree p, the exact matrix of the pullback on
the (p,p) cohomology space together with the coordinates of the p-th power
of a reference Kähler class, and optionally the wedge-product structure
constants and the pushforward matrices.

Torus models are complete: the whole bigraded cohomology of a complex torus
with its wedge product is generated from one Gaussian-integer matrix acting
on the universal cover.  For the double-cover involution models on
hypersurfaces of multidegree (2,...,2) in a product of projective lines the
class span of the coordinate pullback divisors is only an invariant
sublattice of the middle cohomology, so those degrees carry an explicit
``sublattice`` flag and are reported as lower bounds, never as the full
degrees of the hypersurface.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import sympy as sp

from .errors import (
    CupIncompatible,
    DimensionMismatch,
    EmptyWord,
    NotInvertible,
    NotUnitDeterminant,
    ValidationError,
)
from .exact import ExactMatrix, parse_exact

_GAUSSIAN_UNITS = (sp.Integer(1), sp.Integer(-1), sp.I, -sp.I)


def _merge_sign(a, b):
    """Sign of the shuffle sorting the concatenation of two disjoint sorted
    index tuples; 0 when they intersect."""
    if set(a) & set(b):
        return 0
    inversions = sum(1 for x in a for y in b if x > y)
    return -1 if inversions % 2 else 1


def subsets(k, p):
    return list(itertools.combinations(range(k), p))


class TorusCup:
    """Wedge-product structure constants on the torus basis dz_I ∧ dz̄_J."""

    def __init__(self, k):
        self.k = k
        self._index = {}
        for p in range(k + 1):
            subs = subsets(k, p)
            self._index[p] = {pair: i for i, pair in enumerate(itertools.product(subs, subs))}

    def basis(self, p):
        subs = subsets(self.k, p)
        return list(itertools.product(subs, subs))

    def dim(self, p):
        return len(self._index[p])

    def pairs(self, p, q):
        """Yield (i, j, target, coeff) with e_i^{(p)} ∪ e_j^{(q)} = coeff * e_target."""
        if p + q > self.k:
            return
        basis_p = self.basis(p)
        basis_q = self.basis(q)
        target_index = self._index[p + q]
        for i, (i1, j1) in enumerate(basis_p):
            for j, (i2, j2) in enumerate(basis_q):
                s1 = _merge_sign_and_merge(i1, i2)
                if s1 is None:
                    continue
                s2 = _merge_sign_and_merge(j1, j2)
                if s2 is None:
                    continue
                sign = s1[0] * s2[0]
                if len(j1) % 2 and len(i2) % 2:
                    sign = -sign
                yield i, j, target_index[(s1[1], s2[1])], sp.Integer(sign)

    def apply(self, p, q, avec, bvec):
        """Exact cup product of coordinate vectors."""
        out = [sp.Integer(0)] * self.dim(p + q)
        for i, j, t, c in self.pairs(p, q):
            if avec[i] != 0 and bvec[j] != 0:
                out[t] += c * avec[i] * bvec[j]
        return [sp.expand(v) for v in out]


def _merge_sign_and_merge(a, b):
    if set(a) & set(b):
        return None
    sign = _merge_sign(a, b)
    return sign, tuple(sorted(a + b))


class TableCup:
    """Cup structure given by explicit sparse structure constants."""

    def __init__(self, dims, table):
        # table: {(p, q): [(i, j, target, coeff), ...]}
        self.dims = list(dims)
        self.table = {k: list(v) for k, v in table.items()}

    def dim(self, p):
        return self.dims[p]

    def pairs(self, p, q):
        return iter(self.table.get((p, q), ()))

    def apply(self, p, q, avec, bvec):
        out = [sp.Integer(0)] * self.dim(p + q)
        for i, j, t, c in self.pairs(p, q):
            out[t] += c * avec[i] * bvec[j]
        return [sp.expand(v) for v in out]


@dataclass
class GradedCohomologyAction:
    """Pullback matrices on every (p,p) space, with the reference class."""

    k: int
    blocks: list  # ExactMatrix per p = 0..k
    kahler_class: list  # exact coordinate vector of the p-th power, or None
    pushforward_blocks: list | None = None
    cup: object | None = None
    model_tag: str = "Raw"
    sublattice_flags: list = field(default_factory=list)
    source: object = None  # the generating object (automorphism or model)

    def __post_init__(self):
        if len(self.blocks) != self.k + 1:
            raise DimensionMismatch(f"expected {self.k + 1} blocks, got {len(self.blocks)}")
        if not self.sublattice_flags:
            self.sublattice_flags = [False] * (self.k + 1)
        for p, b in enumerate(self.blocks):
            if not b.is_invertible():
                raise NotInvertible(f"pullback block at degree {p} is singular")
        for p in (0, self.k):
            b = self.blocks[p]
            if b.dim != 1:
                raise ValidationError(f"block at degree {p} must be 1x1 for an automorphism action")
            re_, im_ = b.mat[0, 0].as_real_imag()
            if re_**2 + im_**2 != 1:
                raise ValidationError(f"block at degree {p} must have modulus-one entry")
        for p, v in enumerate(self.kahler_class):
            if v is not None and len(v) != self.blocks[p].dim:
                raise DimensionMismatch(f"reference class at degree {p} has wrong length")

    def dim(self, p):
        return self.blocks[p].dim

    def pushforward(self, p):
        if self.pushforward_blocks is None:
            return None
        return self.pushforward_blocks[p]

    def cup_apply(self, p, q, avec, bvec):
        if self.cup is None:
            return None
        return self.cup.apply(p, q, avec, bvec)

    def check_cup_compatibility(self):
        """Exact identity: pullback of a product equals product of pullbacks
        on every basis pair.  Returns the number of pairs checked."""
        if self.cup is None:
            return 0
        checked = 0
        for p in range(self.k + 1):
            for q in range(self.k + 1 - p):
                bp, bq, bt = self.blocks[p].mat, self.blocks[q].mat, self.blocks[p + q].mat
                pairs = list(self.cup.pairs(p, q))
                if not pairs:
                    continue
                dim_p, dim_q, dim_t = self.dim(p), self.dim(q), self.dim(p + q)
                for i in range(dim_p):
                    ei = [sp.Integer(1) if a == i else sp.Integer(0) for a in range(dim_p)]
                    fi = [sp.expand(bp[a, i]) for a in range(dim_p)]
                    for j in range(dim_q):
                        ej = [sp.Integer(1) if a == j else sp.Integer(0) for a in range(dim_q)]
                        fj = [sp.expand(bq[a, j]) for a in range(dim_q)]
                        lhs_base = self.cup.apply(p, q, ei, ej)
                        lhs = [
                            sp.expand(sum(bt[a, t] * lhs_base[t] for t in range(dim_t)))
                            for a in range(dim_t)
                        ]
                        rhs = self.cup.apply(p, q, fi, fj)
                        if any(sp.expand(l - r) != 0 for l, r in zip(lhs, rhs)):
                            raise CupIncompatible(
                                f"pullback does not respect the product at degrees ({p},{q}), basis pair ({i},{j})"
                            )
                        checked += 1
        return checked


# ---------------------------------------------------------------------------
# torus models


@dataclass
class TorusAutomorphism:
    """Linear automorphism of the torus C^k / Z[i]^k."""

    k: int
    A: ExactMatrix

    def __post_init__(self):
        if isinstance(self.A, (list, tuple)):
            self.A = ExactMatrix(self.A)
        if self.A.dim != self.k:
            raise DimensionMismatch(f"matrix is {self.A.dim}x{self.A.dim}, expected {self.k}")
        if not self.A.is_integral():
            raise ValidationError("lattice map must have Gaussian-integer entries")
        if self.A.det() not in _GAUSSIAN_UNITS:
            raise NotUnitDeterminant(
                f"det = {self.A.det()} is not a Gaussian unit; the map is not invertible on the lattice"
            )

    def inverse(self):
        return TorusAutomorphism(self.k, self.A.inverse())


def compound_matrix(mat, p):
    """p-th exterior power: entries are p x p minors indexed by subsets."""
    k = mat.rows
    subs = subsets(k, p)
    if p == 0:
        return sp.ImmutableMatrix([[sp.Integer(1)]])
    out = sp.zeros(len(subs), len(subs))
    for a, rows_idx in enumerate(subs):
        for b, cols_idx in enumerate(subs):
            out[a, b] = mat.extract(list(rows_idx), list(cols_idx)).det()
    return sp.ImmutableMatrix(out)


def _kron(a, b):
    n, m = a.rows, b.rows
    out = sp.zeros(n * m, n * m)
    for i in range(n):
        for j in range(n):
            if a[i, j] == 0:
                continue
            for s in range(m):
                for t in range(m):
                    out[i * m + s, j * m + t] = sp.expand(a[i, j] * b[s, t])
    return sp.ImmutableMatrix(out)


def torus_action(torus: TorusAutomorphism) -> GradedCohomologyAction:
    """Pullback on the full bigraded cohomology of the torus.

    On holomorphic 1-forms the pullback acts by the transpose of the cover
    matrix; on (p,p)-forms by the p-th exterior power tensored with its
    conjugate.  The reference class is the standard flat Kähler form
    i*(dz_1∧dz̄_1 + ... + dz_k∧dz̄_k), and its powers are computed through
    the wedge structure constants.
    """
    k = torus.k
    at = torus.A.mat.T
    cup = TorusCup(k)
    blocks = []
    for p in range(k + 1):
        comp = compound_matrix(at, p)
        blocks.append(ExactMatrix(_kron(comp, comp.conjugate())))

    kahler = [None] * (k + 1)
    kahler[0] = [sp.Integer(1)]
    basis1 = cup.basis(1)
    omega = [sp.Integer(0)] * len(basis1)
    for j in range(k):
        omega[basis1.index(((j,), (j,)))] = sp.I
    kahler[1] = omega
    for p in range(2, k + 1):
        kahler[p] = cup.apply(1, p - 1, omega, kahler[p - 1])

    pushforward = [b.inverse() for b in blocks]
    return GradedCohomologyAction(
        k=k,
        blocks=blocks,
        kahler_class=kahler,
        pushforward_blocks=pushforward,
        cup=cup,
        model_tag="Torus",
        source=torus,
    )


# ---------------------------------------------------------------------------
# double-cover involution models


@dataclass
class MazurModel:
    """Involution data on the divisor-class sublattice of a multidegree-
    (2,...,2) hypersurface in a (k+1)-fold product of projective lines."""

    k: int
    generators: list  # names h_1..h_{k+1}
    intersection_numbers: dict  # sorted index tuple (len k) -> integer
    involutions: list  # ExactMatrix per coordinate projection
    word: tuple | None = None

    def intersection(self, indices):
        key = tuple(sorted(indices))
        if len(set(key)) != len(key):
            return 0
        return self.intersection_numbers.get(key, 0)

    def with_word(self, word):
        return replace(self, word=tuple(word))

    def k_form(self, index_tuple):
        """Value of the k-fold intersection form on basis indices (0-based)."""
        return self.intersection(tuple(i + 1 for i in index_tuple))


def mazur_involutions(k: int) -> MazurModel:
    """Build the k+1 involution matrices on span(h_1, ..., h_{k+1}).

    Each involution is derived from the push-pull identity through the
    corresponding degree-2 projection, using only the intersection numbers
    of the model; the result is cross-checked against the closed form
    h_i -> -h_i + 2*sum_{j != i} h_j.
    """
    if k < 2:
        raise ValidationError("model needs dimension k >= 2")
    n = k + 1
    inter = {tuple(sorted(c)): 2 for c in itertools.combinations(range(1, n + 1), k)}
    model = MazurModel(
        k=k,
        generators=[f"h{i}" for i in range(1, n + 1)],
        intersection_numbers=inter,
        involutions=[],
        word=None,
    )

    involutions = []
    for i in range(1, n + 1):
        others = [j for j in range(1, n + 1) if j != i]
        # degree of the projection = number of points in a fiber
        degree = model.intersection(others)
        cols = []
        for l in range(1, n + 1):
            if l != i:
                # h_l is pulled back through the projection: tau fixes it
                image = {l: degree - 1}
            else:
                # pushforward of h_i expanded over the remaining factors:
                # its coefficient on the j-th factor pairs h_i against the
                # complementary product of hyperplane classes
                image = {}
                for j in others:
                    rest = [t for t in others if t != j]
                    image[j] = model.intersection([i] + rest)
                image[i] = -1
                # push-pull: tau_i* = pi_i^* pi_{i*} - id
            col = [sp.Integer(image.get(r, 0)) for r in range(1, n + 1)]
            cols.append(col)
        mat = ExactMatrix(sp.ImmutableMatrix(list(map(list, zip(*cols)))))
        closed = _closed_form_involution(n, i)
        if mat != closed:
            raise RuntimeError("push-pull involution disagrees with the closed form")
        if mat * mat != ExactMatrix.identity(n):
            raise RuntimeError("involution squared is not the identity")
        involutions.append(mat)
    model.involutions = involutions
    return model


def _closed_form_involution(n, i):
    rows = []
    for r in range(1, n + 1):
        row = []
        for c in range(1, n + 1):
            if c != i:
                row.append(sp.Integer(1) if r == c else sp.Integer(0))
            else:
                row.append(sp.Integer(-1) if r == i else sp.Integer(2))
        rows.append(row)
    return ExactMatrix(sp.ImmutableMatrix(rows))


def mazur_action(model: MazurModel) -> GradedCohomologyAction:
    """Pullback of a composition word on the invariant sublattice.

    Degree 1 carries the product of the involution matrices in word order.
    Degrees 0 and k are the honest one-dimensional actions of an
    automorphism.  Intermediate degrees, when present, use the exterior
    powers of the sublattice action and are flagged: they are growth rates
    on an invariant sublattice, i.e. lower bounds, not the degrees of the
    ambient hypersurface.
    """
    if not model.word:
        raise EmptyWord("composition word is empty")
    n = model.k + 1
    for i in model.word:
        if not 1 <= i <= n:
            raise ValidationError(f"word letter {i} out of range 1..{n}")
    w = ExactMatrix.identity(n)
    for i in model.word:
        w = w * model.involutions[i - 1]

    blocks = [ExactMatrix.identity(1)]
    flags = [False]
    kahler = [[sp.Integer(1)]]
    for p in range(1, model.k):
        blocks.append(ExactMatrix(compound_matrix(w.mat, p)) if p > 1 else w)
        flags.append(True)
        kahler.append([sp.Integer(1)] * n if p == 1 else None)
    blocks.append(ExactMatrix.identity(1))
    flags.append(False)
    kahler.append([sp.Integer(1)])

    pushforward = [b.inverse() for b in blocks]
    return GradedCohomologyAction(
        k=model.k,
        blocks=blocks,
        kahler_class=kahler,
        pushforward_blocks=pushforward,
        cup=None,
        model_tag="Mazur",
        sublattice_flags=flags,
        source=model,
    )


def intersection_form_invariance(model: MazurModel, mat: ExactMatrix):
    """Exact check that a sublattice map preserves the k-fold intersection
    form on all basis tuples.  Returns the number of tuples verified."""
    n = model.k + 1
    checked = 0
    m = mat.mat
    for tup in itertools.combinations_with_replacement(range(n), model.k):
        expected = model.k_form(tup)
        acc = sp.Integer(0)
        for images in itertools.product(range(n), repeat=model.k):
            coeff = sp.Integer(1)
            for a, i in zip(images, tup):
                coeff *= m[a, i]
                if coeff == 0:
                    break
            if coeff == 0:
                continue
            val = model.k_form(images)
            if val:
                acc += coeff * val
        if sp.expand(acc - expected) != 0:
            raise ValidationError(f"intersection form not preserved on basis tuple {tup}")
        checked += 1
    return checked


# ---------------------------------------------------------------------------
# raw models


def raw_action(config) -> GradedCohomologyAction:
    """Validated action from user-supplied per-degree matrices.

    ``config`` maps:
      blocks:       list of square matrices (exact entries), degrees 0..k
      kahler:       list of coordinate vectors or None per degree
      pushforward:  optional list of matrices
      cup:          optional {(p, q): [[i, j, target, coeff], ...]}
    """
    blocks_in = config.get("blocks")
    if not blocks_in:
        raise ValidationError("raw model needs at least the degree-0 and top blocks")
    blocks = [b if isinstance(b, ExactMatrix) else ExactMatrix(b) for b in blocks_in]
    k = len(blocks) - 1

    kahler_in = config.get("kahler")
    kahler = []
    if kahler_in is None:
        kahler = [None] * (k + 1)
        kahler[0] = [sp.Integer(1)]
    else:
        if len(kahler_in) != k + 1:
            raise DimensionMismatch("reference-class list must have one entry per degree")
        for v in kahler_in:
            kahler.append(None if v is None else [parse_exact(e) for e in v])

    pushforward = None
    if config.get("pushforward") is not None:
        pf = [m if isinstance(m, ExactMatrix) else ExactMatrix(m) for m in config["pushforward"]]
        if len(pf) != k + 1:
            raise DimensionMismatch("pushforward list must have one matrix per degree")
        for p, (b, q) in enumerate(zip(blocks, pf)):
            if b.dim != q.dim:
                raise DimensionMismatch(f"pushforward at degree {p} has wrong dimension")
        pushforward = pf

    cup = None
    if config.get("cup") is not None:
        table = {}
        for key, entries in config["cup"].items():
            if isinstance(key, str):
                p, q = (int(t) for t in key.strip("() ").split(","))
            else:
                p, q = key
            table[(p, q)] = [
                (int(i), int(j), int(t), parse_exact(c)) for i, j, t, c in entries
            ]
        cup = TableCup([b.dim for b in blocks], table)

    action = GradedCohomologyAction(
        k=k,
        blocks=blocks,
        kahler_class=kahler,
        pushforward_blocks=pushforward,
        cup=cup,
        model_tag="Raw",
    )
    if cup is not None:
        action.check_cup_compatibility()
        for p in range(2, k + 1):
            if kahler[p] is not None and kahler[1] is not None and kahler[p - 1] is not None:
                expected = cup.apply(1, p - 1, kahler[1], kahler[p - 1])
                if any(sp.expand(a - b) != 0 for a, b in zip(expected, kahler[p])):
                    raise ValidationError(
                        f"reference class at degree {p} is not the cup power of degree 1"
                    )
    return action
