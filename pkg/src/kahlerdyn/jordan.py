"""Exact Jordan analysis of a single invertible linear map.

Block sizes and all tie-breaking decisions are exact; magnitudes, angles,
limit operators and convergence-rate measurements are evaluated at a
configurable binary precision (128 bits by default).
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import mpmath as mp
import sympy as sp

from . import algebra, rates
from .errors import ConeNotPreserved, HypothesisViolated, NotInvertible, ThetaNotResolved
from .exact import (
    DEFAULT_DIGIT_BUDGET,
    ExactMatrix,
    matrix_inf_norm_pairs,
    mp_matrix_inf_norm,
    pair_to_mp,
)

DEFAULT_PREC = 128

#: float gap under which modulus comparisons fall back to exact sign tests
TIE_GAP = mp.mpf(2) ** -64


@dataclass(frozen=True)
class ThetaGroup:
    """Closure of the group generated by the dominant direction."""

    kind: str  # 'Trivial' | 'FiniteCyclic' | 'PositiveDimensional'
    order: int | None = None

    @classmethod
    def trivial(cls):
        return cls("Trivial", 1)

    @classmethod
    def finite_cyclic(cls, order):
        return cls("FiniteCyclic", int(order))

    @classmethod
    def positive_dimensional(cls):
        return cls("PositiveDimensional", None)

    @property
    def is_finite(self):
        return self.kind != "PositiveDimensional"

    def __str__(self):
        if self.kind == "FiniteCyclic":
            return f"FiniteCyclic({self.order})"
        return self.kind


@dataclass
class JordanData:
    """Spectral structure of an invertible exact matrix."""

    dim: int
    spectral_radius: object  # mpf
    multiplicity: int
    blocks: list  # [(eigenvalue mpc, size int)], sorted by (|eig|, size) desc
    dominant_indices: list
    theta: list  # angles in [0, 2pi) of the dominant blocks
    theta_group: ThetaGroup
    prec: int
    _block_handles: list = None  # EigenvalueHandle per block, parallel to blocks

    @property
    def nu(self):
        return len(self.dominant_indices)

    @property
    def dominant_handles(self):
        return [self._block_handles[i] for i in self.dominant_indices]

    def distinct_dominant_handles(self):
        seen = []
        for h in self.dominant_handles:
            if not any(h2 is h for h2 in seen):
                if all(
                    not (h2.container == h.container and h2.root_index == h.root_index)
                    for h2 in seen
                ):
                    seen.append(h)
        return seen

    @property
    def dim_strict_dominant(self):
        """Number of dominant blocks whose eigenvalue equals the spectral
        radius itself (a real positive value)."""
        return sum(1 for i in self.dominant_indices if self._block_handles[i].is_real_positive)

    def spectral_radius_is_one(self):
        """Exact test: is the spectral radius equal to 1?"""
        h = self._block_handles[self.dominant_indices[0]]
        return algebra.abs2_equals_one(h, self.prec)

    def to_dict(self):
        return {
            "dim": self.dim,
            "spectral_radius": mp.nstr(self.spectral_radius, 30),
            "multiplicity": self.multiplicity,
            "blocks": [[mp.nstr(ev, 25), size] for ev, size in self.blocks],
            "dominant_indices": list(self.dominant_indices),
            "theta": [mp.nstr(t, 25) for t in self.theta],
            "theta_group": str(self.theta_group),
        }


@dataclass
class CharPolyResult:
    poly: sp.Poly
    factors: list  # [(Poly, multiplicity)]

    def as_expr(self):
        return self.poly.as_expr()


def char_poly(matrix: ExactMatrix) -> CharPolyResult:
    """Monic characteristic polynomial with its irreducible factorization
    over the rationals (Gaussian rationals for complex entries)."""
    p = algebra.charpoly(matrix.mat)
    return CharPolyResult(poly=p, factors=algebra.factor_irreducible(p))


def _check_invertible(matrix: ExactMatrix):
    if matrix.det() == 0:
        raise NotInvertible("matrix has determinant zero")


def eigen_structure(matrix: ExactMatrix, prec: int = DEFAULT_PREC) -> JordanData:
    """Eigenvalues, exact Jordan block sizes, dominant data and the closure
    group of the dominant direction."""
    _check_invertible(matrix)
    with mp.workprec(prec):
        handles, _, _ = algebra.build_handles(matrix.mat, prec)

        # one entry per Jordan block
        block_entries = []
        for h in handles:
            for size in h.block_sizes:
                block_entries.append((h, size))

        def cmp(a, b):
            (ha, sa), (hb, sb) = a, b
            fa, fb = abs(ha.value), abs(hb.value)
            if abs(fa - fb) > TIE_GAP * max(mp.mpf(1), fa, fb):
                mag = 1 if fa > fb else -1
            else:
                mag = algebra.compare_abs2(ha, hb, prec)
            if mag != 0:
                return -mag  # descending modulus
            if sa != sb:
                return -1 if sa > sb else 1  # descending size
            av, bv = ha.value, hb.value
            return -1 if (mp.re(av), mp.im(av)) >= (mp.re(bv), mp.im(bv)) else 1

        block_entries.sort(key=functools.cmp_to_key(cmp))

        top_handle, top_size = block_entries[0]
        dominant = [0]
        for i in range(1, len(block_entries)):
            h, size = block_entries[i]
            if size != top_size:
                continue
            f, ftop = abs(h.value), abs(top_handle.value)
            if abs(f - ftop) > TIE_GAP * max(mp.mpf(1), f, ftop):
                continue
            if algebra.compare_abs2(h, top_handle, prec) == 0:
                dominant.append(i)

        spectral_radius = abs(top_handle.value)
        theta = []
        for i in dominant:
            h, _ = block_entries[i]
            ang = mp.arg(h.value)
            if ang < 0:
                ang += 2 * mp.pi
            if h.is_real_positive:
                ang = mp.mpf(0)
            theta.append(ang)

        group = _theta_group([block_entries[i][0] for i in dominant], prec)

        return JordanData(
            dim=matrix.dim,
            spectral_radius=spectral_radius,
            multiplicity=top_size,
            blocks=[(h.value, size) for h, size in block_entries],
            dominant_indices=dominant,
            theta=theta,
            theta_group=group,
            prec=prec,
            _block_handles=[h for h, _ in block_entries],
        )


def _theta_group(dominant_handles, prec):
    orders = []
    seen = set()
    for h in dominant_handles:
        key = (algebra._key(h.container), h.root_index)
        if key in seen:
            continue
        seen.add(key)
        order = algebra.dominant_angle_order(h, prec)
        if order is None:
            return ThetaGroup.positive_dimensional()
        orders.append(order)
    total = 1
    for o in orders:
        total = total * o // math.gcd(total, o)
    if total == 1:
        return ThetaGroup.trivial()
    return ThetaGroup.finite_cyclic(total)


# ---------------------------------------------------------------------------
# normalized power asymptotics


@dataclass
class AsymptoticReport:
    n_values: list
    normalized_norms: list  # ||M^n|| / (n^{m-1} lambda^n)
    fitted_rate: object  # log-log slope of the deviation from the tail value
    rate_kind: str
    interval: tuple  # envelope from the tail of the range, inflated 10%
    within_interval: bool

    def to_dict(self):
        return {
            "n_values": list(self.n_values),
            "normalized_norms": [mp.nstr(v, 20) for v in self.normalized_norms],
            "fitted_rate": None if self.fitted_rate is None else float(self.fitted_rate),
            "rate_kind": self.rate_kind,
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "within_interval": self.within_interval,
        }


def power_asymptotics(
    matrix: ExactMatrix,
    jordan: JordanData,
    n_range,
    digit_budget=DEFAULT_DIGIT_BUDGET,
) -> AsymptoticReport:
    """Normalized norms of exact powers against the dominant growth."""
    ns = _normalize_range(n_range)
    if not ns:
        raise ValueError("n_range is empty")
    lam = jordan.spectral_radius
    if not lam > 0:
        raise ValueError("spectral radius must be positive")
    m = jordan.multiplicity
    with mp.workprec(jordan.prec):
        values = {}
        for n, rows in matrix.power_sequence(max(ns), digit_budget=digit_budget):
            if n in ns or n == max(ns):
                norm = matrix_inf_norm_pairs(rows)
                values[n] = norm / (mp.mpf(n) ** (m - 1) * lam**n)
        norms = [values[n] for n in ns]
        tail = norms[-1]
        devs = [abs(v - tail) for v in norms[:-1]]
        floor = max(norms) * mp.mpf(2) ** (-jordan.prec + 16)
        report = rates.classify_decay(ns[:-1], devs, floor=floor) if devs else None
        lo_tail = [v for n, v in zip(ns, norms) if n >= max(100, (ns[0] + ns[-1]) // 2)]
        if not lo_tail:
            lo_tail = norms
        c1, c2 = min(lo_tail), max(lo_tail)
        interval = (c1 * mp.mpf("0.9"), c2 * mp.mpf("1.1"))
        within = all(interval[0] <= v <= interval[1] for v in norms)
        return AsymptoticReport(
            n_values=ns,
            normalized_norms=norms,
            fitted_rate=None if report is None else report.loglog_slope,
            rate_kind="exact" if report is None else report.kind,
            interval=interval,
            within_interval=within,
        )


# ---------------------------------------------------------------------------
# spectral projectors and the limit operators


def _taylor_inverse(coeffs, length):
    """Power-series inverse of sum(coeffs[r] t^r), truncated to ``length``."""
    inv = [1 / coeffs[0]]
    for r in range(1, length):
        acc = mp.mpc(0)
        for j in range(1, r + 1):
            if j < len(coeffs):
                acc += coeffs[j] * inv[r - j]
        inv.append(-acc / coeffs[0])
    return inv


def spectral_projectors(matrix: ExactMatrix, jordan: JordanData):
    """Projector onto each distinct eigenvalue's generalized eigenspace,
    computed as Hermite interpolation polynomials evaluated at the matrix.

    Returns [(handle, projector mp.matrix, alg_mult)], one per distinct
    eigenvalue, together with the numeric matrix at working precision.
    """
    with mp.workprec(jordan.prec):
        m_num = matrix.to_mp()
        dim = matrix.dim
        eye = mp.eye(dim)

        distinct = []
        seen = set()
        for h in jordan._block_handles:
            key = (algebra._key(h.container), h.root_index)
            if key not in seen:
                seen.add(key)
                distinct.append((h, sum(s for s in h.block_sizes)))

        out = []
        for h, mult in distinct:
            mu = h.value
            # numerator: product over the other eigenvalues
            num_mat = eye
            for h2, mult2 in distinct:
                if h2 is h:
                    continue
                factor = m_num - h2.value * eye
                for _ in range(mult2):
                    num_mat = num_mat * factor
            # Taylor coefficients of prod (mu - mu2 + t)^{mult2} at t = 0
            series = [mp.mpc(1)] + [mp.mpc(0)] * (mult - 1)
            for h2, mult2 in distinct:
                if h2 is h:
                    continue
                d = mu - h2.value
                base = [
                    mp.binomial(mult2, r) * d ** (mult2 - r) if r <= mult2 else mp.mpc(0)
                    for r in range(mult)
                ]
                series = _series_mul(series, base, mult)
            inv = _taylor_inverse(series, mult)
            taylor_mat = mp.zeros(dim)
            shift = m_num - mu * eye
            power = eye
            for r in range(mult):
                taylor_mat = taylor_mat + inv[r] * power
                power = power * shift
            out.append((h, taylor_mat * num_mat, mult))
        return out, m_num


def _series_mul(a, b, length):
    out = [mp.mpc(0)] * length
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if i + j >= length:
                break
            out[i + j] += ai * bj
    return out


@dataclass
class LimitOperators:
    """Limit of the twisted normalized powers and of their averages."""

    limit: object  # mp.matrix
    averaged_limit: object  # mp.matrix
    rank_averaged: int
    dim_strict_dominant: int
    twisted_report: rates.DecayReport
    averaged_report: rates.DecayReport
    projector_identity_defect: object

    def to_dict(self):
        return {
            "rank_averaged": self.rank_averaged,
            "dim_strict_dominant": self.dim_strict_dominant,
            "twisted_report": self.twisted_report.to_dict() if self.twisted_report else None,
            "averaged_report": self.averaged_report.to_dict() if self.averaged_report else None,
            "projector_identity_defect": float(self.projector_identity_defect),
        }


def _normalize_range(n_range):
    """(lo, hi) tuples describe inclusive ranges; other iterables are taken
    as explicit value lists."""
    if isinstance(n_range, tuple) and len(n_range) == 2:
        lo, hi = int(n_range[0]), int(n_range[1])
        if hi >= lo:
            return list(range(lo, hi + 1))
    return sorted(set(int(n) for n in n_range))


def _numeric_rank(m, tol):
    if m.rows == 0 or m.cols == 0:
        return 0
    mm = mp.matrix(m.rows, m.cols)
    for i in range(m.rows):
        for j in range(m.cols):
            mm[i, j] = mp.mpc(m[i, j])
    svals = mp.svd_c(mm, compute_uv=False)
    top = max(svals) if len(svals) else mp.mpf(0)
    if top == 0:
        return 0
    return sum(1 for s in svals if s > tol * top)


def limit_matrices(matrix: ExactMatrix, jordan: JordanData):
    """Assemble the limit operators from the spectral projectors.

    Returns (limit, averaged_limit, dominant_twists, projector_defect) where
    ``dominant_twists`` pairs each dominant projector with its angle, and the
    defect measures how far the projectors are from resolving the identity.
    """
    m = jordan.multiplicity
    with mp.workprec(jordan.prec):
        projectors, m_num = spectral_projectors(matrix, jordan)
        dim = matrix.dim
        eye = mp.eye(dim)

        defect = mp_matrix_inf_norm(sum((p for _, p, _ in projectors), mp.zeros(dim)) - eye)

        dominant_keys = {
            (algebra._key(h.container), h.root_index) for h in jordan.dominant_handles
        }
        strict_keys = {
            (algebra._key(h.container), h.root_index)
            for h in jordan.dominant_handles
            if h.is_real_positive
        }

        limit = mp.zeros(dim)
        averaged = mp.zeros(dim)
        dom_projs = []  # (projector, angle, D-part) for the twisting
        for h, proj, _ in projectors:
            key = (algebra._key(h.container), h.root_index)
            if key not in dominant_keys:
                continue
            mu = h.value
            nil = eye
            shift = m_num - mu * eye
            for _ in range(m - 1):
                nil = nil * shift
            dmat = proj * nil * (mu ** (1 - m) / mp.factorial(m - 1))
            limit = limit + dmat
            ang = mp.arg(mu)
            if h.is_real_positive:
                ang = mp.mpf(0)
            dom_projs.append((proj, ang, dmat))
            if key in strict_keys:
                averaged = averaged + dmat
        return limit, averaged, dom_projs, defect


def lambda_infinity(
    matrix: ExactMatrix,
    jordan: JordanData,
    n_range=(20, 200),
    untwisted=False,
    fit_window=(20, 50),
    digit_budget=DEFAULT_DIGIT_BUDGET,
) -> LimitOperators:
    """Limit operators of the normalized power sequence.

    ``limit`` is the limit of the angle-twisted normalized powers; it exists
    for every closure group.  ``averaged_limit`` is the limit of the plain
    Cesàro averages, a projector-composed restriction of ``limit`` whose rank
    equals the dimension of the strictly dominant eigenspace.

    With ``untwisted=True`` the caller asks for the limit of the plain
    sequence: available on the full sequence when the closure group is
    trivial, along the canonical subsequence for a finite group, and refused
    for a positive-dimensional group.
    """
    lam = jordan.spectral_radius
    if lam < 1:
        raise HypothesisViolated("spectral radius below 1; normalized powers diverge from the averaged rates")
    if lam == 1:
        warnings.warn("spectral radius equals 1; averaged rates are degenerate", stacklevel=2)
    if untwisted and not jordan.theta_group.is_finite:
        raise ThetaNotResolved(
            "plain limit requested but the angle closure is positive-dimensional; "
            "pick a subsequence explicitly"
        )

    m = jordan.multiplicity
    with mp.workprec(jordan.prec):
        limit, averaged, dom_projs, defect = limit_matrices(matrix, jordan)
        dim = matrix.dim

        tol = mp.mpf(2) ** (-jordan.prec // 2)
        rank_avg = _numeric_rank(averaged, tol)

        # measured deviations of the twisted sequence and the averages
        wanted = _normalize_range(n_range)
        n_lo, n_hi = wanted[0], wanted[-1]
        ns, tw_devs, av_devs = [], [], []
        avg_acc = mp.zeros(dim)
        for n, rows in matrix.power_sequence(n_hi, digit_budget=digit_budget):
            ln = mp.matrix(
                [[pair_to_mp(rows[i][j]) for j in range(dim)] for i in range(dim)]
            ) / (mp.mpf(n) ** (m - 1) * lam**n)
            avg_acc = avg_acc + ln
            if n < n_lo:
                continue
            twisted = ln.copy()
            for proj, ang, _ in dom_projs:
                if ang != 0:
                    twisted = twisted + (mp.expj(-n * ang) - 1) * (proj * ln)
            ns.append(n)
            tw_devs.append(mp_matrix_inf_norm(twisted - limit))
            av_devs.append(mp_matrix_inf_norm(avg_acc / n - averaged))

        floor = mp.mpf(2) ** (-jordan.prec + 16) * max(1, mp_matrix_inf_norm(limit))
        twisted_report = rates.classify_decay(
            ns,
            tw_devs,
            fit_range=fit_window,
            shape_fn=rates.shape_one_over_n,
            shape_name="C/n",
            floor=floor,
        )
        averaged_report = rates.classify_decay(
            ns,
            av_devs,
            fit_range=fit_window,
            shape_fn=rates.shape_logn_over_n,
            shape_name="C*log(n)/n",
            floor=floor,
        )

        return LimitOperators(
            limit=limit,
            averaged_limit=averaged,
            rank_averaged=rank_avg,
            dim_strict_dominant=jordan.dim_strict_dominant,
            twisted_report=twisted_report,
            averaged_report=averaged_report,
            projector_identity_defect=defect,
        )


# ---------------------------------------------------------------------------
# cone preservation


@dataclass
class PerronReport:
    cone_preserved: bool
    has_dominant_real_eigenvalue: bool
    falsified: bool
    spectral_radius: object
    eigenvector: list | None
    cone_coordinates: list | None
    residual: object
    tolerance: float

    def to_dict(self):
        return {
            "cone_preserved": self.cone_preserved,
            "has_dominant_real_eigenvalue": self.has_dominant_real_eigenvalue,
            "falsified": self.falsified,
            "spectral_radius": mp.nstr(self.spectral_radius, 30),
            "eigenvector": None if self.eigenvector is None else [mp.nstr(v, 20) for v in self.eigenvector],
            "cone_coordinates": None
            if self.cone_coordinates is None
            else [float(c) for c in self.cone_coordinates],
            "residual": float(self.residual),
            "tolerance": self.tolerance,
        }


def _nonneg_lstsq(gen_cols, target):
    import numpy as np
    from scipy.optimize import nnls

    g = np.array(gen_cols, dtype=float).T
    t = np.array(target, dtype=float)
    coeffs, res = nnls(g, t)
    return coeffs, res


def perron_frobenius_check(
    matrix: ExactMatrix,
    cone_generators,
    prec: int = DEFAULT_PREC,
    tol: float = 1e-9,
) -> PerronReport:
    """Check cone preservation and exhibit a dominant eigenvector inside the
    closed cone.

    The absence of a real positive dominant eigenvalue is reported as a
    falsification, not raised.
    """
    gens = [[float(sp.Float(sp.sympify(v), 30)) if not isinstance(v, (int, float)) else float(v) for v in g] for g in cone_generators]
    dim = matrix.dim
    if len(gens) < dim:
        raise ValueError("cone generators must span the space")
    import numpy as np

    g_arr = np.array(gens, dtype=float)
    if np.linalg.matrix_rank(g_arr) < dim:
        raise ValueError("cone generators must span the space")

    m_float = np.array([[complex(e) for e in row] for row in matrix.mat.tolist()])
    if np.abs(m_float.imag).max() > 0:
        raise ValueError("cone checks apply to real matrices only")
    m_float = m_float.real

    scale = max(1.0, float(np.abs(g_arr).max()))
    worst = 0.0
    for g in gens:
        image = m_float @ np.array(g)
        _, res = _nonneg_lstsq(gens, image)
        worst = max(worst, res / max(1.0, float(np.linalg.norm(image))))
    if worst > tol:
        raise ConeNotPreserved(f"generator image leaves the cone (residual {worst:.3g})")

    jordan = eigen_structure(matrix, prec)
    has_real = any(h.is_real_positive for h in jordan.dominant_handles)
    if not has_real:
        return PerronReport(
            cone_preserved=True,
            has_dominant_real_eigenvalue=False,
            falsified=True,
            spectral_radius=jordan.spectral_radius,
            eigenvector=None,
            cone_coordinates=None,
            residual=mp.mpf(0),
            tolerance=tol,
        )

    with mp.workprec(prec):
        projectors, m_num = spectral_projectors(matrix, jordan)
        m_top = jordan.multiplicity
        eye = mp.eye(dim)
        vec = mp.matrix([mp.fsum(g[i] for g in gens) for i in range(dim)])
        cand = mp.matrix(dim, 1)
        for h, proj, _ in projectors:
            if not h.is_real_positive:
                continue
            if algebra.compare_abs2(h, jordan.dominant_handles[0], prec) != 0:
                continue
            nil = eye
            shift = m_num - h.value * eye
            for _ in range(m_top - 1):
                nil = nil * shift
            cand = cand + (proj * nil) * vec
        norm = mp_matrix_inf_norm(cand)
        if norm == 0:
            # generic combination vanished; fall back to the eigenspace
            cand = vec
        else:
            cand = cand / norm
        eigenvector = [mp.re(cand[i]) for i in range(dim)]
        coeffs, res = _nonneg_lstsq(gens, [float(v) for v in eigenvector])
        if res > tol * max(1.0, max(abs(float(v)) for v in eigenvector)):
            # eigenvector may point out of the cone's span orientation; flip
            eigenvector = [-v for v in eigenvector]
            coeffs, res = _nonneg_lstsq(gens, [float(v) for v in eigenvector])
        return PerronReport(
            cone_preserved=True,
            has_dominant_real_eigenvalue=True,
            falsified=res > tol,
            spectral_radius=jordan.spectral_radius,
            eigenvector=eigenvector,
            cone_coordinates=list(coeffs),
            residual=mp.mpf(res),
            tolerance=tol,
        )
