"""Dynamical degrees, entropy, relative degrees, Cesàro class limits and the
degree-chain verification.

Degrees are spectral radii of the per-degree pullback blocks; growth-rate
sequences are computed with exact matrix powers and compared against their
predicted normalizations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import mpmath as mp
import sympy as sp

from . import jordan as jordan_mod
from . import rates
from .errors import CupMissing, NotEigenclass, ValidationError
from .exact import (
    DEFAULT_DIGIT_BUDGET,
    mp_matrix_inf_norm,
    mp_vector_inf_norm,
    vector_inf_norm_pairs,
)
from .models import GradedCohomologyAction

DEFAULT_PREC = jordan_mod.DEFAULT_PREC

#: relative tolerance for clustering equal degrees
PLATEAU_RTOL = mp.mpf("1e-9")

#: relative tolerance for the log-concavity margins
CONCAVITY_RTOL = mp.mpf(2) ** -64


@dataclass
class ConcavityReport:
    margins: list  # d_p^2 - d_{p-1} d_{p+1}, relative, for p = 1..k-1
    ratios_increasing: bool
    concave: bool
    severity: str  # 'ok' | 'model-inconsistency' | 'violation'

    def to_dict(self):
        return {
            "margins": [float(v) for v in self.margins],
            "ratios_increasing": self.ratios_increasing,
            "concave": self.concave,
            "severity": self.severity,
        }


@dataclass
class DegreeProfile:
    """Degrees d_0..d_k with multiplicities, entropy and the plateau."""

    degrees: list
    multiplicities: list
    entropy: object
    plateau: tuple
    exact_ones: list  # per degree: spectral radius equals 1 exactly
    model_tag: str
    sublattice_flags: list
    pattern_ok: bool
    prec: int

    @property
    def k(self):
        return len(self.degrees) - 1

    def to_dict(self):
        return {
            "degrees": [mp.nstr(d, 30) for d in self.degrees],
            "multiplicities": list(self.multiplicities),
            "entropy": mp.nstr(self.entropy, 30),
            "plateau": list(self.plateau),
            "exact_ones": list(self.exact_ones),
            "model_tag": self.model_tag,
            "sublattice_flags": list(self.sublattice_flags),
            "pattern_ok": self.pattern_ok,
            "precision_bits": self.prec,
        }


def _block_jordan(action, p, prec):
    cache = getattr(action, "_jordan_cache", None)
    if cache is None:
        cache = {}
        action._jordan_cache = cache
    key = (p, prec)
    if key not in cache:
        cache[key] = jordan_mod.eigen_structure(action.blocks[p], prec)
    return cache[key]


def dynamical_degrees(action: GradedCohomologyAction, prec: int = DEFAULT_PREC) -> DegreeProfile:
    """Degree profile of the action: d_p is the spectral radius of the
    pullback on the (p,p) space, l_p the size of its largest Jordan block."""
    degrees, mults, exact_ones = [], [], []
    for p in range(action.k + 1):
        info = _block_jordan(action, p, prec)
        degrees.append(info.spectral_radius)
        mults.append(info.multiplicity)
        exact_ones.append(bool(info.spectral_radius_is_one()))

    with mp.workprec(prec):
        entropy = max(mp.log(d) if not one else mp.mpf(0) for d, one in zip(degrees, exact_ones))
        clusters = _cluster_degrees(degrees)
        m, mprime, pattern_ok = _plateau(degrees, clusters, action.k)
    if not pattern_ok:
        msg = "degree profile does not follow the single-plateau pattern"
        if action.model_tag == "Raw":
            warnings.warn(msg + " (model inconsistency)", stacklevel=2)
        else:
            raise ValidationError(msg)
    return DegreeProfile(
        degrees=degrees,
        multiplicities=mults,
        entropy=entropy,
        plateau=(m, mprime),
        exact_ones=exact_ones,
        model_tag=action.model_tag,
        sublattice_flags=list(action.sublattice_flags),
        pattern_ok=pattern_ok,
        prec=prec,
    )


def _cluster_degrees(degrees):
    """Cluster indices whose degrees agree within the plateau tolerance."""
    ids = [0] * len(degrees)
    reps = [degrees[0]]
    for i, d in enumerate(degrees[1:], start=1):
        for cid, rep in enumerate(reps):
            if abs(d - rep) <= PLATEAU_RTOL * max(mp.mpf(1), abs(rep)):
                ids[i] = cid
                break
        else:
            reps.append(d)
            ids[i] = len(reps) - 1
    return ids


def _plateau(degrees, clusters, k):
    if k < 2:
        return (min(1, k), min(1, k), True)
    dmax = max(degrees)
    top = [p for p in range(k + 1) if abs(degrees[p] - dmax) <= PLATEAU_RTOL * max(mp.mpf(1), dmax)]
    m, mprime = min(top), max(top)
    m = max(1, min(m, k - 1))
    mprime = max(m, min(mprime, k - 1))
    ok = True
    for p in range(1, m + 1):
        if not (degrees[p] > degrees[p - 1] or clusters[p] == clusters[p - 1]):
            ok = False
    for p in range(m, mprime):
        if clusters[p] != clusters[p + 1]:
            ok = False
    for p in range(mprime, k):
        if not (degrees[p] > degrees[p + 1] or clusters[p] == clusters[p + 1]):
            ok = False
    # the pattern demands monotone rise then fall; equal neighbours are only
    # allowed inside the plateau
    for p in range(1, m):
        if clusters[p] == clusters[p - 1] and abs(degrees[p] - 1) > PLATEAU_RTOL:
            ok = False
    return m, mprime, ok


def check_concavity(profile: DegreeProfile, rtol=CONCAVITY_RTOL) -> ConcavityReport:
    """Log-concavity margins d_p^2 - d_{p-1} d_{p+1} and monotonicity of the
    consecutive ratios.  Violations are reported, never raised; severity
    depends on the model family."""
    d = profile.degrees
    k = profile.k
    margins = []
    concave = True
    for p in range(1, k):
        scale = max(mp.mpf(1), d[p] ** 2)
        margin = (d[p] ** 2 - d[p - 1] * d[p + 1]) / scale
        margins.append(margin)
        if margin < -rtol:
            concave = False
    ratios = [d[p - 1] / d[p] for p in range(1, k + 1)]
    increasing = all(ratios[i + 1] >= ratios[i] * (1 - rtol) for i in range(len(ratios) - 1))
    if concave and increasing:
        severity = "ok"
    elif profile.model_tag == "Raw":
        severity = "model-inconsistency"
        warnings.warn("log-concavity violated in a raw model; data is inconsistent", stacklevel=2)
    else:
        severity = "violation"
    return ConcavityReport(margins=margins, ratios_increasing=increasing, concave=concave, severity=severity)


# ---------------------------------------------------------------------------
# growth sequences


@dataclass
class DegreeSequenceReport:
    p: int
    n_values: list
    norms: list  # ||B^n applied to the reference class||
    normalized: list  # norms / (n^{l_p - 1} d_p^n)
    roots: list  # norms^{1/n}
    degree: object
    multiplicity: int
    bounded: bool

    def to_dict(self):
        return {
            "p": self.p,
            "n_values": list(self.n_values),
            "norms": [mp.nstr(v, 20) for v in self.norms],
            "normalized": [mp.nstr(v, 20) for v in self.normalized],
            "roots": [mp.nstr(v, 20) for v in self.roots],
            "degree": mp.nstr(self.degree, 30),
            "multiplicity": self.multiplicity,
            "bounded": self.bounded,
        }


def degree_sequence(
    action: GradedCohomologyAction,
    p: int,
    n_range,
    prec: int = DEFAULT_PREC,
    digit_budget=DEFAULT_DIGIT_BUDGET,
) -> DegreeSequenceReport:
    """Norm growth of the pulled-back reference class at degree p, with the
    sequence normalized by its predicted n^{l_p-1} d_p^n growth."""
    if not 0 <= p <= action.k:
        raise ValidationError(f"degree {p} out of range 0..{action.k}")
    if action.kahler_class[p] is None:
        raise ValidationError(f"no reference class available at degree {p}")
    ns = jordan_mod._normalize_range(n_range)
    info = _block_jordan(action, p, prec)
    d_p, l_p = info.spectral_radius, info.multiplicity
    with mp.workprec(prec):
        norms, values = {}, {}
        vec = [sp.sympify(v) for v in action.kahler_class[p]]
        from .exact import _to_pair

        pvec = [_to_pair(v) for v in vec]
        if all(v[0] == 0 and v[1] == 0 for v in pvec):
            raise ValidationError("reference class is zero")
        for n, w in action.blocks[p].vector_orbit(pvec, max(ns), digit_budget=digit_budget):
            if n in ns:
                norms[n] = vector_inf_norm_pairs(w)
        n_values = [n for n in ns if n in norms]
        norm_list = [norms[n] for n in n_values]
        normalized = [
            norms[n] / (mp.mpf(n) ** (l_p - 1) * d_p**n) for n in n_values
        ]
        roots = [norms[n] ** (mp.mpf(1) / n) for n in n_values]
        live = [v for v in normalized if v > 0]
        bounded = bool(live) and max(live) < mp.inf and min(live) > 0
        return DegreeSequenceReport(
            p=p,
            n_values=n_values,
            norms=norm_list,
            normalized=normalized,
            roots=roots,
            degree=d_p,
            multiplicity=l_p,
            bounded=bounded,
        )


def inverse_action(action: GradedCohomologyAction) -> GradedCohomologyAction:
    """Action of the inverse automorphism: pullback becomes pushforward."""
    if action.pushforward_blocks is None:
        raise ValidationError("inverse unavailable: no pushforward blocks")
    return GradedCohomologyAction(
        k=action.k,
        blocks=list(action.pushforward_blocks),
        kahler_class=list(action.kahler_class),
        pushforward_blocks=list(action.blocks),
        cup=action.cup,
        model_tag=action.model_tag,
        sublattice_flags=list(action.sublattice_flags),
        source=action.source,
    )


# ---------------------------------------------------------------------------
# relative degrees


@dataclass
class RelativeDegreeProfile:
    T_class: list
    s: int
    lambda_T: object
    relative_degrees: list  # lambda_p(T) for p = 1..k-s
    relative_multiplicities: list
    kernel_dims: list
    submultiplicativity_margins: dict  # (p1, p2) -> margin
    lower_bound_margin: object  # lambda_1(T)^{k-s} - 1/lambda_T
    invariance_defects: list
    prec: int
    tol: float

    def to_dict(self):
        return {
            "s": self.s,
            "lambda_T": mp.nstr(self.lambda_T, 30),
            "relative_degrees": [mp.nstr(v, 30) for v in self.relative_degrees],
            "relative_multiplicities": list(self.relative_multiplicities),
            "kernel_dims": list(self.kernel_dims),
            "submultiplicativity_margins": {
                f"{p1}+{p2}": float(v) for (p1, p2), v in self.submultiplicativity_margins.items()
            },
            "lower_bound_margin": float(self.lower_bound_margin),
            "invariance_defects": [float(v) for v in self.invariance_defects],
            "precision_bits": self.prec,
            "tolerance": self.tol,
        }


def _to_mp_vector(vec):
    out = []
    for v in vec:
        if isinstance(v, (int, float)):
            out.append(mp.mpc(v))
        elif isinstance(v, (mp.mpf, mp.mpc)):
            out.append(mp.mpc(v))
        else:
            re_, im_ = sp.sympify(v).as_real_imag()
            out.append(mp.mpc(sp.Float(re_, 40), sp.Float(im_, 40)))
    return out


def cup_matrix(action, T_vec, s, p):
    """Matrix of cup-with-T from degree p into degree p+s (numeric)."""
    if action.cup is None:
        raise CupMissing("model carries no product structure")
    rows = action.dim(p + s)
    cols = action.dim(p)
    out = mp.zeros(rows, cols)
    for i, j, t, c in action.cup.pairs(s, p):
        if T_vec[i] != 0:
            re_, im_ = sp.sympify(c).as_real_imag()
            coeff = mp.mpc(sp.Float(re_, 40), sp.Float(im_, 40))
            out[t, j] += coeff * T_vec[i]
    return out


def _column_space_basis(mat, tol):
    u, svals, v = mp.svd_c(mat)
    top = max(svals) if len(svals) else mp.mpf(0)
    rank = sum(1 for sv in svals if top > 0 and sv > tol * top)
    basis = mp.zeros(mat.rows, rank)
    for j in range(rank):
        for i in range(mat.rows):
            basis[i, j] = u[i, j]
    return basis, rank


def _restricted_matrix(full, basis):
    """Compression B^H F B of F to an orthonormal column basis B, with the
    invariance defect ||F B - B (B^H F B)||."""
    fb = full * basis
    r = basis.H * fb
    defect = mp_matrix_inf_norm(fb - basis * r)
    return r, defect


def _dominant_radius_and_multiplicity(mat, tol):
    if mat.rows == 0:
        return mp.mpf(0), 0
    eigs = mp.eig(mat, left=False, right=False)
    if isinstance(eigs, tuple):  # mpmath returns the full triple for 1x1 input
        eigs = eigs[0]
    rho = max(abs(e) for e in eigs)
    if rho == 0:
        return mp.mpf(0), 0
    dominant = [e for e in eigs if abs(abs(e) - rho) <= tol * rho]
    # largest Jordan block over the dominant cluster, from nullity growth
    best = 1
    seen = []
    eye = mp.eye(mat.rows)
    for mu in dominant:
        if any(abs(mu - m0) <= tol * rho for m0 in seen):
            continue
        seen.append(mu)
        shift = mat - mu * eye
        power = shift
        prev = mat.rows - _svd_rank(shift, tol)
        size = 1
        for j in range(2, mat.rows + 1):
            power = power * shift
            nullity = mat.rows - _svd_rank(power, tol)
            if nullity <= prev:
                break
            prev = nullity
            size = j
        best = max(best, size)
    return rho, best


def _svd_rank(mat, tol):
    svals = mp.svd_c(mp.matrix(mat), compute_uv=False)
    top = max(svals) if len(svals) else mp.mpf(0)
    if top == 0:
        return 0
    return sum(1 for sv in svals if sv > tol * top)


def relative_degrees(
    action: GradedCohomologyAction,
    T_class,
    s: int,
    lambda_T,
    prec: int = DEFAULT_PREC,
    tol: float = 1e-9,
) -> RelativeDegreeProfile:
    """Degrees of the action on cohomology relative to an invariant class.

    The quotient by the kernel of cup-with-T is computed through its
    isomorphic image, the cup-image subspace W of the higher-degree space:
    under that identification the quotient pullback is the restriction of
    the pullback to W divided by lambda_T.
    """
    if action.cup is None:
        raise CupMissing("relative degrees need the product structure")
    if not 0 <= s <= action.k - 1:
        raise ValidationError(f"bidegree s={s} out of range")
    with mp.workprec(prec):
        t_vec = _to_mp_vector(T_class)
        lam_t = mp.mpf(lambda_T) if not isinstance(lambda_T, (mp.mpf, mp.mpc)) else mp.mpf(lambda_T)
        if len(t_vec) != action.dim(s):
            raise ValidationError("T class has the wrong dimension")
        scale = mp_vector_inf_norm(t_vec)
        if scale == 0:
            raise ValidationError("T class is zero")
        bs = action.blocks[s].to_mp()
        image = bs * mp.matrix(t_vec)
        defect = mp_vector_inf_norm([image[i] - lam_t * t_vec[i] for i in range(len(t_vec))])
        if defect > tol * max(1, abs(lam_t)) * scale:
            raise NotEigenclass(
                f"pullback of T deviates from lambda_T * T by {mp.nstr(defect, 5)}"
            )

        rank_tol = mp.mpf(2) ** (-prec // 2)
        rel_deg, rel_mult, kernel_dims, defects = [], [], [], []
        for p in range(1, action.k - s + 1):
            cmat = cup_matrix(action, t_vec, s, p)
            basis, rank = _column_space_basis(cmat, rank_tol)
            kernel_dims.append(action.dim(p) - rank)
            if rank == 0:
                rel_deg.append(mp.mpf(0))
                rel_mult.append(0)
                defects.append(mp.mpf(0))
                continue
            full = action.blocks[p + s].to_mp()
            restricted, defect = _restricted_matrix(full, basis)
            defects.append(defect)
            rho, mult = _dominant_radius_and_multiplicity(restricted, mp.mpf(tol))
            rel_deg.append(rho / lam_t)
            rel_mult.append(mult)

        margins = {}
        kk = action.k - s
        for p1 in range(1, kk + 1):
            for p2 in range(p1, kk + 1 - p1):
                lhs = rel_deg[p1 + p2 - 1]
                rhs = rel_deg[p1 - 1] * rel_deg[p2 - 1]
                margins[(p1, p2)] = rhs - lhs
        lower_margin = rel_deg[0] ** kk - 1 / lam_t if rel_deg else mp.mpf(0)

        return RelativeDegreeProfile(
            T_class=list(t_vec),
            s=s,
            lambda_T=lam_t,
            relative_degrees=rel_deg,
            relative_multiplicities=rel_mult,
            kernel_dims=kernel_dims,
            submultiplicativity_margins=margins,
            lower_bound_margin=lower_margin,
            invariance_defects=defects,
            prec=prec,
            tol=tol,
        )


@dataclass
class SubmultiplicativityReport:
    p1: int
    p2: int
    lhs: object  # lambda_{p1+p2}(T)
    rhs: object  # lambda_{p1}(T) * lambda_{p2}(T)
    margin: object
    holds: bool
    flagged_error: bool

    def to_dict(self):
        return {
            "p1": self.p1,
            "p2": self.p2,
            "lhs": mp.nstr(self.lhs, 30),
            "rhs": mp.nstr(self.rhs, 30),
            "margin": float(self.margin),
            "holds": self.holds,
            "flagged_error": self.flagged_error,
        }


def submultiplicativity_check(rel: RelativeDegreeProfile, p1: int, p2: int, tol=1e-9):
    """Margin of lambda_{p1} lambda_{p2} - lambda_{p1+p2}; a negative margin
    beyond tolerance flags a computation error."""
    kk = len(rel.relative_degrees)
    if p1 < 1 or p2 < 1 or p1 + p2 > kk:
        raise ValidationError(f"({p1},{p2}) not admissible for relative length {kk}")
    lhs = rel.relative_degrees[p1 + p2 - 1]
    rhs = rel.relative_degrees[p1 - 1] * rel.relative_degrees[p2 - 1]
    margin = rhs - lhs
    holds = margin >= -mp.mpf(tol) * max(mp.mpf(1), rhs)
    return SubmultiplicativityReport(
        p1=p1, p2=p2, lhs=lhs, rhs=rhs, margin=margin, holds=holds, flagged_error=not holds
    )


def relative_degree_sequence(
    action, T_class, s, lambda_T, p, n_range, prec: int = DEFAULT_PREC
):
    """Pullback-normalized relative growth sequence at degree p: the norm of
    lambda_T^{-n} (pullback^n of T cupped with the p-th reference power)."""
    if action.cup is None:
        raise CupMissing("relative sequences need the product structure")
    if action.kahler_class[p] is None:
        raise ValidationError(f"no reference class at degree {p}")
    ns = jordan_mod._normalize_range(n_range)
    with mp.workprec(prec):
        t_vec = _to_mp_vector(T_class)
        lam_t = mp.mpf(lambda_T)
        omega_p = _to_mp_vector(action.kahler_class[p])
        cmat = cup_matrix(action, t_vec, s, p)
        start = cmat * mp.matrix(omega_p)
        full = action.blocks[p + s].to_mp()
        out_ns, values = [], []
        cur = start
        for n in range(1, max(ns) + 1):
            cur = full * cur
            if n in ns:
                out_ns.append(n)
                values.append(mp_vector_inf_norm(cur) / lam_t**n)
        return out_ns, values


# ---------------------------------------------------------------------------
# Cesàro class limits


@dataclass
class CesaroResult:
    limit_class: list
    rate_report: rates.DecayReport
    eigen_defect: object
    kernel_invariance_defect: object
    degree: object
    multiplicity: int

    def to_dict(self):
        return {
            "limit_class": [mp.nstr(v, 30) for v in self.limit_class],
            "rate_report": self.rate_report.to_dict() if self.rate_report else None,
            "eigen_defect": float(self.eigen_defect),
            "kernel_invariance_defect": float(self.kernel_invariance_defect),
            "degree": mp.nstr(self.degree, 30),
            "multiplicity": self.multiplicity,
        }


def cesaro_class_limit(
    action: GradedCohomologyAction,
    S_class,
    s: int,
    N_max: int = 200,
    prec: int = DEFAULT_PREC,
    fit_window=(20, 50),
) -> CesaroResult:
    """Limit of the Cesàro averages of normalized pullbacks of a class.

    The averaged sequence (1/N) sum_n pullback^n(S) / (n^{l_s-1} d_s^n) is
    computed term by term; its limit is the averaged limit operator applied
    to the class, and the measured deviations validate the log(N)/N rate.
    The limit only sees the class through the dominant projector, so kernel
    perturbations leave it unchanged.
    """
    info = _block_jordan(action, s, prec)
    d_s, l_s = info.spectral_radius, info.multiplicity
    with mp.workprec(prec):
        svec = _to_mp_vector(S_class)
        if len(svec) != action.dim(s):
            raise ValidationError("class has the wrong dimension")
        if all(v == 0 for v in svec):
            zero = [mp.mpc(0)] * len(svec)
            return CesaroResult(
                limit_class=zero,
                rate_report=rates.DecayReport([], [], None, None, None, "exact"),
                eigen_defect=mp.mpf(0),
                kernel_invariance_defect=mp.mpf(0),
                degree=d_s,
                multiplicity=l_s,
            )

        _, averaged, _, _ = jordan_mod.limit_matrices(action.blocks[s], info)
        limit_vec = averaged * mp.matrix(svec)

        full = action.blocks[s].to_mp()
        ns, devs = _cesaro_deviations(full, svec, limit_vec, d_s, l_s, N_max)
        floor = mp.mpf(2) ** (-prec + 16) * max(1, mp_vector_inf_norm(limit_vec))
        report = rates.classify_decay(
            ns, devs, fit_range=fit_window, shape_fn=rates.shape_logn_over_n,
            shape_name="C*log(n)/n", floor=floor,
        )

        eigen_defect = mp_vector_inf_norm(full * limit_vec - d_s * limit_vec) / max(
            mp.mpf(1), mp_vector_inf_norm(limit_vec)
        )

        # kernel perturbation invariance: shift the input along the kernel of
        # the averaged operator and compare the projected limits
        kernel_defect = mp.mpf(0)
        u, svals, v = mp.svd_c(mp.matrix(averaged))
        top = max(svals) if len(svals) else mp.mpf(0)
        for j in range(len(svals)):
            if top == 0 or svals[j] <= mp.mpf(2) ** (-prec // 2) * top:
                kvec = mp.matrix([mp.conj(v[j, i]) for i in range(len(svec))])
                shifted = averaged * (mp.matrix(svec) + kvec * mp_vector_inf_norm(svec))
                kernel_defect = max(
                    kernel_defect, mp_vector_inf_norm(shifted - limit_vec)
                )
        return CesaroResult(
            limit_class=[limit_vec[i] for i in range(len(svec))],
            rate_report=report,
            eigen_defect=eigen_defect,
            kernel_invariance_defect=kernel_defect,
            degree=d_s,
            multiplicity=l_s,
        )


def _cesaro_deviations(full, svec, limit_vec, d_s, l_s, n_max):
    acc = mp.matrix(len(svec), 1)
    cur = mp.matrix(svec)
    ns, devs = [], []
    for n in range(1, n_max + 1):
        cur = full * cur
        acc = acc + cur / (mp.mpf(n) ** (l_s - 1) * d_s**n)
        avg = acc / n
        ns.append(n)
        devs.append(mp_vector_inf_norm(avg - limit_vec))
    return ns, devs


# ---------------------------------------------------------------------------
# degree chain


@dataclass
class DegreeChainReport:
    applicable: bool
    reason: str
    m: int | None
    ratios: dict  # s -> d_m / d_{k-s+m}
    all_above_one: bool
    chain_ok: bool

    def to_dict(self):
        return {
            "applicable": self.applicable,
            "reason": self.reason,
            "m": self.m,
            "ratios": {str(s): mp.nstr(v, 25) for s, v in self.ratios.items()},
            "all_above_one": self.all_above_one,
            "chain_ok": self.chain_ok,
        }


def degree_chain_check(action: GradedCohomologyAction, prec: int = DEFAULT_PREC) -> DegreeChainReport:
    """When the middle degrees are pairwise distinct with a strict single
    peak at m, verify the ratios d_m / d_{k-s+m} > 1 for s = m..k-1 that
    drive the inductive wedge construction of invariant currents."""
    profile = dynamical_degrees(action, prec)
    d = profile.degrees
    k = profile.k
    if profile.entropy <= 0:
        return DegreeChainReport(False, "entropy is zero; all degrees equal 1", None, {}, False, False)
    clusters = _cluster_degrees(d)
    if len(set(clusters)) != k:  # d_0 and d_k share a cluster; the rest distinct
        return DegreeChainReport(
            False, "degrees are not pairwise distinct", None, {}, False, False
        )
    m, mprime = profile.plateau
    if m != mprime:
        return DegreeChainReport(False, "degree plateau is not a single peak", None, {}, False, False)
    chain_ok = all(d[p] < d[p + 1] for p in range(0, m)) and all(
        d[p] > d[p + 1] for p in range(m, k)
    )
    ratios = {}
    above = True
    for s in range(m, k):
        r = d[m] / d[k - s + m]
        ratios[s] = r
        if not r > 1:
            above = False
    return DegreeChainReport(True, "", m, ratios, above, chain_ok)
