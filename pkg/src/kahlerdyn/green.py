"""Hölder-continuous limit functions from expanding linear iterations, the
torus limit/averaging dichotomy for normalized pullbacks of the Kähler
class, and empirical Hölder-exponent certification.

The grid dynamics is exact: an integer matrix maps the uniform rational
grid to itself with zero discretization error, so every reported deviation
is attributable to truncation alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
import sympy as sp

from . import degrees as degrees_mod
from . import jordan as jordan_mod
from . import rates
from .errors import HypothesisViolated, NoExpansion, ValidationError
from .exact import ExactMatrix, mp_vector_inf_norm
from .models import GradedCohomologyAction, TorusAutomorphism, torus_action

DEFAULT_PREC = jordan_mod.DEFAULT_PREC


# ---------------------------------------------------------------------------
# grid machinery


def _as_int_matrix(g):
    arr = np.array(g, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError("grid map must be a square integer matrix")
    return arr


def grid_points(resolution, dim):
    """Flattened coordinates of the uniform (1/resolution)-grid on the
    dim-torus, shape (resolution^dim, dim)."""
    axes = [np.arange(resolution) for _ in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    idx = np.stack([m.ravel() for m in mesh], axis=-1)
    return idx


def grid_index_map(g_int, resolution):
    """Flat index permutation realizing x -> Gx mod 1 on the grid."""
    dim = g_int.shape[0]
    idx = grid_points(resolution, dim)
    image = (idx @ g_int.T) % resolution
    flat = np.zeros(len(idx), dtype=np.int64)
    for a in range(dim):
        flat = flat * resolution + image[:, a]
    return flat


@dataclass
class IterationSetup:
    """Data for the expanding iteration on a grid over the torus.

    g is the integer matrix of the grid self-map, u a function (callable on
    points in [0,1)^dim or a sampled array), nu its assumed Hölder exponent,
    and lam the exact matrix acting on the value space.
    """

    resolution: int
    dim: int
    g: object
    u: object
    nu: float
    lam: ExactMatrix
    prec: int = DEFAULT_PREC

    def __post_init__(self):
        self.g_int = _as_int_matrix(self.g)
        if self.g_int.shape[0] != self.dim:
            raise ValidationError("grid map dimension mismatch")
        self.lipschitz = int(np.abs(self.g_int).sum(axis=1).max())
        self.jordan = jordan_mod.eigen_structure(self.lam, self.prec)
        lam_val = self.jordan.spectral_radius
        if self.lipschitz <= 1 or not lam_val > 1:
            raise HypothesisViolated(
                f"need expansion on both sides: M = {self.lipschitz}, spectral radius = {mp.nstr(lam_val, 10)}"
            )
        if not (0 < self.nu <= 1):
            raise ValidationError("regularity exponent must lie in (0, 1]")

    def sample_u(self):
        """Sampled values of u on the grid, shape (npoints, dim_value)."""
        if isinstance(self.u, np.ndarray):
            vals = np.asarray(self.u, dtype=complex)
            if vals.shape[0] != self.resolution**self.dim:
                raise ValidationError("sampled function has the wrong grid size")
            if vals.ndim == 1:
                vals = vals[:, None]
            if vals.shape[1] != self.lam.dim:
                raise ValidationError("sampled function has the wrong value dimension")
            return vals
        pts = grid_points(self.resolution, self.dim).astype(float) / self.resolution
        vals = np.asarray(self.u(pts), dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape != (self.resolution**self.dim, self.lam.dim):
            raise ValidationError(
                f"sampled function has shape {vals.shape}, expected "
                f"({self.resolution**self.dim}, {self.lam.dim})"
            )
        return vals

    @property
    def admissible_exponent(self):
        lam_val = float(self.jordan.spectral_radius)
        return min(self.nu, math.log(lam_val) / math.log(self.lipschitz))


@dataclass
class HolderEstimate:
    exponent: float
    constant: float
    pairs_used: int
    admissible_bound: float | None
    scales: list
    increments: list
    degenerate: bool = False

    def to_dict(self):
        return {
            "exponent": self.exponent,
            "constant": self.constant,
            "pairs_used": self.pairs_used,
            "admissible_bound": self.admissible_bound,
            "scales": [float(s) for s in self.scales],
            "increments": [float(v) for v in self.increments],
            "degenerate": self.degenerate,
        }


@dataclass
class HolderIterationResult:
    v_sequence: list  # v_n arrays, n = 1..n_max
    w_sequence: list  # w_N arrays, N = 1..N_max
    v: object  # limit of the twisted sequence
    w: object  # limit of the averages
    twisted_report: rates.DecayReport
    averaged_report: rates.DecayReport
    setup: IterationSetup

    def to_dict(self):
        return {
            "twisted_report": self.twisted_report.to_dict(),
            "averaged_report": self.averaged_report.to_dict(),
            "n_max": len(self.v_sequence),
            "N_max": len(self.w_sequence),
        }


def _sup_norm(arr):
    return float(np.abs(arr).max()) if arr.size else 0.0


def holder_iteration(setup: IterationSetup, n_max: int, N_max: int | None = None,
                     fit_window=(20, 50), keep_sequences=True) -> HolderIterationResult:
    """Normalized sums v_n = (sum_{j=1}^n lam^j u(g^{n-j} x)) / (n^{m-1} s^n)
    and their averages, with limits and measured convergence rates.

    The sums are built by the exact recurrence S_{n+1} = lam (S_n + u о g^n);
    the limits are evaluated independently through the geometric series over
    the dominant spectral part, truncated below machine resolution.
    """
    if n_max < 20:
        raise ValidationError("n_max must allow at least 20 iterates")
    if N_max is None:
        N_max = n_max
    info = setup.jordan
    lam_val = float(info.spectral_radius)
    m = info.multiplicity
    with mp.workprec(setup.prec):
        limit_mat, averaged_mat, dom_projs, _ = jordan_mod.limit_matrices(setup.lam, info)
    dim_e = setup.lam.dim
    lam_np = np.array(setup.lam.to_mp().tolist(), dtype=complex)

    gmap = grid_index_map(setup.g_int, setup.resolution)
    u0 = setup.sample_u()
    npts = u0.shape[0]

    # limits via the dominant geometric series: each dominant part D_j
    # contributes sum_l (conj(mu_j)/s^2)^l D_j u(g^l x)
    d_parts = []
    for proj, ang, dmat in dom_projs:
        d_np = np.array(dmat.tolist(), dtype=complex)
        p_np = np.array(proj.tolist(), dtype=complex)
        d_parts.append((complex(mp.expj(-ang)) / lam_val, d_np, p_np, float(ang)))
    tail_len = max(4, int(60 * math.log(2) / math.log(lam_val)) + 2)
    v_limit = np.zeros((npts, dim_e), dtype=complex)
    w_limit = np.zeros((npts, dim_e), dtype=complex)
    u_l = u0
    for l in range(tail_len):
        for w_j, d_np, _, ang in d_parts:
            contrib = (w_j**l) * (u_l @ d_np.T)
            v_limit += contrib
            if ang == 0.0:
                w_limit += contrib
        u_l = u_l[gmap]

    # exact recurrence for the finite sums
    v_seq, w_seq = [], []
    s_norm = np.zeros((npts, dim_e), dtype=complex)  # S_n / (n^{m-1} s^n)
    u_n = u0
    c = 1.0  # 1 / ((n+1)^{m-1} s^n) during step n -> n+1
    avg = np.zeros((npts, dim_e), dtype=complex)
    ns, tw_devs, av_devs = [], [], []
    for n in range(n_max):
        # step from S_n to S_{n+1}, keeping the normalized representative
        ratio = ((n + 1) / (n + 2)) ** (m - 1) if m > 1 else 1.0
        shrink = (n / (n + 1)) ** (m - 1) if (m > 1 and n > 0) else 1.0
        s_norm = (s_norm * shrink + u_n * c) @ (lam_np.T / lam_val)
        u_n = u_n[gmap]
        c = c * ratio / lam_val
        v_n = s_norm
        nn = n + 1
        if keep_sequences:
            v_seq.append(v_n.copy())
        twisted = v_n.copy()
        for w_j, d_np, p_np, ang in d_parts:
            if ang != 0.0:
                phase = complex(mp.expj(-nn * ang)) - 1.0
                twisted = twisted + phase * (v_n @ p_np.T)
        ns.append(nn)
        tw_devs.append(mp.mpf(_sup_norm(twisted - v_limit)))
        if nn <= N_max:
            avg = avg + v_n
            if keep_sequences:
                w_seq.append(avg / nn)
            av_devs.append(mp.mpf(_sup_norm(avg / nn - w_limit)))

    floor = mp.mpf(max(_sup_norm(v_limit), 1.0)) * mp.mpf(2) ** -48
    twisted_report = rates.classify_decay(ns, tw_devs, fit_range=fit_window, floor=floor)
    averaged_report = rates.classify_decay(
        ns[: len(av_devs)], av_devs, fit_range=fit_window,
        shape_fn=rates.shape_logn_over_n, shape_name="C*log(n)/n", floor=floor,
    )
    return HolderIterationResult(
        v_sequence=v_seq,
        w_sequence=w_seq,
        v=v_limit,
        w=w_limit,
        twisted_report=twisted_report,
        averaged_report=averaged_report,
        setup=setup,
    )


def dynamics_adapted_lags(resolution, base, max_scales=6):
    """Grid lags base^j from one cell up, for functions produced by an exact
    grid dynamics of expansion ``base``.

    Exact dynamics means the grid values are exact function values, so there
    is no discretization floor and the finest cells are usable; sampling at
    the dynamics' own base keeps the log-periodic prefactor of self-affine
    limit functions at a fixed phase, which a mismatched ladder would alias
    into the fitted slope.
    """
    lags = []
    s = 1
    while s <= resolution // 4 and len(lags) < max_scales:
        lags.append(s)
        s *= base
    return lags


def holder_exponent_estimate(values, resolution=None, dim=1, lags=None, min_cells=4,
                             min_scales=3, max_scales=6,
                             admissible_bound=None) -> HolderEstimate:
    """Regression estimate of the Hölder exponent of a grid function.

    The sup of |v(x) - v(y)| over pairs at lattice distances h is regressed
    against log h.  Default lags are the finest dyadic separations at least
    ``min_cells`` cells wide (sampled data cannot resolve below that floor);
    callers with exactly-generated grid data pass their own lags, e.g. from
    :func:`dynamics_adapted_lags`.  A constant function has no measurable
    exponent and is flagged degenerate with the conventional value 1.
    """
    arr = np.asarray(values)
    if resolution is None:
        resolution = int(round(arr.shape[0] ** (1.0 / dim)))
    if arr.shape[0] != resolution**dim:
        raise ValidationError("sample count does not match the grid resolution")
    grid = arr.reshape((resolution,) * dim + (-1,))

    if lags is None:
        lags = []
        j = 1
        while True:
            sep = resolution >> j
            if sep < min_cells:
                break
            lags.append(sep)
            j += 1
        lags = sorted(lags)[:max_scales]
    lags = sorted(set(int(s) for s in lags))
    if any(s < 1 or s >= resolution for s in lags):
        raise ValidationError("lags must lie between one cell and the grid size")

    scales, increments = [], []
    for sep in lags:
        worst = 0.0
        for axis in range(dim):
            diff = np.abs(grid - np.roll(grid, sep, axis=axis))
            worst = max(worst, float(diff.max()))
        scales.append(sep / resolution)
        increments.append(worst)
    if len(scales) < min_scales:
        raise ValidationError(
            f"grid too coarse: only {len(scales)} usable scales, need {min_scales}"
        )
    top = max(increments)
    if top == 0:
        return HolderEstimate(
            exponent=1.0,
            constant=0.0,
            pairs_used=len(scales),
            admissible_bound=admissible_bound,
            scales=scales,
            increments=increments,
            degenerate=True,
        )
    xs = np.log(np.array(scales))
    ys = np.log(np.maximum(np.array(increments), top * 1e-300))
    slope, intercept = np.polyfit(xs, ys, 1)
    return HolderEstimate(
        exponent=float(slope),
        constant=float(np.exp(intercept)),
        pairs_used=len(scales),
        admissible_bound=admissible_bound,
        scales=scales,
        increments=increments,
    )


# ---------------------------------------------------------------------------
# torus limit dichotomy


@dataclass
class GreenLimitResult:
    mode: str  # 'PlainLimit' | 'CesaroOnly'
    limit_class: list
    rate_report: rates.DecayReport
    eigen_defect: object
    positivity_min_eigenvalue: object | None
    hermitian_defect: object | None
    subsequential_samples: list  # (n, angle offsets, class) for CesaroOnly
    plain_sequence_gap: object | None
    theta_group: str

    def to_dict(self):
        return {
            "mode": self.mode,
            "limit_class": [mp.nstr(v, 25) for v in self.limit_class],
            "rate_report": self.rate_report.to_dict() if self.rate_report else None,
            "eigen_defect": float(self.eigen_defect),
            "positivity_min_eigenvalue": None
            if self.positivity_min_eigenvalue is None
            else float(self.positivity_min_eigenvalue),
            "hermitian_defect": None if self.hermitian_defect is None else float(self.hermitian_defect),
            "n_samples": len(self.subsequential_samples),
            "plain_sequence_gap": None
            if self.plain_sequence_gap is None
            else float(self.plain_sequence_gap),
            "theta_group": self.theta_group,
        }


def coefficient_hermitian_matrix(limit_vec, k):
    """Hermitian matrix H with the class equal to i * sum H_ab dz_a ∧ dz̄_b."""
    c = mp.matrix(k, k)
    for a in range(k):
        for b in range(k):
            c[a, b] = -1j * limit_vec[a * k + b]
    herm = (c + c.H) / 2
    defect = jordan_mod.mp_matrix_inf_norm(c - c.H) / max(
        mp.mpf(1), jordan_mod.mp_matrix_inf_norm(c)
    )
    return herm, defect


def green_limit_torus(
    torus: TorusAutomorphism,
    N_max: int = 200,
    prec: int = DEFAULT_PREC,
    n_samples: int = 8,
    sample_tolerance: float = 1e-3,
    fit_window=(20, 50),
) -> GreenLimitResult:
    """Normalized pullbacks of the Kähler class on a torus: plain limit when
    the dominant angle closure is trivial, Cesàro limit plus a finite sample
    of subsequential limits otherwise."""
    action = torus_action(torus)
    block = action.blocks[1]
    info = jordan_mod.eigen_structure(block, prec)
    if info.spectral_radius_is_one():
        raise NoExpansion("first degree equals 1; no normalized limit to take")

    with mp.workprec(prec):
        limit_mat, averaged_mat, dom_projs, _ = jordan_mod.limit_matrices(block, info)
        omega = degrees_mod._to_mp_vector(action.kahler_class[1])
        omega_vec = mp.matrix(omega)
        lam = info.spectral_radius
        full = block.to_mp()

        plain = info.theta_group.kind == "Trivial"
        target = (limit_mat if plain else averaged_mat) * omega_vec
        limit_list = [target[i] for i in range(len(omega))]

        # deviations of the actual normalized pullback sequence
        ns, devs, plain_snapshots = [], [], {}
        cur = omega_vec.copy()
        acc = mp.matrix(len(omega), 1)
        for n in range(1, N_max + 1):
            cur = full * cur
            norm = mp.mpf(n) ** (info.multiplicity - 1) * lam**n
            term = cur / norm
            acc = acc + term
            ns.append(n)
            if plain:
                devs.append(mp_vector_inf_norm(term - target))
            else:
                devs.append(mp_vector_inf_norm(acc / n - target))
            if n >= N_max - max(2 * n_samples, 16):
                plain_snapshots[n] = [term[i] for i in range(len(omega))]

        floor = mp.mpf(2) ** (-prec + 16) * max(1, mp_vector_inf_norm(target))
        report = rates.classify_decay(
            ns,
            devs,
            fit_range=fit_window,
            shape_fn=rates.shape_one_over_n if plain else rates.shape_logn_over_n,
            shape_name="C/n" if plain else "C*log(n)/n",
            floor=floor,
        )

        eigen_defect = mp_vector_inf_norm(full * target - lam * target) / max(
            mp.mpf(1), mp_vector_inf_norm(target)
        )

        samples, gap = [], None
        pos_min = herm_defect = None
        if plain:
            herm, herm_defect = coefficient_hermitian_matrix(limit_list, torus.k)
            eigvals = mp.eighe(herm, eigvals_only=True)
            pos_min = min(eigvals)
            mode = "PlainLimit"
        else:
            samples = _subsequential_samples(
                info, dom_projs, omega_vec, n_samples, sample_tolerance, N_max
            )
            # divergence evidence straight from the sequence: the normalized
            # pullbacks near the end of the range stay spread apart
            snaps = list(plain_snapshots.values())
            gap = mp.mpf(0)
            for i in range(len(snaps)):
                for j in range(i + 1, len(snaps)):
                    d = max(abs(snaps[i][t] - snaps[j][t]) for t in range(len(omega)))
                    gap = max(gap, d)
            mode = "CesaroOnly"

        return GreenLimitResult(
            mode=mode,
            limit_class=limit_list,
            rate_report=report,
            eigen_defect=eigen_defect,
            positivity_min_eigenvalue=pos_min,
            hermitian_defect=herm_defect,
            subsequential_samples=samples,
            plain_sequence_gap=gap,
            theta_group=str(info.theta_group),
        )


def _subsequential_samples(info, dom_projs, omega_vec, n_samples, tolerance, n_cap):
    """Limits along subsequences with prescribed angle returns.

    For a finite closure the residues modulo the group order give every
    subsequential limit; for a positive-dimensional closure the orbit of the
    first infinite-order angle is sampled near equispaced targets.  Each
    sample records the time n, the achieved angle vector n*theta, and the
    subsequential limit value sum_j exp(i n theta_j) D_j omega.
    """
    thetas = info.theta
    out = []

    def value_at(n):
        vec = None
        for proj, ang, dmat in dom_projs:
            term = (dmat * omega_vec) * mp.expj(n * ang)
            vec = term if vec is None else vec + term
        return [vec[i] for i in range(vec.rows)]

    if info.theta_group.kind == "FiniteCyclic":
        order = info.theta_group.order
        for r in range(min(order, n_samples)):
            n = n_cap - (n_cap % order) + r
            out.append((n, [mp.fmod(n * t, 2 * mp.pi) for t in thetas], value_at(n)))
        return out

    # positive-dimensional closure: target the first infinite-order angle
    ref = None
    for t in thetas:
        if t != 0:
            ref = t
            break
    if ref is None:
        return out
    two_pi = 2 * mp.pi
    targets = [two_pi * l / n_samples for l in range(n_samples)]
    found = {}
    n = 1
    cap = max(n_cap, int(8 * n_samples / tolerance))
    while len(found) < len(targets) and n <= cap:
        ang = mp.fmod(n * ref, two_pi)
        for li, tgt in enumerate(targets):
            if li in found:
                continue
            d = abs(ang - tgt)
            d = min(d, two_pi - d)
            if d < tolerance * two_pi:
                found[li] = n
        n += 1
    for li in sorted(found):
        n = found[li]
        out.append((n, [mp.fmod(n * t, two_pi) for t in thetas], value_at(n)))
    return out


# ---------------------------------------------------------------------------
# minimal pullback recurrences


@dataclass
class MinimalRelation:
    length: int  # m: first linearly dependent pullback power
    coefficients: list  # a_0..a_{m-1}, exact
    residual_zero: bool
    spectral_radius_matches: bool
    multiplicity_matches: bool
    companion_radius: object
    reference_radius: object
    nu: float | None
    power: int

    def to_dict(self):
        return {
            "length": self.length,
            "coefficients": [str(c) for c in self.coefficients],
            "residual_zero": self.residual_zero,
            "spectral_radius_matches": self.spectral_radius_matches,
            "multiplicity_matches": self.multiplicity_matches,
            "companion_radius": mp.nstr(self.companion_radius, 30),
            "reference_radius": mp.nstr(self.reference_radius, 30),
            "nu": self.nu,
            "power": self.power,
        }


def minimal_power_for_exponent(torus: TorusAutomorphism, nu: float, prec: int = DEFAULT_PREC):
    """Smallest n with nu < n*log(d1) / log ||Df^n||, for the torus metric."""
    action = torus_action(torus)
    info = jordan_mod.eigen_structure(action.blocks[1], prec)
    if info.spectral_radius_is_one():
        raise NoExpansion("no expansion on degree 1")
    log_d1 = mp.log(info.spectral_radius)
    re_ = torus.A.mat.applyfunc(sp.re)
    im_ = torus.A.mat.applyfunc(sp.im)
    real = sp.Matrix(sp.BlockMatrix([[re_, -im_], [im_, re_]]))
    power = sp.eye(2 * torus.k)
    for n in range(1, 200):
        power = power * real
        m1 = max(sum(abs(power[i, j]) for j in range(2 * torus.k)) for i in range(2 * torus.k))
        if nu < float(n * log_d1 / mp.log(int(m1))):
            return n
    raise ValidationError("no admissible power below 200; exponent too demanding")


def recurrence_machinery(
    action: GradedCohomologyAction,
    nu: float | None = None,
    power: int = 1,
    prec: int = DEFAULT_PREC,
):
    """Minimal linear recurrence among pulled-back reference classes.

    Finds the largest m with the first m pullback powers of the reference
    class independent, the exact coefficients expressing the m-th power in
    terms of the previous ones, and the companion matrix of the relation
    (ones on the subdiagonal, coefficients in the last column); its spectral
    radius is checked against the first degree.  On these linear models the
    relation holds exactly in the full degree-1 space, so the potential
    correction term vanishes identically.
    """
    if action.kahler_class[1] is None:
        raise ValidationError("no reference class at degree 1")
    if power < 1:
        raise ValidationError("power must be a positive integer")
    block = action.blocks[1]
    for _ in range(power - 1):
        block = block * action.blocks[1]

    omega = sp.Matrix([sp.sympify(v) for v in action.kahler_class[1]])
    krylov = [omega]
    mat = block.mat
    current = omega
    m = None
    for j in range(1, block.dim + 1):
        current = mat * current
        stacked = sp.Matrix.hstack(*krylov, current)
        if stacked.rank() <= len(krylov):
            m = len(krylov)
            break
        krylov.append(current)
    if m is None:
        raise RuntimeError("no linear relation found within the space dimension")

    basis = sp.Matrix.hstack(*krylov)
    sol, params = basis.gauss_jordan_solve(current)
    if len(params) > 0:
        sol = sol.subs({p: 0 for p in params})
    coeffs = [sp.nsimplify(sol[j]) for j in range(m)]
    residual = basis * sp.Matrix(coeffs) - current
    residual_zero = all(sp.expand(residual[i]) == 0 for i in range(residual.rows))

    comp_rows = []
    for r in range(m):
        row = [sp.Integer(0)] * m
        if r > 0:
            row[r - 1] = sp.Integer(1)
        comp_rows.append(row)
    for r in range(m):
        comp_rows[r][m - 1] = coeffs[r]
    companion = ExactMatrix(sp.ImmutableMatrix(comp_rows))

    comp_info = jordan_mod.eigen_structure(companion, prec)
    ref_info = jordan_mod.eigen_structure(block, prec)
    tol = mp.mpf(10) ** -9
    radius_match = abs(comp_info.spectral_radius - ref_info.spectral_radius) <= tol * max(
        mp.mpf(1), ref_info.spectral_radius
    )
    mult_match = comp_info.multiplicity == ref_info.multiplicity

    relation = MinimalRelation(
        length=m,
        coefficients=coeffs,
        residual_zero=residual_zero,
        spectral_radius_matches=bool(radius_match),
        multiplicity_matches=mult_match,
        companion_radius=comp_info.spectral_radius,
        reference_radius=ref_info.spectral_radius,
        nu=nu,
        power=power,
    )
    return relation, companion
