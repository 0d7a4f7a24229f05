"""Mixing checks for torus automorphisms against Haar measure.

Characters of the real torus underlying C^k / Z[i]^k are indexed by integer
frequency vectors on the 2k-dimensional lattice; correlations of characters
reduce to exact integer orbit computations.  Trigonometric polynomials keep
exact (Gaussian-)rational coefficients throughout, so grid correlations on
rational grids are exact numbers, not floating approximations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy as sp

from . import algebra
from .errors import NotHyperbolic, ValidationError, ZeroFrequency, AliasWarning
from .exact import ExactMatrix
from .models import TorusAutomorphism

DEFAULT_GRID = 2**10

#: hard cap for the escape search beyond the requested range
ESCAPE_CAP = 20_000

#: consecutive steps the orbit must stay beyond the target norm, plus a
#: magnitude margin, before the search concludes no further returns occur
ESCAPE_WINDOW = 24
ESCAPE_MARGIN = 2**16


def realified_lattice_map(torus_or_matrix):
    """Integer matrix of the map on the real 2k-lattice (or the matrix
    itself for a plain integer lattice map)."""
    if isinstance(torus_or_matrix, TorusAutomorphism):
        a = torus_or_matrix.A.mat
        re_ = a.applyfunc(sp.re)
        im_ = a.applyfunc(sp.im)
        block = sp.Matrix(sp.BlockMatrix([[re_, -im_], [im_, re_]]))
        return [[int(block[i, j]) for j in range(block.cols)] for i in range(block.rows)]
    m = ExactMatrix(torus_or_matrix) if not isinstance(torus_or_matrix, ExactMatrix) else torus_or_matrix
    if m.is_gaussian or not m.is_integral():
        raise ValidationError("lattice map must be an integer matrix")
    return [[int(e) for e in row] for row in m.mat.tolist()]


def check_hyperbolic(lattice_map, prec=128):
    """Exact hyperbolicity test: no eigenvalue of the lattice map may have
    modulus one."""
    mat = ExactMatrix(lattice_map)
    handles, _, _ = algebra.build_handles(mat.mat, prec)
    for h in handles:
        if algebra.abs2_equals_one(h, prec):
            raise NotHyperbolic(
                f"eigenvalue {h.value} has modulus one; character orbits need not escape"
            )
    return True


def _transpose(m):
    return [list(row) for row in zip(*m)]


def _matvec_int(m, v):
    return tuple(sum(m[i][j] * v[j] for j in range(len(v))) for i in range(len(v)))


def _inf_norm_int(v):
    return max(abs(x) for x in v)


@dataclass
class CorrelationReport:
    pairs: list  # [(frequency or label, frequency or label)]
    n_values: list
    values: list  # exact correlation values (int or Fraction)
    decay_flag: bool
    last_coincidence: int | None = None
    certificate: str = "range-only"
    aliased_from: int | None = None

    def to_dict(self):
        return {
            "pairs": [[str(a), str(b)] for a, b in self.pairs],
            "n_values": list(self.n_values),
            "values": [str(v) for v in self.values],
            "decay_flag": self.decay_flag,
            "last_coincidence": self.last_coincidence,
            "certificate": self.certificate,
            "aliased_from": self.aliased_from,
        }


def haar_character_correlation(torus, m_vec, m_vec2, n_range=(1, 100)) -> CorrelationReport:
    """Correlations of two characters under iteration, exactly.

    The correlation at time n is 1 when the pulled-back frequency lands on
    the negated second frequency and 0 otherwise.  For hyperbolic maps a
    nonzero integer orbit never revisits a point (a revisit would make some
    eigenvalue a root of unity), so at most one coincidence can ever occur:
    a found coincidence certifies every later correlation vanishes.  When no
    coincidence lies in the range, the orbit is followed until it escapes
    the target ball with a persistent margin.
    """
    b = _transpose(realified_lattice_map(torus))
    m1 = tuple(int(x) for x in m_vec)
    m2 = tuple(int(x) for x in m_vec2)
    if len(m1) != len(b) or len(m2) != len(b):
        raise ValidationError("frequency vectors must match the real lattice dimension")
    if not any(m1) or not any(m2):
        raise ZeroFrequency("character frequency is zero; the observable is constant")
    hyperbolic = True
    try:
        check_hyperbolic(realified_lattice_map(torus))
    except NotHyperbolic:
        hyperbolic = False

    lo, hi = (int(n_range[0]), int(n_range[1])) if isinstance(n_range, tuple) else (1, int(max(n_range)))
    target = tuple(-x for x in m2)
    target_norm = _inf_norm_int(m2)

    ns, values = [], []
    coincidences = []
    v = m1
    escape_run = 0
    certificate = "range-only"
    n = 0
    while True:
        n += 1
        v = _matvec_int(b, v)
        if lo <= n <= hi:
            ns.append(n)
            values.append(1 if v == target else 0)
        if v == target:
            coincidences.append(n)
        if _inf_norm_int(v) > max(target_norm, 1) * ESCAPE_MARGIN:
            escape_run += 1
        else:
            escape_run = 0
        if n >= hi:
            if coincidences and hyperbolic:
                certificate = "unique-coincidence"
                break
            if escape_run >= ESCAPE_WINDOW:
                certificate = "escaped"
                break
            if n >= max(hi, ESCAPE_CAP):
                certificate = "range-only"
                break

    last = coincidences[-1] if coincidences else None
    if len(coincidences) > 1 and hyperbolic:
        raise RuntimeError("hyperbolic orbit revisited a point; arithmetic error")
    decay = all(val == 0 for n, val in zip(ns, values) if last is None or n > last)
    return CorrelationReport(
        pairs=[(m1, m2)],
        n_values=ns,
        values=values,
        decay_flag=decay,
        last_coincidence=last,
        certificate=certificate if hyperbolic else "not-hyperbolic:" + certificate,
    )


# ---------------------------------------------------------------------------
# exact trigonometric polynomials


def _to_exact(c):
    if isinstance(c, (int, Fraction)):
        return sp.Rational(c)
    return sp.sympify(c)


class TrigPolynomial:
    """Finite combination of torus characters with exact coefficients."""

    def __init__(self, coeffs):
        self.coeffs = {}
        for freq, c in coeffs.items():
            c = _to_exact(c)
            if c != 0:
                self.coeffs[tuple(int(f) for f in freq)] = c

    @classmethod
    def character(cls, freq):
        return cls({tuple(freq): sp.Integer(1)})

    @classmethod
    def cosine(cls, freq):
        freq = tuple(freq)
        neg = tuple(-f for f in freq)
        return cls({freq: sp.Rational(1, 2), neg: sp.Rational(1, 2)})

    @property
    def dim(self):
        for f in self.coeffs:
            return len(f)
        return 0

    def max_frequency(self):
        return max((_inf_norm_int(f) for f in self.coeffs), default=0)

    def conj(self):
        return TrigPolynomial({tuple(-x for x in f): sp.conjugate(c) for f, c in self.coeffs.items()})

    def __mul__(self, other):
        out = {}
        for f1, c1 in self.coeffs.items():
            for f2, c2 in other.coeffs.items():
                f = tuple(a + b for a, b in zip(f1, f2))
                out[f] = out.get(f, sp.Integer(0)) + c1 * c2
        return TrigPolynomial(out)

    def pullback(self, lattice_map_t):
        """Composition with the torus map: frequencies move by the transpose."""
        return TrigPolynomial(
            {_matvec_int(lattice_map_t, f): c for f, c in self.coeffs.items()}
        )

    def mean(self):
        return self.coeffs.get((0,) * self.dim, sp.Integer(0))

    def grid_mean(self, resolution):
        """Exact average over the uniform grid: frequencies divisible by the
        resolution contribute their coefficients."""
        total = sp.Integer(0)
        for f, c in self.coeffs.items():
            if all(x % resolution == 0 for x in f):
                total += c
        return total

    def l2_norm_sq(self):
        return sum(sp.Abs(c) ** 2 for c in self.coeffs.values())

    def sample(self, resolution):
        """Float samples on the uniform grid (row-major over axes)."""
        dim = self.dim
        axes = [np.arange(resolution) for _ in range(dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1) / resolution
        out = np.zeros(resolution**dim, dtype=complex)
        for f, c in self.coeffs.items():
            phase = np.exp(2j * np.pi * (pts @ np.array(f)))
            out = out + complex(c) * phase
        return out


def grid_correlation(
    torus,
    phi,
    psi,
    n_range=(1, 60),
    resolution=DEFAULT_GRID,
) -> CorrelationReport:
    """Correlations on the uniform rational grid.

    For exact trigonometric polynomials every grid average is an exact
    number and equals the Haar correlation as long as no pulled-back
    frequency folds over the grid; the report is truncated with an alias
    warning at the first n where folding could occur.  Sampled arrays fall
    back to floating-point averages.
    """
    b_t = _transpose(realified_lattice_map(torus))
    lo, hi = int(n_range[0]), int(n_range[1])
    if isinstance(phi, TrigPolynomial) and isinstance(psi, TrigPolynomial):
        return _grid_correlation_exact(b_t, phi, psi, lo, hi, resolution)
    return _grid_correlation_float(b_t, phi, psi, lo, hi, resolution)


def _grid_correlation_exact(b_t, phi, psi, lo, hi, resolution):
    mean_phi = phi.grid_mean(resolution)
    mean_psi = psi.grid_mean(resolution)
    ns, values = [], []
    aliased_from = None
    cur = phi
    for n in range(1, hi + 1):
        cur = cur.pullback(b_t)
        if cur.max_frequency() + psi.max_frequency() >= resolution:
            aliased_from = n
            warnings.warn(
                f"pulled-back frequencies reach the grid Nyquist bound at n = {n}; "
                f"range truncated",
                AliasWarning,
                stacklevel=3,
            )
            break
        if n < lo:
            continue
        corr = (cur * psi).grid_mean(resolution) - mean_phi * mean_psi
        ns.append(n)
        values.append(sp.expand(corr))
    decay = bool(ns) and all(v == 0 for v in values[len(values) // 2 :])
    return CorrelationReport(
        pairs=[("phi", "psi")],
        n_values=ns,
        values=values,
        decay_flag=decay,
        aliased_from=aliased_from,
    )


def _grid_correlation_float(b_t, phi, psi, lo, hi, resolution):
    phi_arr = np.asarray(phi)
    psi_arr = np.asarray(psi)
    dim = len(b_t)
    npts = resolution**dim
    if phi_arr.shape[0] != npts or psi_arr.shape[0] != npts:
        raise ValidationError("sampled observables must live on the full grid")
    from .green import grid_index_map

    g_int = np.array(_transpose(b_t), dtype=np.int64)  # the map itself, not its transpose
    gmap = grid_index_map(g_int, resolution)
    mean_phi = phi_arr.mean()
    mean_psi = psi_arr.mean()
    ns, values = [], []
    cur = phi_arr
    for n in range(1, hi + 1):
        cur = cur[gmap]
        if n < lo:
            continue
        ns.append(n)
        values.append(complex((cur * psi_arr).mean() - mean_phi * mean_psi))
    decay = bool(ns) and all(abs(v) < 1e-9 for v in values[len(values) // 2 :])
    return CorrelationReport(
        pairs=[("phi", "psi")],
        n_values=ns,
        values=values,
        decay_flag=decay,
    )


@dataclass
class ErgodicAverageReport:
    n_values: list
    averages: list
    max_tail: object
    decay_flag: bool
    bound: object = None  # fitted C/n bound on the average magnitudes

    def to_dict(self):
        return {
            "n_values": list(self.n_values),
            "averages": [str(a) for a in self.averages],
            "max_tail": str(self.max_tail),
            "decay_flag": self.decay_flag,
            "bound": self.bound.to_dict() if self.bound else None,
        }


def ergodic_average_check(torus, phi, n_range=(1, 100), psi=None, resolution=None) -> ErgodicAverageReport:
    """Time averages of a zero-mean observable against a fixed test function.

    For exact trigonometric polynomials the averages are exact rationals;
    they must tend to zero, with the tail shrinking like the inverse time.
    """
    if not isinstance(phi, TrigPolynomial):
        raise ValidationError("time averages are implemented for exact trigonometric polynomials")
    if phi.mean() != 0:
        raise ValidationError("observable must have zero mean")
    if psi is None:
        psi = phi.conj()
    b_t = _transpose(realified_lattice_map(torus))
    lo, hi = int(n_range[0]), int(n_range[1])
    ns, avgs = [], []
    acc = sp.Integer(0)
    cur = phi
    for n in range(1, hi + 1):
        cur = cur.pullback(b_t)
        acc += (cur * psi).mean()
        if n >= lo:
            ns.append(n)
            avgs.append(sp.expand(acc / sp.Integer(n)))
    tail = max((abs(sp.Float(a)) for n, a in zip(ns, avgs) if n >= (lo + hi) // 2), default=sp.Float(0))
    decay = bool(avgs) and abs(sp.Float(avgs[-1])) <= 4 / max(1, ns[-1])
    from . import rates

    import mpmath as mp

    magnitudes = [mp.mpf(str(abs(sp.Float(a, 30)))) for a in avgs]
    mid = (ns[0] + ns[-1]) // 2 if ns else 1
    bound = rates.fit_and_validate(ns, magnitudes, rates.shape_one_over_n, "C/n",
                                   fit_range=(ns[0] if ns else 1, mid))
    return ErgodicAverageReport(n_values=ns, averages=avgs, max_tail=tail,
                                decay_flag=decay, bound=bound)


def random_hyperbolic_automorphism(rng, k=2, entry_bound=3, max_tries=500):
    """Draw a random Gaussian-integer torus automorphism with unit
    determinant and no eigenvalue of modulus one."""
    for _ in range(max_tries):
        entries = [
            [int(rng.integers(-entry_bound, entry_bound + 1)) for _ in range(k)]
            for _ in range(k)
        ]
        try:
            torus = TorusAutomorphism(k, entries)
            check_hyperbolic(realified_lattice_map(torus))
            return torus
        except Exception:
            continue
    raise RuntimeError("no hyperbolic automorphism found; widen the search")
