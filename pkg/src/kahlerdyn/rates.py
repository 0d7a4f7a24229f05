"""Deviation-sequence fitting: bound constants, slopes, decay classification.

The standard protocol used throughout: fit the constant of a decay bound on
an early window of the sequence, then validate the bound on the remaining
range.  A small multiplicative slack absorbs ties at the fitted constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

#: deviations below this are treated as exactly zero (constant sequences)
EXACT_FLOOR = mp.mpf(2) ** -400

SLACK = mp.mpf("1.000001")


def shape_one_over_n(n):
    return mp.mpf(1) / n


def shape_logn_over_n(n):
    if n < 2:
        return mp.mpf(1) / n
    return mp.log(n) / n


@dataclass
class BoundFit:
    """C such that dev_n <= C * shape(n), fitted then validated."""

    shape: str
    constant: object
    fit_range: tuple
    validation_range: tuple
    holds: bool
    worst_ratio: object

    def to_dict(self):
        return {
            "shape": self.shape,
            "constant": float(self.constant),
            "fit_range": list(self.fit_range),
            "validation_range": list(self.validation_range),
            "holds": self.holds,
            "worst_ratio": float(self.worst_ratio),
        }


@dataclass
class DecayReport:
    n_values: list
    deviations: list
    bound: BoundFit | None
    loglog_slope: object
    semilog_slope: object
    kind: str  # 'exact', 'polynomial', or 'geometric'

    def to_dict(self):
        return {
            "n_values": list(self.n_values),
            "deviations": [float(d) for d in self.deviations],
            "bound": self.bound.to_dict() if self.bound else None,
            "loglog_slope": None if self.loglog_slope is None else float(self.loglog_slope),
            "semilog_slope": None if self.semilog_slope is None else float(self.semilog_slope),
            "kind": self.kind,
        }


def fit_and_validate(ns, devs, shape_fn, shape_name, fit_range=(20, 50)):
    """Fit C on ``fit_range`` and check dev <= C*shape on the rest."""
    lo, hi = fit_range
    fit_pairs = [(n, d) for n, d in zip(ns, devs) if lo <= n <= hi]
    val_pairs = [(n, d) for n, d in zip(ns, devs) if n > hi]
    if not fit_pairs:
        fit_pairs = list(zip(ns, devs))
        val_pairs = []
    c = max((d / shape_fn(n) for n, d in fit_pairs), default=mp.mpf(0))
    c = max(c, EXACT_FLOOR)
    worst = mp.mpf(0)
    holds = True
    for n, d in val_pairs:
        ratio = d / (c * SLACK * shape_fn(n))
        worst = max(worst, ratio)
        if ratio > 1:
            holds = False
    val_range = (val_pairs[0][0], val_pairs[-1][0]) if val_pairs else (None, None)
    return BoundFit(
        shape=shape_name,
        constant=c * SLACK,
        fit_range=fit_range,
        validation_range=val_range,
        holds=holds,
        worst_ratio=worst,
    )


def _least_squares_slope(xs, ys):
    n = len(xs)
    if n < 2:
        return None
    mx = mp.fsum(xs) / n
    my = mp.fsum(ys) / n
    num = mp.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    den = mp.fsum((x - mx) ** 2 for x in xs)
    if den == 0:
        return None
    return num / den


def loglog_slope(ns, devs):
    """Slope of log(dev) against log(n), skipping zero deviations."""
    pts = [(mp.log(n), mp.log(d)) for n, d in zip(ns, devs) if d > EXACT_FLOOR]
    if len(pts) < 2:
        return None
    return _least_squares_slope([p[0] for p in pts], [p[1] for p in pts])


def semilog_slope(ns, devs):
    """Slope of log(dev) against n (geometric decay shows up linearly)."""
    pts = [(mp.mpf(n), mp.log(d)) for n, d in zip(ns, devs) if d > EXACT_FLOOR]
    if len(pts) < 2:
        return None
    return _least_squares_slope([p[0] for p in pts], [p[1] for p in pts])


def _residual(xs, ys, slope):
    n = len(xs)
    mx = mp.fsum(xs) / n
    my = mp.fsum(ys) / n
    return mp.fsum((y - my - slope * (x - mx)) ** 2 for x, y in zip(xs, ys))


def classify_decay(
    ns,
    devs,
    fit_range=(20, 50),
    shape_fn=shape_one_over_n,
    shape_name="C/n",
    floor=None,
):
    """Full decay report: bound fit plus polynomial/geometric classification.

    ``floor`` marks the numerical noise level; deviations below it carry no
    information about the decay law and are excluded from the slope fits.
    """
    if floor is None:
        floor = EXACT_FLOOR
    floor = max(floor, EXACT_FLOOR)
    live = [(n, d) for n, d in zip(ns, devs) if d > floor]
    if not live:
        return DecayReport(list(ns), list(devs), None, None, None, "exact")
    bound = fit_and_validate(ns, devs, shape_fn, shape_name, fit_range)
    xs_log = [mp.log(n) for n, _ in live]
    xs_lin = [mp.mpf(n) for n, _ in live]
    ys = [mp.log(d) for _, d in live]
    s_log = _least_squares_slope(xs_log, ys)
    s_lin = _least_squares_slope(xs_lin, ys)
    kind = "polynomial"
    if s_log is not None and s_lin is not None:
        if _residual(xs_lin, ys, s_lin) < _residual(xs_log, ys, s_log):
            kind = "geometric"
    return DecayReport(list(ns), list(devs), bound, s_log, s_lin, kind)


def richardson(value_half, value_full):
    """Second-order extrapolation for sequences with a 1/n leading error."""
    return 2 * value_full - value_half
