"""Numerical checks of the Poincare-type inequalities and the metric-ball bounds."""
from dataclasses import dataclass, asdict

import numpy as np
from scipy.integrate import quad

from .curve import check_field, ds_powers, integrate_dtheta, integrate_ds
from .errors import OrderTooLow, SingularOperator
from .metric import embedding_constant, hk_norm, invert_Lbar, metric_eval

REL_SLACK = 1e-12


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: float
    rhs: float
    satisfied: bool
    slack: float
    hard: bool = True
    time: float | None = None

    @classmethod
    def make(cls, name, lhs, rhs, hard=True, time=None):
        lhs, rhs = float(lhs), float(rhs)
        ok = lhs <= rhs + REL_SLACK * max(1.0, abs(rhs)) if hard else True
        return cls(name, lhs, rhs, bool(ok), rhs - lhs, hard, time)

    def to_json(self):
        d = asdict(self)
        for k in ("lhs", "rhs", "slack"):
            if not np.isfinite(d[k]):
                d[k] = None
        return d


@dataclass(frozen=True)
class BallContext:
    length0: float
    radius: float
    A: float
    order: int

    def __post_init__(self):
        if not (self.length0 > 0 and self.radius >= 0 and self.A > 0):
            raise ValueError("ball context needs positive length, radius and A")


def _sq(c, f):
    g = f**2 if f.ndim == 1 else np.sum(f**2, 1)
    return integrate_ds(c, g)


def _sup2(f):
    return float(np.max(f**2 if f.ndim == 1 else np.sum(f**2, 1)))


def poincare_report(c, h, n):
    """Interpolation and Poincare inequalities in ``L^2(ds)`` for the field ``h``."""
    h = check_field(c, h)
    ell = c.length
    d = ds_powers(c, h, max(n, 2))
    nrm = [_sq(c, x) for x in d]
    out = [
        BoundReport.make("sup_h", _sup2(h), 2 / ell * nrm[0] + ell / 2 * nrm[1]),
        BoundReport.make("sup_Dh", _sup2(d[1]), ell / 4 * nrm[2]),
        BoundReport.make("poincare_Dh", nrm[1], ell**2 / 4 * nrm[2]),
    ]
    for k in range(n + 1):
        out.append(BoundReport.make(f"interp_{k}", nrm[k], nrm[0] + nrm[n]))
    for k in range(n + 1):
        rhs = np.sqrt(nrm[0]) ** (1 - k / n) * np.sqrt(nrm[n]) ** (k / n) if n else np.sqrt(nrm[0])
        out.append(BoundReport.make(f"gagliardo_nirenberg_{k}", np.sqrt(nrm[k]), rhs))
    return out


def ball_constants(ctx):
    n = ctx.order
    if n < 2:
        raise OrderTooLow("ball constants need a metric of order >= 2")
    sa = np.sqrt(ctx.A)
    root = np.sqrt(ctx.length0) + 0.5 * sa * ctx.radius
    return {
        "C_inv_sqrt_len": 2.0**-n * sa * root ** (2 * n - 4),
        "C_log_speed": 0.5 * sa * root,
        "speed_growth_factor": float(np.exp(0.5 * sa * ctx.radius * root)),
    }


def _velocities(traj, m):
    states = traj.states
    if all(s.momentum is not None for s in states):
        return [invert_Lbar(s.curve, s.momentum, m) for s in states]
    # finite differences of the stored curves
    t = np.array([s.time for s in states])
    x = np.array([s.curve.points for s in states])
    return list(np.gradient(x, t, axis=0))


def path_length(traj, m):
    """Cumulative ``Len^G`` at each recorded state (trapezoid in t of sqrt(G))."""
    if len(traj.states) < 2:
        return np.zeros(len(traj.states))
    us = _velocities(traj, m)
    speed = np.array([np.sqrt(max(metric_eval(s.curve, u, u, m), 0.0))
                      for s, u in zip(traj.states, us)])
    t = np.array([s.time for s in traj.states])
    return np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (speed[1:] + speed[:-1]))])


def _worst(reports):
    # the initial state is tight by construction; skip it when there is anything else
    reports = reports[1:] or reports
    return min(reports, key=lambda r: (r.satisfied, r.slack / max(1.0, abs(r.rhs))))


def _kappa_profile(c, k):
    return ds_powers(c, c.curvature, k)[k] * np.sqrt(c.speed)


def path_checks(traj, m):
    """Bound checks along a stored path; one report per check at its tightest state.

    Hard checks: sqrt-speed Lipschitz bound, sqrt-length bound, inverse
    sqrt-length bound, log-speed sup bound and the speed envelope.  Monitors
    (``hard=False``): curvature-derivative ratios, the ``H^n(dtheta)`` norm of
    ``c`` and the ratio of ``H^n`` norms in the two measures.
    """
    states = traj.states
    if not states:
        return []
    c0 = states[0].curve
    n = m.order
    try:
        A = embedding_constant(m)
    except SingularOperator:
        A = None
    L = path_length(traj, m)
    us = _velocities(traj, m)
    sq0 = np.sqrt(c0.speed)
    groups = {}

    def add(r):
        groups.setdefault(r.name, []).append(r)

    for s, u, Len in zip(states, us, L):
        c, t = s.curve, s.time
        if A is not None:
            sa = np.sqrt(A)
            add(BoundReport.make("sqrt_speed_L2",
                                 np.sqrt(integrate_dtheta((np.sqrt(c.speed) - sq0) ** 2)),
                                 sa / 2 * Len, time=t))
            add(BoundReport.make("sqrt_length", abs(np.sqrt(c.length) - np.sqrt(c0.length)),
                                 sa / 2 * Len, time=t))
            if n >= 2:
                k = ball_constants(BallContext(c0.length, Len, A, n))
                add(BoundReport.make("inv_sqrt_length",
                                     abs(c.length**-0.5 - c0.length**-0.5),
                                     k["C_inv_sqrt_len"] * Len, time=t))
                add(BoundReport.make("log_speed_sup",
                                     np.max(np.abs(np.log(c.speed) - np.log(c0.speed))),
                                     k["C_log_speed"] * Len, time=t))
                ratio = c.speed / c0.speed
                add(BoundReport.make("speed_envelope", np.max(np.maximum(ratio, 1 / ratio)),
                                     k["speed_growth_factor"], time=t))
        # monitors
        for j in range(max(n - 1, 0)):
            diff = _kappa_profile(c, j) - _kappa_profile(c0, j)
            val = np.sqrt(integrate_dtheta(diff**2)) / Len if Len > 0 else 0.0
            add(BoundReport.make(f"kappa_ds{j}_ratio", val, np.inf, hard=False, time=t))
        add(BoundReport.make("c_Hn_dtheta", hk_norm(c, c.points, n, "dtheta"), np.inf,
                             hard=False, time=t))
        den = hk_norm(c, u, n, "dtheta")
        add(BoundReport.make("u_Hn_ds_over_dtheta", hk_norm(c, u, n, "ds") / den if den > 0 else 0.0,
                             np.inf, hard=False, time=t))
    out = []
    for rs in groups.values():
        if rs[0].hard:
            out.append(_worst(rs))
        else:
            out.append(max(rs, key=lambda r: r.lhs))
    return out


def blowup_length(m, r0, r1):
    """Length of the concentric-circle path from radius ``r0`` to ``r1`` (may be inf).

    ``sqrt(2 pi) int sqrt(sum_j a_j s^{1-2j}) ds``.  Returns ``inf`` when the
    integral to infinity diverges (any of ``a_0, a_1`` nonzero).
    """
    a = m.a
    if r0 <= 0 or r1 <= 0:
        raise ValueError("radii must be positive")
    if r1 < r0:
        return blowup_length(m, r1, r0)
    if r1 == r0:
        return 0.0
    f = lambda s: np.sqrt(sum(aj * s ** (1 - 2 * j) for j, aj in enumerate(a)))
    kw = dict(epsabs=1e-12, epsrel=1e-12, limit=200)
    if np.isinf(r1):
        nz = [j for j, aj in enumerate(a) if aj > 0]
        if min(nz) < 2:
            return np.inf
        if len(nz) == 1:
            j = nz[0]
            return float(np.sqrt(2 * np.pi * a[j]) * r0 ** (1.5 - j) / (j - 1.5))
        # s = r0 / w^2 turns the tail into a smooth integral over (0, 1]
        g = lambda w: f(r0 / w**2) * 2 * r0 / w**3 if w > 0 else 0.0
        val, _ = quad(g, 0.0, 1.0, **kw)
        return float(np.sqrt(2 * np.pi) * val)
    val, _ = quad(f, r0, r1, **kw)
    return float(np.sqrt(2 * np.pi) * val)
