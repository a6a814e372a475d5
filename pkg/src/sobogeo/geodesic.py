"""Geodesic equation in Hamiltonian form and its time integration.

State is ``(c, p)`` with ``p = Lbar_c c_t`` a density in dtheta::

    c_t = Lbar_c^{-1} p
    p_t = 1/2 H_c(c_t, c_t)

where ``<H_c(h, h), m> = D_{c,m} G_c(h, h)``.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp

from .curve import Curve, check_field, ds, ds_powers, dtheta, dot
from .errors import (BlowUpDetected, EnergyDriftExceeded, ImmersionViolation,
                     StepUnstable)
from .metric import apply_L, apply_Lbar, invert_Lbar, metric_eval, pair


def _ds_adjoint(c, f):
    # transpose of D_s in the dtheta pairing: -d/dtheta (f / |c'|)
    return -dtheta(f / c.speed[:, None])


def _dealias(f):
    n = f.shape[0]
    F = np.fft.rfft(f, axis=0)
    F[n // 3 + 1:] = 0.0
    return np.fft.irfft(F, n=n, axis=0)


def _cross_terms(d, m):
    # sum_k sum_{j=1}^{2k-1} (-1)^{k+j} a_k <D_s^{2k-j} h, D_s^j h>
    w = np.zeros(d[0].shape[0])
    for k in range(1, m.order + 1):
        ak = m.a[k]
        if not ak:
            continue
        for j in range(1, 2 * k):
            w += (-1) ** (k + j) * ak * dot(d[2 * k - j], d[j])
    return w


def h_quadratic(c, h, m, form="weak", dealias=False):
    """Density ``H_c(h, h)`` with respect to dtheta.

    ``weak`` is the divergence form (exact gradient of the discrete metric,
    integrates to zero); ``strong`` is the expanded form obtained by the
    product rule.
    """
    h = check_field(c, h)
    d = ds_powers(c, h, max(2 * m.order - 1, 1))
    w = _cross_terms(d, m)
    hh = dot(h, h)
    if form == "weak":
        f = (c.speed * (m.a[0] * hh - w))[:, None] * c.tangent
        if dealias:
            f = _dealias(f)
        return _ds_adjoint(c, f)
    if form == "strong":
        Lh = apply_L(c, h, m)
        g = -2 * dot(Lh, d[1])[:, None] * c.tangent \
            + ((w - m.a[0] * hh) * c.curvature)[:, None] * c.normal
        return g * c.speed[:, None]
    raise ValueError(f"unknown form {form!r}")


def metric_derivative_check(c, h, m_dir, m, eps=1e-5, form="weak"):
    """Mismatch between ``<H_c(h,h), m_dir>`` and a central difference of G.

    Normalised by the largest of both sides and ``G_c(h,h) |m_dir|_inf / (l/2pi)``,
    so that symmetric configurations where both sides vanish give a small
    residual instead of a ratio of rounding errors.
    """
    h = check_field(c, h)
    m_dir = check_field(c, m_dir)
    lhs = pair(h_quadratic(c, h, m, form), m_dir)
    gp = metric_eval(Curve(c.points + eps * m_dir), h, h, m)
    gm = metric_eval(Curve(c.points - eps * m_dir), h, h, m)
    fd = (gp - gm) / (2 * eps)
    # natural size of the derivative: G times the relative size of the perturbation
    typical = metric_eval(c, h, h, m) * np.max(np.abs(m_dir)) * 2 * np.pi / c.length
    scale = max(abs(lhs), abs(fd), typical, 1e-300)
    return abs(lhs - fd) / scale


@dataclass(frozen=True)
class GeodesicState:
    curve: Curve
    momentum: np.ndarray
    time: float = 0.0


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    t_final: float = 1.0
    integrator: str = "rk4"
    energy_tol: float = 1e-4
    record_every: int = 10
    blowup_factor: float = 1e4
    method: str = "factorization"
    form: str = "weak"
    dealias: bool = False

    def __post_init__(self):
        if not (self.dt > 0 and self.t_final > 0 and self.dt <= self.t_final):
            raise ValueError("need 0 < dt <= t_final")
        if not self.energy_tol > 0:
            raise ValueError("energy_tol must be > 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.integrator not in ("rk4", "rk4-velocity"):
            raise ValueError(f"unknown integrator {self.integrator!r}")


@dataclass
class Trajectory:
    states: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    max_drift: float = 0.0
    steps: int = 0

    @property
    def times(self):
        return np.array([s.time for s in self.states])

    @property
    def energies(self):
        return np.array([d["energy"] for d in self.diagnostics])

    @property
    def curves(self):
        return [s.curve for s in self.states]


def diagnostics(c, u, m, t):
    kn = []
    if m.order >= 2:
        ks = ds_powers(c, c.curvature, m.order - 2)
        kn = [float(np.sqrt(np.sum(k**2 * c.speed) * 2 * np.pi / c.n)) for k in ks]
    return {
        "t": float(t),
        "energy": float(metric_eval(c, u, u, m)),
        "length": c.length,
        "min_speed": float(c.speed.min()),
        "max_speed": float(c.speed.max()),
        "kappa_norms": kn,
    }


def rhs(state, m, method="factorization", form="weak", dealias=False):
    c = state.curve
    u = invert_Lbar(c, state.momentum, m, method=method)
    return u, 0.5 * h_quadratic(c, u, m, form, dealias)


def _velocity_accel(c, u, m, method, form, dealias, eps=1e-6):
    # u_t = Lbar^{-1}(H/2 - (D_{c,u} Lbar) u), derivative of Lbar by central differences
    scale = eps * c.length / max(np.sqrt(np.mean(np.sum(u**2, 1))), 1e-300)
    cp = Curve(c.points + scale * u, c.immersion_floor)
    cm = Curve(c.points - scale * u, c.immersion_floor)
    dL = (apply_Lbar(cp, u, m) - apply_Lbar(cm, u, m)) / (2 * scale)
    rhs_ = 0.5 * h_quadratic(c, u, m, form, dealias) - dL
    return invert_Lbar(c, rhs_, m, method=method)


def shoot(c0, u0, m, cfg=None):
    """Integrate the geodesic with initial point ``c0`` and velocity ``u0``.

    Classical RK4 on ``(c, p)`` (or on ``(c, u)`` for the ``rk4-velocity``
    cross-check).  Diagnostics are recorded every ``record_every`` steps and
    at the final time.  Raises ``ImmersionViolation``, ``EnergyDriftExceeded``,
    ``StepUnstable`` or ``BlowUpDetected``; each carries the trajectory up to
    the last good state.
    """
    cfg = cfg or SolverConfig()
    u0 = check_field(c0, u0)
    floor = c0.immersion_floor
    nsteps = int(np.ceil(cfg.t_final / cfg.dt - 1e-9))
    dt = cfg.t_final / nsteps
    velocity_form = cfg.integrator == "rk4-velocity"
    kw = dict(method=cfg.method, form=cfg.form, dealias=cfg.dealias)

    def F(x, y):
        c = Curve(x, floor)
        if velocity_form:
            return y, _velocity_accel(c, y, m, **kw)
        return rhs(GeodesicState(c, y), m, **kw)

    x = np.array(c0.points)
    y = u0.copy() if velocity_form else apply_Lbar(c0, u0, m)
    traj = Trajectory()
    e0 = None
    t = 0.0
    prev = None
    for step in range(nsteps + 1):
        try:
            c = Curve(x, floor)
        except ImmersionViolation as exc:
            raise ImmersionViolation(f"t={t:.6g}: {exc}", time=t, min_speed=exc.min_speed,
                                     index=exc.index, trajectory=traj) from None
        if prev is not None:
            # a tangent turning by more than 90 degrees within one step means
            # |c'| passed through zero between the two samples in time
            turn = np.einsum("ij,ij->i", c.tangent, prev.tangent)
            if turn.min() < 0:
                i = int(np.argmin(turn))
                raise ImmersionViolation(f"tangent reversed at sample {i} during the step "
                                         f"ending at t={t:.6g}", time=t, index=i,
                                         trajectory=traj)
        prev = c
        k1 = F(x, y)
        u = k1[0]
        diag = diagnostics(c, u, m, t)
        if not np.isfinite(diag["energy"]):
            raise StepUnstable(f"non-finite energy at t={t:.6g}", time=t, trajectory=traj)
        if e0 is None:
            e0 = diag["energy"]
            l0 = c.length
        drift = abs(diag["energy"] - e0) / e0 if e0 > 0 else 0.0
        traj.max_drift = max(traj.max_drift, drift)
        if step % cfg.record_every == 0 or step == nsteps:
            p = y if not velocity_form else apply_Lbar(c, u, m)
            traj.states.append(GeodesicState(c, p, t))
            traj.diagnostics.append(diag)
        if c.length > cfg.blowup_factor * l0:
            raise BlowUpDetected(f"length grew by more than {cfg.blowup_factor:g} at t={t:.6g}",
                                 time=t, trajectory=traj)
        if drift > cfg.energy_tol:
            raise EnergyDriftExceeded(f"relative energy drift {drift:.3e} at t={t:.6g}",
                                      time=t, trajectory=traj)
        if step == nsteps:
            break
        try:
            k2 = F(x + 0.5 * dt * k1[0], y + 0.5 * dt * k1[1])
            k3 = F(x + 0.5 * dt * k2[0], y + 0.5 * dt * k2[1])
            k4 = F(x + dt * k3[0], y + dt * k3[1])
        except ImmersionViolation as exc:
            raise ImmersionViolation(f"inside step from t={t:.6g}: {exc}", time=t,
                                     min_speed=exc.min_speed, trajectory=traj) from None
        except (FloatingPointError, ValueError) as exc:
            raise StepUnstable(f"step from t={t:.6g} failed: {exc}", time=t,
                               trajectory=traj) from None
        x = x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y = y + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t = (step + 1) * dt
        traj.steps = step + 1
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise StepUnstable(f"non-finite state at t={t:.6g}", time=t, trajectory=traj)
    return traj


def energy_drift(traj):
    e = traj.energies
    if len(e) < 2 or e[0] == 0:
        return 0.0
    return float(np.max(np.abs(e - e[0])) / e[0])


# -- reduced model: concentric constant-speed circles -------------------------

def circle_metric(m, r):
    """``g(r)`` with ``G_c(c_t, c_t) = g(r) r_t^2`` on the circle of radius ``r``."""
    return 2 * np.pi * sum(aj * r ** (1 - 2 * j) for j, aj in enumerate(m.a))


@dataclass(frozen=True)
class CircleOracle:
    times: np.ndarray
    radii: np.ndarray
    exit_time: float | None
    exit_kind: str | None
    energy: float

    def radius(self, t):
        return np.interp(t, self.times, self.radii)


def exit_is_finite(m, outward):
    """Whether the reduced geodesic leaves ``(0, inf)`` in finite time.

    Near infinity ``g`` behaves like the lowest nonzero ``a_j r^{1-2j}``, near
    zero like the highest; ``int sqrt(g)`` converges iff ``j >= 2`` resp. ``j <= 1``.
    """
    nz = [j for j, aj in enumerate(m.a) if aj > 0]
    return min(nz) >= 2 if outward else max(nz) <= 1


def _time_to(m, r0, r1, energy):
    # time to travel from r0 to r1 (either may be inf or 0)
    f = lambda s: np.sqrt(circle_metric(m, s) / energy)
    if (np.isinf(r1) or r1 == 0) and not exit_is_finite(m, r1 > r0):
        return np.inf
    if np.isinf(r1):
        # sigma = r0 / w^2 maps (0, 1] onto [r0, inf)
        g = lambda w: f(r0 / w**2) * 2 * r0 / w**3 if w > 0 else 0.0
        val, _ = quad(g, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
        return val
    lo, hi = sorted((r1, r0))
    val, _ = quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def circle_oracle(m, r0, rdot0, T, n_times=201, times=None):
    """Radius of the concentric-circle geodesic ``r(t)`` on ``[0, T]``.

    The reduced energy ``g(r) r_t^2`` is conserved; ``r(t)`` comes from
    integrating ``r_t = +-sqrt(E / g(r))`` with a high-order ODE solver and the
    exit time (escape to infinity or collapse to a point) from quadrature of
    ``sqrt(g / E)``.  Leaving ``(0, inf)`` before ``T`` is reported, not raised.
    """
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    times = np.linspace(0.0, T, n_times) if times is None else np.asarray(times, float)
    energy = circle_metric(m, r0) * rdot0**2
    if rdot0 == 0:
        return CircleOracle(times, np.full(times.shape, float(r0)), None, None, 0.0)
    sign = np.sign(rdot0)
    target = np.inf if sign > 0 else 0.0
    t_exit = _time_to(m, r0, target, energy)
    exit_time = t_exit if np.isfinite(t_exit) else None

    def fun(t, r):
        return sign * np.sqrt(energy / circle_metric(m, max(r[0], 1e-300)))

    inside = times[times < (exit_time if exit_time is not None else np.inf)]
    radii = np.full(times.shape, np.inf if sign > 0 else 0.0)
    if inside.size:
        sol = solve_ivp(fun, (0.0, max(inside[-1], 1e-300)), [float(r0)], method="DOP853",
                        t_eval=inside, rtol=1e-12, atol=1e-14 * r0)
        radii[: sol.y.shape[1]] = sol.y[0]
    kind = None
    if exit_time is not None and exit_time <= T:
        kind = "blowup" if sign > 0 else "collapse"
    return CircleOracle(times, radii, exit_time, kind, energy)


def circle_path_length(m, r0, r1):
    """Length of the circle path from ``r0`` to ``r1`` obtained from the oracle ODE.

    Integrates ``r_t = sqrt(E / g)`` with unit energy until ``r = r1``; with
    unit energy elapsed time equals length.
    """
    if r1 == r0:
        return 0.0
    sign = 1.0 if r1 > r0 else -1.0
    fun = lambda t, r: [sign / np.sqrt(circle_metric(m, max(r[0], 1e-300)))]
    hit = lambda t, r: r[0] - r1
    hit.terminal = True
    sol = solve_ivp(fun, (0.0, 1e6), [float(r0)], method="DOP853", events=hit,
                    rtol=1e-12, atol=1e-14 * min(r0, r1))
    return float(sol.t_events[0][0])
