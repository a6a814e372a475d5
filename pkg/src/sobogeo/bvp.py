"""Geodesic distance estimates by discrete path-energy minimization."""
from dataclasses import dataclass, field

import numpy as np

from .curve import Curve, dtheta, integrate_dtheta
from .errors import ImmersionViolation, ShapeMismatch, StallWarning
from .geodesic import h_quadratic
from .metric import apply_Lbar, embedding_constant, invert_Lbar, metric_eval, pair


class DiscretePath:
    """Curves ``c_0, ..., c_T`` at uniform times ``i / T`` on a shared grid."""

    def __init__(self, points, immersion_floor=None):
        x = np.array(points, dtype=float)
        if x.ndim != 3 or x.shape[0] < 2 or x.shape[2] != 2:
            raise ShapeMismatch(f"path points must have shape (T+1, n, 2), got {x.shape}")
        if immersion_floor is None:
            immersion_floor = Curve(x[0]).immersion_floor
        self.immersion_floor = immersion_floor
        self.points = x
        self.points.setflags(write=False)
        self.curves = []
        for i, p in enumerate(x):
            try:
                self.curves.append(Curve(p, immersion_floor))
            except ImmersionViolation as exc:
                raise ImmersionViolation(f"path curve {i} (t={i / (len(x) - 1):.4g}): {exc}",
                                         time=i / (len(x) - 1), min_speed=exc.min_speed,
                                         index=i) from None

    @property
    def steps(self):
        return self.points.shape[0] - 1

    @property
    def times(self):
        return np.linspace(0.0, 1.0, self.steps + 1)

    def __len__(self):
        return self.points.shape[0]


def _segments(path):
    x = path.points
    dt = 1.0 / path.steps
    out = []
    for i in range(path.steps):
        t = (i + 0.5) * dt
        try:
            mid = Curve(0.5 * (x[i] + x[i + 1]), path.immersion_floor)
        except ImmersionViolation as exc:
            raise ImmersionViolation(f"segment midpoint {i} (t={t:.4g}): {exc}", time=t,
                                     min_speed=exc.min_speed, index=i) from None
        out.append((mid, (x[i + 1] - x[i]) / dt))
    return out, dt


def path_energy_and_length(path, m):
    """``E = sum G_mid(w, w) dt`` and ``Len = sum sqrt(G_mid(w, w)) dt`` with midpoint curves."""
    segs, dt = _segments(path)
    g = np.array([metric_eval(c, w, w, m) for c, w in segs])
    return float(np.sum(g) * dt), float(np.sum(np.sqrt(np.maximum(g, 0))) * dt)


def path_energy(path, m):
    return path_energy_and_length(path, m)[0]


def _energy_grad(path, m):
    segs, dt = _segments(path)
    E = 0.0
    Hs, Ps = [], []
    for c, w in segs:
        E += metric_eval(c, w, w, m) * dt
        Hs.append(h_quadratic(c, w, m))
        Ps.append(apply_Lbar(c, w, m))
    grad = np.zeros_like(path.points)
    for i in range(1, path.steps):
        grad[i] = 0.5 * dt * (Hs[i - 1] + Hs[i]) + 2 * (Ps[i - 1] - Ps[i])
    return E, grad


def linear_path(c0, c1, steps):
    """Pointwise linear interpolation, checked for immersion at every intermediate time.

    The derivative ``(1-t) c0' + t c1'`` is closest to zero where the segment
    between ``c0'`` and ``c1'`` passes nearest the origin, which is computed
    exactly per sample.
    """
    if c0.n != c1.n:
        raise ShapeMismatch("endpoints live on different grids")
    if steps < 1:
        raise ValueError("need at least one step")
    a, b = dtheta(c0.points), dtheta(c1.points)
    d = b - a
    dd = np.sum(d * d, 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(dd > 0, np.clip(-np.sum(a * d, 1) / dd, 0, 1), 0.0)
    dist = np.hypot(*(a + t[:, None] * d).T)
    i = int(np.argmin(dist))
    floor = c0.immersion_floor
    if dist[i] <= floor:
        raise ImmersionViolation(
            f"linear path degenerates at t={t[i]:.4g} (sample {i}, |c'| = {dist[i]:.3e})",
            time=float(t[i]), min_speed=float(dist[i]), index=i)
    s = np.linspace(0.0, 1.0, steps + 1)[:, None, None]
    return DiscretePath((1 - s) * c0.points + s * c1.points, floor)


@dataclass
class MinimizeResult:
    path: DiscretePath
    energy: float
    length: float
    iterations: int
    history: list = field(default_factory=list)
    warning: StallWarning | None = None


def minimize_path(path, m, iters=200, step_size=None, preconditioned=False,
                  rtol=1e-12, stall=50):
    """Gradient descent on the discrete path energy with fixed endpoints.

    The plain gradient is the ``L^2(dtheta)`` density; ``preconditioned``
    maps it through ``Lbar^{-1}`` of each curve.  Backtracking (Armijo) keeps
    the accepted energies non-increasing.  A ``StallWarning`` is returned in
    the result when no decrease happens for ``stall`` consecutive iterations.
    """
    E, grad = _energy_grad(path, m)
    history = [E]
    best = path
    alpha = step_size if step_size is not None else (0.5 if preconditioned else 1e-2)
    fails = 0
    it = 0
    warning = None
    for it in range(1, iters + 1):
        if preconditioned:
            d = np.zeros_like(grad)
            for i in range(1, best.steps):
                d[i] = invert_Lbar(best.curves[i], grad[i], m)
        else:
            d = grad
        slope = sum(pair(grad[i], d[i]) for i in range(1, best.steps))
        if not slope > 0:
            break
        accepted = False
        for _ in range(30):
            try:
                trial = DiscretePath(best.points - alpha * d, best.immersion_floor)
                Et, gt = _energy_grad(trial, m)
            except ImmersionViolation:
                alpha *= 0.5
                continue
            if Et <= E - 1e-4 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted or Et >= E:
            fails += 1
            if fails >= stall:
                warning = StallWarning(f"no energy decrease in {stall} iterations")
                break
            continue
        fails = 0
        decrease = E - Et
        best, E, grad = trial, Et, gt
        history.append(E)
        alpha *= 2.0
        if decrease <= rtol * max(E, 1e-300):
            break
    _, length = path_energy_and_length(best, m)
    return MinimizeResult(best, E, length, it if iters else 0, history, warning)


def lower_bound(c0, c1, m):
    """``(2 / sqrt(A)) max(||sqrt|c0'| - sqrt|c1'|||_{L^2(dtheta)}, |sqrt(l0) - sqrt(l1)|)``."""
    A = embedding_constant(m)
    a = np.sqrt(integrate_dtheta((np.sqrt(c0.speed) - np.sqrt(c1.speed)) ** 2))
    b = abs(np.sqrt(c0.length) - np.sqrt(c1.length))
    return 2 / np.sqrt(A) * max(a, b)


def distance_bracket(c0, c1, m, steps=8, iters=100, preconditioned=True):
    """Lower and upper bounds on the geodesic distance between ``c0`` and ``c1``."""
    lower = float(lower_bound(c0, c1, m))
    path = linear_path(c0, c1, steps)
    E_lin, len_lin = path_energy_and_length(path, m)
    res = minimize_path(path, m, iters=iters, preconditioned=preconditioned) if iters else None
    upper = len_lin if res is None else min(len_lin, res.length)
    return {
        "lower": lower,
        "upper": float(upper),
        "linear_length": len_lin,
        "iterations": 0 if res is None else res.iterations,
        "final_energy": E_lin if res is None else res.energy,
        "stalled": bool(res is not None and res.warning is not None),
        "path": path if res is None else res.path,
    }
