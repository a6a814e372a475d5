"""Spectral representation of closed plane curves and their differential geometry.

A curve is stored as ``n`` samples ``c(theta_i)`` with ``theta_i = 2*pi*i/n``.
Derivatives in theta are exact on the trigonometric interpolant; the
derivative of the Nyquist mode is set to zero.  Fields along a curve are plain
numpy arrays of shape ``(n,)`` (scalar) or ``(n, 2)`` (vector).
"""
from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels
from .errors import BadShape, ImmersionViolation, OrderTooHigh, ShapeMismatch

MIN_SAMPLES = 16
FLOOR_FACTOR = 1e-8


def grid(n):
    return 2 * np.pi * np.arange(n) / n


def _check_n(n):
    if n < MIN_SAMPLES or n % 2:
        raise BadShape(f"need an even sample count >= {MIN_SAMPLES}, got {n}")


def wavenumbers(n):
    """Derivative symbol for ``rfft`` coefficients (Nyquist entry zeroed)."""
    k = np.arange(n // 2 + 1, dtype=float)
    k[-1] = 0.0
    return k


def dtheta(f, order=1):
    """``order``-th theta derivative of a periodic sample array (axis 0)."""
    f = np.asarray(f, dtype=float)
    if order == 0:
        return f.copy()
    n = f.shape[0]
    sym = (1j * wavenumbers(n)) ** order
    F = np.fft.rfft(f, axis=0)
    if f.ndim > 1:
        sym = sym.reshape((-1,) + (1,) * (f.ndim - 1))
    return np.fft.irfft(F * sym, n=n, axis=0)


def antiderivative_coeffs(f):
    """rfft coefficients of the zero-at-origin periodic antiderivative of ``f - mean(f)``.

    The Nyquist mode is integrated with the symmetric convention
    (cos -> sin / (n/2)), so differentiating the interpolant gives back the
    interpolant of ``f`` minus its mean.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    F = np.fft.rfft(f)
    k = np.arange(n // 2 + 1, dtype=float)
    Q = np.zeros_like(F)
    Q[1:] = F[1:] / (1j * k[1:])
    w = np.full(k.shape, 2.0 / n)
    w[-1] = 1.0 / n
    w[0] = 0.0
    # choose the constant so that the antiderivative vanishes at theta = 0
    Q[0] = -n * np.sum(w * Q.real)
    return Q


@dataclass(frozen=True)
class GeometryCache:
    speed: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    curvature: np.ndarray
    length: float
    log_speed: np.ndarray

    @property
    def turning_angle_derivative(self):
        return self.curvature


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


class Curve:
    """Immersed closed plane curve sampled on the uniform theta grid.

    Geometry (speed, unit tangent ``v``, normal ``n = J v`` with ``J`` the
    counterclockwise quarter turn, curvature, length) is computed on
    construction.  Instances are immutable.
    """

    def __init__(self, points, immersion_floor=None):
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise BadShape(f"points must have shape (n, 2), got {pts.shape}")
        _check_n(pts.shape[0])
        if not np.all(np.isfinite(pts)):
            raise BadShape("points contain NaN or Inf")
        self.n = pts.shape[0]
        self.points = _readonly(pts)

        d1 = dtheta(pts)
        d2 = dtheta(d1)
        speed = np.hypot(d1[:, 0], d1[:, 1])
        if immersion_floor is None:
            immersion_floor = FLOOR_FACTOR * float(np.mean(speed))
        self.immersion_floor = float(immersion_floor)
        smin = float(speed.min())
        if not smin > self.immersion_floor:
            raise ImmersionViolation(
                f"min |c'| = {smin:.3e} <= floor {self.immersion_floor:.3e}",
                min_speed=smin, index=int(np.argmin(speed)))

        tangent = d1 / speed[:, None]
        normal = np.stack([-tangent[:, 1], tangent[:, 0]], axis=1)
        curvature = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
        self.geometry = GeometryCache(
            speed=_readonly(speed),
            tangent=_readonly(tangent),
            normal=_readonly(normal),
            curvature=_readonly(curvature),
            length=float(2 * np.pi * np.mean(speed)),
            log_speed=_readonly(np.log(speed)),
        )

    # convenience accessors
    @property
    def speed(self):
        return self.geometry.speed

    @property
    def tangent(self):
        return self.geometry.tangent

    @property
    def normal(self):
        return self.geometry.normal

    @property
    def curvature(self):
        return self.geometry.curvature

    @property
    def length(self):
        return self.geometry.length

    @property
    def theta(self):
        return grid(self.n)

    def __repr__(self):
        return f"Curve(n={self.n}, length={self.length:.6g})"


def build_curve(points, immersion_floor=None):
    return Curve(points, immersion_floor)


def geometry(c):
    return c.geometry


def check_field(c, f):
    f = np.asarray(f, dtype=float)
    if f.shape[0] != c.n or f.ndim > 2 or (f.ndim == 2 and f.shape[1] not in (1, 2)):
        raise ShapeMismatch(f"field of shape {f.shape} does not live on a grid of {c.n}")
    return f


def _scale(f, s):
    return f / s if f.ndim == 1 else f / s[:, None]


def ds(c, f, order=1):
    """Apply the arc-length derivative ``D_s = d/dtheta / |c'|`` ``order`` times."""
    f = check_field(c, f)
    if order < 0 or order > c.n // 4:
        raise OrderTooHigh(f"order {order} outside 0..{c.n // 4}")
    for _ in range(order):
        f = _scale(dtheta(f), c.speed)
    return f if order else f.copy()


def ds_powers(c, f, kmax):
    """List ``[f, D_s f, ..., D_s^kmax f]`` built by iteration."""
    f = check_field(c, f)
    if kmax > c.n // 4:
        raise OrderTooHigh(f"order {kmax} outside 0..{c.n // 4}")
    out = [f]
    for _ in range(kmax):
        out.append(_scale(dtheta(out[-1]), c.speed))
    return out


def integrate_ds(c, f):
    """Trapezoid rule for the arc-length integral of ``f`` (summed over components)."""
    f = check_field(c, f)
    w = c.speed if f.ndim == 1 else c.speed[:, None]
    return float(np.sum(f * w) * 2 * np.pi / c.n)


def integrate_dtheta(f):
    f = np.asarray(f, dtype=float)
    return float(np.sum(f) * 2 * np.pi / f.shape[0])


def dot(a, b):
    """Pointwise Euclidean inner product of two vector fields."""
    return np.einsum("ij,ij->i", a, b)


def fourier_interp(f, query):
    """Evaluate the trigonometric interpolant of ``f`` at arbitrary angles.

    The Nyquist mode contributes ``F_{n/2} cos(n x / 2) / n`` (real-part
    convention), so ``cos(n*theta/2)`` sampled on the grid round-trips to
    itself while ``sin(n*theta/2)`` is invisible.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    cols = f.reshape(n, -1)
    F = np.fft.rfft(cols, axis=0)
    vals = kernels.interp_rfft(F, n, np.asarray(query, dtype=float).ravel())
    return vals.reshape((-1,) + f.shape[1:])


@dataclass(frozen=True)
class Reparametrization:
    """Arc-length factorisation ``c = d o psi`` with ``|d'| = length / 2pi``.

    ``psi`` and ``psi_inv`` are sampled on the grid; ``dpsi`` is ``psi'`` on
    the grid.  ``psi_coeffs`` are rfft coefficients of ``psi(theta) - theta``.
    """
    psi: np.ndarray
    psi_inv: np.ndarray
    dpsi: np.ndarray
    psi_coeffs: np.ndarray
    length: float


def reparametrization(c):
    s = c.speed
    mean = float(np.mean(s))
    dpsi = s / mean
    Q = antiderivative_coeffs(dpsi)
    th = grid(c.n)
    psi = th + np.fft.irfft(Q, n=c.n)
    psi[0] = 0.0
    psi_inv = kernels.monotone_inverse(Q, c.n, th)
    return Reparametrization(psi=psi, psi_inv=psi_inv, dpsi=dpsi, psi_coeffs=Q,
                             length=c.length)


def constant_speed(c):
    """Return ``(d, psi)`` with ``c = d o psi`` and ``d`` of constant speed."""
    rp = reparametrization(c)
    d = Curve(fourier_interp(c.points, rp.psi_inv))
    return d, rp.psi


def resample(f, phi):
    """Compose a grid field with a diffeomorphism given by its grid values."""
    return fourier_interp(f, np.asarray(phi) % (2 * np.pi))


def reparametrize(c, phi):
    return Curve(resample(c.points, phi))


def variation_frenet(c, h):
    """First variations of ``v``, ``n``, ``kappa`` and ``log|c'|`` in direction ``h``."""
    h = check_field(c, h)
    g = c.geometry
    dh = ds(c, h, 1)
    d2h = ds(c, dh, 1)
    dhn = dot(dh, g.normal)
    dhv = dot(dh, g.tangent)
    return {
        "Dv": dhn[:, None] * g.normal,
        "Dn": -dhn[:, None] * g.tangent,
        "Dkappa": dot(d2h, g.normal) - 2 * g.curvature * dhv,
        "DlogSpeed": dhv,
    }


def variation_dsk(c, h, k):
    """Variations of ``D_s^k log|c'|`` and ``D_s^k alpha`` in direction ``h``.

    Evaluates the binomial sums term by term; ``D_s^m alpha`` for ``m >= 1``
    is ``D_s^{m-1} kappa``.
    """
    h = check_field(c, h)
    if k < 0 or k + 1 > c.n // 4:
        raise OrderTooHigh(f"order {k} too high for n={c.n}")
    g = c.geometry
    dh = ds(c, h, 1)
    wv = ds_powers(c, dot(dh, g.tangent), k)
    wn = ds(c, dot(dh, g.normal), k)
    logs = ds_powers(c, g.log_speed, k)
    kap = ds_powers(c, g.curvature, max(k - 1, 0))
    dlog = wv[k].copy()
    dalpha = wn.copy()
    for j in range(k):
        b = comb(k, j + 1)
        dlog -= b * logs[k - j] * wv[j]
        dalpha -= b * kap[k - j - 1] * wv[j]
    return {"DlogSpeed_k": dlog, "DAlpha_k": dalpha}
