"""Constant-coefficient Sobolev metrics and their inertia operators.

``G_c(h, k) = sum_j a_j int <D_s^j h, D_s^j k> ds``.

Momenta are stored as densities with respect to ``dtheta``: ``p = |c'| L_c u``,
so the duality pairing ``<p, k>`` is the plain trapezoid sum over the grid.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .curve import (check_field, ds_powers, dtheta, fourier_interp, grid, integrate_dtheta,
                    integrate_ds, reparametrization, wavenumbers)
from .errors import NoConvergence, OrderTooHigh, SingularOperator


@dataclass(frozen=True)
class MetricCoeffs:
    """Coefficients ``(a_0, ..., a_n)`` with ``a_j >= 0`` and ``a_n > 0``.

    ``quotient_translations`` makes the inverse work on curves modulo
    translations, which is required when ``a_0 == 0``.
    """
    a: tuple
    quotient_translations: bool = False

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        if not a:
            raise ValueError("need at least one coefficient")
        if any(not np.isfinite(x) or x < 0 for x in a):
            raise ValueError(f"coefficients must be finite and >= 0: {a}")
        if a[-1] <= 0:
            raise ValueError("leading coefficient a_n must be > 0")
        object.__setattr__(self, "a", a)

    @property
    def order(self):
        return len(self.a) - 1

    @classmethod
    def parse(cls, text, quotient_translations=False):
        return cls(tuple(float(t) for t in text.split(",") if t.strip()),
                   quotient_translations)

    def symbol(self, n, length, discrete=True):
        """Fourier multiplier of the inertia operator on a constant-speed curve.

        With ``discrete=True`` the Nyquist mode uses the zeroed derivative
        symbol (only a_0 survives), matching ``apply_Lbar`` on the grid.
        ``discrete=False`` uses wavenumber n/2 there, which damps rounding
        noise that lands in that mode.
        """
        k = wavenumbers(n)
        if not discrete:
            k[-1] = n // 2
        q = 2 * np.pi / length
        return sum(aj * q ** (2 * j - 1) * k ** (2 * j) for j, aj in enumerate(self.a))


def _check_order(c, m, factor=2):
    if factor * m.order > c.n // 4:
        raise OrderTooHigh(f"metric of order {m.order} needs more than {c.n} samples")


def _inner_ds(c, f, g):
    if f.ndim == 1:
        return integrate_ds(c, f * g)
    return integrate_ds(c, np.einsum("ij,ij->i", f, g))


def metric_eval(c, h, k, m):
    h = check_field(c, h)
    k = check_field(c, k)
    _check_order(c, m, 1)
    dh = ds_powers(c, h, m.order)
    dk = dh if k is h else ds_powers(c, k, m.order)
    return sum(aj * _inner_ds(c, dh[j], dk[j]) for j, aj in enumerate(m.a) if aj)


def apply_L(c, h, m):
    """``L_c h = sum_j (-1)^j a_j D_s^{2j} h``."""
    h = check_field(c, h)
    _check_order(c, m)
    d = ds_powers(c, h, 2 * m.order)
    out = np.zeros_like(h)
    for j, aj in enumerate(m.a):
        if aj:
            out += (-1) ** j * aj * d[2 * j]
    return out


def apply_Lbar(c, h, m):
    """Momentum density ``|c'| L_c h`` (pairs with fields through dtheta)."""
    Lh = apply_L(c, h, m)
    return Lh * (c.speed if Lh.ndim == 1 else c.speed[:, None])


def pair(p, h):
    """Duality pairing of a density with a field: trapezoid sum in dtheta."""
    p = np.asarray(p, dtype=float)
    return integrate_dtheta(p * h if p.ndim == 1 else np.einsum("ij,ij->i", p, h))


def _kernel_modes(n):
    ones = np.ones(n) / np.sqrt(n)
    alt = (-1.0) ** np.arange(n) / np.sqrt(n)
    return ones, alt


def _project(f):
    # remove constants and the Nyquist mode; both span the kernel when a_0 = 0
    n = f.shape[0]
    out = f.copy()
    for e in _kernel_modes(n):
        out -= np.outer(e, e @ f.reshape(n, -1)).reshape(f.shape)
    return out


def _solve_symbol(g, sym, quotient):
    G = np.fft.rfft(g, axis=0)
    shape = (-1,) + (1,) * (g.ndim - 1)
    s = sym.reshape(shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        U = np.where(s > 0, G / s, 0.0)
    if quotient:
        U[0] = 0.0
        U[-1] = 0.0
    return np.fft.irfft(U, n=g.shape[0], axis=0)


def invert_Lbar(c, p, m, method="factorization", tol=1e-12, maxiter=None):
    """Velocity ``u`` with ``apply_Lbar(c, u) = p``.

    ``factorization`` writes ``c = d o psi`` with ``d`` of constant speed, for
    which the operator is a Fourier multiplier, and transports the density
    back and forth: ``u = [Lbar_d^{-1}((p / psi') o psi^{-1})] o psi``.
    The constant-speed problem is solved on a grid refined by a power of two
    covering ``max(1 / psi')``, since the transport compresses slow stretches.
    ``cg`` runs preconditioned conjugate gradients on the grid operator.
    """
    p = check_field(c, p)
    _check_order(c, m)
    quotient = m.quotient_translations
    if m.a[0] <= 0 and not quotient:
        raise SingularOperator("a_0 = 0: constants are in the kernel; "
                               "enable quotient_translations")
    if quotient:
        p = _project(p)
    if method == "factorization":
        u = _invert_factorization(c, p, m, quotient)
    elif method == "cg":
        u = _invert_cg(c, p, m, quotient, tol, maxiter)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _project(u) if quotient else u


def _oversampling(speed):
    # where psi' < 1 the transport raises local frequencies by 1 / psi'
    ratio = float(np.mean(speed) / np.min(speed))
    return int(min(2 ** np.ceil(np.log2(max(ratio, 1.0))), 16))


def _invert_factorization(c, p, m, quotient):
    rp = reparametrization(c)
    M = c.n * _oversampling(c.speed)
    x = kernels.monotone_inverse(rp.psi_coeffs, c.n, grid(M)) if M > c.n else rp.psi_inv
    mean = rp.length / (2 * np.pi)
    pv = fourier_interp(p, x)
    dpsi = fourier_interp(c.speed, x) / mean
    g = pv / (dpsi if pv.ndim == 1 else dpsi[:, None])
    ud = _solve_symbol(g, m.symbol(M, rp.length, discrete=False), quotient)
    return fourier_interp(ud, rp.psi)


def _invert_cg(c, p, m, quotient, tol, maxiter):
    n = c.n
    sym = m.symbol(n, c.length)
    maxiter = 10 * n if maxiter is None else maxiter
    shape = p.shape

    def A(x):
        r = apply_Lbar(c, x.reshape(shape), m)
        return (_project(r) if quotient else r).ravel()

    def M(r):
        return _solve_symbol(r.reshape(shape), sym, quotient).ravel()

    b = p.ravel()
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros(shape)
    x = M(b)
    r = b - A(x)
    z = M(r)
    d = z.copy()
    rz = r @ z
    best = (np.linalg.norm(r), x.copy())
    for _ in range(maxiter):
        rn = np.linalg.norm(r)
        if rn < best[0]:
            best = (rn, x.copy())
        if rn <= tol * bnorm:
            return x.reshape(shape)
        Ad = A(d)
        alpha = rz / (d @ Ad)
        x += alpha * d
        r -= alpha * Ad
        z = M(r)
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise NoConvergence(f"cg: relative residual {best[0] / bnorm:.2e} after {maxiter} iterations")


def hk_norm(c, h, k, measure="ds"):
    """``sqrt(||h||^2 + ||d^k h||^2)`` in ``L^2(ds)`` with ``D_s`` or ``L^2(dtheta)`` with ``d_theta``."""
    h = check_field(c, h)
    if k < 0 or k > c.n // 4:
        raise OrderTooHigh(f"order {k} outside 0..{c.n // 4}")
    if measure == "ds":
        dk = ds_powers(c, h, k)[k]
        return float(np.sqrt(_inner_ds(c, h, h) + _inner_ds(c, dk, dk)))
    if measure == "dtheta":
        dk = dtheta(h, k)
        return float(np.sqrt(integrate_dtheta(h**2 if h.ndim == 1 else np.sum(h**2, 1))
                             + integrate_dtheta(dk**2 if dk.ndim == 1 else np.sum(dk**2, 1))))
    raise ValueError(f"unknown measure {measure!r}")


def embedding_constant(m):
    """``A = max(1/a_0, 1/a_n)``: ``||h||^2 + ||D_s^n h||^2 <= A G_c(h, h)`` in ``L^2(ds)``."""
    if m.a[0] <= 0:
        raise SingularOperator("embedding constant needs a_0 > 0")
    return max(1.0 / m.a[0], 1.0 / m.a[-1])
