"""Pure numpy implementation of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable or when
``SOBOGEO_PURE_PYTHON=1`` is set.  Both implementations share the
conventions documented in :mod:`sobogeo.kernels`.
"""
import numpy as np


def _weights(n):
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w / n


def interp_rfft(coeffs, n, x):
    """Evaluate real trigonometric interpolants given by rfft coefficients.

    coeffs : complex (n//2 + 1, d)
    x      : float (m,)
    returns float (m, d)
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    x = np.asarray(x, dtype=float)
    k = np.arange(n // 2 + 1)
    basis = np.exp(1j * np.outer(x, k))
    return (basis @ (coeffs * _weights(n)[:, None])).real


def _eval_periodic(coeffs, n, x):
    # value and derivative of Re sum w_k Q_k e^{ikx}
    k = np.arange(n // 2 + 1)
    wq = coeffs * _weights(n)
    basis = np.exp(1j * np.outer(x, k))
    val = (basis @ wq).real
    der = (basis @ (1j * k * wq)).real
    return val, der


def monotone_inverse(coeffs, n, targets, tol=1e-13, maxiter=100):
    """Solve x + P(x) = y for every target y in [0, 2*pi].

    P is the periodic trigonometric polynomial with rfft coefficients
    ``coeffs`` (shape (n//2 + 1,)) and P(0) = 0; x + P(x) must be strictly
    increasing.  Safeguarded Newton inside a bracket taken from the grid.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    y = np.asarray(targets, dtype=float)
    grid = 2 * np.pi * np.arange(n + 1) / n
    pv, _ = _eval_periodic(coeffs, n, grid)
    gvals = grid + pv
    gvals[0] = 0.0
    gvals[-1] = 2 * np.pi
    idx = np.clip(np.searchsorted(gvals, y, side="right") - 1, 0, n - 1)
    lo = grid[idx].copy()
    hi = grid[idx + 1].copy()
    flo = gvals[idx] - y
    fhi = gvals[idx + 1] - y
    denom = np.where(fhi - flo > 0, fhi - flo, 1.0)
    x = lo - flo * (hi - lo) / denom
    active = np.ones(y.shape, dtype=bool)
    for _ in range(maxiter):
        if not active.any():
            break
        xa = x[active]
        val, der = _eval_periodic(coeffs, n, xa)
        f = xa + val - y[active]
        d = 1.0 + der
        done = np.abs(f) <= tol
        lo_a, hi_a = lo[active], hi[active]
        lo_a = np.where(f < 0, xa, lo_a)
        hi_a = np.where(f > 0, xa, hi_a)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - f / d
        bad = ~np.isfinite(xn) | (xn <= lo_a) | (xn >= hi_a)
        xn = np.where(bad, 0.5 * (lo_a + hi_a), xn)
        done |= (hi_a - lo_a) <= 4e-16 * max(1.0, float(np.max(np.abs(xa), initial=1.0)))
        xn = np.where(done, xa, xn)
        lo[active], hi[active] = lo_a, hi_a
        x[active] = xn
        ids = np.flatnonzero(active)
        active[ids[done]] = False
    return x
