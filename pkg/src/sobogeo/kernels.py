"""Backend selection for the hot kernels.

Two kernels dominate the cost of inverting the inertia operator:

``interp_rfft(coeffs, n, x)``
    Evaluate the real trigonometric interpolant whose ``numpy.fft.rfft``
    coefficients are ``coeffs`` (shape ``(n//2 + 1, d)``) at arbitrary angles
    ``x``.  Mode ``k`` contributes ``w_k Re(F_k e^{ikx})`` with ``w_0 = 1/n``,
    ``w_{n/2} = 1/n`` and ``2/n`` otherwise, so the Nyquist mode enters with
    the symmetric (real-part) convention.  Direct O(n m) summation.

``monotone_inverse(coeffs, n, targets)``
    Solve ``x + P(x) = y`` for a strictly increasing map with periodic part
    ``P`` (rfft coefficients ``coeffs``, ``P(0) = 0``).  Bracket from the grid,
    then safeguarded Newton to an absolute residual of 1e-13.

The compiled extension is preferred; set ``SOBOGEO_PURE_PYTHON=1`` to force
the numpy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("SOBOGEO_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

interp_rfft = _impl.interp_rfft
monotone_inverse = _impl.monotone_inverse

__all__ = ["BACKEND", "interp_rfft", "monotone_inverse"]
