"""Builtin curve generators and initial-velocity specifiers."""
import numpy as np

from .curve import Curve, dtheta, grid


def _params(text, count):
    vals = [float(v) for v in text.split(",")] if text else []
    if len(vals) != count:
        raise ValueError(f"expected {count} parameter(s), got {text!r}")
    return vals


def circle(n, r=1.0):
    th = grid(n)
    return Curve(r * np.c_[np.cos(th), np.sin(th)])


def ellipse(n, a=2.0, b=1.0):
    th = grid(n)
    return Curve(np.c_[a * np.cos(th), b * np.sin(th)])


def limacon(n, a=0.5, b=1.0):
    """Polar curve ``r = b + a cos(theta)``; has a cusp (not immersed) when ``a == b``."""
    th = grid(n)
    r = b + a * np.cos(th)
    return Curve(np.c_[r * np.cos(th), r * np.sin(th)])


def reparametrized_circle(n, amp=0.3, r=1.0):
    """Unit circle traced with ``phi(theta) = theta + amp sin(theta)``; needs ``|amp| < 1``."""
    th = grid(n)
    phi = th + amp * np.sin(th)
    return Curve(r * np.c_[np.cos(phi), np.sin(phi)])


SHAPES = {
    "circle": (circle, 1),
    "ellipse": (ellipse, 2),
    "limacon": (limacon, 2),
    "reparametrized-circle": (reparametrized_circle, 1),
}


def generate(spec, n):
    """Curve from a specifier such as ``circle:1``, ``ellipse:2,1`` or ``limacon:0.5,1``."""
    name, _, args = spec.partition(":")
    if name not in SHAPES:
        raise ValueError(f"unknown shape {name!r}; choose from {sorted(SHAPES)}")
    fn, count = SHAPES[name]
    return fn(n, *_params(args, count))


def outward_normal(c):
    """Unit normal pointing away from the enclosed region (by the sign of the signed area)."""
    d1 = dtheta(c.points)
    area = 0.5 * np.mean(c.points[:, 0] * d1[:, 1] - c.points[:, 1] * d1[:, 0])
    return -c.normal if area >= 0 else np.array(c.normal)


def velocity(spec, c, loader=None):
    """Initial velocity from ``radial:b``, ``const:x,y``, ``mode:m:amp`` or ``file:path``.

    ``radial:b`` is ``b`` times the outward unit normal; ``mode:m:amp`` is
    ``amp cos(m theta)`` times the outward unit normal.
    """
    kind, _, args = spec.partition(":")
    if kind == "radial":
        (b,) = _params(args, 1)
        return b * outward_normal(c)
    if kind == "const":
        x, y = _params(args, 2)
        return np.tile([x, y], (c.n, 1))
    if kind == "mode":
        mm, _, amp = args.partition(":")
        return float(amp) * np.cos(int(mm) * c.theta)[:, None] * outward_normal(c)
    if kind == "file":
        if loader is None:
            raise ValueError("file velocities need a loader")
        return loader(args, c.n)
    raise ValueError(f"unknown velocity specifier {spec!r}")
