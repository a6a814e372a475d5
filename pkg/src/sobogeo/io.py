"""JSON / JSON-lines formats for curves, fields and trajectories.

All writers go through a temporary file in the target directory followed by
an atomic rename, so readers never see partial output.
"""
import json
import os
import tempfile

import numpy as np

from .curve import Curve
from .errors import BadShape, ShapeMismatch
from .geodesic import GeodesicState, Trajectory


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} in input")


def loads(text):
    return json.loads(text, parse_constant=_reject_constant)


def _finite(a, what):
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise BadShape(f"{what} contains NaN or Inf")
    return a


def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def curve_to_json(c):
    return {"n": c.n, "points": c.points.tolist()}


def field_to_json(f):
    f = np.asarray(f)
    return {"n": int(f.shape[0]), "values": f.tolist()}


def curve_from_json(obj, immersion_floor=None):
    pts = _finite(obj["points"], "points")
    if "n" in obj and int(obj["n"]) != pts.shape[0]:
        raise BadShape(f"header says n={obj['n']} but {pts.shape[0]} points given")
    return Curve(pts, immersion_floor)


def field_from_json(obj, n=None):
    vals = _finite(obj["values"], "values")
    if "n" in obj and int(obj["n"]) != vals.shape[0]:
        raise BadShape(f"header says n={obj['n']} but {vals.shape[0]} values given")
    if n is not None and vals.shape[0] != n:
        raise ShapeMismatch(f"field has {vals.shape[0]} samples, curve has {n}")
    return vals


def read_curve(path):
    with open(path) as f:
        return curve_from_json(loads(f.read()))


def read_field(path, n=None):
    with open(path) as f:
        return field_from_json(loads(f.read()), n)


def write_curve(path, c):
    atomic_write(path, json.dumps(curve_to_json(c)))


def write_field(path, f):
    atomic_write(path, json.dumps(field_to_json(f)))


def _clean(x):
    if isinstance(x, float) and not np.isfinite(x):
        return None
    return x


def state_record(state, diag, with_momentum=False):
    rec = {k: _clean(v) for k, v in diag.items()}
    rec["curve"] = curve_to_json(state.curve)
    if with_momentum:
        rec["momentum"] = field_to_json(state.momentum)
    return rec


def trajectory_lines(traj, with_momentum=False):
    return "".join(json.dumps(state_record(s, d, with_momentum)) + "\n"
                   for s, d in zip(traj.states, traj.diagnostics))


def write_trajectory(path, traj, with_momentum=False):
    atomic_write(path, trajectory_lines(traj, with_momentum))


def read_trajectory(path, immersion_floor=None):
    """Load a JSON-lines trajectory; momentum is ``None`` when it was not stored."""
    traj = Trajectory()
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = loads(line)
                c = curve_from_json(rec["curve"], immersion_floor)
                p = field_from_json(rec["momentum"], c.n) if "momentum" in rec else None
                t = float(rec["t"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed record ({exc})") from None
            traj.states.append(GeodesicState(c, p, t))
            traj.diagnostics.append({k: v for k, v in rec.items() if k not in ("curve", "momentum")})
    if not traj.states:
        raise ValueError(f"{path}: empty trajectory")
    return traj
