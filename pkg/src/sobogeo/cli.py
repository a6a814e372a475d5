"""Command-line front end: ``sobogeo {shoot,validate,distance,blowup,plot}``.

Exit codes: 0 success, 1 I/O or input error, 2 immersion violation,
3 energy drift exceeded, 4 blow-up detected or unstable step, 5 a hard
validation check failed.
"""
import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io, shapes
from .analysis import BoundReport, blowup_length, path_checks, poincare_report
from .bvp import distance_bracket
from .curve import Curve, grid
from .errors import (EnergyDriftExceeded, ImmersionViolation, IntegrationAborted,
                     SobogeoError)
from .geodesic import (SolverConfig, circle_oracle, h_quadratic, metric_derivative_check,
                       shoot)
from .metric import MetricCoeffs, apply_L, apply_Lbar, invert_Lbar, metric_eval, pair

EXIT_OK, EXIT_IO, EXIT_IMMERSION, EXIT_DRIFT, EXIT_BLOWUP, EXIT_CHECK = 0, 1, 2, 3, 4, 5


def _coeffs(args):
    return MetricCoeffs.parse(args.coeffs, getattr(args, "quotient_translations", False))


def _load_curve(spec, n):
    if os.path.exists(spec) or spec.endswith(".json"):
        return io.read_curve(spec)
    return shapes.generate(spec, n)


def _add_curve_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--shape", default="circle:1", help="e.g. circle:1, ellipse:2,1")
    g.add_argument("--curve", help="curve JSON file")
    p.add_argument("-n", "--samples", type=int, default=128)


def _add_metric_args(p):
    p.add_argument("--coeffs", default="1,0,1", help="comma list a_0,...,a_n")
    p.add_argument("--quotient-translations", action="store_true")


# -- shoot -------------------------------------------------------------------

def cmd_shoot(args):
    m = _coeffs(args)
    c0 = io.read_curve(args.curve) if args.curve else shapes.generate(args.shape, args.samples)
    u0 = shapes.velocity(args.velocity, c0, loader=io.read_field)
    cfg = SolverConfig(dt=args.dt, t_final=args.t_final, energy_tol=args.energy_tol,
                       record_every=args.record_every, method=args.method, form=args.form,
                       dealias=args.dealias, integrator=args.integrator,
                       blowup_factor=args.blowup_factor)
    code = EXIT_OK
    try:
        traj = shoot(c0, u0, m, cfg)
    except IntegrationAborted as exc:
        traj, code = exc.trajectory, EXIT_DRIFT if isinstance(exc, EnergyDriftExceeded) else EXIT_BLOWUP
        print(f"aborted: {exc}", file=sys.stderr)
    except ImmersionViolation as exc:
        traj, code = exc.trajectory, EXIT_IMMERSION
        print(f"aborted: {exc}", file=sys.stderr)
    if args.out and traj is not None:
        io.write_trajectory(args.out, traj, args.with_momentum)
    if traj is not None and traj.diagnostics:
        last = traj.diagnostics[-1]
        print(json.dumps({"states": len(traj.states), "t": last["t"], "energy": last["energy"],
                          "max_drift": traj.max_drift, "exit": code}))
    return code


# -- validate ----------------------------------------------------------------

def _band_limited(rng, th, modes, dim=2, decay=2.0):
    out = np.zeros((th.size, dim))
    for k in range(modes + 1):
        a = rng.normal(size=(2, dim)) / (1 + k) ** decay
        out += np.outer(np.cos(k * th), a[0]) + np.outer(np.sin(k * th), a[1])
    return out


def random_curve(rng, n):
    """Moderately deformed, reparametrized ellipse that is well resolved on ``n`` samples."""
    th = grid(n)
    while True:
        phi = th + rng.uniform(-0.3, 0.3) * np.sin(th + rng.uniform(0, 2 * np.pi))
        scale = rng.uniform(0.5, 2)
        base = scale * np.c_[rng.uniform(0.75, 1.25) * np.cos(phi), rng.uniform(0.75, 1.25) * np.sin(phi)]
        pts = base + 0.05 * scale * _band_limited(rng, th, 4)
        try:
            c = Curve(pts)
        except ImmersionViolation:
            continue
        tail = np.abs(np.fft.rfft(c.speed))
        if c.speed.min() > 0.3 * c.speed.mean() and tail[-n // 8:].max() < 1e-13 * tail[0]:
            return c


def _rel(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def validate_trial(seed_seq, n):
    """All hard checks for one random draw; deterministic given the seed sequence."""
    rng = np.random.default_rng(seed_seq)
    th = grid(n)
    c = random_curve(rng, n)
    m = MetricCoeffs((rng.uniform(0.5, 2), rng.uniform(0, 1), rng.uniform(0.5, 2)))
    h, k, d = (_band_limited(rng, th, 8) for _ in range(3))
    R = BoundReport.make
    reps = list(poincare_report(c, h, int(rng.integers(1, 5))))
    lhk = pair(apply_L(c, h, m) * c.speed[:, None], k)
    lkh = pair(apply_L(c, k, m) * c.speed[:, None], h)
    g = metric_eval(c, h, k, m)
    scale = np.sqrt(metric_eval(c, h, h, m) * metric_eval(c, k, k, m))
    reps.append(R("L_symmetry", abs(lhk - lkh) / scale, 1e-10))
    reps.append(R("Lbar_pairing", abs(pair(apply_Lbar(c, h, m), k) - g) / scale, 1e-9))
    reps.append(R("H_two_forms", _rel(h_quadratic(c, h, m), h_quadratic(c, h, m, "strong")), 1e-8))
    reps.append(R("H_finite_difference", metric_derivative_check(c, h, d, m), 1e-5))
    p = apply_Lbar(c, h, m)
    uf = invert_Lbar(c, p, m, "factorization")
    uc = invert_Lbar(c, p, m, "cg")
    reps.append(R("invert_factorization", _rel(uf, h), 1e-8))
    reps.append(R("invert_cg", _rel(uc, h), 1e-8))
    reps.append(R("invert_agreement", _rel(uf, uc), 1e-8))
    return reps


def run_validation(seed, trials, n, threads=None):
    seqs = np.random.SeedSequence(seed).spawn(trials)
    threads = threads or int(os.environ.get("SOBOGEO_THREADS", "1") or 1)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(lambda s: validate_trial(s, n), seqs))
    else:
        results = [validate_trial(s, n) for s in seqs]
    return results


def _table(named):
    rows = {}
    for name, r in named:
        row = rows.setdefault(name, [0, 0, -np.inf])
        row[0] += 1
        row[1] += not r.satisfied
        if r.hard and np.isfinite(r.rhs) and r.rhs > 0:
            row[2] = max(row[2], r.lhs / r.rhs)
    lines = [f"{'check':28s} {'count':>6s} {'fail':>5s} {'max lhs/rhs':>12s}"]
    for name, (cnt, fail, worst) in rows.items():
        w = f"{worst:12.3e}" if np.isfinite(worst) else f"{'-':>12s}"
        lines.append(f"{name:28s} {cnt:6d} {fail:5d} {w}")
    return "\n".join(lines)


def cmd_validate(args):
    results = run_validation(args.seed, args.trials, args.samples, args.threads)
    named, records = [], []
    for i, reps in enumerate(results):
        for r in reps:
            named.append((r.name, r))
            records.append({"trial": i, **r.to_json()})
    if args.traj:
        m = _coeffs(args)
        for path in args.traj:
            for r in path_checks(io.read_trajectory(path), m):
                named.append((f"path:{r.name}", r))
                records.append({"trajectory": path, **r.to_json()})
    print(_table(named))
    if args.report:
        io.atomic_write(args.report, json.dumps(records))
    failed = sum(1 for _, r in named if r.hard and not r.satisfied)
    print(f"{len(named)} checks, {failed} hard failures")
    return EXIT_OK if failed == 0 else EXIT_CHECK


# -- distance ----------------------------------------------------------------

def cmd_distance(args):
    m = _coeffs(args)
    c0 = _load_curve(args.source, args.samples)
    c1 = _load_curve(args.target, args.samples)
    b = distance_bracket(c0, c1, m, steps=args.steps, iters=args.iters,
                         preconditioned=not args.l2_gradient)
    if args.dump_path:
        lines = "".join(json.dumps({"t": float(t), "curve": io.curve_to_json(c)}) + "\n"
                        for t, c in zip(b["path"].times, b["path"].curves))
        io.atomic_write(args.dump_path, lines)
    print(json.dumps({k: b[k] for k in ("lower", "upper", "iterations", "final_energy")}))
    return EXIT_OK


# -- blowup ------------------------------------------------------------------

def cmd_blowup(args):
    m = _coeffs(args)
    r1 = float(args.r1)
    out = {"length": _none_if_inf(blowup_length(m, args.r0, r1))}
    if args.rdot0 is not None:
        o = circle_oracle(m, args.r0, args.rdot0, args.t_final)
        out.update(exit_time=o.exit_time, exit_kind=o.exit_kind)
    print(json.dumps(out))
    return EXIT_OK


def _none_if_inf(x):
    return None if not np.isfinite(x) else x


# -- plot --------------------------------------------------------------------

def _color(s):
    # blue at t=0 to red at t=T
    r, b = int(255 * s), int(255 * (1 - s))
    return f"#{r:02x}40{b:02x}"


def render_svg(traj, every=1, size=600):
    curves = [s.curve.points for s in traj.states][::max(every, 1)]
    if traj.states and (len(traj.states) - 1) % max(every, 1):
        curves.append(traj.states[-1].curve.points)
    allp = np.concatenate(curves)
    lo, hi = allp.min(0), allp.max(0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.05 * span
    x0, y0, w = lo[0] - pad, lo[1] - pad, span + 2 * pad
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="{x0:.6g} {y0:.6g} {w:.6g} {w:.6g}">',
             f'<g fill="none" stroke-width="{w / 400:.4g}" transform="translate(0 {2 * y0 + w:.6g}) scale(1 -1)">']
    for i, pts in enumerate(curves):
        s = i / max(len(curves) - 1, 1)
        closed = np.vstack([pts, pts[:1]])
        coords = " ".join(f"{x:.6g},{y:.6g}" for x, y in closed)
        parts.append(f'<polyline stroke="{_color(s)}" points="{coords}"/>')
    parts.append("</g></svg>\n")
    return "\n".join(parts)


def render_csv(traj):
    lines = ["t,energy,length,min_speed"]
    for d in traj.diagnostics:
        lines.append(",".join(repr(float(d[k])) for k in ("t", "energy", "length", "min_speed")))
    return "\n".join(lines) + "\n"


def cmd_plot(args):
    traj = io.read_trajectory(args.trajectory)
    io.atomic_write(args.out, render_svg(traj, args.every))
    if args.csv:
        io.atomic_write(args.csv, render_csv(traj))
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="sobogeo", description="Sobolev metrics on plane curves")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("shoot", help="integrate a geodesic from initial data")
    _add_curve_args(p)
    _add_metric_args(p)
    p.add_argument("--velocity", default="radial:0.5",
                   help="radial:b | const:x,y | mode:m:amp | file:path")
    p.add_argument("--t-final", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--energy-tol", type=float, default=1e-4)
    p.add_argument("--record-every", type=int, default=10)
    p.add_argument("--blowup-factor", type=float, default=1e4)
    p.add_argument("--method", choices=["factorization", "cg"], default="factorization")
    p.add_argument("--form", choices=["weak", "strong"], default="weak")
    p.add_argument("--integrator", choices=["rk4", "rk4-velocity"], default="rk4")
    p.add_argument("--dealias", action="store_true")
    p.add_argument("--with-momentum", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_shoot)

    p = sub.add_parser("validate", help="randomized sweep of the hard numerical checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("-n", "--samples", type=int, default=128)
    p.add_argument("--threads", type=int)
    p.add_argument("--report")
    p.add_argument("--traj", action="append", help="also run path checks on a trajectory")
    _add_metric_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("distance", help="bracket the geodesic distance between two curves")
    p.add_argument("--from", dest="source", required=True, help="shape spec or curve JSON")
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("-n", "--samples", type=int, default=64)
    _add_metric_args(p)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--l2-gradient", action="store_true", help="plain L2 descent direction")
    p.add_argument("--dump-path")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("blowup", help="length of the concentric-circle path")
    _add_metric_args(p)
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--r1", default="inf")
    p.add_argument("--rdot0", type=float)
    p.add_argument("--t-final", type=float, default=10.0)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("plot", help="SVG (and CSV) from a trajectory file")
    p.add_argument("trajectory")
    p.add_argument("--out", required=True)
    p.add_argument("--every", type=int, default=1)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ImmersionViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IMMERSION
    except (OSError, ValueError, KeyError, SobogeoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
