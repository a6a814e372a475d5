import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sobogeo.analysis import (BallContext, BoundReport, ball_constants, blowup_length,
                              path_checks, path_length, poincare_report)
from sobogeo.curve import grid
from sobogeo.errors import OrderTooLow
from sobogeo.geodesic import (GeodesicState, SolverConfig, Trajectory, circle_path_length,
                              shoot)
from sobogeo.metric import MetricCoeffs
from sobogeo.shapes import circle, outward_normal

from conftest import band_limited, random_curve

M101 = MetricCoeffs((1, 0, 1))
SQRT_2PI = 2.50662827463100050


# -- BoundReport


def test_report_slack_rule():
    assert BoundReport.make("x", 1.0, 1.0).satisfied
    assert BoundReport.make("x", 1.0 + 5e-13, 1.0).satisfied
    assert not BoundReport.make("x", 1.0 + 2e-12, 1.0).satisfied
    # relative slack above |rhs| = 1
    assert BoundReport.make("x", 1e6 + 1e-7, 1e6).satisfied
    assert not BoundReport.make("x", 1e6 + 1e-5, 1e6).satisfied
    r = BoundReport.make("x", 0.25, 1.0)
    assert r.slack == 0.75


def test_soft_report_always_satisfied():
    assert BoundReport.make("m", 5.0, 1.0, hard=False).satisfied


def test_report_json_handles_inf():
    d = BoundReport.make("m", 1.0, np.inf, hard=False).to_json()
    assert d["rhs"] is None and d["slack"] is None
    json.dumps(d, allow_nan=False)


# -- Poincare suite


def _by_name(reports):
    return {r.name: r for r in reports}


def test_constant_field_only_zero_order_terms(ellipse21):
    h = np.tile([0.3, -1.2], (128, 1))
    reps = _by_name(poincare_report(ellipse21, h, 3))
    assert all(r.satisfied for r in reps.values())
    assert reps["sup_Dh"].lhs < 1e-20 and reps["poincare_Dh"].lhs < 1e-20
    for k in (1, 2, 3):
        assert reps[f"interp_{k}"].lhs < 1e-20
    # for constants (2 / l) ||h||^2 = 2 |h|^2
    assert reps["sup_h"].rhs == pytest.approx(2 * reps["sup_h"].lhs, rel=1e-12)


def test_gagliardo_nirenberg_equality_on_circle(unit_circle):
    th = grid(128)
    h = np.c_[np.cos(th), np.zeros(128)]
    reps = _by_name(poincare_report(unit_circle, h, 2))
    gn = reps["gagliardo_nirenberg_1"]
    assert gn.lhs == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert gn.rhs == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert gn.satisfied


def test_sup_dh_sharp_on_circle(unit_circle):
    # ||D_s h||^2_inf = 1 and (l/4) ||D_s^2 h||^2 = (pi / 2) pi for h = cos e1
    th = grid(128)
    h = np.c_[np.cos(th), np.zeros(128)]
    r = _by_name(poincare_report(unit_circle, h, 2))["sup_Dh"]
    assert r.lhs == pytest.approx(1.0, rel=1e-12)
    assert r.rhs == pytest.approx(np.pi**2 / 2, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4), st.integers(1, 2))
def test_poincare_sweep(seed, n, dim):
    r = np.random.default_rng(seed)
    c = random_curve(r, 128)
    h = band_limited(r, 128, int(r.integers(0, 9)), dim=dim)
    reps = poincare_report(c, h, n)
    bad = [x for x in reps if not x.satisfied]
    assert not bad, bad


# -- ball constants


def test_ball_constants_values():
    k = ball_constants(BallContext(2 * np.pi, 1.0, 1.0, 2))
    assert k["C_inv_sqrt_len"] == pytest.approx(0.25, rel=1e-14)
    assert k["C_log_speed"] == pytest.approx(1.50331413731550025, rel=1e-14)
    assert k["speed_growth_factor"] == pytest.approx(4.49656664286435527, rel=1e-14)


def test_ball_constants_order_three():
    # exponent 2n - 4 = 2
    k = ball_constants(BallContext(4.0, 2.0, 4.0, 3))
    assert k["C_inv_sqrt_len"] == pytest.approx(2.0**-3 * 2.0 * (2.0 + 2.0) ** 2)


def test_ball_constants_order_too_low():
    with pytest.raises(OrderTooLow):
        ball_constants(BallContext(1.0, 1.0, 1.0, 1))


def test_ball_context_rejects_bad_values():
    with pytest.raises(ValueError):
        BallContext(-1.0, 1.0, 1.0, 2)
    with pytest.raises(ValueError):
        BallContext(1.0, 1.0, 0.0, 2)


# -- path checks


def _constant_trajectory(c, m, k=5):
    zero = np.zeros_like(c.points)
    return Trajectory([GeodesicState(c, zero, t) for t in np.linspace(0, 1, k)])


def test_constant_trajectory_all_zero(ellipse21):
    reps = path_checks(_constant_trajectory(ellipse21, M101), M101)
    assert reps
    for r in reps:
        if r.name == "c_Hn_dtheta":
            continue
        # the envelope is a ratio of speeds, neutral at 1
        expect = 1.0 if r.name == "speed_envelope" else 0.0
        assert r.lhs == pytest.approx(expect, abs=1e-14), r
        assert r.satisfied


def test_path_length_of_constant_is_zero(ellipse21):
    assert np.all(path_length(_constant_trajectory(ellipse21, M101), M101) == 0)


@pytest.fixture(scope="module")
def blowout():
    c0 = circle(64)
    u0 = 0.5 * outward_normal(c0)
    return shoot(c0, u0, M101, SolverConfig(dt=5e-3, t_final=1.0, record_every=4))


def test_blowout_satisfies_hard_checks(blowout):
    reps = path_checks(blowout, M101)
    names = {r.name for r in reps if r.hard}
    assert names == {"sqrt_speed_L2", "sqrt_length", "inv_sqrt_length", "log_speed_sup",
                     "speed_envelope"}
    assert all(r.satisfied for r in reps)
    assert {"kappa_ds0_ratio", "c_Hn_dtheta", "u_Hn_ds_over_dtheta"} <= {r.name for r in reps}


def test_path_length_matches_energy(blowout):
    # along a geodesic sqrt(G) is constant, so Len = sqrt(E) t
    L = path_length(blowout, M101)
    e0 = blowout.energies[0]
    assert L[-1] == pytest.approx(np.sqrt(e0) * blowout.times[-1], rel=1e-6)


def test_path_length_without_momentum(blowout):
    stripped = Trajectory([GeodesicState(s.curve, None, s.time) for s in blowout.states])
    a, b = path_length(blowout, M101), path_length(stripped, M101)
    assert np.max(np.abs(a - b)) < 1e-3 * a[-1]
    assert all(r.satisfied for r in path_checks(stripped, M101))


def test_monitor_ratio_bounded_across_dt():
    c0 = circle(64)
    u0 = 0.5 * outward_normal(c0)
    vals = []
    for dt in (1e-2, 5e-3):
        tr = shoot(c0, u0, M101, SolverConfig(dt=dt, t_final=0.5, record_every=int(0.05 / dt)))
        vals.append(_by_name(path_checks(tr, M101))["kappa_ds0_ratio"].lhs)
    assert vals[1] == pytest.approx(vals[0], rel=1e-3)


def test_random_trajectory_checks(rng):
    c0 = random_curve(rng, 64)
    u0 = 0.2 * band_limited(rng, 64, 3)
    tr = shoot(c0, u0, M101, SolverConfig(dt=5e-3, t_final=0.5, record_every=5))
    assert all(r.satisfied for r in path_checks(tr, M101))


def test_path_checks_without_embedding_constant():
    m = MetricCoeffs((0, 0, 1), quotient_translations=True)
    c = circle(64)
    reps = path_checks(_constant_trajectory(c, m), m)
    assert all(not r.hard for r in reps)


# -- blow-up length


def test_blowup_length_to_infinity():
    assert blowup_length(MetricCoeffs((0, 0, 1)), 1.0, np.inf) == pytest.approx(
        2 * SQRT_2PI, abs=1e-12)


def test_blowup_length_finite_interval():
    assert blowup_length(MetricCoeffs((0, 0, 1)), 1.0, 4.0) == pytest.approx(SQRT_2PI, rel=1e-12)


@pytest.mark.parametrize("a", [(1, 0, 1), (0, 1, 1), (0, 1)])
def test_blowup_length_diverges_with_low_orders(a):
    assert blowup_length(MetricCoeffs(a), 1.0, np.inf) == np.inf


def test_blowup_length_mixed_orders():
    m = MetricCoeffs((0, 0, 1, 1))
    assert blowup_length(m, 1.0, np.inf) == pytest.approx(5.46158914080799928, rel=1e-10)
    assert blowup_length(m, 1.0, 3.0) == pytest.approx(2.53550222963207437, rel=1e-10)


def test_blowup_length_single_higher_order():
    # a_3 only: sqrt(2 pi) int_1^inf s^{-5/2} = sqrt(2 pi) 2 / 3
    assert blowup_length(MetricCoeffs((0, 0, 0, 1)), 1.0, np.inf) == pytest.approx(
        SQRT_2PI * 2 / 3, rel=1e-12)


def test_blowup_length_symmetric_and_zero():
    m = MetricCoeffs((1, 0, 1))
    assert blowup_length(m, 2.0, 1.0) == blowup_length(m, 1.0, 2.0)
    assert blowup_length(m, 1.5, 1.5) == 0.0
    with pytest.raises(ValueError):
        blowup_length(m, 0.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.01, 5), st.floats(0.01, 5),
       st.lists(st.floats(0, 2), min_size=3, max_size=4))
def test_blowup_length_monotone_and_additive(r0, d1, d2, a):
    m = MetricCoeffs(tuple(a[:-1]) + (a[-1] + 0.1,))
    r1, r2 = r0 + d1, r0 + d1 + d2
    whole = blowup_length(m, r0, r2)
    parts = blowup_length(m, r0, r1) + blowup_length(m, r1, r2)
    assert abs(whole - parts) <= 1e-10 * max(1.0, whole)
    assert blowup_length(m, r0, r1) <= whole


def test_blowup_additive_with_tail():
    m = MetricCoeffs((0, 0, 1, 0.5))
    tail = blowup_length(m, 1.0, np.inf)
    assert tail == pytest.approx(blowup_length(m, 1.0, 3.0) + blowup_length(m, 3.0, np.inf),
                                 rel=1e-10)


def test_upper_bound_oracle_value():
    assert blowup_length(M101, 1.0, 2.0) == pytest.approx(3.43096764679884622, rel=1e-12)


@pytest.mark.parametrize("a,r0,r1", [((1, 0, 1), 1.0, 2.0), ((0, 0, 1), 1.0, 4.0),
                                     ((0.5, 1, 2), 2.0, 0.7), ((0, 0, 1, 1), 1.0, 3.0)])
def test_consistent_with_circle_ode(a, r0, r1):
    m = MetricCoeffs(a)
    assert circle_path_length(m, r0, r1) == pytest.approx(blowup_length(m, r0, r1), rel=1e-8)
