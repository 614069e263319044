"""Identity verification engine: closure, flags, determinism."""

import numpy as np
import pytest

from confsub.geometry import Point
from confsub.identities import (ALL_CHECK_IDS, CONVENTION_SENSITIVE_IDS,
                                IdentityContext, run_check)
from conftest import chart, make_setup, sample

FUNDAMENTAL = ("G2.12", "G2.13", "G2.14", "G2.15")


def run_all(check_id, setup, points, tol=1e-6):
    out = []
    for p in points:
        ctx = IdentityContext(setup, p)
        out.extend(run_check(check_id, setup, p, tol=tol, ctx=ctx))
    return out


def test_fundamental_equations_close_at_unit_dilation(riemannian_setups):
    for name, setup, box in riemannian_setups:
        points = sample(box, 3, seed=21)
        for p in points:
            ctx = IdentityContext(setup, p)
            for check_id in FUNDAMENTAL:
                for rep in run_check(check_id, setup, p, ctx=ctx):
                    assert rep.abs_residual <= 1e-9, (name, check_id,
                                                      rep.label)


def test_every_check_runs_everywhere(riemannian_setups):
    # each id yields reports with a definite verdict on every setup
    name, setup, box = riemannian_setups[2]
    p = sample(box, 1, seed=22)[0]
    ctx = IdentityContext(setup, p)
    for check_id in ALL_CHECK_IDS:
        reports = run_check(check_id, setup, p, ctx=ctx)
        assert reports, check_id
        for rep in reports:
            assert rep.verdict in ("pass", "fail", "hypothesis-not-met")
            assert rep.identity_id == check_id
            assert rep.convention_sensitive is (
                check_id in CONVENTION_SENSITIVE_IDS)


def test_full_closure_on_conformal_examples(conformal_setups):
    # the identities that hold at every convention close exactly on the
    # genuinely conformal catalog setups
    robust = ("G2.12", "G2.13", "G2.14", "G2.15", "P3.1", "E3.3",
              "R3.11", "R3.12", "L2.1", "L2.2")
    for name, setup, points in conformal_setups:
        for p in points[:2]:
            ctx = IdentityContext(setup, p)
            for check_id in robust:
                for rep in run_check(check_id, setup, p, ctx=ctx):
                    if rep.verdict == "hypothesis-not-met":
                        continue
                    assert rep.abs_residual <= 1e-9, (name, check_id,
                                                      rep.label)


def test_r313_convention_divergence_on_cone(conformal_setups):
    # regression anchor: with a vertically varying dilation and a
    # two-dimensional horizontal space, the printed horizontal Ricci
    # decomposition misses by exactly 1 per unit metric on this cone
    name, cone, points = conformal_setups[-1]
    assert name == "cone"
    p = points[0]
    ctx = IdentityContext(cone, p)
    reports = run_check("R3.13", cone, p, ctx=ctx)
    diag = [r for r in reports if r.label and r.label[-2:] in ("11", "22")
            or r.lhs != 0.0]
    worst = max(reports, key=lambda r: r.abs_residual)
    assert worst.verdict == "fail"
    assert worst.convention_sensitive
    assert worst.terms  # itemized breakdown accompanies the flag
    # the cone is hyperbolic 3-space: Ric = -2 g on unit vectors, the
    # printed right side gives -3
    assert worst.lhs == pytest.approx(-2.0, abs=1e-9)
    assert worst.rhs == pytest.approx(-3.0, abs=1e-9)


def test_l31i_overcount_on_cone(conformal_setups):
    # printed left side scales with n, right side with n^2
    name, cone, points = conformal_setups[-1]
    reports = run_check("L3.1.i", cone, points[0])
    worst = max(reports, key=lambda r: r.abs_residual)
    assert worst.verdict == "fail"
    assert worst.convention_sensitive
    assert worst.rhs == pytest.approx(2 * worst.lhs, rel=1e-9)


def test_r313_closes_when_dilation_is_horizontal(conformal_setups):
    # on 5.3 the dilation gradient is horizontal, so the vertical-
    # gradient corrections vanish and the printed form closes
    for name, setup, points in conformal_setups:
        if name != "5.3":
            continue
        for rep in run_check("R3.13", setup, points[0]):
            assert rep.abs_residual <= 1e-9


def test_hypothesis_gating(conformal_setups):
    # lemma 3.1 requires an integrable horizontal distribution; the
    # twisted Riemannian bundle violates it and must be gated, not failed
    twisted = make_setup(
        chart("x1 x2 x3", ["1 + x2^2, 0, x2", "0, 1, 0", "x2, 0, 1"]),
        chart("y1 y2", ["1, 0", "0, 1"]), ["x1", "x2"])
    p = Point((0.4, 0.8, -0.3))
    for rep in run_check("L3.1.iii", twisted, p):
        assert rep.verdict == "hypothesis-not-met"
        unmet = [h for h in rep.hypotheses if not h.satisfied]
        assert any("integrable" in h.name for h in unmet)
        assert all(h.violation > 0 for h in unmet)


def test_tolerance_monotonicity(conformal_setups):
    # a record passing at tol also passes at any larger tol
    name, cone, points = conformal_setups[-1]
    p = points[0]
    for tol_small, tol_large in ((1e-12, 1e-6), (1e-8, 1e-2)):
        for check_id in ("G2.12", "R3.13", "T3.4"):
            small = run_check(check_id, cone, p, tol=tol_small)
            large = run_check(check_id, cone, p, tol=tol_large)
            for s, l in zip(small, large):
                if s.verdict == "pass":
                    assert l.verdict == "pass"


def test_reports_are_deterministic(conformal_setups):
    name, setup, points = conformal_setups[0]
    p = points[0]
    first = run_check("R3.11", setup, p)
    second = run_check("R3.11", setup, p)
    for a, b in zip(first, second):
        assert (a.lhs, a.rhs, a.abs_residual, a.rel_residual) == \
            (b.lhs, b.rhs, b.abs_residual, b.rel_residual)
        assert a.terms == b.terms


def test_scalar_split_requires_tg_map(conformal_setups):
    for name, setup, points in conformal_setups:
        reports = run_check("T3.4", setup, points[0])
        if name == "5.4":
            assert reports[0].verdict == "pass"
        elif name in ("5.1", "5.3"):
            assert reports[0].verdict == "hypothesis-not-met"


def test_m4_spot_check():
    # larger total space: nested-jet pipeline still closes exactly
    setup = make_setup(
        chart("x1 x2 x3 x4",
              ["1, 0, 0, 0", "0, 1, 0, 0", "0, 0, exp(2*x1), 0",
               "0, 0, 0, 2 + sin(x3)"]),
        chart("y1 y2", ["1, 0", "0, 1"]), ["x1", "x2"])
    p = Point((0.2, -0.4, 0.5, 1.1))
    ctx = IdentityContext(setup, p)
    for check_id in FUNDAMENTAL:
        for rep in run_check(check_id, setup, p, ctx=ctx):
            assert rep.abs_residual <= 1e-9, (check_id, rep.label)
