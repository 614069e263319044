"""Submersion machinery: projectors, dilation, O'Neill tensors, fibers."""

import numpy as np
import pytest

from confsub import catalog
from confsub import geometry as geo
from confsub import submersion as sub
from confsub.geometry import Point, VectorFieldSpec
from conftest import chart, flat_chart, make_setup, sample


@pytest.fixture(scope="module")
def ex53():
    return catalog.load_job("5.3").setup


@pytest.fixture(scope="module")
def ex51():
    return catalog.load_job("5.1").setup


def basis(m):
    return [tuple(1.0 if j == i else 0.0 for j in range(m))
            for i in range(m)]


def test_projectors_idempotent_orthogonal(riemannian_setups,
                                          conformal_setups):
    for name, setup, box_or_points in (riemannian_setups
                                       + conformal_setups):
        if isinstance(box_or_points[0], Point):
            points = box_or_points
        else:
            points = sample(box_or_points, 3, seed=11)
        for p in points[:3]:
            pv, ph = setup.projectors_at(list(p.coords))
            ph, pv = np.asarray(ph, float), np.asarray(pv, float)
            assert np.max(np.abs(ph @ ph - ph)) <= 1e-10, name
            assert np.max(np.abs(pv @ pv - pv)) <= 1e-10, name
            assert np.max(np.abs(ph + pv - np.eye(setup.m))) <= 1e-12, name
            assert np.max(np.abs(ph @ pv)) <= 1e-10, name


def test_projectors_g_symmetric(ex53):
    # g(P_H X, Y) = g(X, P_H Y)
    p = Point((0.3, 1.6, 2.0))
    _, ph = ex53.projectors_at(list(p.coords))
    ph = np.asarray(ph, float)
    g = geo.metric_matrix(ex53.total, p)
    assert np.max(np.abs(g @ ph - (g @ ph).T)) <= 1e-12


def test_dilation_and_anisotropy(ex51, ex53):
    p = Point((0.4, 0.9))
    d = sub.dilation(ex51, p)
    assert d.lambda_sq == pytest.approx(np.exp(2 * 0.9), rel=1e-12)
    assert d.anisotropy <= 1e-10
    q = Point((0.1, 1.7, 2.5))
    d3 = sub.dilation(ex53, q)
    assert d3.lambda_sq == pytest.approx(2.5 ** 2, rel=1e-12)
    assert d3.anisotropy <= 1e-10


def test_oneill_values_example_53(ex53):
    p = Point((0.2, 1.8, 2.0))
    e1, e2, e3 = basis(3)
    t = sub.oneill_T(ex53, p, VectorFieldSpec.constant(e1),
                     VectorFieldSpec.constant(e1))
    assert np.asarray(t.components) == pytest.approx((0.0, 0.0, 0.5))
    a = sub.oneill_A(ex53, p, VectorFieldSpec.constant(e2),
                     VectorFieldSpec.constant(e3))
    assert np.max(np.abs(np.asarray(a.components))) <= 1e-12
    h = sub.mean_curvature(ex53, p)
    assert np.asarray(h.components) == pytest.approx((0.0, 0.0, 2.0))


def test_oneill_T_reverses_distributions(ex53):
    # T maps (vertical, vertical) -> horizontal and
    # (vertical, horizontal) -> vertical
    p = Point((0.5, 2.2, 1.8))
    pv, _ = ex53.projectors_at(list(p.coords))
    pv = np.asarray(pv, float)
    e1, e2, e3 = basis(3)
    t_vv = np.asarray(sub.oneill_T(ex53, p, VectorFieldSpec.constant(e1),
                                   VectorFieldSpec.constant(e1)).components)
    assert np.max(np.abs(pv @ t_vv)) <= 1e-9
    t_vh = np.asarray(sub.oneill_T(ex53, p, VectorFieldSpec.constant(e1),
                                   VectorFieldSpec.constant(e3)).components)
    ph = np.eye(3) - pv
    assert np.max(np.abs(ph @ t_vh)) <= 1e-9


def test_oneill_A_skew_and_alternation(riemannian_setups):
    for name, setup, box in riemannian_setups:
        if setup.n < 2:
            continue
        p = sample(box, 1, seed=13)[0]
        g = geo.metric_matrix(setup.total, p)
        hf = setup.horizontal_frame(p)
        x = np.asarray(hf[0])
        y = np.asarray(hf[1])
        axy = np.asarray(sub.oneill_A(
            setup, p, VectorFieldSpec.constant(x),
            VectorFieldSpec.constant(y)).components)
        ayx = np.asarray(sub.oneill_A(
            setup, p, VectorFieldSpec.constant(y),
            VectorFieldSpec.constant(x)).components)
        # alternation on horizontal vectors (Riemannian case)
        assert np.max(np.abs(axy + ayx)) <= 1e-9, name
        # A_X X = 0 at dilation one
        axx = np.asarray(sub.oneill_A(
            setup, p, VectorFieldSpec.constant(x),
            VectorFieldSpec.constant(x)).components)
        assert np.max(np.abs(axx)) <= 1e-9, name
        # skew-symmetry: g(A_X Y, V) = -g(Y, A_X V) for vertical V
        v = np.asarray(setup.vertical_frame(p)[0])
        axv = np.asarray(sub.oneill_A(
            setup, p, VectorFieldSpec.constant(x),
            VectorFieldSpec.constant(v)).components)
        assert float(axy @ g @ v) == pytest.approx(
            -float(y @ g @ axv), abs=1e-9), name


def test_riemannian_A_is_half_vertical_bracket(riemannian_setups):
    for name, setup, box in riemannian_setups:
        if setup.n < 2:
            continue
        p = sample(box, 1, seed=14)[0]
        pv, _ = setup.projectors_at(list(p.coords))
        pv = np.asarray(pv, float)
        e_x = basis(setup.m)[0]
        e_y = basis(setup.m)[1]
        ph = np.eye(setup.m) - pv
        x = ph @ np.asarray(e_x)
        y = ph @ np.asarray(e_y)
        x_lift = setup.basic_field_fn(
            VectorFieldSpec.constant(setup.jacobian(p) @ x))
        y_lift = setup.basic_field_fn(
            VectorFieldSpec.constant(setup.jacobian(p) @ y))
        from confsub.jets import primal
        bracket = geo.lie_bracket_at(x_lift, y_lift, list(p.coords))
        vb = pv @ np.array([primal(c) for c in bracket])
        a = np.asarray(sub.oneill_A(
            setup, p, VectorFieldSpec.constant(x),
            VectorFieldSpec.constant(y)).components)
        assert np.max(np.abs(a - 0.5 * vb)) <= 1e-8, name


def test_mean_curvature_zero_for_tg_fibers(ex51):
    p = Point((1.0, 0.5))
    h = sub.mean_curvature(ex51, p)
    assert np.max(np.abs(np.asarray(h.components))) <= 1e-12


def test_intrinsic_fiber_curvature_one_dim_is_zero(ex51, ex53):
    for setup, p in ((ex51, Point((0.5, 0.25))),
                     (ex53, Point((0.0, 1.5, 2.0)))):
        assert sub.intrinsic_fiber_scalar_curvature(setup, p) == 0.0


def test_intrinsic_fiber_curvature_curved_fiber(riemannian_setups):
    name, setup, box = riemannian_setups[3]
    assert name == "curved-fiber-3to1"
    p = sample(box, 1, seed=15)[0]
    s = sub.intrinsic_fiber_scalar_curvature(setup, p)
    assert s != 0.0
    # the fiber slice metric is conformal to exp(2c x1) diag(1, 2+sin(x2)),
    # whose curvature is independent of the overall constant factor
    assert np.isfinite(s)


def test_structure_flags_on_catalog():
    expected = {
        "5.1": dict(fibers_totally_geodesic=True, horizontal_integrable=True,
                    homothetic=True, horizontal_totally_geodesic=False),
        "5.2": dict(fibers_totally_geodesic=True, homothetic=False,
                    horizontal_totally_geodesic=True),
        "5.3": dict(fibers_totally_geodesic=False,
                    fibers_totally_umbilical=True,
                    horizontal_totally_geodesic=True,
                    horizontal_integrable=True),
        "5.4": dict(fibers_totally_geodesic=True, homothetic=True,
                    map_totally_geodesic=True),
    }
    for eid, want in expected.items():
        job = catalog.load_job(eid)
        flags = sub.structure_flags(job.setup, job.points[:4]).as_dict()
        for key, value in want.items():
            assert flags[key].holds is value, (eid, key)


def test_tension_field_vanishes_for_tg_map():
    job = catalog.load_job("5.4")
    tau = sub.tension_field(job.setup, job.points[0])
    assert np.max(np.abs(np.asarray(tau.components))) <= 1e-12


def test_not_a_submersion_detected():
    total = flat_chart(3)
    base = flat_chart(2, prefix="y")
    bad = make_setup(total, base, ["x1", "x1"])  # rank-deficient
    with pytest.raises(sub.NotASubmersionError):
        sub.dilation(bad, Point((0.1, 0.2, 0.3)))


def test_horizontal_lift_pushes_forward():
    job = catalog.load_job("5.3")
    setup = job.setup
    p = Point((0.3, 2.0, 1.5))
    lift = sub.horizontal_lift(setup, VectorFieldSpec.constant((1.0, 0.0)), p)
    push = setup.jacobian(p) @ np.asarray(lift.components)
    assert push == pytest.approx((1.0, 0.0), abs=1e-12)
