"""Structure attached to a map F: (M, g) -> (N, h): projectors,
dilation, horizontal lifts, the fundamental tensors T and A with their
covariant derivatives, mean curvatures, second fundamental form, tension
field and structural-property detection.

The generic layer again maps coordinate scalars (floats or jets) to
scalars so every derived field can be pushed back through the jet
pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .expr import eval_expr, parse_expression
from .geometry import (Point, TangentVector, VectorFieldSpec,
                       cov_deriv_along_at, field_fn, gradient_at,
                       jacobian_at, orthonormalize_components)
from .jets import primal
from .linalg import (SingularMatrixError, identity, mat_inverse, mat_mul,
                     mat_vec, null_space_basis, transpose)


class NotASubmersionError(ValueError):
    pass


class NotBasicFieldError(ValueError):
    """Raised when an operation needing the base connection is handed a
    horizontal field that is not the lift of a declared base field."""


@dataclass(frozen=True)
class DilationResult:
    lambda_sq: float
    anisotropy: float

    @property
    def dilation(self):
        return math.sqrt(self.lambda_sq)


@dataclass(frozen=True)
class PropertyCheck:
    holds: bool
    max_violation: float


@dataclass(frozen=True)
class StructureFlags:
    fibers_totally_geodesic: PropertyCheck
    fibers_totally_umbilical: PropertyCheck
    horizontal_integrable: PropertyCheck
    horizontal_totally_geodesic: PropertyCheck
    homothetic: PropertyCheck
    lambda_vertical_constant: PropertyCheck
    map_totally_geodesic: PropertyCheck

    def as_dict(self):
        return {name: getattr(self, name) for name in (
            "fibers_totally_geodesic", "fibers_totally_umbilical",
            "horizontal_integrable", "horizontal_totally_geodesic",
            "homothetic", "lambda_vertical_constant", "map_totally_geodesic")}


class SubmersionSetup:
    def __init__(self, total, base, map_components, declared_dilation=None):
        if base.dim >= total.dim:
            raise ValueError("base dimension must be smaller than total")
        if len(map_components) != base.dim:
            raise ValueError("one map component per base coordinate required")
        self.total = total
        self.base = base
        self.map_components = list(map_components)
        self.declared_dilation = declared_dilation  # optional expression

    @classmethod
    def from_strings(cls, total, base, map_texts, declared_dilation=None):
        coords = set(total.coord_names)
        comps = [parse_expression(t, coords) for t in map_texts]
        lam = parse_expression(declared_dilation, coords) if declared_dilation else None
        return cls(total, base, comps, lam)

    @property
    def m(self):
        return self.total.dim

    @property
    def n(self):
        return self.base.dim

    # -- generic layer -------------------------------------------------

    def map_point_at(self, xs):
        env = self.total.env(xs)
        return [eval_expr(c, env) for c in self.map_components]

    def map_point(self, p):
        return Point(tuple(primal(c) for c in self.map_point_at(p.coords)))

    def jacobian_at(self, xs):
        return jacobian_at(self.map_components, self.total.coord_names, xs)

    def jacobian(self, p):
        jac = self.jacobian_at(p.coords)
        return np.array([[primal(v) for v in row] for row in jac])

    def _core_matrices_at(self, xs):
        """(g, ginv, J, K_inv, lift_matrix) with K = J ginv J^T."""
        g = self.total.metric_at(xs)
        ginv = mat_inverse(g)
        jac = self.jacobian_at(xs)
        jt = transpose(jac)
        k = mat_mul(jac, mat_mul(ginv, jt))
        try:
            k_inv = mat_inverse(k)
        except SingularMatrixError:
            raise NotASubmersionError(
                f"map is rank deficient at {tuple(primal(x) for x in xs)}") from None
        lift = mat_mul(ginv, mat_mul(jt, k_inv))  # m x n
        return g, ginv, jac, k_inv, lift

    def projectors_at(self, xs):
        """(vertical, horizontal) projector matrices."""
        _, _, jac, _, lift = self._core_matrices_at(xs)
        ph = mat_mul(lift, jac)
        m = self.m
        pv = [[(1.0 if i == j else 0.0) - ph[i][j] for j in range(m)]
              for i in range(m)]
        return pv, ph

    def lambda_sq_at(self, xs):
        """Squared dilation as the frame-averaged conformality ratio."""
        _, ginv, jac, _, _ = self._core_matrices_at(xs)
        k = mat_mul(jac, mat_mul(ginv, transpose(jac)))
        h = self.base.metric_at(self.map_point_at(xs))
        n = self.n
        return sum(h[a][b] * k[a][b] for a in range(n) for b in range(n)) / n

    def inv_lambda_sq_fn(self):
        return lambda xs: 1.0 / self.lambda_sq_at(xs)

    def horizontal_lift_at(self, xs, base_comps):
        _, _, _, _, lift = self._core_matrices_at(xs)
        return mat_vec(lift, base_comps)

    def basic_field_fn(self, base_spec):
        """Horizontal lift of a base vector field, as a total-chart
        component function."""
        def fn(xs):
            ys = self.map_point_at(xs)
            comps = [eval_expr(c, self.base.env(ys)) for c in base_spec.components]
            return self.horizontal_lift_at(xs, comps)
        return fn

    def vertical_project_fn(self, fn):
        def proj(xs):
            pv, _ = self.projectors_at(xs)
            return mat_vec(pv, fn(xs))
        return proj

    def horizontal_project_fn(self, fn):
        def proj(xs):
            _, ph = self.projectors_at(xs)
            return mat_vec(ph, fn(xs))
        return proj

    # -- frames (numeric) ----------------------------------------------

    def vertical_frame(self, p):
        jac = self.jacobian(p)
        basis = null_space_basis(jac.tolist())
        if len(basis) != self.m - self.n:
            raise NotASubmersionError(f"map is rank deficient at {p.coords}")
        g = geo.metric_matrix(self.total, p)
        return orthonormalize_components(g, basis)

    def horizontal_frame(self, p):
        xs = list(p.coords)
        _, _, _, _, lift = self._core_matrices_at(xs)
        cols = [[primal(lift[i][a]) for i in range(self.m)] for a in range(self.n)]
        g = geo.metric_matrix(self.total, p)
        return orthonormalize_components(g, cols)


# ---------------------------------------------------------------------
# fundamental tensors
# ---------------------------------------------------------------------

def oneill_T_at(setup, xs, e_fn, ep_fn):
    """T_E E' = H nabla_{vE} vE' + v nabla_{vE} H E'."""
    chart = setup.total
    pv, ph = setup.projectors_at(xs)
    gamma = geo.christoffels_at(chart, xs)
    ve = mat_vec(pv, e_fn(xs))
    d1 = cov_deriv_along_at(chart, xs, ve, setup.vertical_project_fn(ep_fn), gamma)
    d2 = cov_deriv_along_at(chart, xs, ve, setup.horizontal_project_fn(ep_fn), gamma)
    return [a + b for a, b in zip(mat_vec(ph, d1), mat_vec(pv, d2))]


def oneill_A_at(setup, xs, e_fn, ep_fn):
    """A_E E' = H nabla_{HE} vE' + v nabla_{HE} H E'."""
    chart = setup.total
    pv, ph = setup.projectors_at(xs)
    gamma = geo.christoffels_at(chart, xs)
    he = mat_vec(ph, e_fn(xs))
    d1 = cov_deriv_along_at(chart, xs, he, setup.vertical_project_fn(ep_fn), gamma)
    d2 = cov_deriv_along_at(chart, xs, he, setup.horizontal_project_fn(ep_fn), gamma)
    return [a + b for a, b in zip(mat_vec(ph, d1), mat_vec(pv, d2))]


def _const_fn(comps):
    vals = list(comps)
    return lambda xs: vals


def oneill_T_vectors(setup, xs, u_comps, v_comps):
    """T with pointwise arguments (constant extensions; T is a tensor)."""
    return oneill_T_at(setup, xs, _const_fn(u_comps), _const_fn(v_comps))


def oneill_A_vectors(setup, xs, x_comps, y_comps):
    return oneill_A_at(setup, xs, _const_fn(x_comps), _const_fn(y_comps))


def cov_deriv_T_at(setup, xs, e_comps, u_fn, ep_fn):
    """(nabla_E T)_U E' = nabla_E (T_U E') - T_{v nabla_E U} E'
    - T_U (nabla_E E'), with the T field differentiated exactly."""
    chart = setup.total
    gamma = geo.christoffels_at(chart, xs)
    t_field = lambda zs: oneill_T_at(setup, zs, u_fn, ep_fn)
    term1 = cov_deriv_along_at(chart, xs, e_comps, t_field, gamma)
    pv, _ = setup.projectors_at(xs)
    de_u = mat_vec(pv, cov_deriv_along_at(chart, xs, e_comps, u_fn, gamma))
    term2 = oneill_T_at(setup, xs, _const_fn(de_u), ep_fn)
    de_ep = cov_deriv_along_at(chart, xs, e_comps, ep_fn, gamma)
    term3 = oneill_T_at(setup, xs, u_fn, _const_fn(de_ep))
    return [a - b - c for a, b, c in zip(term1, term2, term3)]


def cov_deriv_A_at(setup, xs, e_comps, x_fn, ep_fn):
    """(nabla_E A)_X E' with the horizontal slot projector-corrected."""
    chart = setup.total
    gamma = geo.christoffels_at(chart, xs)
    a_field = lambda zs: oneill_A_at(setup, zs, x_fn, ep_fn)
    term1 = cov_deriv_along_at(chart, xs, e_comps, a_field, gamma)
    _, ph = setup.projectors_at(xs)
    de_x = mat_vec(ph, cov_deriv_along_at(chart, xs, e_comps, x_fn, gamma))
    term2 = oneill_A_at(setup, xs, _const_fn(de_x), ep_fn)
    de_ep = cov_deriv_along_at(chart, xs, e_comps, ep_fn, gamma)
    term3 = oneill_A_at(setup, xs, x_fn, _const_fn(de_ep))
    return [a - b - c for a, b, c in zip(term1, term2, term3)]


# ---------------------------------------------------------------------
# traces over the distributions
# ---------------------------------------------------------------------

def _distribution_weight(setup, xs, vertical):
    """Sum over a g-orthonormal basis of the distribution of U_i U_i^T,
    which equals (projector) * g^{-1}."""
    g = setup.total.metric_at(xs)
    ginv = mat_inverse(g)
    pv, ph = setup.projectors_at(xs)
    proj = pv if vertical else ph
    return mat_mul(proj, ginv)


def vertical_trace_T_at(setup, xs):
    """Sum of T(U_i, U_i) over an orthonormal vertical frame."""
    m = setup.m
    w = _distribution_weight(setup, xs, vertical=True)
    basis = identity(m)
    out = [0.0] * m
    for a in range(m):
        for b in range(m):
            if isinstance(w[a][b], float) and w[a][b] == 0.0:
                continue
            t = oneill_T_vectors(setup, xs, basis[a], basis[b])
            out = [o + w[a][b] * c for o, c in zip(out, t)]
    return out


def horizontal_trace_A_at(setup, xs):
    """Sum of A(X_j, X_j) over an orthonormal horizontal frame."""
    m = setup.m
    w = _distribution_weight(setup, xs, vertical=False)
    basis = identity(m)
    out = [0.0] * m
    for a in range(m):
        for b in range(m):
            if isinstance(w[a][b], float) and w[a][b] == 0.0:
                continue
            t = oneill_A_vectors(setup, xs, basis[a], basis[b])
            out = [o + w[a][b] * c for o, c in zip(out, t)]
    return out


def mean_curvature_at(setup, xs):
    """Fiber mean curvature H with the umbilical normalization
    T_U V = g(U, V) H, i.e. H = trace_v(T) / (m - n)."""
    trace = vertical_trace_T_at(setup, xs)
    return [c / (setup.m - setup.n) for c in trace]


def horizontal_mean_curvature_formula_at(setup, xs):
    """H' from the dilation: -(lambda^2 / 2) v grad(1 / lambda^2)."""
    grad = gradient_at(setup.total, setup.inv_lambda_sq_fn(), xs)
    pv, _ = setup.projectors_at(xs)
    vgrad = mat_vec(pv, grad)
    lam_sq = setup.lambda_sq_at(xs)
    return [-0.5 * lam_sq * c for c in vgrad]


def horizontal_mean_curvature_via_A_at(setup, xs):
    trace = horizontal_trace_A_at(setup, xs)
    return [c / setup.n for c in trace]


# ---------------------------------------------------------------------
# pointwise wrappers
# ---------------------------------------------------------------------

def vertical_horizontal_split(setup, p, v):
    xs = list(p.coords)
    pv, ph = setup.projectors_at(xs)
    vert = [primal(c) for c in mat_vec(pv, list(v.components))]
    horiz = [primal(c) for c in mat_vec(ph, list(v.components))]
    return (TangentVector(tuple(vert), p), TangentVector(tuple(horiz), p))


def dilation(setup, p):
    xs = list(p.coords)
    lam_sq = primal(setup.lambda_sq_at(xs))
    frame = setup.horizontal_frame(p)
    jac = setup.jacobian(p)
    h = geo.metric_matrix(setup.base, setup.map_point(p))
    aniso = 0.0
    for i, xi in enumerate(frame):
        for j, xj in enumerate(frame):
            push = float((jac @ xi) @ h @ (jac @ xj))
            expect = lam_sq if i == j else 0.0
            aniso = max(aniso, abs(push - expect))
    return DilationResult(lambda_sq=lam_sq, anisotropy=aniso)


def horizontal_lift(setup, base_spec, p):
    xs = list(p.coords)
    ys = setup.map_point_at(xs)
    comps = [eval_expr(c, setup.base.env(ys)) for c in base_spec.components]
    lifted = setup.horizontal_lift_at(xs, comps)
    return TangentVector(tuple(primal(c) for c in lifted), p)


def oneill_T(setup, p, e_spec, ep_spec):
    comps = oneill_T_at(setup, list(p.coords),
                        field_fn(setup.total, e_spec),
                        field_fn(setup.total, ep_spec))
    return TangentVector(tuple(primal(c) for c in comps), p)


def oneill_A(setup, p, e_spec, ep_spec):
    comps = oneill_A_at(setup, list(p.coords),
                        field_fn(setup.total, e_spec),
                        field_fn(setup.total, ep_spec))
    return TangentVector(tuple(primal(c) for c in comps), p)


def cov_deriv_T(setup, p, e_spec, u_spec, ep_spec):
    xs = list(p.coords)
    e_comps = [primal(v) for v in geo.field_values_at(setup.total, e_spec, xs)]
    comps = cov_deriv_T_at(setup, xs, e_comps,
                           field_fn(setup.total, u_spec),
                           field_fn(setup.total, ep_spec))
    return TangentVector(tuple(primal(c) for c in comps), p)


def cov_deriv_A(setup, p, e_spec, x_spec, ep_spec):
    xs = list(p.coords)
    e_comps = [primal(v) for v in geo.field_values_at(setup.total, e_spec, xs)]
    comps = cov_deriv_A_at(setup, xs, e_comps,
                           field_fn(setup.total, x_spec),
                           field_fn(setup.total, ep_spec))
    return TangentVector(tuple(primal(c) for c in comps), p)


def mean_curvature(setup, p):
    comps = mean_curvature_at(setup, list(p.coords))
    return TangentVector(tuple(primal(c) for c in comps), p)


def vertical_trace_T(setup, p):
    """Unnormalized vertical trace of T, exposed alongside H."""
    comps = vertical_trace_T_at(setup, list(p.coords))
    return TangentVector(tuple(primal(c) for c in comps), p)


@dataclass(frozen=True)
class HorizontalMeanCurvature:
    via_A: TangentVector
    via_formula: TangentVector
    residual: float
    horizontal_integrable: bool


def horizontal_mean_curvature(setup, p, integrability_tol=1e-8):
    xs = list(p.coords)
    via_a = [primal(c) for c in horizontal_mean_curvature_via_A_at(setup, xs)]
    via_f = [primal(c) for c in horizontal_mean_curvature_formula_at(setup, xs)]
    g = geo.metric_matrix(setup.total, p)
    diff = np.array(via_a) - np.array(via_f)
    residual = math.sqrt(max(0.0, float(diff @ g @ diff)))
    integ = _horizontal_integrability_violation(setup, p) <= integrability_tol
    return HorizontalMeanCurvature(
        via_A=TangentVector(tuple(via_a), p),
        via_formula=TangentVector(tuple(via_f), p),
        residual=residual,
        horizontal_integrable=integ)


def second_fundamental_form(setup, xt_spec, yt_spec, p):
    """(nabla F_*)(X, Y) for X, Y the horizontal lifts of base fields."""
    xs = list(p.coords)
    ys = [primal(c) for c in setup.map_point_at(xs)]
    q = Point(tuple(ys))
    if not setup.base.contains(q):
        raise ValueError(f"image point {q.coords} outside base chart domain")
    # base-side connection term
    xt_vals = [primal(v) for v in geo.field_values_at(setup.base, xt_spec, ys)]
    nabla_n = cov_deriv_along_at(setup.base, ys, xt_vals,
                                 field_fn(setup.base, yt_spec))
    # total-side term pushed forward
    x_fn = setup.basic_field_fn(xt_spec)
    y_fn = setup.basic_field_fn(yt_spec)
    x_vals = [primal(v) for v in x_fn(xs)]
    nabla_m = cov_deriv_along_at(setup.total, xs, x_vals, y_fn)
    jac = setup.jacobian(p)
    pushed = jac @ np.array([primal(c) for c in nabla_m])
    comps = [primal(a) - float(b) for a, b in zip(nabla_n, pushed)]
    return TangentVector(tuple(comps), q)


def tension_field(setup, p):
    """(n-2)(lambda^2/2) F_*(H grad(1/lambda^2)) - (m-n) F_*(H)."""
    xs = list(p.coords)
    lam_sq = primal(setup.lambda_sq_at(xs))
    grad = gradient_at(setup.total, setup.inv_lambda_sq_fn(), xs)
    _, ph = setup.projectors_at(xs)
    hgrad = [primal(c) for c in mat_vec(ph, grad)]
    h_vec = [primal(c) for c in mean_curvature_at(setup, xs)]
    jac = setup.jacobian(p)
    first = (setup.n - 2) * 0.5 * lam_sq * (jac @ np.array(hgrad))
    second = (setup.m - setup.n) * (jac @ np.array(h_vec))
    q = setup.map_point(p)
    return TangentVector(tuple(float(a - b) for a, b in zip(first, second)), q)


def fiber_ricci(setup, u_spec, v_spec, p):
    """Intrinsic fiber Ricci extracted from the ambient curvature and T
    via the Gauss relation."""
    xs = list(p.coords)
    uc = [primal(v) for v in geo.field_values_at(setup.total, u_spec, xs)]
    vc = [primal(v) for v in geo.field_values_at(setup.total, v_spec, xs)]
    return fiber_ricci_vectors(setup, p, uc, vc)


def fiber_ricci_vectors(setup, p, uc, vc):
    xs = list(p.coords)
    frame = setup.vertical_frame(p)
    if len(frame) <= 1:
        return 0.0
    g = geo.metric_matrix(setup.total, p)
    riem = geo.curvature_tensor_at(setup.total, xs)
    acc = 0.0
    t_u_v = np.array([primal(c) for c in oneill_T_vectors(setup, xs, uc, vc)])
    for ui in frame:
        r = geo.riemann_apply(riem, list(ui), list(uc), list(vc))
        rvec = np.array([primal(c) for c in r])
        t_ui_v = np.array([primal(c) for c in oneill_T_vectors(setup, xs, list(ui), vc)])
        t_u_ui = np.array([primal(c) for c in oneill_T_vectors(setup, xs, uc, list(ui))])
        t_ui_ui = np.array([primal(c) for c in oneill_T_vectors(setup, xs, list(ui), list(ui))])
        acc += float(rvec @ g @ ui)
        acc -= float(t_ui_v @ g @ t_u_ui)
        acc += float(t_u_v @ g @ t_ui_ui)
    return acc


# ---------------------------------------------------------------------
# fiber slice chart (intrinsic fiber geometry)
# ---------------------------------------------------------------------

class FiberSliceChart:
    """Intrinsic chart on the fiber through a point, available when the
    vertical distribution is spanned by coordinate axes (the map
    components do not involve the fiber coordinates)."""

    def __init__(self, setup, vertical_indices, anchor):
        self.setup = setup
        self.vertical_indices = list(vertical_indices)
        self.anchor = list(anchor)
        self.dim = len(self.vertical_indices)

    def splice(self, xs_fiber):
        full = [c for c in self.anchor]
        for idx, val in zip(self.vertical_indices, xs_fiber):
            full[idx] = val
        return full

    def metric_at(self, xs_fiber):
        full = self.splice(xs_fiber)
        g = self.setup.total.metric_at(full)
        return [[g[i][j] for j in self.vertical_indices]
                for i in self.vertical_indices]

    def fiber_coords(self, p):
        return [p.coords[i] for i in self.vertical_indices]


def vertical_coordinate_indices(setup, points, tol=1e-12):
    """Indices of coordinates spanning the vertical distribution, or None
    when the kernel is not coordinate-aligned at the sampled points."""
    m, n = setup.m, setup.n
    zero_cols = None
    for p in points:
        jac = setup.jacobian(p)
        scale = max(1.0, float(np.max(np.abs(jac))))
        cols = {i for i in range(m)
                if float(np.max(np.abs(jac[:, i]))) <= tol * scale}
        zero_cols = cols if zero_cols is None else (zero_cols & cols)
    if zero_cols is not None and len(zero_cols) == m - n:
        return sorted(zero_cols)
    return None


def fiber_slice_chart(setup, p, points_hint=None):
    pts = points_hint or [p]
    idx = vertical_coordinate_indices(setup, pts)
    if idx is None:
        return None
    return FiberSliceChart(setup, idx, list(p.coords))


def intrinsic_fiber_scalar_curvature(setup, p):
    """Scalar curvature of the fiber through p computed on the fiber's
    own chart; 0 for one-dimensional fibers."""
    if setup.m - setup.n == 1:
        return 0.0
    chart = fiber_slice_chart(setup, p)
    if chart is None:
        raise NotASubmersionError(
            "fiber chart unavailable: vertical distribution is not "
            "coordinate-aligned")
    return primal(geo.scalar_curvature_at(chart, chart.fiber_coords(p)))


# ---------------------------------------------------------------------
# structural-property detection
# ---------------------------------------------------------------------

def _gnorm(g, v):
    arr = np.array([primal(c) for c in v])
    return math.sqrt(max(0.0, float(arr @ g @ arr)))


def _horizontal_integrability_violation(setup, p):
    """sup |v[X_a, X_b]| over lifted base coordinate fields, normalized
    to unit horizontal vectors."""
    xs = list(p.coords)
    g = geo.metric_matrix(setup.total, p)
    n = setup.n
    worst = 0.0
    lifts = [setup.basic_field_fn(VectorFieldSpec.constant(
        [1.0 if b == a else 0.0 for b in range(n)])) for a in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            bracket = geo.lie_bracket_at(lifts[a], lifts[b], xs)
            pv, _ = setup.projectors_at(xs)
            vert = mat_vec(pv, bracket)
            scale = max(_gnorm(g, lifts[a](xs)) * _gnorm(g, lifts[b](xs)), 1e-30)
            worst = max(worst, _gnorm(g, vert) / scale)
    return worst


def structure_flags(setup, points, tol=1e-8):
    sup_t = 0.0
    sup_umb = 0.0
    sup_integrable = 0.0
    sup_a = 0.0
    sup_hgrad = 0.0
    sup_vgrad = 0.0
    sup_sff = 0.0
    n = setup.n
    base_coord_fields = [VectorFieldSpec.constant(
        [1.0 if b == a else 0.0 for b in range(n)]) for a in range(n)]
    for p in points:
        xs = list(p.coords)
        g = geo.metric_matrix(setup.total, p)
        vframe = setup.vertical_frame(p)
        hframe = setup.horizontal_frame(p)
        h_vec = [primal(c) for c in mean_curvature_at(setup, xs)]
        for i, ui in enumerate(vframe):
            for j, uj in enumerate(vframe):
                if j < i:
                    continue
                t = [primal(c) for c in oneill_T_vectors(setup, xs, list(ui), list(uj))]
                sup_t = max(sup_t, _gnorm(g, t))
                guv = float(np.array(ui) @ g @ np.array(uj))
                umb = [a - guv * b for a, b in zip(t, h_vec)]
                sup_umb = max(sup_umb, _gnorm(g, umb))
        for xi in hframe:
            for xj in hframe:
                a = [primal(c) for c in oneill_A_vectors(setup, xs, list(xi), list(xj))]
                sup_a = max(sup_a, _gnorm(g, a))
        sup_integrable = max(sup_integrable, _horizontal_integrability_violation(setup, p))
        lam_sq = primal(setup.lambda_sq_at(xs))
        grad_inv = gradient_at(setup.total, setup.inv_lambda_sq_fn(), xs)
        # grad(lambda) = -(lambda^3 / 2) grad(1/lambda^2)
        lam = math.sqrt(lam_sq)
        grad_lam = [-0.5 * lam ** 3 * primal(c) for c in grad_inv]
        pv, ph = setup.projectors_at(xs)
        sup_hgrad = max(sup_hgrad, _gnorm(g, mat_vec(
            [[primal(v) for v in row] for row in ph], grad_lam)))
        sup_vgrad = max(sup_vgrad, _gnorm(g, mat_vec(
            [[primal(v) for v in row] for row in pv], grad_lam)))
        hbase = geo.metric_matrix(setup.base, setup.map_point(p))
        for xt in base_coord_fields:
            for yt in base_coord_fields:
                sff = second_fundamental_form(setup, xt, yt, p)
                sup_sff = max(sup_sff, _gnorm(hbase, list(sff.components)))
    def check(v):
        return PropertyCheck(holds=v <= tol, max_violation=v)
    return StructureFlags(
        fibers_totally_geodesic=check(sup_t),
        fibers_totally_umbilical=check(sup_umb),
        horizontal_integrable=check(sup_integrable),
        horizontal_totally_geodesic=check(sup_a),
        homothetic=check(sup_hgrad),
        lambda_vertical_constant=check(sup_vgrad),
        map_totally_geodesic=check(max(sup_t, sup_a, sup_hgrad, sup_sff)),
    )
