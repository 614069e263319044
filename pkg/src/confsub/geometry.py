"""Single-manifold geometry on a coordinate chart: metric, Levi-Civita
connection, curvature, and the first-order calculus operators.

Sign conventions:
    R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
    Ric(X, Y) = trace(Z -> R(Z, X)Y)
so that a space form of curvature K has Ric = (m-1) K g.

Most functions here come in two layers: a generic layer that maps
coordinate scalars (floats or jets) to scalars, so results can be fed
back through the jet pipeline, and thin wrappers with Point /
TangentVector signatures for callers that work pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as expr_mod
from .expr import eval_expr, parse_expression, parse_predicate
from .jets import EvaluationError, JetSpace, primal
from .linalg import mat_inverse


class DegenerateMetricError(ValueError):
    pass


class DependentVectorsError(ValueError):
    pass


@dataclass(frozen=True)
class Point:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))
        if not all(math.isfinite(c) for c in self.coords):
            raise ValueError("point coordinates must be finite")

    @property
    def dim(self):
        return len(self.coords)


@dataclass(frozen=True)
class TangentVector:
    components: tuple
    base: Point

    def __post_init__(self):
        object.__setattr__(self, "components",
                           tuple(float(c) for c in self.components))
        if len(self.components) != self.base.dim:
            raise ValueError("component count does not match base dimension")
        if not all(math.isfinite(c) for c in self.components):
            raise ValueError("vector components must be finite")

    def norm_inf(self):
        return max(abs(c) for c in self.components)


@dataclass(frozen=True)
class VectorFieldSpec:
    """A vector field given componentwise by expressions."""

    components: tuple  # of expression ASTs

    @classmethod
    def parse(cls, texts, coords=None):
        return cls(tuple(parse_expression(t, coords) for t in texts))

    @classmethod
    def constant(cls, values):
        return cls(tuple(expr_mod.Const(float(v)) for v in values))

    @property
    def dim(self):
        return len(self.components)


@dataclass(frozen=True)
class JetResult:
    value: float
    first: tuple
    second: tuple | None  # symmetric matrix over direction pairs


@dataclass
class Frame:
    """Orthonormal vectors at a common point with their cached Gram
    matrix (identity up to rounding)."""

    vectors: list
    gram: np.ndarray = field(default=None)


class ChartManifold:
    def __init__(self, coord_names, metric, domain=None):
        self.coord_names = list(coord_names)
        self.dim = len(self.coord_names)
        if len(metric) != self.dim or any(len(r) != self.dim for r in metric):
            raise ValueError("metric grid must be dim x dim")
        self.metric = [list(row) for row in metric]
        self.domain = domain

    @classmethod
    def from_strings(cls, coord_names, metric_rows, domain=None):
        coords = set(coord_names)
        metric = [[parse_expression(e, coords) for e in row] for row in metric_rows]
        pred = parse_predicate(domain, coords) if domain else None
        return cls(coord_names, metric, pred)

    def env(self, xs):
        return dict(zip(self.coord_names, xs))

    def metric_at(self, xs):
        env = self.env(xs)
        return [[eval_expr(e, env) for e in row] for row in self.metric]

    def contains(self, point):
        if self.domain is None:
            return True
        return bool(eval_expr(self.domain, self.env(point.coords)))

    def field(self, *component_texts):
        return VectorFieldSpec.parse(component_texts, set(self.coord_names))

    def scalar(self, text):
        return parse_expression(text, set(self.coord_names))

    def basis_vector(self, index, point):
        comps = [0.0] * self.dim
        comps[index] = 1.0
        return TangentVector(tuple(comps), point)


# ---------------------------------------------------------------------
# jet-calculus entry points
# ---------------------------------------------------------------------

def eval_with_derivatives(f, p, dirs, order=2, coord_names=None):
    """Value plus exact first (and second) directional derivatives of an
    expression at a point along the given directions."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    names = coord_names or [f"x{i + 1}" for i in range(p.dim)]
    space = JetSpace(len(dirs), order)
    direction_rows = [list(d.components) for d in dirs]
    xs = space.seed(list(p.coords), direction_rows)
    result = eval_expr(f, dict(zip(names, xs)))
    if not hasattr(result, "grad"):  # constant expression
        k = len(dirs)
        first = tuple(0.0 for _ in range(k))
        second = tuple(tuple(0.0 for _ in range(k)) for _ in range(k)) if order == 2 else None
        return JetResult(float(result), first, second)
    first = tuple(primal(g) for g in result.grad)
    second = None
    if order == 2:
        raw = [[primal(h) for h in row] for row in result.hess]
        # mixed partials commute for analytic inputs; store symmetrically
        second = tuple(tuple(0.5 * (raw[i][j] + raw[j][i])
                             for j in range(len(dirs))) for i in range(len(dirs)))
    return JetResult(primal(result), first, second)


def _coordinate_jets(xs, order=1):
    """Seed every coordinate direction at once."""
    m = len(xs)
    space = JetSpace(m, order)
    dirs = [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]
    return space.seed(list(xs), dirs)


def jacobian_at(map_exprs, coord_names, xs):
    """Rows are map components, columns coordinate partials."""
    jet_xs = _coordinate_jets(xs, order=1)
    env = dict(zip(coord_names, jet_xs))
    rows = []
    for comp in map_exprs:
        value = eval_expr(comp, env)
        if hasattr(value, "grad"):
            rows.append(list(value.grad))
        else:
            rows.append([0.0] * len(xs))
    return rows


def field_values_at(chart, spec, xs):
    env = chart.env(xs)
    return [eval_expr(c, env) for c in spec.components]


def field_fn(chart, spec):
    return lambda xs: field_values_at(chart, spec, xs)


def field_partials(fn, xs):
    """(values, partials) of a component function; partials[i][k] is the
    i-th coordinate derivative of component k."""
    jet_xs = _coordinate_jets(xs, order=1)
    comps = fn(jet_xs)
    m = len(xs)
    values, partials = [], [[None] * len(comps) for _ in range(m)]
    for k, c in enumerate(comps):
        if hasattr(c, "grad") and c.space is jet_xs[0].space:
            values.append(c.val)
            for i in range(m):
                partials[i][k] = c.grad[i]
        else:
            values.append(c)
            for i in range(m):
                partials[i][k] = 0.0
    return values, partials


def lie_bracket_at(x_fn, y_fn, xs):
    xv, dx = field_partials(x_fn, xs)
    yv, dy = field_partials(y_fn, xs)
    m = len(xs)
    return [sum(xv[i] * dy[i][k] - yv[i] * dx[i][k] for i in range(m))
            for k in range(m)]


def lie_bracket(chart, x_spec, y_spec, p):
    comps = lie_bracket_at(field_fn(chart, x_spec), field_fn(chart, y_spec),
                           list(p.coords))
    return TangentVector(tuple(primal(c) for c in comps), p)


# ---------------------------------------------------------------------
# metric and connection (generic layer)
# ---------------------------------------------------------------------

def inverse_metric_at(chart, xs):
    return mat_inverse(chart.metric_at(xs))


def metric_partials_at(chart, xs):
    """(g, dg) with dg[l][i][j] the l-th coordinate partial of g_ij."""
    jet_xs = _coordinate_jets(xs, order=1)
    gjets = chart.metric_at(jet_xs)
    m = chart.dim
    space = jet_xs[0].space
    g = [[None] * m for _ in range(m)]
    dg = [[[None] * m for _ in range(m)] for _ in range(m)]
    for i in range(m):
        for j in range(m):
            e = gjets[i][j]
            if hasattr(e, "grad") and e.space is space:
                g[i][j] = e.val
                for l in range(m):
                    dg[l][i][j] = e.grad[l]
            else:
                g[i][j] = e
                for l in range(m):
                    dg[l][i][j] = 0.0
    return g, dg


def christoffels_at(chart, xs):
    """Gamma[k][i][j] of the Levi-Civita connection."""
    g, dg = metric_partials_at(chart, xs)
    ginv = mat_inverse(g)
    m = chart.dim
    gamma = [[[None] * m for _ in range(m)] for _ in range(m)]
    for k in range(m):
        for i in range(m):
            for j in range(i, m):
                val = sum(ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])
                          for l in range(m)) * 0.5
                gamma[k][i][j] = val
                gamma[k][j][i] = val
    return gamma


def christoffel_partials_at(chart, xs):
    """(Gamma, dGamma) with dGamma[l][k][i][j] = d_l Gamma^k_ij."""
    jet_xs = _coordinate_jets(xs, order=1)
    space = jet_xs[0].space
    gam_jets = christoffels_at(chart, jet_xs)
    m = chart.dim
    gamma = [[[None] * m for _ in range(m)] for _ in range(m)]
    dgamma = [[[[None] * m for _ in range(m)] for _ in range(m)] for _ in range(m)]
    for k in range(m):
        for i in range(m):
            for j in range(m):
                e = gam_jets[k][i][j]
                if hasattr(e, "grad") and e.space is space:
                    gamma[k][i][j] = e.val
                    for l in range(m):
                        dgamma[l][k][i][j] = e.grad[l]
                else:
                    gamma[k][i][j] = e
                    for l in range(m):
                        dgamma[l][k][i][j] = 0.0
    return gamma, dgamma


def curvature_tensor_at(chart, xs):
    """Riem[l][k][i][j]: component l of R(e_i, e_j) e_k."""
    gamma, dgamma = christoffel_partials_at(chart, xs)
    m = chart.dim
    riem = [[[[None] * m for _ in range(m)] for _ in range(m)] for _ in range(m)]
    for l in range(m):
        for k in range(m):
            for i in range(m):
                for j in range(m):
                    val = dgamma[i][l][j][k] - dgamma[j][l][i][k]
                    val = val + sum(gamma[l][i][t] * gamma[t][j][k]
                                    - gamma[l][j][t] * gamma[t][i][k]
                                    for t in range(m))
                    riem[l][k][i][j] = val
    return riem


def riemann_apply(riem, xc, yc, zc):
    m = len(riem)
    out = []
    for l in range(m):
        acc = 0.0
        for i in range(m):
            if xc[i] == 0.0 and isinstance(xc[i], float):
                continue
            for j in range(m):
                for k in range(m):
                    acc = acc + riem[l][k][i][j] * xc[i] * yc[j] * zc[k]
        out.append(acc)
    return out


def ricci_at(chart, xs, xc, yc, riem=None):
    """Ric(X, Y) = trace(Z -> R(Z, X)Y) at the point."""
    if riem is None:
        riem = curvature_tensor_at(chart, xs)
    m = chart.dim
    acc = 0.0
    for j in range(m):
        for k in range(m):
            coeff = sum(riem[i][k][i][j] for i in range(m))
            acc = acc + coeff * xc[j] * yc[k]
    return acc


def ricci_matrix_at(chart, xs):
    riem = curvature_tensor_at(chart, xs)
    m = chart.dim
    return [[sum(riem[i][k][i][j] for i in range(m)) for k in range(m)]
            for j in range(m)]


def scalar_curvature_at(chart, xs):
    ric = ricci_matrix_at(chart, xs)
    ginv = inverse_metric_at(chart, xs)
    m = chart.dim
    return sum(ginv[j][k] * ric[j][k] for j in range(m) for k in range(m))


def inner_at(g, u, v):
    m = len(g)
    return sum(g[i][j] * u[i] * v[j] for i in range(m) for j in range(m))


def cov_deriv_along_at(chart, xs, x_comps, w_fn, gamma=None):
    """(nabla_X W)^k with X given pointwise and W a component function."""
    if gamma is None:
        gamma = christoffels_at(chart, xs)
    wv, dw = field_partials(w_fn, xs)
    m = chart.dim
    return [sum(x_comps[i] * dw[i][k] for i in range(m))
            + sum(gamma[k][i][j] * x_comps[i] * wv[j]
                  for i in range(m) for j in range(m))
            for k in range(m)]


def gradient_at(chart, f_fn, xs):
    jet_xs = _coordinate_jets(xs, order=1)
    value = f_fn(jet_xs)
    m = chart.dim
    if hasattr(value, "grad") and value.space is jet_xs[0].space:
        df = list(value.grad)
    else:
        df = [0.0] * m
    ginv = inverse_metric_at(chart, xs)
    return [sum(ginv[k][j] * df[j] for j in range(m)) for k in range(m)]


def divergence_at(chart, x_fn, xs):
    gamma = christoffels_at(chart, xs)
    xv, dx = field_partials(x_fn, xs)
    m = chart.dim
    return (sum(dx[i][i] for i in range(m))
            + sum(gamma[i][i][k] * xv[k] for i in range(m) for k in range(m)))


def hessian_matrix_at(chart, f_fn, xs):
    """Hess f in coordinates: d_i d_j f - Gamma^k_ij d_k f."""
    m = chart.dim
    space = JetSpace(m, order=2)
    dirs = [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]
    jet_xs = space.seed(list(xs), dirs)
    value = f_fn(jet_xs)
    if hasattr(value, "grad") and value.space is space:
        df = list(value.grad)
        d2f = [[value.hess[i][j] for j in range(m)] for i in range(m)]
    else:
        df = [0.0] * m
        d2f = [[0.0] * m for _ in range(m)]
    gamma = christoffels_at(chart, xs)
    return [[d2f[i][j] - sum(gamma[k][i][j] * df[k] for k in range(m))
             for j in range(m)] for i in range(m)]


def laplacian_at(chart, f_fn, xs):
    hess = hessian_matrix_at(chart, f_fn, xs)
    ginv = inverse_metric_at(chart, xs)
    m = chart.dim
    return sum(ginv[i][j] * hess[i][j] for i in range(m) for j in range(m))


def lie_derivative_metric_at(chart, xi_fn, xc, yc, xs):
    """(L_xi g)(X, Y) = g(nabla_X xi, Y) + g(nabla_Y xi, X)."""
    g = chart.metric_at(xs)
    gamma = christoffels_at(chart, xs)
    dx_xi = cov_deriv_along_at(chart, xs, xc, xi_fn, gamma)
    dy_xi = cov_deriv_along_at(chart, xs, yc, xi_fn, gamma)
    return inner_at(g, dx_xi, yc) + inner_at(g, dy_xi, xc)


# ---------------------------------------------------------------------
# pointwise wrappers
# ---------------------------------------------------------------------

def metric_matrix(chart, p):
    if not chart.contains(p):
        raise EvaluationError(f"point {p.coords} outside chart domain")
    g = np.array([[primal(v) for v in row] for row in chart.metric_at(p.coords)])
    try:
        np.linalg.cholesky(0.5 * (g + g.T))
    except np.linalg.LinAlgError:
        raise DegenerateMetricError(
            f"metric is not positive definite at {p.coords}") from None
    return g


def christoffel_symbols(chart, p):
    metric_matrix(chart, p)
    gamma = christoffels_at(chart, p.coords)
    m = chart.dim
    out = np.empty((m, m, m))
    for k in range(m):
        for i in range(m):
            for j in range(m):
                out[k, i, j] = primal(gamma[k][i][j])
    return out


def covariant_derivative(chart, x_spec, y_spec, p):
    xs = list(p.coords)
    xv = [primal(v) for v in field_values_at(chart, x_spec, xs)]
    comps = cov_deriv_along_at(chart, xs, xv, field_fn(chart, y_spec))
    return TangentVector(tuple(primal(c) for c in comps), p)


def riemann_tensor(chart, x_spec, y_spec, z_spec, p):
    xs = list(p.coords)
    riem = curvature_tensor_at(chart, xs)
    xc = [primal(v) for v in field_values_at(chart, x_spec, xs)]
    yc = [primal(v) for v in field_values_at(chart, y_spec, xs)]
    zc = [primal(v) for v in field_values_at(chart, z_spec, xs)]
    comps = riemann_apply(riem, xc, yc, zc)
    return TangentVector(tuple(primal(c) for c in comps), p)


def ricci(chart, x_spec, y_spec, p):
    xs = list(p.coords)
    xc = [primal(v) for v in field_values_at(chart, x_spec, xs)]
    yc = [primal(v) for v in field_values_at(chart, y_spec, xs)]
    return primal(ricci_at(chart, xs, xc, yc))


def scalar_curvature(chart, p):
    return primal(scalar_curvature_at(chart, p.coords))


def gradient(chart, f, p):
    f_fn = (lambda xs: eval_expr(f, chart.env(xs))) if not callable(f) else f
    comps = gradient_at(chart, f_fn, list(p.coords))
    return TangentVector(tuple(primal(c) for c in comps), p)


def divergence(chart, x_spec, p):
    return primal(divergence_at(chart, field_fn(chart, x_spec), list(p.coords)))


def hessian(chart, f, x_spec, y_spec, p):
    f_fn = (lambda xs: eval_expr(f, chart.env(xs))) if not callable(f) else f
    xs = list(p.coords)
    hess = hessian_matrix_at(chart, f_fn, xs)
    xc = [primal(v) for v in field_values_at(chart, x_spec, xs)]
    yc = [primal(v) for v in field_values_at(chart, y_spec, xs)]
    m = chart.dim
    return primal(sum(hess[i][j] * xc[i] * yc[j]
                      for i in range(m) for j in range(m)))


def laplacian(chart, f, p):
    f_fn = (lambda xs: eval_expr(f, chart.env(xs))) if not callable(f) else f
    return primal(laplacian_at(chart, f_fn, list(p.coords)))


def lie_derivative_metric(chart, xi_spec, x_spec, y_spec, p):
    xs = list(p.coords)
    xc = [primal(v) for v in field_values_at(chart, x_spec, xs)]
    yc = [primal(v) for v in field_values_at(chart, y_spec, xs)]
    return primal(lie_derivative_metric_at(chart, field_fn(chart, xi_spec),
                                           xc, yc, xs))


def orthonormalize_components(gmat, vectors, tol=1e-10):
    """Stabilized Gram-Schmidt against the metric inner product, columns
    processed in input order for determinism."""
    g = np.asarray(gmat, dtype=float)
    out = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for _ in range(2):  # re-orthogonalization pass for stability
            for u in out:
                w = w - (u @ g @ w) * u
        norm_sq = w @ g @ w
        if norm_sq <= tol * max(1.0, float(np.max(np.abs(g)))):
            raise DependentVectorsError("input vectors are linearly dependent")
        out.append(w / math.sqrt(norm_sq))
    return out


def orthonormalize(chart, p, vectors):
    g = metric_matrix(chart, p)
    comps = orthonormalize_components(g, [list(v.components) for v in vectors])
    vecs = [TangentVector(tuple(map(float, w)), p) for w in comps]
    gram = np.array([[w1 @ g @ w2 for w2 in comps] for w1 in comps])
    return Frame(vectors=vecs, gram=gram)


def coordinate_frame(chart, p):
    """Orthonormal frame from the coordinate basis seed."""
    seeds = [chart.basis_vector(i, p) for i in range(chart.dim)]
    return orthonormalize(chart, p, seeds)
