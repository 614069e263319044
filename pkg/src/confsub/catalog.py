"""Built-in example catalog: four reference conformal submersions with
their published expected values, runnable as a regression suite.

Every expected value carries a provenance marker.  ``paper-printed``
values are transcribed verbatim from the source write-up; when the
intrinsic computation contradicts one, the comparison is reported as
``paper-divergent`` (with both numbers side by side), never silently
fixed and never marked fail.  ``derived-oracle`` values are independent
recomputations and a mismatch there is a genuine failure.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import submersion as sub
from .expr import eval_expr, parse_expression
from .jets import primal
from .manifest import parse_manifest

EXAMPLE_IDS = ("5.1", "5.2", "5.3", "5.4")

_MANIFEST_FILES = {
    "5.1": "example_5_1.cfsm",
    "5.2": "example_5_2.cfsm",
    "5.3": "example_5_3.cfsm",
    "5.4": "example_5_4.cfsm",
}


@dataclass
class ExpectedValues:
    christoffels: dict  # (k, i, j) -> expression text; absent means 0
    dilation: str  # expression for lambda^2, paper-printed
    oneill_values: list  # (name, kind, args, component expression texts, provenance)
    ricci_values: dict  # (i, j) -> (printed text, oracle text)
    structure: dict  # flag name -> expected bool, paper-printed prose
    mu_note: str = ""


@dataclass
class ComparisonRow:
    name: str
    provenance: str  # paper-printed | derived-oracle
    expected: float
    computed: float
    residual: float
    verdict: str  # pass | fail | paper-divergent
    point: tuple = None
    note: str = ""


@dataclass
class ExampleReport:
    example_id: str
    rows: list
    discrepancies: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    note: str = ""


class UnknownExampleError(ValueError):
    pass


def _manifest_text(example_id):
    if example_id not in _MANIFEST_FILES:
        raise UnknownExampleError(f"unknown example id {example_id!r}")
    ref = importlib.resources.files("confsub") / "manifests" / _MANIFEST_FILES[example_id]
    return ref.read_text(encoding="utf-8")


def load_job(example_id):
    """The example's shipped manifest, parsed into a full job."""
    return parse_manifest(_manifest_text(example_id))


def load_example(example_id):
    """(setup, expected values) for a catalog example."""
    job = load_job(example_id)
    return job.setup, _EXPECTED[example_id]


def default_points(example_id):
    """Fixed published point lists (>= 10 per example, no seed needed)."""
    if example_id == "5.1":
        return [geo.Point(c) for c in
                [(0.0, 0.0), (1.0, 0.5), (-1.0, 1.0), (0.5, 0.75),
                 (-0.5, -0.75), (0.5, -0.75), (-0.5, 0.75), (2.0, -0.5),
                 (-2.0, 0.25), (1.5, 1.25)]]
    if example_id == "5.2":
        return [geo.Point(c) for c in
                [(0.5, 0.0), (1.0, 1.0), (-1.0, 0.5), (0.25, -0.5),
                 (-0.25, 0.75), (0.75, 2.0), (-0.75, -1.0), (1.5, 0.25),
                 (-1.5, -0.25), (2.0, 0.5)]]
    if example_id == "5.3":
        return [geo.Point((x1, x2, x3))
                for x3 in (1.5, 2.0, 3.0)
                for (x1, x2) in ((0.0, 1.5), (1.0, 2.0), (0.5, 2.5), (-1.0, 1.8))]
    if example_id == "5.4":
        return [geo.Point(c) for c in
                [(0.0, 0.0, 0.0), (1.0, 0.5, -0.5), (-1.0, 1.0, 2.0),
                 (0.5, -0.75, 1.5), (2.0, 1.0, -1.0), (-0.5, 0.25, 0.75),
                 (1.5, -1.5, 0.5), (-2.0, 2.0, -2.0), (0.25, 0.5, 1.0),
                 (-0.75, -0.25, -1.25)]]
    raise UnknownExampleError(f"unknown example id {example_id!r}")


# ---------------------------------------------------------------------
# expected values, transcribed verbatim
# ---------------------------------------------------------------------

_EXPECTED = {
    "5.1": ExpectedValues(
        christoffels={(2, 1, 1): "exp(-2*x2)", (1, 1, 2): "-1"},
        dilation="exp(2*x2)",
        oneill_values=[
            ("A_XX, X=e1", "A", ((1.0, 0.0), (1.0, 0.0)),
             ("0", "exp(-2*x2)"), "paper-printed"),
            ("T_UU, U=e2", "T", ((0.0, 1.0), (0.0, 1.0)),
             ("0", "0"), "paper-printed"),
        ],
        ricci_values={
            (1, 1): ("-exp(-6*x2) - exp(-2*x2) - exp(-4*x2) + 1",
                     "-exp(-2*x2)"),
            (2, 2): ("-2*exp(-2*x2) - 1", "-1"),
            (1, 2): ("0", "0"),
        },
        structure={"fibers_totally_geodesic": True,
                   "horizontal_integrable": True,
                   "homothetic": True},
        mu_note=("published closed-form mu depends on x2 and on the chosen "
                 "field coefficients; the fitted constant and its spread are "
                 "reported by the soliton tooling instead"),
    ),
    "5.2": ExpectedValues(
        christoffels={(1, 1, 1): "1"},
        dilation="exp(-2*x1)",
        oneill_values=[
            ("A_XX, X=e1", "A", ((1.0, 0.0), (1.0, 0.0)),
             ("0", "0"), "paper-printed"),
            ("T_UU, U=e2", "T", ((0.0, 1.0), (0.0, 1.0)),
             ("0", "0"), "paper-printed"),
        ],
        ricci_values={
            (1, 1): ("(1 - 2*exp(2*x1)) * (exp(2*x1) - 1)", "0"),
            (2, 2): ("0", "0"),
            (1, 2): ("0", "0"),
        },
        structure={"fibers_totally_geodesic": True,
                   "fibers_totally_umbilical": True,
                   "horizontal_integrable": True,
                   "horizontal_totally_geodesic": True,
                   "homothetic": False},
        mu_note="fibers umbilical holds trivially with H = 0",
    ),
    "5.3": ExpectedValues(
        christoffels={(1, 1, 3): "-x3^-1", (2, 2, 3): "-x3^-1",
                      (3, 1, 1): "x3^-1", (3, 2, 2): "x3^-1",
                      (3, 3, 3): "-x3^-1"},
        dilation="x3^2",
        oneill_values=[
            ("T_UU, U=e1", "T", ((1.0, 0.0, 0.0), (1.0, 0.0, 0.0)),
             ("0", "0", "1"), "paper-printed"),
            ("g(U,U)H, U=e1", "umbilical-product", ((1.0, 0.0, 0.0),),
             ("0", "0", "x3^-2"), "paper-printed"),
            ("A_XX, X=e2", "A", ((0.0, 1.0, 0.0), (0.0, 1.0, 0.0)),
             ("0", "0", "0"), "paper-printed"),
            ("A_XX, X=e3", "A", ((0.0, 0.0, 1.0), (0.0, 0.0, 1.0)),
             ("0", "0", "0"), "paper-printed"),
            ("A_XY, X=e2, Y=e3", "A", ((0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
             ("0", "0", "0"), "paper-printed"),
        ],
        ricci_values={},
        structure={"fibers_totally_umbilical": True,
                   "horizontal_integrable": True,
                   "horizontal_totally_geodesic": True},
    ),
    "5.4": ExpectedValues(
        christoffels={},
        dilation="0.25",
        oneill_values=[
            ("T_UU, U=e2", "T", ((0.0, 1.0, 0.0), (0.0, 1.0, 0.0)),
             ("0", "0", "0"), "paper-printed"),
            ("A_XX, X=e1", "A", ((1.0, 0.0, 0.0), (1.0, 0.0, 0.0)),
             ("0", "0", "0"), "paper-printed"),
            ("A_XX, X=e3", "A", ((0.0, 0.0, 1.0), (0.0, 0.0, 1.0)),
             ("0", "0", "0"), "paper-printed"),
        ],
        ricci_values={},
        structure={"fibers_totally_geodesic": True,
                   "horizontal_totally_geodesic": True,
                   "horizontal_integrable": True,
                   "homothetic": True,
                   "map_totally_geodesic": True},
    ),
}


# ---------------------------------------------------------------------
# comparison machinery
# ---------------------------------------------------------------------

def _eval_text(text, chart, p):
    node = parse_expression(text, set(chart.coord_names))
    return primal(eval_expr(node, chart.env(list(p.coords))))


def _compare(name, provenance, samples, tol):
    """Aggregate per-point (expected, computed) samples into one row."""
    worst = max(samples, key=lambda s: abs(s[1] - s[2]))
    point, expected, computed = worst
    residual = abs(expected - computed)
    rel = residual / (1.0 + max(abs(expected), abs(computed)))
    if rel <= tol:
        verdict = "pass"
    elif provenance == "paper-printed":
        verdict = "paper-divergent"
    else:
        verdict = "fail"
    return ComparisonRow(name=name, provenance=provenance, expected=expected,
                         computed=computed, residual=residual,
                         verdict=verdict, point=tuple(point.coords))


def _umbilical_product(setup, p, u):
    g = geo.metric_matrix(setup.total, p)
    h = sub.mean_curvature(setup, p)
    guu = float(np.asarray(u) @ g @ np.asarray(u))
    return guu * np.asarray(h.components)


def run_example(example_id, tol=1e-6, points=None):
    setup, expected = load_example(example_id)
    if points is None:
        points = default_points(example_id)
    total = setup.total
    m = setup.m
    rows = []

    # Christoffel symbols, every index triple (sparse expected, default 0)
    for k in range(1, m + 1):
        for i in range(1, m + 1):
            for j in range(i, m + 1):
                text = expected.christoffels.get((k, i, j),
                                                 expected.christoffels.get((k, j, i), "0"))
                samples = []
                for p in points:
                    gam = geo.christoffel_symbols(total, p)
                    samples.append((p, _eval_text(text, total, p),
                                    float(gam[k - 1, i - 1, j - 1])))
                rows.append(_compare(f"Gamma^{k}_{i}{j}", "paper-printed",
                                     samples, tol))

    # dilation
    samples = [(p, _eval_text(expected.dilation, total, p),
                sub.dilation(setup, p).lambda_sq) for p in points]
    rows.append(_compare("lambda^2", "paper-printed", samples, tol))

    # O'Neill tensor values
    for name, kind, args, comp_texts, provenance in expected.oneill_values:
        for axis, text in enumerate(comp_texts):
            samples = []
            for p in points:
                if kind == "T":
                    vec = sub.oneill_T(setup, p,
                                       geo.VectorFieldSpec.constant(args[0]),
                                       geo.VectorFieldSpec.constant(args[1]))
                    val = vec.components[axis]
                elif kind == "A":
                    vec = sub.oneill_A(setup, p,
                                       geo.VectorFieldSpec.constant(args[0]),
                                       geo.VectorFieldSpec.constant(args[1]))
                    val = vec.components[axis]
                else:  # umbilical-product g(U,U)H
                    val = _umbilical_product(setup, p, args[0])[axis]
                samples.append((p, _eval_text(text, total, p), float(val)))
            rows.append(_compare(f"{name} [{axis + 1}]", provenance,
                                 samples, tol))

    # Ricci entries: printed value vs intrinsic coordinate computation,
    # oracle value vs the same (transcription and truth tracked separately)
    for (i, j), (printed, oracle) in expected.ricci_values.items():
        ric_samples = []
        oracle_samples = []
        for p in points:
            mat = geo.ricci_matrix_at(total, list(p.coords))
            val = float(primal(mat[i - 1][j - 1]))
            ric_samples.append((p, _eval_text(printed, total, p), val))
            oracle_samples.append((p, _eval_text(oracle, total, p), val))
        rows.append(_compare(f"Ric(e{i},e{j}) printed", "paper-printed",
                             ric_samples, tol))
        rows.append(_compare(f"Ric(e{i},e{j}) oracle", "derived-oracle",
                             oracle_samples, tol))

    # structure flags vs prose claims
    flags = sub.structure_flags(setup, points).as_dict()
    for flag_name, want in expected.structure.items():
        got = flags[flag_name].holds
        rows.append(ComparisonRow(
            name=f"flag {flag_name}", provenance="paper-printed",
            expected=float(want), computed=float(got),
            residual=0.0 if got == want else 1.0,
            verdict="pass" if got == want else "paper-divergent"))

    discrepancies = [r for r in rows if r.verdict == "paper-divergent"]
    counts = {"pass": sum(r.verdict == "pass" for r in rows),
              "fail": sum(r.verdict == "fail" for r in rows),
              "hypothesis_not_met": 0,
              "paper_divergent": len(discrepancies)}
    return ExampleReport(example_id=example_id, rows=rows,
                         discrepancies=discrepancies, counts=counts,
                         note=expected.mu_note)
