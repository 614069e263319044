"""Shared fixtures: chart builders, the randomized submersion corpus,
and deterministic point sampling."""

import numpy as np
import pytest

from confsub import catalog
from confsub.geometry import ChartManifold, Point
from confsub.manifest import sample_box
from confsub.submersion import SubmersionSetup

# coefficients for the randomized corpus, drawn once with a fixed seed
# so every run sees the same analytic setups
_RNG = np.random.default_rng(20240817)
_COEFF = {name: float(v) for name, v in zip(
    "abcdef", 0.3 + 0.9 * _RNG.random(6))}


def chart(names, rows, domain=None):
    return ChartManifold.from_strings(
        names.split(),
        [[cell.strip() for cell in row.split(",")] for row in rows],
        domain)


def make_setup(total, base, map_texts):
    return SubmersionSetup.from_strings(total, base, map_texts)


def flat_chart(dim, prefix="x"):
    names = " ".join(f"{prefix}{i + 1}" for i in range(dim))
    rows = [", ".join("1" if i == j else "0" for j in range(dim))
            for i in range(dim)]
    return chart(names, rows)


def sample(box, count, seed=7, predicate=None):
    return sample_box(box, count, seed, predicate=predicate)


def riemannian_corpus():
    """Five analytic Riemannian-submersion setups (dilation identically
    one) with per-setup sampling boxes; coefficients are seeded-random."""
    a, b, c = _COEFF["a"], _COEFF["b"], _COEFF["c"]
    base1 = chart("y1", ["1"])
    base2 = chart("y1 y2", ["1, 0", "0, 1"])
    entries = []

    # flat product, everything vanishes
    entries.append(("flat-3to2", make_setup(
        flat_chart(3), base2, ["x1", "x2"]),
        [(-1.0, 1.0)] * 3))

    # warped line bundle: nonzero T, flat base
    entries.append(("warped-2to1", make_setup(
        chart("x1 x2", [f"1, 0", f"0, exp({2 * a:.6f}*x1)"]),
        base1, ["x1"]), [(-1.0, 1.0)] * 2))

    # twisted bundle: nonzero A, integrability fails
    entries.append(("twisted-3to2", make_setup(
        chart("x1 x2 x3", [f"1 + {b:.6f}^2*x2^2, 0, {b:.6f}*x2",
                           "0, 1, 0", f"{b:.6f}*x2, 0, 1"]),
        base2, ["x1", "x2"]), [(-1.0, 1.0)] * 3))

    # two-dimensional curved fiber: nonzero T, curved vertical geometry
    entries.append(("curved-fiber-3to1", make_setup(
        chart("x1 x2 x3", ["1, 0, 0",
                           f"0, exp({2 * c:.6f}*x1), 0",
                           f"0, 0, exp({2 * c:.6f}*x1)*(2 + sin(x2))"]),
        base1, ["x1"]), [(-0.8, 0.8)] * 3))

    # anisotropic warped fiber over a flat plane
    entries.append(("warped-3to2", make_setup(
        chart("x1 x2 x3", ["1, 0, 0", "0, 1, 0",
                           f"0, 0, exp({2 * a:.6f}*x1 + {b:.6f}*x2)"]),
        base2, ["x1", "x2"]), [(-1.0, 1.0)] * 3))
    return entries


def conformal_corpus():
    """Genuinely conformal setups: the four catalog examples plus a
    vertically-varying-dilation cone used as a regression anchor."""
    entries = []
    for eid in catalog.EXAMPLE_IDS:
        job = catalog.load_job(eid)
        entries.append((eid, job.setup, job.points))
    cone = make_setup(
        chart("x1 x2 x3", ["exp(-2*x3), 0, 0", "0, exp(-2*x3), 0",
                           "0, 0, 1"]),
        chart("y1 y2", ["1, 0", "0, 1"]), ["x1", "x2"])
    entries.append(("cone", cone,
                    [Point(c) for c in ((0.3, -0.5, 0.2), (1.0, 0.7, -0.4),
                                        (-0.6, 0.1, 0.8))]))
    return entries


@pytest.fixture(scope="session")
def riemannian_setups():
    return riemannian_corpus()


@pytest.fixture(scope="session")
def conformal_setups():
    return conformal_corpus()


@pytest.fixture(scope="session")
def example_reports():
    """Catalog comparison reports, computed once per test session."""
    return {eid: catalog.run_example(eid) for eid in catalog.EXAMPLE_IDS}
