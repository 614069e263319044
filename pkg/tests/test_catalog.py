"""Example catalog: published values versus the computation."""

import pytest

from confsub import catalog

EXPECTED_DIVERGENCES = {
    "5.1": {"Ric(e1,e1) printed", "Ric(e2,e2) printed"},
    "5.2": {"Ric(e1,e1) printed"},
    "5.3": {"T_UU, U=e1 [3]", "g(U,U)H, U=e1 [3]"},
    "5.4": set(),
}


@pytest.mark.parametrize("eid", catalog.EXAMPLE_IDS)
def test_no_hard_failures(eid, example_reports):
    rep = example_reports[eid]
    assert rep.counts["fail"] == 0
    assert rep.counts["pass"] > 0


@pytest.mark.parametrize("eid", catalog.EXAMPLE_IDS)
def test_divergence_sections_exact(eid, example_reports):
    rep = example_reports[eid]
    assert {r.name for r in rep.discrepancies} == EXPECTED_DIVERGENCES[eid]
    for row in rep.discrepancies:
        assert row.verdict == "paper-divergent"
        assert row.provenance == "paper-printed"


def test_oracle_rows_pass(example_reports):
    # every derived-oracle row agrees with the computation
    for rep in example_reports.values():
        for row in rep.rows:
            if row.provenance == "derived-oracle":
                assert row.verdict == "pass", (rep.example_id, row.name)


def test_51_ricci_values(example_reports):
    rows = {r.name: r for r in example_reports["5.1"].rows}
    printed = rows["Ric(e2,e2) printed"]
    assert printed.computed == pytest.approx(-1.0, abs=1e-9)
    oracle = rows["Ric(e2,e2) oracle"]
    assert oracle.verdict == "pass"
    mixed = rows["Ric(e1,e2) printed"]
    assert mixed.verdict == "pass"


def test_52_metric_is_flat(example_reports):
    rows = {r.name: r for r in example_reports["5.2"].rows}
    assert rows["Ric(e1,e1) printed"].computed == pytest.approx(0.0,
                                                                abs=1e-12)
    assert rows["Ric(e1,e1) oracle"].verdict == "pass"


def test_points_counts():
    for eid in catalog.EXAMPLE_IDS:
        assert len(catalog.default_points(eid)) >= 10


def test_jobs_come_from_shipped_manifests():
    job = catalog.load_job("5.3")
    assert job.mu == 2.0
    assert job.setup.total.coord_names == ["x1", "x2", "x3"]
    assert job.xi is not None


def test_unknown_example_rejected():
    with pytest.raises(catalog.UnknownExampleError):
        catalog.run_example("5.9")
    with pytest.raises(catalog.UnknownExampleError):
        catalog.default_points("nope")
