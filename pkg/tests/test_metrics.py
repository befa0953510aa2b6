"""metrics: the five formulas, quality sub-scores, ablation classification."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from c2u.metrics import (
    AblationCounts,
    Observation,
    QualitySubscores,
    ablation_classify,
    batch_tables,
    compute_report,
    entity_recall,
    quality_score,
    quality_subscores,
    relationship_precision,
    sci,
    validity_rate,
)
from c2u.puml import LintReport, Violation, parse_artifact
from c2u.views import DiagramType


def _artifact(text: str, dt: DiagramType):
    return parse_artifact(text, dt)


def _report(verdict: str) -> LintReport:
    if verdict == "valid":
        return LintReport()
    if verdict == "corrected":
        return LintReport(violations=[Violation("R3", 1, "x")])
    return LintReport(violations=[Violation("R8", 1, "x")], uncorrectable=True)


def _obs(dt: DiagramType, ir_names: set[str], diagrams) -> Observation:
    return Observation(project_id="p", diagram_type=dt, ir_entity_names=ir_names, diagrams=diagrams)


# ---------------------------------------------------------------------------
# entity recall (Eq. 1)


def test_recall_full_overlap():
    art = _artifact("class A\nclass B\n", DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, {"A", "B"}, [(art, _report("valid"))])
    assert entity_recall(obs)[0] == 1.0


def test_recall_no_overlap():
    art = _artifact("class X\n", DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, {"A", "B"}, [(art, _report("valid"))])
    assert entity_recall(obs)[0] == 0.0


def test_recall_three_of_ten_oracle():
    ir_names = {f"E{i}" for i in range(7)} | {"A", "B", "C"}
    assert len(ir_names) == 10
    art = _artifact("class A\nclass B\nclass C\nclass Zed\n", DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, ir_names, [(art, _report("valid"))])
    got, _ = entity_recall(obs)
    # independent brute-force set-membership oracle
    captured = sum(1 for n in ir_names if n in art.elements)
    assert got == captured / 10 == pytest.approx(0.300)


def test_recall_absent_for_system_context():
    art = _artifact("rectangle A <<System>>\n", DiagramType.SYSTEM_CONTEXT)
    obs = _obs(DiagramType.SYSTEM_CONTEXT, {"A"}, [(art, _report("valid"))])
    assert entity_recall(obs) == (None, [])


def test_recall_empty_ir_zero_with_warning():
    art = _artifact("class A\n", DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, set(), [(art, _report("valid"))])
    value, warnings = entity_recall(obs)
    assert value == 0.0 and warnings


def test_recall_case_sensitive_exact_match():
    art = _artifact("class engine\n", DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, {"Engine"}, [(art, _report("valid"))])
    assert entity_recall(obs)[0] == 0.0


def test_recall_monotone_under_added_diagram():
    a1 = _artifact("class A\n", DiagramType.CLASS)
    a2 = _artifact("class B\n", DiagramType.CLASS)
    obs1 = _obs(DiagramType.CLASS, {"A", "B", "C"}, [(a1, _report("valid"))])
    obs2 = _obs(DiagramType.CLASS, {"A", "B", "C"}, [(a1, _report("valid")), (a2, _report("valid"))])
    assert entity_recall(obs2)[0] >= entity_recall(obs1)[0]


# ---------------------------------------------------------------------------
# relationship precision (Eq. 2)


def test_precision_all_endpoints_declared():
    art = _artifact("class A\nclass B\nA --> B\n", DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, {"A", "B"}, [(art, _report("valid"))])
    assert relationship_precision(obs)[0] == 1.0


def test_precision_three_of_four_oracle():
    text = "class A\nclass B\nclass C\nA --> B\nB --> C\nC --> A\nA --> Ghost\n"
    art = _artifact(text, DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, {"A", "B", "C"}, [(art, _report("valid"))])
    got, _ = relationship_precision(obs)
    # brute-force endpoint check over the fixture
    declared = {"A", "B", "C"} | set(art.elements)
    valid = sum(1 for r in art.relationships if r.source in declared and r.target in declared)
    assert got == valid / len(art.relationships) == pytest.approx(0.750)


def test_precision_counts_ir_declared_endpoints():
    # endpoint missing from the diagram but present in the IR is still valid
    art = _artifact("class A\nA --> Engine\n", DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, {"Engine"}, [(art, _report("valid"))])
    assert relationship_precision(obs)[0] == 1.0


def test_precision_vacuous_flagged():
    art = _artifact("class A\n", DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, {"A"}, [(art, _report("valid"))])
    value, warnings = relationship_precision(obs)
    assert value == 1.0 and warnings


def test_precision_absent_for_activity():
    art = _artifact(":a;\n:b;\n", DiagramType.ACTIVITY)
    obs = _obs(DiagramType.ACTIVITY, {"a"}, [(art, _report("valid"))])
    assert relationship_precision(obs) == (None, [])


def test_precision_endpoint_closure_monotone():
    base = "class A\nA --> Ghost\n"
    art1 = _artifact(base, DiagramType.CLASS)
    art2 = _artifact(base + "class Ghost\n", DiagramType.CLASS)
    obs1 = _obs(DiagramType.CLASS, {"A"}, [(art1, _report("valid"))])
    obs2 = _obs(DiagramType.CLASS, {"A"}, [(art2, _report("valid"))])
    assert relationship_precision(obs2)[0] >= relationship_precision(obs1)[0]


# ---------------------------------------------------------------------------
# validity rate (Eq. 3)


def _valid_diagram():
    return (_artifact("class A\nclass B\nA --> B\n", DiagramType.CLASS), _report("valid"))


def _batch(valid: int, corrected: int, uncorrectable: int):
    batch = []
    for i in range(valid):
        batch.append(_obs(DiagramType.CLASS, {"A"}, [_valid_diagram()]))
    for i in range(corrected):
        art = _artifact("class A\n", DiagramType.CLASS)
        batch.append(_obs(DiagramType.CLASS, {"A"}, [(art, _report("corrected"))]))
    for i in range(uncorrectable):
        art = _artifact("class Foo\n", DiagramType.CLASS)
        batch.append(_obs(DiagramType.CLASS, {"A"}, [(art, _report("uncorrectable"))]))
    return batch


def test_validity_rate_55_of_84():
    batch = _batch(55, 24, 5)
    assert round(validity_rate(batch), 1) == 65.5


def test_validity_rate_12_of_12():
    assert validity_rate(_batch(12, 0, 0)) == 100.0


def test_validity_rate_zero():
    assert validity_rate(_batch(0, 3, 0)) == 0.0


def test_validity_rate_empty_batch_errors():
    with pytest.raises(ValueError):
        validity_rate([])


# ---------------------------------------------------------------------------
# SCI (Eq. 5)


def test_sci_zero_relationships():
    assert sci(10, 0) == 0.0


def test_sci_exact_power_of_two():
    assert sci(4, 2) == 4.0


def test_sci_table6_activity_anchor():
    assert sci(54.4, 64.3) == pytest.approx(95.2, abs=0.5)


def test_sci_zero_elements():
    assert sci(0, 5) == 0.0


def test_sci_negative_rejected():
    with pytest.raises(ValueError):
        sci(-1, 0)


@given(st.floats(1, 1e4), st.floats(0, 1e4))
@settings(max_examples=100, deadline=None)
def test_sci_linear_in_e_at_fixed_density(e, r):
    k = 3.7
    lhs = sci(k * e, k * r)
    rhs = k * sci(e, r)
    assert lhs == pytest.approx(rhs, rel=1e-9)


@given(st.floats(1, 1e4), st.integers(0, 1000))
@settings(max_examples=60, deadline=None)
def test_sci_increasing_in_r(e, r):
    assert sci(e, r + 1) > sci(e, r)


# ---------------------------------------------------------------------------
# quality sub-scores and Eq. 4


def test_density_in_band_scores_100():
    art = _artifact("class A\nclass B\nclass C\nclass D\nA --> B\nB --> C\nC --> D\nD --> A\n", DiagramType.CLASS)
    subs = quality_subscores(art)
    assert subs.density == 100.0  # rho = 1.0 inside [0.5, 1.5]


def test_density_outside_band_decays():
    art = _artifact("class A\nclass B\nA --> B\nA --> B\nA --> B\nA --> B\n", DiagramType.CLASS)
    # rho = 2.0, band [0.5, 1.5], width 1.0, distance 0.5 -> 50
    assert quality_subscores(art).density == pytest.approx(50.0)


def test_density_zero_elements_is_zero():
    art = _artifact("", DiagramType.CLASS)
    assert quality_subscores(art).density == 0.0


def test_connectivity_full():
    art = _artifact("class A\nclass B\nA --> B\n", DiagramType.CLASS)
    assert quality_subscores(art).connectivity == 100.0


def test_connectivity_partial():
    art = _artifact("class A\nclass B\nclass C\nA --> B\n", DiagramType.CLASS)
    assert quality_subscores(art).connectivity == pytest.approx(100 * 2 / 3)


def test_labeling_counts_nonempty_labels():
    art = _artifact("class A\nclass B\nA --> B : uses\nA --> B\n", DiagramType.CLASS)
    assert quality_subscores(art).labeling == 50.0


def test_activity_flow_edges_unlabeled_gives_zero_labeling():
    # consistent with the near-zero activity labeling the corpus shows
    art = _artifact("@startuml\nstart\n:a;\n:b;\nstop\n@enduml\n", DiagramType.ACTIVITY)
    subs = quality_subscores(art)
    assert subs.labeling == 0.0


def test_documentation_two_word_names_and_notes():
    art = _artifact("class OrderService\nclass Gear\nnote left of Gear : internal\n", DiagramType.CLASS)
    assert quality_subscores(art).documentation == 100.0


def test_structure_class_checklist():
    good = _artifact("class A\nclass B\ninterface I\nA --|> B\nA ..|> I\n", DiagramType.CLASS)
    assert quality_subscores(good).structure == 100.0
    orphan_iface = _artifact("class A\nclass B\ninterface I\nA --|> B\n", DiagramType.CLASS)
    assert quality_subscores(orphan_iface).structure == 50.0


def test_structure_sequence_checklist():
    art = _artifact("participant A\nparticipant B\nactivate A\nA -> B : go\n", DiagramType.SEQUENCE)
    assert quality_subscores(art).structure == 100.0
    undeclared = _artifact("participant A\nA -> Ghost : go\n", DiagramType.SEQUENCE)
    assert quality_subscores(undeclared).structure == 0.0


def test_structure_usecase_checklist():
    art = _artifact("actor U\nusecase C\nU --> C\n", DiagramType.USECASE)
    assert quality_subscores(art).structure == 100.0
    unlinked = _artifact("actor U\nusecase C\n", DiagramType.USECASE)
    assert quality_subscores(unlinked).structure == 50.0


def test_structure_system_context_checklist():
    art = _artifact("actor U\nrectangle S <<System>>\nU --> S : x\n", DiagramType.SYSTEM_CONTEXT)
    assert quality_subscores(art).structure == 100.0
    two_systems = _artifact("rectangle A <<System>>\nrectangle B <<System>>\nactor U\n", DiagramType.SYSTEM_CONTEXT)
    assert quality_subscores(two_systems).structure == 50.0


def test_quality_score_extremes():
    assert quality_score(QualitySubscores(100, 100, 100, 100, 100)) == 100.0
    assert quality_score(QualitySubscores(0, 0, 0, 0, 0)) == 0.0


def test_quality_score_literal_mean_on_reported_activity_row():
    # literal unweighted mean of the published activity sub-scores
    assert quality_score(QualitySubscores(82.5, 98.2, 3.9, 74.1, 69.6)) == pytest.approx(65.66)


def test_quality_score_range_check():
    with pytest.raises(ValueError):
        quality_score(QualitySubscores(101, 0, 0, 0, 0))


# ---------------------------------------------------------------------------
# ablation (Table 7 regimes)


def test_ablation_all_valid():
    counts = ablation_classify(_batch(12, 0, 0))
    assert (counts.no_correction, counts.partially_corrected, counts.uncorrectable) == (12, 0, 0)


def test_ablation_table7_shape():
    counts = ablation_classify(_batch(55, 24, 5))
    assert (counts.no_correction, counts.partially_corrected, counts.uncorrectable) == (55, 24, 5)
    assert counts.total() == 84


def test_ablation_any_uncorrectable_dominates():
    obs = _obs(
        DiagramType.CLASS,
        {"A"},
        [_valid_diagram(), (_artifact("class Foo\n", DiagramType.CLASS), _report("uncorrectable"))],
    )
    counts = ablation_classify([obs])
    assert counts.uncorrectable == 1 and counts.total() == 1


def test_ablation_partition_property():
    batch = _batch(7, 3, 2)
    counts = ablation_classify(batch)
    assert counts.total() == len(batch)


def test_validity_equals_ablation_fraction_at_diagram_granularity():
    batch = _batch(55, 24, 5)
    counts = ablation_classify(batch)
    assert validity_rate(batch) == pytest.approx(100 * counts.no_correction / counts.total())


# ---------------------------------------------------------------------------
# per-observation report and tables


def test_compute_report_ranges():
    art = _artifact("class OrderService\nclass Billing\nOrderService --> Billing : calls\n", DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, {"OrderService", "Billing", "Hidden"}, [(art, _report("valid"))])
    rep = compute_report(obs)
    assert 0 <= rep.entity_recall <= 1
    assert 0 <= rep.relationship_precision <= 1
    assert 0 <= rep.quality <= 100
    for field in ("density", "connectivity", "labeling", "documentation", "structure"):
        assert 0 <= getattr(rep, field) <= 100
    assert rep.sci >= 0
    assert rep.validity_pct == 100.0
    assert rep.mean_elements == 2.0 and rep.mean_relationships == 1.0
    assert rep.entity_recall == pytest.approx(2 / 3)


def test_report_json_obj_no_nan():
    art = _artifact("", DiagramType.CLASS)
    obs = _obs(DiagramType.CLASS, set(), [(art, _report("valid"))])
    obj = compute_report(obs).to_json_obj()
    for v in obj.values():
        if isinstance(v, float):
            assert not math.isnan(v)


def test_batch_tables_shapes():
    batch = _batch(3, 1, 1)
    reports = [compute_report(o) for o in batch]
    tables = batch_tables(batch, reports, {"p": "python"})
    assert set(tables) == {"by_type", "subscores", "by_language", "by_project", "structure_index", "ablation"}
    assert tables["by_type"].splitlines()[0] == "diagram_type,validity_pct,recall,precision,quality"
    assert tables["ablation"].strip().splitlines()[-1].startswith("overall,3,1,1")


@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40))
@settings(max_examples=30, deadline=None)
def test_ablation_counts_partition_random(v, c, u):
    batch = _batch(v, c, u)
    counts = ablation_classify(batch)
    assert (counts.no_correction, counts.partially_corrected, counts.uncorrectable) == (v, c, u)
