"""view-gen: scoring, selection, detail scaling, projections, shrink loop."""

from __future__ import annotations

import json
import math
import random

import pytest
from hypothesis import given, settings

from c2u.config import RunConfig
from c2u.ir import canonical_json
from c2u.normalize import normalize
from c2u.views import (
    BEHAVIORAL_TYPES,
    DEEP_PATH_TYPES,
    SINGLE_PATH_TYPES,
    DiagramType,
    IrreducibleViewError,
    budget_bytes,
    explain_csv,
    generate_view,
    project,
    rank_elements,
    scale_detail,
    score_class,
    score_function,
    select_elements,
    write_view,
)
from tests.conftest import make_class, make_function, make_ir, random_raw_ir, raw_irs


def test_routing_partition_is_exact():
    assert SINGLE_PATH_TYPES == {DiagramType.COMPONENT, DiagramType.DEPLOYMENT, DiagramType.SYSTEM_CONTEXT}
    assert DEEP_PATH_TYPES == {DiagramType.CLASS, DiagramType.SEQUENCE, DiagramType.ACTIVITY, DiagramType.USECASE}
    assert SINGLE_PATH_TYPES | DEEP_PATH_TYPES == set(DiagramType)
    assert not SINGLE_PATH_TYPES & DEEP_PATH_TYPES


def test_budgets():
    assert budget_bytes(DiagramType.COMPONENT) == 61440
    assert budget_bytes(DiagramType.CLASS) == 102400


# --- scoring


def test_score_class_zero_case():
    s = score_class(make_class("X"), DiagramType.CLASS)
    assert s.score == 0.0


def test_score_class_formula():
    # 3 methods + 2 attrs + 10 (inheritance) + 15 (architectural name) = 30
    c = make_class("UserService", methods=3, attributes=2, extends=["Base"])
    s = score_class(c, DiagramType.CLASS)
    assert s.score == 30.0
    assert (s.member_weight, s.inheritance_weight, s.name_bonus) == (5.0, 10.0, 15.0)
    assert s.score == s.member_weight + s.inheritance_weight + s.name_bonus + s.call_chain_weight


def test_inheritance_adds_exactly_ten():
    plain = make_class("Widget", methods=2, attributes=1)
    inh = make_class("Widget", methods=2, attributes=1, extends=["Base"])
    assert score_class(inh, DiagramType.CLASS).score - score_class(plain, DiagramType.CLASS).score == 10.0


def test_name_pattern_case_insensitive_substring():
    assert score_class(make_class("ordercontroller"), DiagramType.CLASS).name_bonus == 15.0
    assert score_class(make_class("RepositoryBase"), DiagramType.CLASS).name_bonus == 15.0


def test_score_function_no_calls_is_line_count():
    f = make_function("f", line_count=7)
    assert score_function(f, DiagramType.SEQUENCE).score == 7.0


def test_score_function_call_weight_behavioral_only():
    f = make_function("f", line_count=5, calls=["a", "b", "c", "d"])
    seq = score_function(f, DiagramType.SEQUENCE).score
    cls = score_function(f, DiagramType.CLASS).score
    assert seq - cls == 12.0  # W_call = 3 per call, behavioral types only


def test_score_function_zero_case():
    assert score_function(make_function("f", line_count=0), DiagramType.ACTIVITY).score == 0.0


# --- selection


def _brute_force_order(ir, dt):
    cfg = RunConfig()
    scored = []
    for c in ir.classes:
        s = len(c.methods) + len(c.attributes)
        if c.extends or c.implements:
            s += cfg.weight_inheritance
        if any(p.lower() in c.name.lower() for p in cfg.name_patterns):
            s += cfg.weight_name
        scored.append((-float(s), c.name, 0))
    for f in ir.functions:
        s = float(f.line_count)
        if dt in BEHAVIORAL_TYPES:
            s += cfg.weight_call * len(f.calls)
        scored.append((-s, f.name, 1))
    return [name for _, name, _ in sorted(scored)]


def test_select_all_when_budget_large():
    ir = make_ir(classes=[make_class("B", methods=1), make_class("A", methods=1)])
    sel = select_elements(ir, DiagramType.CLASS, 99)
    assert [e.name for e in sel] == ["A", "B"]  # tie broken by name ascending


def test_select_budget_one_takes_top():
    ir = make_ir(classes=[make_class("A", methods=1), make_class("Svc", methods=5)])
    sel = select_elements(ir, DiagramType.CLASS, 1)
    assert sel[0].name == "Svc"


def test_select_top3_matches_brute_force_oracle():
    classes = [
        make_class("Alpha", methods=2),                      # 2
        make_class("BetaService", methods=1),                # 1 + 15 = 16
        make_class("Gamma", methods=4, attributes=3),        # 7
        make_class("Delta", extends=["Base"], methods=1),    # 1 + 10 = 11
        make_class("Epsilon", attributes=2),                 # 2
    ]
    ir = make_ir(classes=classes)
    expected = _brute_force_order(ir, DiagramType.CLASS)[:3]
    sel = select_elements(ir, DiagramType.CLASS, 3)
    assert [e.name for e in sel] == expected == ["BetaService", "Delta", "Gamma"]


def test_select_budget_zero_rejected():
    with pytest.raises(ValueError):
        select_elements(make_ir(), DiagramType.CLASS, 0)


@given(raw_irs())
@settings(max_examples=40, deadline=None)
def test_selection_matches_oracle_property(ir):
    for dt in (DiagramType.CLASS, DiagramType.SEQUENCE):
        expected = _brute_force_order(ir, dt)
        got = [e.name for e in select_elements(ir, dt, max(ir.element_count(), 1))] if ir.element_count() else []
        assert got == expected


# --- detail scaling


def test_scale_detail_table():
    assert scale_detail(31) == (20, 20)
    assert scale_detail(4578) == (5, 5)
    assert scale_detail(200) == (8, 8)


def test_scale_detail_total_and_monotone():
    prev = None
    for n in range(0, 5001):
        caps = scale_detail(n)
        assert caps in ((20, 20), (12, 12), (8, 8), (5, 5))
        if prev is not None:
            assert caps[0] <= prev[0] and caps[1] <= prev[1] or caps == prev
        prev = caps
    assert scale_detail(0) == (20, 20)
    assert scale_detail(49) == (20, 20) and scale_detail(50) == (12, 12)
    assert scale_detail(199) == (12, 12) and scale_detail(1000) == (5, 5)
    with pytest.raises(ValueError):
        scale_detail(-1)


# --- projections


def test_class_projection_caps_methods_in_declaration_order():
    c = make_class("Big", methods=30, attributes=3)
    ir = normalize(make_ir(classes=[c]))
    recs = project(ir.classes, DiagramType.CLASS, (20, 20), ir)
    names = [m["name"] for m in recs[0]["methods"]]
    assert names == [f"m{i}" for i in range(20)]
    assert len(recs[0]["attributes"]) == 3


def test_usecase_projection_has_no_attributes():
    c = make_class("Svc", methods=2, attributes=5)
    ir = normalize(make_ir(classes=[c], functions=[make_function("go", line_count=4)]))
    recs = project(ir.classes + ir.functions, DiagramType.USECASE, (20, 20), ir)
    assert all("attributes" not in r for r in recs)
    assert recs[0]["public_methods"] == ["m0", "m1"]


def test_deployment_projection_empty_metadata_gives_directory_skeleton():
    ir = normalize(make_ir(classes=[make_class("A", methods=1, source_file="app/x.py")]))
    ir.metadata = {}
    recs = project(ir.classes, DiagramType.DEPLOYMENT, (20, 20), ir)
    assert recs == [{"kind": "directory", "name": "app"}]


def test_deployment_projection_infra_metadata():
    ir = normalize(make_ir(classes=[make_class("A", methods=1, source_file="app/x.py")]))
    ir.metadata = {"config:docker-compose.yml": "services: x", "repository_path": "/r"}
    recs = project(ir.classes, DiagramType.DEPLOYMENT, (20, 20), ir)
    kinds = [r["kind"] for r in recs]
    assert kinds == ["metadata", "directory"]
    assert recs[0]["key"] == "config:docker-compose.yml"


def test_sequence_projection_keeps_call_lists_only():
    c = make_class("Svc", methods=2, calls_per_method=2)
    ir = normalize(make_ir(classes=[c]))
    recs = project(ir.classes, DiagramType.SEQUENCE, (20, 20), ir)
    assert set(recs[0]) == {"methods", "name"}
    assert recs[0]["methods"][0]["calls"] == ["callee0_0", "callee0_1"]


def test_system_context_projection_externals():
    c = make_class("Api", methods=1)
    c.methods[0].calls = ["requests_get", "m0"]
    ir = normalize(make_ir(classes=[c]))
    recs = project(ir.classes, DiagramType.SYSTEM_CONTEXT, (20, 20), ir)
    kinds = {(r["kind"], r["name"]) for r in recs}
    assert ("class", "Api") in kinds
    assert ("external", "requests_get") in kinds
    assert ("external", "m0") not in kinds  # m0 is defined in the IR


def test_component_projection_groups_by_directory():
    ir = normalize(
        make_ir(
            classes=[
                make_class("B", methods=1, source_file="web/b.py"),
                make_class("A", methods=1, source_file="app/a.py", extends=["Base"]),
            ]
        )
    )
    recs = project(ir.classes, DiagramType.COMPONENT, (20, 20), ir)
    assert [(r["directory"], r["name"]) for r in recs] == [("app", "A"), ("web", "B")]
    assert recs[0]["extends"] == ["Base"]


# --- generate_view


def test_small_ir_fits_without_shrinking():
    ir = normalize(make_ir(classes=[make_class(f"C{i}", methods=2) for i in range(5)]))
    view = generate_view(ir, DiagramType.CLASS)
    assert view.shrink_iterations == 0
    assert len(view.elements) == 5
    assert view.byte_size <= budget_bytes(DiagramType.CLASS)


def _uniform_ir(n: int):
    classes = [
        make_class(f"Cls{i:04d}", methods=3, attributes=2, source_file=f"src/p{i % 10}/f{i}.py")
        for i in range(n)
    ]
    return normalize(make_ir(classes=classes))


def test_shrink_iterations_match_serializer_oracle():
    """Oracle: simulate the ceil-halving loop with independently constructed
    class records serialized by json.dumps."""
    ir = _uniform_ir(4000)
    view = generate_view(ir, DiagramType.CLASS)

    def record_for(c):
        return {
            "attributes": [{"name": a.name, "type": a.type_annotation, "visibility": a.visibility} for a in c.attributes],
            "extends": [], "implements": [], "kind": "class",
            "methods": [{"name": m.name, "parameters": [], "visibility": m.visibility} for m in c.methods],
            "name": c.name, "visibility": c.visibility,
        }

    ranked_names = [s.name for s, _ in rank_elements(ir, DiagramType.CLASS)]
    by_name = {c.name: c for c in ir.classes}
    budget = ir.element_count()
    k = 0
    while True:
        n = min(budget, ir.element_count())
        caps = scale_detail(n)
        doc = {
            "detail_caps": list(caps),
            "diagram_type": "class",
            "elements": [record_for(by_name[nm]) for nm in ranked_names[:n]],
            "source_element_count": ir.element_count(),
        }
        size = len(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode())
        if size <= 102400:
            break
        budget = math.ceil(budget / 2)
        k += 1
    assert view.shrink_iterations == k
    assert k > 0


def test_generate_view_deterministic():
    ir = _uniform_ir(700)
    for dt in DiagramType:
        v1 = generate_view(ir, dt)
        v2 = generate_view(ir, dt)
        assert canonical_json(v1.document()) == canonical_json(v2.document())
        assert v1.byte_size == v2.byte_size and v1.shrink_iterations == v2.shrink_iterations


def test_byte_size_is_exact_document_length(tmp_path):
    ir = _uniform_ir(300)
    for dt in DiagramType:
        view = generate_view(ir, dt)
        assert view.byte_size == len(canonical_json(view.document()))
        path = write_view(view, tmp_path)
        assert path.stat().st_size == view.byte_size


def test_element_budget_follows_ceil_halving():
    ir = _uniform_ir(4000)
    view = generate_view(ir, DiagramType.CLASS)
    expected_budget = math.ceil(4000 / 2 ** view.shrink_iterations)
    assert len(view.elements) == expected_budget


def test_empty_ir_produces_empty_view():
    ir = normalize(make_ir())
    view = generate_view(ir, DiagramType.CLASS)
    assert view.elements == []
    assert view.shrink_iterations == 0


def test_unnormalized_ir_rejected():
    with pytest.raises(ValueError):
        generate_view(make_ir(classes=[make_class("A", methods=1)]), DiagramType.CLASS)


def test_irreducible_view_errors():
    # one pathological element bigger than the whole budget
    huge = make_class("X" * 200_000, methods=1)
    ir = normalize(make_ir(classes=[huge]))
    with pytest.raises(IrreducibleViewError):
        generate_view(ir, DiagramType.CLASS)


def _importance_survival(ir, view, dt):
    """Every element scoring strictly above the cut score is retained."""
    ranked = rank_elements(ir, dt)
    if not view.elements or len(view.elements) >= len(ranked):
        return
    n = len([r for r in view.elements if True])
    cut_score = ranked[n - 1][0].score
    retained = {r.get("name") for r in view.elements if isinstance(r, dict) and "name" in r}
    for s, _ in ranked:
        if s.score > cut_score:
            assert s.name in retained


def test_importance_survival_and_monotone_coverage():
    rng = random.Random(7)
    ir = normalize(random_raw_ir(rng, max_classes=60, max_functions=30))
    for dt in (DiagramType.CLASS, DiagramType.SEQUENCE, DiagramType.USECASE):
        view = generate_view(ir, dt)
        _importance_survival(ir, view, dt)
    # monotone coverage: halving never adds elements
    full = [e.name for e in select_elements(ir, DiagramType.CLASS, max(ir.element_count(), 1))]
    half = [e.name for e in select_elements(ir, DiagramType.CLASS, max(ir.element_count() // 2, 1))]
    assert set(half) <= set(full)
    assert full[: len(half)] == half


@given(raw_irs())
@settings(max_examples=40, deadline=None)
def test_no_synthesis_property(ir):
    norm = normalize(ir)
    source_names = norm.element_names()
    all_names = set(source_names)
    for c in norm.classes:
        all_names.update(m.name for m in c.methods)
        all_names.update(a.name for a in c.attributes)
        for m in c.methods:
            all_names.update(m.calls)
        all_names.update(c.extends)
        all_names.update(c.implements)
    for f in norm.functions:
        all_names.update(f.calls)
    for dt in (DiagramType.CLASS, DiagramType.USECASE, DiagramType.SYSTEM_CONTEXT):
        view = generate_view(norm, dt)
        for rec in view.elements:
            if "name" in rec and rec.get("kind") != "directory":
                assert rec["name"] in all_names


def test_explain_csv_contains_ranked_scores():
    ir = normalize(make_ir(classes=[make_class("UserService", methods=3, attributes=2, extends=["Base"])]))
    csv_text = explain_csv(ir, DiagramType.CLASS)
    lines = csv_text.strip().splitlines()
    assert lines[0].startswith("rank,name,kind,score")
    assert lines[1].startswith("1,UserService,class,30,")


@given(raw_irs(max_elements=10))
@settings(max_examples=30, deadline=None)
def test_hard_budget_property_small(ir):
    norm = normalize(ir)
    for dt in DiagramType:
        view = generate_view(norm, dt)
        assert view.byte_size <= budget_bytes(dt)
