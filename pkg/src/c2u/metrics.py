"""The five automated diagram quality metrics and the ablation classifier.

Definitions, with their vacuous/absent policies:

- entity recall: |IR element names appearing in any diagram| / |IR elements|,
  case-sensitive exact match; not reported for system_context; 0 (flagged)
  when the IR is empty.
- relationship precision: relationships whose endpoints are both declared
  (in the IR or any diagram) / all relationships; not reported for activity;
  1.0 flagged vacuous when no relationships exist.
- syntactic validity rate: percent of diagrams whose lint verdict is valid.
- quality score: unweighted mean of density, connectivity, labeling,
  documentation and structure sub-scores, each 0-100.
- SCI: E * log2(1 + 2R/E), 0 when E = 0.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable

from c2u.config import RunConfig
from c2u.puml import (
    DiagramArtifact,
    LintReport,
    activation_count,
    nested_declaration_count,
    noted_names,
)
from c2u.views import DiagramType

_DEFAULT_CONFIG = RunConfig()


@dataclass
class Observation:
    """Everything measured for one (project, diagram type) pair."""

    project_id: str
    diagram_type: DiagramType
    ir_entity_names: set[str]
    diagrams: list[tuple[DiagramArtifact, LintReport]]
    ir_entity_count: int = -1

    def __post_init__(self) -> None:
        if self.ir_entity_count < 0:
            self.ir_entity_count = len(self.ir_entity_names)

    def diagram_element_names(self) -> set[str]:
        out: set[str] = set()
        for art, _ in self.diagrams:
            out |= art.element_names()
        return out

    def captured_entities(self) -> set[str]:
        return self.ir_entity_names & self.diagram_element_names()


# ---------------------------------------------------------------------------
# Eq. 1-3, Eq. 5


def entity_recall(obs: Observation) -> tuple[float | None, list[str]]:
    """(recall, warnings); recall is None for system_context."""
    if obs.diagram_type == DiagramType.SYSTEM_CONTEXT:
        return None, []
    if obs.ir_entity_count == 0:
        return 0.0, ["entity recall over an empty IR reported as 0"]
    return len(obs.captured_entities()) / obs.ir_entity_count, []


def relationship_precision(obs: Observation) -> tuple[float | None, list[str]]:
    """(precision, warnings); precision is None for activity."""
    if obs.diagram_type == DiagramType.ACTIVITY:
        return None, []
    declared = obs.ir_entity_names | obs.diagram_element_names()
    total = 0
    valid = 0
    for art, _ in obs.diagrams:
        for rel in art.relationships:
            total += 1
            if rel.source in declared and rel.target in declared:
                valid += 1
    if total == 0:
        return 1.0, ["no relationships generated; precision vacuously 1.0"]
    return valid / total, []


def validity_rate(batch: Iterable[Observation]) -> float:
    """Percent of diagrams (across the batch) that lint valid untouched."""
    total = 0
    valid = 0
    for obs in batch:
        for _, report in obs.diagrams:
            total += 1
            if report.verdict == "valid":
                valid += 1
    if total == 0:
        raise ValueError("validity_rate over an empty batch")
    return 100.0 * valid / total


def sci(elements: float, relationships: float) -> float:
    if elements < 0 or relationships < 0:
        raise ValueError("sci arguments must be non-negative")
    if elements == 0:
        return 0.0
    return elements * math.log2(1.0 + 2.0 * relationships / elements)


# ---------------------------------------------------------------------------
# quality sub-scores (Eq. 4 inputs)


@dataclass
class QualitySubscores:
    density: float
    connectivity: float
    labeling: float
    documentation: float
    structure: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.density, self.connectivity, self.labeling, self.documentation, self.structure)


def quality_score(subs: QualitySubscores) -> float:
    vals = subs.as_tuple()
    if any(not (0 <= v <= 100) for v in vals):
        raise ValueError("sub-scores must lie in [0, 100]")
    return sum(vals) / 5.0


_WORD_SPLIT = re.compile(r"[A-Z]+(?![a-z])|[A-Z]?[a-z0-9]+")


def _descriptive(name: str) -> bool:
    words = []
    for chunk in re.split(r"[\s_\-.]+", name):
        words.extend(_WORD_SPLIT.findall(chunk))
    return len(words) >= 2


def _incident_names(art: DiagramArtifact) -> set[str]:
    out = set()
    for r in art.relationships:
        out.add(r.source)
        out.add(r.target)
    return out


def _density_score(art: DiagramArtifact, config: RunConfig) -> float:
    e = len(art.elements)
    if e == 0:
        return 0.0
    lo, hi = config.density_bands[art.diagram_type.value]
    rho = len(art.relationships) / e
    if lo <= rho <= hi:
        return 100.0
    dist = (lo - rho) if rho < lo else (rho - hi)
    width = max(hi - lo, 1e-9)
    return 100.0 * max(0.0, 1.0 - dist / width)


def _connectivity_score(art: DiagramArtifact) -> float:
    e = len(art.elements)
    if e == 0:
        return 0.0
    incident = _incident_names(art)
    return 100.0 * sum(1 for n in art.elements if n in incident) / e


def _labeling_score(art: DiagramArtifact) -> float:
    r = len(art.relationships)
    if r == 0:
        return 0.0
    return 100.0 * sum(1 for rel in art.relationships if rel.label and rel.label.strip()) / r


def _documentation_score(art: DiagramArtifact) -> float:
    e = len(art.elements)
    if e == 0:
        return 0.0
    noted = noted_names(art.text)
    good = sum(1 for n in art.elements if _descriptive(n) or n in noted)
    return 100.0 * good / e


def _structure_items(art: DiagramArtifact) -> list[bool]:
    dt = art.diagram_type
    kinds = art.elements
    rels = art.relationships
    incident = _incident_names(art)
    if dt == DiagramType.ACTIVITY:
        ifs = sum(1 for l in art.text.splitlines() if re.match(r"\s*if\s*\(", l, re.IGNORECASE))
        endifs = sum(1 for l in art.text.splitlines() if re.match(r"\s*endif\b", l, re.IGNORECASE))
        return [
            any(k == "start" for k in kinds.values()),
            any(k == "stop" for k in kinds.values()),
            ifs == endifs,
        ]
    if dt == DiagramType.SEQUENCE:
        endpoints_declared = all(r.source in kinds and r.target in kinds for r in rels)
        return [endpoints_declared, activation_count(art.text) >= 1]
    if dt == DiagramType.CLASS:
        has_hierarchy = any(r.arrow in ("generalization", "realization", "composition") for r in rels)
        interfaces = [n for n, k in kinds.items() if k == "interface"]
        no_orphan_iface = all(n in incident for n in interfaces)
        return [has_hierarchy, no_orphan_iface]
    if dt == DiagramType.COMPONENT:
        return [all(n in incident for n in kinds)]
    if dt == DiagramType.DEPLOYMENT:
        typed = all(r.source in kinds and r.target in kinds for r in rels)
        return [nested_declaration_count(art.text, dt) >= 1, typed]
    if dt == DiagramType.USECASE:
        actors = {n for n, k in kinds.items() if k == "actor"}
        usecases = {n for n, k in kinds.items() if k == "usecase"}
        linked = all(
            any((r.source == u and r.target in actors) or (r.target == u and r.source in actors) for r in rels)
            for u in usecases
        )
        return [len(actors) >= 1, linked]
    if dt == DiagramType.SYSTEM_CONTEXT:
        systems = sum(1 for k in kinds.values() if k == "system")
        externals = sum(1 for k in kinds.values() if k in ("actor", "external"))
        return [systems == 1, externals >= 1]
    raise ValueError(f"unknown diagram type {dt!r}")


def _structure_score(art: DiagramArtifact) -> float:
    items = _structure_items(art)
    return 100.0 * sum(items) / len(items)


def quality_subscores(art: DiagramArtifact, config: RunConfig | None = None) -> QualitySubscores:
    config = config or _DEFAULT_CONFIG
    return QualitySubscores(
        density=_density_score(art, config),
        connectivity=_connectivity_score(art),
        labeling=_labeling_score(art),
        documentation=_documentation_score(art),
        structure=_structure_score(art),
    )


# ---------------------------------------------------------------------------
# per-observation report


@dataclass
class MetricsReport:
    project_id: str
    diagram_type: str
    diagram_count: int
    entity_recall: float | None
    relationship_precision: float | None
    validity_pct: float
    quality: float
    density: float
    connectivity: float
    labeling: float
    documentation: float
    structure: float
    mean_elements: float
    mean_relationships: float
    sci: float
    ir_entity_count: int
    warnings: list[str] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {
            "connectivity": round(self.connectivity, 4),
            "density": round(self.density, 4),
            "diagram_count": self.diagram_count,
            "diagram_type": self.diagram_type,
            "documentation": round(self.documentation, 4),
            "entity_recall": None if self.entity_recall is None else round(self.entity_recall, 6),
            "ir_entity_count": self.ir_entity_count,
            "labeling": round(self.labeling, 4),
            "mean_elements": round(self.mean_elements, 4),
            "mean_relationships": round(self.mean_relationships, 4),
            "project_id": self.project_id,
            "quality": round(self.quality, 4),
            "relationship_precision": None if self.relationship_precision is None else round(self.relationship_precision, 6),
            "sci": round(self.sci, 4),
            "structure": round(self.structure, 4),
            "validity_pct": round(self.validity_pct, 4),
            "warnings": list(self.warnings),
        }


def _mean(xs: list[float]) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def compute_report(obs: Observation, config: RunConfig | None = None) -> MetricsReport:
    config = config or _DEFAULT_CONFIG
    recall, w1 = entity_recall(obs)
    precision, w2 = relationship_precision(obs)
    subs = [quality_subscores(art, config) for art, _ in obs.diagrams]
    qs = [quality_score(s) for s in subs]
    e_counts = [float(len(art.elements)) for art, _ in obs.diagrams]
    r_counts = [float(len(art.relationships)) for art, _ in obs.diagrams]
    scis = [sci(e, r) for e, r in zip(e_counts, r_counts)]
    valid = sum(1 for _, rep in obs.diagrams if rep.verdict == "valid")
    return MetricsReport(
        project_id=obs.project_id,
        diagram_type=obs.diagram_type.value,
        diagram_count=len(obs.diagrams),
        entity_recall=recall,
        relationship_precision=precision,
        validity_pct=100.0 * valid / len(obs.diagrams) if obs.diagrams else 0.0,
        quality=_mean(qs),
        density=_mean([s.density for s in subs]),
        connectivity=_mean([s.connectivity for s in subs]),
        labeling=_mean([s.labeling for s in subs]),
        documentation=_mean([s.documentation for s in subs]),
        structure=_mean([s.structure for s in subs]),
        mean_elements=_mean(e_counts),
        mean_relationships=_mean(r_counts),
        sci=_mean(scis),
        ir_entity_count=obs.ir_entity_count,
        warnings=w1 + w2,
    )


# ---------------------------------------------------------------------------
# ablation (Table 7 regime classifier)


@dataclass
class AblationCounts:
    no_correction: int = 0
    partially_corrected: int = 0
    uncorrectable: int = 0

    def total(self) -> int:
        return self.no_correction + self.partially_corrected + self.uncorrectable


def classify_observation(obs: Observation) -> str:
    verdicts = [rep.verdict for _, rep in obs.diagrams]
    if any(v == "uncorrectable" for v in verdicts):
        return "uncorrectable"
    if all(v == "valid" for v in verdicts):
        return "no_correction"
    return "partially_corrected"


def ablation_classify(batch: Iterable[Observation]) -> AblationCounts:
    counts = AblationCounts()
    for obs in batch:
        bucket = classify_observation(obs)
        if bucket == "no_correction":
            counts.no_correction += 1
        elif bucket == "uncorrectable":
            counts.uncorrectable += 1
        else:
            counts.partially_corrected += 1
    return counts


# ---------------------------------------------------------------------------
# batch tables (the Tables 2-7 layouts)


def _fmt(x: float | None, digits: int = 3) -> str:
    return "N/A" if x is None else f"{x:.{digits}f}"


def _rows_by(reports: list[MetricsReport], key_fn) -> dict[str, list[MetricsReport]]:
    grouped: dict[str, list[MetricsReport]] = {}
    for r in reports:
        grouped.setdefault(key_fn(r), []).append(r)
    return dict(sorted(grouped.items()))


def _agg_row(rs: list[MetricsReport]) -> dict[str, float | None]:
    recalls = [r.entity_recall for r in rs if r.entity_recall is not None]
    precs = [r.relationship_precision for r in rs if r.relationship_precision is not None]
    return {
        "validity_pct": _mean([r.validity_pct for r in rs]),
        "recall": _mean(recalls) if recalls else None,
        "precision": _mean(precs) if precs else None,
        "quality": _mean([r.quality for r in rs]),
        "density": _mean([r.density for r in rs]),
        "connectivity": _mean([r.connectivity for r in rs]),
        "labeling": _mean([r.labeling for r in rs]),
        "documentation": _mean([r.documentation for r in rs]),
        "structure": _mean([r.structure for r in rs]),
        "mean_E": _mean([r.mean_elements for r in rs]),
        "mean_R": _mean([r.mean_relationships for r in rs]),
        "sci": _mean([r.sci for r in rs]),
    }


def batch_tables(
    observations: list[Observation],
    reports: list[MetricsReport],
    language_by_project: dict[str, str] | None = None,
) -> dict[str, str]:
    """CSV texts keyed by table name, mirroring the published table layouts."""
    language_by_project = language_by_project or {}
    tables: dict[str, str] = {}

    by_type = _rows_by(reports, lambda r: r.diagram_type)
    lines = ["diagram_type,validity_pct,recall,precision,quality"]
    for dt, rs in by_type.items():
        a = _agg_row(rs)
        lines.append(f"{dt},{_fmt(a['validity_pct'], 1)},{_fmt(a['recall'])},{_fmt(a['precision'])},{_fmt(a['quality'], 1)}")
    tables["by_type"] = "\n".join(lines) + "\n"

    lines = ["diagram_type,quality,density,connectivity,labeling,documentation,structure"]
    for dt, rs in by_type.items():
        a = _agg_row(rs)
        lines.append(
            f"{dt},{_fmt(a['quality'], 1)},{_fmt(a['density'], 1)},{_fmt(a['connectivity'], 1)},"
            f"{_fmt(a['labeling'], 1)},{_fmt(a['documentation'], 1)},{_fmt(a['structure'], 1)}"
        )
    tables["subscores"] = "\n".join(lines) + "\n"

    if language_by_project:
        by_lang = _rows_by(reports, lambda r: language_by_project.get(r.project_id, "unknown"))
        lines = ["language,validity_pct,recall,precision,quality"]
        for lang, rs in by_lang.items():
            a = _agg_row(rs)
            lines.append(f"{lang},{_fmt(a['validity_pct'], 1)},{_fmt(a['recall'])},{_fmt(a['precision'])},{_fmt(a['quality'], 1)}")
        tables["by_language"] = "\n".join(lines) + "\n"

    by_project = _rows_by(reports, lambda r: r.project_id)
    lines = ["language,project,ir_entities,validity_pct,recall,quality"]
    for proj, rs in by_project.items():
        a = _agg_row(rs)
        lang = language_by_project.get(proj, "unknown")
        ir_n = rs[0].ir_entity_count if rs else 0
        lines.append(f"{lang},{proj},{ir_n},{_fmt(a['validity_pct'], 1)},{_fmt(a['recall'])},{_fmt(a['quality'], 1)}")
    tables["by_project"] = "\n".join(lines) + "\n"

    lines = ["diagram_type,mean_E,mean_R,sci"]
    for dt, rs in by_type.items():
        a = _agg_row(rs)
        lines.append(f"{dt},{_fmt(a['mean_E'], 1)},{_fmt(a['mean_R'], 1)},{_fmt(a['sci'], 1)}")
    tables["structure_index"] = "\n".join(lines) + "\n"

    obs_by_type: dict[str, list[Observation]] = {}
    for obs in observations:
        obs_by_type.setdefault(obs.diagram_type.value, []).append(obs)
    lines = ["diagram_type,no_correction,partially_corrected,uncorrectable,total"]
    overall = AblationCounts()
    for dt in sorted(obs_by_type):
        c = ablation_classify(obs_by_type[dt])
        overall.no_correction += c.no_correction
        overall.partially_corrected += c.partially_corrected
        overall.uncorrectable += c.uncorrectable
        lines.append(f"{dt},{c.no_correction},{c.partially_corrected},{c.uncorrectable},{c.total()}")
    lines.append(f"overall,{overall.no_correction},{overall.partially_corrected},{overall.uncorrectable},{overall.total()}")
    tables["ablation"] = "\n".join(lines) + "\n"
    return tables
