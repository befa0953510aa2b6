"""Diagram-specific IR view compaction under hard byte budgets.

A view is a deterministic projection of a normalized IR for one diagram
type, guaranteed to serialize under the type's byte budget (60 KiB for
SINGLE-path types, 100 KiB for DEEP-path types). Compaction is three steps:

1. selection - every element is scored by a type-aware importance function
   and ranked (score descending, name ascending as the tie-break);
2. detail scaling - per-class method/attribute caps shrink as the number of
   in-play elements grows (20/20 under 50 elements down to 5/5 at 1000+);
3. iterative shrinking - the candidate budget starts at the element count
   and is ceiling-halved until the serialized view fits.

Everything here is pure computation: no model calls, no network, and equal
inputs yield byte-identical views. The measured size is the exact length of
the canonical serialization, not an estimate, which is what makes the
shrink loop's termination argument airtight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable

from c2u.config import RunConfig
from c2u.ir import ClassDef, FunctionDef, ProjectIR, canonical_json

_DEFAULT_CONFIG = RunConfig()


class DiagramType(str, Enum):
    CLASS = "class"
    SEQUENCE = "sequence"
    ACTIVITY = "activity"
    USECASE = "usecase"
    COMPONENT = "component"
    DEPLOYMENT = "deployment"
    SYSTEM_CONTEXT = "system_context"


SINGLE_PATH_TYPES = frozenset({DiagramType.COMPONENT, DiagramType.DEPLOYMENT, DiagramType.SYSTEM_CONTEXT})
DEEP_PATH_TYPES = frozenset({DiagramType.CLASS, DiagramType.SEQUENCE, DiagramType.ACTIVITY, DiagramType.USECASE})
BEHAVIORAL_TYPES = frozenset({DiagramType.SEQUENCE, DiagramType.ACTIVITY})

#: Detail-scaling tiers: (exclusive upper element bound, (max_methods, max_attributes)).
DETAIL_TIERS: tuple[tuple[int, tuple[int, int]], ...] = (
    (50, (20, 20)),
    (200, (12, 12)),
    (1000, (8, 8)),
)
DETAIL_FLOOR = (5, 5)


class IrreducibleViewError(RuntimeError):
    """A single-element view still exceeds the byte budget."""


def budget_bytes(dt: DiagramType, config: RunConfig | None = None) -> int:
    config = config or _DEFAULT_CONFIG
    return config.budget_single if dt in SINGLE_PATH_TYPES else config.budget_deep


@dataclass
class ImportanceScore:
    name: str
    element_kind: str  # "class" | "function"
    score: float
    member_weight: float = 0.0
    inheritance_weight: float = 0.0
    name_bonus: float = 0.0
    call_chain_weight: float = 0.0


@dataclass
class IRView:
    diagram_type: DiagramType
    elements: list[dict[str, Any]]
    detail_caps: tuple[int, int]
    byte_size: int
    shrink_iterations: int
    source_element_count: int

    def document(self) -> dict[str, Any]:
        return _view_document(self.diagram_type, self.detail_caps, self.elements, self.source_element_count)


def score_class(c: ClassDef, dt: DiagramType, config: RunConfig | None = None) -> ImportanceScore:
    """members + W_inh for any inheritance + W_name for architectural names."""
    config = config or _DEFAULT_CONFIG
    members = float(len(c.methods) + len(c.attributes))
    inh = config.weight_inheritance if c.has_inheritance() else 0.0
    lowered = c.name.lower()
    bonus = config.weight_name if any(p.lower() in lowered for p in config.name_patterns) else 0.0
    return ImportanceScore(
        name=c.name,
        element_kind="class",
        score=members + inh + bonus,
        member_weight=members,
        inheritance_weight=inh,
        name_bonus=bonus,
    )


def score_function(f: FunctionDef, dt: DiagramType, config: RunConfig | None = None) -> ImportanceScore:
    """line count, plus W_call per callee for the behavioral diagram types."""
    config = config or _DEFAULT_CONFIG
    call_w = config.weight_call * len(f.calls) if dt in BEHAVIORAL_TYPES else 0.0
    base = float(f.line_count)
    return ImportanceScore(
        name=f.name,
        element_kind="function",
        score=base + call_w,
        member_weight=base,
        call_chain_weight=call_w,
    )


def _ranked_raw(ir: ProjectIR, dt: DiagramType, config: RunConfig) -> list[tuple[float, str, int, ClassDef | FunctionDef]]:
    """(score, name, kind_rank, element) in retention order; the allocation-light
    path shared by ranking, selection, and the shrink loop."""
    w_inh = config.weight_inheritance
    w_name = config.weight_name
    patterns = tuple(p.lower() for p in config.name_patterns)
    w_call = config.weight_call if dt in BEHAVIORAL_TYPES else 0.0
    items: list[tuple[float, str, int, ClassDef | FunctionDef]] = []
    for c in ir.classes:
        s = float(len(c.methods) + len(c.attributes))
        if c.extends or c.implements:
            s += w_inh
        lowered = c.name.lower()
        for p in patterns:
            if p in lowered:
                s += w_name
                break
        items.append((s, c.name, 0, c))
    for f in ir.functions:
        items.append((float(f.line_count) + w_call * len(f.calls), f.name, 1, f))
    items.sort(key=lambda t: (-t[0], t[1], t[2]))
    return items


def rank_elements(ir: ProjectIR, dt: DiagramType, config: RunConfig | None = None) -> list[tuple[ImportanceScore, ClassDef | FunctionDef]]:
    """All elements with scores, in retention order (classes before functions
    on full ties, so the order is total)."""
    config = config or _DEFAULT_CONFIG
    out: list[tuple[ImportanceScore, ClassDef | FunctionDef]] = []
    for _, _, kind_rank, el in _ranked_raw(ir, dt, config):
        score = score_class(el, dt, config) if kind_rank == 0 else score_function(el, dt, config)
        out.append((score, el))
    return out


def select_elements(ir: ProjectIR, dt: DiagramType, budget: int, config: RunConfig | None = None) -> list[ClassDef | FunctionDef]:
    """Top ``budget`` elements by (score desc, name asc)."""
    if budget < 1:
        raise ValueError("element budget must be >= 1")
    config = config or _DEFAULT_CONFIG
    return [el for _, _, _, el in _ranked_raw(ir, dt, config)[:budget]]


def scale_detail(element_count: int) -> tuple[int, int]:
    """(max_methods, max_attributes) for the number of elements in play."""
    if element_count < 0:
        raise ValueError("element_count must be >= 0")
    for bound, caps in DETAIL_TIERS:
        if element_count < bound:
            return caps
    return DETAIL_FLOOR


# ---------------------------------------------------------------------------
# per-type projections

_INFRA_KEY_PATTERNS = ("docker", "compose", "yaml", "yml", "config", "port", "image")
_METADATA_VALUE_CAP = 400


def _dir_of(source_file: str) -> str:
    return source_file.rsplit("/", 1)[0] if "/" in source_file else "."


def _project_class_view(el: ClassDef | FunctionDef, caps: tuple[int, int]) -> dict[str, Any]:
    if isinstance(el, FunctionDef):
        return {"kind": "function", "name": el.name}
    max_m, max_a = caps
    return {
        "attributes": [
            {"name": a.name, "type": a.type_annotation, "visibility": a.visibility}
            for a in el.attributes[:max_a]
        ],
        "extends": list(el.extends),
        "implements": list(el.implements),
        "kind": el.kind,
        "methods": [
            {"name": m.name, "parameters": [p for p, _ in m.parameters], "visibility": m.visibility}
            for m in el.methods[:max_m]
        ],
        "name": el.name,
        "visibility": el.visibility,
    }


def _project_behavioral(el: ClassDef | FunctionDef, caps: tuple[int, int]) -> dict[str, Any]:
    max_m, _ = caps
    if isinstance(el, FunctionDef):
        return {"calls": el.calls[:max_m], "line_count": el.line_count, "name": el.name}
    return {
        "methods": [{"calls": m.calls[:max_m], "name": m.name} for m in el.methods[:max_m]],
        "name": el.name,
    }


def _project_usecase(el: ClassDef | FunctionDef, caps: tuple[int, int]) -> dict[str, Any]:
    if isinstance(el, FunctionDef):
        return {"kind": "function", "name": el.name}
    max_m, _ = caps
    return {
        "name": el.name,
        "public_methods": [m.name for m in el.methods if m.visibility == "public"][:max_m],
    }


def _project_component(el: ClassDef | FunctionDef, caps: tuple[int, int]) -> dict[str, Any]:
    if isinstance(el, FunctionDef):
        return {"directory": _dir_of(el.source_file), "kind": "function", "name": el.name}
    return {
        "directory": _dir_of(el.source_file),
        "extends": list(el.extends),
        "implements": list(el.implements),
        "name": el.name,
    }


def _defined_names(ir: ProjectIR) -> set[str]:
    names = ir.element_names()
    for c in ir.classes:
        names.update(m.name for m in c.methods)
    return names


def _external_call_targets(ir: ProjectIR) -> list[str]:
    defined = _defined_names(ir)
    seen: set[str] = set()
    for c in ir.classes:
        for m in c.methods:
            seen.update(m.calls)
    for f in ir.functions:
        seen.update(f.calls)
    return sorted(seen - defined)


def _deployment_aux(ir: ProjectIR) -> tuple[list[tuple[str, str]], list[str]]:
    infra = [
        (k, v[:_METADATA_VALUE_CAP])
        for k, v in sorted(ir.metadata.items())
        if any(p in k.lower() for p in _INFRA_KEY_PATTERNS)
    ]
    dirs = sorted({_top_dir(x.source_file) for x in ir.classes} | {_top_dir(x.source_file) for x in ir.functions})
    return infra, dirs


def project(
    elements: list[ClassDef | FunctionDef],
    dt: DiagramType,
    caps: tuple[int, int],
    ir: ProjectIR,
    aux_cap: int | None = None,
    _aux: tuple | list | None = None,
) -> list[dict[str, Any]]:
    """Type-specific field retention over an already-selected element list.

    ``aux_cap`` bounds the metadata/directory/external-reference lists that
    the deployment and system-context views derive from the whole IR; the
    shrink loop passes the current element budget so those views shrink too
    (``_aux`` carries those whole-IR scans precomputed across iterations).
    """
    if aux_cap is None:
        aux_cap = max(len(elements), 1)
    aux_cap = max(aux_cap, 1)

    if dt == DiagramType.CLASS:
        return [_project_class_view(el, caps) for el in elements]
    if dt in BEHAVIORAL_TYPES:
        return [_project_behavioral(el, caps) for el in elements]
    if dt == DiagramType.USECASE:
        return [_project_usecase(el, caps) for el in elements]
    if dt == DiagramType.COMPONENT:
        records = [_project_component(el, caps) for el in elements]
        records.sort(key=lambda r: (r["directory"], r["name"]))
        return records
    if dt == DiagramType.DEPLOYMENT:
        infra, dirs = _aux if _aux is not None else _deployment_aux(ir)
        infra_records = [{"key": k, "kind": "metadata", "value": v} for k, v in infra[:aux_cap]]
        dir_records = [{"kind": "directory", "name": d} for d in dirs[:aux_cap]]
        return infra_records + dir_records
    if dt == DiagramType.SYSTEM_CONTEXT:
        publics = [
            {"kind": "class", "name": el.name}
            for el in elements
            if isinstance(el, ClassDef) and el.visibility == "public"
        ]
        targets = _aux if _aux is not None else _external_call_targets(ir)
        externals = [{"kind": "external", "name": t} for t in targets[:aux_cap]]
        return publics + externals
    raise ValueError(f"unknown diagram type {dt!r}")


def _top_dir(source_file: str) -> str:
    return source_file.split("/", 1)[0] if "/" in source_file else "."


# ---------------------------------------------------------------------------
# the shrink loop


def _view_document(dt: DiagramType, caps: tuple[int, int], elements: list[dict], source_count: int) -> dict[str, Any]:
    return {
        "detail_caps": list(caps),
        "diagram_type": dt.value,
        "elements": elements,
        "source_element_count": source_count,
    }


def _envelope_len(dt: DiagramType, caps: tuple[int, int], total: int) -> int:
    return len(canonical_json(_view_document(dt, caps, [], total)))


class _SizedRecords:
    """Records with lazily computed canonical byte lengths.

    Canonical JSON is compositional: a document whose element array holds
    records r1..rn measures envelope + sum(len(blob_i)) + (n-1) commas,
    byte-exact. The shrink loop can therefore compare a candidate view
    against the budget record by record and stop as soon as the running sum
    exceeds the limit; the comparison stays an exact measurement.
    """

    def __init__(self, supplier: Callable[[int], dict[str, Any]], count: int):
        self._supplier = supplier
        self.count = count
        self._records: list[dict[str, Any]] = []
        self._lens: list[int] = []

    def _materialize(self, i: int) -> None:
        while len(self._records) <= i:
            rec = self._supplier(len(self._records))
            self._records.append(rec)
            self._lens.append(len(canonical_json(rec)))

    def exceeds(self, n: int, base: int, limit: int) -> bool:
        size = base + max(0, n - 1)
        if size > limit:
            return True
        for i in range(n):
            self._materialize(i)
            size += self._lens[i]
            if size > limit:
                return True
        return False

    def take(self, n: int) -> list[dict[str, Any]]:
        self._materialize(n - 1) if n > 0 else None
        return self._records[:n]


_DEEP_PROJECTORS: dict[DiagramType, Callable] = {
    DiagramType.CLASS: _project_class_view,
    DiagramType.SEQUENCE: _project_behavioral,
    DiagramType.ACTIVITY: _project_behavioral,
    DiagramType.USECASE: _project_usecase,
}


def generate_view(ir: ProjectIR, dt: DiagramType, config: RunConfig | None = None) -> IRView:
    """Compact ``ir`` into a view for ``dt`` that fits the byte budget.

    The candidate element budget starts at the IR's element count and is
    ceiling-halved until the canonical serialization fits, so the budget
    after k iterations is ceil(count / 2^k) and the loop always terminates
    at budget 1. A single-element view that still exceeds the byte budget
    raises IrreducibleViewError rather than silently truncating.
    """
    if not ir.normalized:
        raise ValueError("generate_view requires a normalized IR")
    config = config or _DEFAULT_CONFIG
    limit = budget_bytes(dt, config)
    ranked = [el for _, _, _, el in _ranked_raw(ir, dt, config)]
    total = len(ranked)

    element_budget = total
    iterations = 0
    # DEEP-path records parallel the ranked order, so one lazy projection per
    # caps tier serves every smaller prefix; the grouped and aggregated
    # SINGLE-path views are cheap and re-projected per iteration.
    projector = _DEEP_PROJECTORS.get(dt)
    cached_caps: tuple[int, int] | None = None
    sized: _SizedRecords | None = None
    aux = None
    if dt == DiagramType.DEPLOYMENT:
        aux = _deployment_aux(ir)
    elif dt == DiagramType.SYSTEM_CONTEXT:
        aux = _external_call_targets(ir)

    while True:
        in_play = min(element_budget, total)
        caps = scale_detail(in_play)
        if projector is not None:
            if caps != cached_caps or sized is None:
                sized = _SizedRecords(lambda i, c=caps: projector(ranked[i], c), total)
                cached_caps = caps
            n_records = in_play
        else:
            records = project(ranked[:in_play], dt, caps, ir, aux_cap=max(element_budget, 1), _aux=aux)
            sized = _SizedRecords(records.__getitem__, len(records))
            n_records = len(records)
        base = _envelope_len(dt, caps, total)
        if not sized.exceeds(n_records, base, limit):
            final = sized.take(n_records)
            blob = canonical_json(_view_document(dt, caps, final, total))
            return IRView(
                diagram_type=dt,
                elements=final,
                detail_caps=caps,
                byte_size=len(blob),
                shrink_iterations=iterations,
                source_element_count=total,
            )
        if element_budget <= 1:
            raise IrreducibleViewError(
                f"single-element {dt.value} view exceeds the {limit}-byte budget"
            )
        element_budget = math.ceil(element_budget / 2)
        iterations += 1


# ---------------------------------------------------------------------------
# file interface


def view_filename(dt: DiagramType) -> str:
    return f"view_{dt.value}.json"


def write_view(view: IRView, out_dir: str | Path) -> Path:
    """Write the view payload; the file content is exactly ``byte_size`` long."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / view_filename(view.diagram_type)
    path.write_bytes(canonical_json(view.document()))
    return path


def explain_csv(ir: ProjectIR, dt: DiagramType, config: RunConfig | None = None) -> str:
    """Ranked score table (CSV) behind the CLI --explain flag."""
    lines = ["rank,name,kind,score,member_weight,inheritance_weight,name_bonus,call_chain_weight"]
    for i, (s, _) in enumerate(rank_elements(ir, dt, config), 1):
        lines.append(
            f"{i},{s.name},{s.element_kind},{s.score:g},{s.member_weight:g},"
            f"{s.inheritance_weight:g},{s.name_bonus:g},{s.call_chain_weight:g}"
        )
    return "\n".join(lines) + "\n"
