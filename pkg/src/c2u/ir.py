"""Language-agnostic intermediate representation of a source repository.

The IR is the shared currency of the whole pipeline: extractors produce it,
normalization rewrites it, view compaction projects it, and the metrics layer
counts against it. It is a plain JSON document on disk (suffix ``.ir.json``)
with sorted keys and no insignificant whitespace, so equal IRs serialize to
byte-identical documents. That determinism is load-bearing: the compaction
size measurement is exact only because serialization is canonical.

Invariants:
- a normalized IR (``normalized=True``) has only canonical visibilities,
  simple (unqualified) inheritance targets, and unique class names;
- raw IRs may carry anything the extractors saw, including empty visibility
  strings and dotted parent names;
- element count = len(classes) + len(functions).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable


class Visibility(str, Enum):
    """The four-value UML visibility schema."""

    PUBLIC = "public"
    PRIVATE = "private"
    PROTECTED = "protected"
    PACKAGE = "package"


CANONICAL_VISIBILITIES = frozenset(v.value for v in Visibility)

#: Separators that may qualify an inheritance target (Java/Python dots,
#: PHP namespaces, occasional scope-resolution colons).
QUALIFICATION_SEPARATORS = (".", "\\", "::")


class IRSchemaError(ValueError):
    """Raised by ``deserialize`` when a document violates the IR schema.

    ``path`` names the offending location, JSON-pointer style (``/classes``).
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass
class AttributeDef:
    name: str
    visibility: str = ""
    type_annotation: str | None = None


@dataclass
class MethodDef:
    name: str
    visibility: str = ""
    type_annotation: str | None = None
    parameters: list[tuple[str, str | None]] = field(default_factory=list)
    calls: list[str] = field(default_factory=list)


@dataclass
class ClassDef:
    """One class-like declaration (class, interface, or enum)."""

    name: str
    kind: str = "class"  # class | interface | enum
    visibility: str = ""
    qualified_name: str | None = None
    methods: list[MethodDef] = field(default_factory=list)
    attributes: list[AttributeDef] = field(default_factory=list)
    extends: list[str] = field(default_factory=list)
    implements: list[str] = field(default_factory=list)
    source_file: str = ""

    def has_inheritance(self) -> bool:
        return bool(self.extends or self.implements)


@dataclass
class FunctionDef:
    """A free (module-level) function; ``line_count`` is the importance hint."""

    name: str
    source_file: str = ""
    parameters: list[tuple[str, str | None]] = field(default_factory=list)
    calls: list[str] = field(default_factory=list)
    line_count: int = 0


@dataclass
class ProjectIR:
    project_name: str
    languages: set[str] = field(default_factory=set)
    classes: list[ClassDef] = field(default_factory=list)
    functions: list[FunctionDef] = field(default_factory=list)
    metadata: dict[str, str] = field(default_factory=dict)
    normalized: bool = False

    def element_count(self) -> int:
        """Denominator of the entity-recall metric."""
        return len(self.classes) + len(self.functions)

    def element_names(self) -> set[str]:
        return {c.name for c in self.classes} | {f.name for f in self.functions}


# ---------------------------------------------------------------------------
# canonical serialization


def _attr_to_obj(a: AttributeDef) -> dict[str, Any]:
    return {
        "name": a.name,
        "type_annotation": a.type_annotation,
        "visibility": a.visibility,
    }


def _method_to_obj(m: MethodDef) -> dict[str, Any]:
    return {
        "calls": list(m.calls),
        "name": m.name,
        "parameters": [[n, t] for n, t in m.parameters],
        "type_annotation": m.type_annotation,
        "visibility": m.visibility,
    }


def _class_to_obj(c: ClassDef) -> dict[str, Any]:
    return {
        "attributes": [_attr_to_obj(a) for a in c.attributes],
        "extends": list(c.extends),
        "implements": list(c.implements),
        "kind": c.kind,
        "methods": [_method_to_obj(m) for m in c.methods],
        "name": c.name,
        "qualified_name": c.qualified_name,
        "source_file": c.source_file,
        "visibility": c.visibility,
    }


def _function_to_obj(f: FunctionDef) -> dict[str, Any]:
    return {
        "calls": list(f.calls),
        "line_count": f.line_count,
        "name": f.name,
        "parameters": [[n, t] for n, t in f.parameters],
        "source_file": f.source_file,
    }


def to_document(ir: ProjectIR) -> dict[str, Any]:
    """JSON-ready dict with deterministic collection ordering."""
    return {
        "classes": [_class_to_obj(c) for c in ir.classes],
        "functions": [_function_to_obj(f) for f in ir.functions],
        "languages": sorted(ir.languages),
        "metadata": dict(sorted(ir.metadata.items())),
        "normalized": ir.normalized,
        "project_name": ir.project_name,
    }


def canonical_json(obj: Any) -> bytes:
    """Key-sorted, whitespace-free UTF-8 JSON. Byte-identical for equal values."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def serialize(ir: ProjectIR) -> bytes:
    return canonical_json(to_document(ir))


# ---------------------------------------------------------------------------
# deserialization with path-carrying validation


def _expect(obj: Any, typ: type | tuple, path: str) -> Any:
    if not isinstance(obj, typ):
        names = typ.__name__ if isinstance(typ, type) else "/".join(t.__name__ for t in typ)
        raise IRSchemaError(path, f"expected {names}, got {type(obj).__name__}")
    return obj


def _parse_params(obj: Any, path: str) -> list[tuple[str, str | None]]:
    _expect(obj, list, path)
    out = []
    for i, pair in enumerate(obj):
        _expect(pair, list, f"{path}/{i}")
        if len(pair) != 2:
            raise IRSchemaError(f"{path}/{i}", "parameter must be a [name, type] pair")
        name = _expect(pair[0], str, f"{path}/{i}/0")
        if pair[1] is not None:
            _expect(pair[1], str, f"{path}/{i}/1")
        out.append((name, pair[1]))
    return out


def _parse_str_list(obj: Any, path: str) -> list[str]:
    _expect(obj, list, path)
    return [_expect(s, str, f"{path}/{i}") for i, s in enumerate(obj)]


def _parse_method(obj: Any, path: str) -> MethodDef:
    _expect(obj, dict, path)
    m = MethodDef(name=_expect(obj.get("name"), str, f"{path}/name"))
    m.visibility = _expect(obj.get("visibility", ""), str, f"{path}/visibility")
    ta = obj.get("type_annotation")
    m.type_annotation = None if ta is None else _expect(ta, str, f"{path}/type_annotation")
    m.parameters = _parse_params(obj.get("parameters", []), f"{path}/parameters")
    m.calls = _parse_str_list(obj.get("calls", []), f"{path}/calls")
    return m


def _parse_attribute(obj: Any, path: str) -> AttributeDef:
    _expect(obj, dict, path)
    a = AttributeDef(name=_expect(obj.get("name"), str, f"{path}/name"))
    a.visibility = _expect(obj.get("visibility", ""), str, f"{path}/visibility")
    ta = obj.get("type_annotation")
    a.type_annotation = None if ta is None else _expect(ta, str, f"{path}/type_annotation")
    return a


def _parse_class(obj: Any, path: str) -> ClassDef:
    _expect(obj, dict, path)
    c = ClassDef(name=_expect(obj.get("name"), str, f"{path}/name"))
    c.kind = _expect(obj.get("kind", "class"), str, f"{path}/kind")
    if c.kind not in ("class", "interface", "enum"):
        raise IRSchemaError(f"{path}/kind", f"unknown class kind {c.kind!r}")
    c.visibility = _expect(obj.get("visibility", ""), str, f"{path}/visibility")
    qn = obj.get("qualified_name")
    c.qualified_name = None if qn is None else _expect(qn, str, f"{path}/qualified_name")
    c.methods = [_parse_method(m, f"{path}/methods/{i}") for i, m in enumerate(_expect(obj.get("methods", []), list, f"{path}/methods"))]
    c.attributes = [_parse_attribute(a, f"{path}/attributes/{i}") for i, a in enumerate(_expect(obj.get("attributes", []), list, f"{path}/attributes"))]
    c.extends = _parse_str_list(obj.get("extends", []), f"{path}/extends")
    c.implements = _parse_str_list(obj.get("implements", []), f"{path}/implements")
    c.source_file = _expect(obj.get("source_file", ""), str, f"{path}/source_file")
    return c


def _parse_function(obj: Any, path: str) -> FunctionDef:
    _expect(obj, dict, path)
    f = FunctionDef(name=_expect(obj.get("name"), str, f"{path}/name"))
    if not f.name:
        raise IRSchemaError(f"{path}/name", "function name must be non-empty")
    f.source_file = _expect(obj.get("source_file", ""), str, f"{path}/source_file")
    f.parameters = _parse_params(obj.get("parameters", []), f"{path}/parameters")
    f.calls = _parse_str_list(obj.get("calls", []), f"{path}/calls")
    f.line_count = _expect(obj.get("line_count", 0), int, f"{path}/line_count")
    return f


def _validate_normalized(ir: ProjectIR) -> None:
    """Schema checks that only hold for normalized IRs."""
    seen: set[str] = set()
    for i, c in enumerate(ir.classes):
        if c.name in seen:
            raise IRSchemaError(f"/classes/{i}/name", f"duplicate class name {c.name!r} in normalized IR")
        seen.add(c.name)
        if c.visibility not in CANONICAL_VISIBILITIES:
            raise IRSchemaError(f"/classes/{i}/visibility", f"non-canonical visibility {c.visibility!r} in normalized IR")
        for j, m in enumerate(c.methods):
            if m.visibility not in CANONICAL_VISIBILITIES:
                raise IRSchemaError(f"/classes/{i}/methods/{j}/visibility", f"non-canonical visibility {m.visibility!r} in normalized IR")
        for j, a in enumerate(c.attributes):
            if a.visibility not in CANONICAL_VISIBILITIES:
                raise IRSchemaError(f"/classes/{i}/attributes/{j}/visibility", f"non-canonical visibility {a.visibility!r} in normalized IR")
        for key in ("extends", "implements"):
            for j, parent in enumerate(getattr(c, key)):
                if any(sep in parent for sep in QUALIFICATION_SEPARATORS):
                    raise IRSchemaError(f"/classes/{i}/{key}/{j}", f"qualified inheritance target {parent!r} in normalized IR")


def deserialize(data: bytes | str) -> ProjectIR:
    """Inverse of ``serialize``; raises IRSchemaError naming the offending path."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise IRSchemaError("/", f"not valid JSON: {e}") from e
    _expect(doc, dict, "/")
    for key in ("project_name", "classes", "functions"):
        if key not in doc:
            raise IRSchemaError(f"/{key}", "missing required key")
    ir = ProjectIR(project_name=_expect(doc["project_name"], str, "/project_name"))
    ir.languages = set(_parse_str_list(doc.get("languages", []), "/languages"))
    ir.classes = [_parse_class(c, f"/classes/{i}") for i, c in enumerate(_expect(doc["classes"], list, "/classes"))]
    ir.functions = [_parse_function(f, f"/functions/{i}") for i, f in enumerate(_expect(doc["functions"], list, "/functions"))]
    meta = _expect(doc.get("metadata", {}), dict, "/metadata")
    ir.metadata = {_expect(k, str, "/metadata"): _expect(v, str, f"/metadata/{k}") for k, v in meta.items()}
    ir.normalized = _expect(doc.get("normalized", False), bool, "/normalized")
    if ir.normalized:
        _validate_normalized(ir)
    return ir


# ---------------------------------------------------------------------------
# merge


def _dedupe_name(name: str, taken: set[str]) -> str:
    """First free name among name, name_2, name_3, ... (never drops an element)."""
    if name not in taken:
        return name
    n = 2
    while f"{name}_{n}" in taken:
        n += 1
    return f"{name}_{n}"


def merge(irs: list[ProjectIR]) -> ProjectIR:
    """Union of per-language IRs from the same repository.

    Class names colliding across inputs are disambiguated by suffixing the
    contributing IR's language identifier (``App`` + ``App`` from java and
    python become ``App_java`` and ``App_python``); if the suffixed name is
    itself taken, an ordinal is appended. Element counts are preserved
    exactly: nothing is silently dropped.
    """
    if not irs:
        raise ValueError("merge requires at least one IR")
    if len(irs) == 1:
        return irs[0]

    merged = ProjectIR(project_name=irs[0].project_name)
    merged.normalized = False

    colliding = _collect_collisions(irs)
    taken: set[str] = set()
    for src in irs:
        merged.languages |= src.languages
        lang_tag = "_".join(sorted(src.languages)) or "unknown"
        for c in src.classes:
            new = c
            if c.name in colliding or c.name in taken:
                renamed = _dedupe_name(f"{c.name}_{lang_tag}", taken)
                new = ClassDef(
                    name=renamed, kind=c.kind, visibility=c.visibility,
                    qualified_name=c.qualified_name, methods=c.methods,
                    attributes=c.attributes, extends=c.extends,
                    implements=c.implements, source_file=c.source_file,
                )
            taken.add(new.name)
            merged.classes.append(new)
        merged.functions.extend(src.functions)
        for k, v in src.metadata.items():
            merged.metadata.setdefault(k, v)
    return merged


def _collect_collisions(irs: Iterable[ProjectIR]) -> set[str]:
    seen: set[str] = set()
    collide: set[str] = set()
    for src in irs:
        local = {c.name for c in src.classes}
        collide |= seen & local
        seen |= local
    return collide
