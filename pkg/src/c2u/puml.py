"""Pattern-based PlantUML toolkit: extraction, linting, and correction.

This is deliberately not a full PlantUML grammar. A small per-diagram-type
pattern set extracts elements and relationships for the metrics layer, and
a fixed rule engine detects the known syntax pitfalls and repairs the
correctable ones. Validity is defined here, deterministically: a diagram is
valid iff it has zero lint violations. Model-backed correction layers on
top of this engine but never changes a pre-correction verdict.

Rule overview (ids are stable):
  R1 delimiters        all types     fix: insert/relocate @startuml/@enduml
  R2 braces            all types     fix: balance or drop dangling braces
  R3 linetype-ortho    all types     fix: delete the skinparam line
  R4 continue          activity      fix: delete the line
  R5 else-if           activity      fix: rewrite to `elseif`
  R6 device            deployment    fix: rewrite keyword to `node`
  R7 participant-mods  sequence      fix: strip stereotypes/arrow fragments
  R8 placeholder-name  all types     uncorrectable
  R9 c4-constructs     system_context  uncorrectable
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

from c2u.config import RunConfig
from c2u.views import DiagramType

_DEFAULT_CONFIG = RunConfig()


@dataclass
class Relationship:
    source: str
    target: str
    arrow: str  # generalization | realization | dependency | aggregation | composition | message | flow | link
    label: str | None = None


@dataclass
class DiagramArtifact:
    diagram_type: DiagramType
    text: str
    elements: dict[str, str] = field(default_factory=dict)  # name -> kind
    relationships: list[Relationship] = field(default_factory=list)
    scope_label: str | None = None

    def element_names(self) -> set[str]:
        return set(self.elements)


@dataclass
class Violation:
    rule_id: str
    line: int  # 1-based; 0 when the finding is file-level
    excerpt: str


@dataclass
class LintReport:
    violations: list[Violation] = field(default_factory=list)
    fixes_applied: int = 0
    uncorrectable: bool = False

    @property
    def verdict(self) -> str:
        if not self.violations:
            return "valid"
        return "uncorrectable" if self.uncorrectable else "corrected"

    def to_json_obj(self) -> dict:
        return {
            "fixes_applied": self.fixes_applied,
            "uncorrectable": self.uncorrectable,
            "verdict": self.verdict,
            "violations": [
                {"excerpt": v.excerpt, "line": v.line, "rule": v.rule_id} for v in self.violations
            ],
        }


# ---------------------------------------------------------------------------
# extraction

_NAME = r"(?:\"([^\"]+)\"|([\w.$]+))"
_AS = r"(?:\s+as\s+(\w+))?"


def _picked(m: re.Match, quoted: int, bare: int, alias: int) -> str:
    return m.group(alias) or m.group(quoted) or m.group(bare) or ""


_CLASS_DECL = re.compile(rf"^\s*(?:abstract\s+)?(class|interface|enum)\s+{_NAME}{_AS}")
_CLASS_ARROWS = [
    ("--|>", "generalization", False), ("<|--", "generalization", True),
    ("..|>", "realization", False), ("<|..", "realization", True),
    ("-->", "dependency", False), ("<--", "dependency", True),
    ("..>", "dependency", False), ("<..", "dependency", True),
    ("o--", "aggregation", False), ("--o", "aggregation", True),
    ("*--", "composition", False), ("--*", "composition", True),
]
_SEQ_DECL = re.compile(rf"^\s*(participant|actor)\s+{_NAME}{_AS}")
_SEQ_MSG = re.compile(r"^\s*([\w.$]+)\s*(->>|-->|->)\s*([\w.$]+)\s*(?:\+\+|--)?\s*(?::\s*(.*))?$")
_COMPONENT_DECL = re.compile(rf"^\s*component\s+{_NAME}{_AS}")
_BRACKET = re.compile(r"\[([^\]\[]+)\]")
_GENERIC_ARROW = re.compile(
    r"^\s*(\[[^\]]+\]|\([^)]+\)|[\w.$]+)\s*(?:\"[^\"]*\"\s*)?(-->|\.\.>|--|\.\.)\s*(?:\"[^\"]*\"\s*)?(\[[^\]]+\]|\([^)]+\)|[\w.$]+)\s*(?::\s*(.*))?$"
)
# `device` is invalid PlantUML (R6 rewrites it) but the tolerant parser still
# reads the declaration so the element set is stable across the fix.
_DEPLOY_DECL = re.compile(rf"^\s*(node|database|cloud|artifact|device)\s+{_NAME}{_AS}")
_USECASE_DECL = re.compile(rf"^\s*(usecase|actor)\s+{_NAME}{_AS}")
_PAREN_USECASE = re.compile(r"\(([^()]+)\)")
_RECT_DECL = re.compile(rf"^\s*(rectangle|actor)\s+{_NAME}{_AS}(?:\s*<<([^>]+)>>)?")
_ACTION_LINE = re.compile(r"^\s*:([^;]+);\s*$")
_IF_LINE = re.compile(r"^\s*(?:else\s*)?if\s*\((.*?)\)", re.IGNORECASE)
_NOTE_LINE = re.compile(r"^\s*[lr]?note\s+(?:left|right|top|bottom|over)?\s*(?:of\s+)?([\w.$\"\s,]+?)(?::|$)", re.IGNORECASE)


def _strip_ref(token: str) -> str:
    token = token.strip()
    if token.startswith("[") and token.endswith("]"):
        return token[1:-1].strip()
    if token.startswith("(") and token.endswith(")"):
        return token[1:-1].strip()
    return token.strip('"')


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("'") or s.startswith("@"):
            continue
        out.append((i, line))
    return out


def _parse_class(lines: list[tuple[int, str]], art: DiagramArtifact) -> None:
    for _, line in lines:
        m = _CLASS_DECL.match(line)
        if m:
            art.elements[_picked(m, 2, 3, 4)] = m.group(1)
            continue
        _match_class_arrow(line, art)


def _match_class_arrow(line: str, art: DiagramArtifact) -> bool:
    stripped = line.strip()
    m = re.match(
        r"^([\w.$\"]+)\s*(?:\"[^\"]*\"\s*)?(<\|--|<\|\.\.|--\|>|\.\.\|>|-->|<--|\.\.>|<\.\.|o--|--o|\*--|--\*)\s*(?:\"[^\"]*\"\s*)?([\w.$\"]+)\s*(?::\s*(.*))?$",
        stripped,
    )
    if not m:
        return False
    src, arrow_tok, tgt, label = m.group(1).strip('"'), m.group(2), m.group(3).strip('"'), m.group(4)
    for tok, kind, flipped in _CLASS_ARROWS:
        if tok == arrow_tok:
            a, b = (tgt, src) if flipped else (src, tgt)
            art.relationships.append(Relationship(a, b, kind, label.strip() if label else None))
            return True
    return False


def _parse_sequence(lines: list[tuple[int, str]], art: DiagramArtifact) -> None:
    for _, line in lines:
        m = _SEQ_DECL.match(line)
        if m:
            art.elements[_picked(m, 2, 3, 4)] = m.group(1)
            continue
        mm = _SEQ_MSG.match(line)
        if mm:
            label = mm.group(4)
            art.relationships.append(
                Relationship(mm.group(1), mm.group(3), "message", label.strip() if label else None)
            )


def _parse_component(lines: list[tuple[int, str]], art: DiagramArtifact) -> None:
    for _, line in lines:
        m = _COMPONENT_DECL.match(line)
        if m:
            art.elements[_picked(m, 1, 2, 3)] = "component"
        arrow = _GENERIC_ARROW.match(line)
        if arrow and arrow.group(2) in ("-->", "..>"):
            src, tgt = _strip_ref(arrow.group(1)), _strip_ref(arrow.group(3))
            label = arrow.group(4)
            art.relationships.append(Relationship(src, tgt, "link", label.strip() if label else None))
            for tok in (arrow.group(1), arrow.group(3)):
                if tok.strip().startswith("["):
                    art.elements.setdefault(_strip_ref(tok), "component")
            continue
        for b in _BRACKET.finditer(line):
            art.elements.setdefault(b.group(1).strip(), "component")


def _parse_deployment(lines: list[tuple[int, str]], art: DiagramArtifact) -> None:
    for _, line in lines:
        m = _DEPLOY_DECL.match(line)
        if m:
            kind = "node" if m.group(1) == "device" else m.group(1)
            art.elements[_picked(m, 2, 3, 4)] = kind
            continue
        arrow = _GENERIC_ARROW.match(line)
        if arrow and arrow.group(2) in ("-->", "..>", "--", ".."):
            label = arrow.group(4)
            art.relationships.append(
                Relationship(_strip_ref(arrow.group(1)), _strip_ref(arrow.group(3)), "link", label.strip() if label else None)
            )


def _parse_usecase(lines: list[tuple[int, str]], art: DiagramArtifact) -> None:
    for _, line in lines:
        m = _USECASE_DECL.match(line)
        if m:
            art.elements[_picked(m, 2, 3, 4)] = m.group(1)
            continue
        arrow = _GENERIC_ARROW.match(line)
        if arrow:
            src, tgt = arrow.group(1).strip(), arrow.group(3).strip()
            label = arrow.group(4)
            art.relationships.append(
                Relationship(_strip_ref(src), _strip_ref(tgt), "link", label.strip() if label else None)
            )
            for tok in (src, tgt):
                if tok.startswith("("):
                    art.elements.setdefault(_strip_ref(tok), "usecase")
            continue
        if line.strip().startswith("("):
            pm = _PAREN_USECASE.match(line.strip())
            if pm:
                art.elements.setdefault(pm.group(1).strip(), "usecase")


def _parse_activity(lines: list[tuple[int, str]], art: DiagramArtifact) -> None:
    """Actions, decision and fork nodes; flow edges synthesized between
    consecutive nodes (branch arms restart from their decision node)."""
    prev: str | None = None
    branch_stack: list[str] = []

    def add_node(name: str, kind: str) -> None:
        nonlocal prev
        art.elements.setdefault(name, kind)
        if prev is not None and prev != name:
            art.relationships.append(Relationship(prev, name, "flow", None))
        prev = name

    for _, line in lines:
        s = line.strip()
        am = _ACTION_LINE.match(line)
        if am:
            add_node(am.group(1).strip(), "action")
            continue
        low = s.lower()
        if low == "start":
            add_node("start", "start")
        elif low in ("stop", "end"):
            add_node("stop", "stop")
            prev = None
        elif low.startswith(("if ", "if(")):
            m = _IF_LINE.match(s)
            cond = (m.group(1).strip() if m else s) or "decision"
            add_node(cond, "if")
            branch_stack.append(cond)
        elif low.startswith(("elseif", "else if", "else")):
            prev = branch_stack[-1] if branch_stack else prev
        elif low.startswith("endif"):
            if branch_stack:
                prev = branch_stack.pop()
        elif low == "fork":
            add_node("fork", "fork")
            branch_stack.append("fork")
        elif low in ("fork again", "forkagain"):
            prev = branch_stack[-1] if branch_stack else prev
        elif low in ("end fork", "endfork", "end merge"):
            if branch_stack:
                prev = branch_stack.pop()


def _parse_system_context(lines: list[tuple[int, str]], art: DiagramArtifact) -> None:
    for _, line in lines:
        m = _RECT_DECL.match(line)
        if m:
            name = _picked(m, 2, 3, 4)
            stereo = (m.group(5) or "").strip().lower()
            if m.group(1) == "actor":
                kind = "actor"
            elif "system" in stereo and "ext" not in stereo:
                kind = "system"
            elif stereo:
                kind = "external"
            else:
                kind = "rectangle"
            art.elements[name] = kind
            continue
        arrow = _GENERIC_ARROW.match(line)
        if arrow:
            label = arrow.group(4)
            art.relationships.append(
                Relationship(_strip_ref(arrow.group(1)), _strip_ref(arrow.group(3)), "link", label.strip() if label else None)
            )


_PARSERS: dict[DiagramType, Callable] = {
    DiagramType.CLASS: _parse_class,
    DiagramType.SEQUENCE: _parse_sequence,
    DiagramType.COMPONENT: _parse_component,
    DiagramType.DEPLOYMENT: _parse_deployment,
    DiagramType.USECASE: _parse_usecase,
    DiagramType.ACTIVITY: _parse_activity,
    DiagramType.SYSTEM_CONTEXT: _parse_system_context,
}


def parse_artifact(text: str, dt: DiagramType, scope_label: str | None = None) -> DiagramArtifact:
    """Extract elements and relationships; malformed input degrades to less,
    never to an error."""
    art = DiagramArtifact(diagram_type=dt, text=text, scope_label=scope_label)
    _PARSERS[dt](_content_lines(text), art)
    art.relationships = [r for r in art.relationships if r.source and r.target]
    return art


def noted_names(text: str) -> set[str]:
    """Element names referenced by note lines (documentation sub-score input)."""
    names: set[str] = set()
    for _, line in _content_lines(text):
        m = _NOTE_LINE.match(line.strip())
        if m:
            for tok in m.group(1).split(","):
                tok = tok.strip().strip('"')
                if tok:
                    names.add(tok)
    return names


def activation_count(text: str) -> int:
    return sum(1 for _, line in _content_lines(text) if line.strip().lower().startswith(("activate ", "autoactivate")))


def nested_declaration_count(text: str, dt: DiagramType) -> int:
    """Declarations opened inside another element's braces (deployment nesting)."""
    depth = 0
    nested = 0
    for _, line in _content_lines(text):
        s = line.strip()
        if _DEPLOY_DECL.match(s) and depth > 0:
            nested += 1
        depth += s.count("{") - s.count("}")
        depth = max(depth, 0)
    return nested


# ---------------------------------------------------------------------------
# lint rules


@dataclass
class LintRule:
    rule_id: str
    diagram_types: frozenset[DiagramType]
    correctable: bool
    detect: Callable[[str, DiagramType, RunConfig], list[Violation]]
    fix: Callable[[str, RunConfig], str] | None = None

    def applies_to(self, dt: DiagramType) -> bool:
        return dt in self.diagram_types


ALL_TYPES = frozenset(DiagramType)


def _lines(text: str) -> list[str]:
    return text.splitlines()


def _detect_delimiters(text: str, dt: DiagramType, config: RunConfig) -> list[Violation]:
    content = [(i, l.strip()) for i, l in enumerate(_lines(text), 1) if l.strip()]
    if not content:
        return [Violation("R1", 0, "empty document")]
    bad = []
    if not content[0][1].startswith("@startuml"):
        bad.append(Violation("R1", content[0][0], content[0][1][:60]))
    if not content[-1][1].startswith("@enduml"):
        bad.append(Violation("R1", content[-1][0], content[-1][1][:60]))
    starts = sum(1 for _, l in content if l.startswith("@startuml"))
    ends = sum(1 for _, l in content if l.startswith("@enduml"))
    if not bad and (starts != 1 or ends != 1):
        bad.append(Violation("R1", 0, f"{starts} @startuml / {ends} @enduml markers"))
    return bad


def _fix_delimiters(text: str, config: RunConfig) -> str:
    kept = [l for l in _lines(text) if not l.strip().startswith(("@startuml", "@enduml"))]
    while kept and not kept[0].strip():
        kept.pop(0)
    while kept and not kept[-1].strip():
        kept.pop()
    return "\n".join(["@startuml", *kept, "@enduml"]) + "\n"


def _brace_balance(text: str) -> int:
    masked = re.sub(r"\"[^\"]*\"", "", text)
    depth = 0
    for line in masked.splitlines():
        s = line.strip()
        if s.startswith("'"):
            continue
        depth += s.count("{") - s.count("}")
    return depth


def _detect_braces(text: str, dt: DiagramType, config: RunConfig) -> list[Violation]:
    bal = _brace_balance(text)
    if bal == 0:
        return []
    kind = "unclosed {" if bal > 0 else "dangling }"
    return [Violation("R2", 0, f"{kind} (balance {bal:+d})")]


def _fix_braces(text: str, config: RunConfig) -> str:
    bal = _brace_balance(text)
    lines = _lines(text)
    if bal > 0:
        insert_at = len(lines)
        for i in range(len(lines) - 1, -1, -1):
            if lines[i].strip().startswith("@enduml"):
                insert_at = i
                break
        return "\n".join(lines[:insert_at] + ["}"] * bal + lines[insert_at:]) + ("\n" if text.endswith("\n") else "")
    # drop dangling closers from the end backwards
    for _ in range(-bal):
        removed = False
        for i in range(len(lines) - 1, -1, -1):
            s = lines[i].strip()
            if s == "}":
                del lines[i]
                removed = True
                break
            if "}" in lines[i] and not s.startswith("'"):
                idx = lines[i].rfind("}")
                lines[i] = lines[i][:idx] + lines[i][idx + 1 :]
                removed = True
                break
        if not removed:
            break
    return "\n".join(lines) + ("\n" if text.endswith("\n") else "")


def _line_rule(rule_id: str, pattern: re.Pattern) -> Callable:
    def detect(text: str, dt: DiagramType, config: RunConfig) -> list[Violation]:
        return [
            Violation(rule_id, i, line.strip()[:60])
            for i, line in enumerate(_lines(text), 1)
            if pattern.search(line)
        ]

    return detect


_ORTHO = re.compile(r"^\s*skinparam\s+linetype\s+ortho\b", re.IGNORECASE)
_CONTINUE = re.compile(r"^\s*continue\s*;?\s*$", re.IGNORECASE)
_ELSE_IF = re.compile(r"\belse\s+if\b", re.IGNORECASE)
_DEVICE = re.compile(r"^\s*device\b", re.IGNORECASE)
_PARTICIPANT_MOD = re.compile(r"^\s*(participant|actor)\b.*(<<[^>]*>>|->|-->>)")
_C4_MACRO = re.compile(
    r"(^\s*!include.*C4|^\s*(System|Person|Container|Component|Boundary|Enterprise|Rel)(_\w+)?\s*\()", re.M
)
_STEREO_BLOCK = re.compile(r"^\s*(package|node|component|database|frame|cloud|folder)\b.*<<[^>]+>>")


def _delete_matching(pattern: re.Pattern) -> Callable[[str, RunConfig], str]:
    def fix(text: str, config: RunConfig) -> str:
        kept = [l for l in _lines(text) if not pattern.search(l)]
        return "\n".join(kept) + ("\n" if text.endswith("\n") else "")

    return fix


def _fix_else_if(text: str, config: RunConfig) -> str:
    return re.sub(r"\belse\s+if\b", "elseif", text)


def _fix_device(text: str, config: RunConfig) -> str:
    return re.sub(r"(?m)^(\s*)device\b", r"\1node", text)


def _fix_participant(text: str, config: RunConfig) -> str:
    out = []
    for line in _lines(text):
        if _PARTICIPANT_MOD.match(line):
            line = re.sub(r"<<[^>]*>>", "", line)
            line = re.sub(r"(-->>|-->|->).*$", "", line)
            line = line.rstrip()
        out.append(line)
    return "\n".join(out) + ("\n" if text.endswith("\n") else "")


def _detect_placeholders(text: str, dt: DiagramType, config: RunConfig) -> list[Violation]:
    banned = {p.lower() for p in config.placeholder_names}
    art = parse_artifact(text, dt)
    out = []
    for name in sorted(art.elements):
        if name.lower() in banned:
            line = next((i for i, l in enumerate(_lines(text), 1) if re.search(rf"\b{re.escape(name)}\b", l)), 0)
            out.append(Violation("R8", line, f"placeholder element name {name!r}"))
    return out


def _detect_c4(text: str, dt: DiagramType, config: RunConfig) -> list[Violation]:
    out = []
    for i, line in enumerate(_lines(text), 1):
        if _C4_MACRO.search(line) or _STEREO_BLOCK.match(line):
            out.append(Violation("R9", i, line.strip()[:60]))
    return out


RULES: tuple[LintRule, ...] = (
    LintRule("R1", ALL_TYPES, True, _detect_delimiters, _fix_delimiters),
    LintRule("R2", ALL_TYPES, True, _detect_braces, _fix_braces),
    LintRule("R3", ALL_TYPES, True, _line_rule("R3", _ORTHO), _delete_matching(_ORTHO)),
    LintRule("R4", frozenset({DiagramType.ACTIVITY}), True, _line_rule("R4", _CONTINUE), _delete_matching(_CONTINUE)),
    LintRule("R5", frozenset({DiagramType.ACTIVITY}), True, _line_rule("R5", _ELSE_IF), _fix_else_if),
    LintRule("R6", frozenset({DiagramType.DEPLOYMENT}), True, _line_rule("R6", _DEVICE), _fix_device),
    LintRule("R7", frozenset({DiagramType.SEQUENCE}), True, _line_rule("R7", _PARTICIPANT_MOD), _fix_participant),
    LintRule("R8", ALL_TYPES, False, _detect_placeholders, None),
    LintRule("R9", frozenset({DiagramType.SYSTEM_CONTEXT}), False, _detect_c4, None),
)


def lint(artifact: DiagramArtifact, dt: DiagramType | None = None, config: RunConfig | None = None) -> LintReport:
    """Evaluate the rule set for the artifact's diagram type. Detection only."""
    dt = dt or artifact.diagram_type
    config = config or _DEFAULT_CONFIG
    report = LintReport()
    for rule in RULES:
        if not rule.applies_to(dt):
            continue
        found = rule.detect(artifact.text, dt, config)
        report.violations.extend(found)
        if found and not rule.correctable:
            report.uncorrectable = True
    return report


def apply_fixes(artifact: DiagramArtifact, report: LintReport, config: RunConfig | None = None) -> DiagramArtifact:
    """Repair every correctable violation; the result re-lints valid.

    Fixes are applied content-first (deletes and rewrites), then brace
    balance is recomputed on the rewritten text, then delimiters are
    re-anchored, so one fix cannot invalidate another. Fixes only remove or
    rewrite lines; they never introduce elements.
    """
    if report.uncorrectable:
        raise ValueError("apply_fixes called on an uncorrectable report")
    config = config or _DEFAULT_CONFIG
    dt = artifact.diagram_type
    violated = {v.rule_id for v in report.violations}
    text = artifact.text
    fixes = 0
    ordered = ("R3", "R4", "R5", "R6", "R7", "R2", "R1")
    by_id = {r.rule_id: r for r in RULES}
    for rule_id in ordered:
        rule = by_id[rule_id]
        if not rule.applies_to(dt) or rule.fix is None:
            continue
        # R2/R1 re-detect on the rewritten text; content rules go by the report
        if rule_id in ("R1", "R2"):
            found = rule.detect(text, dt, config)
            if not found:
                continue
            fixes += len(found)
        elif rule_id in violated:
            fixes += sum(1 for v in report.violations if v.rule_id == rule_id)
        else:
            continue
        text = rule.fix(text, config)
    fixed = parse_artifact(text, dt, scope_label=artifact.scope_label)
    report.fixes_applied = fixes
    return fixed
