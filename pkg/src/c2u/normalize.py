"""The three deterministic IR post-processing transformations.

Applied as filter_noise, then canonicalize_inheritance, then
normalize_visibility. Each is pure and idempotent; the composition sets the
``normalized`` flag consumed by every downstream stage. None of them ever
invents a name, and only the noise filter removes elements.
"""

from __future__ import annotations

import copy

from c2u.ir import CANONICAL_VISIBILITIES, ClassDef, FunctionDef, ProjectIR

#: Functions shorter than this with no outgoing calls carry no diagram signal.
MIN_FUNCTION_LINES = 2


def _canonical_visibility(raw: str) -> str:
    v = raw.strip().lower()
    return v if v in CANONICAL_VISIBILITIES else "package"


def normalize_visibility(ir: ProjectIR) -> ProjectIR:
    """Map every visibility onto {public, private, protected, package}.

    Unknown and missing modifiers become package, the UML default for
    "no modifier written".
    """
    out = copy.deepcopy(ir)
    for c in out.classes:
        c.visibility = _canonical_visibility(c.visibility)
        for m in c.methods:
            m.visibility = _canonical_visibility(m.visibility)
        for a in c.attributes:
            a.visibility = _canonical_visibility(a.visibility)
    return out


def _simple_name(target: str) -> str:
    for sep in ("::", "\\", "."):
        if sep in target:
            target = target.rsplit(sep, 1)[1]
    return target.strip()


def _canonicalize_targets(targets: list[str]) -> list[str]:
    # dedupe after simplification, first occurrence wins
    seen: set[str] = set()
    out: list[str] = []
    for t in targets:
        s = _simple_name(t)
        if s and s not in seen:
            seen.add(s)
            out.append(s)
    return out


def canonicalize_inheritance(ir: ProjectIR) -> ProjectIR:
    """Reduce inheritance targets to simple names and drop duplicates."""
    out = copy.deepcopy(ir)
    for c in out.classes:
        c.extends = _canonicalize_targets(c.extends)
        c.implements = _canonicalize_targets(c.implements)
    return out


def _keep_class(c: ClassDef) -> bool:
    return bool(c.methods or c.attributes or c.extends or c.implements)


def _keep_function(f: FunctionDef) -> bool:
    return f.line_count >= MIN_FUNCTION_LINES or bool(f.calls)


def filter_noise(ir: ProjectIR) -> ProjectIR:
    """Drop empty marker classes and trivially small call-free functions."""
    out = copy.deepcopy(ir)
    out.classes = [c for c in out.classes if _keep_class(c)]
    out.functions = [f for f in out.functions if _keep_function(f)]
    return out


def normalize(ir: ProjectIR) -> ProjectIR:
    """filter_noise, canonicalize_inheritance, normalize_visibility; flags the result."""
    out = normalize_visibility(canonicalize_inheritance(filter_noise(ir)))
    out.normalized = True
    return out
