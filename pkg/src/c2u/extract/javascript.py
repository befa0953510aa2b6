"""JavaScript scanner: ES classes, #private members, top-level functions."""

from __future__ import annotations

import re

from c2u.extract.base import (
    FileFacts,
    braces_balanced,
    extract_calls,
    find_block,
    mask_comments_and_strings,
)
from c2u.ir import AttributeDef, ClassDef, FunctionDef, MethodDef

JS_KEYWORDS = frozenset(
    """break case catch class const continue debugger default delete do else
    export extends finally for function if import in instanceof let new return
    static super switch this throw try typeof var void while with yield await
    async of get set require console constructor""".split()
)

CLASS_RE = re.compile(r"\bclass\s+(\w+)(?:\s+extends\s+([\w.$]+))?\s*\{")
METHOD_RE = re.compile(
    r"^\s*(?:static\s+)?(?:async\s+)?(?:get\s+|set\s+)?(#?[\w$]+)\s*\(([^()]*)\)\s*\{",
    re.M,
)
FIELD_RE = re.compile(r"^\s*(?:static\s+)?(#?[\w$]+)\s*(?:=(?!=)[^;\n]*)?;?\s*$", re.M)
FUNC_RE = re.compile(r"^\s*(?:export\s+)?(?:default\s+)?(?:async\s+)?function\s*\*?\s*([\w$]+)\s*\(([^()]*)\)", re.M)
ARROW_RE = re.compile(r"^\s*(?:export\s+)?(?:const|let|var)\s+([\w$]+)\s*=\s*(?:async\s+)?(?:\([^()]*\)|[\w$]+)\s*=>", re.M)

NOT_METHOD_NAMES = frozenset({"if", "for", "while", "switch", "catch", "function", "return"})


def _params(params: str) -> list[tuple[str, str | None]]:
    out: list[tuple[str, str | None]] = []
    for part in params.split(","):
        name = part.strip().split("=")[0].strip().lstrip(".")
        if re.fullmatch(r"[\w$]+", name or ""):
            out.append((name, None))
    return out


def _vis(name: str) -> str:
    return "private" if name.startswith("#") else "public"


def _blank_nested(body: str) -> str:
    chars = list(body)
    depth = 0
    for i, c in enumerate(body):
        if c == "{":
            if depth > 0:
                chars[i] = " "
            depth += 1
        elif c == "}":
            depth -= 1
            if depth > 0:
                chars[i] = " "
        elif depth > 0 and c != "\n":
            chars[i] = " "
    return "".join(chars)


def extract_file(text: str, rel_path: str) -> FileFacts:
    facts = FileFacts()
    masked, unterminated = mask_comments_and_strings(text, string_quotes="\"'`")
    if unterminated or not braces_balanced(masked):
        facts.had_errors = True

    class_spans: list[tuple[int, int]] = []
    for m in CLASS_RE.finditer(masked):
        body_start = m.end() - 1
        body_end = find_block(masked, body_start)
        class_spans.append((m.start(), body_end))
        body = masked[body_start + 1 : body_end - 1]
        cls = ClassDef(
            name=m.group(1),
            visibility="public",
            extends=[m.group(2)] if m.group(2) else [],
            source_file=rel_path,
        )
        flat = _blank_nested(body)
        for mm in METHOD_RE.finditer(flat):
            name = mm.group(1)
            if name in NOT_METHOD_NAMES:
                continue
            method = MethodDef(name=name.lstrip("#"), visibility=_vis(name), parameters=_params(mm.group(2)))
            mb_open = body.find("{", mm.end() - 1)
            if mb_open >= 0:
                method.calls = extract_calls(body[mb_open:find_block(body, mb_open)], JS_KEYWORDS)
            cls.methods.append(method)
        method_names = {m2.name for m2 in cls.methods}
        for fm in FIELD_RE.finditer(flat):
            name = fm.group(1)
            if name.lstrip("#") in method_names or name in JS_KEYWORDS:
                continue
            cls.attributes.append(AttributeDef(name=name.lstrip("#"), visibility=_vis(name)))
        facts.classes.append(cls)

    taken_spans: list[tuple[int, int]] = list(class_spans)

    def taken(pos: int) -> bool:
        return any(s <= pos < e for s, e in taken_spans)

    for fm in FUNC_RE.finditer(masked):
        if taken(fm.start()):
            continue
        body_open = masked.find("{", fm.end())
        calls: list[str] = []
        line_count = 1
        if body_open >= 0:
            body_end = find_block(masked, body_open)
            calls = extract_calls(masked[body_open:body_end], JS_KEYWORDS)
            line_count = masked.count("\n", body_open, body_end) + 1
            taken_spans.append((body_open, body_end))
        facts.functions.append(
            FunctionDef(name=fm.group(1), source_file=rel_path, parameters=_params(fm.group(2)), calls=calls, line_count=line_count)
        )
    for am in ARROW_RE.finditer(masked):
        if taken(am.start()):
            continue
        name = am.group(1)
        if any(f.name == name for f in facts.functions):
            continue
        body_open = masked.find("{", am.end())
        newline = masked.find("\n", am.end())
        calls = []
        line_count = 1
        if body_open >= 0 and (newline < 0 or body_open <= newline):
            body_end = find_block(masked, body_open)
            calls = extract_calls(masked[body_open:body_end], JS_KEYWORDS)
            line_count = masked.count("\n", body_open, body_end) + 1
            taken_spans.append((body_open, body_end))
        facts.functions.append(FunctionDef(name=name, source_file=rel_path, calls=calls, line_count=line_count))
    return facts
