"""PHP scanner: classes/interfaces/enums/traits, typed properties, methods."""

from __future__ import annotations

import re

from c2u.extract.base import (
    FileFacts,
    braces_balanced,
    extract_calls,
    find_block,
    mask_comments_and_strings,
    split_type_list,
)
from c2u.ir import AttributeDef, ClassDef, FunctionDef, MethodDef

PHP_KEYWORDS = frozenset(
    """abstract and array as break callable case catch class clone const
    continue declare default do echo else elseif empty enddeclare endfor
    endforeach endif endswitch endwhile enum extends final finally fn for
    foreach function global goto if implements include instanceof insteadof
    interface isset list match namespace new or print private protected public
    readonly require return static switch throw trait try unset use var while
    xor yield require_once include_once die exit""".split()
)

DECL_RE = re.compile(
    r"(?:\b(?:abstract|final|readonly)\s+)*\b(class|interface|enum|trait)\s+(\w+)"
    r"(?:\s*:\s*\w+)?"
    r"((?:\s+extends\s+[\w\\,\s]+?)?(?:\s+implements\s+[\w\\,\s]+?)?)\s*\{",
)
METHOD_RE = re.compile(
    r"(?:\b(public|private|protected)\s+)?(?:(?:static|final|abstract)\s+)*"
    r"\bfunction\s+&?(\w+)\s*\(([^()]*)\)",
)
PROPERTY_RE = re.compile(
    r"\b(public|private|protected|var)\s+(?:(?:static|readonly)\s+)*(?:\??[\w\\|]+\s+)?\$(\w+)",
)
CONST_RE = re.compile(r"\bconst\s+(\w+)\s*=")
TOP_FUNC_RE = re.compile(r"\bfunction\s+&?(\w+)\s*\(([^()]*)\)")


def _parse_header(header: str) -> tuple[list[str], list[str]]:
    extends: list[str] = []
    implements: list[str] = []
    ext = re.search(r"\bextends\s+([\w\\,\s]+?)(?=\bimplements\b|$)", header)
    if ext:
        extends = split_type_list(ext.group(1))
    imp = re.search(r"\bimplements\s+([\w\\,\s]+?)$", header)
    if imp:
        implements = split_type_list(imp.group(1))
    return extends, implements


def _params(params: str) -> list[tuple[str, str | None]]:
    out: list[tuple[str, str | None]] = []
    for part in params.split(","):
        part = part.strip()
        m = re.match(r"(?:(?:public|private|protected|readonly)\s+)*(\??[\w\\|]+\s+)?(?:\.\.\.)?&?\$(\w+)", part)
        if m:
            out.append((m.group(2), m.group(1).strip() if m.group(1) else None))
    return out


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
    masked, unterminated = mask_comments_and_strings(text, line_comments=("//", "#"))
    if unterminated or not braces_balanced(masked):
        facts.had_errors = True

    class_spans: list[tuple[int, int]] = []
    for m in DECL_RE.finditer(masked):
        kind = m.group(1)
        body_start = m.end() - 1
        body_end = find_block(masked, body_start)
        class_spans.append((m.start(), body_end))
        body = masked[body_start + 1 : body_end - 1]
        extends, implements = _parse_header(m.group(3))
        cls = ClassDef(
            name=m.group(2),
            kind="class" if kind == "trait" else kind,
            visibility="public",
            extends=extends,
            implements=implements,
            source_file=rel_path,
        )
        flat = _blank_nested(body)
        for mm in METHOD_RE.finditer(flat):
            method = MethodDef(name=mm.group(2), visibility=mm.group(1) or "", parameters=_params(mm.group(3)))
            mb_open = body.find("{", mm.end())
            if mb_open >= 0:
                method.calls = extract_calls(body[mb_open:find_block(body, mb_open)], PHP_KEYWORDS)
            cls.methods.append(method)
        for pm in PROPERTY_RE.finditer(flat):
            vis = pm.group(1)
            cls.attributes.append(AttributeDef(name=pm.group(2), visibility="" if vis == "var" else vis))
        for cm in CONST_RE.finditer(flat):
            cls.attributes.append(AttributeDef(name=cm.group(1), visibility="public"))
        facts.classes.append(cls)

    flat_top = masked
    for s, e in class_spans:
        flat_top = flat_top[:s] + " " * (e - s) + flat_top[e:]
    taken_spans: list[tuple[int, int]] = []
    for fm in TOP_FUNC_RE.finditer(flat_top):
        if any(s <= fm.start() < e for s, e in taken_spans):
            continue  # nested closure inside an already-captured body
        body_open = flat_top.find("{", fm.end())
        calls: list[str] = []
        line_count = 1
        if body_open >= 0:
            body_end = find_block(flat_top, body_open)
            inner = flat_top[body_open:body_end]
            calls = extract_calls(inner, PHP_KEYWORDS)
            line_count = inner.count("\n") + 1
            taken_spans.append((body_open, body_end))
        facts.functions.append(
            FunctionDef(name=fm.group(1), source_file=rel_path, parameters=_params(fm.group(2)), calls=calls, line_count=line_count)
        )
    return facts
