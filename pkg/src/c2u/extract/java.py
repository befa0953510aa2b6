"""Java scanner: classes, interfaces, enums, members, inheritance, calls."""

from __future__ import annotations

import re

from c2u.extract.base import (
    FileFacts,
    braces_balanced,
    extract_calls,
    find_block,
    mask_comments_and_strings,
    split_type_list,
    strip_generics,
)
from c2u.ir import AttributeDef, ClassDef, MethodDef

JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while var record yield
    sealed permits""".split()
)

DECL_RE = re.compile(
    r"(?:\b(public|private|protected)\s+)?"
    r"(?:(?:abstract|final|static|strictfp|sealed|non-sealed)\s+)*"
    r"\b(class|interface|enum)\s+(\w+)"
    r"(?:<[^{;]*?>)?"
    r"([^{;]*)\{",
)

METHOD_RE = re.compile(
    r"(?:\b(public|private|protected)\s+)?"
    r"(?:(?:static|final|abstract|synchronized|native|default|strictfp)\s+)*"
    r"(?:[\w$][\w$.<>\[\],\s]*?\s+)?"
    r"([\w$]+)\s*\(([^()]*)\)\s*(?:throws\s+[\w.,\s]+)?\s*([{;])",
)

FIELD_RE = re.compile(
    r"^\s*(?:(public|private|protected)\s+)?"
    r"(?:(?:static|final|transient|volatile)\s+)*"
    r"([\w$.\[\]]+)\s+([\w$]+)\s*(?:=[^;]*)?;",
)

NOT_METHOD_NAMES = frozenset({"if", "for", "while", "switch", "catch", "synchronized", "return", "new", "do", "try", "else"})


def _parse_header(header: str) -> tuple[list[str], list[str]]:
    extends: list[str] = []
    implements: list[str] = []
    ext = re.search(r"\bextends\s+([^{]+?)(?=\bimplements\b|\bpermits\b|$)", header)
    if ext:
        extends = split_type_list(ext.group(1))
    imp = re.search(r"\bimplements\s+([^{]+?)(?=\bpermits\b|$)", header)
    if imp:
        implements = split_type_list(imp.group(1))
    return extends, implements


def _parse_parameters(params: str) -> list[tuple[str, str | None]]:
    out: list[tuple[str, str | None]] = []
    for part in split_type_list(params):
        part = part.replace("...", " ").strip()
        tokens = part.split()
        tokens = [t for t in tokens if t not in ("final",) and not t.startswith("@")]
        if not tokens:
            continue
        if len(tokens) == 1:
            out.append((tokens[0], None))
        else:
            out.append((tokens[-1], " ".join(tokens[:-1])))
    return out


def _top_level_slices(body: str) -> tuple[str, list[tuple[int, int]]]:
    """Body text with nested blocks blanked, plus the (start, end) of each block."""
    chars = list(body)
    blocks: list[tuple[int, int]] = []
    depth = 0
    start = -1
    for i, c in enumerate(body):
        if c == "{":
            depth += 1
            if depth == 1:
                start = i
            else:
                chars[i] = " "
        elif c == "}":
            if depth > 1:
                chars[i] = " "
            depth = max(0, depth - 1)
            if depth == 0 and start >= 0:
                blocks.append((start, i + 1))
                start = -1
        elif depth > 0:
            if c != "\n":
                chars[i] = " "
    if start >= 0:
        blocks.append((start, len(body)))
    return "".join(chars), blocks


def _enum_constants(body_flat: str) -> list[AttributeDef]:
    head = body_flat.split(";", 1)[0]
    consts = []
    for part in head.split(","):
        name = part.strip().split("(")[0].strip()
        if re.fullmatch(r"[A-Za-z_$][\w$]*", name or ""):
            consts.append(AttributeDef(name=name, visibility="public"))
    return consts


def extract_file(text: str, rel_path: str) -> FileFacts:
    facts = FileFacts()
    masked, unterminated = mask_comments_and_strings(text)
    if unterminated or not braces_balanced(masked):
        facts.had_errors = True

    package = None
    pkg = re.search(r"^\s*package\s+([\w.]+)\s*;", masked, re.M)
    if pkg:
        package = pkg.group(1)

    pos = 0
    while True:
        m = DECL_RE.search(masked, pos)
        if m is None:
            break
        vis, kind, name, header = m.group(1) or "", m.group(2), m.group(3), m.group(4)
        body_start = m.end() - 1
        body_end = find_block(masked, body_start)
        body = masked[body_start + 1 : body_end - 1]
        extends, implements = _parse_header(header)

        cls = ClassDef(
            name=name,
            kind=kind,
            visibility=vis,
            qualified_name=f"{package}.{name}" if package else None,
            extends=extends,
            implements=implements,
            source_file=rel_path,
        )
        flat, blocks = _top_level_slices(body)
        if kind == "enum":
            cls.attributes.extend(_enum_constants(flat))

        for mm in METHOD_RE.finditer(flat):
            mname = mm.group(2)
            if mname in NOT_METHOD_NAMES:
                continue
            method = MethodDef(
                name=mname,
                visibility=mm.group(1) or "",
                parameters=_parse_parameters(mm.group(3)),
            )
            if mm.group(4) == "{":
                for bs, be in blocks:
                    if bs >= mm.end() - 1:
                        method.calls = extract_calls(body[bs:be], JAVA_KEYWORDS)
                        break
            cls.methods.append(method)

        method_names = {m2.name for m2 in cls.methods}
        field_region = flat.split(";", 1)[1] if kind == "enum" and ";" in flat else flat
        for line in strip_generics(field_region).splitlines():
            if "(" in line:
                continue
            fm = FIELD_RE.match(line)
            if not fm:
                continue
            fname = fm.group(3)
            ftype = fm.group(2).strip()
            if fname in method_names or fname in JAVA_KEYWORDS or ftype in ("return", "new", "case", "package", "import", "throw"):
                continue
            cls.attributes.append(AttributeDef(name=fname, visibility=fm.group(1) or "", type_annotation=ftype or None))

        facts.classes.append(cls)
        pos = max(m.end(), body_start + 1)
    return facts
