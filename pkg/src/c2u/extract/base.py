"""Shared machinery for the per-language source scanners.

The extractors are deliberately pattern-based: they tokenize just enough
(comments and string literals masked out, braces tracked) to recover class,
member, inheritance, and call facts, and they never refuse input. A file
with broken syntax yields whatever declarations still match, plus an error
flag for the extraction report.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from c2u.ir import ClassDef, FunctionDef

CALL_RE = re.compile(r"\b([A-Za-z_]\w*)\s*\(")


@dataclass
class FileFacts:
    """What one source file contributed, plus whether parsing saw errors."""

    classes: list[ClassDef] = field(default_factory=list)
    functions: list[FunctionDef] = field(default_factory=list)
    had_errors: bool = False


def mask_comments_and_strings(
    text: str,
    line_comments: tuple[str, ...] = ("//",),
    block_comments: tuple[tuple[str, str], ...] = (("/*", "*/"),),
    string_quotes: str = "\"'",
) -> tuple[str, bool]:
    """Blank out comments and string bodies, preserving length and newlines.

    Returns the masked text and a flag for unterminated constructs (an open
    block comment or string at EOF), which counts as a parse error while the
    masked prefix remains usable.
    """
    out = list(text)
    i = 0
    n = len(text)
    unterminated = False
    while i < n:
        ch = text[i]
        matched_line = next((lc for lc in line_comments if text.startswith(lc, i)), None)
        matched_block = next((bc for bc in block_comments if text.startswith(bc[0], i)), None)
        if matched_line is not None:
            while i < n and text[i] != "\n":
                out[i] = " "
                i += 1
        elif matched_block is not None:
            close = matched_block[1]
            end = text.find(close, i + len(matched_block[0]))
            stop = n if end < 0 else end + len(close)
            if end < 0:
                unterminated = True
            while i < stop:
                if text[i] != "\n":
                    out[i] = " "
                i += 1
        elif ch in string_quotes:
            quote = ch
            i += 1
            closed = False
            while i < n:
                if text[i] == "\\":
                    out[i] = " "
                    if i + 1 < n and text[i + 1] != "\n":
                        out[i + 1] = " "
                    i += 2
                    continue
                if text[i] == quote:
                    i += 1
                    closed = True
                    break
                if text[i] != "\n":
                    out[i] = " "
                i += 1
            if not closed:
                unterminated = True
        else:
            i += 1
    return "".join(out), unterminated


def find_block(masked: str, open_index: int) -> int:
    """Index one past the matching ``}`` for the ``{`` at ``open_index``.

    Unbalanced input returns len(masked): the block is read to EOF so partial
    files still contribute their members.
    """
    depth = 0
    for i in range(open_index, len(masked)):
        c = masked[i]
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    return len(masked)


def braces_balanced(masked: str) -> bool:
    depth = 0
    for c in masked:
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def extract_calls(masked_body: str, keywords: frozenset[str]) -> list[str]:
    """Ordered, de-duplicated callee names (the identifier before each ``(``)."""
    seen: set[str] = set()
    calls: list[str] = []
    for m in CALL_RE.finditer(masked_body):
        name = m.group(1)
        if name in keywords or name in seen:
            continue
        seen.add(name)
        calls.append(name)
    return calls


def strip_generics(s: str) -> str:
    """Drop <...> type-parameter segments (nesting-aware)."""
    out = []
    depth = 0
    for c in s:
        if c == "<":
            depth += 1
        elif c == ">":
            depth = max(0, depth - 1)
        elif depth == 0:
            out.append(c)
    return "".join(out)


def split_type_list(s: str) -> list[str]:
    """Comma-separated type names with generics stripped; empties dropped."""
    return [p.strip() for p in strip_generics(s).split(",") if p.strip()]
