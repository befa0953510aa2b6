"""Python scanner: ast-based when the file parses, indentation-based recovery
scan when it does not.

Visibility follows the naming convention: ``__x`` private, ``_x`` protected,
everything else public. Dunder names (``__init__``) are public; the mangling
convention only applies to non-dunder leading underscores.
"""

from __future__ import annotations

import ast
import re

from c2u.extract.base import FileFacts, extract_calls
from c2u.ir import AttributeDef, ClassDef, FunctionDef, MethodDef

PY_KEYWORDS = frozenset(
    """False None True and as assert async await break class continue def del
    elif else except finally for from global if import in is lambda nonlocal
    not or pass raise return try while with yield print len isinstance
    super""".split()
)


def visibility_of(name: str) -> str:
    if name.startswith("__") and not name.endswith("__"):
        return "private"
    if name.startswith("_") and not (name.startswith("__") and name.endswith("__")):
        return "protected"
    return "public"


def _base_name(node: ast.expr) -> str | None:
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Attribute):
        try:
            return ast.unparse(node)
        except Exception:
            return node.attr
    if isinstance(node, ast.Subscript):
        return _base_name(node.value)
    return None


def _class_kind(bases: list[str]) -> str:
    simple = {b.rsplit(".", 1)[-1] for b in bases}
    if simple & {"Enum", "IntEnum", "StrEnum", "Flag", "IntFlag"}:
        return "enum"
    if simple & {"ABC", "Protocol"}:
        return "interface"
    return "class"


def _call_names(node: ast.AST) -> list[str]:
    seen: set[str] = set()
    calls: list[str] = []
    for sub in ast.walk(node):
        if isinstance(sub, ast.Call):
            fn = sub.func
            name = fn.id if isinstance(fn, ast.Name) else fn.attr if isinstance(fn, ast.Attribute) else None
            if name and name not in seen:
                seen.add(name)
                calls.append(name)
    return calls


def _parameters(args: ast.arguments) -> list[tuple[str, str | None]]:
    params = []
    all_args = list(args.posonlyargs) + list(args.args) + list(args.kwonlyargs)
    for a in all_args:
        if a.arg in ("self", "cls"):
            continue
        ann = None
        if a.annotation is not None:
            try:
                ann = ast.unparse(a.annotation)
            except Exception:
                ann = None
        params.append((a.arg, ann))
    return params


def _method_from_ast(node: ast.FunctionDef | ast.AsyncFunctionDef) -> MethodDef:
    ret = None
    if node.returns is not None:
        try:
            ret = ast.unparse(node.returns)
        except Exception:
            ret = None
    return MethodDef(
        name=node.name,
        visibility=visibility_of(node.name),
        type_annotation=ret,
        parameters=_parameters(node.args),
        calls=_call_names(node),
    )


def _self_attributes(cls_node: ast.ClassDef) -> list[str]:
    names: list[str] = []
    seen: set[str] = set()
    for sub in ast.walk(cls_node):
        if isinstance(sub, ast.Assign):
            targets = sub.targets
        elif isinstance(sub, ast.AnnAssign):
            targets = [sub.target]
        else:
            continue
        for t in targets:
            if isinstance(t, ast.Attribute) and isinstance(t.value, ast.Name) and t.value.id == "self":
                if t.attr not in seen:
                    seen.add(t.attr)
                    names.append(t.attr)
    return names


def _extract_ast(tree: ast.Module, rel_path: str, facts: FileFacts) -> None:
    for node in tree.body:
        if isinstance(node, ast.ClassDef):
            bases = [b for b in (_base_name(x) for x in node.bases) if b]
            cls = ClassDef(
                name=node.name,
                kind=_class_kind(bases),
                visibility=visibility_of(node.name),
                extends=bases,
                source_file=rel_path,
            )
            class_level: set[str] = set()
            for item in node.body:
                if isinstance(item, (ast.FunctionDef, ast.AsyncFunctionDef)):
                    cls.methods.append(_method_from_ast(item))
                elif isinstance(item, ast.Assign):
                    for t in item.targets:
                        if isinstance(t, ast.Name) and t.id not in class_level:
                            class_level.add(t.id)
                            cls.attributes.append(AttributeDef(name=t.id, visibility=visibility_of(t.id)))
                elif isinstance(item, ast.AnnAssign) and isinstance(item.target, ast.Name):
                    if item.target.id not in class_level:
                        class_level.add(item.target.id)
                        ann = None
                        try:
                            ann = ast.unparse(item.annotation)
                        except Exception:
                            pass
                        cls.attributes.append(AttributeDef(name=item.target.id, visibility=visibility_of(item.target.id), type_annotation=ann))
            for attr in _self_attributes(node):
                if attr not in class_level:
                    class_level.add(attr)
                    cls.attributes.append(AttributeDef(name=attr, visibility=visibility_of(attr)))
            facts.classes.append(cls)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            end = getattr(node, "end_lineno", node.lineno) or node.lineno
            facts.functions.append(
                FunctionDef(
                    name=node.name,
                    source_file=rel_path,
                    parameters=_parameters(node.args),
                    calls=_call_names(node),
                    line_count=end - node.lineno + 1,
                )
            )


CLASS_LINE = re.compile(r"^(\s*)class\s+(\w+)\s*(?:\(([^)]*)\))?\s*:")
DEF_LINE = re.compile(r"^(\s*)(?:async\s+)?def\s+(\w+)\s*\(([^)]*)")
SELF_ATTR = re.compile(r"\bself\.(\w+)\s*=")


def _extract_recovery(text: str, rel_path: str, facts: FileFacts) -> None:
    """Indentation scan for files ast rejects: best-effort, never raises."""
    lines = text.splitlines()
    current_cls: ClassDef | None = None
    cls_indent = 0
    fn_stack: list[tuple[int, FunctionDef | MethodDef, int]] = []  # (indent, def, start line)

    def close_functions(indent: int, lineno: int) -> None:
        while fn_stack and indent <= fn_stack[-1][0]:
            _, fn, start = fn_stack.pop()
            if isinstance(fn, FunctionDef):
                fn.line_count = max(1, lineno - start)

    for lineno, line in enumerate(lines):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(line) - len(line.lstrip())
        cm = CLASS_LINE.match(line)
        dm = DEF_LINE.match(line)
        if cm:
            close_functions(indent, lineno)
            bases = [b.strip() for b in (cm.group(3) or "").split(",") if b.strip() and "=" not in b]
            current_cls = ClassDef(
                name=cm.group(2),
                kind=_class_kind(bases),
                visibility=visibility_of(cm.group(2)),
                extends=bases,
                source_file=rel_path,
            )
            cls_indent = indent
            facts.classes.append(current_cls)
        elif dm:
            close_functions(indent, lineno)
            name = dm.group(2)
            raw_params = [p.strip().split(":")[0].split("=")[0].strip() for p in dm.group(3).split(",")]
            params: list[tuple[str, str | None]] = [(p, None) for p in raw_params if p and p not in ("self", "cls")]
            if current_cls is not None and indent > cls_indent:
                meth = MethodDef(name=name, visibility=visibility_of(name), parameters=params)
                current_cls.methods.append(meth)
                fn_stack.append((indent, meth, lineno))
            elif indent == 0:
                fn = FunctionDef(name=name, source_file=rel_path, parameters=params, line_count=1)
                facts.functions.append(fn)
                fn_stack.append((indent, fn, lineno))
            if current_cls is not None and indent <= cls_indent:
                current_cls = None
        else:
            if current_cls is not None and indent <= cls_indent:
                current_cls = None
                close_functions(indent, lineno)
            if fn_stack:
                callee_holder = fn_stack[-1][1]
                for call in extract_calls(stripped, PY_KEYWORDS):
                    if call not in callee_holder.calls:
                        callee_holder.calls.append(call)
            if current_cls is not None:
                for m in SELF_ATTR.finditer(line):
                    name = m.group(1)
                    if all(a.name != name for a in current_cls.attributes):
                        current_cls.attributes.append(AttributeDef(name=name, visibility=visibility_of(name)))
    close_functions(0, len(lines))


def extract_file(text: str, rel_path: str) -> FileFacts:
    facts = FileFacts()
    try:
        tree = ast.parse(text)
    except (SyntaxError, ValueError):
        facts.had_errors = True
        _extract_recovery(text, rel_path, facts)
        return facts
    _extract_ast(tree, rel_path, facts)
    return facts
