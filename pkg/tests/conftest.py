"""Shared fixtures: IR builders, fuzz generators, fixture repositories."""

from __future__ import annotations

import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from c2u.ir import AttributeDef, ClassDef, FunctionDef, MethodDef, ProjectIR


def make_class(
    name: str,
    methods: int = 0,
    attributes: int = 0,
    extends: list[str] | None = None,
    implements: list[str] | None = None,
    kind: str = "class",
    visibility: str = "public",
    source_file: str = "src/a.py",
    calls_per_method: int = 0,
) -> ClassDef:
    return ClassDef(
        name=name,
        kind=kind,
        visibility=visibility,
        methods=[
            MethodDef(name=f"m{i}", visibility="public", calls=[f"callee{i}_{j}" for j in range(calls_per_method)])
            for i in range(methods)
        ],
        attributes=[AttributeDef(name=f"a{i}", visibility="private") for i in range(attributes)],
        extends=list(extends or []),
        implements=list(implements or []),
        source_file=source_file,
    )


def make_function(name: str, line_count: int = 5, calls: list[str] | None = None, source_file: str = "src/b.py") -> FunctionDef:
    return FunctionDef(name=name, source_file=source_file, calls=list(calls or []), line_count=line_count)


def make_ir(classes=(), functions=(), name: str = "proj", languages=("python",), normalized: bool = False) -> ProjectIR:
    return ProjectIR(
        project_name=name,
        languages=set(languages),
        classes=list(classes),
        functions=list(functions),
        normalized=normalized,
    )


# ---------------------------------------------------------------------------
# seeded random IR generator (fast bulk fuzzing)

_VISIBILITIES_RAW = ["public", "private", "protected", "package", "", "pub", "internal", "PUBLIC"]


def random_raw_ir(rng: random.Random, max_classes: int = 30, max_functions: int = 15, big: bool = False) -> ProjectIR:
    """Schema-valid raw IR with non-canonical visibilities, qualified parents,
    possible noise elements. ``big`` stretches member counts for size fuzzing."""
    n_classes = rng.randint(0, max_classes)
    n_functions = rng.randint(0, max_functions)
    classes = []
    for i in range(n_classes):
        n_m = rng.randint(0, 40 if big else 6)
        n_a = rng.randint(0, 30 if big else 5)
        cls = ClassDef(
            name=f"C{i}_{rng.randint(0, 999)}",
            kind=rng.choice(["class", "interface", "enum"]),
            visibility=rng.choice(_VISIBILITIES_RAW),
            methods=[
                MethodDef(
                    name=f"m{j}_{rng.randint(0, 99)}",
                    visibility=rng.choice(_VISIBILITIES_RAW),
                    parameters=[(f"p{k}", rng.choice([None, "int", "str"])) for k in range(rng.randint(0, 4))],
                    calls=[f"call_{rng.randint(0, 50)}" for _ in range(rng.randint(0, 12 if big else 4))],
                )
                for j in range(n_m)
            ],
            attributes=[
                AttributeDef(name=f"a{j}", visibility=rng.choice(_VISIBILITIES_RAW), type_annotation=rng.choice([None, "List[int]"]))
                for j in range(n_a)
            ],
            extends=rng.sample(["Base", "pkg.Base", "a.b.Core", "x\\y\\Core", "Other"], k=rng.randint(0, 2)),
            implements=rng.sample(["Iface", "ns.Iface", "Comparable"], k=rng.randint(0, 2)),
            source_file=f"src/dir{rng.randint(0, 5)}/f{i}.py",
        )
        classes.append(cls)
    functions = [
        FunctionDef(
            name=f"fn{i}_{rng.randint(0, 999)}",
            source_file=f"src/dir{rng.randint(0, 5)}/g{i}.py",
            calls=[f"c{rng.randint(0, 30)}" for _ in range(rng.randint(0, 6))],
            line_count=rng.randint(0, 80),
        )
        for i in range(n_functions)
    ]
    metadata = {}
    if rng.random() < 0.5:
        metadata["config:docker-compose.yml"] = "services: app " * rng.randint(1, 10)
    if rng.random() < 0.3:
        metadata["repository_path"] = "/tmp/x"
    return ProjectIR(
        project_name=f"proj{rng.randint(0, 99)}",
        languages={rng.choice(["python", "java", "javascript", "php"])},
        classes=classes,
        functions=functions,
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# hypothesis strategies

_IDENT = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,10}", fullmatch=True)
_VIS = st.sampled_from(["public", "private", "protected", "package", "", "pub", "friend"])
_PARENT = st.sampled_from(["Base", "pkg.Base", "ns\\Impl", "a.b.C", "Root", "Root"])


@st.composite
def method_defs(draw):
    return MethodDef(
        name=draw(_IDENT),
        visibility=draw(_VIS),
        calls=draw(st.lists(_IDENT, max_size=4)),
        parameters=draw(st.lists(st.tuples(_IDENT, st.none() | st.just("int")), max_size=3)),
    )


@st.composite
def class_defs(draw, index: int = 0):
    return ClassDef(
        name=f"{draw(_IDENT)}_{index}",
        kind=draw(st.sampled_from(["class", "interface", "enum"])),
        visibility=draw(_VIS),
        methods=draw(st.lists(method_defs(), max_size=5)),
        attributes=draw(st.lists(st.builds(AttributeDef, name=_IDENT, visibility=_VIS), max_size=4)),
        extends=draw(st.lists(_PARENT, max_size=3)),
        implements=draw(st.lists(_PARENT, max_size=2)),
        source_file=draw(st.sampled_from(["src/a.py", "src/sub/b.py", "lib/c.py"])),
    )


@st.composite
def raw_irs(draw, max_elements: int = 12):
    n_c = draw(st.integers(0, max_elements // 2))
    classes = [draw(class_defs(index=i)) for i in range(n_c)]
    n_f = draw(st.integers(0, max_elements // 2))
    functions = [
        FunctionDef(
            name=f"{draw(_IDENT)}_{i}",
            source_file="src/fn.py",
            calls=draw(st.lists(_IDENT, max_size=3)),
            line_count=draw(st.integers(0, 40)),
        )
        for i in range(n_f)
    ]
    return ProjectIR(
        project_name=draw(_IDENT),
        languages={draw(st.sampled_from(["python", "java", "javascript", "php"]))},
        classes=classes,
        functions=functions,
        metadata=draw(st.dictionaries(st.sampled_from(["config:app.yml", "repository_path", "file_count"]), st.text(max_size=30), max_size=3)),
    )


# ---------------------------------------------------------------------------
# fixture repositories


@pytest.fixture
def fixture_repo(tmp_path: Path) -> Path:
    """Small mixed-language repository with known contents."""
    repo = tmp_path / "repo"
    (repo / "src").mkdir(parents=True)
    (repo / "src" / "core.py").write_text(
        '''"""Core module."""


class OrderService:
    tax = 0.19

    def __init__(self, store):
        self.store = store

    def place(self, order):
        self.check(order)
        self.store.save(order)

    def check(self, order):
        validate_items(order.items)


def validate_items(items):
    if not items:
        raise ValueError("empty")
    return True
''',
        encoding="utf-8",
    )
    (repo / "src" / "Main.java").write_text(
        """package demo;

public class Main extends demo.base.App implements Runnable {
    private int counter;

    public void run() {
        helper();
    }

    void helper() {
        System.out.println(counter);
    }
}
""",
        encoding="utf-8",
    )
    (repo / "docker-compose.yml").write_text("services:\n  app:\n    image: demo:1\n", encoding="utf-8")
    return repo
