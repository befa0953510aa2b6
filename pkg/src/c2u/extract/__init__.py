"""Language detection, extractor registry, and repository-level extraction.

The frontend contract is deliberately small: an extractor is a callable
``(source_text, relative_path) -> FileFacts``. Anything honoring that and
the error-tolerance rules (malformed files contribute what they can and are
counted, never fatal) can be registered.
"""

from __future__ import annotations

import datetime
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from c2u.extract import java, javascript, php, python
from c2u.extract.base import FileFacts
from c2u.ir import ClassDef, ProjectIR, merge

log = logging.getLogger(__name__)

Extractor = Callable[[str, str], FileFacts]

LANGUAGE_EXTENSIONS: dict[str, tuple[str, ...]] = {
    "java": (".java",),
    "python": (".py",),
    "javascript": (".js", ".mjs"),
    "php": (".php",),
}

#: Dependency and build output trees never feed the IR; third-party code
#: flows through the dependency-analysis path instead.
SKIP_DIRS = frozenset({"node_modules", "vendor", "target", "dist", ".git"})

#: Filenames whose content is surfaced as infrastructure metadata for the
#: deployment view.
_CONFIG_SUFFIXES = (".yml", ".yaml", ".toml", ".ini", ".conf", ".cfg", ".properties")
_CONFIG_VALUE_CAP = 400
_CONFIG_FILE_CAP = 20


class UnknownLanguageError(KeyError):
    pass


class ExtractorRegistry:
    """Exactly one extractor per language; unknown lookups fail loudly."""

    def __init__(self) -> None:
        self._extractors: dict[str, Extractor] = {}

    def register(self, language: str, extractor: Extractor) -> None:
        if language in self._extractors:
            raise ValueError(f"extractor for {language!r} already registered")
        self._extractors[language] = extractor

    def get(self, language: str) -> Extractor:
        try:
            return self._extractors[language]
        except KeyError:
            raise UnknownLanguageError(f"no extractor registered for {language!r}") from None

    def languages(self) -> set[str]:
        return set(self._extractors)


def default_registry() -> ExtractorRegistry:
    reg = ExtractorRegistry()
    reg.register("java", java.extract_file)
    reg.register("python", python.extract_file)
    reg.register("javascript", javascript.extract_file)
    reg.register("php", php.extract_file)
    return reg


@dataclass
class ExtractionReport:
    files_scanned: int = 0
    files_with_errors: int = 0
    files_skipped: list[tuple[str, str]] = field(default_factory=list)
    per_language_files: dict[str, int] = field(default_factory=dict)

    def summary(self) -> str:
        per_lang = ", ".join(f"{k}: {v}" for k, v in sorted(self.per_language_files.items())) or "none"
        return (
            f"scanned {self.files_scanned} files ({per_lang}); "
            f"{self.files_with_errors} with parse errors; {len(self.files_skipped)} skipped"
        )


def _iter_source_files(repo_root: Path, extensions: tuple[str, ...]) -> list[Path]:
    found = []
    for p in sorted(repo_root.rglob("*")):
        if not p.is_file() or p.suffix.lower() not in extensions:
            continue
        if any(part in SKIP_DIRS for part in p.relative_to(repo_root).parts[:-1]):
            continue
        found.append(p)
    return found


def detect_languages(repo_root: str | Path) -> set[str]:
    """Languages with at least one matching source file under repo_root."""
    root = Path(repo_root)
    if not root.is_dir():
        raise OSError(f"not a readable directory: {root}")
    langs = set()
    for lang, exts in LANGUAGE_EXTENSIONS.items():
        if _iter_source_files(root, exts):
            langs.add(lang)
    return langs


def _dedupe_class_names(classes: list[ClassDef]) -> None:
    """Ordinal-suffix same-name classes so downstream name sets stay exact."""
    taken: set[str] = set()
    for c in classes:
        if c.name in taken:
            n = 2
            while f"{c.name}_{n}" in taken:
                n += 1
            c.name = f"{c.name}_{n}"
        taken.add(c.name)


def _infra_metadata(repo_root: Path) -> dict[str, str]:
    hits: list[Path] = []
    for p in sorted(repo_root.rglob("*")):
        if not p.is_file():
            continue
        if any(part in SKIP_DIRS for part in p.relative_to(repo_root).parts[:-1]):
            continue
        name = p.name.lower()
        if name.startswith(("dockerfile", "docker-compose")) or p.suffix.lower() in _CONFIG_SUFFIXES:
            hits.append(p)
        if len(hits) >= _CONFIG_FILE_CAP:
            break
    meta = {}
    for p in hits:
        try:
            content = p.read_text(encoding="utf-8", errors="replace")
        except OSError:
            continue
        rel = p.relative_to(repo_root).as_posix()
        meta[f"config:{rel}"] = " ".join(content.split())[:_CONFIG_VALUE_CAP]
    return meta


def extract_project(
    repo_root: str | Path,
    langs: set[str] | None = None,
    registry: ExtractorRegistry | None = None,
    deterministic: bool = False,
) -> tuple[ProjectIR, ExtractionReport]:
    """Run every requested language extractor and merge the results.

    The returned IR is raw (``normalized=False``). Files that fail to parse
    still contribute whatever structure was recovered and are tallied in the
    report; an entirely unparseable repository yields an empty IR, not an
    error.
    """
    root = Path(repo_root)
    if not root.is_dir():
        raise OSError(f"not a readable directory: {root}")
    registry = registry or default_registry()
    if langs is None:
        langs = detect_languages(root) & registry.languages()
    unknown = langs - registry.languages()
    if unknown:
        raise UnknownLanguageError(f"no extractor registered for {sorted(unknown)!r}")

    report = ExtractionReport()
    per_language_irs: list[ProjectIR] = []

    for lang in sorted(langs):
        extractor = registry.get(lang)
        files = _iter_source_files(root, LANGUAGE_EXTENSIONS[lang])
        report.per_language_files[lang] = len(files)
        lang_ir = ProjectIR(project_name=root.name, languages={lang})
        for path in files:
            report.files_scanned += 1
            rel = path.relative_to(root).as_posix()
            try:
                text = path.read_text(encoding="utf-8")
            except UnicodeDecodeError:
                report.files_skipped.append((rel, "not valid UTF-8"))
                continue
            except OSError as e:
                report.files_skipped.append((rel, f"unreadable: {e.strerror}"))
                continue
            facts = extractor(text, rel)
            if facts.had_errors:
                report.files_with_errors += 1
                log.debug("parse errors in %s; kept %d classes", rel, len(facts.classes))
            lang_ir.classes.extend(facts.classes)
            lang_ir.functions.extend(facts.functions)
        lang_ir.classes.sort(key=lambda c: (c.source_file, c.name))
        lang_ir.functions.sort(key=lambda f: (f.source_file, f.name))
        _dedupe_class_names(lang_ir.classes)
        per_language_irs.append(lang_ir)

    if per_language_irs:
        ir = merge(per_language_irs)
    else:
        ir = ProjectIR(project_name=root.name)
    ir.metadata["repository_path"] = str(root)
    ir.metadata["file_count"] = str(report.files_scanned)
    ir.metadata["extracted_at"] = (
        "1970-01-01T00:00:00Z"
        if deterministic
        else datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    )
    ir.metadata.update(_infra_metadata(root))
    return ir, report
