"""Two-tier diagram orchestration over a pluggable model backend.

Routing is fixed by diagram type: component, deployment and system_context
take the SINGLE path (one generator plus its correction pass); class,
sequence, activity and usecase take the DEEP path (planner, then one
analyzer per planned scope run concurrently, then concurrent generators
whose corrections launch the moment their generator finishes, overlapping
later generations).

Failure isolation: one scope failing never aborts its siblings; the
observation keeps partial results and the event log records the error.
"""

from __future__ import annotations

import json
import re
import threading
from concurrent.futures import Future, ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

from c2u.agents import prompts
from c2u.agents.backend import Backend
from c2u.agents.session import EventLog, HookRegistry, ToolExecutor, run_session
from c2u.config import RunConfig
from c2u.extract import extract_project
from c2u.ir import ProjectIR, canonical_json
from c2u.normalize import normalize
from c2u.puml import DiagramArtifact, LintReport, apply_fixes, lint, parse_artifact
from c2u.views import SINGLE_PATH_TYPES, DiagramType, view_filename

#: Planner scaling bands: (exclusive class-count bound, min scopes, max scopes).
PLANNER_BANDS: tuple[tuple[int | None, int, int], ...] = (
    (20, 1, 3),
    (200, 3, 6),
    (1000, 6, 12),
    (2000, 10, 15),
    (None, 15, 30),
)


def scope_band(class_count: int) -> tuple[int, int]:
    for bound, lo, hi in PLANNER_BANDS:
        if bound is None or class_count < bound:
            return lo, hi
    raise AssertionError("unreachable")


class OrchestrationError(RuntimeError):
    pass


@dataclass
class Scope:
    label: str
    files: list[str] = field(default_factory=list)
    rationale: str = ""


@dataclass
class DiagramPlan:
    scopes: list[Scope]

    @property
    def target_diagram_count(self) -> int:
        return len(self.scopes)


@dataclass
class EnrichedContext:
    scope_label: str
    participants: list[str] = field(default_factory=list)
    interaction_flows: list[str] = field(default_factory=list)
    relationships: list[str] = field(default_factory=list)
    source_files: list[str] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {
            "interaction_flows": self.interaction_flows,
            "participants": self.participants,
            "relationships": self.relationships,
            "scope_label": self.scope_label,
            "source_files": self.source_files,
        }

    def serialized(self) -> bytes:
        return canonical_json(self.to_json_obj())

    def shrink_to(self, cap: int) -> bool:
        """Drop tail items from the longest list until the payload fits.
        Returns True if anything was dropped."""
        dropped = False
        while len(self.serialized()) > cap:
            lists = [self.participants, self.interaction_flows, self.relationships, self.source_files]
            longest = max(lists, key=lambda l: sum(len(x) for x in l))
            if not longest:
                self.scope_label = self.scope_label[:100]
                break
            longest.pop()
            dropped = True
        return dropped


@dataclass
class ProjectRun:
    """Shared read-only inputs plus the output layout for one project run."""

    ir: ProjectIR
    repo_root: Path
    run_dir: Path
    config: RunConfig = field(default_factory=RunConfig)
    event_log: EventLog = field(default_factory=EventLog)
    hooks: HookRegistry = field(default_factory=HookRegistry)
    deterministic: bool = False
    dependency_context: Path | None = None

    def executor(self) -> ToolExecutor:
        return ToolExecutor(read_roots=[self.repo_root], write_root=self.run_dir)


def _slug(label: str) -> str:
    s = re.sub(r"[^a-z0-9]+", "_", label.lower()).strip("_")
    return (s or "scope")[:30]


def _warning(event_log: EventLog, session_id: str, text: str) -> None:
    event_log.emit("message", session_id, {"level": "warning", "text": text})


def _extract_json(text: str) -> dict:
    start = text.find("{")
    end = text.rfind("}")
    if start < 0 or end <= start:
        raise ValueError("no JSON object in response")
    obj = json.loads(text[start : end + 1])
    if not isinstance(obj, dict):
        raise ValueError("response JSON is not an object")
    return obj


# ---------------------------------------------------------------------------
# the five agent operations


def plan(project: ProjectRun, dt: DiagramType, view_path: Path, class_count: int, backend: Backend) -> DiagramPlan:
    """PlannerAgent: scope decomposition, clamped into the size band."""
    task = (
        f"Diagram type: {dt.value}\n"
        f"View file: {view_path}\n"
        f"Class count: {class_count}\n"
        "Produce the diagram plan for this project."
    )
    last_error = "no attempt"
    for attempt in (1, 2):
        session = run_session(
            "planner", prompts.planner_system_prompt(), task, backend,
            project.executor(), project.event_log, session_id="planner:00",
            hooks=project.hooks, deterministic=project.deterministic,
        )
        if session.failed:
            last_error = "planner session failed"
            continue
        try:
            obj = _extract_json(session.result_text)
            raw_scopes = obj["scopes"]
            scopes = [
                Scope(label=str(s["label"]), files=[str(f) for f in s.get("files", [])], rationale=str(s.get("rationale", "")))
                for s in raw_scopes
            ]
            if not scopes:
                raise ValueError("empty scope list")
            return _clamp_plan(DiagramPlan(scopes), class_count, project.event_log)
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as e:
            last_error = str(e)
            if attempt == 1:
                _warning(project.event_log, "planner:00", f"unparseable plan ({e}); retrying once")
    raise OrchestrationError(f"planner output unusable after retry: {last_error}")


def _clamp_plan(p: DiagramPlan, class_count: int, event_log: EventLog) -> DiagramPlan:
    lo, hi = scope_band(class_count)
    n = len(p.scopes)
    if n > hi:
        _warning(event_log, "planner:00", f"plan of {n} scopes clamped to the band maximum {hi} for {class_count} classes")
        return DiagramPlan(p.scopes[:hi])
    if n < lo:
        _warning(event_log, "planner:00", f"plan of {n} scopes padded to the band minimum {lo} for {class_count} classes")
        padded = list(p.scopes)
        for i in range(n + 1, lo + 1):
            padded.append(Scope(label=f"auto_scope_{i}", rationale="added to meet the minimum scope count"))
        return DiagramPlan(padded)
    return p


def analyze(project: ProjectRun, scope: Scope, index: int, contexts_dir: Path, backend: Backend) -> Path:
    """AnalyzerAgent: compact per-scope context, hard-capped at 16 KB."""
    sid = f"analyzer:{index:02d}_{_slug(scope.label)}"
    file_list = "\n".join(f"- {f}" for f in scope.files) or "- (none designated)"
    task = (
        f"Scope: {scope.label}\n"
        f"Repository root: {project.repo_root}\n"
        f"Rationale: {scope.rationale}\n"
        f"Files to read:\n{file_list}\n"
        "Return the compact context summary."
    )
    session = run_session(
        "analyzer", prompts.analyzer_system_prompt(), task, backend,
        project.executor(), project.event_log, session_id=sid,
        hooks=project.hooks, deterministic=project.deterministic,
    )
    if session.failed:
        raise OrchestrationError(f"analyzer failed for scope {scope.label!r}")
    ctx = EnrichedContext(scope_label=scope.label)
    try:
        obj = _extract_json(session.result_text)
        ctx.participants = [str(x) for x in obj.get("participants", [])]
        ctx.interaction_flows = [str(x) for x in obj.get("interaction_flows", [])]
        ctx.relationships = [str(x) for x in obj.get("relationships", [])]
        ctx.source_files = [str(x) for x in obj.get("source_files", [])]
    except (ValueError, json.JSONDecodeError):
        ctx.interaction_flows = [session.result_text.strip()[:2000]]
    if not scope.files and not any((ctx.participants, ctx.interaction_flows, ctx.relationships)):
        _warning(project.event_log, sid, f"scope {scope.label!r} produced an empty context")
    if ctx.shrink_to(project.config.context_cap_bytes):
        _warning(project.event_log, sid, f"context for scope {scope.label!r} truncated to the 16 KB cap")
    contexts_dir.mkdir(parents=True, exist_ok=True)
    path = contexts_dir / f"{index:02d}_{_slug(scope.label)}.json"
    path.write_bytes(ctx.serialized())
    return path


def generate_diagram(
    project: ProjectRun,
    dt: DiagramType,
    view_path: Path,
    out_path: Path,
    backend: Backend,
    scope: Scope | None = None,
    context_path: Path | None = None,
) -> Path:
    """DiagramAgent: exactly one .puml written at the designated path."""
    if not view_path.is_file():
        raise OrchestrationError(f"view file missing: {view_path}")
    if context_path is not None and not context_path.is_file():
        raise OrchestrationError(f"context file missing: {context_path}")
    sid = f"diagram:{out_path.stem}"
    lines = [f"Diagram type: {dt.value}", f"View file: {view_path}", f"Output file: {out_path}"]
    if scope is not None:
        lines.append(f"Scope: {scope.label}")
        if scope.files:
            lines.append("Scope files: " + ", ".join(scope.files))
    if context_path is not None:
        lines.append(f"Context file: {context_path}")
    if project.dependency_context is not None:
        lines.append(f"Dependency context: {project.dependency_context}")
    lines.append("Write one complete PlantUML document to the output file.")
    session = run_session(
        "diagram", prompts.diagram_system_prompt(dt, project.config), "\n".join(lines), backend,
        project.executor(), project.event_log, session_id=sid,
        hooks=project.hooks, deterministic=project.deterministic,
    )
    if session.failed or not out_path.is_file():
        raise OrchestrationError(f"diagram agent produced no file at {out_path}")
    return out_path


def correct(project: ProjectRun, puml_path: Path, dt: DiagramType, backend: Backend, scope_label: str | None = None) -> tuple[DiagramArtifact, LintReport]:
    """Correction pass: deterministic lint and fix first (the pre-fix verdict
    is the validity datum), then one corrector session, then a final re-lint
    for the record."""
    if not puml_path.is_file():
        raise OrchestrationError(f"cannot correct a missing file: {puml_path}")
    sid = f"corrector:{puml_path.stem}"
    log = project.event_log
    log.emit("correction_start", sid, {"file": puml_path.name})

    original = puml_path.read_text(encoding="utf-8")
    artifact = parse_artifact(original, dt, scope_label=scope_label)
    report = lint(artifact, dt, project.config)
    if report.verdict == "corrected":
        fixed = apply_fixes(artifact, report, project.config)
        puml_path.write_text(fixed.text, encoding="utf-8")

    task = (
        f"Diagram type: {dt.value}\n"
        f"Diagram file: {puml_path}\n"
        f"Deterministic verdict: {report.verdict}\n"
        f"Findings: {len(report.violations)} violation(s)"
        + ("; a model rewrite may fix what the rule engine cannot" if report.verdict == "uncorrectable" else "")
        + "\nRead the file and rewrite it in place only if corrections are needed."
    )
    run_session(
        "corrector", prompts.corrector_system_prompt(dt), task, backend,
        project.executor(), log, session_id=sid,
        hooks=project.hooks, deterministic=project.deterministic,
    )

    final_text = puml_path.read_text(encoding="utf-8")
    final_artifact = parse_artifact(final_text, dt, scope_label=scope_label)
    final_report = lint(final_artifact, dt, project.config)
    lint_obj = report.to_json_obj()
    lint_obj["final_verdict"] = final_report.verdict
    puml_path.with_suffix(".lint.json").write_bytes(canonical_json(lint_obj))
    log.emit("correction_end", sid, {"file": puml_path.name, "verdict": report.verdict, "final_verdict": final_report.verdict})
    return final_artifact, report


def analyze_dependencies(deps_root: Path | None, out_dir: Path, config: RunConfig | None = None) -> Path | None:
    """Summarize a third-party dependency tree into a compact context file.

    Extraction and summarization are deterministic; absent input is a no-op.
    """
    config = config or RunConfig()
    if deps_root is None or not Path(deps_root).is_dir():
        return None
    ir, _ = extract_project(deps_root, deterministic=True)
    norm = normalize(ir)
    summary = {
        "classes": sorted(c.name for c in norm.classes),
        "functions": sorted(f.name for f in norm.functions),
        "languages": sorted(norm.languages),
    }
    while len(canonical_json(summary)) > config.context_cap_bytes:
        longest = max(("classes", "functions"), key=lambda k: len(summary[k]))
        if not summary[longest]:
            break
        summary[longest] = summary[longest][:-1]
    out_dir.mkdir(parents=True, exist_ok=True)
    path = Path(out_dir) / "dependency_context.json"
    path.write_bytes(canonical_json(summary))
    return path


# ---------------------------------------------------------------------------
# orchestration


def orchestrate(
    project: ProjectRun,
    dt: DiagramType,
    backend: Backend,
    concurrency_limit: int = 4,
) -> list[tuple[DiagramArtifact, LintReport]]:
    """Run the full SINGLE or DEEP pipeline for one diagram type."""
    type_dir = project.run_dir / dt.value
    type_dir.mkdir(parents=True, exist_ok=True)
    view_path = project.run_dir / view_filename(dt)
    if not view_path.is_file():
        raise OrchestrationError(f"view file missing: {view_path} (generate views first)")
    log = project.event_log

    if dt in SINGLE_PATH_TYPES:
        out_path = type_dir / "01_overview.puml"
        generate_diagram(project, dt, view_path, out_path, backend)
        return [correct(project, out_path, dt, backend, scope_label="overview")]

    diagram_plan = plan(project, dt, view_path, len(project.ir.classes), backend)
    contexts_dir = type_dir / "contexts"

    context_paths: dict[int, Path] = {}
    failed_scopes: set[int] = set()
    lock = threading.Lock()

    def _run_analyzer(idx: int, scope: Scope) -> None:
        try:
            path = analyze(project, scope, idx, contexts_dir, backend)
            with lock:
                context_paths[idx] = path
        except OrchestrationError as e:
            log.emit("error", f"analyzer:{idx:02d}_{_slug(scope.label)}", {"error": str(e)})
            with lock:
                failed_scopes.add(idx)

    indexed = list(enumerate(diagram_plan.scopes, 1))
    with ThreadPoolExecutor(max_workers=concurrency_limit) as pool:
        list(pool.map(lambda pair: _run_analyzer(*pair), indexed))

    results: dict[int, tuple[DiagramArtifact, LintReport]] = {}

    def _run_generation(idx: int, scope: Scope) -> Path:
        out_path = type_dir / f"{idx:02d}_{_slug(scope.label)}.puml"
        return generate_diagram(
            project, dt, view_path, out_path, backend,
            scope=scope, context_path=context_paths.get(idx),
        )

    def _run_correction(idx: int, scope: Scope, puml_path: Path) -> None:
        try:
            pair = correct(project, puml_path, dt, backend, scope_label=scope.label)
            with lock:
                results[idx] = pair
        except OrchestrationError as e:
            log.emit("error", f"corrector:{idx:02d}_{_slug(scope.label)}", {"error": str(e)})

    # Corrections are submitted the moment their generation completes and run
    # in their own pool, so they overlap later generations instead of queueing
    # behind them.
    with ThreadPoolExecutor(max_workers=concurrency_limit) as gen_pool, ThreadPoolExecutor(
        max_workers=concurrency_limit
    ) as corr_pool:
        gen_futures: dict[Future, tuple[int, Scope]] = {}
        for idx, scope in indexed:
            if idx in failed_scopes:
                continue
            gen_futures[gen_pool.submit(_run_generation, idx, scope)] = (idx, scope)
        corr_futures: list[Future] = []
        for fut in as_completed(gen_futures):
            idx, scope = gen_futures[fut]
            try:
                puml_path = fut.result()
            except OrchestrationError as e:
                log.emit("error", f"diagram:{idx:02d}_{_slug(scope.label)}", {"error": str(e)})
                continue
            corr_futures.append(corr_pool.submit(_run_correction, idx, scope, puml_path))
        for fut in corr_futures:
            fut.result()

    return [results[idx] for idx in sorted(results)]
