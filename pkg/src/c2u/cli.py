"""Command-line surface.

Exit codes (total across commands):
  0  success
  1  usage, I/O, configuration, or pipeline error
  2  extraction produced an empty IR
  3  lint found correctable violations
  4  lint found uncorrectable violations
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from c2u import metrics as metrics_mod
from c2u.agents.backend import ApiBackend, MockBackend
from c2u.agents.orchestrator import OrchestrationError, ProjectRun, orchestrate
from c2u.config import RunConfig, config_defaults_text, load_config
from c2u.extract import detect_languages, extract_project
from c2u.ir import IRSchemaError, ProjectIR, canonical_json, deserialize, serialize
from c2u.normalize import normalize
from c2u.puml import DiagramArtifact, LintReport, apply_fixes, lint, parse_artifact
from c2u.views import (
    DiagramType,
    IrreducibleViewError,
    explain_csv,
    generate_view,
    write_view,
)

ALL_TYPES = [dt.value for dt in DiagramType]


def _load_runconfig(config_path: str | None) -> RunConfig:
    if config_path:
        return load_config(config_path)
    cfg = RunConfig()
    cfg.backend = os.environ.get("C2U_BACKEND", cfg.backend)
    return cfg


def _build_backend(cfg: RunConfig):
    if cfg.backend == "api":
        if not os.environ.get("C2U_API_KEY"):
            raise click.ClickException("backend 'api' selected but C2U_API_KEY is not set")
        return ApiBackend()
    return MockBackend(scripts_dir=cfg.mock_scripts_dir)


def _parse_type(name: str) -> DiagramType:
    try:
        return DiagramType(name)
    except ValueError:
        raise click.ClickException(f"unknown diagram type {name!r}; expected one of: {', '.join(ALL_TYPES)} or 'all'")


@click.group()
@click.version_option()
def main() -> None:
    """Repository-to-UML toolchain."""


@main.command("defaults")
def cmd_defaults() -> None:
    """Print the default configuration as a loadable config file."""
    click.echo(config_defaults_text(), nl=False)


@main.command("extract")
@click.argument("repo", type=click.Path(file_okay=False))
@click.option("--out", "-o", default=".", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--raw", is_flag=True, help="Skip normalization; write the raw IR.")
@click.option("--deterministic", is_flag=True, help="Zero timestamps for reproducible output.")
def cmd_extract(repo: str, out: str, raw: bool, deterministic: bool) -> None:
    """Detect languages, extract, and (unless --raw) normalize one repository."""
    repo_path = Path(repo)
    try:
        langs = detect_languages(repo_path)
        ir, report = extract_project(repo_path, langs, deterministic=deterministic)
    except OSError as e:
        raise click.ClickException(str(e))
    if not raw:
        ir = normalize(ir)
    suffix = ".ir.json" if raw else ".norm.ir.json"
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / f"{repo_path.name}{suffix}"
    target.write_bytes(serialize(ir))
    click.echo(report.summary())
    click.echo(f"languages: {', '.join(sorted(ir.languages)) or 'none'}")
    click.echo(f"elements: {ir.element_count()} ({len(ir.classes)} classes, {len(ir.functions)} functions)")
    click.echo(f"wrote {target}")
    if ir.element_count() == 0:
        sys.exit(2)


@main.command("view")
@click.argument("ir_file", type=click.Path(dir_okay=False, exists=True))
@click.option("--diagram", "-d", default="all", help="Diagram type or 'all'.")
@click.option("--out", "-o", default=".", type=click.Path(file_okay=False))
@click.option("--explain", is_flag=True, help="Also write the ranked importance score table (CSV).")
@click.option("--config", "config_path", type=click.Path(dir_okay=False, exists=True), default=None)
def cmd_view(ir_file: str, diagram: str, out: str, explain: bool, config_path: str | None) -> None:
    """Compact a normalized IR into byte-bounded diagram views."""
    cfg = _load_runconfig(config_path)
    try:
        ir = deserialize(Path(ir_file).read_bytes())
    except IRSchemaError as e:
        raise click.ClickException(f"bad IR file: {e}")
    if not ir.normalized:
        ir = normalize(ir)
    types = list(DiagramType) if diagram == "all" else [_parse_type(diagram)]
    out_dir = Path(out)
    for dt in types:
        try:
            view = generate_view(ir, dt, cfg)
        except IrreducibleViewError as e:
            raise click.ClickException(str(e))
        path = write_view(view, out_dir)
        click.echo(f"{dt.value}: {view.byte_size} bytes, {view.shrink_iterations} shrink iterations -> {path}")
        if explain:
            score_path = out_dir / f"scores_{dt.value}.csv"
            score_path.write_text(explain_csv(ir, dt, cfg), encoding="utf-8")
            click.echo(f"{dt.value}: score table -> {score_path}")


def _prepare_project(source: Path, cfg: RunConfig, deterministic: bool) -> tuple[ProjectIR, Path]:
    """(normalized IR, repo root) from either a repository or an .ir.json file."""
    if source.is_file() and source.name.endswith(".ir.json"):
        ir = deserialize(source.read_bytes())
        if not ir.normalized:
            ir = normalize(ir)
        repo_root = Path(ir.metadata.get("repository_path", source.parent))
        if not repo_root.is_dir():
            repo_root = source.parent
        return ir, repo_root
    if not source.is_dir():
        raise click.ClickException(f"{source} is neither a repository directory nor an .ir.json file")
    ir, _ = extract_project(source, deterministic=deterministic)
    return normalize(ir), source


def _run_observation(
    ir: ProjectIR,
    repo_root: Path,
    run_dir: Path,
    dt: DiagramType,
    cfg: RunConfig,
    backend,
    deterministic: bool,
) -> list[tuple[DiagramArtifact, LintReport]]:
    """Views + orchestration + events.jsonl for one (project, type) pair."""
    run_dir.mkdir(parents=True, exist_ok=True)
    view = generate_view(ir, dt, cfg)
    write_view(view, run_dir)
    project = ProjectRun(
        ir=ir, repo_root=repo_root, run_dir=run_dir, config=cfg,
        deterministic=deterministic,
    )
    try:
        pairs = orchestrate(project, dt, backend, concurrency_limit=cfg.concurrency_limit)
    finally:
        type_dir = run_dir / dt.value
        type_dir.mkdir(parents=True, exist_ok=True)
        (type_dir / "events.jsonl").write_text(project.event_log.to_jsonl(deterministic=deterministic), encoding="utf-8")
    return pairs


@main.command("generate")
@click.argument("source", type=click.Path(exists=True))
@click.option("--diagram", "-d", default="all", help="Diagram type or 'all'.")
@click.option("--backend", "-b", "backend_name", default=None, help="mock or api (default: C2U_BACKEND or mock).")
@click.option("--out", "-o", default="out", type=click.Path(file_okay=False))
@click.option("--scripts", type=click.Path(file_okay=False), default=None, help="Mock script directory.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False, exists=True), default=None)
@click.option("--deterministic", is_flag=True)
def cmd_generate(source: str, diagram: str, backend_name: str | None, out: str, scripts: str | None, config_path: str | None, deterministic: bool) -> None:
    """Full pipeline: extract (if needed), compact, orchestrate agents, correct."""
    cfg = _load_runconfig(config_path)
    if backend_name:
        cfg.backend = backend_name
    if scripts:
        cfg.mock_scripts_dir = scripts
    if deterministic:
        cfg.deterministic = True
    cfg.validate()
    backend = _build_backend(cfg)
    ir, repo_root = _prepare_project(Path(source), cfg, cfg.deterministic)
    run_dir = Path(out) / ir.project_name
    types = list(DiagramType) if diagram == "all" else [_parse_type(diagram)]
    failures = 0
    for dt in types:
        try:
            pairs = _run_observation(ir, repo_root, run_dir, dt, cfg, backend, cfg.deterministic)
        except (OrchestrationError, IrreducibleViewError) as e:
            click.echo(f"{dt.value}: FAILED ({e})", err=True)
            failures += 1
            continue
        verdicts = ", ".join(rep.verdict for _, rep in pairs) or "no diagrams"
        click.echo(f"{dt.value}: {len(pairs)} diagram(s) [{verdicts}] -> {run_dir / dt.value}")
    if failures:
        sys.exit(1)


@main.command("lint")
@click.argument("puml_file", type=click.Path(dir_okay=False, exists=True))
@click.option("--type", "-t", "type_name", required=True, help="Diagram type of the file.")
@click.option("--fix", is_flag=True, help="Rewrite the file in place with all correctable fixes.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False, exists=True), default=None)
def cmd_lint(puml_file: str, type_name: str, fix: bool, config_path: str | None) -> None:
    """Lint one .puml file; exits 0 valid / 3 corrected / 4 uncorrectable."""
    cfg = _load_runconfig(config_path)
    dt = _parse_type(type_name)
    path = Path(puml_file)
    artifact = parse_artifact(path.read_text(encoding="utf-8"), dt)
    report = lint(artifact, dt, cfg)
    click.echo(f"verdict: {report.verdict}")
    for v in report.violations:
        click.echo(f"  {v.rule_id} line {v.line}: {v.excerpt}")
    if report.verdict == "valid":
        return
    if report.verdict == "uncorrectable":
        sys.exit(4)
    if fix:
        fixed = apply_fixes(artifact, report, cfg)
        path.write_text(fixed.text, encoding="utf-8")
        click.echo(f"applied {report.fixes_applied} fix(es); file rewritten")
    sys.exit(3)


def _observation_from_dir(project_id: str, dt: DiagramType, type_dir: Path, ir: ProjectIR, cfg: RunConfig) -> metrics_mod.Observation | None:
    pumls = sorted(type_dir.glob("*.puml"))
    if not pumls:
        return None
    diagrams: list[tuple[DiagramArtifact, LintReport]] = []
    for p in pumls:
        art = parse_artifact(p.read_text(encoding="utf-8"), dt, scope_label=p.stem)
        lint_file = p.with_suffix(".lint.json")
        if lint_file.is_file():
            obj = json.loads(lint_file.read_text(encoding="utf-8"))
            rep = LintReport(uncorrectable=bool(obj.get("uncorrectable", False)))
            if obj.get("verdict") != "valid":
                from c2u.puml import Violation

                rep.violations = [
                    Violation(v.get("rule", "?"), int(v.get("line", 0)), str(v.get("excerpt", "")))
                    for v in obj.get("violations", [])
                ]
            rep.fixes_applied = int(obj.get("fixes_applied", 0))
        else:
            rep = lint(art, dt, cfg)
        diagrams.append((art, rep))
    return metrics_mod.Observation(
        project_id=project_id,
        diagram_type=dt,
        ir_entity_names=ir.element_names(),
        diagrams=diagrams,
        ir_entity_count=ir.element_count(),
    )


@main.command("metrics")
@click.argument("diagrams_dir", type=click.Path(file_okay=False, exists=True))
@click.option("--ir", "ir_file", required=True, type=click.Path(dir_okay=False, exists=True))
@click.option("--out", "-o", default=None, type=click.Path(file_okay=False), help="Where batch CSVs go (default: diagrams dir).")
@click.option("--config", "config_path", type=click.Path(dir_okay=False, exists=True), default=None)
def cmd_metrics(diagrams_dir: str, ir_file: str, out: str | None, config_path: str | None) -> None:
    """Score every <type> subdirectory of DIAGRAMS_DIR against the IR."""
    cfg = _load_runconfig(config_path)
    ir = deserialize(Path(ir_file).read_bytes())
    root = Path(diagrams_dir)
    out_dir = Path(out) if out else root
    observations = []
    reports = []
    for dt in DiagramType:
        type_dir = root / dt.value
        if not type_dir.is_dir():
            continue
        obs = _observation_from_dir(ir.project_name, dt, type_dir, ir, cfg)
        if obs is None:
            continue
        rep = metrics_mod.compute_report(obs, cfg)
        observations.append(obs)
        reports.append(rep)
        (type_dir / "metrics.json").write_bytes(canonical_json(rep.to_json_obj()))
        recall = "N/A" if rep.entity_recall is None else f"{rep.entity_recall:.3f}"
        precision = "N/A" if rep.relationship_precision is None else f"{rep.relationship_precision:.3f}"
        click.echo(
            f"{dt.value}: validity {rep.validity_pct:.1f}%, recall {recall}, "
            f"precision {precision}, quality {rep.quality:.1f}, sci {rep.sci:.1f}"
        )
    if not observations:
        raise click.ClickException(f"no diagrams found under {root}")
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in metrics_mod.batch_tables(observations, reports).items():
        (out_dir / f"table_{name}.csv").write_text(text, encoding="utf-8")
    click.echo(f"batch tables -> {out_dir}")


@main.command("evaluate")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False, exists=True))
@click.option("--out", "-o", default="eval_out", type=click.Path(file_okay=False))
@click.option("--backend", "-b", "backend_name", default=None)
@click.option("--resume", is_flag=True, help="Skip (project, type) observations that already have metrics.json.")
@click.option("--deterministic", is_flag=True)
def cmd_evaluate(corpus_path: str, out: str, backend_name: str | None, resume: bool, deterministic: bool) -> None:
    """Corpus harness: extract, compact, generate, lint, and score every
    (project, diagram type) pair; emit the aggregate tables."""
    try:
        cfg = load_config(corpus_path)
    except ValueError as e:
        raise click.ClickException(f"malformed corpus config: {e}")
    if backend_name:
        cfg.backend = backend_name
    if deterministic:
        cfg.deterministic = True
    if not cfg.corpus:
        raise click.ClickException(f"corpus config {corpus_path} declares no [[project]] entries")
    backend = _build_backend(cfg)
    out_root = Path(out)
    observations: list[metrics_mod.Observation] = []
    reports: list[metrics_mod.MetricsReport] = []
    language_by_project: dict[str, str] = {}
    failures = 0

    for i, entry in enumerate(cfg.corpus, 1):
        if "path" not in entry:
            raise click.ClickException(f"corpus entry #{i} ({entry.get('name', 'unnamed')}): missing 'path'")
        repo = Path(entry["path"])
        if not repo.is_dir():
            raise click.ClickException(f"corpus entry #{i} ({entry.get('name', repo)}): {repo} is not a directory")
        name = entry.get("name") or repo.name
        try:
            ir, _ = extract_project(repo, deterministic=cfg.deterministic)
        except OSError as e:
            raise click.ClickException(f"corpus entry #{i} ({name}): {e}")
        expected = set(entry.get("languages", []))
        if expected and expected != ir.languages:
            click.echo(f"warning: {name}: detected languages {sorted(ir.languages)} differ from expected {sorted(expected)}", err=True)
        ir = normalize(ir)
        ir.project_name = name
        language_by_project[name] = "+".join(sorted(ir.languages)) or "none"
        run_dir = out_root / name
        (run_dir).mkdir(parents=True, exist_ok=True)
        (run_dir / f"{name}.norm.ir.json").write_bytes(serialize(ir))

        for dt in DiagramType:
            type_dir = run_dir / dt.value
            if resume and (type_dir / "metrics.json").is_file():
                obs = _observation_from_dir(name, dt, type_dir, ir, cfg)
                if obs is not None:
                    rep = metrics_mod.compute_report(obs, cfg)
                    observations.append(obs)
                    reports.append(rep)
                continue
            try:
                pairs = _run_observation(ir, repo, run_dir, dt, cfg, backend, cfg.deterministic)
            except (OrchestrationError, IrreducibleViewError) as e:
                click.echo(f"{name}/{dt.value}: FAILED ({e})", err=True)
                failures += 1
                continue
            obs = metrics_mod.Observation(
                project_id=name,
                diagram_type=dt,
                ir_entity_names=ir.element_names(),
                diagrams=pairs,
                ir_entity_count=ir.element_count(),
            )
            rep = metrics_mod.compute_report(obs, cfg)
            observations.append(obs)
            reports.append(rep)
            (type_dir / "metrics.json").write_bytes(canonical_json(rep.to_json_obj()))

    if observations:
        for table_name, text in metrics_mod.batch_tables(observations, reports, language_by_project).items():
            (out_root / f"table_{table_name}.csv").write_text(text, encoding="utf-8")
        counts = metrics_mod.ablation_classify(observations)
        click.echo(
            f"{len(observations)} observation rows; ablation: {counts.no_correction} no-correction, "
            f"{counts.partially_corrected} partially-corrected, {counts.uncorrectable} uncorrectable"
        )
        click.echo(f"tables -> {out_root}")
    if failures:
        sys.exit(1)


if __name__ == "__main__":
    main()
