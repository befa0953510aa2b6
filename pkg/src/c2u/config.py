"""Run configuration: every tunable constant, with its default, in one table.

The config file is plain ``key = value`` text (TOML-like: ``#`` comments,
optional ``[section]`` headers that dot-prefix keys, comma lists). Only the
keys listed in DEFAULTS are accepted; everything validates against its
documented range at load time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

MIN_BUDGET_BYTES = 4096


@dataclass
class RunConfig:
    backend: str = "mock"
    concurrency_limit: int = 4
    deterministic: bool = False

    # compaction byte budgets (binary KB)
    budget_single: int = 60 * 1024
    budget_deep: int = 100 * 1024

    # importance weights
    weight_inheritance: float = 10.0
    weight_name: float = 15.0
    weight_call: float = 3.0

    # architectural name patterns scored by weight_name
    name_patterns: tuple[str, ...] = (
        "Service", "Controller", "Manager", "Orchestrator", "Handler",
        "Repository", "Model", "Agent", "Factory",
    )

    # prompt readability threshold (max elements a diagram should carry)
    readability_threshold: int = 40

    # analyzer / dependency context byte cap
    context_cap_bytes: int = 16 * 1024

    # density best-practice bands per diagram type (low, high)
    density_bands: dict[str, tuple[float, float]] = field(
        default_factory=lambda: {
            "class": (0.5, 1.5),
            "sequence": (2.0, 8.0),
            "activity": (0.8, 1.5),
            "component": (1.0, 3.0),
            "deployment": (0.5, 1.5),
            "usecase": (0.8, 1.5),
            "system_context": (0.7, 1.5),
        }
    )

    # placeholder element names the linter refuses to accept
    placeholder_names: tuple[str, ...] = ("Foo", "Bar", "TODO", "Placeholder", "Example")

    mock_scripts_dir: str | None = None
    output_root: str = "out"
    corpus: list[dict] = field(default_factory=list)

    def validate(self) -> None:
        if self.budget_single < MIN_BUDGET_BYTES or self.budget_deep < MIN_BUDGET_BYTES:
            raise ValueError(f"byte budgets must be >= {MIN_BUDGET_BYTES}")
        for w in (self.weight_inheritance, self.weight_name, self.weight_call):
            if w < 0:
                raise ValueError("importance weights must be >= 0")
        if self.concurrency_limit < 1:
            raise ValueError("concurrency_limit must be >= 1")
        if self.backend not in ("mock", "api"):
            raise ValueError(f"unknown backend {self.backend!r}")
        for dt, (lo, hi) in self.density_bands.items():
            if not (0 <= lo <= hi):
                raise ValueError(f"bad density band for {dt}: ({lo}, {hi})")


_SCALARS = {
    "backend": str,
    "concurrency_limit": int,
    "deterministic": bool,
    "budget_single": int,
    "budget_deep": int,
    "weight_inheritance": float,
    "weight_name": float,
    "weight_call": float,
    "readability_threshold": int,
    "context_cap_bytes": int,
    "mock_scripts_dir": str,
    "output_root": str,
}


def _coerce(key: str, raw: str, typ: type):
    raw = raw.strip().strip("\"'")
    if typ is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"{key}: expected true/false, got {raw!r}")
    try:
        return typ(raw)
    except ValueError as e:
        raise ValueError(f"{key}: {e}") from e


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Parse a key-value config file over defaults (or over ``base``)."""
    cfg = base or RunConfig()
    section = ""
    project_entry: dict | None = None
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[[") and stripped.endswith("]]"):
            name = stripped[2:-2].strip()
            if name != "project":
                raise ValueError(f"{path}:{lineno}: unknown list section [[{name}]]")
            project_entry = {}
            cfg.corpus.append(project_entry)
            section = ""
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            project_entry = None
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if project_entry is not None:
            if raw.startswith("[") and raw.endswith("]"):
                project_entry[key] = [v.strip().strip("\"'") for v in raw[1:-1].split(",") if v.strip()]
            else:
                project_entry[key] = raw.strip("\"'")
            continue
        full = f"{section}.{key}" if section else key
        if full.startswith("density."):
            dt = full.split(".", 1)[1]
            lo, _, hi = raw.partition(",")
            cfg.density_bands[dt] = (float(lo), float(hi))
        elif full == "name_patterns":
            cfg.name_patterns = tuple(v.strip().strip("\"'") for v in raw.strip("[]").split(",") if v.strip())
        elif full == "placeholder_names":
            cfg.placeholder_names = tuple(v.strip().strip("\"'") for v in raw.strip("[]").split(",") if v.strip())
        elif full in _SCALARS:
            setattr(cfg, full, _coerce(full, raw, _SCALARS[full]))
        else:
            known = ", ".join(sorted(_SCALARS) + ["density.<type>", "name_patterns", "placeholder_names", "[[project]]"])
            raise ValueError(f"{path}:{lineno}: unknown key {full!r} (known: {known})")
    cfg.validate()
    return cfg


def config_defaults_text() -> str:
    """The documented defaults, as a loadable config file."""
    cfg = RunConfig()
    lines = ["# c2u run configuration (defaults)"]
    for f in fields(RunConfig):
        if f.name in _SCALARS:
            lines.append(f"{f.name} = {getattr(cfg, f.name)}")
    lines.append(f"name_patterns = [{', '.join(cfg.name_patterns)}]")
    lines.append(f"placeholder_names = [{', '.join(cfg.placeholder_names)}]")
    lines.append("")
    lines.append("[density]")
    for dt, (lo, hi) in cfg.density_bands.items():
        lines.append(f"{dt} = {lo}, {hi}")
    return "\n".join(lines) + "\n"
