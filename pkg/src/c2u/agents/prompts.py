"""System prompt assembly from the versioned template files.

Diagram prompts are a shared base block (role, workflow, quality rules,
readability threshold) plus a type-specific extension. The corrector prompt
is assembled dynamically: the base rule set plus the rules that apply to
the diagram type being corrected.
"""

from __future__ import annotations

from importlib import resources

from c2u.config import RunConfig
from c2u.puml import RULES
from c2u.views import DiagramType

PROMPT_VERSION = "1"

_RULE_DESCRIPTIONS = {
    "R1": "ensure the mandatory @startuml/@enduml delimiters open and close the file",
    "R2": "balance braces; close unclosed blocks, drop dangling closers",
    "R3": "delete any `skinparam linetype ortho` line",
    "R4": "activity: the `continue` keyword is not PlantUML; remove such lines",
    "R5": "activity: the keyword is `elseif`, rewrite any `else if`",
    "R6": "deployment: the keyword `device` is invalid, rewrite it to `node`",
    "R7": "sequence: strip stereotypes and arrow fragments from participant declarations",
    "R8": "placeholder element names (Foo, Bar, TODO, Placeholder, Example) are uncorrectable; report them",
    "R9": "system context: C4 macro constructs (System(), Person(), Rel(), !include C4_*) and stereotyped container blocks are uncorrectable; report them",
}

_BASE_RULE_IDS = ("R1", "R2", "R3", "R8")


def _template(name: str) -> str:
    return (resources.files("c2u.agents") / "prompt_templates" / f"{name}.txt").read_text(encoding="utf-8")


def diagram_system_prompt(dt: DiagramType, config: RunConfig | None = None) -> str:
    config = config or RunConfig()
    base = _template("diagram_base").replace("{readability_threshold}", str(config.readability_threshold))
    return f"' prompt-version: {PROMPT_VERSION}\n{base}\n{_template(f'diagram_{dt.value}')}"


def planner_system_prompt() -> str:
    return f"' prompt-version: {PROMPT_VERSION}\n{_template('planner')}"


def analyzer_system_prompt() -> str:
    return f"' prompt-version: {PROMPT_VERSION}\n{_template('analyzer')}"


def dependency_system_prompt() -> str:
    return f"' prompt-version: {PROMPT_VERSION}\n{_template('dependency_analyzer')}"


def corrector_system_prompt(dt: DiagramType) -> str:
    base = _template("corrector_base")
    type_rules = [
        f"- {_RULE_DESCRIPTIONS[r.rule_id]}"
        for r in RULES
        if r.applies_to(dt) and r.rule_id not in _BASE_RULE_IDS
    ]
    extra = "\n# " + dt.value + " rules\n" + "\n".join(type_rules) + "\n" if type_rules else "\n"
    return f"' prompt-version: {PROMPT_VERSION}\n{base}{extra}"
