"""Agent sessions, backends, prompts, and the diagram orchestrator."""

from c2u.agents.backend import ApiBackend, BackendRequest, MockBackend, fingerprint
from c2u.agents.orchestrator import (
    DiagramPlan,
    EnrichedContext,
    OrchestrationError,
    ProjectRun,
    Scope,
    analyze,
    analyze_dependencies,
    correct,
    generate_diagram,
    orchestrate,
    plan,
    scope_band,
)
from c2u.agents.session import (
    ROLE_TOOLS,
    AgentSession,
    EventLog,
    HookRegistry,
    RunEvent,
    SessionStats,
    ToolExecutor,
    run_session,
)

__all__ = [
    "ApiBackend",
    "BackendRequest",
    "MockBackend",
    "fingerprint",
    "DiagramPlan",
    "EnrichedContext",
    "OrchestrationError",
    "ProjectRun",
    "Scope",
    "analyze",
    "analyze_dependencies",
    "correct",
    "generate_diagram",
    "orchestrate",
    "plan",
    "scope_band",
    "ROLE_TOOLS",
    "AgentSession",
    "EventLog",
    "HookRegistry",
    "RunEvent",
    "SessionStats",
    "ToolExecutor",
    "run_session",
]
