"""Model backend interface and its two implementations.

The wire protocol is a stateless request/response step: the caller sends
{role, system_prompt, task_prompt, tool_results so far} and receives a list
of events, each one of

    {"type": "text", "text": ...}
    {"type": "tool_call", "tool": ..., "args": {...}}
    {"type": "error", "message": ...}
    {"type": "done"}

(an optional "delay" field on any event sleeps before it is delivered; the
mock uses it to exercise concurrency timing). The session driver executes
tool calls between steps and feeds results back in the next request.

MockBackend resolves a response script per request, in precedence order:
programmatic overrides (tests), ``<role>__<fingerprint>.json`` in the
scripts directory, ``<role>__default.json``, then a built-in default that
makes every role productive out of the box. The fingerprint is the first
12 hex chars of sha256(task_prompt).

ApiBackend posts the same request shape as JSON to a remote endpoint,
authenticated with the C2U_API_KEY environment variable.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Protocol

from c2u.views import DiagramType


@dataclass
class BackendRequest:
    role: str
    system_prompt: str
    task_prompt: str
    tool_results: list[dict[str, Any]] = field(default_factory=list)

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "role": self.role,
            "system_prompt": self.system_prompt,
            "task_prompt": self.task_prompt,
            "tool_results": self.tool_results,
        }


class Backend(Protocol):
    def step(self, request: BackendRequest) -> list[dict[str, Any]]: ...


def fingerprint(task_prompt: str) -> str:
    return hashlib.sha256(task_prompt.encode("utf-8")).hexdigest()[:12]


def _task_field(task_prompt: str, label: str) -> str | None:
    for line in task_prompt.splitlines():
        if line.startswith(label + ":"):
            return line.split(":", 1)[1].strip()
    return None


MOCK_TEMPLATES: dict[DiagramType, str] = {
    DiagramType.CLASS: """@startuml
class CoreEngine {
  +start()
  +shutdown()
}
class RequestRouter {
  +route()
}
interface StoragePort {
  +save()
}
class FileStore
CoreEngine --> RequestRouter : dispatches
RequestRouter ..> StoragePort : uses
FileStore ..|> StoragePort
CoreEngine *-- FileStore : owns
@enduml
""",
    DiagramType.SEQUENCE: """@startuml
participant ApiGateway
participant AuthService
participant UserStore
activate ApiGateway
ApiGateway -> AuthService : validate(token)
AuthService -> UserStore : lookup(userId)
UserStore --> AuthService : record
AuthService --> ApiGateway : result
@enduml
""",
    DiagramType.ACTIVITY: """@startuml
start
:receive request;
if (valid input?) then (yes)
  :process payload;
  :store result;
else (no)
  :reject request;
endif
:send response;
stop
@enduml
""",
    DiagramType.USECASE: """@startuml
actor Operator
actor Auditor
usecase "Manage Inventory" as ManageInventory
usecase "Review Reports" as ReviewReports
Operator --> ManageInventory : performs
Operator --> ReviewReports : requests
Auditor --> ReviewReports : reviews
ManageInventory ..> ReviewReports : includes
@enduml
""",
    DiagramType.COMPONENT: """@startuml
[WebFrontend]
[ApiGateway]
[OrderService]
[InventoryStore]
WebFrontend --> ApiGateway : https
ApiGateway --> OrderService : rpc
OrderService --> InventoryStore : sql
OrderService ..> ApiGateway : events
@enduml
""",
    DiagramType.DEPLOYMENT: """@startuml
node ApplicationServer {
  artifact ServiceBundle
}
node DatabaseServer {
  artifact DataVolume
}
cloud ObjectStorage
ApplicationServer --> DatabaseServer : jdbc
ApplicationServer --> ObjectStorage : s3
DatabaseServer --> DataVolume : mounts
@enduml
""",
    DiagramType.SYSTEM_CONTEXT: """@startuml
actor EndUser
rectangle OrderPlatform <<System>>
rectangle PaymentProvider <<External>>
rectangle EmailGateway <<External>>
EndUser --> OrderPlatform : places orders
OrderPlatform --> PaymentProvider : charges
OrderPlatform --> EmailGateway : notifies
@enduml
""",
}

_DEFAULT_PLAN = {
    "scopes": [
        {"label": "core", "files": [], "rationale": "central orchestration and domain logic"},
        {"label": "services", "files": [], "rationale": "service and integration layer"},
        {"label": "workflows", "files": [], "rationale": "request and data flows"},
    ]
}


def _builtin_script(request: BackendRequest) -> list[dict[str, Any]]:
    role = request.role
    if role == "planner":
        return [{"type": "text", "text": json.dumps(_DEFAULT_PLAN)}, {"type": "done"}]
    if role == "analyzer":
        scope = _task_field(request.task_prompt, "Scope") or "scope"
        ctx = {
            "participants": [],
            "interaction_flows": [f"summary of {scope}: no source files were designated"],
            "relationships": [],
            "source_files": [],
        }
        return [{"type": "text", "text": json.dumps(ctx)}, {"type": "done"}]
    if role == "diagram":
        out_path = _task_field(request.task_prompt, "Output file")
        dt_name = _task_field(request.task_prompt, "Diagram type") or "class"
        try:
            dt = DiagramType(dt_name)
        except ValueError:
            dt = DiagramType.CLASS
        events: list[dict[str, Any]] = []
        if out_path:
            events.append({"type": "tool_call", "tool": "Write", "args": {"path": out_path, "content": MOCK_TEMPLATES[dt]}})
        events.append({"type": "text", "text": "diagram written"})
        events.append({"type": "done"})
        return events
    if role == "corrector":
        return [{"type": "text", "text": "no changes required"}, {"type": "done"}]
    if role == "dependency_analyzer":
        return [{"type": "text", "text": "dependency summary recorded"}, {"type": "done"}]
    return [{"type": "text", "text": ""}, {"type": "done"}]


ScriptFn = Callable[[BackendRequest], list[dict[str, Any]]]


class MockBackend:
    """Deterministic scripted backend; see module docstring for resolution order."""

    def __init__(
        self,
        scripts_dir: str | Path | None = None,
        overrides: dict[str, ScriptFn | list[dict[str, Any]]] | None = None,
    ) -> None:
        self.scripts_dir = Path(scripts_dir) if scripts_dir else None
        self.overrides = dict(overrides or {})

    def step(self, request: BackendRequest) -> list[dict[str, Any]]:
        fp = fingerprint(request.task_prompt)
        for key in (f"{request.role}__{fp}", request.role):
            if key in self.overrides:
                script = self.overrides[key]
                return script(request) if callable(script) else [dict(e) for e in script]
        if self.scripts_dir is not None:
            for name in (f"{request.role}__{fp}.json", f"{request.role}__default.json"):
                path = self.scripts_dir / name
                if path.is_file():
                    return json.loads(path.read_text(encoding="utf-8"))
        return _builtin_script(request)


class ApiBackend:
    """Thin JSON-over-HTTP client for a remote model service."""

    def __init__(self, endpoint: str | None = None, api_key: str | None = None, timeout: float = 120.0) -> None:
        self.endpoint = endpoint or os.environ.get("C2U_API_ENDPOINT", "")
        self.api_key = api_key if api_key is not None else os.environ.get("C2U_API_KEY", "")
        self.timeout = timeout
        if not self.api_key:
            raise RuntimeError("C2U_API_KEY is not set; the api backend needs credentials")
        if not self.endpoint:
            raise RuntimeError("C2U_API_ENDPOINT is not set; the api backend needs an endpoint URL")

    def step(self, request: BackendRequest) -> list[dict[str, Any]]:
        body = json.dumps(request.to_json_obj()).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint,
            data=body,
            headers={"Content-Type": "application/json", "Authorization": f"Bearer {self.api_key}"},
            method="POST",
        )
        started = time.monotonic()
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            payload = json.loads(resp.read().decode("utf-8"))
        if not isinstance(payload, list):
            raise RuntimeError(f"backend returned non-list payload after {time.monotonic() - started:.1f}s")
        return payload
