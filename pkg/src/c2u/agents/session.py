"""Agent session lifecycle: tool sandbox, hooks, event log, session driver.

A session binds one role to one backend exchange. The driver streams backend
events into normalized transcript records, executes tool calls against a
sandboxed filesystem view (reads confined to declared input roots, writes
confined to the run output directory), enforces the role's tool allow-list
absolutely (a disallowed call is recorded and rejected, never executed), and
fires lifecycle hooks before execution, after each message, and on error.
"""

from __future__ import annotations

import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from c2u.agents.backend import Backend, BackendRequest
from c2u.ir import canonical_json

ROLES = ("planner", "analyzer", "diagram", "corrector", "dependency_analyzer")

#: The corrector operates on a single known file and gets no discovery tools.
ROLE_TOOLS: dict[str, frozenset[str]] = {
    "planner": frozenset({"Read", "Write", "Glob", "Grep"}),
    "analyzer": frozenset({"Read", "Write", "Glob", "Grep"}),
    "diagram": frozenset({"Read", "Write", "Glob", "Grep"}),
    "corrector": frozenset({"Read", "Write"}),
    "dependency_analyzer": frozenset({"Read", "Write", "Glob", "Grep"}),
}

EVENT_KINDS = (
    "session_start",
    "message",
    "tool_call",
    "session_end",
    "correction_start",
    "correction_end",
    "error",
)


@dataclass
class SessionStats:
    duration_s: float = 0.0
    input_tokens: int = 0
    output_tokens: int = 0
    cost_estimate: float = 0.0


@dataclass
class RunEvent:
    timestamp: float
    kind: str
    session_id: str
    seq: int
    payload: dict[str, Any] = field(default_factory=dict)

    def to_json_obj(self, zero_timestamps: bool = False) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "payload": self.payload,
            "seq": self.seq,
            "session": self.session_id,
            "timestamp": 0.0 if zero_timestamps else round(self.timestamp, 6),
        }


class EventLog:
    """Append-only, thread-safe event sink; per-session seq gives each
    session a total order, and serialization sorts structurally so that
    deterministic runs emit byte-identical logs."""

    def __init__(self) -> None:
        self._events: list[RunEvent] = []
        self._seq: dict[str, int] = {}
        self._lock = threading.Lock()

    def emit(self, kind: str, session_id: str, payload: dict[str, Any] | None = None) -> RunEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._lock:
            seq = self._seq.get(session_id, 0)
            self._seq[session_id] = seq + 1
            ev = RunEvent(timestamp=time.time(), kind=kind, session_id=session_id, seq=seq, payload=payload or {})
            self._events.append(ev)
            return ev

    def events(self) -> list[RunEvent]:
        with self._lock:
            return list(self._events)

    def to_jsonl(self, deterministic: bool = False) -> str:
        evs = self.events()
        evs.sort(key=lambda e: (_session_sort_key(e.session_id), e.seq))
        lines = [canonical_json(e.to_json_obj(zero_timestamps=deterministic)).decode("utf-8") for e in evs]
        return "\n".join(lines) + ("\n" if lines else "")


def _session_sort_key(session_id: str) -> tuple:
    # "run" first, then planner, then scope-ordered pipelines, correctors last per scope
    role = session_id.split(":", 1)[0]
    scope = session_id.split(":", 1)[1] if ":" in session_id else ""
    role_rank = {"run": 0, "planner": 1, "analyzer": 2, "diagram": 3, "corrector": 4, "dependency_analyzer": 5}.get(role, 9)
    num = re.match(r"(\d+)", scope)
    return (int(num.group(1)) if num else -1, role_rank, session_id)


Hook = Callable[[str, dict[str, Any]], None]


class HookRegistry:
    """Callbacks for before_execution / after_message / on_error."""

    def __init__(self) -> None:
        self._hooks: dict[str, list[Hook]] = {"before_execution": [], "after_message": [], "on_error": []}

    def register(self, point: str, hook: Hook) -> None:
        self._hooks[point].append(hook)

    def fire(self, point: str, session_id: str, payload: dict[str, Any]) -> None:
        for hook in self._hooks.get(point, []):
            hook(session_id, payload)


class ToolSandboxError(Exception):
    pass


class ToolExecutor:
    """Read/Glob/Grep over declared input roots; Write under the output root."""

    GREP_LINE_CAP = 200

    def __init__(self, read_roots: list[Path], write_root: Path) -> None:
        self.read_roots = [Path(r).resolve() for r in read_roots]
        self.write_root = Path(write_root).resolve()

    def _resolve_readable(self, raw: str) -> Path:
        p = Path(raw)
        candidates = [p] if p.is_absolute() else [root / p for root in [*self.read_roots, self.write_root]]
        for cand in candidates:
            resolved = cand.resolve()
            for root in [*self.read_roots, self.write_root]:
                if resolved == root or root in resolved.parents:
                    if resolved.exists():
                        return resolved
        raise ToolSandboxError(f"path not readable inside the sandbox: {raw}")

    def _resolve_writable(self, raw: str) -> Path:
        p = Path(raw)
        resolved = (p if p.is_absolute() else self.write_root / p).resolve()
        if resolved != self.write_root and self.write_root not in resolved.parents:
            raise ToolSandboxError(f"write outside the output directory: {raw}")
        return resolved

    def execute(self, tool: str, args: dict[str, Any]) -> str:
        if tool == "Read":
            return self._resolve_readable(str(args.get("path", ""))).read_text(encoding="utf-8", errors="replace")
        if tool == "Write":
            target = self._resolve_writable(str(args.get("path", "")))
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(str(args.get("content", "")), encoding="utf-8")
            return f"wrote {target}"
        if tool == "Glob":
            pattern = str(args.get("pattern", "*"))
            hits: list[str] = []
            for root in self.read_roots:
                hits.extend(str(p) for p in root.glob(pattern) if p.is_file())
            return "\n".join(sorted(hits))
        if tool == "Grep":
            pattern = re.compile(str(args.get("pattern", "")))
            raw_path = args.get("path")
            targets: list[Path] = []
            if raw_path:
                targets = [self._resolve_readable(str(raw_path))]
            else:
                for root in self.read_roots:
                    targets.extend(p for p in sorted(root.rglob("*")) if p.is_file())
            out: list[str] = []
            for t in targets:
                try:
                    for i, line in enumerate(t.read_text(encoding="utf-8", errors="replace").splitlines(), 1):
                        if pattern.search(line):
                            out.append(f"{t}:{i}:{line.strip()}")
                            if len(out) >= self.GREP_LINE_CAP:
                                return "\n".join(out)
                except OSError:
                    continue
            return "\n".join(out)
        raise ToolSandboxError(f"unknown tool {tool!r}")


@dataclass
class AgentSession:
    role: str
    session_id: str
    system_prompt: str
    task_prompt: str
    allowed_tools: frozenset[str]
    transcript: list[dict[str, Any]] = field(default_factory=list)
    stats: SessionStats = field(default_factory=SessionStats)
    result_text: str = ""
    failed: bool = False


_MAX_STEPS = 8
_TOKEN_DIVISOR = 4
_COST_PER_MTOK_IN = 3.0
_COST_PER_MTOK_OUT = 15.0


def run_session(
    role: str,
    system_prompt: str,
    task_prompt: str,
    backend: Backend,
    executor: ToolExecutor,
    event_log: EventLog,
    session_id: str | None = None,
    hooks: HookRegistry | None = None,
    tools: frozenset[str] | None = None,
    deterministic: bool = False,
) -> AgentSession:
    """Drive one agent session to completion; never raises for backend or
    tool failures (the session is marked failed and the error hook fires)."""
    if role not in ROLE_TOOLS:
        raise ValueError(f"unknown role {role!r}")
    allowed = ROLE_TOOLS[role]
    if tools is not None and frozenset(tools) != allowed:
        raise ValueError(f"{role} sessions must use exactly {sorted(allowed)}")
    session_id = session_id or role
    hooks = hooks or HookRegistry()
    session = AgentSession(
        role=role, session_id=session_id, system_prompt=system_prompt,
        task_prompt=task_prompt, allowed_tools=allowed,
    )
    request = BackendRequest(role=role, system_prompt=system_prompt, task_prompt=task_prompt)

    hooks.fire("before_execution", session_id, {"role": role})
    event_log.emit("session_start", session_id, {"role": role})
    started = time.monotonic()
    out_chars = 0
    texts: list[str] = []
    done = False
    error_seen = False

    for _ in range(_MAX_STEPS):
        try:
            events = backend.step(request)
        except Exception as e:  # backend transport failure
            session.failed = True
            error_seen = True
            hooks.fire("on_error", session_id, {"error": str(e)})
            event_log.emit("error", session_id, {"error": str(e)})
            break
        step_had_tool_call = False
        for ev in events:
            delay = ev.get("delay")
            if delay:
                time.sleep(float(delay))
            kind = ev.get("type")
            if kind == "text":
                text = str(ev.get("text", ""))
                texts.append(text)
                out_chars += len(text)
                session.transcript.append({"type": "message", "text": text})
                hooks.fire("after_message", session_id, {"text": text})
                event_log.emit("message", session_id, {"chars": len(text)})
            elif kind == "tool_call":
                tool = str(ev.get("tool", ""))
                args = dict(ev.get("args", {}))
                step_had_tool_call = True
                if tool not in allowed:
                    session.transcript.append({"type": "tool_rejected", "tool": tool, "args": args})
                    event_log.emit("tool_call", session_id, {"tool": tool, "rejected": True})
                    request.tool_results.append({"tool": tool, "error": "tool not allowed for this role"})
                    continue
                try:
                    result = executor.execute(tool, args)
                    session.transcript.append({"type": "tool_call", "tool": tool, "args": args, "ok": True})
                    event_log.emit("tool_call", session_id, {"tool": tool, "rejected": False})
                    request.tool_results.append({"tool": tool, "result": result[:4000]})
                    out_chars += len(str(args))
                except (ToolSandboxError, OSError) as e:
                    session.transcript.append({"type": "tool_call", "tool": tool, "args": args, "ok": False, "error": str(e)})
                    event_log.emit("tool_call", session_id, {"tool": tool, "rejected": False, "failed": True})
                    request.tool_results.append({"tool": tool, "error": str(e)})
            elif kind == "error":
                session.failed = True
                error_seen = True
                message = str(ev.get("message", "backend error"))
                hooks.fire("on_error", session_id, {"error": message})
                event_log.emit("error", session_id, {"error": message})
            elif kind == "done":
                done = True
        if done or error_seen or not step_had_tool_call:
            break

    session.result_text = "\n".join(t for t in texts if t)
    duration = 0.0 if deterministic else time.monotonic() - started
    in_tokens = (len(system_prompt) + len(task_prompt)) // _TOKEN_DIVISOR
    out_tokens = max(out_chars // _TOKEN_DIVISOR, 1)
    session.stats = SessionStats(
        duration_s=round(duration, 6),
        input_tokens=in_tokens,
        output_tokens=out_tokens,
        cost_estimate=round((in_tokens * _COST_PER_MTOK_IN + out_tokens * _COST_PER_MTOK_OUT) / 1_000_000, 9),
    )
    event_log.emit(
        "session_end",
        session_id,
        {
            "role": role,
            "failed": session.failed,
            "stats": {
                "duration_s": session.stats.duration_s,
                "input_tokens": session.stats.input_tokens,
                "output_tokens": session.stats.output_tokens,
                "cost_estimate": session.stats.cost_estimate,
            },
        },
    )
    return session
