"""Sequential agent crew: agents with role/goal/backstory, tasks bound to
agents, and forward passing of every task's output to later tasks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Literal

from .errors import CrewlineError, JsonExtractionError, SchemaError, TaskFailed
from .llm import ChatMessage, Gateway, LlmConfig, extract_json
from .retrieval import tokenize

log = logging.getLogger(__name__)

OutputKind = Literal["free_text", "json_events", "json_enriched", "json_classified"]
OUTPUT_KINDS = ("free_text", "json_events", "json_enriched", "json_classified")

FORMAT_INSTRUCTIONS: dict[str, str] = {
    "free_text": "Answer in plain text.",
    "json_events": (
        "Return only a JSON array. Each element is one business event object with the keys "
        '"article_id" (string, copied from the article header), "date" (YYYY-MM-DD), '
        '"summary" (string), "companies" (array of company names), "persons" (array), '
        '"locations" (array), "amounts" (array of money strings such as "€18.1 million") '
        'and "context" (short topic hint). Return [] when there is no event.'
    ),
    "json_enriched": "Return only a JSON array of the enriched event objects.",
    "json_classified": "Return only a JSON array of the classified event objects.",
}

REPROMPT_INSTRUCTION = "Your previous reply could not be used: {error}. Return only valid JSON."


@dataclass(frozen=True)
class Agent:
    role: str
    goal: str
    backstory: str
    llm: LlmConfig | None = None

    def __post_init__(self):
        for name in ("role", "goal", "backstory"):
            if not getattr(self, name).strip():
                raise ValueError(f"agent {name} must not be empty")


@dataclass
class TaskRun:
    """What a custom task runner gets to work with."""

    index: int
    agent: Agent
    task: Task
    context: list[tuple[str, str]]
    gateway: Gateway | None


@dataclass(frozen=True)
class Task:
    description: str
    agent: Agent
    output_kind: OutputKind = "free_text"
    # Replaces the single prompt/complete round trip; returns raw output text.
    runner: Callable[[TaskRun], str] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.description.strip():
            raise ValueError("task description must not be empty")
        if self.output_kind not in OUTPUT_KINDS:
            raise ValueError(f"unknown output kind {self.output_kind!r}")


@dataclass(frozen=True)
class Crew:
    agents: tuple[Agent, ...]
    tasks: tuple[Task, ...]
    process: Literal["sequential"] = "sequential"

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if self.process != "sequential":
            raise ValueError("only the sequential process is supported")
        for i, t in enumerate(self.tasks):
            if t.agent not in self.agents:
                raise ValueError(f"task {i} is bound to an agent outside the crew ({t.agent.role!r})")


@dataclass(frozen=True)
class TaskOutput:
    index: int
    raw: str
    value: Any


@dataclass(frozen=True)
class CrewResult:
    per_task: tuple[TaskOutput, ...]

    @property
    def final(self) -> Any:
        return self.per_task[-1].value if self.per_task else None


def _trim_context(context: list[tuple[str, str]], budget: int | None) -> list[tuple[str, str]]:
    if budget is None:
        return list(context)
    kept: list[tuple[str, str]] = []
    used = 0
    for label, text in reversed(context):
        n = len(tokenize(text))
        if used + n > budget:
            break  # everything older goes too
        kept.append((label, text))
        used += n
    dropped = len(context) - len(kept)
    if dropped:
        log.info("context over budget, dropped oldest blocks", extra={"dropped": dropped})
    return kept[::-1]


def build_prompt(
    agent: Agent,
    task: Task,
    context: list[tuple[str, str]] = (),
    *,
    context_budget: int | None = None,
) -> list[ChatMessage]:
    """System message from the agent persona, user message from the task.

    ``context_budget`` caps the context in tokens; the oldest blocks are
    dropped first and the task description is always kept.
    """
    system = (
        f"You are the {agent.role}.\n\n"
        f"## Role\n{agent.role}\n\n"
        f"## Goal\n{agent.goal}\n\n"
        f"## Backstory\n{agent.backstory}"
    )
    parts = [task.description]
    for label, text in _trim_context(list(context), context_budget):
        parts.append(f"### {label}\n{text}")
    parts.append(FORMAT_INSTRUCTIONS[task.output_kind])
    return [ChatMessage("system", system), ChatMessage("user", "\n\n".join(parts))]


def validate_output(kind: str, value: Any) -> Any:
    if kind != "free_text" and not isinstance(value, list):
        raise SchemaError(f"{kind} output must be a JSON array, got {type(value).__name__}")
    if kind != "free_text" and not all(isinstance(v, dict) for v in value):
        raise SchemaError(f"{kind} output must contain only objects")
    return value


def parse_output(kind: str, raw: str) -> Any:
    if kind == "free_text":
        return raw
    return validate_output(kind, extract_json(raw))


def reprompt_on_bad_json(
    gateway: Gateway, messages: list[ChatMessage], bad_output: str, error: Exception
) -> str:
    """One corrective turn after an unusable JSON reply; returns the new reply."""
    followup = list(messages) + [
        ChatMessage("assistant", bad_output),
        ChatMessage("user", REPROMPT_INSTRUCTION.format(error=error)),
    ]
    return gateway.complete(followup)


def complete_json(
    gateway: Gateway,
    messages: list[ChatMessage],
    kind: str,
    validate: Callable[[Any], Any] | None = None,
) -> tuple[str, Any]:
    """Complete and parse as ``kind``, with a single reprompt on failure.

    Raises the second parse error when the retry is unusable too.
    """
    def parse(raw: str) -> Any:
        value = parse_output(kind, raw)
        return validate(value) if validate else value

    raw = gateway.complete(messages)
    try:
        return raw, parse(raw)
    except (JsonExtractionError, SchemaError) as e:
        log.info("unusable JSON reply, reprompting", extra={"error": str(e)})
        raw = reprompt_on_bad_json(gateway, messages, raw, e)
        return raw, parse(raw)


def run_crew(
    crew: Crew,
    initial_context: list[tuple[str, str]] = (),
    gateway: Gateway | None = None,
    *,
    context_budget: int | None = None,
) -> CrewResult:
    """Run the tasks in order. Task i sees the initial context followed by the
    raw outputs of tasks 0..i-1, each labelled with its agent's role."""
    context = list(initial_context)
    outputs: list[TaskOutput] = []
    for i, task in enumerate(crew.tasks):
        log.info("task started", extra={"task": i, "agent": task.agent.role})
        try:
            if task.runner is not None:
                raw = task.runner(TaskRun(i, task.agent, task, list(context), gateway))
                value = parse_output(task.output_kind, raw)
            else:
                if gateway is None:
                    raise ValueError("no gateway configured for an LLM-backed task")
                messages = build_prompt(task.agent, task, context, context_budget=context_budget)
                raw, value = complete_json(gateway, messages, task.output_kind)
        except TaskFailed:
            raise
        except (CrewlineError, ValueError) as e:
            log.error("task failed", extra={"task": i, "error": f"{type(e).__name__}: {e}"})
            raise TaskFailed(i, e) from e
        outputs.append(TaskOutput(i, raw, value))
        context.append((task.agent.role, raw))
        log.info("task finished", extra={"task": i, "output_chars": len(raw)})
    return CrewResult(tuple(outputs))
