"""Run configuration loaded from TOML.

Relative paths are resolved against the config file's directory. Only the
``llm.api_key`` value may reference an environment variable (``${NAME}``).
"""

from __future__ import annotations

import os
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .crew import Agent, Task
from .errors import ConfigError
from .llm import LlmConfig
from .report import DEFAULT_GAZETTEER, Region, load_gazetteer
from .stages import CRAWLER_TASK, ENRICHMENT_TASK, EXPLORER_TASK, DEFAULT_TAXONOMY, PipelineSettings

_ENV_REF = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")
SECRET_KEYS = {("llm", "api_key")}


@dataclass(frozen=True)
class Paths:
    news: Path
    companies: Path
    financials: Path
    reviews: Path
    gazetteer: Path | None = None
    transcript: Path | None = None


@dataclass(frozen=True)
class RunConfig:
    paths: Paths
    llm: LlmConfig
    tasks: tuple[Task, ...] = (CRAWLER_TASK, ENRICHMENT_TASK, EXPLORER_TASK)
    settings: PipelineSettings = field(default_factory=PipelineSettings)
    out_dir: Path = Path("out")
    month: str | None = None
    category: str | None = None

    def gazetteer(self) -> tuple[Region, ...]:
        return load_gazetteer(self.paths.gazetteer) if self.paths.gazetteer else DEFAULT_GAZETTEER


def _check_env_refs(node: Any, where: tuple[str, ...] = ()) -> None:
    if isinstance(node, dict):
        for k, v in node.items():
            _check_env_refs(v, (*where, k))
    elif isinstance(node, list):
        for v in node:
            _check_env_refs(v, where)
    elif isinstance(node, str) and _ENV_REF.search(node) and where not in SECRET_KEYS:
        raise ConfigError(f"${{VAR}} interpolation is only allowed in llm.api_key, found in {'.'.join(where)}")


def _interpolate(value: str) -> str:
    def sub(m: re.Match) -> str:
        name = m.group(1)
        if name not in os.environ:
            raise ConfigError(f"environment variable {name} is not set")
        return os.environ[name]

    return _ENV_REF.sub(sub, value)


def _crew_tasks(section: dict[str, Any], llm: LlmConfig) -> tuple[Task, ...]:
    if not section:
        return (CRAWLER_TASK, ENRICHMENT_TASK, EXPLORER_TASK)
    if section.get("process", "sequential") != "sequential":
        raise ConfigError("only process = 'sequential' is supported")
    try:
        agents = {a["role"]: Agent(a["role"], a["goal"], a["backstory"], llm) for a in section["agents"]}
        tasks = []
        for t in section["tasks"]:
            if t["agent_role"] not in agents:
                raise ConfigError(f"task {t['description']!r} names unknown agent {t['agent_role']!r}")
            tasks.append(Task(t["description"], agents[t["agent_role"]], t.get("output_kind", "free_text")))
    except KeyError as e:
        raise ConfigError(f"crew definition is missing field {e}") from None
    except ValueError as e:
        raise ConfigError(f"bad crew definition: {e}") from None
    return tuple(tasks)


def load_config(path: str | Path, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Parse and validate a run config. ``overrides`` (from CLI flags) may set
    ``replay``, ``out``, ``month`` and ``category``."""
    path = Path(path)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    _check_env_refs(data)
    base = path.parent

    def resolve(p: str | os.PathLike | None) -> Path | None:
        return None if p is None else (base / p if not Path(p).is_absolute() else Path(p))

    p = data.get("paths", {})
    try:
        paths = Paths(
            news=resolve(p["news"]),
            companies=resolve(p["companies"]),
            financials=resolve(p["financials"]),
            reviews=resolve(p["reviews"]),
            gazetteer=resolve(p.get("gazetteer")),
            transcript=resolve(p.get("transcript")),
        )
    except KeyError as e:
        raise ConfigError(f"{path}: [paths] is missing {e}") from None
    if "replay" in overrides:
        paths = replace(paths, transcript=Path(overrides["replay"]))
    for name in ("news", "companies", "financials", "reviews", "gazetteer", "transcript"):
        f = getattr(paths, name)
        if f is not None and not f.is_file():
            raise ConfigError(f"{name} file not found: {f}")

    llm_section = dict(data.get("llm", {}))
    if "api_key" in llm_section:
        llm_section["api_key"] = _interpolate(llm_section["api_key"])
    if "replay" in overrides:
        llm_section["provider"] = "replay"
    if llm_section.get("provider", "replay") == "replay":
        llm_section["transcript"] = str(paths.transcript) if paths.transcript else None
    known = set(LlmConfig.__dataclass_fields__)
    unknown = set(llm_section) - known
    if unknown:
        raise ConfigError(f"unknown [llm] keys: {sorted(unknown)}")
    llm = LlmConfig(**llm_section)

    tax = data.get("taxonomy", {})
    retrieval = data.get("retrieval", {})
    keywords = tax.get("keywords")
    try:
        settings = PipelineSettings(
            taxonomy=tuple(tax.get("categories", DEFAULT_TAXONOMY)),
            keywords={k: tuple(v) for k, v in keywords.items()} if keywords else None,
            batch_size=int(data.get("extraction", {}).get("batch_size", 5)),
            threshold=float(data.get("linking", {}).get("threshold", 0.90)),
            chunk_size=int(retrieval.get("chunk_size", 256)),
            overlap=int(retrieval.get("overlap", 32)),
            k=int(retrieval.get("k", 3)),
            context_budget=data.get("crew", {}).get("context_budget"),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}: {e}") from None

    report = data.get("report", {})
    out_dir = Path(overrides["out"]) if "out" in overrides else resolve(data.get("output", {}).get("dir", "out"))
    cfg = RunConfig(
        paths=paths,
        llm=llm,
        tasks=_crew_tasks(data.get("crew", {}), llm),
        settings=settings,
        out_dir=out_dir,
        month=overrides.get("month", report.get("month")),
        category=overrides.get("category", report.get("category")),
    )
    if cfg.month is not None and not re.fullmatch(r"\d{4}-(0[1-9]|1[0-2])", cfg.month):
        raise ConfigError(f"month must look like YYYY-MM, got {cfg.month!r}")
    return cfg
