"""crewline: extract, enrich and classify business events from news with a
sequential crew of LLM agents and lexical retrieval over company data."""

from .crew import Agent, Crew, CrewResult, Task, build_prompt, run_crew
from .ingest import (
    CompanyRecord,
    FinancialRecord,
    MoneyAmount,
    NewsArticle,
    ReviewRecord,
    load_company_records,
    load_financial_records,
    load_html_text,
    load_news,
    load_reviews,
    parse_date,
    parse_money,
)
from .llm import ChatMessage, Gateway, LlmConfig, complete, extract_json
from .report import Report, build_report, render_report
from .retrieval import Chunk, Hit, Index, build_index, chunk, retrieve, tokenize
from .stages import (
    BusinessEvent,
    Category,
    CompanyLink,
    Corpus,
    EnrichedEvent,
    PipelineSettings,
    classify_event,
    crawl_events,
    enrich_event,
    link_entity,
    normalize_company_name,
    run_pipeline,
)

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "build_index",
    "build_prompt",
    "build_report",
    "BusinessEvent",
    "Category",
    "ChatMessage",
    "Chunk",
    "chunk",
    "classify_event",
    "CompanyLink",
    "CompanyRecord",
    "complete",
    "Corpus",
    "crawl_events",
    "Crew",
    "CrewResult",
    "enrich_event",
    "EnrichedEvent",
    "extract_json",
    "FinancialRecord",
    "Gateway",
    "Hit",
    "Index",
    "link_entity",
    "LlmConfig",
    "load_company_records",
    "load_financial_records",
    "load_html_text",
    "load_news",
    "load_reviews",
    "MoneyAmount",
    "NewsArticle",
    "normalize_company_name",
    "parse_date",
    "parse_money",
    "PipelineSettings",
    "render_report",
    "Report",
    "retrieve",
    "ReviewRecord",
    "run_crew",
    "run_pipeline",
    "Task",
    "tokenize",
]
