"""Command-line entry point.

Exit codes: 0 success, 1 pipeline failure, 2 configuration failure.
Every file a command writes lands under the output directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Iterable

from .config import RunConfig, load_config
from .errors import ConfigError, CrewlineError, PipelineError
from .ingest import (
    CompanyRecord,
    FinancialRecord,
    NewsArticle,
    ReviewRecord,
    load_company_records,
    load_financial_records,
    load_news,
    load_reviews,
)
from .llm import Gateway
from .report import DEFAULT_GAZETTEER, build_report, load_gazetteer, render_report
from .stages import (
    BusinessEvent,
    Corpus,
    EnrichedEvent,
    classify_events,
    crawl_events,
    dumps_canonical,
    enrich_events,
    run_pipeline_detailed,
)

log = logging.getLogger("crewline")

ARTICLES = "articles.jsonl"
COMPANIES = "companies.jsonl"
FINANCIALS = "financials.jsonl"
REVIEWS = "reviews.jsonl"
BUSINESS_EVENTS = "business_events.jsonl"
VALIDATION_REPORT = "validation-report.json"
ENRICHED = "enriched.jsonl"
EVENTS = "events.jsonl"
REPORT = "report.json"
LOG_FILE = "run.log.jsonl"
STATE = "state.json"

# files that chained stage commands and `run` must produce identically
CANONICAL_OUTPUTS = (
    ARTICLES, COMPANIES, FINANCIALS, REVIEWS, BUSINESS_EVENTS,
    VALIDATION_REPORT, ENRICHED, EVENTS, REPORT, STATE,
)

_RECORD_ATTRS = set(vars(logging.makeLogRecord({}))) | {"message", "asctime"}


class JsonLogFormatter(logging.Formatter):
    """One JSON object per line; ``extra`` fields are kept as keys."""

    def format(self, record: logging.LogRecord) -> str:
        entry: dict[str, Any] = {
            "ts": self.formatTime(record, "%Y-%m-%dT%H:%M:%S"),
            "level": record.levelname,
            "logger": record.name,
            "msg": record.getMessage(),
        }
        for k, v in sorted(vars(record).items()):
            if k not in _RECORD_ATTRS and not k.startswith("_"):
                entry[k] = v if isinstance(v, (str, int, float, bool, type(None))) else str(v)
        return json.dumps(entry, ensure_ascii=False)


def _setup_logging(out_dir: Path, verbose: bool) -> list[logging.Handler]:
    out_dir.mkdir(parents=True, exist_ok=True)
    handlers: list[logging.Handler] = [logging.FileHandler(out_dir / LOG_FILE, mode="a", encoding="utf-8")]
    if verbose:
        handlers.append(logging.StreamHandler(sys.stderr))
    for h in handlers:
        h.setFormatter(JsonLogFormatter())
        log.addHandler(h)
    log.setLevel(logging.DEBUG if verbose else logging.INFO)
    log.propagate = False
    return handlers


def _teardown_logging(handlers: list[logging.Handler]) -> None:
    for h in handlers:
        log.removeHandler(h)
        h.close()


# --------------------------------------------------------------------------
# file helpers

def _write_jsonl(path: Path, rows: Iterable[dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        for row in rows:
            f.write(dumps_canonical(row) + "\n")


def _read_jsonl(path: Path) -> list[dict[str, Any]]:
    if not path.is_file():
        raise ConfigError(f"stage input not found: {path} (run the previous stage first)")
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def _write_json(path: Path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n")


def _write_validation_report(out: Path, rejects: list[dict[str, Any]]) -> None:
    _write_json(out / VALIDATION_REPORT, {"dropped": sum(r["dropped"] for r in rejects), "entries": rejects})


def _write_state(out: Path, position: int) -> None:
    _write_json(out / STATE, {"transcript_position": position})


def _read_state(out: Path) -> int:
    path = out / STATE
    if not path.is_file():
        return 0
    return int(json.loads(path.read_text(encoding="utf-8"))["transcript_position"])


def load_corpus(cfg: RunConfig) -> Corpus:
    p = cfg.paths
    try:
        return Corpus(
            tuple(load_news(p.news)),
            tuple(load_company_records(p.companies)),
            tuple(load_financial_records(p.financials)),
            tuple(load_reviews(p.reviews)),
        )
    except OSError as e:
        raise ConfigError(f"cannot read {e.filename}: {e.strerror}") from None


def _write_corpus(out: Path, corpus: Corpus) -> None:
    _write_jsonl(out / ARTICLES, (a.to_dict() for a in corpus.articles))
    _write_jsonl(out / COMPANIES, (c.to_dict() for c in corpus.companies))
    _write_jsonl(out / FINANCIALS, (f.to_dict() for f in corpus.financials))
    _write_jsonl(out / REVIEWS, (r.to_dict() for r in corpus.reviews))


def _read_corpus(out: Path) -> Corpus:
    return Corpus(
        tuple(NewsArticle.from_dict(d) for d in _read_jsonl(out / ARTICLES)),
        tuple(CompanyRecord.from_dict(d) for d in _read_jsonl(out / COMPANIES)),
        tuple(FinancialRecord.from_dict(d) for d in _read_jsonl(out / FINANCIALS)),
        tuple(ReviewRecord.from_dict(d) for d in _read_jsonl(out / REVIEWS)),
    )


def _record_path(args: argparse.Namespace, out: Path) -> Path | None:
    if not getattr(args, "record", None):
        return None
    path = Path(args.record)
    return path if path.is_absolute() else out / path


def _gateway(cfg: RunConfig, args: argparse.Namespace, out: Path, start: int = 0, append: bool = False) -> Gateway:
    record = _record_path(args, out)
    if record is not None and cfg.llm.provider == "replay":
        raise ConfigError("--record needs a live provider (remote_chat or local_chat) in [llm]")
    try:
        return Gateway(cfg.llm, record_to=record, start=start, append=append)
    except OSError as e:
        raise ConfigError(f"cannot open transcript {e.filename}: {e.strerror}") from None


def _write_report(cfg: RunConfig | None, args: argparse.Namespace, out: Path, events: list[EnrichedEvent]) -> None:
    gazetteer = cfg.gazetteer() if cfg else DEFAULT_GAZETTEER
    if getattr(args, "gazetteer", None):
        gazetteer = load_gazetteer(args.gazetteer)
    month = args.month or (cfg.month if cfg else None)
    category = args.category or (cfg.category if cfg else None)
    report = build_report(events, month, category, gazetteer)
    render_report(report, {"json": "json", "csv": "csv_bundle", "markdown": "markdown"}[args.format], out)


# --------------------------------------------------------------------------
# commands

def _config(args: argparse.Namespace) -> RunConfig:
    return load_config(
        args.config,
        {"replay": getattr(args, "replay", None), "out": args.out,
         "month": getattr(args, "month", None), "category": getattr(args, "category", None)},
    )


def cmd_run(args: argparse.Namespace, cfg: RunConfig) -> None:
    out = cfg.out_dir
    corpus = load_corpus(cfg)
    _write_corpus(out, corpus)
    with _gateway(cfg, args, out) as gw:
        result = run_pipeline_detailed(corpus, gw, cfg.settings, cfg.tasks)
        position = gw.position
    _write_jsonl(out / BUSINESS_EVENTS, (e.to_dict() for e in result.business_events))
    _write_validation_report(out, result.rejects)
    _write_jsonl(out / ENRICHED, (e.to_dict() for e in result.enriched))
    _write_jsonl(out / EVENTS, (e.to_dict() for e in result.events))
    _write_report(cfg, args, out, result.events)
    _write_state(out, position)
    log.info("run finished", extra={"events": len(result.events), "dropped": len(result.rejects)})


def cmd_ingest(args: argparse.Namespace, cfg: RunConfig) -> None:
    corpus = load_corpus(cfg)
    _write_corpus(cfg.out_dir, corpus)
    log.info("ingested corpus", extra={"articles": len(corpus.articles), "companies": len(corpus.companies)})


def cmd_extract(args: argparse.Namespace, cfg: RunConfig) -> None:
    out = cfg.out_dir
    articles = [NewsArticle.from_dict(d) for d in _read_jsonl(out / ARTICLES)]
    rejects: list[dict[str, Any]] = []
    task = cfg.tasks[0]
    with _gateway(cfg, args, out) as gw:
        events = crawl_events(articles, gw, cfg.settings.batch_size, agent=task.agent, task=task, rejects=rejects)
        position = gw.position
    _write_jsonl(out / BUSINESS_EVENTS, (e.to_dict() for e in events))
    _write_validation_report(out, rejects)
    _write_state(out, position)
    log.info("extracted events", extra={"events": len(events), "dropped": len(rejects)})


def cmd_enrich(args: argparse.Namespace, cfg: RunConfig) -> None:
    out = cfg.out_dir
    events = [BusinessEvent.from_dict(d) for d in _read_jsonl(out / BUSINESS_EVENTS)]
    enriched = enrich_events(events, _read_corpus(out), cfg.settings)
    _write_jsonl(out / ENRICHED, (e.to_dict() for e in enriched))
    log.info("enriched events", extra={"events": len(enriched)})


def cmd_classify(args: argparse.Namespace, cfg: RunConfig) -> None:
    out = cfg.out_dir
    taxonomy = cfg.settings.taxonomy
    enriched = [EnrichedEvent.from_dict(d, taxonomy) for d in _read_jsonl(out / ENRICHED)]
    task = cfg.tasks[-1]
    replaying = cfg.llm.provider == "replay"
    # continue the transcript the extract stage started
    with _gateway(cfg, args, out, start=_read_state(out) if replaying else 0, append=not replaying) as gw:
        done = classify_events(enriched, taxonomy, gw, keywords=cfg.settings.keywords, agent=task.agent, task=task)
        position = gw.position
    _write_jsonl(out / EVENTS, (e.to_dict() for e in done))
    if replaying:
        _write_state(out, position)
    log.info("classified events", extra={"events": len(done)})


def cmd_report(args: argparse.Namespace, cfg: RunConfig | None) -> None:
    out = Path(args.out) if args.out else cfg.out_dir
    source = Path(args.events) if args.events else out / EVENTS
    taxonomy = cfg.settings.taxonomy if cfg else None
    rows = _read_jsonl(source)
    try:
        events = [EnrichedEvent.from_dict(d, taxonomy) for d in rows]
    except (KeyError, ValueError) as e:
        raise ConfigError(f"{source}: bad event record: {e}") from None
    _write_report(cfg, args, out, events)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crewline", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help: str, *, llm: bool = False, report: bool = False, config_required: bool = True):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", required=config_required, help="run configuration (TOML)")
        p.add_argument("--out", help="output directory (overrides [output].dir)")
        p.add_argument("--verbose", action="store_true", help="debug logging, echoed to stderr")
        if llm:
            p.add_argument("--replay", help="replay model responses from this transcript")
            p.add_argument("--record", help="record live responses to this transcript")
        if report:
            p.add_argument("--category", help="report focus category")
            p.add_argument("--month", help="report month, YYYY-MM")
            p.add_argument("--format", choices=("json", "csv", "markdown"), default="json")
        return p

    add("run", "run the whole pipeline and write the report", llm=True, report=True)
    add("ingest", "parse the input corpora into canonical JSON Lines")
    add("extract", "extract business events from ingested news", llm=True)
    add("enrich", "link and enrich extracted events")
    add("classify", "classify enriched events", llm=True)
    rep = add("report", "aggregate classified events into a report", report=True, config_required=False)
    rep.add_argument("--events", help="classified events file (default: <out>/events.jsonl)")
    rep.add_argument("--gazetteer", help="region gazetteer JSON")
    rec = add("record", "run live and record a replay transcript", report=True)
    rec.add_argument("--record", required=True, help="transcript to write")
    return parser


COMMANDS: dict[str, Callable[[argparse.Namespace, Any], None]] = {
    "run": cmd_run,
    "record": cmd_run,
    "ingest": cmd_ingest,
    "extract": cmd_extract,
    "enrich": cmd_enrich,
    "classify": cmd_classify,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    handlers: list[logging.Handler] = []
    try:
        if args.config:
            cfg = _config(args)
            out = cfg.out_dir
        elif args.out:
            cfg, out = None, Path(args.out)
        else:
            raise ConfigError("report needs --config or --out")
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"cannot create output directory {out}: {e.strerror}") from None
        handlers = _setup_logging(out, args.verbose)
        log.info("command started", extra={"command": args.command})
        COMMANDS[args.command](args, cfg)
        return 0
    except ConfigError as e:
        print(f"crewline: configuration error: {e}", file=sys.stderr)
        log.error("configuration error", extra={"error": str(e)})
        return 2
    except PipelineError as e:
        print(f"crewline: pipeline failed: {e}", file=sys.stderr)
        log.error("pipeline failed", extra={"error": str(e)})
        return 1
    except OSError as e:
        print(f"crewline: I/O error: {e}", file=sys.stderr)
        return 2
    except (CrewlineError, ValueError) as e:
        print(f"crewline: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    finally:
        _teardown_logging(handlers)


if __name__ == "__main__":
    sys.exit(main())
