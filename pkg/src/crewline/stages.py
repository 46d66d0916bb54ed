"""The three agents' work: extracting events from news, linking and enriching
the companies they mention, and classifying them into a closed taxonomy.

Enrichment is a deterministic join against the tabular sources; only
extraction and classification consult the language model.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import re
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .crew import Agent, Crew, Task, TaskRun, build_prompt, complete_json, run_crew
from .errors import ConfigError, GatewayError, JsonExtractionError, SchemaError, TaskFailed
from .ingest import (
    CompanyRecord,
    FinancialRecord,
    MoneyAmount,
    NewsArticle,
    ReviewRecord,
    parse_date,
    parse_money,
)
from .llm import Gateway
from .retrieval import Index, build_index, chunk, retrieve, tokenize

log = logging.getLogger(__name__)

UNCATEGORIZED = "Uncategorized"
DEFAULT_TAXONOMY: tuple[str, ...] = (
    "Urban Planning",
    "Renewable Energy",
    "Photovoltaic",
    "Fundraising",
    "Recruitment",
    "Acquisition",
    "Agrivoltaics",
    "Production",
    "Wind power",
    "Healthcare",
)
# token prefixes, matched against tokenize() output
DEFAULT_KEYWORDS: dict[str, tuple[str, ...]] = {
    "Urban Planning": ("urban", "urbanism", "housing", "infrastructure", "planning", "municipal", "district"),
    "Renewable Energy": ("renewable", "hydrogen", "biomass", "biogas", "geotherm", "hydroelectric"),
    "Photovoltaic": ("photovolta", "solar", "pv"),
    "Fundraising": ("fundrais", "raise", "raising", "funding", "investor", "venture", "seed"),
    "Recruitment": ("recruit", "hiring", "hire", "hires", "job", "jobs", "workforce", "vacanc"),
    "Acquisition": ("acqui", "takeover", "merger", "buyout"),
    "Agrivoltaics": ("agrivolta", "agrisolar"),
    "Production": ("production", "factory", "factories", "manufactur", "plant"),
    "Wind power": ("wind", "turbine", "offshore", "eolien"),
    "Healthcare": ("health", "hospital", "medical", "clinic", "pharma", "patient"),
}
DEFAULT_THRESHOLD = 0.90
DEFAULT_BATCH_SIZE = 5
DEFAULT_K = 3

EVENTS_CRAWLER = Agent(
    role="Events Crawler",
    goal="Load news data and extract business events with named entities.",
    backstory=(
        "Business news articles contain entities such as company names, individuals, "
        "contextual information, dates, and locations."
    ),
)
EVENTS_ENRICHMENT = Agent(
    role="Events Enrichment",
    goal="Utilize Financial data, Internal Company data, and Consumer reviews data.",
    backstory="Associating the entities identified in the news events with their corresponding data.",
)
EVENTS_EXPLORER = Agent(
    role="Events Explorer",
    goal="Display categorized business events.",
    backstory="Business events must be classified according to their topics.",
)
CRAWLER_TASK = Task("Gather events data", EVENTS_CRAWLER, "json_events")
ENRICHMENT_TASK = Task("Enrich the data", EVENTS_ENRICHMENT, "json_enriched")
EXPLORER_TASK = Task("Classify the events", EVENTS_EXPLORER, "json_classified")


# --------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class Category:
    name: str
    taxonomy: tuple[str, ...] = field(default=DEFAULT_TAXONOMY, compare=False, repr=False)

    def __post_init__(self):
        if self.name != UNCATEGORIZED and self.name not in self.taxonomy:
            raise ValueError(f"{self.name!r} is not in the taxonomy")


@dataclass(frozen=True)
class BusinessEvent:
    id: str
    article_id: str
    date: dt.date
    summary: str
    companies: tuple[str, ...]
    persons: tuple[str, ...] = ()
    locations: tuple[str, ...] = ()
    amounts: tuple[MoneyAmount, ...] = ()
    context: str = ""

    def __post_init__(self):
        if not self.companies:
            raise ValueError("an event needs at least one company")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "article_id": self.article_id,
            "date": self.date.isoformat(),
            "summary": self.summary,
            "companies": list(self.companies),
            "persons": list(self.persons),
            "locations": list(self.locations),
            "amounts": [a.to_dict() for a in self.amounts],
            "context": self.context,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> BusinessEvent:
        return cls(
            id=d["id"],
            article_id=d["article_id"],
            date=dt.date.fromisoformat(d["date"]),
            summary=d["summary"],
            companies=tuple(d["companies"]),
            persons=tuple(d.get("persons", ())),
            locations=tuple(d.get("locations", ())),
            amounts=tuple(MoneyAmount.from_dict(a) for a in d.get("amounts", ())),
            context=d.get("context", ""),
        )


@dataclass(frozen=True)
class CompanyLink:
    mention: str
    siren: str | None
    profile: CompanyRecord | None
    financial: FinancialRecord | None
    review_snippets: tuple[tuple[str, float], ...]
    match_score: float

    def __post_init__(self):
        if (self.siren is None) != (self.profile is None):
            raise ValueError("siren and profile must be both present or both absent")
        if not 0.0 <= self.match_score <= 1.0:
            raise ValueError("match_score must lie in [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "mention": self.mention,
            "siren": self.siren,
            "match_score": round(self.match_score, 12),
            "profile": self.profile.to_dict() if self.profile else None,
            "financial": self.financial.to_dict() if self.financial else None,
            "review_snippets": [{"text": t, "score": round(s, 9)} for t, s in self.review_snippets],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CompanyLink:
        return cls(
            mention=d["mention"],
            siren=d.get("siren"),
            profile=CompanyRecord.from_dict(d["profile"]) if d.get("profile") else None,
            financial=FinancialRecord.from_dict(d["financial"]) if d.get("financial") else None,
            review_snippets=tuple((s["text"], s["score"]) for s in d.get("review_snippets", ())),
            match_score=d["match_score"],
        )


@dataclass(frozen=True)
class EnrichedEvent:
    event: BusinessEvent
    links: tuple[CompanyLink, ...]
    category: Category | None = None

    def __post_init__(self):
        if len(self.links) > len(self.event.companies):
            raise ValueError("more links than company mentions")

    def to_dict(self) -> dict[str, Any]:
        return {
            "event": self.event.to_dict(),
            "links": [link.to_dict() for link in self.links],
            "category": self.category.name if self.category else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any], taxonomy: Sequence[str] | None = None) -> EnrichedEvent:
        name = d.get("category")
        category = None
        if name is not None:
            category = Category(name, tuple(taxonomy) if taxonomy is not None else DEFAULT_TAXONOMY)
        return cls(
            BusinessEvent.from_dict(d["event"]),
            tuple(CompanyLink.from_dict(x) for x in d.get("links", ())),
            category,
        )


def dumps_canonical(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


# --------------------------------------------------------------------------
# names and similarity

_LEGAL_SUFFIXES = frozenset({"SA", "SAS", "SARL", "GMBH", "INC", "LTD"})
_PARENS = re.compile(r"\([^()]*\)")


def _fold_upper(text: str) -> str:
    for _ in range(4):
        folded = "".join(
            c for c in unicodedata.normalize("NFKD", text.upper()) if not unicodedata.combining(c)
        )
        if folded == text:
            break
        text = folded
    return text


def normalize_company_name(text: str) -> str:
    """Matching key: uppercase, diacritics folded, parentheticals and trailing
    legal suffixes removed, whitespace collapsed."""
    s = _fold_upper(text)
    while True:
        stripped = _PARENS.sub(" ", s)
        if stripped == s:
            break
        s = stripped
    tokens = s.split()
    while tokens:
        last = tokens[-1].rstrip(",")
        if not last or last.strip(".").replace(".", "") in _LEGAL_SUFFIXES:
            tokens.pop()
        else:
            tokens[-1] = last
            break
    return " ".join(tokens)


def jaro(s1: str, s2: str) -> float:
    if s1 == s2:
        return 1.0
    n1, n2 = len(s1), len(s2)
    if not n1 or not n2:
        return 0.0
    window = max(max(n1, n2) // 2 - 1, 0)
    used = [False] * n2
    m1 = []
    for i, c in enumerate(s1):
        for j in range(max(0, i - window), min(n2, i + window + 1)):
            if not used[j] and s2[j] == c:
                used[j] = True
                m1.append(c)
                break
    m = len(m1)
    if not m:
        return 0.0
    m2 = [s2[j] for j in range(n2) if used[j]]
    transpositions = sum(a != b for a, b in zip(m1, m2)) / 2
    return (m / n1 + m / n2 + (m - transpositions) / m) / 3


def jaro_winkler(s1: str, s2: str, prefix_scale: float = 0.1) -> float:
    j = jaro(s1, s2)
    prefix = 0
    for a, b in zip(s1[:4], s2[:4]):
        if a != b:
            break
        prefix += 1
    return j + prefix * prefix_scale * (1 - j)


def link_entity(
    mention: str, companies: Sequence[CompanyRecord], threshold: float = DEFAULT_THRESHOLD
) -> tuple[CompanyRecord, float] | None:
    """Best registry record for a company mention, or None below ``threshold``.

    An exact key match scores 1.0 and beats every fuzzy candidate; ties go to
    the smallest SIREN.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must be in (0, 1]")
    key = normalize_company_name(mention)
    if not key:
        return None
    best: tuple[float, str, CompanyRecord] | None = None
    for rec in companies:
        other = normalize_company_name(rec.name)
        if not other:
            continue
        score = 1.0 if other == key else jaro_winkler(key, other)
        if best is None or (score, _neg(rec.siren)) > (best[0], _neg(best[1])):
            best = (score, rec.siren, rec)
    if best is None or best[0] < threshold:
        return None
    return best[2], best[0]


def _neg(siren: str) -> tuple[int, ...]:
    # larger for lexicographically smaller sirens
    return tuple(-ord(c) for c in siren)


# --------------------------------------------------------------------------
# enrichment

def build_review_index(reviews: Iterable[ReviewRecord], max_tokens: int = 256, overlap: int = 32) -> Index:
    """Index reviews one document per review; doc ids are ``<company key>#<n>``."""
    chunks = []
    for n, r in enumerate(reviews):
        chunks.extend(chunk(f"{normalize_company_name(r.company_name)}#{n}", r.text, max_tokens, overlap))
    return build_index(chunks)


def _financial_for(key: str, financials: Sequence[FinancialRecord]) -> FinancialRecord | None:
    if not key:
        return None
    found = [f for f in financials if normalize_company_name(f.company_name) == key]
    # most recent fiscal year, first listed on ties
    return max(found, key=lambda f: f.fiscal_year, default=None)


def _snippets(key: str, query: str, index: Index, k: int) -> tuple[tuple[str, float], ...]:
    if not key or not index.chunk_count:
        return ()
    hits = [h for h in retrieve(index, query, index.chunk_count) if h.ref[0].rsplit("#", 1)[0] == key]
    return tuple((index.texts[h.ref], h.score) for h in hits[:k])


def enrich_event(
    event: BusinessEvent,
    companies: Sequence[CompanyRecord],
    financials: Sequence[FinancialRecord],
    reviews_index: Index,
    k: int = DEFAULT_K,
    threshold: float = DEFAULT_THRESHOLD,
) -> EnrichedEvent:
    links = []
    for mention in event.companies:
        found = link_entity(mention, companies, threshold)
        if found:
            profile, score = found
            key = normalize_company_name(profile.name)
        else:
            profile, score = None, 0.0
            key = normalize_company_name(mention)
        links.append(
            CompanyLink(
                mention=mention,
                siren=profile.siren if profile else None,
                profile=profile,
                financial=_financial_for(key, financials),
                review_snippets=_snippets(key, f"{mention} {event.summary}", reviews_index, k),
                match_score=score,
            )
        )
    return EnrichedEvent(event, tuple(links))


# --------------------------------------------------------------------------
# extraction

def format_articles(articles: Sequence[NewsArticle]) -> str:
    return "\n\n".join(f"[article_id: {a.id}] [date: {a.date.isoformat()}]\n{a.body}" for a in articles)


def _strings(value: Any, name: str) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ValueError(f"{name} must be a list of strings")
    return tuple(v.strip() for v in value if v.strip())


def _amount(value: Any) -> MoneyAmount | None:
    if isinstance(value, dict):
        return MoneyAmount.from_dict(value)
    if isinstance(value, str):
        return parse_money(value)
    raise ValueError(f"unsupported amount {value!r}")


def _event_from_model(
    obj: dict[str, Any], articles: dict[str, NewsArticle], notes: list[str]
) -> tuple[NewsArticle, dict[str, Any]]:
    article_id = obj.get("article_id")
    if not isinstance(article_id, str) or article_id not in articles:
        raise ValueError(f"unknown article_id {article_id!r}")
    article = articles[article_id]
    companies = _strings(obj.get("companies"), "companies")
    if not companies:
        raise ValueError("no companies")
    summary = obj.get("summary")
    if not isinstance(summary, str) or not summary.strip():
        raise ValueError("missing summary")
    date_text = obj.get("date")
    date = parse_date(date_text) if date_text else article.date
    amounts = []
    raw_amounts = obj.get("amounts") or []
    if not isinstance(raw_amounts, list):
        raise ValueError("amounts must be a list")
    for raw in raw_amounts:
        try:
            amount = _amount(raw)
        except (ValueError, KeyError, TypeError):
            notes.append(f"ignored unparsable amount {raw!r}")
            continue
        if amount is not None:
            amounts.append(amount)
    context = obj.get("context") or ""
    if not isinstance(context, str):
        raise ValueError("context must be a string")
    return article, dict(
        date=date,
        summary=summary.strip(),
        companies=companies,
        persons=_strings(obj.get("persons"), "persons"),
        locations=_strings(obj.get("locations"), "locations"),
        amounts=tuple(amounts),
        context=context.strip(),
    )


def crawl_events(
    articles: Sequence[NewsArticle],
    gateway: Gateway,
    batch_size: int = DEFAULT_BATCH_SIZE,
    *,
    agent: Agent = EVENTS_CRAWLER,
    task: Task = CRAWLER_TASK,
    rejects: list[dict[str, Any]] | None = None,
    task_index: int = 0,
) -> list[BusinessEvent]:
    """Prompt the model with batches of articles and validate the events.

    Events naming an unknown article or no company are dropped and reported
    in ``rejects``. Ids are ``<article_id>#<n>`` in per-article order.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    if not articles:
        return []
    batches = [articles[i : i + batch_size] for i in range(0, len(articles), batch_size)]
    order = {a.id: n for n, a in enumerate(articles)}

    def run_batch(batch: Sequence[NewsArticle]) -> list[Any]:
        messages = build_prompt(agent, task, [("News articles", format_articles(batch))])
        _, value = complete_json(gateway, messages, "json_events")
        return value

    try:
        with ThreadPoolExecutor(max_workers=gateway.parallelism) as pool:
            replies = list(pool.map(run_batch, batches))
    except (GatewayError, JsonExtractionError, SchemaError) as e:
        raise TaskFailed(task_index, e) from e

    drafts: list[tuple[int, int, NewsArticle, dict[str, Any]]] = []
    seen: dict[str, int] = {}
    for b, (batch, reply) in enumerate(zip(batches, replies)):
        known = {a.id: a for a in batch}
        for pos, obj in enumerate(reply):
            notes: list[str] = []
            try:
                article, fields = _event_from_model(obj, known, notes)
            except ValueError as e:
                _reject(rejects, b, pos, obj, str(e))
                continue
            for note in notes:
                _reject(rejects, b, pos, obj, note, dropped=False)
            n = seen.get(article.id, 0)
            seen[article.id] = n + 1
            drafts.append((order[article.id], n, article, fields))
    drafts.sort(key=lambda d: (d[0], d[1]))
    return [
        BusinessEvent(id=f"{article.id}#{n}", article_id=article.id, **fields)
        for _, n, article, fields in drafts
    ]


def _reject(rejects, batch: int, position: int, obj: Any, reason: str, dropped: bool = True) -> None:
    entry = {
        "batch": batch,
        "position": position,
        "article_id": obj.get("article_id") if isinstance(obj, dict) else None,
        "dropped": dropped,
        "reason": reason,
    }
    log.warning("model event %s", "dropped" if dropped else "amended", extra=entry)
    if rejects is not None:
        rejects.append(entry)


# --------------------------------------------------------------------------
# classification

def _keywords_for(taxonomy: Sequence[str], keywords: dict[str, Sequence[str]] | None) -> dict[str, tuple[str, ...]]:
    table = DEFAULT_KEYWORDS if keywords is None else keywords
    return {
        name: tuple(tokenize(" ".join(table[name]))) if name in table else tuple(tokenize(name))
        for name in taxonomy
    }


def keyword_category(text: str, taxonomy: Sequence[str], keywords: dict[str, Sequence[str]] | None = None) -> str | None:
    """Category whose keyword prefixes hit most tokens; taxonomy order breaks ties."""
    tokens = tokenize(text)
    best, best_hits = None, 0
    for name, prefixes in _keywords_for(taxonomy, keywords).items():
        hits = sum(1 for t in tokens if any(t.startswith(p) for p in prefixes))
        if hits > best_hits:
            best, best_hits = name, hits
    return best


def _match_reply(reply: str, taxonomy: Sequence[str]) -> str | None:
    s = reply.strip().strip("\"'`*").rstrip(".").strip()
    if s in taxonomy:
        return s
    folded = {name.casefold(): name for name in taxonomy}
    return folded.get(s.casefold())


def classification_messages(enriched: EnrichedEvent, taxonomy: Sequence[str], agent: Agent, task: Task):
    ask = Task(
        f"{task.description}. Choose exactly one category from the list below and reply with its name only.",
        agent,
        "free_text",
    )
    e = enriched.event
    return build_prompt(
        agent,
        ask,
        [("Categories", "\n".join(taxonomy)), ("Event", f"{e.summary}\nContext: {e.context}")],
    )


def classify_event(
    enriched: EnrichedEvent,
    taxonomy: Sequence[str],
    gateway: Gateway,
    *,
    keywords: dict[str, Sequence[str]] | None = None,
    agent: Agent = EVENTS_EXPLORER,
    task: Task = EXPLORER_TASK,
) -> Category:
    if not taxonomy:
        raise ValueError("taxonomy must not be empty")
    taxonomy = tuple(taxonomy)
    reply = gateway.complete(classification_messages(enriched, taxonomy, agent, task))
    name = _match_reply(reply, taxonomy)
    if name is None:
        e = enriched.event
        name = keyword_category(f"{e.summary} {e.context}", taxonomy, keywords)
        log.info(
            "model reply outside taxonomy, keyword fallback",
            extra={"event": e.id, "reply": reply[:80], "fallback": name or UNCATEGORIZED},
        )
    return Category(name or UNCATEGORIZED, taxonomy)


def classify_events(
    events: Sequence[EnrichedEvent],
    taxonomy: Sequence[str],
    gateway: Gateway,
    **kwargs: Any,
) -> list[EnrichedEvent]:
    def one(e: EnrichedEvent) -> EnrichedEvent:
        return EnrichedEvent(e.event, e.links, classify_event(e, taxonomy, gateway, **kwargs))

    if not events:
        return []
    with ThreadPoolExecutor(max_workers=gateway.parallelism) as pool:
        return list(pool.map(one, events))


# --------------------------------------------------------------------------
# the pipeline

@dataclass(frozen=True)
class Corpus:
    articles: tuple[NewsArticle, ...]
    companies: tuple[CompanyRecord, ...]
    financials: tuple[FinancialRecord, ...]
    reviews: tuple[ReviewRecord, ...]


@dataclass(frozen=True)
class PipelineSettings:
    taxonomy: tuple[str, ...] = DEFAULT_TAXONOMY
    keywords: dict[str, tuple[str, ...]] | None = None
    batch_size: int = DEFAULT_BATCH_SIZE
    threshold: float = DEFAULT_THRESHOLD
    chunk_size: int = 256
    overlap: int = 32
    k: int = DEFAULT_K
    context_budget: int | None = None

    def __post_init__(self):
        if not self.taxonomy:
            raise ConfigError("taxonomy must not be empty")
        if not 0 < self.threshold <= 1:
            raise ConfigError("link threshold must be in (0, 1]")
        if self.batch_size < 1 or self.k < 1:
            raise ConfigError("batch_size and k must be positive")
        if self.chunk_size < 1 or not 0 <= self.overlap < self.chunk_size:
            raise ConfigError("need chunk_size >= 1 and 0 <= overlap < chunk_size")


@dataclass(frozen=True)
class PipelineRun:
    business_events: list[BusinessEvent]
    enriched: list[EnrichedEvent]
    events: list[EnrichedEvent]
    rejects: list[dict[str, Any]]


def enrich_events(events: Sequence[BusinessEvent], corpus: Corpus, settings: PipelineSettings) -> list[EnrichedEvent]:
    index = build_review_index(corpus.reviews, settings.chunk_size, settings.overlap)
    return [
        enrich_event(e, corpus.companies, corpus.financials, index, settings.k, settings.threshold)
        for e in events
    ]


def _previous_output(run: TaskRun) -> list[Any]:
    return json.loads(run.context[-1][1])


def pipeline_crew(
    corpus: Corpus,
    settings: PipelineSettings,
    rejects: list[dict[str, Any]],
    tasks: Sequence[Task] = (CRAWLER_TASK, ENRICHMENT_TASK, EXPLORER_TASK),
) -> Crew:
    """Bind the stage implementations to a three-task crew.

    Tasks are matched by output kind: json_events, json_enriched and
    json_classified, in that order.
    """
    kinds = [t.output_kind for t in tasks]
    if kinds != ["json_events", "json_enriched", "json_classified"]:
        raise ConfigError(f"pipeline crew needs json_events, json_enriched, json_classified tasks; got {kinds}")

    def crawl(run: TaskRun) -> str:
        events = crawl_events(
            corpus.articles, run.gateway, settings.batch_size,
            agent=run.agent, task=run.task, rejects=rejects, task_index=run.index,
        )
        return dumps_canonical([e.to_dict() for e in events])

    def enrich(run: TaskRun) -> str:
        events = [BusinessEvent.from_dict(d) for d in _previous_output(run)]
        return dumps_canonical([e.to_dict() for e in enrich_events(events, corpus, settings)])

    def classify(run: TaskRun) -> str:
        enriched = [EnrichedEvent.from_dict(d, settings.taxonomy) for d in _previous_output(run)]
        done = classify_events(
            enriched, settings.taxonomy, run.gateway,
            keywords=settings.keywords, agent=run.agent, task=run.task,
        )
        return dumps_canonical([e.to_dict() for e in done])

    runners: list[Callable[[TaskRun], str]] = [crawl, enrich, classify]
    bound = [Task(t.description, t.agent, t.output_kind, runner=r) for t, r in zip(tasks, runners)]
    agents = []
    for t in bound:
        if t.agent not in agents:
            agents.append(t.agent)
    return Crew(tuple(agents), tuple(bound))


def run_pipeline_detailed(
    corpus: Corpus,
    gateway: Gateway | None,
    settings: PipelineSettings = PipelineSettings(),
    tasks: Sequence[Task] = (CRAWLER_TASK, ENRICHMENT_TASK, EXPLORER_TASK),
) -> PipelineRun:
    rejects: list[dict[str, Any]] = []
    crew = pipeline_crew(corpus, settings, rejects, tasks)
    result = run_crew(crew, [], gateway, context_budget=settings.context_budget)
    business, enriched, classified = (r.value for r in result.per_task)
    return PipelineRun(
        business_events=[BusinessEvent.from_dict(d) for d in business],
        enriched=[EnrichedEvent.from_dict(d, settings.taxonomy) for d in enriched],
        events=[EnrichedEvent.from_dict(d, settings.taxonomy) for d in classified],
        rejects=rejects,
    )


def run_pipeline(
    corpus: Corpus,
    gateway: Gateway | None,
    settings: PipelineSettings = PipelineSettings(),
    tasks: Sequence[Task] = (CRAWLER_TASK, ENRICHMENT_TASK, EXPLORER_TASK),
) -> list[EnrichedEvent]:
    """Extract, enrich and classify through the three-agent sequential crew."""
    return run_pipeline_detailed(corpus, gateway, settings, tasks).events
