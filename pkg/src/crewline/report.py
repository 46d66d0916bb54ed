"""Dashboard aggregates over classified events: monthly category counts,
regional density for a focus category, filtered event lists and the
companies behind them. Reports are written as static files.
"""

from __future__ import annotations

import calendar
import csv
import datetime as dt
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Literal, Sequence

from .retrieval import tokenize
from .stages import UNCATEGORIZED, EnrichedEvent, normalize_company_name

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Region:
    name: str
    aliases: tuple[str, ...] = ()

    def keys(self) -> list[str]:
        return [" ".join(tokenize(a)) for a in (self.name, *self.aliases) if tokenize(a)]


# Metropolitan French regions (2016 map) with English and pre-2016 names.
DEFAULT_GAZETTEER: tuple[Region, ...] = (
    Region("Auvergne-Rhône-Alpes", ("Auvergne", "Rhône-Alpes")),
    Region("Bourgogne-Franche-Comté", ("Bourgogne", "Burgundy", "Franche-Comté")),
    Region("Brittany", ("Bretagne", "Breizh")),
    Region("Centre-Val de Loire", ("Centre Val de Loire", "Région Centre")),
    Region("Corsica", ("Corse",)),
    Region("Grand Est", ("Alsace", "Lorraine", "Champagne-Ardenne")),
    Region("Hauts-de-France", ("Nord-Pas-de-Calais", "Picardie", "Picardy")),
    Region("Île-de-France", ("Paris Region",)),
    Region("Normandy", ("Normandie",)),
    Region("Nouvelle-Aquitaine", ("Aquitaine", "Limousin", "Poitou-Charentes")),
    Region("Occitanie", ("Occitania", "Languedoc-Roussillon", "Midi-Pyrénées")),
    Region("Pays de la Loire", ()),
    Region("Provence-Alpes-Côte-d'Azur", ("Provence-Alpes-Côte d'Azur", "PACA", "Provence", "Côte d'Azur")),
)


def load_gazetteer(path: str | Path) -> tuple[Region, ...]:
    """Read ``{"regions": [{"name": ..., "aliases": [...]}, ...]}``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return tuple(Region(r["name"], tuple(r.get("aliases", ()))) for r in data["regions"])


def _month_of(month: str) -> tuple[dt.date, dt.date]:
    year, mon = (int(p) for p in month.split("-"))
    return dt.date(year, mon, 1), dt.date(year, mon, calendar.monthrange(year, mon)[1])


def _category_name(e: EnrichedEvent) -> str:
    return e.category.name if e.category else UNCATEGORIZED


def category_counts(events: Iterable[EnrichedEvent], month: str) -> dict[str, int]:
    """Events per category for one ``YYYY-MM`` month."""
    start, end = _month_of(month)
    counts = Counter(_category_name(e) for e in events if start <= e.event.date <= end)
    return dict(sorted(counts.items()))


def resolve_region(location: str, gazetteer: Sequence[Region]) -> str | None:
    padded = f" {' '.join(tokenize(location))} "
    for region in gazetteer:
        if any(f" {key} " in padded for key in region.keys()):
            return region.name
    return None


def geo_density(
    events: Iterable[EnrichedEvent], category: str, gazetteer: Sequence[Region] = DEFAULT_GAZETTEER
) -> tuple[dict[str, int], int]:
    """Per-region counts of ``category`` events plus the number left unlocated.

    Each event counts once, under the first of its locations that resolves.
    """
    counts: Counter[str] = Counter()
    unlocated = 0
    for e in events:
        if _category_name(e) != category:
            continue
        region = next(
            (r for r in (resolve_region(loc, gazetteer) for loc in e.event.locations) if r), None
        )
        if region is None:
            unlocated += 1
        else:
            counts[region] += 1
    return dict(sorted(counts.items())), unlocated


def filter_events(
    events: Iterable[EnrichedEvent],
    category: str | None = None,
    start: dt.date | None = None,
    end: dt.date | None = None,
) -> list[EnrichedEvent]:
    if start and end and end < start:
        log.warning("empty date range", extra={"start": start.isoformat(), "end": end.isoformat()})
        return []
    return [
        e
        for e in events
        if (category is None or _category_name(e) == category)
        and (start is None or e.event.date >= start)
        and (end is None or e.event.date <= end)
    ]


@dataclass(frozen=True, order=True)
class CompanyRow:
    name: str
    siren: str | None
    count: int

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "siren": self.siren, "count": self.count}


def _company_keys(e: EnrichedEvent) -> dict[tuple[str, str], str]:
    found: dict[tuple[str, str], str] = {}
    if e.links:
        for link in e.links:
            if link.siren:
                found.setdefault(("siren", link.siren), link.profile.name)
            elif key := normalize_company_name(link.mention):
                found.setdefault(("name", key), link.mention)
    else:
        for mention in e.event.companies:
            if key := normalize_company_name(mention):
                found.setdefault(("name", key), mention)
    return found


def companies_for_category(events: Iterable[EnrichedEvent], category: str) -> list[CompanyRow]:
    """Companies behind ``category`` events, by event count then name."""
    counts: Counter[tuple[str, str]] = Counter()
    names: dict[tuple[str, str], str] = {}
    for e in events:
        if _category_name(e) != category:
            continue
        for key, name in _company_keys(e).items():
            counts[key] += 1
            names.setdefault(key, name)
    rows = [
        CompanyRow(names[key], key[1] if key[0] == "siren" else None, n) for key, n in counts.items()
    ]
    rows.sort(key=lambda r: (-r.count, r.name, r.siren or ""))
    return rows


@dataclass(frozen=True)
class Report:
    month: str | None
    focus_category: str
    category_counts: dict[str, int]
    geo: dict[str, int]
    unlocated: int
    focus_events: tuple[str, ...]
    companies: tuple[CompanyRow, ...]

    def __post_init__(self):
        if sum(self.geo.values()) + self.unlocated != len(self.focus_events):
            raise ValueError("geo counts plus unlocated must equal the focus event count")

    def to_dict(self) -> dict[str, Any]:
        return {
            "month": self.month,
            "focus_category": self.focus_category,
            "category_counts": dict(self.category_counts),
            "geo": dict(self.geo),
            "unlocated": self.unlocated,
            "focus_events": list(self.focus_events),
            "companies": [c.to_dict() for c in self.companies],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Report:
        return cls(
            month=d["month"],
            focus_category=d["focus_category"],
            category_counts=dict(d["category_counts"]),
            geo=dict(d["geo"]),
            unlocated=d["unlocated"],
            focus_events=tuple(d["focus_events"]),
            companies=tuple(CompanyRow(c["name"], c["siren"], c["count"]) for c in d["companies"]),
        )


def build_report(
    events: Sequence[EnrichedEvent],
    month: str | None = None,
    category: str | None = None,
    gazetteer: Sequence[Region] = DEFAULT_GAZETTEER,
) -> Report:
    """Aggregate one month of events around a focus category.

    Without ``month`` the latest month with events is used; without
    ``category`` the month's most frequent category (name order on ties).
    """
    if month is None and events:
        month = max(e.event.date for e in events).strftime("%Y-%m")
    if month is None:
        return Report(None, category or UNCATEGORIZED, {}, {}, 0, (), ())
    counts = category_counts(events, month)
    if category is None:
        category = min(counts, key=lambda c: (-counts[c], c)) if counts else UNCATEGORIZED
    start, end = _month_of(month)
    focus = filter_events(events, category, start, end)
    geo, unlocated = geo_density(focus, category, gazetteer)
    return Report(
        month=month,
        focus_category=category,
        category_counts=counts,
        geo=geo,
        unlocated=unlocated,
        focus_events=tuple(e.event.id for e in focus),
        companies=tuple(companies_for_category(focus, category)),
    )


# --------------------------------------------------------------------------
# rendering

Format = Literal["json", "csv_bundle", "markdown"]


def report_json(report: Report) -> str:
    return json.dumps(report.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def load_report(path: str | Path) -> Report:
    return Report.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _csv(header: list[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(["" if v is None else v for v in row] for row in rows)
    return buf.getvalue()


def _csv_bundle(report: Report) -> dict[str, str]:
    return {
        "summary.csv": _csv(
            ["month", "focus_category", "unlocated"], [[report.month, report.focus_category, report.unlocated]]
        ),
        "category_counts.csv": _csv(["category", "count"], sorted(report.category_counts.items())),
        "geo.csv": _csv(["region", "count"], sorted(report.geo.items())),
        "focus_events.csv": _csv(["event_id"], [[i] for i in report.focus_events]),
        "companies.csv": _csv(["name", "siren", "count"], [[c.name, c.siren, c.count] for c in report.companies]),
    }


def _md_table(header: list[str], rows: Iterable[Sequence[Any]]) -> str:
    def cell(v: Any) -> str:
        return ("" if v is None else str(v)).replace("|", "\\|")

    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(cell(v) for v in row) + " |" for row in rows]
    return "\n".join(lines)


def report_markdown(report: Report) -> str:
    focus = report.focus_category
    parts = [
        f"# Business events report: {report.month or 'no events'}",
        "## Events per category",
        _md_table(["Category", "Events"], sorted(report.category_counts.items())),
        f"## {focus} events per region",
        _md_table(["Region", "Events"], [*sorted(report.geo.items()), ("(unlocated)", report.unlocated)]),
        f"## {focus} events",
        _md_table(["Event id"], [[i] for i in report.focus_events]),
        f"## Companies behind {focus} events",
        _md_table(["Company", "SIREN", "Events"], [[c.name, c.siren, c.count] for c in report.companies]),
    ]
    return "\n\n".join(parts) + "\n"


def render_report(report: Report, fmt: Format, out_dir: str | Path) -> list[Path]:
    """Write ``report`` under ``out_dir``; returns the files written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        files = {"report.json": report_json(report)}
    elif fmt == "csv_bundle":
        files = _csv_bundle(report)
    elif fmt == "markdown":
        files = {"report.md": report_markdown(report)}
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    written = []
    for name, text in files.items():
        path = out / name
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        written.append(path)
    return written
