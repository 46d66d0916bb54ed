"""Loaders for the input corpora: dated news, company registry, financials,
consumer reviews and local HTML pages.

All loaders are pure functions of file contents.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from html import unescape
from html.parser import HTMLParser
from pathlib import Path
from typing import Any

from .errors import (
    BadRow,
    BadSiren,
    HeaderMismatch,
    IngestError,
    MalformedRecord,
    OrphanReview,
    UnparsableDate,
    UnparsableMoney,
)

CURRENCY = "EUR"


@dataclass(frozen=True, order=True)
class MoneyAmount:
    minor_units: int
    currency: str = CURRENCY

    def __post_init__(self):
        if not isinstance(self.minor_units, int) or isinstance(self.minor_units, bool):
            raise TypeError("minor_units must be an int")
        if self.minor_units < 0:
            raise ValueError("money amounts are non-negative")
        if self.currency != CURRENCY:
            raise ValueError(f"unsupported currency {self.currency!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"cents": self.minor_units, "currency": self.currency}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> MoneyAmount:
        return cls(int(d["cents"]), d.get("currency", CURRENCY))


@dataclass(frozen=True)
class NewsArticle:
    id: str
    date: dt.date
    body: str

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "date": self.date.isoformat(), "body": self.body}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> NewsArticle:
        return cls(d["id"], dt.date.fromisoformat(d["date"]), d["body"])


@dataclass(frozen=True)
class CompanyRecord:
    siren: str
    name: str
    hq_address: str
    phone: str | None = None
    employees: str | None = None

    def __post_init__(self):
        if not _SIREN.fullmatch(self.siren):
            raise ValueError(f"bad SIREN {self.siren!r}")
        if not self.name.strip():
            raise ValueError("company name is empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "siren": self.siren,
            "name": self.name,
            "hq_address": self.hq_address,
            "phone": self.phone,
            "employees": self.employees,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> CompanyRecord:
        return cls(d["siren"], d["name"], d["hq_address"], d.get("phone"), d.get("employees"))


@dataclass(frozen=True)
class FinancialRecord:
    company_name: str
    turnover: MoneyAmount | None
    fiscal_year: int

    def __post_init__(self):
        if not 1900 <= self.fiscal_year <= 2200:
            raise ValueError(f"fiscal year {self.fiscal_year} out of range")

    def to_dict(self) -> dict[str, Any]:
        return {
            "company_name": self.company_name,
            "turnover": self.turnover.to_dict() if self.turnover else None,
            "fiscal_year": self.fiscal_year,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> FinancialRecord:
        t = d.get("turnover")
        return cls(d["company_name"], MoneyAmount.from_dict(t) if t else None, int(d["fiscal_year"]))


@dataclass(frozen=True)
class ReviewRecord:
    company_name: str
    text: str

    def __post_init__(self):
        if not self.company_name.strip():
            raise ValueError("review without company name")
        if not self.text.strip():
            raise ValueError("empty review")

    def to_dict(self) -> dict[str, Any]:
        return {"company_name": self.company_name, "text": self.text}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ReviewRecord:
        return cls(d["company_name"], d["text"])


# --------------------------------------------------------------------------
# scalar parsers

_SIREN = re.compile(r"[0-9]{9}")
_ISO_DATE = re.compile(r"(\d{4})-(\d{2})-(\d{2})")
_SLASH_DATE = re.compile(r"(\d{1,2})/(\d{1,2})/(\d{4})")


def parse_date(text: str) -> dt.date:
    """Parse ``M/D/YYYY`` (month first, day-first fallback) or ISO ``YYYY-MM-DD``."""
    s = text.strip()
    if m := _ISO_DATE.fullmatch(s):
        try:
            return dt.date(int(m[1]), int(m[2]), int(m[3]))
        except ValueError:
            raise UnparsableDate(text) from None
    if m := _SLASH_DATE.fullmatch(s):
        a, b, year = int(m[1]), int(m[2]), int(m[3])
        for month, day in ((a, b), (b, a)):
            try:
                return dt.date(year, month, day)
            except ValueError:
                continue
    raise UnparsableDate(text)


_SPACES = str.maketrans({"\u00a0": " ", "\u202f": " ", "\u2009": " "})
_MONEY = re.compile(
    r"""
    (?:€|EUR)?\s*
    (?P<num>\d{1,3}(?P<sep>[, ])\d{3}(?:(?P=sep)\d{3})*(?:\.\d+)? | \d+(?:\.\d+)?)
    \s*(?P<scale>B|bn|[Bb]illions?|M|mn|[Mm]illions?|K|k|[Tt]housand)?
    \s*(?:€|EUR|[Ee]uros?)?
    """,
    re.VERBOSE,
)
_SCALES = {
    "b": 10**9, "bn": 10**9, "billion": 10**9, "billions": 10**9,
    "m": 10**6, "mn": 10**6, "million": 10**6, "millions": 10**6,
    "k": 10**3, "thousand": 10**3,
}


def parse_money(text: str | None) -> MoneyAmount | None:
    """Parse a euro amount such as ``€15.47 B`` or ``€17,569 M``.

    ``-`` and blank cells mean "no value" and return None.
    """
    if text is None:
        return None
    s = text.translate(_SPACES).strip()
    if s in ("", "-"):
        return None
    m = _MONEY.fullmatch(s)
    if not m:
        raise UnparsableMoney(text)
    digits = m["num"].replace(m["sep"], "") if m["sep"] else m["num"]
    try:
        value = Decimal(digits)
    except InvalidOperation:
        raise UnparsableMoney(text) from None
    scale = _SCALES[m["scale"].lower()] if m["scale"] else 1
    cents = value * scale * 100
    if cents != cents.to_integral_value():
        # sub-cent precision cannot be represented
        raise UnparsableMoney(text)
    return MoneyAmount(int(cents))


def format_money(amount: MoneyAmount) -> str:
    """Canonical rendering, e.g. ``€1,547,000,000,000.00``; re-parses exactly."""
    euros, cents = divmod(amount.minor_units, 100)
    return f"€{euros:,}.{cents:02d}"


# --------------------------------------------------------------------------
# news

_BLANK_SPLIT = re.compile(r"\n[ \t]*\n+")


def _read_text(path: str | Path) -> str:
    # OSError propagates as the IoError of the loaders
    with open(path, encoding="utf-8", newline="") as f:
        return f.read().replace("\r\n", "\n").replace("\r", "\n")


def parse_news(text: str, stem: str) -> list[NewsArticle]:
    articles = []
    blocks = [b for b in _BLANK_SPLIT.split(text.lstrip("\ufeff")) if b.strip()]
    for i, block in enumerate(blocks):
        head, sep, body = block.strip().partition(";")
        if not sep:
            raise MalformedRecord(i, "missing 'DATE;' header")
        try:
            date = parse_date(head)
        except UnparsableDate:
            raise MalformedRecord(i, f"bad date {head.strip()!r}") from None
        body = body.strip()
        if not body:
            raise MalformedRecord(i, "empty body")
        articles.append(NewsArticle(f"{stem}:{i}", date, body))
    return articles


def load_news(path: str | Path) -> list[NewsArticle]:
    """Load blank-line separated ``DATE; body`` records."""
    path = Path(path)
    try:
        return parse_news(_read_text(path), path.stem)
    except MalformedRecord as e:
        e.path = str(path)
        raise


def format_news(articles: list[NewsArticle]) -> str:
    return "".join(
        f"{a.date.isoformat()}; {a.body}\n" + ("\n" if i < len(articles) - 1 else "")
        for i, a in enumerate(articles)
    )


def dump_news(articles: list[NewsArticle], path: str | Path) -> None:
    Path(path).write_text(format_news(articles), encoding="utf-8")


# --------------------------------------------------------------------------
# tables

def _cell(value: str | None) -> str | None:
    if value is None:
        return None
    value = value.strip()
    return None if value in ("", "-") else value


def _read_table(path: str | Path, required: list[str]) -> list[dict[str, str]]:
    text = _read_text(path).lstrip("\ufeff")
    first = text.split("\n", 1)[0]
    delimiter = max(",;\t", key=first.count) if first else ","
    reader = csv.DictReader(io.StringIO(text), delimiter=delimiter)
    fields = [f.strip() for f in (reader.fieldnames or [])]
    missing = [c for c in required if c not in fields]
    if missing:
        raise HeaderMismatch(missing, str(path))
    reader.fieldnames = fields
    return [row for row in reader if any((v or "").strip() for v in row.values() if isinstance(v, str))]


def load_company_records(path: str | Path, errors: list[IngestError] | None = None) -> list[CompanyRecord]:
    """Load the SIREN-keyed registry table.

    When ``errors`` is given, bad rows are appended there and skipped instead
    of aborting the load.
    """
    out = []
    for i, row in enumerate(_read_table(path, ["siren", "name", "hq_address", "phone", "employees"])):
        try:
            siren = (row["siren"] or "").strip()
            if not _SIREN.fullmatch(siren):
                raise BadSiren(i, siren)
            name = _cell(row["name"])
            if not name:
                raise BadRow(i, "empty company name")
            out.append(
                CompanyRecord(
                    siren=siren,
                    name=name,
                    hq_address=_cell(row["hq_address"]) or "",
                    phone=_cell(row["phone"]),
                    employees=_cell(row["employees"]),
                )
            )
        except IngestError as e:
            if errors is None:
                raise
            errors.append(e)
    return out


def load_financial_records(path: str | Path, errors: list[IngestError] | None = None) -> list[FinancialRecord]:
    out = []
    for i, row in enumerate(_read_table(path, ["company_name", "turnover", "fiscal_year"])):
        try:
            name = _cell(row["company_name"])
            if not name:
                raise BadRow(i, "empty company name")
            year_text = (row["fiscal_year"] or "").strip()
            if not year_text.isdigit() or not 1900 <= int(year_text) <= 2200:
                raise BadRow(i, f"bad fiscal year {year_text!r}")
            out.append(FinancialRecord(name, parse_money(row["turnover"]), int(year_text)))
        except IngestError as e:
            if errors is None:
                raise
            errors.append(e)
    return out


def load_reviews(path: str | Path) -> list[ReviewRecord]:
    """Load reviews from a ``## Company`` / ``- review`` text file, or from a
    ``company_name,text`` CSV when the file has a .csv suffix."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return [
            ReviewRecord(row["company_name"].strip(), row["text"].strip())
            for row in _read_table(path, ["company_name", "text"])
            if _cell(row["text"])
        ]
    out: list[ReviewRecord] = []
    company: str | None = None
    pending: list[str] | None = None

    def flush():
        if pending is not None and company is not None:
            out.append(ReviewRecord(company, " ".join(pending)))

    for lineno, raw in enumerate(_read_text(path).lstrip("\ufeff").split("\n"), 1):
        line = raw.strip()
        if line.startswith("## "):
            flush()
            pending = None
            company = line[3:].strip()
            if not company:
                raise IngestError(f"line {lineno}: empty company heading")
        elif line.startswith(("- ", "* ")) or line in ("-", "*"):
            if company is None:
                raise OrphanReview(lineno)
            flush()
            pending = [line[2:].strip()] if line[2:].strip() else None
        elif line:
            if company is None:
                raise OrphanReview(lineno)
            if pending is not None:
                pending.append(line)  # wrapped continuation line
        else:
            flush()
            pending = None
    flush()
    return out


# --------------------------------------------------------------------------
# html

_BLOCK_TAGS = frozenset(
    "address article aside blockquote br dd div dl dt fieldset figcaption figure footer "
    "form h1 h2 h3 h4 h5 h6 header hr li main nav ol p pre section table tbody td tfoot "
    "th thead tr ul title body html head".split()
)
_SKIP_TAGS = frozenset({"script", "style", "noscript", "template"})


class _TextExtractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._skip = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip += 1
        elif tag in _BLOCK_TAGS:
            self.parts.append(" ")

    def handle_startendtag(self, tag, attrs):
        if tag in _BLOCK_TAGS:
            self.parts.append(" ")

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip = max(0, self._skip - 1)
        elif tag in _BLOCK_TAGS:
            self.parts.append(" ")

    def handle_data(self, data):
        if not self._skip:
            self.parts.append(data)


def html_to_text(html: str) -> str:
    parser = _TextExtractor()
    parser.feed(html)
    parser.close()
    text = unescape("".join(parser.parts))
    # stray angle brackets from broken markup are dropped as well
    text = text.replace("<", " ").replace(">", " ")
    return " ".join(text.split())


def load_html_text(path: str | Path) -> str:
    """Visible text of a local HTML file, whitespace collapsed."""
    return html_to_text(_read_text(path))
