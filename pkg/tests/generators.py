"""Seeded generators for randomized test inputs."""

from __future__ import annotations

import datetime as dt
import random
import string

from crewline.ingest import CompanyRecord
from crewline.stages import BusinessEvent, Category, CompanyLink, DEFAULT_TAXONOMY, EnrichedEvent

ACCENTS = {"E": "ÉÈÊ", "e": "éèë", "a": "àâä", "A": "ÀÂ", "o": "ôö", "i": "îï", "s": "ś"}
QUALIFIERS = ["(COURBEVOIE)", "(Montpellier)", "(35)", "(France)", "(groupe)"]
SUFFIXES = ["SA", "SAS", "SARL", "GmbH", "Inc.", "Ltd", "S.A."]


def one_edit(rng: random.Random, name: str) -> str:
    i = rng.randrange(len(name))
    letter = rng.choice(string.ascii_lowercase)
    op = rng.choice(["insert", "delete", "substitute"])
    if op == "insert":
        return name[:i] + letter + name[i:]
    if op == "delete" and len(name) > 1:
        return name[:i] + name[i + 1 :]
    return name[:i] + letter + name[i + 1 :]


def perturb(rng: random.Random, name: str) -> str:
    """Random mix of case change, accents, parenthetical, suffix and at most one edit."""
    s = name
    if rng.random() < 0.5:
        s = one_edit(rng, s)
    if rng.random() < 0.5:
        s = rng.choice([s.upper(), s.lower(), s.swapcase()])
    if rng.random() < 0.4:
        s = "".join(rng.choice(ACCENTS[c]) if c in ACCENTS and rng.random() < 0.5 else c for c in s)
    if rng.random() < 0.4:
        s = f"{s} {rng.choice(QUALIFIERS)}"
    if rng.random() < 0.4:
        s = f"{s} {rng.choice(SUFFIXES)}"
    return s


REGIONS = ["Brittany", "Bretagne", "PACA", "Occitanie", "Normandy", "Île-de-France", "Lyon", "Atlantis", ""]
NAMES = ["Enedis", "Tageos", "Thales", "Voltalia", "Neoen", "Akuo"]


def random_events(rng: random.Random, n: int, taxonomy=DEFAULT_TAXONOMY) -> list[EnrichedEvent]:
    out = []
    for i in range(n):
        companies = tuple(rng.sample(NAMES, rng.randint(1, 3)))
        locations = tuple(r for r in rng.sample(REGIONS, rng.randint(0, 3)) if r)
        date = dt.date(2023, rng.randint(1, 4), rng.randint(1, 28))
        event = BusinessEvent(f"a{i}:{i % 3}#0", f"a{i}", date, f"summary {i}", companies, (), locations)
        links = []
        for name in companies:
            if rng.random() < 0.7:
                siren = str(100000000 + NAMES.index(name))
                profile = CompanyRecord(siren, name, "addr", None, None)
                links.append(CompanyLink(name, siren, profile, None, (), 1.0))
            else:
                links.append(CompanyLink(name, None, None, None, (), 0.0))
        name = rng.choice(list(taxonomy) + ["Uncategorized", None])
        category = Category(name, tuple(taxonomy)) if name else None
        out.append(EnrichedEvent(event, tuple(links), category))
    return out
