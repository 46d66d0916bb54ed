from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from crewline.cli import load_corpus
from crewline.config import load_config

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "fixtures" / "golden"
DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture
def golden_dir(tmp_path) -> Path:
    """A private copy of the golden fixture directory."""
    dest = tmp_path / "golden"
    shutil.copytree(GOLDEN, dest, ignore=shutil.ignore_patterns("out"))
    return dest


@pytest.fixture(scope="session")
def golden_config():
    return load_config(GOLDEN / "run.toml")


@pytest.fixture(scope="session")
def golden_corpus(golden_config):
    return load_corpus(golden_config)


# ---------------------------------------------------------------- acceptance lines

ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
