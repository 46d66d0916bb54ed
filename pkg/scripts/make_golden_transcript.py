"""Regenerate fixtures/golden/transcript.jsonl.

The pipeline runs in record mode against a scripted OpenAI-compatible
responder (no network), so the transcript fingerprints always match the
current prompt templates. ``--check`` exits 1 if the shipped file is stale.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

import httpx

from crewline.cli import load_corpus
from crewline.config import load_config
from crewline.llm import Gateway, LlmConfig
from crewline.stages import run_pipeline_detailed

GOLDEN = Path(__file__).resolve().parent.parent / "fixtures" / "golden"


def scripted_responder(responses: dict) -> httpx.MockTransport:
    def handle(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        system = body["messages"][0]["content"]
        if "Events Crawler" in system:
            payload = json.dumps(responses["events"], ensure_ascii=False, indent=2)
            text = f"{responses['crawler_preamble']}\n```json\n{payload}\n```"
        else:
            text = responses["category"]
        return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": text}}]})

    return httpx.MockTransport(handle)


def record(dest: Path) -> None:
    cfg = load_config(GOLDEN / "run.toml")
    responses = json.loads((GOLDEN / "responses.json").read_text(encoding="utf-8"))
    live = LlmConfig(provider="remote_chat", model=cfg.llm.model, base_url="http://golden.invalid")
    with Gateway(live, record_to=dest, transport=scripted_responder(responses)) as gw:
        run_pipeline_detailed(load_corpus(cfg), gw, cfg.settings, cfg.tasks)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    target = GOLDEN / "transcript.jsonl"
    if not args.check:
        record(target)
        print(f"wrote {target}")
        return 0
    with tempfile.TemporaryDirectory() as tmp:
        fresh = Path(tmp) / "transcript.jsonl"
        record(fresh)
        same = fresh.read_bytes() == target.read_bytes()
    print("transcript up to date" if same else "transcript is stale, rerun without --check")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
