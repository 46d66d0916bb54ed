"""Run the shipped worked example offline and print what came out.

    python scripts/run_golden.py [--out DIR]

Replays fixtures/golden/transcript.jsonl, so no endpoint or key is needed.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from crewline.cli import EVENTS, REPORT, main as cli_main
from crewline.ingest import MoneyAmount, format_money

GOLDEN = Path(__file__).resolve().parent.parent / "fixtures" / "golden"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, help="keep outputs here instead of a temp dir")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        out = args.out or Path(tmp)
        code = cli_main(["run", "--config", str(GOLDEN / "run.toml"), "--out", str(out)])
        if code:
            return code
        for line in (out / EVENTS).read_text(encoding="utf-8").splitlines():
            e = json.loads(line)
            for link in e["links"]:
                fin = link["financial"] or {}
                turnover = fin.get("turnover")
                money = format_money(MoneyAmount.from_dict(turnover)) if turnover else "-"
                print(f"{e['event']['id']:10} {e['category']:12} {link['mention']:8} "
                      f"siren={link['siren']} turnover={money}")
        report = json.loads((out / REPORT).read_text(encoding="utf-8"))
        print(json.dumps({k: report[k] for k in ("month", "category_counts", "geo", "unlocated")}, ensure_ascii=False))
        if args.out:
            print(f"outputs in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
