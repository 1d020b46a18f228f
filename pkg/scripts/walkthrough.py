#!/usr/bin/env python3
"""Replay every committed trace fixture and print its full timeline.

Usage: python scripts/walkthrough.py [fixture-dir]
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from hidec import dsl
from hidec.cli import render_replay_transcript

PAIRS = [
    ("flat_basic.dpm", "flat_basic.dpt"),
    ("nested_basic.dpm", "nested_basic_full.dpt"),
    ("nested_basic.dpm", "nested_basic_merged.dpt"),
    ("paper_flat.dpm", "paper_flat.dpt"),
]


def main() -> int:
    root = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else (
        pathlib.Path(__file__).resolve().parent.parent / "fixtures"
    )
    failures = 0
    for model_name, trace_name in PAIRS:
        doc = dsl.load_model(str(root / model_name))
        steps = dsl.load_trace(str(root / trace_name))
        text, verdict = render_replay_transcript(doc, steps)
        print(f"##### {model_name} + {trace_name}")
        print(text)
        if not verdict.accepted:
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
