#!/usr/bin/env python3
"""End-to-end demo on the bundled planted fixture.

Runs the full pipeline plus a 20-iteration shuffle baseline and prints the
genuine-vs-randomized comparison for the full and late proposal ranges.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from forkcast.cli import main as forkcast_main

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", type=str)
    parser.add_argument("--iterations", default=20, type=int)
    parser.add_argument("--seed", default=0, type=int)
    args = parser.parse_args()
    return forkcast_main([
        "all",
        "--dao", "planted",
        "--fixture", str(ROOT / "data" / "planted" / "votes.jsonl"),
        "--ground-truth", str(ROOT / "data" / "planted" / "forkers.txt"),
        "--ranges", "2-60,41-60",
        "--iterations", str(args.iterations),
        "--seed", str(args.seed),
        "--out", args.out,
    ])


if __name__ == "__main__":
    raise SystemExit(main())
