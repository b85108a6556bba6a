#!/usr/bin/env python3
"""Regenerate the bundled planted-partition fixture under data/planted/.

The fixture is deterministic (seed 0), so re-running this script must leave
the tree unchanged.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from forkcast import planted_two_bloc_events
from forkcast.ingest import write_fixture


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=Path(__file__).resolve().parent.parent
                        / "data" / "planted", type=Path)
    parser.add_argument("--seed", default=0, type=int)
    args = parser.parse_args()

    events, truth = planted_two_bloc_events(seed=args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    write_fixture(events, args.out / "votes.jsonl")
    with open(args.out / "forkers.txt", "w", encoding="utf-8", newline="\n") as handle:
        handle.write("# minority-bloc addresses (the planted fork cohort)\n")
        for address in sorted(truth.addresses):
            handle.write(address + "\n")
    print(f"wrote {len(events)} events and {len(truth.addresses)} fork "
          f"addresses to {args.out}")


if __name__ == "__main__":
    main()
