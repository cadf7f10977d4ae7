#!/usr/bin/env python3
"""End-to-end demo: generate a synthetic trace corpus, extract per-cycle
records from it, and aggregate the analytics reports into ./demo_out."""

import argparse
import sys
from pathlib import Path

from mevforge.cli import main as mevforge_main


def run(argv: list[str]) -> None:
    code = mevforge_main(argv)
    if code != 0:
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--count", type=int, default=2000)
    parser.add_argument("--out", default="demo_out")
    args = parser.parse_args()

    out = Path(args.out)
    run(["gen-fixtures", "--kind", "traces", "--seed", str(args.seed), "--count", str(args.count), "--out", str(out / "fixtures")])
    run(
        [
            "extract",
            "--traces", str(out / "fixtures" / "traces.ndjson"),
            "--labels", str(out / "fixtures" / "labels.csv"),
            "--config", str(out / "fixtures" / "run.cfg"),
            "--out", str(out / "extracted"),
        ]
    )
    run(
        [
            "analyze",
            "--records", str(out / "extracted" / "records.csv"),
            "--config", str(out / "fixtures" / "run.cfg"),
            "--out", str(out / "reports"),
        ]
    )
    print(f"reports in {out / 'reports'}")


if __name__ == "__main__":
    main()
