#!/usr/bin/env python3
"""Run the bundled duopoly scenario under both market designs and print
who wins, plus the coordination-window arithmetic behind the outcome."""

import argparse
from fractions import Fraction
from pathlib import Path

from mevforge import pbs
from mevforge.reports import decimal_str

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--slots", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    for name in ("bsc_duopoly.json", "eth_duopoly.json"):
        scenario = pbs.load_scenario(SCENARIOS / name)
        result = pbs.run_campaign(scenario, args.slots, args.seed)
        print(f"\n== {name} ({scenario.protocol.value}, horizon {scenario.proposer.horizon_ms} ms)")
        print(f"{'builder':<10} {'wins':>8} {'win_share':>10} {'profit':>16} {'proposer_rev':>14}")
        for row in result.summary.builders:
            print(
                f"{row.builder_id:<10} {row.wins:>8} {decimal_str(row.win_share, 4):>10} "
                f"{row.profit:>16} {row.proposer_revenue:>14}"
            )
        print(f"fallback rate: {decimal_str(result.summary.fallback_rate, 6)}")

    print("\n== coordination windows")
    for protocol, horizon in ((pbs.Protocol.BSC_DIRECT, 3000), (pbs.Protocol.ETH_RELAY, 12000)):
        window = pbs.contestable_window(protocol, Fraction(horizon), Fraction(100))
        print(f"{protocol.value:<12} horizon {horizon:>6} ms  contestable {window} ms")
    print(f"missing horizon: {pbs.missing_horizon(Fraction(12000), Fraction(3000))} ms")


if __name__ == "__main__":
    main()
