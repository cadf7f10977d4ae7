"""Command-line surface: extract, analyze, simulate, gen-fixtures.

All randomness flows from --seed; outputs are deterministic byte streams,
so rerunning a command over the same inputs rewrites identical files.
Exit status is nonzero iff an error row or a config error was produced.
Set MEVFORGE_LOG to control verbosity (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import analytics, fixtures, pbs, pools, records, reports
from .arbitrage import (
    MissingPriceError,
    attribute_profit,
    extract_arbitrage_cycle,
    to_usd,
)
from .config import BLOCK_INTERVAL_S, ConfigFileError, RunConfig, load_config
from .traces import (
    LabelSet,
    ParseStats,
    TokenId,
    TraceParseError,
    format_hash,
    iter_transactions,
    mark_pool_sinks,
    serialize_transactions,
)

log = logging.getLogger("mevforge")


def _setup_logging() -> None:
    level = os.environ.get("MEVFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# extract


def cmd_extract(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else RunConfig()
    out = _out_dir(args.out)
    with open(args.labels, encoding="utf-8") as fh:
        labels = LabelSet.from_csv(fh)

    stats = ParseStats()
    skipped = 0
    emitted = 0
    errors: list[tuple[str, str]] = []

    def produce(errors_rows):
        nonlocal skipped, emitted
        with open(args.traces, encoding="utf-8") as fh:
            for tx in iter_transactions(fh, stats):
                if config.infer_pool_sinks:
                    tx = mark_pool_sinks(tx)
                cycle = extract_arbitrage_cycle(tx)
                if cycle is None:
                    skipped += 1
                    continue
                label = labels.lookup(tx.initiator)
                brand = label.brand if label else "Unknown"
                try:
                    breakdown = attribute_profit(tx, cycle, config.share_addresses, config.price_table)
                    usd = to_usd(breakdown, config.price_table)
                except MissingPriceError as exc:
                    errors_rows.append((format_hash(tx.hash), str(exc)))
                    continue
                record = records.ArbitrageRecord(
                    tx_hash=tx.hash,
                    block_number=tx.block_number,
                    builder_brand=brand,
                    base_token=cycle.base_token.symbol,
                    hop_count=cycle.hop_count,
                    gross=breakdown.gross,
                    share=breakdown.share,
                    gas=breakdown.gas_in_base_units,
                    net=breakdown.net,
                    usd_value=usd,
                    timestamp_utc=records.timestamp_for_block(tx.block_number, config.genesis_unix, BLOCK_INTERVAL_S),
                )
                emitted += 1
                yield record

    try:
        with open(out / "records.csv", "w", encoding="utf-8", newline="") as fh:
            records.write_records(fh, produce(errors))
    except TraceParseError as exc:
        print(f"error: {args.traces}: {exc}", file=sys.stderr)
        return 1

    if errors:
        with open(out / "errors.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("tx_hash,error\n")
            for tx_hash, message in errors:
                fh.write(f"{tx_hash},{message}\n")
    else:
        (out / "errors.csv").unlink(missing_ok=True)
    log.info("extract: %d records, %d non-cycles skipped, %d unknown events", emitted, skipped, stats.unknown_events)
    print(f"records={emitted} skipped={skipped} unknown_events={stats.unknown_events} errors={len(errors)}")
    return 1 if errors else 0


# ---------------------------------------------------------------------------
# analyze


def _daily_series(rows: list[records.ArbitrageRecord]) -> dict[str, list[Fraction]]:
    """Daily UTC profit and activity series per builder, dense over the
    observed date range."""
    by_key: dict[tuple[str, str], dict[str, Fraction]] = {}
    dates: set[str] = set()
    for row in rows:
        day = row.timestamp_utc[:10]
        dates.add(day)
        usd = by_key.setdefault(("usd", row.builder_brand), {})
        usd[day] = usd.get(day, Fraction(0)) + row.usd_value
        count = by_key.setdefault(("txs", row.builder_brand), {})
        count[day] = count.get(day, Fraction(0)) + 1
    ordered = sorted(dates)
    return {
        f"{metric}_{brand}": [per_day.get(day, Fraction(0)) for day in ordered]
        for (metric, brand), per_day in sorted(by_key.items())
    }


def cmd_analyze(args: argparse.Namespace) -> int:
    config = load_config(args.config) if args.config else RunConfig()
    out = _out_dir(args.out)
    try:
        with open(args.records, encoding="utf-8") as fh:
            rows = records.read_records(fh)
    except records.RecordSchemaError as exc:
        print(f"error: {args.records}: {exc}", file=sys.stderr)
        return 1

    # market share from distinct blocks per brand
    blocks_by_brand: dict[str, set[int]] = {}
    for row in rows:
        blocks_by_brand.setdefault(row.builder_brand, set()).add(row.block_number)
    if blocks_by_brand:
        table = analytics.market_share({b: len(s) for b, s in blocks_by_brand.items()})
        reports.write_text(out / "shares.csv", lambda fh: reports.write_share_table(fh, table))
    else:
        reports.write_text(out / "shares.csv", lambda fh: fh.write("brand,blocks,validators,share_pct\n"))

    matrix: dict[tuple[str, str], Fraction] = {}
    for row in rows:
        key = (row.builder_brand, row.base_token)
        matrix[key] = matrix.get(key, Fraction(0)) + row.usd_value
    reports.write_text(out / "profit_matrix.csv", lambda fh: reports.write_profit_matrix(fh, matrix))

    # proposer split in USD, converting base-unit share/net per token
    paid: dict[str, Fraction] = {}
    kept: dict[str, Fraction] = {}
    missing_prices: set[str] = set()
    for row in rows:
        price = config.price_table.get(row.base_token)
        if price is None:
            missing_prices.add(row.base_token)
            continue
        scale = price / 10 ** config.decimals.get(row.base_token, 18)
        paid[row.builder_brand] = paid.get(row.builder_brand, Fraction(0)) + row.share * scale
        kept[row.builder_brand] = kept.get(row.builder_brand, Fraction(0)) + row.net * scale
    splits = {}
    for brand in sorted(set(paid) | set(kept)):
        p, n = paid.get(brand, Fraction(0)), kept.get(brand, Fraction(0))
        fraction = p / (p + n) if (p + n) != 0 else Fraction(0)
        splits[brand] = analytics.ProposerSplit(kept_usd=n, paid_usd=p, payout_fraction=fraction)
    reports.write_text(out / "proposer_split.csv", lambda fh: reports.write_proposer_split(fh, splits))

    complexity = analytics.path_complexity(row.hop_count for row in rows)
    with open(out / "complexity_hist.csv", "w", encoding="utf-8", newline="") as hist_fh, open(
        out / "complexity_ecdf.csv", "w", encoding="utf-8", newline=""
    ) as ecdf_fh:
        reports.write_complexity(hist_fh, ecdf_fh, complexity)

    correlations: list[tuple[str, float | None]] = []
    for brand in sorted({row.builder_brand for row in rows}):
        points = [
            (row.hop_count, row.usd_value / row.hop_count) for row in rows if row.builder_brand == brand
        ]
        try:
            correlations.append((brand, analytics.pathlen_profit_correlation(points)))
        except analytics.UndefinedCorrelationError:
            correlations.append((brand, None))
    reports.write_text(out / "correlations.csv", lambda fh: reports.write_correlations(fh, correlations))

    trends: dict[str, analytics.TrendResult] = {}
    for name, series in _daily_series(rows).items():
        try:
            trends[name] = analytics.mann_kendall(series, config.alpha)
        except analytics.InsufficientDataError:
            continue
    reports.write_text(out / "trends.csv", lambda fh: reports.write_trends(fh, trends))

    scores = []
    seen_tokens = sorted({row.base_token for row in rows})
    placeholder = bytes(20)
    for symbol in seen_tokens:
        bits = config.risk_bits.get(symbol)
        if bits is None:
            continue
        token = TokenId(symbol, placeholder, config.decimals.get(symbol, 18))
        scores.append(analytics.risk_score(token, *bits))
    reports.write_text(out / "risk_scores.csv", lambda fh: reports.write_risk_scores(fh, scores))

    if missing_prices:
        print(f"error: no price for {','.join(sorted(missing_prices))}", file=sys.stderr)
        return 1
    print(f"analyzed={len(rows)} brands={len(blocks_by_brand)} reports={out}")
    return 0


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args: argparse.Namespace) -> int:
    out = _out_dir(args.out)
    try:
        scenario = pbs.load_scenario(args.scenario)
        result = pbs.run_campaign(scenario, args.slots, args.seed)
    except pbs.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    reports.write_text(out / "slots.csv", lambda fh: reports.write_slot_log(fh, result.outcomes))
    reports.write_text(out / "summary.csv", lambda fh: reports.write_campaign_summary(fh, result.summary))
    top = max(result.summary.builders, key=lambda b: b.wins, default=None)
    top_text = f"{top.builder_id}:{top.wins}" if top else "-"
    print(f"slots={args.slots} top={top_text} fallback_rate={reports.decimal_str(result.summary.fallback_rate, 6)}")
    return 0


# ---------------------------------------------------------------------------
# gen-fixtures


def _write_manifest(out: Path, manifest: dict) -> None:
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


DUOPOLY_BUILDERS = [
    {"id": "alpha", "latency_ms": 20, "strategy": "short_hop", "share_ratio_bp": 2500, "infra_tier": 1.0, "non_delivery_prob": 0.0},
    {"id": "beta", "latency_ms": 120, "strategy": "mixed", "share_ratio_bp": 2500, "infra_tier": 3.0, "non_delivery_prob": 0.0},
]


def duopoly_scenario(protocol: str) -> dict:
    return {
        "protocol": protocol,
        "horizon_ms": 3000 if protocol == "bsc_direct" else 12000,
        "listen_window_ms": 50,
        "base_compute_ms": 10,
        "builders": DUOPOLY_BUILDERS,
        "opportunity": {
            "decay": "piecewise",
            "peak_value": 10**9,
            "gas_floor": 1000,
            "knee_ms": 100,
            "deadline_ms": 200,
            "birth_ms": 0,
            "tail_value": 0,
        },
        "proposers": {"count": 5, "rotation": "round_robin", "blacklist_slots": 100},
        "relay": {"delay_ms": 0, "rebid_interval_ms": 500, "optimization_rounds": 8, "rebids_enabled": True},
        "pools": None,
    }


def cmd_gen_fixtures(args: argparse.Namespace) -> int:
    out = _out_dir(args.out)
    if args.kind == "traces":
        corpus = fixtures.gen_trace_corpus(args.seed, args.count or 1000)
        with open(out / "traces.ndjson", "w", encoding="utf-8") as fh:
            fh.write(serialize_transactions(corpus.transactions))
        with open(out / "labels.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("brand,instance,address\n")
            for label in corpus.labels:
                fh.write(f"{label.brand},{label.instance_name},0x{label.address.hex()}\n")
        with open(out / "run.cfg", "w", encoding="utf-8") as fh:
            fh.write("# prices for the generated token universe (majors use defaults)\n")
            for symbol in corpus.manifest["tokens"]:
                if symbol not in RunConfig().price_table:
                    fh.write(f"price_table.{symbol} = 1\n")
        _write_manifest(out, corpus.manifest)
    elif args.kind == "pools":
        fixture = fixtures.gen_pool_fixture(args.seed)
        with open(out / "pools.ndjson", "w", encoding="utf-8") as fh:
            fh.write(pools.dump_pool_file(fixture.pools))
        _write_manifest(out, fixture.manifest)
    elif args.kind == "records":
        rows = fixtures.gen_record_rows(args.seed, args.count or 500)
        import random as _random

        rng = _random.Random(args.seed ^ 0x5EED)
        recs = []
        config = RunConfig()
        for row in rows:
            symbol = row["base_token"]
            price = config.price_table[symbol]
            decimals = config.decimals[symbol]
            recs.append(
                records.ArbitrageRecord(
                    tx_hash=rng.getrandbits(256).to_bytes(32, "big"),
                    block_number=row["block_number"],
                    builder_brand=row["builder_brand"],
                    base_token=symbol,
                    hop_count=row["hop_count"],
                    gross=row["gross"] * 10**decimals,
                    share=row["share"] * 10**decimals,
                    gas=0,
                    net=(row["gross"] - row["share"]) * 10**decimals,
                    usd_value=(row["gross"] - row["share"]) * price,
                    timestamp_utc=records.timestamp_for_block(row["block_number"], 1_748_649_600, BLOCK_INTERVAL_S),
                )
            )
        with open(out / "records.csv", "w", encoding="utf-8", newline="") as fh:
            records.write_records(fh, recs)
        _write_manifest(out, {"kind": "records", "seed": args.seed, "rows": len(recs)})
    elif args.kind == "scenario":
        for protocol in ("bsc_direct", "eth_relay"):
            name = "bsc_duopoly.json" if protocol == "bsc_direct" else "eth_duopoly.json"
            with open(out / name, "w", encoding="utf-8") as fh:
                json.dump(duopoly_scenario(protocol), fh, indent=2)
                fh.write("\n")
        _write_manifest(out, {"kind": "scenario", "seed": args.seed, "files": ["bsc_duopoly.json", "eth_duopoly.json"]})
    else:  # pragma: no cover - argparse restricts choices
        print(f"error: unknown fixture kind {args.kind}", file=sys.stderr)
        return 2
    print(f"kind={args.kind} seed={args.seed} out={out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mevforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="parse traces and emit per-cycle records")
    p.add_argument("--traces", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="aggregate records into report tables")
    p.add_argument("--records", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="run a slot-auction campaign")
    p.add_argument("--scenario", required=True)
    p.add_argument("--slots", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen-fixtures", help="write seeded synthetic fixtures with a ground-truth manifest")
    p.add_argument("--kind", choices=("traces", "pools", "records", "scenario"), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigFileError, pbs.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
