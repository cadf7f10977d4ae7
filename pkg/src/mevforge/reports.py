"""Deterministic report emitters.

Every table is written with a fixed column order, fixed row ordering and
fixed decimal rendering (round half up), so identical inputs always
produce byte-identical files regardless of input row order.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from pathlib import Path
from typing import IO, Iterable, Mapping, Optional

from .analytics import PathComplexity, ProposerSplit, RiskScore, ShareTable, TrendResult
from .pbs import CampaignSummary, SlotOutcome


def decimal_str(value: Fraction, places: int) -> str:
    """Render a rational as a decimal string, round half up at `places`."""
    sign = "-" if value < 0 else ""
    scaled = abs(value) * 10**places
    units, remainder = divmod(scaled.numerator, scaled.denominator)
    if 2 * remainder >= scaled.denominator:
        units += 1
    digits = str(units).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def percent_str(share: Fraction, places: int = 2) -> str:
    return decimal_str(share * 100, places)


def _writer(stream: IO[str]):
    return csv.writer(stream, lineterminator="\n")


def write_share_table(stream: IO[str], table: ShareTable) -> None:
    writer = _writer(stream)
    writer.writerow(["brand", "blocks", "validators", "share_pct"])
    for row in table.rows:
        writer.writerow([row.brand, row.block_count, row.validator_count, percent_str(row.share)])


def write_profit_matrix(stream: IO[str], matrix: Mapping[tuple[str, str], Fraction]) -> None:
    token_totals: dict[str, Fraction] = {}
    for (_brand, token), usd in matrix.items():
        token_totals[token] = token_totals.get(token, Fraction(0)) + usd
    writer = _writer(stream)
    writer.writerow(["brand", "token", "usd", "token_share_pct"])
    for (brand, token) in sorted(matrix):
        usd = matrix[(brand, token)]
        total = token_totals[token]
        share = usd / total if total != 0 else Fraction(0)
        writer.writerow([brand, token, decimal_str(usd, 2), percent_str(share)])


def write_proposer_split(stream: IO[str], splits: Mapping[str, ProposerSplit]) -> None:
    writer = _writer(stream)
    writer.writerow(["brand", "kept_usd", "paid_to_proposer_usd", "payout_fraction_pct"])
    for brand in sorted(splits):
        split = splits[brand]
        writer.writerow(
            [brand, decimal_str(split.kept_usd, 2), decimal_str(split.paid_usd, 2), percent_str(split.payout_fraction)]
        )


def write_complexity(hist_stream: IO[str], ecdf_stream: IO[str], complexity: PathComplexity) -> None:
    writer = _writer(hist_stream)
    writer.writerow(["hop_count", "cycles"])
    for hops, count in complexity.histogram.items():
        writer.writerow([hops, count])
    writer = _writer(ecdf_stream)
    writer.writerow(["hop_count", "cumulative"])
    for hops, cumulative in complexity.ecdf:
        writer.writerow([hops, decimal_str(cumulative, 6)])


def write_correlations(stream: IO[str], rows: Iterable[tuple[str, Optional[float]]]) -> None:
    writer = _writer(stream)
    writer.writerow(["series", "pearson_r"])
    for name, r in sorted(rows):
        writer.writerow([name, "" if r is None else f"{r:.12f}"])


def write_trends(stream: IO[str], results: Mapping[str, TrendResult]) -> None:
    writer = _writer(stream)
    writer.writerow(["series", "s", "variance", "z", "tau", "direction", "alpha"])
    for name in sorted(results):
        res = results[name]
        writer.writerow(
            [
                name,
                res.s_statistic,
                decimal_str(res.variance, 4),
                f"{res.z_score:.6f}",
                decimal_str(res.tau, 6),
                res.direction.value,
                decimal_str(res.alpha, 4),
            ]
        )


def write_risk_scores(stream: IO[str], scores: Iterable[RiskScore]) -> None:
    writer = _writer(stream)
    writer.writerow(["token", "freezable", "custodial", "external_chain", "score"])
    for score in sorted(scores, key=lambda s: s.token.symbol):
        writer.writerow(
            [score.token.symbol, score.freezable, score.custodial, score.external_chain, decimal_str(score.score, 4)]
        )


def write_slot_log(stream: IO[str], outcomes: Iterable[SlotOutcome]) -> None:
    writer = _writer(stream)
    writer.writerow(
        ["height", "winner", "proposer_payment", "fallback", "bids", "blacklist_events", "realized_builder_profit"]
    )
    for o in outcomes:
        writer.writerow(
            [
                o.height,
                o.winner or "",
                o.proposer_payment,
                int(o.fallback_used),
                len(o.bids_received),
                "|".join(o.blacklist_events),
                o.realized_builder_profit,
            ]
        )


def write_campaign_summary(stream: IO[str], summary: CampaignSummary) -> None:
    writer = _writer(stream)
    writer.writerow(["builder_id", "wins", "win_share", "profit", "proposer_revenue"])
    for row in summary.builders:
        writer.writerow(
            [row.builder_id, row.wins, decimal_str(row.win_share, 6), row.profit, row.proposer_revenue]
        )
    writer.writerow(["_fallback_rate", "", decimal_str(summary.fallback_rate, 6), "", summary.total_proposer_revenue])


def write_text(path: Path, render) -> None:
    """Write a report through a stream-rendering callable, atomically enough
    for our purposes (full rewrite)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        render(fh)
