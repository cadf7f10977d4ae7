"""Per-cycle arbitrage records and their versioned CSV schema.

The file starts with a ``schema_version`` row so later alignment with an
externally published schema stays detectable, then a header row, then one
row per cycle.  The base-unit identity net = gross - share - gas must hold
on every row and is revalidated on load.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from typing import IO, Iterable, Iterator

from .traces import format_hash, parse_tx_hash

SCHEMA_VERSION = "1"
_HEADER = [
    "tx_hash",
    "block_number",
    "builder_brand",
    "base_token",
    "hop_count",
    "gross",
    "share",
    "gas",
    "net",
    "usd_value",
    "timestamp_utc",
]


class RecordSchemaError(ValueError):
    """Schema violation; message carries the 1-based row number."""

    def __init__(self, row_no: int, message: str):
        super().__init__(f"row {row_no}: {message}")
        self.row_no = row_no


@dataclass(frozen=True)
class ArbitrageRecord:
    tx_hash: bytes
    block_number: int
    builder_brand: str
    base_token: str
    hop_count: int
    gross: int
    share: int
    gas: int  # base units, already converted from wei
    net: int
    usd_value: Fraction
    timestamp_utc: str

    def __post_init__(self) -> None:
        if self.net != self.gross - self.share - self.gas:
            raise ValueError("record identity violated: net != gross - share - gas")
        if self.hop_count < 2:
            raise ValueError("cycles have at least two hops")


def timestamp_for_block(block_number: int, genesis_unix: int, block_interval_s: int = 3) -> str:
    """Derive a UTC timestamp for a block from a configured genesis epoch."""
    moment = datetime.fromtimestamp(genesis_unix + block_number * block_interval_s, tz=timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def fraction_to_decimal(value: Fraction) -> str:
    """Exact decimal text for a fraction with a 2^a * 5^b denominator."""
    denominator = value.denominator
    twos = fives = 0
    while denominator % 2 == 0:
        denominator //= 2
        twos += 1
    while denominator % 5 == 0:
        denominator //= 5
        fives += 1
    if denominator != 1:
        raise ValueError(f"{value} has no terminating decimal expansion")
    places = max(twos, fives)
    scaled = value.numerator * 10**places // value.denominator
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    if places == 0:
        return sign + digits
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def record_to_row(record: ArbitrageRecord) -> list[str]:
    return [
        format_hash(record.tx_hash),
        str(record.block_number),
        record.builder_brand,
        record.base_token,
        str(record.hop_count),
        str(record.gross),
        str(record.share),
        str(record.gas),
        str(record.net),
        fraction_to_decimal(record.usd_value),
        record.timestamp_utc,
    ]


def write_records(stream: IO[str], records: Iterable[ArbitrageRecord]) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["schema_version", SCHEMA_VERSION])
    writer.writerow(_HEADER)
    count = 0
    for record in records:
        writer.writerow(record_to_row(record))
        count += 1
    return count


def iter_records(stream: IO[str]) -> Iterator[ArbitrageRecord]:
    reader = csv.reader(stream)
    version_row = next(reader, None)
    if version_row is None or version_row[:1] != ["schema_version"]:
        raise RecordSchemaError(1, "missing schema_version row")
    if version_row[1:] != [SCHEMA_VERSION]:
        raise RecordSchemaError(1, f"unsupported schema version {version_row[1:]}")
    header = next(reader, None)
    if header != _HEADER:
        raise RecordSchemaError(2, f"bad header, expected {','.join(_HEADER)}")
    for row_no, row in enumerate(reader, start=3):
        if not row:
            continue
        if len(row) != len(_HEADER):
            raise RecordSchemaError(row_no, f"expected {len(_HEADER)} columns, got {len(row)}")
        try:
            yield ArbitrageRecord(
                tx_hash=parse_tx_hash(row[0]),
                block_number=int(row[1]),
                builder_brand=row[2],
                base_token=row[3],
                hop_count=int(row[4]),
                gross=int(row[5]),
                share=int(row[6]),
                gas=int(row[7]),
                net=int(row[8]),
                usd_value=Fraction(row[9]),
                timestamp_utc=row[10],
            )
        except (ValueError, ZeroDivisionError) as exc:
            raise RecordSchemaError(row_no, str(exc)) from exc


def read_records(stream: IO[str]) -> list[ArbitrageRecord]:
    return list(iter_records(stream))
