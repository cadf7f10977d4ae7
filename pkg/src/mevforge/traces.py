"""In-memory model for decoded execution traces.

Trace files are newline-delimited JSON, one object per transaction.
Token amounts travel as decimal strings and are held as arbitrary-precision
ints (EVM quantities overflow 64-bit), addresses as raw 20-byte values.
Parsing preserves event order; serialization is canonical (fixed key order,
no padding), so parse followed by serialize is a normalizing round trip.

All types here are frozen and safe to share across threads.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import IO, Iterable, Iterator, Mapping, Optional

ADDRESS_LEN = 20
HASH_LEN = 32
MAX_TOKEN_DECIMALS = 36


class TraceParseError(ValueError):
    """Malformed trace record; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateLabelError(ValueError):
    """A builder address appears more than once in a label set."""


def parse_address(text: str) -> bytes:
    raw = bytes.fromhex(text.removeprefix("0x"))
    if len(raw) != ADDRESS_LEN:
        raise ValueError(f"address must be {ADDRESS_LEN} bytes, got {len(raw)}")
    return raw


def format_address(raw: bytes) -> str:
    return "0x" + raw.hex()


def parse_tx_hash(text: str) -> bytes:
    raw = bytes.fromhex(text.removeprefix("0x"))
    if len(raw) != HASH_LEN:
        raise ValueError(f"tx hash must be {HASH_LEN} bytes, got {len(raw)}")
    return raw


def format_hash(raw: bytes) -> str:
    return "0x" + raw.hex()


class EventKind(Enum):
    SWAP = "swap"
    SYNC = "sync"
    TRANSFER = "transfer"
    INTERNAL = "internal"


@dataclass(frozen=True)
class TokenId:
    """A token: display symbol, contract address, base-unit scale."""

    symbol: str
    address: bytes
    decimals: int

    def __post_init__(self) -> None:
        if len(self.address) != ADDRESS_LEN:
            raise ValueError("token address must be 20 bytes")
        if not 0 <= self.decimals <= MAX_TOKEN_DECIMALS:
            raise ValueError("token decimals out of range")


@dataclass(frozen=True)
class TraceEvent:
    """One decoded event inside a transaction.

    Field usage is kind-specific: swaps carry pool/token_in/token_out and
    the in/out amounts; transfers and internal txns carry to/amount.
    ``pool_sink`` marks a swap that routes surplus into the pool itself,
    in which case ``amount`` holds the routed surplus.  ``index`` is the
    event's position within its transaction.
    """

    kind: EventKind
    index: int
    pool: Optional[bytes] = None
    token_in: Optional[TokenId] = None
    token_out: Optional[TokenId] = None
    amount_in: int = 0
    amount_out: int = 0
    to: Optional[bytes] = None
    amount: Optional[int] = None
    pool_sink: bool = False

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("event index must be non-negative")
        if self.amount_in < 0 or self.amount_out < 0:
            raise ValueError("amounts must be non-negative")
        if self.amount is not None and self.amount < 0:
            raise ValueError("amount must be non-negative")
        if self.kind is EventKind.SWAP:
            if self.pool is None or self.token_in is None or self.token_out is None:
                raise ValueError("swap requires pool, token_in and token_out")
            if self.token_in == self.token_out:
                raise ValueError("swap token_in must differ from token_out")
        elif self.kind in (EventKind.TRANSFER, EventKind.INTERNAL):
            if self.to is None or self.amount is None:
                raise ValueError(f"{self.kind.value} requires to and amount")
        for addr in (self.pool, self.to):
            if addr is not None and len(addr) != ADDRESS_LEN:
                raise ValueError("event address must be 20 bytes")


@dataclass(frozen=True)
class Transaction:
    hash: bytes
    block_number: int
    initiator: bytes
    events: tuple[TraceEvent, ...]
    gas_used: int
    gas_price: int

    def __post_init__(self) -> None:
        if len(self.hash) != HASH_LEN:
            raise ValueError("tx hash must be 32 bytes")
        if len(self.initiator) != ADDRESS_LEN:
            raise ValueError("initiator must be 20 bytes")
        if self.block_number < 0 or self.gas_used < 0 or self.gas_price < 0:
            raise ValueError("block number and gas fields must be non-negative")
        object.__setattr__(self, "events", tuple(self.events))
        indices = [e.index for e in self.events]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("event indices must be strictly increasing")

    @property
    def gas_cost(self) -> int:
        """Total gas cost in wei (exact, Python ints do not overflow)."""
        return self.gas_used * self.gas_price


@dataclass(frozen=True)
class BuilderLabel:
    brand: str
    instance_name: str
    address: bytes

    def __post_init__(self) -> None:
        if len(self.address) != ADDRESS_LEN:
            raise ValueError("builder address must be 20 bytes")


@dataclass(frozen=True)
class PathDescriptor:
    """Execution blueprint for a multi-hop route.

    ``tokens`` has one more entry than the parallel ``pools``,
    ``pool_type_flags`` (1 = constant-product V2, 0 = concentrated V3) and
    ``direction_flags`` (0 = token0 in, 1 = token1 in) lists.
    """

    tokens: tuple[TokenId, ...]
    pools: tuple[bytes, ...]
    pool_type_flags: tuple[int, ...]
    direction_flags: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "pools", tuple(self.pools))
        object.__setattr__(self, "pool_type_flags", tuple(self.pool_type_flags))
        object.__setattr__(self, "direction_flags", tuple(self.direction_flags))
        n = len(self.pools)
        if n < 1:
            raise ValueError("descriptor needs at least one hop")
        if not (len(self.tokens) == n + 1 == len(self.pool_type_flags) + 1 == len(self.direction_flags) + 1):
            raise ValueError("descriptor length mismatch: need n+1 tokens for n pools/flags")
        if any(f not in (0, 1) for f in self.pool_type_flags + self.direction_flags):
            raise ValueError("flags must be 0 or 1")

    @property
    def n_hops(self) -> int:
        return len(self.pools)

    @property
    def is_cycle(self) -> bool:
        return self.tokens[0] == self.tokens[-1]


# ---------------------------------------------------------------------------
# newline-delimited JSON trace format


@dataclass
class ParseStats:
    """Counters accumulated while parsing; unknown event kinds are skipped
    (the record is retained minus that event) rather than failing the file."""

    transactions: int = 0
    unknown_events: int = 0


_KIND_BY_NAME = {k.value: k for k in EventKind}


def token_to_obj(token: TokenId) -> dict:
    return {"symbol": token.symbol, "address": format_address(token.address), "decimals": token.decimals}


def token_from_obj(obj: Mapping) -> TokenId:
    return TokenId(symbol=str(obj["symbol"]), address=parse_address(obj["address"]), decimals=int(obj["decimals"]))


def _read_amount(obj: Mapping, key: str) -> int:
    value = obj.get(key)
    if value is None:
        return 0
    return int(str(value))


def _event_from_obj(obj: Mapping, index: int) -> TraceEvent:
    kind = _KIND_BY_NAME[obj["kind"]]
    token_in = token_from_obj(obj["token_in"]) if "token_in" in obj else None
    token_out = token_from_obj(obj["token_out"]) if "token_out" in obj else None
    amount = None
    if "amount" in obj:
        amount = int(str(obj["amount"]))
    return TraceEvent(
        kind=kind,
        index=index,
        pool=parse_address(obj["pool"]) if "pool" in obj else None,
        token_in=token_in,
        token_out=token_out,
        amount_in=_read_amount(obj, "amount_in"),
        amount_out=_read_amount(obj, "amount_out"),
        to=parse_address(obj["to"]) if "to" in obj else None,
        amount=amount,
        pool_sink=bool(obj.get("pool_sink", False)),
    )


def _transaction_from_obj(obj: Mapping, line_no: int, stats: ParseStats) -> Transaction:
    try:
        events = []
        for raw in obj["events"]:
            if raw.get("kind") not in _KIND_BY_NAME:
                stats.unknown_events += 1
                continue
            events.append(_event_from_obj(raw, index=len(events)))
        return Transaction(
            hash=parse_tx_hash(obj["hash"]),
            block_number=int(obj["block"]),
            initiator=parse_address(obj["from"]),
            events=tuple(events),
            gas_used=int(obj["gas_used"]),
            gas_price=int(obj["gas_price"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceParseError(line_no, str(exc)) from exc


def iter_transactions(stream: IO[str] | Iterable[str], stats: ParseStats | None = None) -> Iterator[Transaction]:
    """Yield transactions from a newline-delimited trace stream in input order."""
    stats = stats if stats is not None else ParseStats()
    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceParseError(line_no, f"invalid JSON: {exc}") from exc
        tx = _transaction_from_obj(obj, line_no, stats)
        stats.transactions += 1
        yield tx


def parse_trace_file(stream: IO[str] | Iterable[str], stats: ParseStats | None = None) -> list[Transaction]:
    return list(iter_transactions(stream, stats))


def _event_to_obj(event: TraceEvent) -> dict:
    obj: dict = {"kind": event.kind.value}
    if event.pool is not None:
        obj["pool"] = format_address(event.pool)
    if event.token_in is not None:
        obj["token_in"] = token_to_obj(event.token_in)
    if event.token_out is not None:
        obj["token_out"] = token_to_obj(event.token_out)
    if event.amount_in:
        obj["amount_in"] = str(event.amount_in)
    if event.amount_out:
        obj["amount_out"] = str(event.amount_out)
    if event.to is not None:
        obj["to"] = format_address(event.to)
    if event.amount is not None:
        obj["amount"] = str(event.amount)
    if event.pool_sink:
        obj["pool_sink"] = True
    return obj


def transaction_to_line(tx: Transaction) -> str:
    obj = {
        "hash": format_hash(tx.hash),
        "block": tx.block_number,
        "from": format_address(tx.initiator),
        "gas_used": tx.gas_used,
        "gas_price": tx.gas_price,
        "events": [_event_to_obj(e) for e in tx.events],
    }
    return json.dumps(obj, separators=(",", ":"))


def serialize_transactions(transactions: Iterable[Transaction]) -> str:
    lines = [transaction_to_line(tx) for tx in transactions]
    return "\n".join(lines) + ("\n" if lines else "")


def mark_pool_sinks(tx: Transaction) -> Transaction:
    """Opt-in ingestion heuristic for feeds that omit explicit pool_sink flags.

    A transfer whose recipient is a pool already touched by an earlier swap
    in the same transaction is surplus routed back into the pool; flag it so
    profit attribution counts it as redistributed.
    """
    seen_pools: set[bytes] = set()
    out: list[TraceEvent] = []
    changed = False
    for event in tx.events:
        if event.kind is EventKind.SWAP and event.pool is not None:
            seen_pools.add(event.pool)
        if event.kind is EventKind.TRANSFER and not event.pool_sink and event.to in seen_pools:
            event = replace(event, pool_sink=True)
            changed = True
        out.append(event)
    return replace(tx, events=tuple(out)) if changed else tx


# ---------------------------------------------------------------------------
# builder labels (CSV columns: brand,instance,address)


class LabelSet:
    """Builder identity labels with unique-address validation at load time."""

    def __init__(self, labels: Iterable[BuilderLabel]):
        self._by_address: dict[bytes, BuilderLabel] = {}
        for label in labels:
            if label.address in self._by_address:
                other = self._by_address[label.address]
                raise DuplicateLabelError(
                    f"address {format_address(label.address)} labeled under both "
                    f"{other.brand!r} and {label.brand!r}"
                )
            self._by_address[label.address] = label

    @classmethod
    def from_csv(cls, stream: IO[str]) -> "LabelSet":
        reader = csv.reader(stream)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["brand", "instance", "address"]:
            raise ValueError("label file must start with header: brand,instance,address")
        labels = []
        for row in reader:
            if not row or not "".join(row).strip():
                continue
            if len(row) != 3:
                raise ValueError(f"label row must have 3 columns, got {row!r}")
            labels.append(BuilderLabel(brand=row[0].strip(), instance_name=row[1].strip(), address=parse_address(row[2].strip())))
        return cls(labels)

    def lookup(self, address: bytes) -> Optional[BuilderLabel]:
        return self._by_address.get(address)

    def __len__(self) -> int:
        return len(self._by_address)

    def __iter__(self) -> Iterator[BuilderLabel]:
        return iter(self._by_address.values())


def label_builder(address: bytes, labels: "LabelSet | Iterable[BuilderLabel]") -> Optional[BuilderLabel]:
    """Return the unique label for an address, or None when unlabeled."""
    if not isinstance(labels, LabelSet):
        labels = LabelSet(labels)
    return labels.lookup(address)
