"""Arbitrage-cycle extraction, profit attribution and bounded-hop flow tracing.

A transaction is an arbitrage cycle when the entry asset of its first swap
equals the exit asset of its last swap; the swap sequence in between is
treated as one atomic opportunity, however many hops it takes.  Profit is
split three ways: gross (cycle surplus in the base token), share (amounts
redirected to validator-income endpoints or routed back into pools), and
the builder-retained net after gas.

Everything here is a pure function over immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .traces import EventKind, TokenId, Transaction, format_hash

# Validator-income endpoint commonly seen in share transfers.  Not the
# protocol payout contract, so callers can override the whole set.
DEFAULT_SHARE_ADDRESS = bytes.fromhex("ff" * 19 + "fe")

NATIVE_DECIMALS = 18
NATIVE_PRICE_SYMBOL = "WBNB"  # gas is paid in the native coin, priced via its wrapper


class MissingPriceError(LookupError):
    """A token needed for USD or gas conversion has no quoted price."""


class CycleMismatchError(ValueError):
    """The cycle handed to attribution came from a different transaction."""


@dataclass(frozen=True)
class SwapHop:
    token_in: TokenId
    token_out: TokenId
    pool: bytes


@dataclass(frozen=True)
class ArbitrageCycle:
    tx_hash: bytes
    base_token: TokenId
    path: tuple[SwapHop, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "path", tuple(self.path))
        if len(self.path) < 2:
            raise ValueError("a cycle needs at least two hops")
        if self.path[0].token_in != self.base_token or self.path[-1].token_out != self.base_token:
            raise ValueError("cycle endpoints must equal the base token")
        for a, b in zip(self.path, self.path[1:]):
            if a.token_out != b.token_in:
                raise ValueError("consecutive hops must chain")

    @property
    def hop_count(self) -> int:
        return len(self.path)


def extract_arbitrage_cycle(tx: Transaction) -> Optional[ArbitrageCycle]:
    """Collect the transaction's swaps in order and return the cycle they
    form, or None when there is no swap, the entry and exit assets differ,
    or the hops do not chain into a single route."""
    hops = [
        SwapHop(token_in=e.token_in, token_out=e.token_out, pool=e.pool)
        for e in tx.events
        if e.kind is EventKind.SWAP
    ]
    if not hops:
        return None
    if hops[0].token_in != hops[-1].token_out:
        return None
    for a, b in zip(hops, hops[1:]):
        if a.token_out != b.token_in:
            return None
    return ArbitrageCycle(tx_hash=tx.hash, base_token=hops[0].token_in, path=tuple(hops))


@dataclass(frozen=True)
class ProfitBreakdown:
    """Profit components of one cycle, in base-token units except gas_cost
    (wei) and usd_value (dollars).  net = gross - share - gas-in-base-units
    holds exactly; gross may be negative for losing cycles."""

    base_token: TokenId
    gross: int
    share: int
    gas_cost: int
    net: int
    usd_value: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.share < 0 or self.gas_cost < 0:
            raise ValueError("share and gas_cost must be non-negative")

    @property
    def gas_in_base_units(self) -> int:
        return self.gross - self.share - self.net


def gas_cost_in_base_units(gas_wei: int, base_token: TokenId, price_table: Optional[Mapping[str, Fraction]]) -> int:
    """Convert a wei gas cost into base-token units via the price table.

    Zero gas (the usual 0 Gwei regime) needs no prices at all.
    """
    if gas_wei == 0:
        return 0
    if price_table is None:
        raise MissingPriceError("gas conversion requires a price table")
    try:
        native_price = Fraction(price_table[NATIVE_PRICE_SYMBOL])
        base_price = Fraction(price_table[base_token.symbol])
    except KeyError as exc:
        raise MissingPriceError(f"no price for {exc.args[0]}") from exc
    value = Fraction(gas_wei) * native_price * 10**base_token.decimals
    return int(value / (10**NATIVE_DECIMALS * base_price))


def attribute_profit(
    tx: Transaction,
    cycle: ArbitrageCycle,
    share_addresses: Iterable[bytes] = (DEFAULT_SHARE_ADDRESS,),
    price_table: Optional[Mapping[str, Fraction]] = None,
) -> ProfitBreakdown:
    """Compute (gross, share, net) for an extracted cycle.

    gross is the base-token output of the last swap minus the input of the
    first; share sums transfers to the configured endpoints plus surplus
    flagged as routed into pools; net subtracts both share and the gas cost
    converted into base units.
    """
    if cycle.tx_hash != tx.hash:
        raise CycleMismatchError(
            f"cycle from {format_hash(cycle.tx_hash)} does not match tx {format_hash(tx.hash)}"
        )
    share_set = frozenset(share_addresses)
    swaps = [e for e in tx.events if e.kind is EventKind.SWAP]
    gross = swaps[-1].amount_out - swaps[0].amount_in

    share = 0
    for event in tx.events:
        if event.kind is EventKind.TRANSFER and (event.to in share_set or event.pool_sink):
            share += event.amount
        elif event.kind is EventKind.SWAP and event.pool_sink and event.amount is not None:
            share += event.amount

    gas_wei = tx.gas_cost
    gas_base = gas_cost_in_base_units(gas_wei, cycle.base_token, price_table)
    return ProfitBreakdown(
        base_token=cycle.base_token,
        gross=gross,
        share=share,
        gas_cost=gas_wei,
        net=gross - share - gas_base,
    )


def to_usd(breakdown: ProfitBreakdown, price_table: Mapping[str, Fraction]) -> Fraction:
    """Dollar value of the net profit; never silently zero on a missing price."""
    symbol = breakdown.base_token.symbol
    if symbol not in price_table:
        raise MissingPriceError(f"no price for {symbol}")
    price = Fraction(price_table[symbol])
    return Fraction(breakdown.net) * price / 10**breakdown.base_token.decimals


def with_usd(breakdown: ProfitBreakdown, price_table: Mapping[str, Fraction]) -> ProfitBreakdown:
    return replace(breakdown, usd_value=to_usd(breakdown, price_table))


def profit_to_fee_ratio(breakdown: ProfitBreakdown) -> Optional[Fraction]:
    """Net profit per unit of deductions (gas in base units plus share).
    Undefined (None) when there were no deductions at all."""
    fees = breakdown.gas_in_base_units + breakdown.share
    if fees == 0:
        return None
    return Fraction(breakdown.net, fees)


# ---------------------------------------------------------------------------
# bounded-hop flow tracing


class FlowCategory(Enum):
    CEX_HOT_WALLET = "cex_hot_wallet"
    WALLET_EOA = "wallet_eoa"
    AGGREGATOR = "aggregator"
    CONTRACT = "contract"
    POOL = "pool"
    OTHER_UNKNOWN = "other_unknown"


@dataclass(frozen=True)
class FlowEdge:
    src: bytes
    dst: bytes
    token: Optional[str]
    amount: int


@dataclass
class FlowGraph:
    nodes: dict[bytes, FlowCategory]
    edges: tuple[FlowEdge, ...]
    max_hops: int


class TransactionIndex:
    """Sender-indexed transaction store; reads are safe to share."""

    def __init__(self, transactions: Iterable[Transaction] = ()):
        self._by_initiator: dict[bytes, list[Transaction]] = {}
        for tx in transactions:
            self.add(tx)

    def add(self, tx: Transaction) -> None:
        self._by_initiator.setdefault(tx.initiator, []).append(tx)

    def initiated_by(self, address: bytes) -> tuple[Transaction, ...]:
        return tuple(self._by_initiator.get(address, ()))

    def __len__(self) -> int:
        return sum(len(v) for v in self._by_initiator.values())


def trace_flows(
    seed_tx: Transaction,
    corpus: TransactionIndex,
    k: int = 4,
    address_categories: Optional[Mapping[bytes, FlowCategory]] = None,
) -> FlowGraph:
    """Breadth-first walk over transfer events, at most k hops from the seed.

    Hop 1 is the seed transaction's own transfers; hop d+1 follows transfers
    of corpus transactions initiated by addresses first reached at hop d.
    Endpoints without a category land in OTHER_UNKNOWN.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    categories = address_categories or {}
    edges: list[FlowEdge] = []
    visited: set[bytes] = {seed_tx.initiator}
    current: list[Transaction] = [seed_tx]
    for _ in range(k):
        next_addresses: list[bytes] = []
        for tx in current:
            for event in tx.events:
                if event.kind is not EventKind.TRANSFER:
                    continue
                token = event.token_out.symbol if event.token_out is not None else None
                edges.append(FlowEdge(src=tx.initiator, dst=event.to, token=token, amount=event.amount))
                if event.to not in visited:
                    visited.add(event.to)
                    next_addresses.append(event.to)
        current = [tx for addr in next_addresses for tx in corpus.initiated_by(addr)]
        if not current:
            break

    nodes: dict[bytes, FlowCategory] = {}
    for address in [seed_tx.initiator] + [e.src for e in edges] + [e.dst for e in edges]:
        nodes.setdefault(address, categories.get(address, FlowCategory.OTHER_UNKNOWN))
    return FlowGraph(nodes=nodes, edges=tuple(edges), max_hops=k)
