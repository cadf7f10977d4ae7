"""Seeded synthetic fixtures with planted ground truth.

Every generator is a pure function of its seed and writes a manifest
recording what was planted, so tests and the acceptance suite can compare
pipeline output against generator intent rather than against itself.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .arbitrage import DEFAULT_SHARE_ADDRESS
from .pools import PoolKind, PoolState, Q96
from .traces import (
    BuilderLabel,
    EventKind,
    PathDescriptor,
    TokenId,
    TraceEvent,
    Transaction,
    format_address,
    format_hash,
)

GEN_BRANDS = ("GenAlpha", "GenBeta")


def _rand_address(rng: random.Random) -> bytes:
    return rng.getrandbits(160).to_bytes(20, "big")


def _rand_hash(rng: random.Random) -> bytes:
    return rng.getrandbits(256).to_bytes(32, "big")


def make_token_universe(rng: random.Random, extra: int = 6) -> list[TokenId]:
    tokens = [
        TokenId("WBNB", _rand_address(rng), 18),
        TokenId("USDT", _rand_address(rng), 18),
        TokenId("USD1", _rand_address(rng), 18),
        TokenId("USDC", _rand_address(rng), 18),
    ]
    for i in range(extra):
        tokens.append(TokenId(f"TK{i}", _rand_address(rng), rng.choice((0, 6, 8, 18))))
    return tokens


@dataclass
class TraceCorpus:
    transactions: list[Transaction]
    labels: list[BuilderLabel]
    manifest: dict


def _pool_for(rng: random.Random, pools: dict[tuple[bytes, bytes], bytes], a: TokenId, b: TokenId) -> bytes:
    key = (min(a.address, b.address), max(a.address, b.address))
    if key not in pools:
        pools[key] = _rand_address(rng)
    return pools[key]


def _noise_events(rng: random.Random, tokens: list[TokenId], count: int) -> list[TraceEvent]:
    out = []
    for _ in range(count):
        kind = rng.choice((EventKind.SYNC, EventKind.TRANSFER, EventKind.INTERNAL))
        if kind is EventKind.SYNC:
            out.append(TraceEvent(kind=kind, index=0, pool=_rand_address(rng)))
        else:
            out.append(
                TraceEvent(
                    kind=kind,
                    index=0,
                    to=_rand_address(rng),
                    amount=rng.randint(1, 10**9),
                    token_out=rng.choice(tokens) if kind is EventKind.TRANSFER and rng.random() < 0.5 else None,
                )
            )
    return out


def _reindex(events: list[TraceEvent]) -> tuple[TraceEvent, ...]:
    return tuple(replace(e, index=i) for i, e in enumerate(events))


def gen_trace_corpus(seed: int, n_transactions: int, cycle_fraction: float = 0.7) -> TraceCorpus:
    """Random transactions, a planted arbitrage cycle in roughly
    `cycle_fraction` of them; swap order is fixed, noise interleaves freely."""
    rng = random.Random(seed)
    tokens = make_token_universe(rng)
    pools: dict[tuple[bytes, bytes], bytes] = {}
    labels = [BuilderLabel(brand, f"{brand.lower()}-1", _rand_address(rng)) for brand in GEN_BRANDS]
    label_addresses = [l.address for l in labels]

    transactions: list[Transaction] = []
    planted: list[dict] = []
    non_cycles = 0
    block = 50_000_000

    for _ in range(n_transactions):
        block += rng.randint(1, 3)
        tx_hash = _rand_hash(rng)
        initiator = rng.choice(label_addresses + [_rand_address(rng)])
        roll = rng.random()
        events: list[TraceEvent]
        if roll < cycle_fraction:
            base = rng.choice(tokens)
            hops = rng.randint(2, 8)
            middle: list[TokenId] = []
            prev = base
            for _i in range(hops - 1):
                nxt = rng.choice([t for t in tokens if t != prev and (len(middle) < hops - 2 or t != base)])
                middle.append(nxt)
                prev = nxt
            route = [base] + middle + [base]
            amount_in0 = rng.randint(10**3, 10**9)
            gross = rng.randint(-(amount_in0 // 10), 10**8)
            amounts = [amount_in0]
            for _i in range(hops - 1):
                amounts.append(rng.randint(1, 10**12))
            amounts.append(amount_in0 + gross)

            swaps = []
            for i in range(hops):
                swaps.append(
                    TraceEvent(
                        kind=EventKind.SWAP,
                        index=0,
                        pool=_pool_for(rng, pools, route[i], route[i + 1]),
                        token_in=route[i],
                        token_out=route[i + 1],
                        amount_in=amounts[i],
                        amount_out=amounts[i + 1],
                    )
                )
            share_total = 0
            extras: list[TraceEvent] = []
            for _i in range(rng.randint(0, 2)):
                amt = rng.randint(1, 10**6)
                share_total += amt
                extras.append(
                    TraceEvent(kind=EventKind.TRANSFER, index=0, to=DEFAULT_SHARE_ADDRESS, amount=amt, token_out=base)
                )
            if rng.random() < 0.3:
                sink_at = rng.randrange(hops)
                amt = rng.randint(1, 10**6)
                share_total += amt
                swaps[sink_at] = replace(swaps[sink_at], pool_sink=True, amount=amt)
            events = list(swaps)
            for extra in extras + _noise_events(rng, tokens, rng.randint(0, 4)):
                events.insert(rng.randint(0, len(events)), extra)
            planted.append(
                {
                    "tx_hash": format_hash(tx_hash),
                    "base_token": base.symbol,
                    "path": [t.symbol for t in route],
                    "pools": [format_address(s.pool) for s in swaps],
                    "hop_count": hops,
                    "gross": gross,
                    "share": share_total,
                    "net": gross - share_total,
                }
            )
        elif roll < cycle_fraction + 0.15 or len(tokens) < 3:
            # no swaps at all
            events = _noise_events(rng, tokens, rng.randint(1, 5))
            non_cycles += 1
        else:
            # open path (entry != exit) or a same-endpoint sequence whose
            # hops do not chain; neither is a cycle
            a, b, c = rng.sample(tokens, 3)
            if rng.random() < 0.5:
                legs = [(a, b), (b, c)]
            else:
                legs = [(a, b), (c, a)]
            events = [
                TraceEvent(
                    kind=EventKind.SWAP,
                    index=0,
                    pool=_pool_for(rng, pools, t_in, t_out),
                    token_in=t_in,
                    token_out=t_out,
                    amount_in=rng.randint(1, 10**9),
                    amount_out=rng.randint(1, 10**9),
                )
                for t_in, t_out in legs
            ]
            for extra in _noise_events(rng, tokens, rng.randint(0, 3)):
                events.insert(rng.randint(0, len(events)), extra)
            non_cycles += 1

        transactions.append(
            Transaction(
                hash=tx_hash,
                block_number=block,
                initiator=initiator,
                events=_reindex(events),
                gas_used=rng.choice((0, 21_000, 180_000)),
                gas_price=0,  # the zero-gas regime; profit identities stay integral
            )
        )

    manifest = {
        "kind": "traces",
        "seed": seed,
        "transactions": n_transactions,
        "planted_cycles": len(planted),
        "non_cycles": non_cycles,
        "share_address": format_address(DEFAULT_SHARE_ADDRESS),
        "tokens": sorted({t.symbol for t in tokens}),
        "planted": planted,
    }
    return TraceCorpus(transactions=transactions, labels=labels, manifest=manifest)


# ---------------------------------------------------------------------------
# pool fixtures


@dataclass
class PoolFixture:
    pools: dict[bytes, PoolState]
    tokens: dict[str, TokenId]
    descriptor: PathDescriptor  # planted profitable V2 triangle
    manifest: dict = field(default_factory=dict)


def gen_pool_fixture(seed: int, mispricing_pct: int = 5) -> PoolFixture:
    """A small pool graph with one deliberately mispriced V2 pair, so a
    triangular route through it is profitable, plus one V3 pool."""
    rng = random.Random(seed)
    wbnb = TokenId("WBNB", _rand_address(rng), 18)
    usdt = TokenId("USDT", _rand_address(rng), 18)
    usd1 = TokenId("USD1", _rand_address(rng), 18)
    tokens = {t.symbol: t for t in (wbnb, usdt, usd1)}

    unit = 10**18
    depth = 5_000_000
    pools: dict[bytes, PoolState] = {}

    def add(pool: PoolState) -> PoolState:
        pools[pool.address] = pool
        return pool

    # WBNB/USDT and WBNB/USD1 at par; USDT/USD1 off par by mispricing_pct.
    p1 = add(
        PoolState(
            address=_rand_address(rng),
            kind=PoolKind.V2,
            token0=wbnb,
            token1=usdt,
            fee_ppm=2500,
            reserve0=depth * unit,
            reserve1=depth * unit,
        )
    )
    p2 = add(
        PoolState(
            address=_rand_address(rng),
            kind=PoolKind.V2,
            token0=usdt,
            token1=usd1,
            fee_ppm=500,
            reserve0=depth * unit,
            reserve1=depth * unit * (100 + mispricing_pct) // 100,
        )
    )
    p3 = add(
        PoolState(
            address=_rand_address(rng),
            kind=PoolKind.V2,
            token0=usd1,
            token1=wbnb,
            fee_ppm=2500,
            reserve0=depth * unit,
            reserve1=depth * unit,
        )
    )
    add(
        PoolState(
            address=_rand_address(rng),
            kind=PoolKind.V3,
            token0=wbnb,
            token1=usdt,
            fee_ppm=500,
            liquidity=depth * unit,
            sqrt_price_x96=Q96,
        )
    )

    descriptor = PathDescriptor(
        tokens=(wbnb, usdt, usd1, wbnb),
        pools=(p1.address, p2.address, p3.address),
        pool_type_flags=(1, 1, 1),
        direction_flags=(0, 0, 0),
    )
    manifest = {
        "kind": "pools",
        "seed": seed,
        "mispricing_pct": mispricing_pct,
        "planted_cycle": [t.symbol for t in descriptor.tokens],
        "pools": len(pools),
    }
    return PoolFixture(pools=pools, tokens=tokens, descriptor=descriptor, manifest=manifest)


# ---------------------------------------------------------------------------
# record fixtures


def gen_record_rows(seed: int, n_rows: int) -> list[dict]:
    """Raw rows for synthetic analytics datasets (brand, token, profit)."""
    rng = random.Random(seed)
    brands = ("48Club", "Blockrazor")
    symbols = ("WBNB", "USDT", "USD1", "USDC")
    rows = []
    block = 50_000_000
    for _ in range(n_rows):
        block += rng.randint(1, 40)
        gross = rng.randint(0, 10**6)
        share = rng.randint(0, gross) if gross else 0
        rows.append(
            {
                "block_number": block,
                "builder_brand": rng.choices(brands, weights=(4, 1))[0],
                "base_token": rng.choice(symbols),
                "hop_count": rng.choices((2, 3, 4, 5, 8), weights=(45, 30, 15, 7, 3))[0],
                "gross": gross,
                "share": share,
                "gas": 0,
                "net": gross - share,
            }
        )
    return rows
