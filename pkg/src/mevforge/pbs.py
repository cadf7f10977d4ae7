"""Deterministic slot simulator for two block-production markets.

The direct flow models a short-horizon chain where builders race an
opportunity that decays within a few hundred milliseconds and the proposer
takes the best bid seen by a narrow listen window, so arrival time decides
slots.  The relay flow models a long-horizon commit-reveal market where
builders keep rebidding through the coordination window and the proposer
signs the best header at slot end, so achievable value decides slots.

Event timing is rational milliseconds throughout; every outcome is a pure
function of (scenario, seed).  A campaign is single-threaded by design;
parallelize across campaigns, not within one.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from . import pools as pools_mod
from .traces import PathDescriptor, TokenId

DEFAULT_BSC_HORIZON_MS = Fraction(3000)
DEFAULT_ETH_HORIZON_MS = Fraction(12000)
DEFAULT_BASE_COMPUTE_MS = Fraction(10)


class ConfigError(ValueError):
    """Invalid scenario or agent configuration; message lists offending keys."""


class Protocol(Enum):
    BSC_DIRECT = "bsc_direct"
    ETH_RELAY = "eth_relay"


class Strategy(Enum):
    SHORT_HOP = "short_hop"
    LONG_HOP = "long_hop"
    MIXED = "mixed"


class DecayShape(Enum):
    PIECEWISE = "piecewise"
    EXPONENTIAL = "exponential"


def _as_fraction(value) -> Fraction:
    # route floats through str so JSON scenario values stay exact decimals
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class BuilderAgent:
    id: str
    latency_ms: Fraction
    strategy: Strategy = Strategy.SHORT_HOP
    share_ratio_bp: int = 0
    infra_tier: Fraction = Fraction(1)
    non_delivery_prob: float = 0.0

    def __post_init__(self) -> None:
        problems = []
        if not self.id:
            problems.append("id")
        if self.latency_ms < 0:
            problems.append("latency_ms")
        if not 0 <= self.share_ratio_bp <= pools_mod.SHARE_RATIO_SCALE:
            problems.append("share_ratio_bp")
        if self.infra_tier <= 0:
            problems.append("infra_tier")
        if not 0.0 <= self.non_delivery_prob <= 1.0:
            problems.append("non_delivery_prob")
        if problems:
            raise ConfigError(f"builder {self.id!r}: invalid {', '.join(problems)}")

    @property
    def efficiency(self) -> Fraction:
        """Fraction of an opportunity this builder's pipeline can realize.

        Diminishing returns in infra tier: tier/(tier+1), so better
        infrastructure always extracts more but never the full surplus.
        """
        return self.infra_tier / (self.infra_tier + 1)

    def compute_ms(self, base_compute_ms: Fraction) -> Fraction:
        return base_compute_ms / self.infra_tier


@dataclass(frozen=True)
class OpportunityModel:
    """Value of an arbitrage opportunity as a function of time.

    Piecewise default: flat at peak_value until knee_ms after birth, linear
    down to gas_floor at deadline_ms, then tail_value (< gas_floor).  The
    exponential alternative decays continuously and is clamped to
    tail_value from the deadline on.  value() is non-increasing either way.
    """

    peak_value: int
    gas_floor: int
    birth_ms: Fraction = Fraction(0)
    decay: DecayShape = DecayShape.PIECEWISE
    knee_ms: Fraction = Fraction(100)
    deadline_ms: Fraction = Fraction(200)
    tail_value: int = 0

    def __post_init__(self) -> None:
        problems = []
        if self.peak_value < 0:
            problems.append("peak_value")
        if not 0 <= self.tail_value < max(self.gas_floor, 1) or self.gas_floor < 0:
            problems.append("gas_floor/tail_value")
        if not 0 <= self.knee_ms < self.deadline_ms:
            problems.append("knee_ms/deadline_ms")
        if problems:
            raise ConfigError(f"opportunity: invalid {', '.join(problems)}")

    def value(self, t_ms: Fraction) -> int:
        elapsed = t_ms - self.birth_ms
        if elapsed < 0:
            return 0
        if elapsed >= self.deadline_ms:
            return self.tail_value
        if self.decay is DecayShape.PIECEWISE:
            if elapsed <= self.knee_ms:
                return self.peak_value
            slope = Fraction(self.peak_value - self.gas_floor) / (self.deadline_ms - self.knee_ms)
            return int(self.peak_value - slope * (elapsed - self.knee_ms))
        # exponential: reach gas_floor at the deadline, clamp to tail after
        if self.peak_value <= self.gas_floor or self.gas_floor == 0:
            return self.peak_value if elapsed == 0 else self.tail_value
        rate = math.log(self.peak_value / self.gas_floor) / float(self.deadline_ms)
        return max(self.tail_value, int(self.peak_value * math.exp(-rate * float(elapsed))))


@dataclass(frozen=True)
class Bid:
    builder_id: str
    height: int
    timestamp_ms: Fraction
    tx_root: bytes
    expected_gas_fee: int
    offered_payment: int
    full_body_attached: bool
    delta: int  # the builder's realized surplus backing the bid

    def __post_init__(self) -> None:
        if self.offered_payment > self.delta:
            raise ValueError("insolvent bid: payment exceeds realized surplus")


@dataclass(frozen=True)
class SlotOutcome:
    height: int
    winner: Optional[str]
    proposer_payment: int
    fallback_used: bool
    blacklist_events: tuple[str, ...]
    bids_received: tuple[tuple[str, Fraction, int], ...]
    realized_builder_profit: int

    def __post_init__(self) -> None:
        if self.fallback_used and self.winner is not None:
            raise ValueError("fallback slots have no winner")
        if self.winner is not None and self.winner not in {b[0] for b in self.bids_received}:
            raise ValueError("winner must appear among received bids")


@dataclass(frozen=True)
class ProposerConfig:
    horizon_ms: Fraction = DEFAULT_BSC_HORIZON_MS
    listen_window_ms: Fraction = Fraction(50)
    blacklist_slots: int = 100

    def __post_init__(self) -> None:
        if self.horizon_ms <= 0 or self.listen_window_ms < 0 or self.blacklist_slots < 0:
            raise ConfigError("proposer: invalid horizon_ms/listen_window_ms/blacklist_slots")


@dataclass(frozen=True)
class RelayConfig:
    delay_ms: Fraction = Fraction(0)
    rebid_interval_ms: Fraction = Fraction(500)
    optimization_rounds: int = 8
    rebids_enabled: bool = True

    def __post_init__(self) -> None:
        if self.delay_ms < 0 or self.rebid_interval_ms <= 0 or self.optimization_rounds < 1:
            raise ConfigError("relay: invalid delay_ms/rebid_interval_ms/optimization_rounds")


# A bid-value function maps (builder, delivery time) to the raw opportunity
# value the builder would realize at that instant, before the efficiency
# haircut.  The default is the analytic decay curve; embodied scenarios
# replace it with pool-simulation results.
BidValueFn = Callable[[BuilderAgent, Fraction], int]


def _tx_root(builder_id: str, height: int, t: Fraction) -> bytes:
    return hashlib.sha256(f"{builder_id}:{height}:{t}".encode()).digest()


def _make_bid(agent: BuilderAgent, height: int, t: Fraction, delta: int) -> Bid:
    payout, _kept = pools_mod.split_delta(delta, agent.share_ratio_bp)
    return Bid(
        builder_id=agent.id,
        height=height,
        timestamp_ms=t,
        tx_root=_tx_root(agent.id, height, t),
        expected_gas_fee=0,
        offered_payment=payout,
        full_body_attached=True,
        delta=delta,
    )


def _validated_agents(builders: Sequence[BuilderAgent]) -> list[BuilderAgent]:
    agents = sorted(builders, key=lambda b: b.id)
    ids = [b.id for b in agents]
    if len(set(ids)) != len(ids):
        raise ConfigError("builders: duplicate ids")
    return agents


def _slot_rng(protocol: str, rng_seed: int, height: int) -> random.Random:
    # string seeding hashes via SHA-512 internally, stable across platforms
    return random.Random(f"{protocol}:{rng_seed}:{height}")


def run_slot_bsc(
    builders: Sequence[BuilderAgent],
    proposer: ProposerConfig,
    opportunity: OpportunityModel,
    rng_seed: int,
    *,
    height: int = 0,
    base_compute_ms: Fraction = DEFAULT_BASE_COMPUTE_MS,
    blacklisted: frozenset[str] = frozenset(),
    bid_value_fn: Optional[BidValueFn] = None,
) -> SlotOutcome:
    """One direct single-round slot.

    Each builder sees the opportunity one latency after birth, computes for
    base_compute/tier, and its bid lands another latency later; the bid's
    value is the opportunity as decayed at that landing time, scaled by the
    builder's efficiency.  The proposer takes the best bid that arrived by
    max(listen window, first arrival); a failed delivery blacklists the
    builder locally and the next-best bid is tried; with none left the
    proposer falls back to its own block.
    """
    agents = _validated_agents(builders)
    rng = _slot_rng("bsc", rng_seed, height)
    value_at = bid_value_fn or (lambda _agent, t: opportunity.value(t))

    bids: list[Bid] = []
    for agent in agents:
        if agent.id in blacklisted:
            continue
        arrival = opportunity.birth_ms + 2 * agent.latency_ms + agent.compute_ms(base_compute_ms)
        if arrival > proposer.horizon_ms:
            continue
        raw = value_at(agent, arrival)
        if raw <= opportunity.gas_floor:
            continue  # not worth executing once it lands
        delta = int(raw * agent.efficiency)
        bids.append(_make_bid(agent, height, arrival, delta))

    bids.sort(key=lambda b: (b.timestamp_ms, b.builder_id))
    received = tuple((b.builder_id, b.timestamp_ms, b.offered_payment) for b in bids)
    if not bids:
        return SlotOutcome(height, None, 0, True, (), received, 0)

    cutoff = max(proposer.listen_window_ms, bids[0].timestamp_ms)
    competing = [b for b in bids if b.timestamp_ms <= cutoff]
    competing.sort(key=lambda b: (-b.offered_payment, b.timestamp_ms, b.builder_id))

    blacklist_events: list[str] = []
    by_id = {a.id: a for a in agents}
    for candidate in competing:
        agent = by_id[candidate.builder_id]
        if agent.non_delivery_prob > 0 and rng.random() < agent.non_delivery_prob:
            blacklist_events.append(candidate.builder_id)
            continue
        return SlotOutcome(
            height=height,
            winner=candidate.builder_id,
            proposer_payment=candidate.offered_payment,
            fallback_used=False,
            blacklist_events=tuple(blacklist_events),
            bids_received=received,
            realized_builder_profit=candidate.delta - candidate.offered_payment,
        )
    return SlotOutcome(height, None, 0, True, tuple(blacklist_events), received, 0)


def run_slot_eth(
    builders: Sequence[BuilderAgent],
    relay: RelayConfig,
    proposer: ProposerConfig,
    opportunity: OpportunityModel,
    rng_seed: int,
    *,
    height: int = 0,
    base_compute_ms: Fraction = DEFAULT_BASE_COMPUTE_MS,
    bid_value_fn: Optional[BidValueFn] = None,
) -> SlotOutcome:
    """One relay-mediated commit-reveal slot.

    A builder joins once it learns of the opportunity within the slot.  Its
    first bid locks in whatever the race left at delivery time; each rebid
    through the coordination window unlocks more of its achievable ceiling
    (undecayed value times efficiency) as optimization rounds complete.
    The proposer signs the best header present at slot end, so with rebids
    enabled the highest-ceiling builder wins regardless of latency
    ordering.  With rebids disabled each builder submits one sealed bid
    under the same participation rule as the direct flow.
    """
    agents = _validated_agents(builders)
    value_at = bid_value_fn or (lambda _agent, t: opportunity.value(t))

    all_bids: list[Bid] = []
    for agent in agents:
        observed = opportunity.birth_ms + agent.latency_ms
        if observed > proposer.horizon_ms:
            continue  # never learned of the opportunity within the slot
        first = opportunity.birth_ms + 2 * agent.latency_ms + agent.compute_ms(base_compute_ms) + relay.delay_ms
        if first > proposer.horizon_ms:
            continue
        raw_at_delivery = value_at(agent, first)
        if not relay.rebids_enabled:
            # one sealed bid: the race decides, same participation rule as
            # the direct flow
            if raw_at_delivery <= opportunity.gas_floor:
                continue
            all_bids.append(_make_bid(agent, height, first, int(raw_at_delivery * agent.efficiency)))
            continue
        full = value_at(agent, opportunity.birth_ms)  # undecayed opportunity
        if full <= opportunity.gas_floor:
            continue  # nothing worth building around this slot
        locked = int(raw_at_delivery * agent.efficiency)
        all_bids.append(_make_bid(agent, height, first, locked))
        ceiling = int(full * agent.efficiency)
        rounds = relay.optimization_rounds
        t = first + relay.rebid_interval_ms
        k = 1
        while t <= proposer.horizon_ms:
            improved = max(locked, ceiling * min(k, rounds) // rounds)
            all_bids.append(_make_bid(agent, height, t, improved))
            if improved >= ceiling:
                break
            k += 1
            t += relay.rebid_interval_ms

    all_bids.sort(key=lambda b: (b.timestamp_ms, b.builder_id))
    received = tuple((b.builder_id, b.timestamp_ms, b.offered_payment) for b in all_bids)
    if not all_bids:
        return SlotOutcome(height, None, 0, True, (), received, 0)

    best = min(all_bids, key=lambda b: (-b.offered_payment, b.timestamp_ms, b.builder_id))
    return SlotOutcome(
        height=height,
        winner=best.builder_id,
        proposer_payment=best.offered_payment,
        fallback_used=False,
        blacklist_events=(),
        bids_received=received,
        realized_builder_profit=best.delta - best.offered_payment,
    )


# ---------------------------------------------------------------------------
# horizons


def contestable_window(protocol: Protocol, horizon_ms: Fraction, delta_lat_ms: Fraction) -> Fraction:
    """Length of the coordination window in which bids can still be improved.

    The relay flow leaves horizon minus the latency race; the direct flow
    accepts the first valid bid, so its window is structurally empty.
    """
    if horizon_ms <= 0:
        raise ValueError("horizon_ms must be positive")
    if protocol is Protocol.BSC_DIRECT:
        return Fraction(0)
    return max(Fraction(0), Fraction(horizon_ms) - Fraction(delta_lat_ms))


def missing_horizon(h_eth_ms: Fraction, h_bsc_ms: Fraction) -> Fraction:
    """Coordination time present on the long-slot chain but absent on the
    short-slot one."""
    if h_eth_ms < h_bsc_ms:
        raise ValueError("long horizon must be at least the short horizon")
    return Fraction(h_eth_ms) - Fraction(h_bsc_ms)


# ---------------------------------------------------------------------------
# scenarios and campaigns


@dataclass(frozen=True)
class SimScenario:
    protocol: Protocol
    builders: tuple[BuilderAgent, ...]
    opportunity: OpportunityModel
    proposer: ProposerConfig
    relay: RelayConfig = RelayConfig()
    proposer_count: int = 1
    rotation: str = "round_robin"
    base_compute_ms: Fraction = DEFAULT_BASE_COMPUTE_MS
    pools: Optional[dict[bytes, "pools_mod.PoolState"]] = None
    embodied_base_symbol: Optional[str] = None

    def __post_init__(self) -> None:
        if self.proposer_count < 1:
            raise ConfigError("proposers: count must be >= 1")
        if self.rotation != "round_robin":
            raise ConfigError(f"proposers: unknown rotation {self.rotation!r}")


def load_scenario(path: str | Path) -> SimScenario:
    """Load and validate a scenario JSON file; unknown or broken keys are
    reported together in one ConfigError."""
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    problems: list[str] = []

    def grab(section: Mapping, key: str, default=None, required: bool = False):
        if key not in section:
            if required:
                problems.append(key)
            return default
        return section[key]

    protocol_name = grab(obj, "protocol", required=True)
    try:
        protocol = Protocol(protocol_name)
    except ValueError:
        problems.append("protocol")
        protocol = Protocol.BSC_DIRECT

    default_horizon = DEFAULT_ETH_HORIZON_MS if protocol is Protocol.ETH_RELAY else DEFAULT_BSC_HORIZON_MS
    horizon = _as_fraction(grab(obj, "horizon_ms", default_horizon))

    builders = []
    for i, entry in enumerate(obj.get("builders", [])):
        try:
            builders.append(
                BuilderAgent(
                    id=str(entry["id"]),
                    latency_ms=_as_fraction(entry["latency_ms"]),
                    strategy=Strategy(entry.get("strategy", "short_hop")),
                    share_ratio_bp=int(entry.get("share_ratio_bp", 0)),
                    infra_tier=_as_fraction(entry.get("infra_tier", 1)),
                    non_delivery_prob=float(entry.get("non_delivery_prob", 0.0)),
                )
            )
        except (KeyError, ValueError, ConfigError) as exc:
            problems.append(f"builders[{i}]: {exc}")

    opp = obj.get("opportunity", {})
    try:
        opportunity = OpportunityModel(
            peak_value=int(opp["peak_value"]),
            gas_floor=int(opp["gas_floor"]),
            birth_ms=_as_fraction(opp.get("birth_ms", 0)),
            decay=DecayShape(opp.get("decay", "piecewise")),
            knee_ms=_as_fraction(opp.get("knee_ms", 100)),
            deadline_ms=_as_fraction(opp.get("deadline_ms", 200)),
            tail_value=int(opp.get("tail_value", 0)),
        )
    except (KeyError, ValueError, ConfigError) as exc:
        problems.append(f"opportunity: {exc}")
        opportunity = OpportunityModel(peak_value=1, gas_floor=1)

    proposers = obj.get("proposers", {})
    try:
        proposer = ProposerConfig(
            horizon_ms=horizon,
            listen_window_ms=_as_fraction(obj.get("listen_window_ms", 50)),
            blacklist_slots=int(proposers.get("blacklist_slots", 100)),
        )
    except ConfigError as exc:
        problems.append(str(exc))
        proposer = ProposerConfig()

    relay_obj = obj.get("relay", {})
    try:
        relay = RelayConfig(
            delay_ms=_as_fraction(relay_obj.get("delay_ms", 0)),
            rebid_interval_ms=_as_fraction(relay_obj.get("rebid_interval_ms", 500)),
            optimization_rounds=int(relay_obj.get("optimization_rounds", 8)),
            rebids_enabled=bool(relay_obj.get("rebids_enabled", True)),
        )
    except ConfigError as exc:
        problems.append(str(exc))
        relay = RelayConfig()

    pools = None
    if obj.get("pools"):
        pool_path = Path(path).parent / obj["pools"]
        try:
            with open(pool_path, encoding="utf-8") as fh:
                pools = pools_mod.load_pool_file(fh)
        except (OSError, ValueError, KeyError) as exc:
            problems.append(f"pools: {exc}")

    if problems:
        raise ConfigError("invalid scenario keys: " + "; ".join(str(p) for p in problems))
    return SimScenario(
        protocol=protocol,
        builders=tuple(builders),
        opportunity=opportunity,
        proposer=proposer,
        relay=relay,
        proposer_count=int(proposers.get("count", 1)),
        rotation=proposers.get("rotation", "round_robin"),
        base_compute_ms=_as_fraction(obj.get("base_compute_ms", 10)),
        pools=pools,
        embodied_base_symbol=obj.get("embodied_base_symbol"),
    )


def _embodied_bid_value_fn(scenario: SimScenario) -> BidValueFn:
    """Bid values backed by pool simulation instead of the analytic curve.

    The best achievable surplus over the fixture's cycles is searched once
    per strategy, then scaled by the opportunity's remaining fraction at
    delivery time: pools drift back toward balance as the race ages.
    """
    assert scenario.pools is not None
    cycles = enumerate_cycles(scenario.pools, scenario.embodied_base_symbol)
    if not cycles:
        raise ConfigError("pools: fixture contains no executable cycle")
    by_length: dict[int, int] = {}
    for descriptor in cycles:
        hi = max(_v2_reserve_scale(scenario.pools, descriptor) // 4, 16)
        _, delta = pools_mod.best_input_search(descriptor, scenario.pools, 1, hi)
        n = descriptor.n_hops
        by_length[n] = max(by_length.get(n, 0), delta)
    short = max((d for n, d in by_length.items() if n <= 2), default=0)
    long_ = max((d for n, d in by_length.items() if n >= 3), default=0)
    best = max(by_length.values())
    peak = scenario.opportunity.peak_value

    def value_at(agent: BuilderAgent, t: Fraction) -> int:
        base = {Strategy.SHORT_HOP: short, Strategy.LONG_HOP: long_, Strategy.MIXED: best}[agent.strategy]
        if base <= 0 or peak <= 0:
            return 0
        remaining = Fraction(scenario.opportunity.value(t), peak)
        return int(base * remaining)

    return value_at


def _v2_reserve_scale(pools: Mapping[bytes, "pools_mod.PoolState"], descriptor: PathDescriptor) -> int:
    reserves = []
    for address in descriptor.pools:
        pool = pools[address]
        if pool.kind is pools_mod.PoolKind.V2:
            reserves.append(min(pool.reserve0, pool.reserve1))
        else:
            reserves.append(pool.liquidity)
    return min(reserves)


def enumerate_cycles(
    pools: Mapping[bytes, "pools_mod.PoolState"],
    base_symbol: Optional[str] = None,
) -> list[PathDescriptor]:
    """All 2-hop and 3-hop cycles over the pool fixture, optionally anchored
    at a base token symbol."""
    tokens: dict[str, TokenId] = {}
    adjacency: dict[str, list[pools_mod.PoolState]] = {}
    for pool in pools.values():
        for token in (pool.token0, pool.token1):
            tokens[token.symbol] = token
            adjacency.setdefault(token.symbol, []).append(pool)

    bases = [base_symbol] if base_symbol else sorted(tokens)
    found: list[PathDescriptor] = []

    def descriptor_for(path_tokens: list[TokenId], path_pools: list[pools_mod.PoolState]) -> PathDescriptor:
        type_flags = tuple(1 if p.kind is pools_mod.PoolKind.V2 else 0 for p in path_pools)
        dir_flags = tuple(0 if t == p.token0 else 1 for t, p in zip(path_tokens, path_pools))
        return PathDescriptor(
            tokens=tuple(path_tokens),
            pools=tuple(p.address for p in path_pools),
            pool_type_flags=type_flags,
            direction_flags=dir_flags,
        )

    for base in bases:
        if base not in tokens:
            continue
        start = tokens[base]
        for p1 in adjacency[base]:
            mid = p1.other(start)
            for p2 in adjacency[mid.symbol]:
                if p2.address == p1.address or not p2.has_token(start):
                    continue
                found.append(descriptor_for([start, mid, start], [p1, p2]))
            for p2 in adjacency[mid.symbol]:
                if p2.address == p1.address or p2.has_token(start):
                    continue
                far = p2.other(mid)
                for p3 in adjacency[far.symbol]:
                    if p3.address in (p1.address, p2.address) or not p3.has_token(start):
                        continue
                    found.append(descriptor_for([start, mid, far, start], [p1, p2, p3]))
    return found


@dataclass(frozen=True)
class BuilderSummary:
    builder_id: str
    wins: int
    win_share: Fraction
    profit: int
    proposer_revenue: int


@dataclass(frozen=True)
class CampaignSummary:
    n_slots: int
    builders: tuple[BuilderSummary, ...]
    fallback_rate: Fraction
    total_proposer_revenue: int


@dataclass
class CampaignResult:
    outcomes: list[SlotOutcome]
    summary: CampaignSummary


def run_campaign(scenario: SimScenario, n_slots: int, rng_seed: int) -> CampaignResult:
    """Run sequential slots with round-robin proposers and per-proposer,
    time-limited blacklists."""
    if n_slots < 1:
        raise ConfigError("n_slots must be >= 1")
    bid_value_fn = _embodied_bid_value_fn(scenario) if scenario.pools is not None else None
    blacklists: list[dict[str, int]] = [dict() for _ in range(scenario.proposer_count)]
    outcomes: list[SlotOutcome] = []
    for height in range(n_slots):
        proposer_idx = height % scenario.proposer_count
        active_blacklist = frozenset(
            builder for builder, expiry in blacklists[proposer_idx].items() if expiry > height
        )
        if scenario.protocol is Protocol.BSC_DIRECT:
            outcome = run_slot_bsc(
                scenario.builders,
                scenario.proposer,
                scenario.opportunity,
                rng_seed,
                height=height,
                base_compute_ms=scenario.base_compute_ms,
                blacklisted=active_blacklist,
                bid_value_fn=bid_value_fn,
            )
            for offender in outcome.blacklist_events:
                blacklists[proposer_idx][offender] = height + scenario.proposer.blacklist_slots
        else:
            outcome = run_slot_eth(
                scenario.builders,
                scenario.relay,
                scenario.proposer,
                scenario.opportunity,
                rng_seed,
                height=height,
                base_compute_ms=scenario.base_compute_ms,
                bid_value_fn=bid_value_fn,
            )
        outcomes.append(outcome)

    wins: dict[str, int] = {b.id: 0 for b in scenario.builders}
    profit: dict[str, int] = {b.id: 0 for b in scenario.builders}
    revenue: dict[str, int] = {b.id: 0 for b in scenario.builders}
    fallbacks = 0
    for outcome in outcomes:
        if outcome.fallback_used:
            fallbacks += 1
            continue
        wins[outcome.winner] += 1
        profit[outcome.winner] += outcome.realized_builder_profit
        revenue[outcome.winner] += outcome.proposer_payment
    builders = tuple(
        BuilderSummary(
            builder_id=bid,
            wins=wins[bid],
            win_share=Fraction(wins[bid], n_slots),
            profit=profit[bid],
            proposer_revenue=revenue[bid],
        )
        for bid in sorted(wins)
    )
    summary = CampaignSummary(
        n_slots=n_slots,
        builders=builders,
        fallback_rate=Fraction(fallbacks, n_slots),
        total_proposer_revenue=sum(revenue.values()),
    )
    return CampaignResult(outcomes=outcomes, summary=summary)
