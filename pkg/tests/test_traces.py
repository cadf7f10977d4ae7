"""Trace model: parsing, canonical serialization, labels, invariants."""

import io
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mevforge import fixtures
from mevforge.traces import (
    BuilderLabel,
    DuplicateLabelError,
    EventKind,
    LabelSet,
    ParseStats,
    PathDescriptor,
    TokenId,
    TraceEvent,
    TraceParseError,
    Transaction,
    format_address,
    label_builder,
    mark_pool_sinks,
    parse_address,
    parse_trace_file,
    serialize_transactions,
)

import strategies

DATA = Path(__file__).resolve().parent.parent / "data"


def test_worked_example_file_parses_to_five_events():
    with open(DATA / "worked_example_trace.ndjson", encoding="utf-8") as fh:
        txs = parse_trace_file(fh)
    assert len(txs) == 1
    tx = txs[0]
    assert len(tx.events) == 5
    kinds = [e.kind for e in tx.events]
    assert kinds == [EventKind.SWAP] * 3 + [EventKind.TRANSFER, EventKind.INTERNAL]
    assert tx.events[0].token_in.symbol == "USDT"
    assert tx.events[0].amount_in == 1_000_000


def test_empty_stream_parses_to_empty_list():
    assert parse_trace_file(io.StringIO("")) == []


def test_generated_corpus_round_trips_identically():
    corpus = fixtures.gen_trace_corpus(seed=11, n_transactions=1000)
    text = serialize_transactions(corpus.transactions)
    reparsed = parse_trace_file(io.StringIO(text))
    assert len(reparsed) == 1000
    assert reparsed == corpus.transactions
    assert serialize_transactions(reparsed) == text


@settings(max_examples=100)
@given(txs=st.lists(strategies.transactions(), max_size=5))
def test_round_trip_property(txs):
    text = serialize_transactions(txs)
    assert parse_trace_file(io.StringIO(text)) == txs


def test_parse_normalizes_whitespace_variants():
    corpus = fixtures.gen_trace_corpus(seed=3, n_transactions=5)
    canonical = serialize_transactions(corpus.transactions)
    import json

    loose_lines = [json.dumps(json.loads(line), indent=None, separators=(", ", ": ")) for line in canonical.splitlines()]
    loose = "\n\n".join(loose_lines) + "\n"
    assert serialize_transactions(parse_trace_file(io.StringIO(loose))) == canonical


def test_parse_preserves_event_order():
    corpus = fixtures.gen_trace_corpus(seed=5, n_transactions=50)
    text = serialize_transactions(corpus.transactions)
    for original, parsed in zip(corpus.transactions, parse_trace_file(io.StringIO(text))):
        assert [e.index for e in parsed.events] == list(range(len(parsed.events)))
        assert [e.kind for e in parsed.events] == [e.kind for e in original.events]


def test_malformed_line_reports_line_number():
    good = serialize_transactions(fixtures.gen_trace_corpus(seed=1, n_transactions=1).transactions)
    stream = io.StringIO(good + "{not json\n")
    with pytest.raises(TraceParseError) as excinfo:
        parse_trace_file(stream)
    assert excinfo.value.line_no == 2
    assert "line 2" in str(excinfo.value)


def test_missing_field_reports_line_number():
    with pytest.raises(TraceParseError) as excinfo:
        parse_trace_file(io.StringIO('{"hash": "0x' + "00" * 32 + '"}\n'))
    assert excinfo.value.line_no == 1


def test_unknown_event_kind_skipped_with_counter():
    corpus = fixtures.gen_trace_corpus(seed=2, n_transactions=1)
    import json

    line = serialize_transactions(corpus.transactions).strip()
    obj = json.loads(line)
    obj["events"].insert(0, {"kind": "mint", "pool": "0x" + "00" * 20})
    stats = ParseStats()
    txs = parse_trace_file(io.StringIO(json.dumps(obj) + "\n"), stats)
    assert stats.unknown_events == 1
    assert len(txs) == 1
    assert len(txs[0].events) == len(corpus.transactions[0].events)


@given(tx=strategies.transactions())
def test_event_kind_invariants_hold_after_round_trip(tx):
    for event in tx.events:
        if event.kind is EventKind.SWAP:
            assert event.pool is not None and event.token_in != event.token_out
        if event.kind in (EventKind.TRANSFER, EventKind.INTERNAL):
            assert event.to is not None and event.amount is not None


def test_swap_event_requires_distinct_tokens():
    token = TokenId("AAA", bytes(20), 18)
    with pytest.raises(ValueError):
        TraceEvent(kind=EventKind.SWAP, index=0, pool=bytes(20), token_in=token, token_out=token, amount_in=1, amount_out=1)


def test_transfer_requires_to_and_amount():
    with pytest.raises(ValueError):
        TraceEvent(kind=EventKind.TRANSFER, index=0, to=bytes(20))


def test_transaction_rejects_unsorted_indices():
    token_a = TokenId("AAA", bytes(20), 18)
    token_b = TokenId("BBB", bytes([1]) * 20, 18)
    events = (
        TraceEvent(kind=EventKind.SWAP, index=1, pool=bytes(20), token_in=token_a, token_out=token_b, amount_in=1, amount_out=1),
        TraceEvent(kind=EventKind.SWAP, index=0, pool=bytes(20), token_in=token_b, token_out=token_a, amount_in=1, amount_out=1),
    )
    with pytest.raises(ValueError):
        Transaction(hash=bytes(32), block_number=0, initiator=bytes(20), events=events, gas_used=0, gas_price=0)


def test_token_decimals_bounded():
    with pytest.raises(ValueError):
        TokenId("AAA", bytes(20), 37)


def test_address_parsing_is_canonical():
    raw = parse_address("0xAbCd" + "00" * 18)
    assert format_address(raw) == "0xabcd" + "00" * 18
    with pytest.raises(ValueError):
        parse_address("0x1234")


# -- labels -----------------------------------------------------------------


def test_builder_registry_lookup_by_address():
    with open(DATA / "builder_labels.csv", encoding="utf-8") as fh:
        labels = LabelSet.from_csv(fh)
    found = label_builder(parse_address("0x487e5dfe70119c1b320b8219b190a6fa95a5bb48"), labels)
    assert found is not None
    assert found.brand == "48Club"
    assert found.instance_name == "48Club-puissant-1"


def test_unlabeled_address_returns_none():
    labels = LabelSet([BuilderLabel("X", "x-1", bytes(20))])
    assert label_builder(bytes([7]) * 20, labels) is None


def test_duplicate_address_across_brands_fails_at_load():
    addr = bytes([9]) * 20
    with pytest.raises(DuplicateLabelError):
        LabelSet([BuilderLabel("A", "a-1", addr), BuilderLabel("B", "b-1", addr)])


def test_label_csv_requires_header():
    with pytest.raises(ValueError):
        LabelSet.from_csv(io.StringIO("A,a-1,0x" + "00" * 20 + "\n"))


# -- path descriptors and pool-sink heuristic --------------------------------


def test_path_descriptor_lengths_and_cycle_flag():
    a = TokenId("AAA", bytes(20), 18)
    b = TokenId("BBB", bytes([1]) * 20, 18)
    descriptor = PathDescriptor(tokens=(a, b, a), pools=(bytes(20), bytes([1]) * 20), pool_type_flags=(1, 1), direction_flags=(0, 1))
    assert descriptor.n_hops == 2 and descriptor.is_cycle
    open_path = PathDescriptor(tokens=(a, b), pools=(bytes(20),), pool_type_flags=(1,), direction_flags=(0,))
    assert not open_path.is_cycle
    with pytest.raises(ValueError):
        PathDescriptor(tokens=(a, b, a), pools=(bytes(20),), pool_type_flags=(1,), direction_flags=(0,))


def test_mark_pool_sinks_flags_transfer_into_seen_pool():
    a = TokenId("AAA", bytes(20), 18)
    b = TokenId("BBB", bytes([1]) * 20, 18)
    pool = bytes([5]) * 20
    events = (
        TraceEvent(kind=EventKind.SWAP, index=0, pool=pool, token_in=a, token_out=b, amount_in=10, amount_out=9),
        TraceEvent(kind=EventKind.TRANSFER, index=1, to=pool, amount=3),
        TraceEvent(kind=EventKind.TRANSFER, index=2, to=bytes([6]) * 20, amount=4),
    )
    tx = Transaction(hash=bytes(32), block_number=0, initiator=bytes(20), events=events, gas_used=0, gas_price=0)
    marked = mark_pool_sinks(tx)
    assert marked.events[1].pool_sink is True
    assert marked.events[2].pool_sink is False
    assert mark_pool_sinks(marked) == marked
