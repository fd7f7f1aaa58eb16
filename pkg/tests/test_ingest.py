import json

import numpy as np
import pytest

from ledgerlens.errors import DuplicateTxId, InvalidField, MalformedRecord
from ledgerlens.ingest import (
    load_corpus,
    load_store,
    parse_transaction_line,
    persist_corpus,
    transaction_to_line,
)

from conftest import addr, hex_id, make_tx, random_corpus

VALID = {
    "tx_id": hex_id(1),
    "from": addr(0xAB),
    "to": addr(0xCD),
    "value": "5",
    "timestamp": 1_700_000_000,
    "block": 10,
    "gas_used": 21_000,
    "tags": [],
}


def line(**overrides):
    obj = dict(VALID)
    obj.update(overrides)
    return json.dumps(obj)


def test_parse_normalizes_addresses():
    tx = parse_transaction_line(line(**{"from": addr(0xAB).upper().replace("0X", "0x")}))
    assert tx.from_addr == addr(0xAB)
    assert tx.tx_id == hex_id(1)
    assert tx.value == 5


def test_missing_value_is_malformed():
    obj = dict(VALID)
    del obj["value"]
    with pytest.raises(MalformedRecord) as exc:
        parse_transaction_line(json.dumps(obj))
    assert exc.value.field == "value"


def test_untagged_self_transfer_rejected():
    with pytest.raises(InvalidField) as exc:
        parse_transaction_line(line(to=VALID["from"]))
    assert exc.value.field == "to_addr"


def test_tagged_self_transfer_allowed():
    tx = parse_transaction_line(line(to=VALID["from"], tags=["self-transfer"]))
    assert tx.from_addr == tx.to_addr


@pytest.mark.parametrize(
    "overrides,field",
    [
        ({"tx_id": "0x123"}, "tx_id"),
        ({"from": "not-an-address"}, "from_addr"),
        ({"to": "0x" + "g" * 40}, "to_addr"),
        ({"timestamp": 0}, "timestamp"),
        ({"value": "-3"}, "value"),
        ({"value": "xyz"}, "value"),
    ],
)
def test_invalid_fields(overrides, field):
    with pytest.raises(InvalidField) as exc:
        parse_transaction_line(line(**overrides))
    assert exc.value.field == field


def test_garbage_line_is_malformed():
    with pytest.raises(MalformedRecord):
        parse_transaction_line("{not json")


def test_unknown_keys_ignored():
    tx = parse_transaction_line(line(extra="stuff"))
    assert tx.tx_id == hex_id(1)


def test_load_sorts_by_timestamp_then_id(tmp_path):
    lines = [
        line(tx_id=hex_id(3), timestamp=200),
        line(tx_id=hex_id(1), timestamp=100),
        line(tx_id=hex_id(2), timestamp=100),
    ]
    p = tmp_path / "tx.ndjson"
    p.write_text("\n".join(lines) + "\n")
    corpus = load_corpus(p)
    assert [t.tx_id for t in corpus.transactions] == [hex_id(1), hex_id(2), hex_id(3)]
    assert corpus.report.loaded == 3


def test_duplicate_tx_id_raises(tmp_path):
    p = tmp_path / "tx.ndjson"
    p.write_text(line() + "\n" + line() + "\n")
    with pytest.raises(DuplicateTxId) as exc:
        load_corpus(p)
    assert exc.value.tx_id == hex_id(1)


def test_bad_lines_counted_not_dropped_silently(tmp_path):
    p = tmp_path / "tx.ndjson"
    p.write_text(line() + "\n" + "garbage\n" + line(tx_id=hex_id(2)) + "\n")
    corpus = load_corpus(p)
    assert corpus.report.loaded == 2
    assert corpus.report.rejected == 1
    assert len(corpus.report.errors) == 1


def test_round_trip_equality(tmp_path, rng):
    corpus = random_corpus(rng, 200, with_events=True, with_meta=True)
    persist_corpus(corpus, tmp_path)
    loaded = load_store(tmp_path)
    assert loaded == corpus


def test_persist_idempotence(tmp_path, rng):
    corpus = random_corpus(rng, 100)
    d1 = tmp_path / "a"
    d2 = tmp_path / "b"
    persist_corpus(corpus, d1)
    persist_corpus(load_store(d1), d2)
    assert (d1 / "transactions.ndjson").read_bytes() == (
        d2 / "transactions.ndjson"
    ).read_bytes()


def test_persist_canonical_order(tmp_path):
    corpus_txs = [make_tx(2, 0, 1, timestamp=50), make_tx(1, 1, 2, timestamp=50)]
    from ledgerlens.ingest import Corpus

    persist_corpus(Corpus(transactions=corpus_txs), tmp_path)
    lines = (tmp_path / "transactions.ndjson").read_text().splitlines()
    keys = [(json.loads(l)["timestamp"], json.loads(l)["tx_id"]) for l in lines]
    assert keys == sorted(keys)


def test_empty_corpus_round_trip(tmp_path):
    from ledgerlens.ingest import Corpus

    persist_corpus(Corpus(), tmp_path)
    assert (tmp_path / "transactions.ndjson").read_text() == ""
    assert load_store(tmp_path).transactions == []


def test_value_exceeding_64_bits(tmp_path):
    big = 2**200
    tx = parse_transaction_line(line(value=str(big)))
    assert tx.value == big
    assert json.loads(transaction_to_line(tx))["value"] == str(big)
