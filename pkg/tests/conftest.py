import numpy as np
import pytest

from ledgerlens.ingest import AccountMeta, Corpus, ExternalEvent, Transaction


def hex_id(n: int, width: int = 64) -> str:
    return "0x" + format(n, "x").rjust(width, "0")


def addr(n: int) -> str:
    return hex_id(n, width=40)


def make_tx(
    n: int,
    from_n: int,
    to_n: int,
    value: int = 10**18,
    timestamp: int = 1_700_000_000,
    block: int = 1,
    gas_used: int = 21_000,
    tags: tuple[str, ...] = (),
) -> Transaction:
    return Transaction(
        tx_id=hex_id(n),
        from_addr=addr(from_n),
        to_addr=addr(to_n),
        value=value,
        timestamp=timestamp,
        block=block,
        gas_used=gas_used,
        tags=tags,
    )


def random_corpus(
    rng: np.random.Generator,
    n_tx: int,
    n_addrs: int = 20,
    with_events: bool = False,
    with_meta: bool = False,
) -> Corpus:
    txs = []
    for i in range(n_tx):
        a, b = rng.choice(n_addrs, size=2, replace=False)
        txs.append(
            make_tx(
                n=int(rng.integers(0, 2**60)) * n_tx + i,
                from_n=int(a),
                to_n=int(b),
                value=int(rng.integers(0, 2**62)),
                timestamp=int(rng.integers(1, 2**31)),
                block=int(rng.integers(0, 10**7)),
                gas_used=int(rng.integers(21_000, 10**6)),
                tags=("wash",) if rng.random() < 0.1 else (),
            )
        )
    txs.sort(key=lambda t: t.sort_key)
    events = []
    if with_events:
        for j in range(3):
            start = int(rng.integers(1, 2**30))
            events.append(
                ExternalEvent(f"ev{j}", start, start + int(rng.integers(0, 2**30)), f"event {j}")
            )
    events.sort(key=lambda e: (e.start_ts, e.event_id))
    meta = []
    if with_meta:
        for j in range(min(5, n_addrs)):
            meta.append(AccountMeta(addr(j), (f"assoc{j}",), f"note {j}"))
    return Corpus(transactions=txs, events=events, meta=meta)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
