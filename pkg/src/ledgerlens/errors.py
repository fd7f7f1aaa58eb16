"""Exception types shared across the package."""


class LedgerLensError(Exception):
    """Base class for all ledgerlens errors."""


class MalformedRecord(LedgerLensError):
    """A record line could not be parsed or is missing a required field."""

    def __init__(self, field: str, line_no: int | None = None, detail: str = ""):
        self.field = field
        self.line_no = line_no
        msg = f"malformed record: field '{field}'"
        if line_no is not None:
            msg += f" (line {line_no})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class InvalidField(LedgerLensError):
    """A field parsed but violates a format or range constraint."""

    def __init__(self, field: str, line_no: int | None = None, detail: str = ""):
        self.field = field
        self.line_no = line_no
        msg = f"invalid field '{field}'"
        if line_no is not None:
            msg += f" (line {line_no})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DuplicateTxId(LedgerLensError):
    def __init__(self, tx_id: str):
        self.tx_id = tx_id
        super().__init__(f"duplicate tx_id: {tx_id}")


class IoFailure(LedgerLensError):
    pass


class UnknownAddress(LedgerLensError):
    def __init__(self, addr: str):
        self.addr = addr
        super().__init__(f"unknown address: {addr}")


class UnknownTxId(LedgerLensError):
    def __init__(self, tx_id: str):
        self.tx_id = tx_id
        super().__init__(f"unknown tx_id: {tx_id}")


class ContextMismatch(LedgerLensError):
    pass


class EmptySequence(LedgerLensError):
    pass


class UnorderedSequence(LedgerLensError):
    pass


class DimensionMismatch(LedgerLensError):
    pass


class ZeroVector(LedgerLensError):
    pass


class EmptySubgraph(LedgerLensError):
    pass


class EmptyText(LedgerLensError):
    pass


class EmptyIndex(LedgerLensError):
    pass


class IndexNotReady(LedgerLensError):
    pass


class BackendUnavailable(LedgerLensError):
    pass


class BackendTimeout(LedgerLensError):
    pass


class NoPlantedPatterns(LedgerLensError):
    pass
