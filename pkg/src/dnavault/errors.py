"""Exception types shared across the storage stack.

Every failure the library reports deliberately is a ``StorageError``
subclass, so callers (the REST service, the CLI) can map error classes to
status/exit codes without string matching.
"""

from __future__ import annotations


class StorageError(Exception):
    """Base class for all deliberate failures raised by this package."""


# --- codec ---------------------------------------------------------------

class LengthError(StorageError, ValueError):
    """A sequence or frame has a length the operation cannot accept."""


class EmptySequence(StorageError, ValueError):
    """An operation that needs at least one base got an empty sequence."""


class InvalidInput(StorageError, ValueError):
    """A numeric precondition (e.g. n >= 4) was violated."""


class NotFactorable(StorageError):
    """The rho walk exhausted its retries without a non-trivial factor."""

    def __init__(self, n: int, retries: int):
        super().__init__(f"no non-trivial factor of {n} found after {retries} retries")
        self.n = n
        self.retries = retries


class EmptyKey(StorageError, ValueError):
    """The keystream cipher requires a non-empty key sequence."""


# --- fountain coding -------------------------------------------------------

class EmptyInput(StorageError, ValueError):
    """Cannot fragment or upload zero bytes."""


class InsufficientDroplets(StorageError):
    """Peeling stalled before all segments were recovered."""

    def __init__(self, recovered: int, needed: int):
        super().__init__(f"peeling stalled: recovered {recovered} of {needed} segments")
        self.recovered = recovered
        self.needed = needed


class ChecksumMismatch(StorageError):
    """An oligo's embedded CRC-32 does not match its content."""


class ScreenStarvation(StorageError):
    """The oligo screen rejected candidates faster than the encoder's budget.

    Happens for degenerate content (e.g. a single mostly-zero segment whose
    every rendering carries a long homopolymer run)."""


# --- synthesis / sequencing -------------------------------------------------

class EmptyBead(StorageError):
    """Sequencing was asked to read a bead that holds no oligos."""


# --- ledger -----------------------------------------------------------------

class NoStake(StorageError):
    """Validator selection requires a positive total stake."""


class InvalidTransaction(StorageError):
    """A transaction failed contextual validation during block assembly."""

    def __init__(self, index: int, reason: str):
        super().__init__(f"transaction {index} invalid: {reason}")
        self.index = index
        self.reason = reason


class StaleChain(StorageError):
    """The chain handed to append_block does not verify."""

    def __init__(self, height: int | None):
        super().__init__(f"chain fails verification at height {height}")
        self.height = height


class UnknownFile(StorageError):
    """No ledger record exists for the requested file hash."""


# --- network -----------------------------------------------------------------

class InsufficientNodes(StorageError):
    """Fewer online nodes than the requested replication factor."""


class BeadUnavailable(StorageError):
    """Every node listed as hosting the bead is offline or lost it."""


class UnknownNode(StorageError):
    """The named node is not part of the cluster."""


# --- contract workflow --------------------------------------------------------

class DuplicateFile(StorageError):
    """A record for this content hash already exists on the ledger."""


class PermissionDenied(StorageError):
    """Requester is neither the owner nor on the permission list."""


class NotOwner(StorageError):
    """Permission changes may only be issued by the record owner."""


class DecodeFailed(StorageError):
    """Fountain decoding could not reconstruct the file."""

    def __init__(self, recovered: int, needed: int):
        super().__init__(f"decode failed: recovered {recovered} of {needed} segments")
        self.recovered = recovered
        self.needed = needed


class IntegrityMismatch(StorageError):
    """Decoded bytes hash to something other than the ledger record."""
