"""Append-only hash-linked ledger of file records with stake-weighted proposers.

Blocks serialize to *canonical JSON* -- UTF-8, lexicographically sorted
keys, no insignificant whitespace -- and ``block_hash`` is the SHA-256 hex
of the canonical serialization of every field except the hash itself.
Identities are opaque strings; there are no signatures, one proposer is
picked deterministically per block, and forks do not exist. Three
transaction types are understood::

    {"type": "record-create",    "record": {...FileRecord...}}
    {"type": "permission-grant",  "file_hash": h, "issuer": who, "grantee": whom}
    {"type": "permission-revoke", "file_hash": h, "issuer": who, "grantee": whom}

A record-create is valid while its file hash is unseen; grants and revokes
are valid only from the record owner. The chain persists as ``chain.jsonl``,
one canonical block per line, and reloading reproduces identical hashes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidTransaction, NoStake, StaleChain, UnknownFile

GENESIS_PREV_HASH = "0" * 64
GENESIS_VALIDATOR = "genesis"

_BLOCK_KEYS = {"index", "prev_hash", "timestamp", "validator", "transactions", "block_hash"}


@dataclass(frozen=True)
class Validator:
    id: str
    stake: int


@dataclass(frozen=True)
class CodecParams:
    k: int
    segment_size: int
    original_length: int

    def to_dict(self) -> dict:
        return {"K": self.k, "segment_size": self.segment_size, "original_length": self.original_length}

    @classmethod
    def from_dict(cls, raw: dict) -> CodecParams:
        return cls(raw["K"], raw["segment_size"], raw["original_length"])


@dataclass
class FileRecord:
    """Ledger view of one stored file.

    ``permissions`` holds explicitly granted readers; the owner is always
    implicitly permitted. ``bead_locations`` is the placement map written
    at upload time, ordered (bead_id, node_id) pairs.
    """

    file_hash: str
    owner: str
    timestamp: int
    bead_locations: list[tuple[str, str]]
    permissions: set[str] = field(default_factory=set)
    codec_params: CodecParams | None = None

    def is_permitted(self, identity: str) -> bool:
        return identity == self.owner or identity in self.permissions

    def to_dict(self) -> dict:
        return {
            "file_hash": self.file_hash,
            "owner": self.owner,
            "timestamp": self.timestamp,
            "bead_locations": [[b, n] for b, n in self.bead_locations],
            "permissions": sorted(self.permissions),
            "codec_params": self.codec_params.to_dict() if self.codec_params else None,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> FileRecord:
        return cls(
            file_hash=raw["file_hash"],
            owner=raw["owner"],
            timestamp=raw["timestamp"],
            bead_locations=[(b, n) for b, n in raw["bead_locations"]],
            permissions=set(raw["permissions"]),
            codec_params=CodecParams.from_dict(raw["codec_params"]) if raw.get("codec_params") else None,
        )


@dataclass(frozen=True)
class Block:
    index: int
    prev_hash: str
    timestamp: int
    validator: str
    transactions: tuple[dict, ...]
    block_hash: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "prev_hash": self.prev_hash,
            "timestamp": self.timestamp,
            "validator": self.validator,
            "transactions": list(self.transactions),
            "block_hash": self.block_hash,
        }


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode("utf-8")


def compute_block_hash(index: int, prev_hash: str, timestamp: int, validator: str, transactions: list[dict]) -> str:
    payload = {
        "index": index,
        "prev_hash": prev_hash,
        "timestamp": timestamp,
        "validator": validator,
        "transactions": transactions,
    }
    return hashlib.sha256(canonical_json(payload)).hexdigest()


def record_create(record: FileRecord) -> dict:
    return {"type": "record-create", "record": record.to_dict()}


def permission_grant(file_hash: str, issuer: str, grantee: str) -> dict:
    return {"type": "permission-grant", "file_hash": file_hash, "issuer": issuer, "grantee": grantee}


def permission_revoke(file_hash: str, issuer: str, grantee: str) -> dict:
    return {"type": "permission-revoke", "file_hash": file_hash, "issuer": issuer, "grantee": grantee}


def genesis() -> Block:
    """Height-0 block: all-zero parent, no transactions, fixed timestamp."""
    block_hash = compute_block_hash(0, GENESIS_PREV_HASH, 0, GENESIS_VALIDATOR, [])
    return Block(0, GENESIS_PREV_HASH, 0, GENESIS_VALIDATOR, (), block_hash)


def select_validator(validators: list[Validator], prev_block_hash: str) -> str:
    """Deterministic stake-weighted pick.

    The first 8 bytes of SHA-256 over the previous hash (as ASCII hex) are
    read as a big-endian integer t; t mod total_stake indexes one stake
    unit under id-lexicographic cumulative ordering.
    """
    total = sum(v.stake for v in validators)
    if total <= 0:
        raise NoStake("total registered stake must be positive")
    t = int.from_bytes(hashlib.sha256(prev_block_hash.encode("ascii")).digest()[:8], "big") % total
    acc = 0
    for v in sorted(validators, key=lambda v: v.id):
        acc += v.stake
        if t < acc:
            return v.id
    raise AssertionError("unreachable: cumulative stake exhausted")


# --- transaction folding ---------------------------------------------------------


def _apply_transaction(state: dict[str, FileRecord], tx: dict) -> tuple[bool, str]:
    """Validate ``tx`` against ``state`` and apply it when valid."""
    tx_type = tx.get("type")
    if tx_type == "record-create":
        raw = tx.get("record")
        if not isinstance(raw, dict):
            return False, "MalformedTransaction"
        try:
            record = FileRecord.from_dict(raw)
        except (KeyError, TypeError):
            return False, "MalformedTransaction"
        if record.file_hash in state:
            return False, "DuplicateFile"
        state[record.file_hash] = record
        return True, "ok"
    if tx_type in ("permission-grant", "permission-revoke"):
        try:
            file_hash, issuer, grantee = tx["file_hash"], tx["issuer"], tx["grantee"]
        except KeyError:
            return False, "MalformedTransaction"
        record = state.get(file_hash)
        if record is None:
            return False, "UnknownFile"
        if issuer != record.owner:
            return False, "NotOwner"
        if tx_type == "permission-grant":
            record.permissions.add(grantee)
        else:
            record.permissions.discard(grantee)
        return True, "ok"
    return False, "MalformedTransaction"


def fold_records(chain: list[Block]) -> dict[str, FileRecord]:
    """Replay the chain into its effective file_hash -> record state."""
    state: dict[str, FileRecord] = {}
    for block in chain:
        for tx in block.transactions:
            _apply_transaction(state, tx)
    return state


def validate_transaction(chain: list[Block], tx: dict) -> tuple[bool, str]:
    """Would ``tx`` be valid appended right after ``chain``? Returns (ok, reason)."""
    state = fold_records(chain)
    return _apply_transaction(state, tx)


def append_block(chain: list[Block], transactions: list[dict], validators: list[Validator], timestamp: int) -> Block:
    """Extend the chain by one proposer-selected block holding ``transactions``.

    The chain is re-verified first; each transaction must be valid in its
    prefix context (earlier transactions of the same block included).
    """
    ok, height = verify_chain(chain)
    if not ok:
        raise StaleChain(height)
    state = fold_records(chain)
    staged = []
    for i, tx in enumerate(transactions):
        valid, reason = _apply_transaction(state, tx)
        if not valid:
            raise InvalidTransaction(i, reason)
        staged.append(tx)
    tip = chain[-1]
    validator = select_validator(validators, tip.block_hash)
    index = tip.index + 1
    block_hash = compute_block_hash(index, tip.block_hash, timestamp, validator, staged)
    block = Block(index, tip.block_hash, timestamp, validator, tuple(staged), block_hash)
    chain.append(block)
    return block


def verify_chain(chain: list[Block]) -> tuple[bool, int | None]:
    """Full structural and transactional verification.

    Returns (True, None) or (False, height-of-first-failure).
    """
    if not chain:
        return False, 0
    state: dict[str, FileRecord] = {}
    for i, block in enumerate(chain):
        if block.index != i:
            return False, i
        if i == 0:
            if block.prev_hash != GENESIS_PREV_HASH or block.transactions or block.validator != GENESIS_VALIDATOR:
                return False, 0
        elif block.prev_hash != chain[i - 1].block_hash:
            return False, i
        recomputed = compute_block_hash(
            block.index, block.prev_hash, block.timestamp, block.validator, list(block.transactions)
        )
        if recomputed != block.block_hash:
            return False, i
        for tx in block.transactions:
            valid, _ = _apply_transaction(state, tx)
            if not valid:
                return False, i
    return True, None


def find_record(chain: list[Block], file_hash: str) -> FileRecord:
    """The record for ``file_hash`` with grants/revokes folded in chain order."""
    state = fold_records(chain)
    record = state.get(file_hash)
    if record is None:
        raise UnknownFile(f"no ledger record for {file_hash}")
    return record


# --- persistence: chain.jsonl ------------------------------------------------------


def block_line(block: Block) -> bytes:
    return canonical_json(block.to_dict()) + b"\n"


def save_chain(path: Path | str, chain: list[Block]) -> None:
    Path(path).write_bytes(b"".join(block_line(b) for b in chain))


def append_chain_file(path: Path | str, block: Block) -> None:
    """Append one block line; the on-disk file stays append-only."""
    with open(path, "ab") as fh:
        fh.write(block_line(block))
        fh.flush()


def _parse_block_line(line: bytes) -> Block:
    raw = json.loads(line.decode("utf-8"))
    if not isinstance(raw, dict) or set(raw) != _BLOCK_KEYS:
        raise ValueError("block line has unexpected fields")
    block = Block(
        index=raw["index"],
        prev_hash=raw["prev_hash"],
        timestamp=raw["timestamp"],
        validator=raw["validator"],
        transactions=tuple(raw["transactions"]),
        block_hash=raw["block_hash"],
    )
    if canonical_json(block.to_dict()) != line:
        raise ValueError("block line is not in canonical form")
    return block


def _chain_lines(data: bytes) -> list[bytes]:
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    return lines


def load_chain(path: Path | str) -> list[Block]:
    """Load and fully verify a persisted chain; raises ValueError on tampering."""
    blocks = []
    for i, line in enumerate(_chain_lines(Path(path).read_bytes())):
        try:
            blocks.append(_parse_block_line(line))
        except (ValueError, KeyError, TypeError, UnicodeDecodeError) as exc:
            raise ValueError(f"chain line {i} is corrupt: {exc}") from exc
    ok, height = verify_chain(blocks)
    if not ok:
        raise ValueError(f"chain fails verification at height {height}")
    return blocks


def verify_chain_file(path: Path | str) -> tuple[bool, int | None]:
    """Byte-level verification of ``chain.jsonl``.

    Any deviation -- unparsable line, non-canonical bytes, broken hash or
    link, invalid transaction -- reports the height (line number) of the
    first failure.
    """
    try:
        data = Path(path).read_bytes()
    except OSError:
        return False, 0
    blocks = []
    for i, line in enumerate(_chain_lines(data)):
        try:
            blocks.append(_parse_block_line(line))
        except (ValueError, KeyError, TypeError, UnicodeDecodeError):
            return False, i
    return verify_chain(blocks)
