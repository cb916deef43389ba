"""The storage workflow: upload a file into DNA beads, download it back.

Upload order (one atomic ledger transaction at the end):

1. hash the plaintext (SHA-256 -- the content address and later integrity
   check), reject duplicates;
2. optionally encrypt with the caller's key sequence;
3. fragment into segments, fountain-encode ``ceil(overhead * K)`` droplets,
   render each as a screened oligo;
4. deal oligos round-robin into up to ``beads_per_file`` beads and run each
   through the synthesis error channel;
5. place every bead on ``replication`` nodes;
6. append one record-create transaction carrying hash, owner, timestamp,
   the full placement map and the codec parameters.

Download reverses it: permission check against the folded record, retrieve
each bead from any online replica, sequence at the configured coverage,
collapse reads to consensus oligos, parse (CRC-filtering) into droplets,
peel, optionally decrypt, and refuse to return bytes whose hash does not
match the record.

When constructed with a state directory the engine persists the chain
(append-only ``chain.jsonl``) and bead contents as they are created, so a
restarted process can rebuild the exact same state.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from . import ledger
from .dna_codec import keystream_encrypt
from .errors import (
    ChecksumMismatch,
    DecodeFailed,
    DuplicateFile,
    EmptyInput,
    InsufficientDroplets,
    IntegrityMismatch,
    NotOwner,
    PermissionDenied,
    ScreenStarvation,
    UnknownFile,
)
from .fountain import (
    DEFAULT_SCREEN,
    OligoScreen,
    decode,
    droplet_to_oligo,
    encode_droplets,
    fragment,
    oligo_to_droplet,
    recoverable_segments,
)
from .ledger import Block, CodecParams, FileRecord, Validator
from .network import Cluster, PlacementPolicy
from .rng import derive_seed
from .synthesis import Bead, ErrorModel, Manifest, consensus_reads, save_bead, sequence_bead, synthesize


@dataclass(frozen=True)
class StoreParams:
    """Every knob of the storage pipeline, with desk-scale defaults."""

    segment_size: int = 32
    overhead: float = 1.7
    beads_per_file: int = 4
    replication: int = 3
    error_model: ErrorModel = field(default_factory=ErrorModel)
    coverage: int = 5
    key: str | None = None
    screen: OligoScreen | None = DEFAULT_SCREEN

    def __post_init__(self):
        if self.segment_size < 1 or self.beads_per_file < 1 or self.replication < 1 or self.coverage < 1:
            raise ValueError("segment_size, beads_per_file, replication and coverage must be positive")
        if self.overhead < 1.0:
            raise ValueError("droplet overhead factor must be at least 1")

    def to_dict(self) -> dict:
        return {
            "segment_size": self.segment_size,
            "overhead": self.overhead,
            "beads_per_file": self.beads_per_file,
            "replication": self.replication,
            "error_model": {
                "substitution_rate": self.error_model.substitution_rate,
                "oligo_dropout_rate": self.error_model.oligo_dropout_rate,
                "rng_seed": self.error_model.rng_seed,
            },
            "coverage": self.coverage,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> StoreParams:
        em = raw.get("error_model", {})
        return cls(
            segment_size=raw.get("segment_size", 32),
            overhead=raw.get("overhead", 1.7),
            beads_per_file=raw.get("beads_per_file", 4),
            replication=raw.get("replication", 3),
            error_model=ErrorModel(
                em.get("substitution_rate", 0.0),
                em.get("oligo_dropout_rate", 0.0),
                em.get("rng_seed", 0),
            ),
            coverage=raw.get("coverage", 5),
        )


@dataclass(frozen=True)
class UploadReceipt:
    file_hash: str
    block_index: int
    bead_ids: list[str]
    placement: list[tuple[str, str]]

    def to_dict(self) -> dict:
        return {
            "file_hash": self.file_hash,
            "block_index": self.block_index,
            "bead_ids": list(self.bead_ids),
            "placement": [[b, n] for b, n in self.placement],
        }


class StorageContract:
    """Single-writer workflow engine over the ledger, cluster and codecs."""

    def __init__(
        self,
        cluster: Cluster,
        validators: list[Validator],
        defaults: StoreParams | None = None,
        chain: list[Block] | None = None,
        state_dir: Path | str | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self.cluster = cluster
        self.validators = validators
        self.defaults = defaults or StoreParams()
        self.chain: list[Block] = chain if chain is not None else [ledger.genesis()]
        self.state_dir = Path(state_dir) if state_dir is not None else None
        self.clock = clock
        if self.state_dir is not None:
            self.state_dir.mkdir(parents=True, exist_ok=True)
            chain_path = self.state_dir / "chain.jsonl"
            if not chain_path.exists():
                ledger.save_chain(chain_path, self.chain)

    # --- persistence helpers ---

    def _persist_block(self, block: Block) -> None:
        if self.state_dir is not None:
            ledger.append_chain_file(self.state_dir / "chain.jsonl", block)

    def _persist_bead(self, bead: Bead) -> None:
        if self.state_dir is not None:
            save_bead(self.state_dir / "beads", bead)

    # --- workflow operations ---

    _ENCODE_SEEDS = 4
    _ENCODE_BOOSTS = (1.0, 1.15, 1.3)

    def _encode_decodable(self, segments, count, file_hash, params) -> list:
        """Encode droplets whose index sets provably peel under zero noise.

        Peeling can stall for an unlucky seed at small K even above the
        nominal overhead, and that is only fixable before synthesis. The
        code is rateless, so a stalled set is first topped up with extra
        droplets, then re-derived from the next seed. A screen that starves
        (degenerate content such as one all-zero-padded segment) falls back
        to unscreened encoding.
        """
        k = len(segments)
        best = None
        best_recovered = -1
        for attempt in range(self._ENCODE_SEEDS):
            seed = derive_seed("droplets", file_hash, attempt)
            for boost in self._ENCODE_BOOSTS:
                boosted = math.ceil(count * boost)
                try:
                    droplets = encode_droplets(segments, boosted, seed, screen=params.screen)
                except ScreenStarvation:
                    droplets = encode_droplets(segments, boosted, seed, screen=None)
                recovered = recoverable_segments(droplets, k)
                if recovered == k:
                    return droplets
                if recovered > best_recovered:
                    best, best_recovered = droplets, recovered
        return best

    def upload_file(self, owner: str, data: bytes, params: StoreParams | None = None) -> UploadReceipt:
        """Run the whole encode/synthesize/place/record pipeline on ``data``."""
        if not data:
            raise EmptyInput("cannot upload an empty file")
        if not owner:
            raise ValueError("owner identity must be non-empty")
        params = params or self.defaults

        file_hash = hashlib.sha256(data).hexdigest()
        if file_hash in ledger.fold_records(self.chain):
            raise DuplicateFile(f"file {file_hash} is already recorded")

        payload = keystream_encrypt(data, params.key) if params.key else data
        segments, original_length = fragment(payload, params.segment_size)
        k = len(segments)
        count = max(k, math.ceil(k * params.overhead))
        droplets = self._encode_decodable(segments, count, file_hash, params)
        oligos = [droplet_to_oligo(d) for d in droplets]

        # Round-robin assignment; tiny files get fewer beads rather than empty ones.
        n_beads = min(params.beads_per_file, len(oligos))
        beads = []
        for i in range(n_beads):
            bead_oligos = oligos[i::n_beads]
            manifest = Manifest(k, params.segment_size, original_length, len(bead_oligos))
            beads.append(synthesize(bead_oligos, manifest, params.error_model, f"{file_hash[:16]}.{i}"))

        placement = self.cluster.place_beads(
            beads, PlacementPolicy(params.replication), derive_seed("placement", file_hash)
        )
        for bead in beads:
            self._persist_bead(bead)

        record = FileRecord(
            file_hash=file_hash,
            owner=owner,
            timestamp=int(self.clock()),
            bead_locations=placement,
            permissions=set(),
            codec_params=CodecParams(k, params.segment_size, original_length),
        )
        block = ledger.append_block(
            self.chain, [ledger.record_create(record)], self.validators, int(self.clock())
        )
        self._persist_block(block)
        return UploadReceipt(file_hash, block.index, [b.bead_id for b in beads], placement)

    def download_file(self, requester: str, file_hash: str, key: str | None = None) -> bytes:
        """Reconstruct a stored file, enforcing permissions and integrity."""
        record = ledger.find_record(self.chain, file_hash)
        if not record.is_permitted(requester):
            raise PermissionDenied(f"{requester} may not read {file_hash}")
        if record.codec_params is None:
            raise UnknownFile(f"record for {file_hash} carries no codec parameters")
        cp = record.codec_params

        per_bead: dict[str, list[tuple[str, str]]] = {}
        for bead_id, node_id in record.bead_locations:
            per_bead.setdefault(bead_id, []).append((bead_id, node_id))

        droplets = []
        seen_seeds: set[int] = set()
        for bead_id, locations in per_bead.items():
            bead = self.cluster.retrieve_bead(bead_id, locations)
            if not bead.oligos:
                continue  # every molecule of this bead dropped out at synthesis
            reads = sequence_bead(bead, self.defaults.coverage, self.defaults.error_model)
            for oligo in consensus_reads(reads, cp.segment_size):
                try:
                    droplet = oligo_to_droplet(oligo, cp.segment_size)
                except ChecksumMismatch:
                    continue
                if droplet.seed not in seen_seeds:
                    seen_seeds.add(droplet.seed)
                    droplets.append(droplet)

        try:
            data = decode(droplets, cp.k, cp.segment_size, cp.original_length)
        except InsufficientDroplets as exc:
            raise DecodeFailed(exc.recovered, exc.needed) from exc
        if key:
            data = keystream_encrypt(data, key)
        if hashlib.sha256(data).hexdigest() != file_hash:
            raise IntegrityMismatch(f"decoded bytes do not hash to {file_hash}")
        return data

    def _permission_change(self, owner: str, file_hash: str, grantee: str, make_tx) -> int:
        record = ledger.find_record(self.chain, file_hash)
        if record.owner != owner:
            raise NotOwner(f"{owner} does not own {file_hash}")
        block = ledger.append_block(
            self.chain, [make_tx(file_hash, owner, grantee)], self.validators, int(self.clock())
        )
        self._persist_block(block)
        return block.index

    def grant_permission(self, owner: str, file_hash: str, grantee: str) -> int:
        """Append a grant transaction; returns the recording block height."""
        return self._permission_change(owner, file_hash, grantee, ledger.permission_grant)

    def revoke_permission(self, owner: str, file_hash: str, grantee: str) -> int:
        """Append a revoke transaction; returns the recording block height."""
        return self._permission_change(owner, file_hash, grantee, ledger.permission_revoke)

    def find_record(self, file_hash: str) -> FileRecord:
        return ledger.find_record(self.chain, file_hash)

    def with_key(self, key: str | None) -> StoreParams:
        """The default parameters with a per-request encryption key."""
        return replace(self.defaults, key=key)
