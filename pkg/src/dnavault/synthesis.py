"""Simulated synthesis of oligos into beads and noisy sequencing back out.

The error channel applies two effects, both driven by the deterministic
generator in :mod:`dnavault.rng`:

* whole-oligo dropout at synthesis time (the molecule was never made);
* independent per-base substitutions, at synthesis (corrupts the stored
  molecule) and again per sequencing read (read noise around whatever is
  stored).

Randomness contract (what a re-implementation must reproduce): with
``base = derive_seed(label, rng_seed, bead_id)`` and per-oligo stream seed
``substream(base, oligo_index)`` (label ``"synthesize"``) or per-read seed
``substream(substream(base, oligo_index), read_index)`` (label
``"sequence"``), each stream is an xorshift64* generator whose draws are
consumed in order: for synthesis one dropout draw first, then one draw per
base; for a read, one draw per base. A base substitutes when the draw u
satisfies ``u < floor(rate * 2**64)`` (rate >= 1 always substitutes), and
the replacement is ``(original + 1 + ((u >> 32) % 3)) % 4`` so it always
differs from the original. Reads are emitted round-major: every stored
oligo once at read index 0, then all again at index 1, so a lower coverage
is a prefix of a higher one.

Indels are out of scope; framing stays fixed-length so the consensus step
can vote position by position.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dna_codec import dna_to_bytes
from .errors import EmptyBead
from .fountain import OLIGO_HEADER_BYTES, read_oligo_file, write_oligo_file
from .rng import derive_seed, seed_states, step_states, substream_array

_CODE_OF_CHAR = np.zeros(256, dtype=np.uint8)
for _i, _c in enumerate(b"ACGT"):
    _CODE_OF_CHAR[_c] = _i
_CHAR_OF_CODE = np.frombuffer(b"ACGT", dtype=np.uint8)


@dataclass(frozen=True)
class ErrorModel:
    substitution_rate: float = 0.0
    oligo_dropout_rate: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("substitution_rate", "oligo_dropout_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {rate}")


@dataclass(frozen=True)
class Manifest:
    k: int
    segment_size: int
    original_length: int
    oligo_count: int


@dataclass
class Bead:
    """One simulated glass bead: an identified container of oligos."""

    bead_id: str
    oligos: list[str]
    manifest: Manifest


@dataclass
class ReadSet:
    reads: list[str]
    coverage: int


def _threshold(rate: float) -> int | None:
    """Integer comparison threshold for ``u < rate * 2**64``; None means never."""
    if rate <= 0.0:
        return None
    if rate >= 1.0:
        return 1 << 64  # every 64-bit draw is below this
    return int(rate * (1 << 64))


def _to_codes(oligos: list[str]) -> np.ndarray:
    length = len(oligos[0])
    flat = np.frombuffer("".join(oligos).encode("ascii"), dtype=np.uint8)
    return _CODE_OF_CHAR[flat].reshape(len(oligos), length)


def _to_strings(codes: np.ndarray) -> list[str]:
    n, length = codes.shape
    text = _CHAR_OF_CODE[codes.reshape(-1)].tobytes().decode("ascii")
    return [text[i * length : (i + 1) * length] for i in range(n)]


def _substitute(codes: np.ndarray, states: np.ndarray, rate: float) -> np.ndarray:
    """Advance each stream once per base position, substituting in place."""
    threshold = _threshold(rate)
    out = codes.copy()
    length = codes.shape[1]
    for pos in range(length):
        u = step_states(states)
        if threshold is None:
            continue
        if threshold >= 1 << 64:
            mask = np.ones(len(u), dtype=bool)
        else:
            mask = u < np.uint64(threshold)
        if not mask.any():
            continue
        offset = ((u[mask] >> np.uint64(32)) % np.uint64(3)).astype(np.uint8)
        out[mask, pos] = (out[mask, pos] + 1 + offset) % 4
    return out


def synthesize(oligos: list[str], manifest: Manifest, model: ErrorModel, bead_id: str) -> Bead:
    """Produce a bead from designed oligos through the synthesis channel.

    Oligos must all share one length. Dropout removes whole oligos;
    substitutions corrupt the stored copies. Deterministic for a fixed
    (model.rng_seed, bead_id).
    """
    if not oligos:
        return Bead(bead_id, [], manifest)
    if len({len(o) for o in oligos}) != 1:
        raise ValueError("all oligos in a bead must have equal length")

    base = derive_seed("synthesize", model.rng_seed, bead_id)
    seeds = substream_array(base, np.arange(len(oligos)))
    states = seed_states(seeds)

    u0 = step_states(states)  # dropout draw, consumed even at rate 0
    drop_threshold = _threshold(model.oligo_dropout_rate)
    if drop_threshold is None:
        kept = np.ones(len(oligos), dtype=bool)
    elif drop_threshold >= 1 << 64:
        kept = np.zeros(len(oligos), dtype=bool)
    else:
        kept = ~(u0 < np.uint64(drop_threshold))

    codes = _substitute(_to_codes(oligos), states, model.substitution_rate)
    stored = [s for s, keep in zip(_to_strings(codes), kept) if keep]
    return Bead(bead_id, stored, manifest)


def sequence_bead(bead: Bead, coverage: int, model: ErrorModel) -> ReadSet:
    """Emit ``coverage`` noisy reads of every stored oligo, round-major."""
    if coverage < 1:
        raise ValueError("coverage must be at least 1")
    if not bead.oligos:
        raise EmptyBead(f"bead {bead.bead_id} holds no oligos")

    n = len(bead.oligos)
    base = derive_seed("sequence", model.rng_seed, bead.bead_id)
    oligo_seeds = substream_array(base, np.arange(n))
    # (n, coverage) grid of per-read stream seeds, flattened oligo-major.
    read_seeds = substream_array(oligo_seeds[:, None], np.broadcast_to(np.arange(coverage), (n, coverage)))
    states = seed_states(read_seeds.reshape(-1))

    codes = np.repeat(_to_codes(bead.oligos), coverage, axis=0)
    noisy = _to_strings(_substitute(codes, states, model.substitution_rate))
    # noisy[i * coverage + j] is read j of oligo i; reorder round-major.
    reads = [noisy[i * coverage + j] for j in range(coverage) for i in range(n)]
    return ReadSet(reads, coverage)


def _crc_ok(raw: bytes) -> bool:
    return zlib.crc32(raw[:-4]) == int.from_bytes(raw[-4:], "big")


def _majority(pool: list[str]) -> str:
    length = len(pool[0])
    out = []
    for pos in range(length):
        counts: dict[str, int] = {}
        for read in pool:
            ch = read[pos]
            counts[ch] = counts.get(ch, 0) + 1
        best = max(counts.values())
        # deterministic tie break: alphabetically first base among the tied
        out.append(min(ch for ch, c in counts.items() if c == best))
    return "".join(out)


def consensus_reads(read_set: ReadSet, segment_size: int) -> list[str]:
    """Collapse noisy reads into CRC-valid consensus oligos.

    Reads are grouped by their raw 16-base seed field. Within a group the
    CRC-valid reads win outright (they are the molecule); a group with no
    valid read is put to a per-position majority vote, and the voted
    consensus survives only if it passes the CRC. Output preserves the
    first-seen group order.
    """
    frame_len = 4 * (OLIGO_HEADER_BYTES + segment_size)
    groups: dict[str, list[str]] = {}
    for read in read_set.reads:
        if len(read) != frame_len:
            continue  # foreign framing; nothing to vote on
        groups.setdefault(read[:16], []).append(read)

    consensus: list[str] = []
    for members in groups.values():
        valid = [r for r in members if _crc_ok(dna_to_bytes(r))]
        pool = valid if valid else members
        candidate = pool[0] if len(set(pool)) == 1 else _majority(pool)
        if _crc_ok(dna_to_bytes(candidate)):
            consensus.append(candidate)
    return consensus


# --- on-disk bead format --------------------------------------------------------
#
#   beads/<bead_id>/oligos.txt     oligo file format (header + one oligo per line)
#   beads/<bead_id>/manifest.json  {"K":, "segment_size":, "original_length":, "oligo_count":}


def save_bead(beads_dir: Path | str, bead: Bead) -> Path:
    bead_dir = Path(beads_dir) / bead.bead_id
    bead_dir.mkdir(parents=True, exist_ok=True)
    m = bead.manifest
    write_oligo_file(bead_dir / "oligos.txt", bead.oligos, m.k, m.segment_size, m.original_length)
    manifest = {
        "K": m.k,
        "segment_size": m.segment_size,
        "original_length": m.original_length,
        "oligo_count": m.oligo_count,
    }
    (bead_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return bead_dir


def load_bead(beads_dir: Path | str, bead_id: str) -> Bead:
    bead_dir = Path(beads_dir) / bead_id
    raw = json.loads((bead_dir / "manifest.json").read_text(encoding="utf-8"))
    manifest = Manifest(raw["K"], raw["segment_size"], raw["original_length"], raw["oligo_count"])
    oligos, _, _, _ = read_oligo_file(bead_dir / "oligos.txt")
    return Bead(bead_id, oligos, manifest)
