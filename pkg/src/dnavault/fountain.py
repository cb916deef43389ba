"""Rateless fountain coding of files into DNA oligos.

A file is cut into K fixed-size segments. Each output *droplet* XORs a
pseudo-random subset of segments; the subset is fully determined by the
droplet's 32-bit seed, so only the seed travels with the payload. Decoding
peels: resolve any droplet that covers exactly one unknown segment, XOR the
resolved segment out of every other droplet, repeat.

Wire framing of one droplet as an oligo::

    bytes_to_dna( seed(4B, big-endian) || payload(segment_size B) || CRC-32(4B) )

The CRC (standard reflected 0xEDB88320 polynomial, as implemented by
zlib.crc32) covers seed and payload, so any single-base substitution is
detected. Degree sampling uses the robust soliton distribution; candidate
droplets whose oligo fails the biological-plausibility screen (homopolymer
runs, GC window) are discarded and regenerated from the next seed.
"""

from __future__ import annotations

import math
import struct
import zlib
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path

from .dna_codec import bytes_to_dna, dna_to_bytes
from .errors import ChecksumMismatch, EmptyInput, InsufficientDroplets, LengthError, ScreenStarvation
from .rng import Xorshift64Star

DEFAULT_SOLITON_C = 0.1
DEFAULT_SOLITON_DELTA = 0.05

OLIGO_HEADER_BYTES = 8  # 4-byte seed + 4-byte CRC


@dataclass(frozen=True)
class Segment:
    index: int
    payload: bytes


@dataclass(frozen=True)
class Droplet:
    seed: int
    payload: bytes
    checksum: int
    degree: int | None = None


class RobustSoliton:
    """Degree distribution over 1..K used for droplet generation.

    Ideal soliton (1/K at degree 1, 1/(d(d-1)) above) plus the ripple term
    R/(dK) below the spike at floor(K/R) and R*ln(R/delta)/K at it, where
    R = c * ln(K/delta) * sqrt(K); normalized to sum to one.
    """

    def __init__(self, k: int, c: float = DEFAULT_SOLITON_C, delta: float = DEFAULT_SOLITON_DELTA):
        if k < 1:
            raise ValueError("segment count must be positive")
        if c <= 0:
            raise ValueError("c must be positive")
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        self.k = k
        self.c = c
        self.delta = delta

        weights = [0.0] * (k + 1)
        weights[1] = 1.0 / k
        for d in range(2, k + 1):
            weights[d] += 1.0 / (d * (d - 1))
        r = c * math.log(k / delta) * math.sqrt(k)
        spike = int(k / r) if r > 0 else 0
        for d in range(1, min(spike, k + 1)):
            weights[d] += r / (d * k)
        if 1 <= spike <= k:
            weights[spike] += r * math.log(r / delta) / k
        total = sum(weights)
        self.probabilities = [w / total for w in weights[1:]]
        self._cumulative = []
        acc = 0.0
        for p in self.probabilities:
            acc += p
            self._cumulative.append(acc)
        self._cumulative[-1] = 1.0

    def sample(self, rng: Xorshift64Star) -> int:
        """Draw a degree in 1..K (one uniform draw, inverse CDF)."""
        return bisect_left(self._cumulative, rng.random()) + 1


@dataclass(frozen=True)
class OligoScreen:
    """Synthesis-plausibility screen applied to candidate oligos."""

    max_homopolymer: int = 4
    gc_min: float = 0.25
    gc_max: float = 0.75

    def accepts(self, seq: str) -> bool:
        return screen_oligo(seq, self.max_homopolymer, self.gc_min, self.gc_max)


DEFAULT_SCREEN = OligoScreen()


def fragment(data: bytes, segment_size: int) -> tuple[list[Segment], int]:
    """Split ``data`` into zero-padded segments; returns (segments, true length)."""
    if not data:
        raise EmptyInput("cannot fragment zero bytes")
    if segment_size < 1:
        raise ValueError("segment_size must be positive")
    segments = []
    for index, start in enumerate(range(0, len(data), segment_size)):
        chunk = data[start : start + segment_size]
        segments.append(Segment(index, chunk.ljust(segment_size, b"\x00")))
    return segments, len(data)


def droplet_plan(seed: int, k: int, dist: RobustSoliton) -> tuple[int, list[int]]:
    """Degree and sorted segment indices determined by a droplet seed."""
    rng = Xorshift64Star(seed)
    degree = min(dist.sample(rng), k)
    return degree, rng.sample_distinct(degree, k)


def encode_droplets(
    segments: list[Segment],
    count: int,
    rng_seed: int,
    dist: RobustSoliton | None = None,
    *,
    screen: OligoScreen | None = None,
) -> list[Droplet]:
    """Generate exactly ``count`` droplets from a master seed.

    Candidate 32-bit droplet seeds come from the top bits of an
    xorshift64* stream seeded with ``rng_seed``; duplicates are skipped so
    every droplet is distinct. With a screen, candidates whose oligo fails
    it are dropped and the next seed is tried.
    """
    if not segments:
        raise EmptyInput("no segments to encode")
    if count < 1:
        raise ValueError("count must be positive")
    k = len(segments)
    dist = dist or RobustSoliton(k)
    segment_size = len(segments[0].payload)
    seg_ints = [int.from_bytes(s.payload, "big") for s in segments]

    master = Xorshift64Star(rng_seed)
    droplets: list[Droplet] = []
    seen: set[int] = set()
    attempts = 0
    budget = 200 * count + 1000  # screen starvation guard
    while len(droplets) < count:
        attempts += 1
        if attempts > budget:
            raise ScreenStarvation(
                f"screen accepted {len(droplets)} of {count} droplets in {attempts} attempts"
            )
        seed = master.next_u64() >> 32
        if seed in seen:
            continue
        seen.add(seed)
        degree, indices = droplet_plan(seed, k, dist)
        value = 0
        for i in indices:
            value ^= seg_ints[i]
        payload = value.to_bytes(segment_size, "big")
        checksum = zlib.crc32(struct.pack(">I", seed) + payload)
        droplet = Droplet(seed, payload, checksum, degree)
        if screen is not None and not screen.accepts(droplet_to_oligo(droplet)):
            continue
        droplets.append(droplet)
    return droplets


def _peel(index_sets: list[set[int]], values: list[int] | None, k: int) -> dict[int, int]:
    """Shared peeling core; ``values`` may be None for a structure-only pass."""
    by_segment: dict[int, list[int]] = {i: [] for i in range(k)}
    for slot, indices in enumerate(index_sets):
        for i in indices:
            by_segment[i].append(slot)

    resolved: dict[int, int] = {}
    ripple = [slot for slot, rem in enumerate(index_sets) if len(rem) == 1]
    while ripple:
        slot = ripple.pop()
        rem = index_sets[slot]
        if len(rem) != 1:
            continue
        index = next(iter(rem))
        rem.clear()
        if index in resolved:
            continue  # redundant droplet
        value = values[slot] if values is not None else 0
        resolved[index] = value
        for other in by_segment[index]:
            other_rem = index_sets[other]
            if index in other_rem:
                if values is not None:
                    values[other] ^= value
                other_rem.discard(index)
                if len(other_rem) == 1:
                    ripple.append(other)
    return resolved


def recoverable_segments(droplets: list[Droplet], k: int, dist: RobustSoliton | None = None) -> int:
    """How many segments an error-free peel of this droplet set recovers.

    Peeling success depends only on the seed-derived index sets, so this is
    a cheap decodability check (no payload XOR work).
    """
    dist = dist or RobustSoliton(k)
    index_sets = [set(droplet_plan(d.seed, k, dist)[1]) for d in droplets]
    return len(_peel(index_sets, None, k))


def decode(
    droplets: list[Droplet],
    k: int,
    segment_size: int,
    original_length: int,
    dist: RobustSoliton | None = None,
) -> bytes:
    """Peel the droplet set back into the original bytes.

    ``dist`` must match the encoder's distribution (defaults agree with
    :func:`encode_droplets`). Raises :class:`InsufficientDroplets` with the
    recovered count when peeling stalls.
    """
    dist = dist or RobustSoliton(k)
    index_sets = []
    values = []
    for droplet in droplets:
        index_sets.append(set(droplet_plan(droplet.seed, k, dist)[1]))
        values.append(int.from_bytes(droplet.payload, "big"))

    resolved = _peel(index_sets, values, k)
    if len(resolved) < k:
        raise InsufficientDroplets(len(resolved), k)
    out = b"".join(resolved[i].to_bytes(segment_size, "big") for i in range(k))
    return out[:original_length]


def droplet_to_oligo(droplet: Droplet) -> str:
    """Frame a droplet as bases: seed || payload || CRC-32, 4 bases per byte."""
    raw = struct.pack(">I", droplet.seed) + droplet.payload + struct.pack(">I", droplet.checksum)
    return bytes_to_dna(raw)


def oligo_to_droplet(
    seq: str,
    segment_size: int,
    k: int | None = None,
    dist: RobustSoliton | None = None,
) -> Droplet:
    """Parse and CRC-check an oligo.

    The degree field is only reconstructible from (seed, K, distribution);
    pass ``k`` (and optionally ``dist``) to fill it, otherwise it is None.
    """
    expected = 4 * (OLIGO_HEADER_BYTES + segment_size)
    if len(seq) != expected:
        raise LengthError(f"oligo length {len(seq)} != expected {expected} bases")
    raw = dna_to_bytes(seq)
    seed = struct.unpack(">I", raw[:4])[0]
    payload = raw[4 : 4 + segment_size]
    checksum = struct.unpack(">I", raw[-4:])[0]
    if zlib.crc32(raw[:-4]) != checksum:
        raise ChecksumMismatch(f"oligo with seed {seed} failed its CRC check")
    degree = None
    if k is not None:
        degree = droplet_plan(seed, k, dist or RobustSoliton(k))[0]
    return Droplet(seed, payload, checksum, degree)


def screen_oligo(seq: str, max_homopolymer: int, gc_min: float, gc_max: float) -> bool:
    """True iff no homopolymer run exceeds the cap and GC fraction is in range.

    The empty sequence passes (nothing to violate).
    """
    if not seq:
        return True
    run = 1
    for prev, cur in zip(seq, seq[1:]):
        if cur == prev:
            run += 1
            if run > max_homopolymer:
                return False
        else:
            run = 1
    if run > max_homopolymer:
        return False
    gc = (seq.count("G") + seq.count("C")) / len(seq)
    return gc_min <= gc <= gc_max


# --- oligo file format --------------------------------------------------------
#
# Plain text, one uppercase oligo per line, LF separated, with a single
# header line carrying the decode parameters:
#
#   #K=<int> SEG=<int> LEN=<int>


def write_oligo_file(path: Path | str, oligos: list[str], k: int, segment_size: int, original_length: int) -> None:
    lines = [f"#K={k} SEG={segment_size} LEN={original_length}"]
    lines.extend(oligos)
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_oligo_file(path: Path | str) -> tuple[list[str], int, int, int]:
    """Returns (oligos, K, segment_size, original_length)."""
    text = Path(path).read_text(encoding="ascii")
    lines = [line for line in text.split("\n") if line]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing oligo file header")
    fields = dict(item.split("=", 1) for item in lines[0][1:].split())
    try:
        k = int(fields["K"])
        segment_size = int(fields["SEG"])
        original_length = int(fields["LEN"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: malformed oligo file header") from exc
    return lines[1:], k, segment_size, original_length
